"""Scenario configs: synthetic labeled observations, manifests and sweeps.

A scenario config is a JSON object, e.g.::

    {
      "sample_rate": 8192, "duration": 10.0, "n_observations": 20,
      "source": {"kind": "band", "f_lo": 80, "f_hi": 280, "power": 200.0},
      "azimuth_deg": [190, 350],
      "snr_db": 20,
      "range_km": [1, 15], "ref_range_km": 1.0
    }

``azimuth_deg`` is either a ``[lo, hi]`` interval drawn uniformly or a
list of more than two fixed values cycled through.  ``snr_db`` is the per-bin
SNR at ``ref_range_km`` for band sources; with a range the SNR falls off as
``20 log10(range / ref_range)``.  An explicit ``"noise"`` object (see
:meth:`NoiseSpec.from_dict`) is added on top, and an optional
``"interferer"`` (a :meth:`SourceSpec.from_dict` object) is superposed.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluation import MethodConfig, Observation, angular_error, run_methods, write_manifest
from .exceptions import InvalidSpecError
from .signal_model import (BandNoise, MultiChannelRecord, NoiseBand, NoiseSpec, SourceSpec,
                           ToneSet, Waveform, _waveform_from_dict, add_interferer,
                           noise_variance_for_snr, oriented_noise_matrix, save_record,
                           synth_plane_wave)

__all__ = [
    "Scenario",
    "SyntheticObservation",
    "synth_manifest",
    "sweep",
    "sweep_to_csv",
    "high_snr_scenario",
    "selective_band_scenario",
]


@dataclass(frozen=True)
class SyntheticObservation:
    id: str
    record: MultiChannelRecord
    true_azimuth_deg: float
    range_km: float | None
    snr_db: float | None
    seed: int
    source: SourceSpec
    noise: NoiseSpec


@dataclass(frozen=True)
class Scenario:
    waveform: Waveform
    sample_rate: float = 8192.0
    duration: float = 10.0
    n_observations: int = 10
    azimuth_deg: tuple[float, ...] = (0.0, 180.0)
    snr_db: float | None = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    range_km: tuple[float, float] | None = None
    ref_range_km: float = 1.0
    interferer: SourceSpec | None = None

    def __post_init__(self):
        az = tuple(float(a) for a in self.azimuth_deg)
        if not az:
            raise InvalidSpecError("azimuth_deg must not be empty")
        object.__setattr__(self, "azimuth_deg", az)
        if self.snr_db is not None and not isinstance(self.waveform, BandNoise):
            raise InvalidSpecError("snr_db needs a band-noise source; give explicit noise instead")
        if self.n_observations < 1:
            raise InvalidSpecError("n_observations must be at least 1")
        if self.range_km is not None:
            lo, hi = (float(r) for r in self.range_km)
            if not 0 < lo <= hi:
                raise InvalidSpecError(f"range_km must satisfy 0 < lo <= hi, got {self.range_km}")
            object.__setattr__(self, "range_km", (lo, hi))

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = {"sample_rate", "duration", "n_observations", "azimuth_deg", "snr_db",
                 "noise", "range_km", "ref_range_km", "interferer", "source", "sweep"}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpecError(f"unknown scenario keys {sorted(unknown)}")
        if "source" not in d:
            raise InvalidSpecError("scenario needs a 'source' waveform")
        az = d.get("azimuth_deg", (0.0, 180.0))
        az = (float(az),) if np.isscalar(az) else tuple(az)
        return cls(
            waveform=_waveform_from_dict(d["source"]),
            sample_rate=float(d.get("sample_rate", 8192.0)),
            duration=float(d.get("duration", 10.0)),
            n_observations=int(d.get("n_observations", 10)),
            azimuth_deg=az,
            snr_db=d.get("snr_db"),
            noise=NoiseSpec.from_dict(d["noise"]) if "noise" in d else NoiseSpec(),
            range_km=tuple(d["range_km"]) if d.get("range_km") else None,
            ref_range_km=float(d.get("ref_range_km", 1.0)),
            interferer=SourceSpec.from_dict(d["interferer"]) if d.get("interferer") else None,
        )

    def _draw_azimuth(self, i: int, rng: np.random.Generator) -> float:
        if len(self.azimuth_deg) == 2:
            lo, hi = self.azimuth_deg
            return float(rng.uniform(lo, hi)) % 360.0 if hi > lo else lo % 360.0
        return self.azimuth_deg[i % len(self.azimuth_deg)] % 360.0

    def snr_at(self, range_km: float | None) -> float | None:
        if self.snr_db is None:
            return None
        if range_km is None:
            return float(self.snr_db)
        return float(self.snr_db - 20.0 * np.log10(range_km / self.ref_range_km))

    def noise_for(self, snr_db: float | None) -> NoiseSpec:
        if snr_db is None:
            return self.noise
        extra = noise_variance_for_snr(self.waveform, snr_db, self.sample_rate)
        return replace(self.noise, variance=self.noise.variance + extra)

    def observation(self, i: int, seed: int, *, azimuth_deg: float | None = None,
                    range_km: float | None = None, snr_db: float | None = None
                    ) -> SyntheticObservation:
        """Observation ``i`` of a run seeded by ``seed``.

        Keyword overrides pin the azimuth, range or SNR instead of drawing
        them; sweeps use this.
        """
        ss = np.random.SeedSequence([int(seed), int(i)])
        draw_rng = np.random.default_rng(ss.spawn(1)[0])
        rec_seed = int(ss.generate_state(1)[0])
        az = self._draw_azimuth(i, draw_rng) if azimuth_deg is None else float(azimuth_deg)
        if range_km is None and self.range_km is not None:
            range_km = float(draw_rng.uniform(*self.range_km))
        if snr_db is None:
            snr_db = self.snr_at(range_km)
        source = SourceSpec(az, self.waveform)
        noise = self.noise_for(snr_db)
        record = synth_plane_wave(source, noise, self.duration, self.sample_rate, rec_seed)
        if self.interferer is not None:
            record = add_interferer(record, self.interferer, rec_seed + 1)
        return SyntheticObservation(f"obs{i:05d}", record, source.azimuth_deg, range_km,
                                    snr_db, rec_seed, source, noise)

    def observations(self, seed: int):
        for i in range(self.n_observations):
            yield self.observation(i, seed)


def synth_manifest(scenario: Scenario, out_dir, seed: int) -> Path:
    """Write WAV recordings, JSON sidecars and ``manifest.csv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for obs in scenario.observations(seed):
        fname = f"{obs.id}.wav"
        save_record(out_dir / fname, obs.record, {
            "azimuth_deg": obs.true_azimuth_deg, "seed": obs.seed, "range_km": obs.range_km,
            "snr_db": obs.snr_db, "source": obs.source.to_dict(), "noise": obs.noise.to_dict(),
            "duration": scenario.duration,
        })
        rows.append(Observation(obs.id, fname, obs.true_azimuth_deg, obs.range_km))
    return write_manifest(out_dir / "manifest.csv", rows)


SWEEP_COLUMNS = ("kind", "value", "seed", "method", "true_azimuth_deg", "azimuth_deg",
                 "error_deg", "degenerate")


def sweep(scenario: Scenario, kind: str, values: Sequence[float], seeds: Sequence[int],
          methods: Sequence[MethodConfig]) -> list[dict]:
    """Long-format results over an SNR (dB) or range (km) grid.

    Returns ``len(values) * len(seeds) * len(methods)`` rows; a method that
    fails on a draw reports ``azimuth_deg`` and ``error_deg`` as ``None``.
    """
    if kind not in ("snr", "range"):
        raise InvalidSpecError(f"sweep kind must be 'snr' or 'range', got {kind!r}")
    if kind == "snr" and not isinstance(scenario.waveform, BandNoise):
        raise InvalidSpecError("an SNR sweep needs a band-noise source")
    rows = []
    for value in values:
        for seed in seeds:
            if kind == "snr":
                obs = scenario.observation(0, seed, snr_db=float(value))
            else:
                obs = scenario.observation(0, seed, range_km=float(value))
            for cfg, est in zip(methods, run_methods(obs.record, methods)):
                ok = not isinstance(est, Exception)
                rows.append({
                    "kind": kind, "value": float(value), "seed": int(seed), "method": cfg.name,
                    "true_azimuth_deg": obs.true_azimuth_deg,
                    "azimuth_deg": float(est.azimuth_deg) if ok else None,
                    "error_deg": angular_error(est.azimuth_deg, obs.true_azimuth_deg)
                    if ok else None,
                    "degenerate": bool(est.degenerate) if ok else None,
                })
    return rows


def sweep_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: "" if row[k] is None else repr(row[k]) if isinstance(row[k], float)
                    else row[k] for k in SWEEP_COLUMNS})
    return buf.getvalue()


# -- benchmark scenarios ------------------------------------------------------

def high_snr_scenario(azimuth_deg: float = 60.0, snr_db: float = 20.0,
                      duration: float = 10.0) -> Scenario:
    """Band-noise source filling 75-300 Hz with isotropic white noise at ``snr_db`` per bin."""
    return Scenario(BandNoise(75.0, 300.0, 225.0), duration=duration,
                    azimuth_deg=(azimuth_deg,), snr_db=snr_db)


def selective_band_scenario(azimuth_deg: float = 60.0, duration: float = 20.0,
                            signal_band: tuple[float, float] = (199.0, 219.0),
                            noise_major: float = 0.6, noise_minor: float = 0.55,
                            floor_level: float = 0.01, sample_rate: float = 8192.0
                            ) -> Scenario:
    """Narrow-band source plus stronger, weakly anisotropic noise elsewhere.

    The source has PSD level 1 on ``signal_band`` (10 two-hertz bins by
    default).  Every other bin of 70-305 Hz carries noise with CSD
    ``noise_major`` along the axis 90 degrees from the source and
    ``noise_minor`` along the source axis, so each noise bin has more total
    power than a signal bin.  A white floor of one-sided level
    ``floor_level`` covers all frequencies.
    """
    lo, hi = signal_band
    sigma = oriented_noise_matrix(noise_major, noise_minor, azimuth_deg + 90.0)
    eps = 1e-6
    noise = NoiseSpec.anisotropic(
        [NoiseBand(70.0, lo - eps, sigma), NoiseBand(hi + eps, 305.0, sigma)],
        variance=floor_level * sample_rate / 2.0)
    return Scenario(BandNoise(lo, hi, hi - lo), sample_rate=sample_rate, duration=duration,
                    azimuth_deg=(azimuth_deg,), noise=noise)
