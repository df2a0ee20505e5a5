"""Synthetic two-channel vector-sensor recordings.

A single plane wave arriving from azimuth ``theta`` (counterclockwise from
the +x axis, elevation zero) drives the x/y particle-velocity channels as

    x(t) = u s(t) + e(t),    u = (cos theta, sin theta)

where ``s`` is the source waveform and ``e`` additive noise.  Everything in
this module is a pure function of its inputs; randomness comes only from
the integer ``seed`` passed in.

RNG streams
-----------
``numpy.random.SeedSequence(seed).spawn(3)`` yields three PCG64 substreams:
index 0 drives the source waveform, index 1 the x-channel noise and index 2
the y-channel noise.  Within a noise stream, white noise is drawn first
(``standard_normal(n)``), followed by the complex Gaussians for each
anisotropic band in declaration order (real parts then imaginary parts).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.io import wavfile

from .exceptions import InvalidSpecError

__all__ = [
    "ToneSet",
    "BandNoise",
    "SourceSpec",
    "NoiseBand",
    "NoiseSpec",
    "MultiChannelRecord",
    "direction_vector",
    "oriented_noise_matrix",
    "noise_variance_for_snr",
    "rng_streams",
    "source_waveform",
    "synth_plane_wave",
    "add_interferer",
    "save_record",
    "load_record",
    "load_metadata",
]


def direction_vector(azimuth_deg: float) -> np.ndarray:
    """Unit vector ``(cos theta, sin theta)`` for an azimuth in degrees."""
    theta = np.deg2rad(azimuth_deg)
    return np.array([np.cos(theta), np.sin(theta)])


def rng_streams(seed: int, n: int = 3) -> list[np.random.Generator]:
    """Independent generators following the module's stream-splitting rule."""
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class ToneSet:
    """Sum of zero-phase cosines, given as ``(frequency_hz, amplitude)`` pairs."""

    tones: tuple[tuple[float, float], ...]

    def __post_init__(self):
        tones = tuple((float(f), float(a)) for f, a in self.tones)
        if not tones:
            raise InvalidSpecError("a tone set needs at least one tone")
        for f, a in tones:
            if f <= 0:
                raise InvalidSpecError(f"tone frequency must be positive, got {f}")
            if a < 0:
                raise InvalidSpecError(f"tone amplitude must be nonnegative, got {a}")
        object.__setattr__(self, "tones", tones)

    @property
    def max_frequency(self) -> float:
        return max(f for f, _ in self.tones)

    def to_dict(self) -> dict:
        return {"kind": "tones", "tones": [list(t) for t in self.tones]}


@dataclass(frozen=True)
class BandNoise:
    """Gaussian noise with a flat spectrum on ``[f_lo, f_hi]`` Hz.

    ``power`` is the expected per-sample variance of the waveform, so the
    one-sided power spectral density inside the band is about
    ``power / (f_hi - f_lo)``.
    """

    f_lo: float
    f_hi: float
    power: float

    def __post_init__(self):
        if not 0 < self.f_lo < self.f_hi:
            raise InvalidSpecError(
                f"band must satisfy 0 < f_lo < f_hi, got [{self.f_lo}, {self.f_hi}]")
        if self.power < 0:
            raise InvalidSpecError(f"band power must be nonnegative, got {self.power}")

    @property
    def max_frequency(self) -> float:
        return self.f_hi

    @property
    def psd_level(self) -> float:
        return self.power / (self.f_hi - self.f_lo)

    def to_dict(self) -> dict:
        return {"kind": "band", "f_lo": self.f_lo, "f_hi": self.f_hi,
                "power": self.power}


Waveform = Union[ToneSet, BandNoise]


def _waveform_from_dict(d: dict) -> Waveform:
    kind = d.get("kind")
    if kind == "tones":
        return ToneSet(tuple(tuple(t) for t in d["tones"]))
    if kind == "band":
        return BandNoise(float(d["f_lo"]), float(d["f_hi"]), float(d["power"]))
    raise InvalidSpecError(f"unknown waveform kind {kind!r}")


@dataclass(frozen=True)
class SourceSpec:
    """A plane-wave source: arrival azimuth plus waveform."""

    azimuth_deg: float
    waveform: Waveform

    def __post_init__(self):
        if not np.isfinite(self.azimuth_deg):
            raise InvalidSpecError("azimuth must be finite")
        object.__setattr__(self, "azimuth_deg", float(self.azimuth_deg) % 360.0)

    def scaled(self, gain: float) -> "SourceSpec":
        """Same source with the waveform amplitude multiplied by ``gain``."""
        w = self.waveform
        if isinstance(w, ToneSet):
            w = ToneSet(tuple((f, a * gain) for f, a in w.tones))
        else:
            w = BandNoise(w.f_lo, w.f_hi, w.power * gain ** 2)
        return SourceSpec(self.azimuth_deg, w)

    def support(self, freqs: np.ndarray) -> np.ndarray:
        """Boolean mask of the bins in ``freqs`` that the source occupies.

        A tone occupies the bin nearest to it; band noise occupies every
        bin inside its closed band.
        """
        freqs = np.asarray(freqs, dtype=float)
        mask = np.zeros(freqs.shape, dtype=bool)
        w = self.waveform
        if isinstance(w, ToneSet):
            for f, _ in w.tones:
                mask[np.argmin(np.abs(freqs - f))] = True
        else:
            mask |= (freqs >= w.f_lo) & (freqs <= w.f_hi)
        return mask

    def to_dict(self) -> dict:
        return {"azimuth_deg": self.azimuth_deg, "waveform": self.waveform.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpec":
        return cls(float(d["azimuth_deg"]), _waveform_from_dict(d["waveform"]))


def oriented_noise_matrix(major: float, minor: float, angle_deg: float) -> np.ndarray:
    """Real 2x2 PSD matrix with eigenvalue ``major`` along ``angle_deg``.

    The orthogonal direction carries ``minor``.
    """
    w = direction_vector(angle_deg)
    w_perp = np.array([-w[1], w[0]])
    return major * np.outer(w, w) + minor * np.outer(w_perp, w_perp)


def _check_psd(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidSpecError(f"{what} must be 2x2, got shape {m.shape}")
    scale = max(np.abs(m).max(), 1e-300)
    if np.abs(m - m.conj().T).max() > 1e-12 * scale:
        raise InvalidSpecError(f"{what} is not Hermitian")
    m = (m + m.conj().T) / 2
    if np.linalg.eigvalsh(m)[0] < -1e-12 * scale:
        raise InvalidSpecError(f"{what} is not positive semidefinite")
    return m


@dataclass(frozen=True)
class NoiseBand:
    """Noise whose one-sided CSD matrix equals ``matrix`` on ``[f_lo, f_hi]``.

    ``matrix`` is in the same units ``welch_csd`` reports (units**2 / Hz),
    so the averaged periodogram of this noise converges to it.
    """

    f_lo: float
    f_hi: float
    matrix: np.ndarray

    def __post_init__(self):
        if not 0 <= self.f_lo < self.f_hi:
            raise InvalidSpecError(
                f"noise band must satisfy 0 <= f_lo < f_hi, got [{self.f_lo}, {self.f_hi}]")
        object.__setattr__(self, "matrix", _check_psd(self.matrix, "noise band matrix"))

    def to_dict(self) -> dict:
        return {"f_lo": self.f_lo, "f_hi": self.f_hi,
                "matrix_re": self.matrix.real.tolist(),
                "matrix_im": self.matrix.imag.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseBand":
        m = np.asarray(d["matrix_re"], dtype=float)
        if "matrix_im" in d:
            m = m + 1j * np.asarray(d["matrix_im"], dtype=float)
        return cls(float(d["f_lo"]), float(d["f_hi"]), m)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive sensor noise.

    ``variance`` is white Gaussian noise, independent across channels
    (isotropic, Sigma proportional to I).  ``bands`` add colored noise with a
    prescribed 2x2 CSD matrix per band (anisotropic).  Both may be combined.
    When ``condition_bound`` is set every band matrix must have condition
    number at most that value.
    """

    variance: float = 0.0
    bands: tuple[NoiseBand, ...] = ()
    condition_bound: float | None = None

    def __post_init__(self):
        if self.variance < 0:
            raise InvalidSpecError(f"noise variance must be nonnegative, got {self.variance}")
        object.__setattr__(self, "bands", tuple(self.bands))
        c = self.condition_bound
        if c is not None:
            if c < 1:
                raise InvalidSpecError(f"condition bound must be >= 1, got {c}")
            for b in self.bands:
                lo, hi = np.linalg.eigvalsh(b.matrix)
                if hi > c * lo:
                    raise InvalidSpecError(
                        f"band [{b.f_lo}, {b.f_hi}] has condition number above {c}")

    @classmethod
    def isotropic(cls, variance: float) -> "NoiseSpec":
        return cls(variance=variance)

    @classmethod
    def anisotropic(cls, bands: Sequence[NoiseBand], variance: float = 0.0,
                    condition_bound: float | None = None) -> "NoiseSpec":
        return cls(variance=variance, bands=tuple(bands), condition_bound=condition_bound)

    @property
    def kind(self) -> str:
        return "anisotropic" if self.bands else "isotropic"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "variance": self.variance,
                "bands": [b.to_dict() for b in self.bands],
                "condition_bound": self.condition_bound}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        return cls(variance=float(d.get("variance", 0.0)),
                   bands=tuple(NoiseBand.from_dict(b) for b in d.get("bands", ())),
                   condition_bound=d.get("condition_bound"))


def noise_variance_for_snr(source: BandNoise, snr_db: float, sample_rate: float) -> float:
    """White-noise variance giving a per-bin SNR of ``snr_db`` inside the source band.

    Per-bin SNR is the ratio of the source PSD level to the per-channel noise
    PSD level; white noise of variance ``v`` has one-sided level ``2 v / fs``.
    """
    return source.psd_level * sample_rate / (2.0 * 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class MultiChannelRecord:
    """Time-domain x/y velocity channels sampled at ``sample_rate`` Hz.

    ``channels`` has shape ``(2, n_samples)``; row 0 is x, row 1 is y.
    """

    sample_rate: float
    channels: np.ndarray = field(repr=False)

    def __post_init__(self):
        ch = np.array(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] != 2:
            raise InvalidSpecError(f"expected channels of shape (2, n), got {ch.shape}")
        if ch.shape[1] < 1:
            raise InvalidSpecError("channels must hold at least one sample")
        if not self.sample_rate > 0:
            raise InvalidSpecError(f"sample rate must be positive, got {self.sample_rate}")
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)

    @property
    def x(self) -> np.ndarray:
        return self.channels[0]

    @property
    def y(self) -> np.ndarray:
        return self.channels[1]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


def _check_nyquist(waveform: Waveform, sample_rate: float):
    if waveform.max_frequency >= sample_rate / 2:
        raise InvalidSpecError(
            f"frequency {waveform.max_frequency} Hz is not below Nyquist ({sample_rate / 2} Hz)")


def _band_bins(n: int, sample_rate: float, f_lo: float, f_hi: float) -> np.ndarray:
    """Interior rfft bin indices with frequency in ``[f_lo, f_hi]``."""
    k = np.arange(n // 2 + 1)
    f = k * sample_rate / n
    sel = (f >= f_lo) & (f <= f_hi) & (k > 0)
    if n % 2 == 0:
        sel &= k < n // 2
    return k[sel]


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) / np.sqrt(2.0)


def source_waveform(waveform: Waveform, n: int, sample_rate: float,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Sample ``s(t)`` at ``t = 0, 1/fs, ..., (n-1)/fs``."""
    _check_nyquist(waveform, sample_rate)
    if isinstance(waveform, ToneSet):
        t = np.arange(n) / sample_rate
        s = np.zeros(n)
        for f, a in waveform.tones:
            s += a * np.cos(2 * np.pi * f * t)
        return s
    if rng is None:
        raise InvalidSpecError("band-noise waveforms need a random generator")
    bins = _band_bins(n, sample_rate, waveform.f_lo, waveform.f_hi)
    if bins.size == 0:
        raise InvalidSpecError(
            f"band [{waveform.f_lo}, {waveform.f_hi}] Hz holds no frequency at this length")
    spec = np.zeros(n // 2 + 1, dtype=complex)
    scale = np.sqrt(waveform.power * n ** 2 / (2 * bins.size))
    spec[bins] = scale * _complex_normal(rng, bins.size)
    return np.fft.irfft(spec, n=n)


def _hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def _noise(noise: NoiseSpec, n: int, sample_rate: float,
           rng_x: np.random.Generator, rng_y: np.random.Generator) -> np.ndarray:
    out = np.zeros((2, n))
    sd = np.sqrt(noise.variance)
    out[0] += sd * rng_x.standard_normal(n)
    out[1] += sd * rng_y.standard_normal(n)
    if noise.bands:
        spec = np.zeros((2, n // 2 + 1), dtype=complex)
        for band in noise.bands:
            if band.f_lo >= sample_rate / 2:
                raise InvalidSpecError(f"noise band starting at {band.f_lo} Hz is above Nyquist")
            bins = _band_bins(n, sample_rate, band.f_lo, band.f_hi)
            z = np.stack([_complex_normal(rng_x, bins.size),
                          _complex_normal(rng_y, bins.size)])
            # E|X_k|^2 = n * fs * P / 2 for a one-sided PSD level P
            spec[:, bins] += np.sqrt(n * sample_rate / 2) * (_hermitian_sqrt(band.matrix) @ z)
        out += np.fft.irfft(spec, n=n, axis=1)
    return out


def _n_samples(duration: float, sample_rate: float) -> int:
    if not duration > 0:
        raise InvalidSpecError(f"duration must be positive, got {duration}")
    if not sample_rate > 0:
        raise InvalidSpecError(f"sample rate must be positive, got {sample_rate}")
    n = int(round(duration * sample_rate))
    if n < 2:
        raise InvalidSpecError("duration * sample_rate must be at least 2")
    return n


def synth_plane_wave(source: SourceSpec, noise: NoiseSpec, duration: float,
                     sample_rate: float, seed: int) -> MultiChannelRecord:
    """Simulate ``u s(t) + e(t)`` for one plane-wave source.

    Parameters
    ----------
    source : SourceSpec
        Arrival azimuth and waveform.
    noise : NoiseSpec
        Additive noise model.
    duration : float
        Record length in seconds; ``round(duration * sample_rate)`` samples.
    sample_rate : float
        Sampling frequency in Hz.
    seed : int
        Seed for the three RNG substreams (see module docstring).

    Returns
    -------
    MultiChannelRecord
    """
    n = _n_samples(duration, sample_rate)
    _check_nyquist(source.waveform, sample_rate)
    rng_s, rng_x, rng_y = rng_streams(seed)
    s = source_waveform(source.waveform, n, sample_rate, rng_s)
    data = np.outer(direction_vector(source.azimuth_deg), s)
    data += _noise(noise, n, sample_rate, rng_x, rng_y)
    return MultiChannelRecord(sample_rate, data)


def add_interferer(record: MultiChannelRecord, interferer: SourceSpec,
                   seed: int) -> MultiChannelRecord:
    """Return ``record`` plus a second noiseless plane wave.

    The interferer waveform uses substream 0 of ``seed``.  ``record`` itself
    is left untouched.
    """
    _check_nyquist(interferer.waveform, record.sample_rate)
    rng_s = rng_streams(seed)[0]
    s = source_waveform(interferer.waveform, record.n_samples, record.sample_rate, rng_s)
    data = record.channels + np.outer(direction_vector(interferer.azimuth_deg), s)
    return MultiChannelRecord(record.sample_rate, data)


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def save_record(path, record: MultiChannelRecord, metadata: dict | None = None) -> Path:
    """Write a 2-channel 32-bit float WAV plus a JSON sidecar next to it."""
    path = Path(path)
    rate = int(round(record.sample_rate))
    if rate != record.sample_rate:
        raise InvalidSpecError("WAV files need an integer sample rate")
    wavfile.write(path, rate, record.channels.T.astype(np.float32))
    meta = {"sample_rate": rate}
    meta.update(metadata or {})
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_record(path) -> MultiChannelRecord:
    rate, data = wavfile.read(Path(path))
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidSpecError(f"{path}: expected a 2-channel WAV file")
    if np.issubdtype(data.dtype, np.integer):
        data = data / float(np.iinfo(data.dtype).max)
    return MultiChannelRecord(float(rate), data.T.astype(float))


def load_metadata(path) -> dict:
    """Sidecar metadata for a recording, or ``{}`` when there is none."""
    side = _sidecar(Path(path))
    if not side.exists():
        return {}
    return json.loads(side.read_text())
