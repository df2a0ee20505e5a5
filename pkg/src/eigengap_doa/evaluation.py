"""Batch evaluation of DOA estimators against labeled recordings."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import covariance_doa, uniform_weight_doa
from .core import DoaEstimate, NormKind, Scheme, estimate_doa
from .exceptions import (EigengapError, EmptyInputError, EvaluationError,
                         InvalidSpecError)
from .signal_model import MultiChannelRecord, load_record
from .spectral import DEFAULT_BAND, SpectralConfig, select_band, welch_csd

__all__ = [
    "angular_error",
    "maad",
    "MethodConfig",
    "BENCHMARK_METHODS",
    "DEFAULT_METHODS",
    "run_method",
    "run_methods",
    "Observation",
    "Manifest",
    "read_manifest",
    "write_manifest",
    "MethodReport",
    "EvalReport",
    "evaluate",
    "load_methods",
]

SCHEMA_VERSION = 1
DEFAULT_RANGE_EDGES_KM = (3.0, 6.0, 9.0, 12.0, 15.0)
DEFAULT_HIST_WIDTH_DEG = 5.0
MANIFEST_COLUMNS = ("id", "path", "true_azimuth_deg", "range_km")


def angular_error(est_deg, truth_deg):
    """Axial angular distance in degrees, in ``[0, 90]``.

    Both angles are reduced mod 180 before comparing, so an estimate and its
    antipode are the same answer.
    """
    d = np.abs(np.mod(np.asarray(est_deg, dtype=float), 180.0)
               - np.mod(np.asarray(truth_deg, dtype=float), 180.0))
    out = np.minimum(d, 180.0 - d)
    return float(out) if out.ndim == 0 else out


def maad(errors: Iterable[float]) -> float:
    """Mean absolute angular deviation."""
    errors = np.asarray(list(errors), dtype=float)
    if errors.size == 0:
        raise EmptyInputError("MAAD of an empty error list")
    return float(np.mean(np.abs(errors)))


# -- methods ------------------------------------------------------------------

_EIGENGAP_VARIANTS = {
    (NormKind.L1, Scheme.TRACE),
    (NormKind.L2, Scheme.MINEIG),
    (NormKind.L2, Scheme.NONE),
}


@dataclass(frozen=True)
class MethodConfig:
    """One estimator and its analysis band.

    Eigengap variants are limited to l1-trace, l2-mineig and l2-none.
    """

    method: str
    norm: NormKind | None = None
    scheme: Scheme | None = None
    band: tuple[float, float] = DEFAULT_BAND
    spectral: SpectralConfig = field(default_factory=SpectralConfig)

    def __post_init__(self):
        method = str(self.method).lower()
        norm = NormKind.parse(self.norm) if self.norm is not None else None
        scheme = Scheme.parse(self.scheme) if self.scheme is not None else None
        if method == "eigengap":
            if (norm, scheme) not in _EIGENGAP_VARIANTS:
                raise InvalidSpecError(
                    f"eigengap variant {norm} / {scheme} is not one of l1-trace, "
                    "l2-mineig, l2-none")
        elif method == "uniform":
            norm, scheme = NormKind.L2, scheme or Scheme.NONE
        elif method == "covariance":
            norm = scheme = None
        else:
            raise InvalidSpecError(f"unknown method {self.method!r}")
        lo, hi = (float(b) for b in self.band)
        if not 0 < lo < hi:
            raise InvalidSpecError(f"band must satisfy 0 < lo < hi, got {self.band}")
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "band", (lo, hi))

    @property
    def name(self) -> str:
        if self.method == "eigengap":
            return f"{self.norm.value}-{self.scheme.value}"
        if self.method == "uniform":
            return f"uniform-{self.scheme.value}"
        return "covariance"

    def to_dict(self) -> dict:
        return {"method": self.method,
                "norm": self.norm.value if self.norm else None,
                "scheme": self.scheme.value if self.scheme else None,
                "band": list(self.band),
                "spectral": self.spectral.to_dict()}

    @classmethod
    def from_dict(cls, d: dict, band=None, spectral: SpectralConfig | None = None
                  ) -> "MethodConfig":
        spec = d.get("spectral")
        return cls(method=d["method"], norm=d.get("norm"), scheme=d.get("scheme"),
                   band=tuple(d.get("band", band or DEFAULT_BAND)),
                   spectral=SpectralConfig.from_dict(spec) if spec else
                   (spectral or SpectralConfig()))


BENCHMARK_METHODS = (
    MethodConfig("eigengap", "l1", "trace"),
    MethodConfig("eigengap", "l2", "mineig"),
    MethodConfig("eigengap", "l2", "none"),
    MethodConfig("covariance"),
)
DEFAULT_METHODS = BENCHMARK_METHODS + (MethodConfig("uniform", scheme="none"),)


def load_methods(config: dict | None) -> list[MethodConfig]:
    """Parse a methods config ``{"band": [lo, hi], "spectral": {...}, "methods": [...]}``."""
    if not config:
        return list(DEFAULT_METHODS)
    band = config.get("band")
    spectral = SpectralConfig.from_dict(config["spectral"]) if "spectral" in config else None
    methods = config.get("methods")
    if not methods:
        return [MethodConfig(m.method, m.norm, m.scheme,
                             tuple(band) if band else m.band,
                             spectral or m.spectral) for m in DEFAULT_METHODS]
    return [MethodConfig.from_dict(m, band=band, spectral=spectral) for m in methods]


def run_methods(record: MultiChannelRecord, methods: Sequence[MethodConfig]
                ) -> list[DoaEstimate | EigengapError]:
    """Run every method on one record, sharing CSD estimates between methods.

    Failures are returned in place of the estimate rather than raised.
    """
    nyq = record.sample_rate / 2
    csd_cache = {}
    out = []
    for cfg in methods:
        try:
            if cfg.band[1] >= nyq:
                raise InvalidSpecError(f"band {cfg.band} reaches Nyquist ({nyq} Hz)")
            if cfg.method == "covariance":
                out.append(covariance_doa(record, *cfg.band))
                continue
            if cfg.spectral not in csd_cache:
                csd_cache[cfg.spectral] = welch_csd(record, cfg.spectral)
            csd = select_band(csd_cache[cfg.spectral], *cfg.band)
            if cfg.method == "uniform":
                out.append(uniform_weight_doa(csd, cfg.scheme))
            else:
                out.append(estimate_doa(csd, cfg.scheme, cfg.norm))
        except EigengapError as exc:
            out.append(exc)
    return out


def run_method(record: MultiChannelRecord, method: MethodConfig) -> DoaEstimate:
    result = run_methods(record, [method])[0]
    if isinstance(result, Exception):
        raise result
    return result


# -- manifests ----------------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    id: str
    path: str
    true_azimuth_deg: float
    range_km: float | None = None

    def __post_init__(self):
        if not 0 <= self.true_azimuth_deg < 360:
            raise InvalidSpecError(
                f"observation {self.id}: azimuth {self.true_azimuth_deg} outside [0, 360)")
        if self.range_km is not None and not self.range_km > 0:
            raise InvalidSpecError(f"observation {self.id}: range must be positive")


@dataclass(frozen=True)
class Manifest:
    """Labeled observations; relative paths resolve against ``base_dir``."""

    observations: tuple[Observation, ...]
    base_dir: Path = Path(".")

    def __post_init__(self):
        ids = [o.id for o in self.observations]
        if len(set(ids)) != len(ids):
            raise InvalidSpecError("observation ids must be unique")
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "base_dir", Path(self.base_dir))

    def __len__(self) -> int:
        return len(self.observations)

    def resolve(self, obs: Observation) -> Path:
        p = Path(obs.path)
        return p if p.is_absolute() else self.base_dir / p


def read_manifest(path) -> Manifest:
    """Read a CSV manifest with columns ``id,path,true_azimuth_deg,range_km``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS[:3]) - set(reader.fieldnames or ())
        if missing:
            raise InvalidSpecError(f"{path}: manifest lacks columns {sorted(missing)}")
        rows = []
        for row in reader:
            rng = (row.get("range_km") or "").strip()
            try:
                rows.append(Observation(row["id"], row["path"],
                                        float(row["true_azimuth_deg"]),
                                        float(rng) if rng else None))
            except ValueError as exc:
                if isinstance(exc, InvalidSpecError):
                    raise
                raise InvalidSpecError(f"{path}: bad row {row}: {exc}") from None
    return Manifest(tuple(rows), path.parent)


def write_manifest(path, observations: Iterable[Observation]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for o in observations:
            w.writerow([o.id, o.path, repr(float(o.true_azimuth_deg)),
                        "" if o.range_km is None else repr(float(o.range_km))])
    return path


# -- reports ------------------------------------------------------------------

@dataclass
class MethodReport:
    """Aggregate errors of one method over the successfully processed rows."""

    name: str
    config: dict
    errors: list[float]
    ranges: list[float | None]
    n_degenerate: int
    range_edges_km: Sequence[float]
    hist_width_deg: float

    @property
    def n_observations(self) -> int:
        return len(self.errors)

    @property
    def maad_deg(self) -> float | None:
        return maad(self.errors) if self.errors else None

    def range_bins(self) -> list[dict]:
        """Cumulative bins: every observation with range at most the edge."""
        out = []
        rng = np.array([np.nan if r is None else r for r in self.ranges], dtype=float)
        err = np.asarray(self.errors, dtype=float)
        for edge in self.range_edges_km:
            sel = rng <= edge
            n = int(np.count_nonzero(sel))
            out.append({"max_range_km": float(edge), "n": n,
                        "maad_deg": maad(err[sel]) if n else None})
        return out

    def histogram(self) -> dict:
        w = float(self.hist_width_deg)
        edges = np.arange(0.0, 90.0, w)
        edges = np.append(edges, 90.0)
        counts, _ = np.histogram(np.asarray(self.errors, dtype=float), bins=edges)
        return {"bin_width_deg": w, "edges_deg": edges.tolist(),
                "counts": [int(c) for c in counts]}

    def to_dict(self) -> dict:
        return {"name": self.name, "config": self.config, "maad_deg": self.maad_deg,
                "n_observations": self.n_observations, "n_degenerate": self.n_degenerate,
                "range_bins": self.range_bins(), "histogram": self.histogram()}


@dataclass
class EvalReport:
    methods: list[MethodReport]
    rows: list[dict]
    failures: list[dict]

    def method(self, name: str) -> MethodReport:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION,
                "methods": [m.to_dict() for m in self.methods],
                "failures": self.failures}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """One row per (observation, method) estimate."""
        buf = io.StringIO()
        cols = ["id", "method", "true_azimuth_deg", "range_km", "azimuth_deg",
                "error_deg", "eigengap", "degenerate"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: ("" if row[k] is None else
                            repr(row[k]) if isinstance(row[k], float) else row[k])
                        for k in cols})
        return buf.getvalue()

    def write(self, out_dir, stem: str = "report") -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        jpath, cpath = out_dir / f"{stem}.json", out_dir / f"{stem}.csv"
        jpath.write_text(self.to_json())
        cpath.write_text(self.to_csv())
        return jpath, cpath


def evaluate(manifest: Manifest, methods: Sequence[MethodConfig] = DEFAULT_METHODS,
             range_edges_km: Sequence[float] = DEFAULT_RANGE_EDGES_KM,
             hist_width_deg: float = DEFAULT_HIST_WIDTH_DEG) -> EvalReport:
    """Estimate every observation with every method and aggregate the errors.

    Observations are processed in id order.  A recording that cannot be
    read, or a method that fails on it, is logged in ``failures`` and the
    run continues.

    Raises
    ------
    EmptyInputError
        If the manifest has no rows.
    EvaluationError
        If no row could be processed at all.
    """
    if len(manifest) == 0:
        raise EmptyInputError("manifest has no observations")
    methods = list(methods)
    names = [m.name for m in methods]
    if len(set(names)) != len(names):
        raise InvalidSpecError(f"duplicate method names in {names}")
    reports = [MethodReport(m.name, m.to_dict(), [], [], 0, tuple(range_edges_km),
                            hist_width_deg) for m in methods]
    rows, failures = [], []
    for obs in sorted(manifest.observations, key=lambda o: o.id):
        try:
            record = load_record(manifest.resolve(obs))
        except (OSError, ValueError) as exc:
            failures.append({"id": obs.id, "method": None, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for rep, result in zip(reports, run_methods(record, methods)):
            if isinstance(result, Exception):
                failures.append({"id": obs.id, "method": rep.name,
                                 "error": f"{type(result).__name__}: {result}"})
                continue
            err = angular_error(result.azimuth_deg, obs.true_azimuth_deg)
            rep.errors.append(err)
            rep.ranges.append(obs.range_km)
            rep.n_degenerate += int(result.degenerate)
            rows.append({"id": obs.id, "method": rep.name,
                         "true_azimuth_deg": float(obs.true_azimuth_deg),
                         "range_km": obs.range_km, "azimuth_deg": float(result.azimuth_deg),
                         "error_deg": float(err), "eigengap": float(result.eigengap),
                         "degenerate": bool(result.degenerate)})
    if not rows:
        raise EvaluationError(f"all {len(manifest)} observations failed")
    return EvalReport(reports, rows, failures)
