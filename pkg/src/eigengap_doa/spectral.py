"""Averaged-periodogram (Welch) estimates of 2x2 cross-spectral density matrices.

Conventions
-----------
* One-sided spectrum; interior bins are doubled, DC and Nyquist are not.
* Each periodogram is scaled by ``1 / (fs * sum(window**2))`` (PSD units).
* No detrending.
* ``r`` is the mean of ``X_x * conj(X_y)``, i.e. the (0, 1) entry of
  ``X X^H``.  Note that ``scipy.signal.csd(x, y)`` returns the conjugate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from scipy.signal import get_window

from .exceptions import EmptyBandError, InsufficientDataError, InvalidSpecError
from .signal_model import MultiChannelRecord

__all__ = ["SpectralConfig", "CsdBin", "CsdSet", "welch_csd", "select_band"]

DEFAULT_SAMPLE_RATE = 8192.0
DEFAULT_BAND = (75.0, 300.0)


@dataclass(frozen=True)
class SpectralConfig:
    """Welch parameters.

    The defaults give 2 Hz bins at 8192 Hz.  ``sample_rate`` is optional; if
    given it must match the record being analysed.
    """

    segment_length: int = 4096
    overlap: float = 0.5
    window: str = "hann"
    sample_rate: float | None = None

    def __post_init__(self):
        if int(self.segment_length) != self.segment_length or self.segment_length < 2:
            raise InvalidSpecError(
                f"segment_length must be an integer >= 2, got {self.segment_length}")
        if not 0 <= self.overlap < 1:
            raise InvalidSpecError(f"overlap must lie in [0, 1), got {self.overlap}")

    @property
    def step(self) -> int:
        return self.segment_length - int(np.floor(self.overlap * self.segment_length))

    def n_segments(self, n_samples: int) -> int:
        if n_samples < self.segment_length:
            return 0
        return 1 + (n_samples - self.segment_length) // self.step

    def bin_width(self, sample_rate: float) -> float:
        return sample_rate / self.segment_length

    def to_dict(self) -> dict:
        return {"segment_length": self.segment_length, "overlap": self.overlap,
                "window": self.window, "sample_rate": self.sample_rate}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralConfig":
        return cls(**{k: d[k] for k in ("segment_length", "overlap", "window", "sample_rate")
                      if k in d})


class CsdBin(NamedTuple):
    """One frequency bin: the matrix ``[[q, r], [conj(r), s]]``."""

    freq: float
    q: float
    s: float
    r: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.q, self.r], [np.conj(self.r), self.s]])


@dataclass(frozen=True)
class CsdSet:
    """Ordered collection of 2x2 Hermitian PSD matrices, one per frequency.

    Stored column-wise: ``freq``, ``q``, ``s`` are real arrays and ``r`` is
    complex.  ``dropped`` lists frequencies removed by a standardization
    guard, so a caller can see which bins did not take part.
    """

    freq: np.ndarray
    q: np.ndarray
    s: np.ndarray
    r: np.ndarray
    dropped: tuple[float, ...] = field(default=())

    def __post_init__(self):
        freq = np.atleast_1d(np.asarray(self.freq, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        s = np.atleast_1d(np.asarray(self.s, dtype=float))
        r = np.atleast_1d(np.asarray(self.r, dtype=complex))
        if not (freq.shape == q.shape == s.shape == r.shape) or freq.ndim != 1:
            raise InvalidSpecError("freq, q, s and r must be 1-d arrays of equal length")
        if np.any(np.diff(freq) <= 0):
            raise InvalidSpecError("bin frequencies must be strictly increasing")
        if np.any(q < 0) or np.any(s < 0):
            raise InvalidSpecError("auto-powers q and s must be nonnegative")
        if np.any(np.abs(r) ** 2 - q * s > 1e-12 * (q + s) ** 2):
            raise InvalidSpecError("bin matrices must be positive semidefinite (|r|^2 <= q s)")
        for name, arr in (("freq", freq), ("q", q), ("s", s), ("r", r)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dropped", tuple(float(f) for f in self.dropped))

    @classmethod
    def from_matrices(cls, freq, matrices) -> "CsdSet":
        """Build from an array of shape ``(n, 2, 2)``; only the upper triangle is read."""
        m = np.asarray(matrices, dtype=complex)
        if m.ndim != 3 or m.shape[1:] != (2, 2):
            raise InvalidSpecError(f"expected matrices of shape (n, 2, 2), got {m.shape}")
        return cls(freq, m[:, 0, 0].real, m[:, 1, 1].real, m[:, 0, 1])

    def __len__(self) -> int:
        return self.freq.size

    def __getitem__(self, i: int) -> CsdBin:
        return CsdBin(float(self.freq[i]), float(self.q[i]), float(self.s[i]), complex(self.r[i]))

    def __iter__(self) -> Iterator[CsdBin]:
        return (self[i] for i in range(len(self)))

    @property
    def trace(self) -> np.ndarray:
        return self.q + self.s

    def matrices(self) -> np.ndarray:
        out = np.empty((len(self), 2, 2), dtype=complex)
        out[:, 0, 0] = self.q
        out[:, 1, 1] = self.s
        out[:, 0, 1] = self.r
        out[:, 1, 0] = self.r.conj()
        return out

    def subset(self, mask) -> "CsdSet":
        mask = np.asarray(mask)
        return CsdSet(self.freq[mask], self.q[mask], self.s[mask], self.r[mask], self.dropped)

    def scaled(self, factors) -> "CsdSet":
        f = np.broadcast_to(np.asarray(factors, dtype=float), self.freq.shape)
        return CsdSet(self.freq, self.q * f, self.s * f, self.r * f, self.dropped)

    def to_records(self) -> list[dict]:
        return [{"freq": float(f), "q": float(q), "s": float(s),
                 "r_re": float(r.real), "r_im": float(r.imag)}
                for f, q, s, r in zip(self.freq, self.q, self.s, self.r)]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, records) -> "CsdSet":
        records = list(records)
        return cls([d["freq"] for d in records], [d["q"] for d in records],
                   [d["s"] for d in records],
                   [complex(d["r_re"], d["r_im"]) for d in records])

    @classmethod
    def from_json(cls, text: str) -> "CsdSet":
        return cls.from_records(json.loads(text))


def welch_csd(record: MultiChannelRecord, config: SpectralConfig | None = None) -> CsdSet:
    """Averaged-periodogram CSD matrices for every one-sided DFT bin.

    Parameters
    ----------
    record : MultiChannelRecord
    config : SpectralConfig, optional
        Segment length, overlap and window; defaults to ``SpectralConfig()``.

    Returns
    -------
    CsdSet
        ``segment_length // 2 + 1`` bins from 0 Hz to Nyquist.

    Raises
    ------
    InsufficientDataError
        If the record is shorter than one segment.
    """
    config = config or SpectralConfig()
    fs = record.sample_rate
    if config.sample_rate is not None and config.sample_rate != fs:
        raise InvalidSpecError(
            f"config sample rate {config.sample_rate} does not match record ({fs})")
    nseg = int(config.segment_length)
    k = config.n_segments(record.n_samples)
    if k < 1:
        raise InsufficientDataError(
            f"record has {record.n_samples} samples, fewer than one segment ({nseg})")

    win = get_window(config.window, nseg)
    segs = np.lib.stride_tricks.sliding_window_view(record.channels, nseg, axis=1)
    segs = segs[:, : k * config.step : config.step]
    spec = np.fft.rfft(segs * win, axis=-1)          # (2, k, nbins)
    xs, ys = spec[0], spec[1]

    scale = np.full(nseg // 2 + 1, 2.0 / (fs * np.sum(win ** 2)))
    scale[0] /= 2
    if nseg % 2 == 0:
        scale[-1] /= 2
    q = np.mean(np.abs(xs) ** 2, axis=0) * scale
    s = np.mean(np.abs(ys) ** 2, axis=0) * scale
    r = np.mean(xs * ys.conj(), axis=0) * scale
    # Averaging outer products keeps |r|^2 <= q s up to rounding; clip that rounding.
    excess = np.abs(r) ** 2 > q * s
    if np.any(excess):
        r = r.copy()
        r[excess] *= np.sqrt(q[excess] * s[excess]) / np.abs(r[excess])
    freq = np.fft.rfftfreq(nseg, d=1.0 / fs)
    return CsdSet(freq, q, s, r)


def select_band(csd: CsdSet, f_lo: float, f_hi: float) -> CsdSet:
    """Keep the bins with ``f_lo <= freq <= f_hi`` (closed at both ends)."""
    if not f_lo < f_hi:
        raise InvalidSpecError(f"band must satisfy f_lo < f_hi, got [{f_lo}, {f_hi}]")
    tol = 1e-9 * max(abs(f_lo), abs(f_hi), 1.0)
    mask = (csd.freq >= f_lo - tol) & (csd.freq <= f_hi + tol)
    if not np.any(mask):
        raise EmptyBandError(f"no bins in [{f_lo}, {f_hi}] Hz")
    return csd.subset(mask)
