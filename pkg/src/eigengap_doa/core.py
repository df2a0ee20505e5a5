"""Maximal eigengap weighting of per-frequency CSD matrices.

Given standardized bins ``Q_w = [[q, r], [conj(r), s]]`` the eigengap of the
combination ``sum_w a_w Q_w`` is

    sqrt((sum a (q + s))**2 - 4 ((sum a q)(sum a s) - |sum a r|**2))

and its square is the quadratic form ``a^T R a`` with

    R~[i, j] = (q_i + s_i)(q_j + s_j) - 4 (q_i s_j - r_i conj(r_j))

symmetrized into a real matrix ``R``.  Maximizing ``a^T R a`` over
``a >= 0, ||a|| <= 1`` gives the weights; the azimuth is read off the
maximal eigenvector of the weighted sum.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import AlignmentError, EmptyBandError, InvalidSpecError
from .spectral import CsdSet

__all__ = [
    "Scheme",
    "NormKind",
    "WeightVector",
    "RMatrix",
    "DoaEstimate",
    "PropositionBound",
    "eig2_hermitian",
    "max_eigvec2",
    "axial_azimuth",
    "standardize",
    "build_r",
    "eigengap_direct",
    "solve_l1",
    "solve_l2",
    "solve",
    "combine",
    "estimate_from_weights",
    "estimate_doa",
    "rayleigh_ratio",
    "proposition_bound",
]

MINEIG_RELATIVE_FLOOR = 1e-9
TRACE_FLOOR = 1e-30


class Scheme(enum.Enum):
    """Per-bin standardization applied before combining."""

    TRACE = "trace"
    MINEIG = "mineig"
    NONE = "none"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidSpecError(f"unknown standardization scheme {value!r}") from None


class NormKind(enum.Enum):
    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, value) -> "NormKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidSpecError(f"unknown norm {value!r}") from None

    def norm(self, a: np.ndarray) -> float:
        return float(np.sum(np.abs(a)) if self is NormKind.L1 else np.linalg.norm(a))


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative frequency weights with ``||a|| <= 1`` in ``norm_kind``.

    ``fallback`` is set when a solver could not find a nonzero maximizer
    (``R`` identically zero) and returned uniform weights instead.
    """

    a: np.ndarray
    norm_kind: NormKind
    fallback: bool = False

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 1:
            raise InvalidSpecError("weights must be a 1-d array")
        if np.any(a < 0):
            raise InvalidSpecError("weights must be nonnegative")
        kind = NormKind.parse(self.norm_kind)
        if kind.norm(a) > 1 + 1e-12:
            raise InvalidSpecError(f"weights exceed unit {kind.value} norm")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "norm_kind", kind)

    def __len__(self) -> int:
        return self.a.size

    @classmethod
    def uniform(cls, n: int, norm_kind, fallback: bool = False) -> "WeightVector":
        kind = NormKind.parse(norm_kind)
        value = 1.0 / n if kind is NormKind.L1 else 1.0 / np.sqrt(n)
        return cls(np.full(n, value), kind, fallback)


@dataclass(frozen=True)
class RMatrix:
    """Real symmetric PSD matrix whose quadratic form is the squared eigengap."""

    R: np.ndarray
    freq: np.ndarray

    def __len__(self) -> int:
        return self.freq.size

    def objective(self, a) -> float:
        a = np.asarray(a, dtype=float)
        return float(a @ self.R @ a)


@dataclass(frozen=True)
class DoaEstimate:
    """Axial azimuth estimate with diagnostics.

    ``azimuth_deg`` lies in ``[0, 180)``; the sign of the arrival direction
    is not observable from the x/y channels alone.
    """

    azimuth_deg: float
    eigengap: float
    combined: np.ndarray = field(repr=False)
    weights: WeightVector | None = field(default=None, repr=False)
    degenerate: bool = False
    method: str = "eigengap"
    scheme: Scheme | None = None
    norm_kind: NormKind | None = None
    freq: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "azimuth_deg": float(self.azimuth_deg),
            "eigengap": float(self.eigengap),
            "norm_kind": self.norm_kind.value if self.norm_kind else None,
            "scheme": self.scheme.value if self.scheme else None,
            "weights": [] if self.weights is None else [float(w) for w in self.weights.a],
            "degenerate": bool(self.degenerate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# -- closed-form 2x2 Hermitian helpers ---------------------------------------

def eig2_hermitian(q, s, r):
    """Eigenvalues ``(lambda_min, lambda_max)`` of ``[[q, r], [conj(r), s]]``.

    Works elementwise on arrays.  The half-gap is formed with ``hypot`` so it
    does not cancel when the matrix is close to a multiple of the identity.
    """
    q = np.asarray(q, dtype=float)
    s = np.asarray(s, dtype=float)
    half_gap = 0.5 * np.hypot(q - s, 2.0 * np.abs(r))
    mid = 0.5 * (q + s)
    return mid - half_gap, mid + half_gap


def max_eigvec2(m: np.ndarray) -> np.ndarray:
    """Unit maximal eigenvector of a 2x2 Hermitian matrix.

    Of the two rows of the adjugate of ``m - lambda_max I`` the longer one is
    used.  A multiple of the identity returns ``(1, 0)``.
    """
    q, s, r = m[0, 0].real, m[1, 1].real, m[0, 1]
    _, lmax = eig2_hermitian(q, s, r)
    v1 = np.array([r, lmax - q], dtype=complex)
    v2 = np.array([lmax - s, np.conj(r)], dtype=complex)
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    v, n = (v1, n1) if n1 >= n2 else (v2, n2)
    if n == 0:
        return np.array([1.0, 0.0], dtype=complex)
    return v / n


def axial_azimuth(v: np.ndarray) -> float:
    """Axial angle in ``[0, 180)`` of the phase-fixed real part of ``v``.

    ``v`` is rotated so its largest-magnitude entry is real and positive
    before the real part is taken.
    """
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) > 0:
        v = v * (np.conj(v[k]) / abs(v[k]))
    re = v.real
    az = float(np.degrees(np.arctan2(re[1], re[0])) % 180.0)
    return 0.0 if az >= 180.0 else az


# -- pipeline stages ----------------------------------------------------------

def standardize(csd: CsdSet, scheme) -> CsdSet:
    """Rescale each bin according to ``scheme``.

    TRACE divides by ``q + s``; bins with trace below 1e-30 are dropped.
    MINEIG divides by ``max(lambda_min, 1e-9 (q + s))`` so that well
    conditioned bins end up with unit minimal eigenvalue and rank-deficient
    ones have their SNR capped at 1e9; bins with trace below 1e-30 are
    dropped.  NONE returns ``csd`` unchanged.

    Raises
    ------
    EmptyBandError
        If ``csd`` is empty or every bin is dropped.
    """
    scheme = Scheme.parse(scheme)
    if len(csd) == 0:
        raise EmptyBandError("cannot standardize an empty CSD set")
    if scheme is Scheme.NONE:
        return csd
    trace = csd.trace
    keep = trace >= TRACE_FLOOR
    if scheme is Scheme.TRACE:
        divisor = trace
    else:
        lmin, _ = eig2_hermitian(csd.q, csd.s, csd.r)
        divisor = np.maximum(lmin, MINEIG_RELATIVE_FLOOR * trace)
    if not np.any(keep):
        raise EmptyBandError(f"every bin was dropped by {scheme.value} standardization")
    dropped = csd.dropped + tuple(float(f) for f in csd.freq[~keep])
    out = csd.subset(keep).scaled(1.0 / divisor[keep])
    return CsdSet(out.freq, out.q, out.s, out.r, dropped)


def build_r(csd: CsdSet) -> RMatrix:
    """Quadratic form ``R`` with ``a^T R a`` equal to the squared eigengap.

    ``R~`` is built entrywise, then ``R = (H + H^T) / 2`` with
    ``H = (R~ + R~^H) / 2``.
    """
    t = csd.trace
    q, s, r = csd.q, csd.s, csd.r
    r_tilde = (np.outer(t, t)
               - 4.0 * (np.outer(q, s) - np.outer(r, r.conj())))
    h = 0.5 * (r_tilde + r_tilde.conj().T)
    big_r = (0.5 * (h + h.T)).real
    return RMatrix(np.ascontiguousarray(big_r), csd.freq)


def _weights_array(weights, n: int) -> np.ndarray:
    a = weights.a if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    if a.ndim != 1 or a.size != n:
        raise AlignmentError(f"{a.size} weights for {n} bins")
    return a


def combine(csd: CsdSet, weights) -> np.ndarray:
    """Weighted sum ``sum_w a_w Q_w`` as a 2x2 complex Hermitian matrix."""
    a = _weights_array(weights, len(csd))
    qa, sa, ra = a @ csd.q, a @ csd.s, a @ csd.r
    return np.array([[qa, ra], [np.conj(ra), sa]], dtype=complex)


def eigengap_direct(csd: CsdSet, weights) -> float:
    """``lambda_max - lambda_min`` of the weighted sum, by the 2x2 formula.

    Weights may be any real vector here, including negative entries.
    """
    m = combine(csd, weights)
    lmin, lmax = eig2_hermitian(m[0, 0].real, m[1, 1].real, m[0, 1])
    return float(lmax - lmin)


def _basis(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def solve_l1(rm: RMatrix) -> WeightVector:
    """Maximize ``a^T R a`` over ``a >= 0, ||a||_1 <= 1``.

    The maximum sits at the basis vector of the largest diagonal entry;
    ties go to the lowest index.  If no diagonal entry is positive the
    uniform vector is returned with ``fallback`` set.
    """
    d = np.diag(rm.R)
    n = d.size
    i = int(np.argmax(d))  # first occurrence wins ties
    if not d[i] > 0:
        return WeightVector.uniform(n, NormKind.L1, fallback=True)
    return WeightVector(_basis(n, i), NormKind.L1)


def solve_l2(rm: RMatrix) -> WeightVector:
    """Approximate maximizer of ``a^T R a`` over ``a >= 0, ||a||_2 <= 1``.

    The maximal eigenvector of ``R`` is oriented so its entries sum to a
    nonnegative value (exact ties: largest-magnitude entry positive),
    clamped at zero and renormalized.  An all-zero clamp falls back to
    :func:`solve_l1`'s basis vector.
    """
    big_r = rm.R
    n = big_r.shape[0]
    if not np.max(np.diag(big_r)) > 0:
        return WeightVector.uniform(n, NormKind.L2, fallback=True)
    _, vecs = np.linalg.eigh(big_r)
    v = vecs[:, -1]
    total = v.sum()
    if total < 0 or (total == 0 and v[np.argmax(np.abs(v))] < 0):
        v = -v
    a = np.clip(v, 0.0, None)
    norm = np.linalg.norm(a)
    if norm == 0:
        return WeightVector(solve_l1(rm).a, NormKind.L2)
    a = a / norm
    # Renormalization can leave the norm a few ulps above one.
    return WeightVector(a / max(1.0, np.linalg.norm(a)), NormKind.L2)


def solve(rm: RMatrix, norm_kind) -> WeightVector:
    kind = NormKind.parse(norm_kind)
    return solve_l1(rm) if kind is NormKind.L1 else solve_l2(rm)


def rayleigh_ratio(rm: RMatrix, weights) -> float:
    """``a^T R a / (||a||_2^2 lambda_max(R))``; 1 means the unconstrained optimum."""
    a = _weights_array(weights, len(rm))
    lmax = np.linalg.eigvalsh(rm.R)[-1]
    denom = lmax * (a @ a)
    return float(a @ rm.R @ a / denom) if denom > 0 else float("nan")


def estimate_from_weights(csd: CsdSet, weights: WeightVector, *, method: str = "eigengap",
                          scheme: Scheme | None = None,
                          norm_kind: NormKind | None = None) -> DoaEstimate:
    """Combine ``csd`` with ``weights`` and read off the axial azimuth."""
    m = combine(csd, weights)
    lmin, lmax = eig2_hermitian(m[0, 0].real, m[1, 1].real, m[0, 1])
    azimuth = 0.0 if weights.fallback else axial_azimuth(max_eigvec2(m))
    return DoaEstimate(azimuth_deg=azimuth, eigengap=float(lmax - lmin), combined=m,
                       weights=weights, degenerate=weights.fallback, method=method,
                       scheme=scheme, norm_kind=norm_kind, freq=csd.freq)


def estimate_doa(csd: CsdSet, scheme="none", norm_kind="l2") -> DoaEstimate:
    """Maximal eigengap azimuth estimate.

    Parameters
    ----------
    csd : CsdSet
        Band-selected CSD matrices.
    scheme : Scheme or str
        ``"trace"``, ``"mineig"`` or ``"none"``.
    norm_kind : NormKind or str
        ``"l1"`` or ``"l2"`` weight constraint.

    Returns
    -------
    DoaEstimate
        ``degenerate`` is set (with azimuth 0 and uniform weights) when
        ``R`` vanishes, e.g. when every bin is a multiple of the identity.
    """
    scheme = Scheme.parse(scheme)
    kind = NormKind.parse(norm_kind)
    std = standardize(csd, scheme)
    weights = solve(build_r(std), kind)
    return estimate_from_weights(std, weights, scheme=scheme, norm_kind=kind)


# -- perturbation bound -------------------------------------------------------

@dataclass(frozen=True)
class PropositionBound:
    """Eigenvector perturbation bound for ``P_S u u^T + Sigma``.

    ``lhs`` is ``||v_max - u||_2`` with the eigenvector's phase chosen to
    minimize it, ``rhs`` is ``2 |p~| / (P_S - 2 ||Sigma||_F)``.  The bound is
    only claimed when ``applicable``.  ``relaxed_denominator`` replaces the
    Frobenius norm by ``lambda_min(Sigma) sqrt(1 + C**2)``.
    """

    lhs: float
    rhs: float
    applicable: bool
    p_tilde: complex
    denominator: float
    relaxed_denominator: float
    condition_bound: float

    @property
    def holds(self) -> bool:
        return (not self.applicable) or self.lhs <= self.rhs


def proposition_bound(p_s: float, sigma, u, condition_bound: float | None = None
                      ) -> PropositionBound:
    """Evaluate both sides of the single-bin eigenvector perturbation bound.

    Parameters
    ----------
    p_s : float
        Signal power, must be positive.
    sigma : array_like, shape (2, 2)
        Hermitian PSD noise CSD.
    u : array_like, shape (2,)
        Real unit direction vector.
    condition_bound : float, optional
        Bound ``C`` on the condition number of ``sigma``; defaults to its
        actual condition number.
    """
    if not p_s > 0:
        raise InvalidSpecError(f"signal power must be positive, got {p_s}")
    sigma = np.asarray(sigma, dtype=complex)
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    u_perp = np.array([-u[1], u[0]])

    p_x = p_s * np.outer(u, u) + sigma
    v = max_eigvec2(p_x)
    c = np.vdot(v, u)
    if abs(c) > 0:
        v = v * (c / abs(c))
    lhs = float(np.linalg.norm(v - u))

    p_tilde = complex(u_perp @ sigma @ u)
    fro = float(np.linalg.norm(sigma))
    denominator = p_s - 2.0 * fro
    applicable = fro < p_s / 2
    rhs = 2.0 * abs(p_tilde) / denominator if applicable else float("inf")

    lmin, lmax = eig2_hermitian(sigma[0, 0].real, sigma[1, 1].real, sigma[0, 1])
    lmin, lmax = float(max(lmin, 0.0)), float(lmax)
    if condition_bound is None:
        condition_bound = lmax / lmin if lmin > 0 else (1.0 if lmax == 0 else float("inf"))
    if lmin == 0:
        relaxed = p_s if lmax == 0 else float("-inf")
    else:
        relaxed = p_s - 2.0 * lmin * np.sqrt(1.0 + condition_bound ** 2)
    return PropositionBound(lhs=lhs, rhs=rhs, applicable=applicable, p_tilde=p_tilde,
                            denominator=denominator, relaxed_denominator=float(relaxed),
                            condition_bound=float(condition_bound))
