"""Competing estimators: broadband time-domain covariance and uniform weighting."""
from __future__ import annotations

import numpy as np
from scipy.signal import firwin, oaconvolve

from .core import (DoaEstimate, NormKind, Scheme, WeightVector, axial_azimuth,
                   eig2_hermitian, estimate_from_weights, max_eigvec2, standardize)
from .exceptions import InsufficientDataError, InvalidSpecError
from .signal_model import MultiChannelRecord
from .spectral import CsdSet

__all__ = ["bandpass", "covariance_doa", "uniform_weight_doa", "COVARIANCE_NUMTAPS"]

COVARIANCE_NUMTAPS = 2049
DEGENERATE_RELATIVE_GAP = 1e-6


def bandpass(record: MultiChannelRecord, f_lo: float, f_hi: float,
             numtaps: int = COVARIANCE_NUMTAPS) -> np.ndarray:
    """Linear-phase FIR bandpass of both channels, transients discarded.

    A Hamming-windowed ``numtaps``-tap design is applied in ``valid`` mode,
    so the output has ``n_samples - numtaps + 1`` columns.
    """
    fs = record.sample_rate
    if not 0 < f_lo < f_hi < fs / 2:
        raise InvalidSpecError(f"band [{f_lo}, {f_hi}] Hz must lie strictly inside (0, {fs / 2})")
    if record.n_samples < numtaps:
        raise InsufficientDataError(
            f"record has {record.n_samples} samples, filter needs {numtaps}")
    taps = firwin(numtaps, [f_lo, f_hi], pass_zero=False, fs=fs)
    return oaconvolve(record.channels, taps[np.newaxis, :], mode="valid", axes=1)


def covariance_doa(record: MultiChannelRecord, f_lo: float = 75.0, f_hi: float = 300.0,
                   numtaps: int = COVARIANCE_NUMTAPS) -> DoaEstimate:
    """Azimuth from the maximal eigenvector of the bandpassed 2x2 sample covariance.

    ``degenerate`` is set when the covariance eigengap is below 1e-6 of its
    trace, i.e. the covariance carries no usable direction.
    """
    xf = bandpass(record, f_lo, f_hi, numtaps)
    cov = xf @ xf.T / xf.shape[1]
    m = cov.astype(complex)
    lmin, lmax = eig2_hermitian(cov[0, 0], cov[1, 1], cov[0, 1])
    gap = float(lmax - lmin)
    degenerate = not gap >= DEGENERATE_RELATIVE_GAP * float(np.trace(cov))
    azimuth = axial_azimuth(max_eigvec2(m))
    return DoaEstimate(azimuth_deg=azimuth, eigengap=gap, combined=m, weights=None,
                       degenerate=degenerate, method="covariance")


def uniform_weight_doa(csd: CsdSet, scheme="none") -> DoaEstimate:
    """Equal weights ``(1, ..., 1) / sqrt(n)`` over the standardized bins."""
    scheme = Scheme.parse(scheme)
    std = standardize(csd, scheme)
    weights = WeightVector.uniform(len(std), NormKind.L2)
    return estimate_from_weights(std, weights, method="uniform", scheme=scheme,
                                 norm_kind=NormKind.L2)
