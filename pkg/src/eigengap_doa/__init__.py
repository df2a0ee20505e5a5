"""Maximal eigengap direction-of-arrival estimation for two-channel vector sensors."""
from .baselines import covariance_doa, uniform_weight_doa
from .core import (DoaEstimate, NormKind, PropositionBound, RMatrix, Scheme,
                   WeightVector, build_r, combine, eigengap_direct, estimate_doa,
                   proposition_bound, solve_l1, solve_l2, standardize)
from .exceptions import (AlignmentError, EigengapError, EmptyBandError, EmptyInputError,
                         EvaluationError, InsufficientDataError, InvalidSpecError)
from .signal_model import (BandNoise, MultiChannelRecord, NoiseBand, NoiseSpec,
                           SourceSpec, ToneSet, add_interferer, synth_plane_wave)
from .spectral import CsdBin, CsdSet, SpectralConfig, select_band, welch_csd

__version__ = "0.1.0"
