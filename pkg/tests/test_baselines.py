import numpy as np
import pytest

from eigengap_doa.baselines import bandpass, covariance_doa, uniform_weight_doa
from eigengap_doa.core import estimate_doa
from eigengap_doa.evaluation import angular_error
from eigengap_doa.exceptions import EmptyBandError, InsufficientDataError, InvalidSpecError
from eigengap_doa.scenarios import high_snr_scenario, selective_band_scenario
from eigengap_doa.signal_model import (MultiChannelRecord, NoiseSpec, SourceSpec, ToneSet,
                                       synth_plane_wave)
from eigengap_doa.spectral import CsdSet, select_band, welch_csd

from conftest import rank1_bin

FS = 8192.0


def test_covariance_noiseless_tone_45():
    rec = synth_plane_wave(SourceSpec(45.0, ToneSet(((120.0, 1.0),))), NoiseSpec(), 2.0, FS, 0)
    est = covariance_doa(rec, 75.0, 300.0)
    assert est.azimuth_deg == pytest.approx(45.0, abs=1e-9)
    assert not est.degenerate and est.weights is None
    assert est.eigengap == pytest.approx(np.trace(est.combined).real, rel=1e-9)


def test_covariance_isotropic_field_is_degenerate():
    # circular polarization: x = cos, y = sin of one in-band tone, whole periods only
    n = 8192 + 2048
    t = np.arange(n) / FS
    rec = MultiChannelRecord(FS, np.vstack([np.cos(2 * np.pi * 128 * t),
                                            np.sin(2 * np.pi * 128 * t)]))
    est = covariance_doa(rec, 75.0, 300.0)
    assert est.degenerate
    assert est.eigengap < 1e-6 * np.trace(est.combined).real


def test_covariance_isotropic_noise_gap_is_small():
    rec = synth_plane_wave(SourceSpec(0.0, ToneSet(((100.0, 0.0),))), NoiseSpec.isotropic(1.0),
                           10.0, FS, 3)
    est = covariance_doa(rec, 75.0, 300.0)
    assert est.eigengap < 0.05 * np.trace(est.combined).real


def test_covariance_monte_carlo_10db():
    scen = high_snr_scenario(azimuth_deg=60.0, snr_db=10.0, duration=10.0)
    errors = [angular_error(covariance_doa(scen.observation(0, seed).record).azimuth_deg, 60.0)
              for seed in range(100)]
    assert max(errors) < 3.0


def test_covariance_sign_and_scale_invariant():
    rec = synth_plane_wave(SourceSpec(130.0, ToneSet(((150.0, 1.0),))),
                           NoiseSpec.isotropic(0.05), 2.0, FS, 1)
    a = covariance_doa(rec).azimuth_deg
    assert covariance_doa(MultiChannelRecord(FS, -rec.channels)).azimuth_deg == pytest.approx(a)
    assert covariance_doa(MultiChannelRecord(FS, 7 * rec.channels)).azimuth_deg == \
        pytest.approx(a, abs=1e-9)


def test_covariance_errors():
    rec = MultiChannelRecord(FS, np.zeros((2, 100)))
    with pytest.raises(InsufficientDataError):
        covariance_doa(rec)
    rec = MultiChannelRecord(FS, np.zeros((2, 5000)))
    with pytest.raises(InvalidSpecError):
        covariance_doa(rec, 300.0, 75.0)
    with pytest.raises(InvalidSpecError):
        bandpass(rec, 75.0, FS)


def test_uniform_single_bin_matches_estimator():
    csd = CsdSet.from_matrices([100.0], [rank1_bin(70.0, 2.0) + 0.1 * np.eye(2)])
    u = uniform_weight_doa(csd, "none")
    e = estimate_doa(csd, "none", "l2")
    assert u.azimuth_deg == pytest.approx(e.azimuth_deg, abs=1e-12)
    np.testing.assert_allclose(u.combined, e.combined)
    assert u.method == "uniform"


def test_uniform_equal_rank_one_bins():
    csd = CsdSet.from_matrices(np.arange(10.0), [rank1_bin(30.0)] * 10)
    est = uniform_weight_doa(csd, "trace")
    assert est.azimuth_deg == pytest.approx(30.0, abs=1e-9)
    np.testing.assert_allclose(est.weights.a, 1 / np.sqrt(10))


def test_uniform_empty_band():
    csd = CsdSet.from_matrices([1.0], [np.zeros((2, 2))])
    with pytest.raises(EmptyBandError):
        uniform_weight_doa(csd, "trace")


def test_uniform_trails_eigengap_on_selective_scenario():
    scen = selective_band_scenario(azimuth_deg=60.0, duration=20.0)
    eig, uni = [], []
    for seed in range(30):
        csd = select_band(welch_csd(scen.observation(0, seed).record), 75.0, 300.0)
        eig.append(angular_error(estimate_doa(csd, "none", "l2").azimuth_deg, 60.0))
        uni.append(angular_error(uniform_weight_doa(csd, "none").azimuth_deg, 60.0))
    assert np.mean(eig) < np.mean(uni)
