import json

import numpy as np
import pytest
import scipy.signal

from eigengap_doa.core import axial_azimuth, max_eigvec2
from eigengap_doa.exceptions import EmptyBandError, InsufficientDataError, InvalidSpecError
from eigengap_doa.signal_model import (BandNoise, MultiChannelRecord, NoiseSpec, SourceSpec,
                                       ToneSet, synth_plane_wave)
from eigengap_doa.spectral import CsdSet, SpectralConfig, select_band, welch_csd

FS = 8192.0


def tone_record(theta, seconds=4.0):
    return synth_plane_wave(SourceSpec(theta, ToneSet(((100.0, 1.0),))), NoiseSpec(),
                            seconds, FS, 0)


def welch_oracle(x, y, fs, nseg, step):
    """Explicit loop: full DFT of each Hann-windowed segment, then average."""
    n = np.arange(nseg)
    win = 0.5 - 0.5 * np.cos(2 * np.pi * n / nseg)     # periodic Hann
    acc_q = np.zeros(nseg)
    acc_s = np.zeros(nseg)
    acc_r = np.zeros(nseg, dtype=complex)
    count = 0
    start = 0
    while start + nseg <= len(x):
        fx = np.fft.fft(x[start:start + nseg] * win)
        fy = np.fft.fft(y[start:start + nseg] * win)
        acc_q += np.abs(fx) ** 2
        acc_s += np.abs(fy) ** 2
        acc_r += fx * np.conj(fy)
        count += 1
        start += step
    norm = fs * np.sum(win ** 2) * count
    half = nseg // 2 + 1
    # fold negative frequencies onto positive ones (one-sided spectrum)
    fold = np.ones(half)
    fold[1:nseg // 2] = 2.0
    return (acc_q[:half] * fold / norm, acc_s[:half] * fold / norm,
            acc_r[:half] * fold / norm)


def test_matches_explicit_segment_oracle():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(20000)
    y = 0.5 * x + rng.standard_normal(20000)
    rec = MultiChannelRecord(FS, np.vstack([x, y]))
    for nseg, overlap in ((256, 0.5), (1024, 0.0), (512, 0.75)):
        cfg = SpectralConfig(nseg, overlap)
        csd = welch_csd(rec, cfg)
        q, s, r = welch_oracle(x, y, FS, nseg, cfg.step)
        np.testing.assert_allclose(csd.q, q, rtol=1e-10)
        np.testing.assert_allclose(csd.s, s, rtol=1e-10)
        np.testing.assert_allclose(csd.r, r, rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(csd.freq, np.arange(nseg // 2 + 1) * FS / nseg)


def test_agrees_with_scipy_up_to_conjugation():
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal((2, 30000))
    rec = MultiChannelRecord(FS, np.vstack([x, y + 0.3 * x]))
    csd = welch_csd(rec, SpectralConfig(1024, 0.5))
    kw = dict(fs=FS, window="hann", nperseg=1024, noverlap=512, detrend=False)
    _, pxy = scipy.signal.csd(rec.x, rec.y, **kw)
    _, pxx = scipy.signal.welch(rec.x, **kw)
    np.testing.assert_allclose(csd.q, pxx, rtol=1e-10)
    np.testing.assert_allclose(csd.r, np.conj(pxy), rtol=1e-10, atol=1e-14)


def test_tone_at_zero_degrees():
    csd = welch_csd(tone_record(0.0))
    b = csd[int(np.argmin(np.abs(csd.freq - 100.0)))]
    assert b.freq == 100.0
    assert b.q > 0 and b.s == 0.0 and b.r == 0.0


def test_tone_at_45_degrees_is_rank_one():
    csd = welch_csd(tone_record(45.0))
    b = csd[50]
    assert b.q == pytest.approx(b.s, rel=1e-12)
    assert b.r.real > 0 and abs(b.r.imag) <= 1e-12 * b.q
    assert abs(b.r) ** 2 == pytest.approx(b.q * b.s, rel=1e-10)


@pytest.mark.parametrize("theta", [0.0, 30.0, 100.0, 160.0])
def test_noiseless_bin_eigenvector(theta):
    csd = welch_csd(tone_record(theta))
    v = max_eigvec2(csd[50].matrix)
    u = np.array([np.cos(np.deg2rad(theta)), np.sin(np.deg2rad(theta))])
    assert min(np.linalg.norm(v - u), np.linalg.norm(v + u)) < 1e-6
    assert axial_azimuth(v) == pytest.approx(theta, abs=1e-6)


def test_white_noise_level_concentrates():
    rec = synth_plane_wave(SourceSpec(0.0, ToneSet(((100.0, 0.0),))), NoiseSpec.isotropic(1.0),
                           60.0, FS, 4)
    level = 2.0 / FS          # one-sided PSD of unit-variance white noise
    deviations = []
    for seconds in (2.0, 60.0):
        sub = MultiChannelRecord(FS, rec.channels[:, : int(seconds * FS)])
        csd = welch_csd(sub)
        inner = csd.subset((csd.freq > 0) & (csd.freq < FS / 2))
        deviations.append(np.mean(np.abs(np.concatenate([inner.q, inner.s]) / level - 1)))
        assert np.mean(inner.q) == pytest.approx(level, rel=0.02)
    assert deviations[1] < deviations[0] / 3


def test_psd_property_and_parseval():
    rec = synth_plane_wave(SourceSpec(70.0, BandNoise(50.0, 900.0, 3.0)),
                           NoiseSpec.isotropic(0.5), 20.0, FS, 8)
    cfg = SpectralConfig()
    assert cfg.n_segments(rec.n_samples) >= 64
    csd = welch_csd(rec, cfg)
    det = csd.q * csd.s - np.abs(csd.r) ** 2
    assert np.all(det >= -1e-12 * (csd.q + csd.s) ** 2)
    total = np.sum(csd.trace) * cfg.bin_width(FS)
    assert total == pytest.approx(np.sum(rec.channels ** 2) / rec.n_samples, rel=0.05)


def test_insufficient_data():
    rec = MultiChannelRecord(FS, np.zeros((2, 100)))
    with pytest.raises(InsufficientDataError):
        welch_csd(rec)


def test_config_validation():
    with pytest.raises(InvalidSpecError):
        SpectralConfig(segment_length=1)
    with pytest.raises(InvalidSpecError):
        SpectralConfig(overlap=1.0)
    with pytest.raises(InvalidSpecError):
        welch_csd(tone_record(0.0), SpectralConfig(sample_rate=48000.0))


def test_select_band_113_bins():
    csd = welch_csd(tone_record(0.0))
    band = select_band(csd, 75.0, 300.0)
    assert len(band) == 113
    assert band.freq[0] == 76.0 and band.freq[-1] == 300.0
    assert np.all(np.diff(band.freq) == 2.0)


def test_select_band_identity_and_empty():
    csd = welch_csd(tone_record(0.0))
    full = select_band(csd, 0.0, FS / 2)
    assert len(full) == len(csd)
    np.testing.assert_array_equal(full.q, csd.q)
    with pytest.raises(EmptyBandError):
        select_band(csd, 1000.5, 1001.5)
    with pytest.raises(InvalidSpecError):
        select_band(csd, 300.0, 75.0)


def test_select_band_empty_on_integer_grid():
    csd = CsdSet(np.arange(0.0, 2000.0, 2.0) + 1.0, np.ones(1000), np.ones(1000),
                 np.zeros(1000))
    with pytest.raises(EmptyBandError):
        select_band(csd, 1000.0, 1000.5)


def test_csd_set_invariants():
    with pytest.raises(InvalidSpecError):
        CsdSet([1.0, 1.0], [1, 1], [1, 1], [0, 0])
    with pytest.raises(InvalidSpecError):
        CsdSet([1.0], [-1.0], [1.0], [0.0])
    with pytest.raises(InvalidSpecError):
        CsdSet([1.0], [1.0], [1.0], [2.0])


def test_json_round_trip():
    csd = welch_csd(tone_record(30.0, seconds=1.0))
    records = json.loads(csd.to_json())
    assert set(records[0]) == {"freq", "q", "s", "r_re", "r_im"}
    back = CsdSet.from_json(csd.to_json())
    np.testing.assert_array_equal(back.q, csd.q)
    np.testing.assert_array_equal(back.r, csd.r)
