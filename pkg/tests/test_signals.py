import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonic_selflearn.signals import (
    EyeTrace,
    NrzConfig,
    channel_bits,
    eye_gap,
    eye_opening_area,
    fold_eye,
    generate_nrz,
    nrz_waveform,
    prbs,
)

CLEAN = NrzConfig(rise_time_fraction=0.0, amplitude_noise_sigma=0.0)


def clean_eye(rise=0.0, n_bits=127):
    cfg = NrzConfig(rise_time_fraction=rise, amplitude_noise_sigma=0.0)
    bits = channel_bits(cfg, n_bits)
    return cfg, bits, fold_eye(nrz_waveform(bits, cfg), cfg, bits)


def test_prbs7_period_and_balance():
    seq = prbs(7, 254)
    np.testing.assert_array_equal(seq[:127], seq[127:])
    assert seq[:127].sum() == 64
    # shortest period is the full 127
    for p in (1, 7, 127 // 7):
        assert not np.array_equal(seq[:127], np.roll(seq[:127], p))


def test_channels_cover_all_joint_patterns():
    cfg = NrzConfig()
    bits = np.array([channel_bits(cfg, 127, j) for j in range(4)])
    words = set((bits * np.array([[1], [2], [4], [8]])).sum(axis=0).tolist())
    assert words == set(range(16))


def test_clean_waveform_levels():
    _, wave, _ = generate_nrz(CLEAN)
    assert set(np.unique(wave).tolist()) == {0.0, 1.0}


def test_generate_seeded_and_length_check():
    cfg = NrzConfig(rng_seed=4)
    np.testing.assert_array_equal(generate_nrz(cfg)[1], generate_nrz(cfg)[1])
    t, wave, bits = generate_nrz(cfg, 254)
    assert wave.size == 254 * 32
    assert t[1] == pytest.approx(100.0 / 32)
    with pytest.raises(ValueError):
        generate_nrz(cfg, 100)


def test_config_validation():
    with pytest.raises(ValueError):
        NrzConfig(samples_per_bit=4)
    with pytest.raises(ValueError):
        NrzConfig(rise_time_fraction=0.5)


def test_fold_eye_basics():
    cfg = NrzConfig()
    eye = fold_eye(np.full(64, 0.3), cfg)
    assert len(eye) == 64
    assert np.all(eye.amplitude == 0.3)
    assert np.all((eye.t >= 0) & (eye.t < 1))
    with pytest.raises(ValueError):
        fold_eye(np.zeros(33), cfg)
    with pytest.raises(ValueError):
        fold_eye(np.zeros(64), cfg, bits=[1, 0, 1])


def test_fold_eye_clean_rails():
    _, bits, eye = clean_eye()
    np.testing.assert_array_equal(eye.amplitude, np.repeat(bits, 32))
    np.testing.assert_array_equal(eye.label, np.repeat(bits, 32))


def test_fold_eye_self_labelling():
    _, bits, eye = clean_eye(rise=0.25)
    auto = fold_eye(eye.amplitude, CLEAN)
    np.testing.assert_array_equal(auto.label, eye.label)


def test_ideal_square_eye_scores_one():
    assert eye_opening_area(clean_eye()[2]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rise", [0.1, 0.25, 0.4])
def test_rise_time_matches_raised_cosine_oracle(rise):
    # two raised-cosine edges each give back r/pi of the r-wide transition window
    expected = 1.0 - rise * (1.0 - 2.0 / np.pi)
    assert eye_opening_area(clean_eye(rise)[2]) == pytest.approx(expected, abs=0.01)


def test_single_label_eye_is_zero():
    cfg = NrzConfig()
    eye = fold_eye(np.ones(32 * 10), cfg, bits=np.ones(10))
    assert eye_opening_area(eye) == 0.0
    with pytest.raises(ValueError):
        eye_gap(EyeTrace(np.array([]), np.array([]), np.array([], dtype=np.int8), 32))


def test_mixed_equal_channels_close_the_eye():
    cfg = NrzConfig(amplitude_noise_sigma=0.0)
    b0, b1 = channel_bits(cfg, 127, 0), channel_bits(cfg, 127, 1)
    mixed = 0.5 * nrz_waveform(b0, cfg) + 0.5 * nrz_waveform(b1, cfg)
    assert eye_opening_area(fold_eye(mixed, cfg, b0)) == 0.0


def test_default_noise_eye_is_open_but_imperfect():
    cfg = NrzConfig()
    bits = channel_bits(cfg, 127)
    s = eye_opening_area(fold_eye(nrz_waveform(bits, cfg), cfg, bits))
    assert 0.7 < s < 0.91


def test_csv_round_trip(tmp_path):
    cfg, bits, eye = clean_eye(0.25)
    path = tmp_path / "eye.csv"
    eye.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,amplitude,label"
    back = EyeTrace.from_csv(path, cfg.samples_per_bit)
    np.testing.assert_allclose(back.amplitude, eye.amplitude, atol=1e-8)
    np.testing.assert_array_equal(back.label, eye.label)
    assert eye_opening_area(back) == pytest.approx(eye_opening_area(eye), abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(
    rise=st.floats(0.0, 0.45),
    eps=st.floats(0.0, 0.5),
    seed=st.integers(0, 2**31),
)
def test_crosstalk_costs_at_most_two_eps(rise, eps, seed):
    cfg, bits, eye = clean_eye(rise)
    g = np.random.default_rng(seed).uniform(-1.0, 1.0, len(eye))
    hurt = EyeTrace(eye.t, eye.amplitude + eps * g, eye.label, eye.samples_per_bit)
    drop = eye_opening_area(eye) - eye_opening_area(hurt)
    assert drop <= 2 * eps + 1e-12


@settings(max_examples=40, deadline=None)
@given(rise=st.floats(0.0, 0.45), c=st.floats(1e-3, 1e3), sigma=st.floats(0.0, 0.2))
def test_gap_scales_linearly(rise, c, sigma):
    cfg = NrzConfig(rise_time_fraction=rise, amplitude_noise_sigma=sigma)
    bits = channel_bits(cfg, 127)
    eye = fold_eye(nrz_waveform(bits, cfg), cfg, bits)
    assert eye_gap(eye.scaled(c)) == pytest.approx(c * eye_gap(eye), rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(sigma=st.floats(0.0, 1.0), seed=st.integers(0, 1000), rise=st.floats(0.0, 0.45))
def test_sarea_in_unit_interval(sigma, seed, rise):
    cfg = NrzConfig(rise_time_fraction=rise, amplitude_noise_sigma=sigma, rng_seed=seed)
    _, wave, bits = generate_nrz(cfg)
    s = eye_opening_area(fold_eye(wave, cfg, bits))
    assert 0.0 <= s <= 1.0
