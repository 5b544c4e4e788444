import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsegenre.audio_io import AMTone, AudioClip, Tone, WhiteNoise, add_awgn, synth_clip
from sparsegenre.errors import ClipTooShort, InvalidSpec, TooManyFrames
from sparsegenre.features import (
    FeatureConfig,
    FeatureVector,
    amplitude_filter,
    cosine_similarity,
    extract_features,
    extract_stage2_features,
    frame_sum_vector,
    normalize_frame_spectrum,
    read_features_csv,
    second_fft,
    write_features_csv,
)
from sparsegenre.dsp import spectrogram


def top_k_oracle(mags, k):
    order = sorted(range(len(mags)), key=lambda i: (-mags[i], i))
    return sorted(i for i in order[:k] if mags[i] != 0)


class TestNormalize:
    @pytest.mark.parametrize(
        "mags,expected",
        [([2, 4, 8], [0.25, 0.5, 1.0]), ([0, 0, 0], [0, 0, 0]), ([5], [1.0])],
    )
    def test_examples(self, mags, expected):
        np.testing.assert_array_equal(normalize_frame_spectrum(np.array(mags, float)), expected)

    def test_frame_sums(self):
        rows = np.array([[1, 0, 0], [0.5, 1, 0], [1, 1, 1]])
        np.testing.assert_array_equal(frame_sum_vector(rows), [1, 1.5, 3])

    def test_silent_clip(self):
        clip = AudioClip(np.zeros(22050), 22050)
        spec = spectrogram(clip, FeatureConfig().frame_cfg)
        normed = np.array([normalize_frame_spectrum(r) for r in spec.frames])
        assert np.all(frame_sum_vector(normed) == 0)
        fv = extract_features(clip)
        assert fv.support.size == 0

    def test_stationary_tone_constant_sums(self):
        # a tone that completes a whole number of cycles per hop gives identical frames
        clip = synth_clip(Tone(22 * 22050 / 1103), 3.0, 22050)
        spec = spectrogram(clip, FeatureConfig().frame_cfg)
        sums = frame_sum_vector(np.array([normalize_frame_spectrum(r) for r in spec.frames]))[1:-1]
        assert sums.max() - sums.min() < 1e-6 * sums.mean()


class TestSecondFFT:
    def test_unpadded_constant_vanishes(self):
        cfg = FeatureConfig(second_fft_len=16, keep_k=4)
        out = second_fft(np.full(16, 2.5), cfg)
        assert out.shape == (9,)
        assert np.max(np.abs(out)) < 1e-12

    def test_padded_constant_vanishes_with_mean_removal(self):
        cfg = FeatureConfig(second_fft_len=16, keep_k=4)
        assert np.max(second_fft(np.full(8, 3.0), cfg)) < 1e-12
        # without DC handling the padded rectangle leaks into the low bins
        raw = second_fft(np.full(8, 3.0), FeatureConfig(second_fft_len=16, keep_k=4, drop_dc=False))
        assert raw[0] == pytest.approx(24.0) and raw[1] > 1.0

    def test_alternating_hits_nyquist(self):
        cfg = FeatureConfig(second_fft_len=16, keep_k=4)
        out = second_fft(np.tile([1.0, -1.0], 8), cfg)
        assert out[8] == pytest.approx(16.0)
        assert np.max(np.abs(out[:8])) < 1e-12

    def test_too_many_frames(self):
        with pytest.raises(TooManyFrames):
            second_fft(np.ones(17), FeatureConfig(second_fft_len=16, keep_k=4))

    @settings(max_examples=40)
    @given(st.integers(0, 63), st.integers(0, 2**31))
    def test_circular_shift_invariance(self, shift, seed):
        cfg = FeatureConfig(second_fft_len=64, keep_k=8)
        v = np.random.default_rng(seed).uniform(0, 50, 64)
        np.testing.assert_allclose(second_fft(np.roll(v, shift), cfg), second_fft(v, cfg), atol=1e-9)

    def test_am_peak_at_envelope_bin(self):
        clip = add_awgn(synth_clip(AMTone(440, 4, 0.9), 10.0, 22050), 30, 2)
        fv = extract_features(clip)
        hop = FeatureConfig().frame_cfg.hop_samples(22050)
        expected = 4 / (22050 / hop) * 1024
        assert abs(int(np.argmax(fv.values)) - expected) <= 3


class TestAmplitudeFilter:
    def test_top_two(self):
        np.testing.assert_array_equal(amplitude_filter([0.1, 0.9, 0.5, 0.05], 2), [0, 0.9, 0.5, 0])

    def test_all_zero(self):
        out = amplitude_filter(np.zeros(6), 5)
        assert np.all(out == 0)

    def test_ties_prefer_lower_index(self):
        np.testing.assert_array_equal(amplitude_filter([0.5, 0.5, 0.5], 2), [0.5, 0.5, 0])

    def test_bad_k(self):
        with pytest.raises(InvalidSpec):
            amplitude_filter([1.0], 0)

    @settings(max_examples=200)
    @given(
        st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0, 2.0, 3.5]) | st.floats(0, 10), min_size=1, max_size=40),
        st.integers(1, 45),
    )
    def test_matches_sort_oracle(self, mags, k):
        mags = np.array(mags)
        out = amplitude_filter(mags, k)
        assert np.flatnonzero(out).tolist() == top_k_oracle(mags.tolist(), k)
        np.testing.assert_array_equal(out[out != 0], mags[out != 0])
        assert np.count_nonzero(out) <= k


@pytest.fixture(scope="module")
def am_clip():
    return add_awgn(synth_clip(AMTone(600, 6, 0.8), 5.0, 22050), 30, 11)


class TestExtract:
    def test_dimensions_and_sparsity(self, am_clip):
        fv = extract_features(am_clip)
        assert fv.dim == 513
        assert fv.support.size == 64
        assert np.all(fv.values >= 0)
        assert np.all(np.diff(fv.support) > 0)

    def test_gain_invariance(self, am_clip):
        base = extract_features(am_clip).values
        np.testing.assert_allclose(extract_features(am_clip.scaled(10.0)).values, base, rtol=0, atol=1e-12)
        # power-of-two gains are exact in floating point, so the pipeline is bitwise equal
        np.testing.assert_array_equal(extract_features(am_clip.scaled(4.0)).values, base)

    def test_different_noise_differs(self):
        a = extract_features(synth_clip(WhiteNoise(), 3.0, 22050, seed=1))
        b = extract_features(synth_clip(WhiteNoise(), 3.0, 22050, seed=2))
        assert not np.array_equal(a.values, b.values)

    def test_noise_robustness(self, am_clip):
        clean = extract_features(am_clip)
        noisy = extract_features(add_awgn(am_clip, 10, 3))
        assert cosine_similarity(clean, noisy) >= 0.9

    def test_too_short(self):
        # 7 frames at 0.1 s / 50% hop is 0.4 s
        with pytest.raises(ClipTooShort):
            extract_features(synth_clip(Tone(440), 0.4, 22050))

    def test_too_many_frames(self):
        cfg = FeatureConfig(second_fft_len=16, keep_k=4)
        with pytest.raises(TooManyFrames):
            extract_features(synth_clip(Tone(440), 2.0, 8000), cfg)

    def test_stage2_features(self, am_clip):
        fv = extract_stage2_features(am_clip)
        assert fv.dim == 4096 // 2 + 1
        assert fv.support.size == 64

    def test_concat_short_term(self, am_clip):
        fv = extract_features(am_clip, FeatureConfig(concat_short_term=True))
        assert fv.dim == 513 + 2049

    def test_within_class_beats_between_class(self, corpus_clips):
        feats = [extract_features(c) for c, _ in corpus_clips]
        labels = np.array([lab for _, lab in corpus_clips])
        v = np.array([f.values / np.linalg.norm(f.values) for f in feats])
        sim = v @ v.T
        same = labels[:, None] == labels[None, :]
        np.fill_diagonal(same, False)
        diff = labels[:, None] != labels[None, :]
        assert sim[same].mean() > sim[diff].mean()


def test_features_csv_roundtrip(tmp_path, rng):
    feats = [FeatureVector(amplitude_filter(rng.uniform(0, 1, 20), 5), f"clip,{i}") for i in range(4)]
    labels = ["a", "b", "a", "c"]
    write_features_csv(tmp_path / "f.csv", feats, labels, comment="hello")
    back, back_labels = read_features_csv(tmp_path / "f.csv")
    assert back_labels == labels
    assert [f.clip_id for f in back] == [f.clip_id for f in feats]
    for a, b in zip(feats, back):
        np.testing.assert_array_equal(a.values, b.values)
    header = (tmp_path / "f.csv").read_text().splitlines()[1]
    assert header.startswith("clip_id,label,v_0,") and header.endswith("v_19")


def test_feature_config_validation():
    with pytest.raises(InvalidSpec):
        FeatureConfig(second_fft_len=1000)
    with pytest.raises(InvalidSpec):
        FeatureConfig(keep_k=513)
    assert FeatureConfig().fingerprint() == FeatureConfig().fingerprint()
    assert FeatureConfig(keep_k=32).fingerprint() != FeatureConfig().fingerprint()
