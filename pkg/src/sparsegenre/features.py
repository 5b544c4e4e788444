"""Long-term sparse spectral features (the "2nd-FFT" feature).

Pipeline per clip::

    Hamming frames -> |FFT| per frame -> divide each frame by its max
    -> sum each frame -> |FFT| of the frame-sum sequence -> keep top-K bins

The random dimension reduction that follows is done by the classifier's
measurement matrix, not here.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._backend import kernels
from .audio_io import AudioClip
from .dsp import FrameConfig, dft_magnitude, frame_count, is_pow2, spectrogram
from .errors import ClipTooShort, DimensionMismatch, InvalidSpec, TooManyFrames

MIN_FRAMES = 8
FEATURE_MODES = ("second_fft", "stage2_only")


@dataclass(frozen=True)
class FeatureConfig:
    second_fft_len: int = 1024
    keep_k: int = 64
    drop_dc: bool = True
    concat_short_term: bool = False
    frame_cfg: FrameConfig = field(default_factory=FrameConfig)

    def __post_init__(self):
        if not is_pow2(self.second_fft_len):
            raise InvalidSpec(f"second_fft_len must be a power of two, got {self.second_fft_len}")
        if not 1 <= self.keep_k <= self.second_fft_len // 2:
            raise InvalidSpec(
                f"keep_k must lie in [1, {self.second_fft_len // 2}], got {self.keep_k}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    clip_id: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    @property
    def dim(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


def normalize_frame_spectrum(mags: np.ndarray) -> np.ndarray:
    """Divide by the maximum; an all-zero spectrum stays all zeros."""
    mags = np.asarray(mags, dtype=np.float64)
    peak = mags.max(initial=0.0)
    if peak <= 0.0:
        return np.zeros_like(mags)
    return mags / peak


def frame_sum_vector(normalized: np.ndarray) -> np.ndarray:
    """Row sums of an already normalized spectrogram matrix."""
    return np.asarray(normalized, dtype=np.float64).sum(axis=1)


def second_fft(frame_sums: np.ndarray, cfg: FeatureConfig) -> np.ndarray:
    frame_sums = np.asarray(frame_sums, dtype=np.float64)
    if frame_sums.size > cfg.second_fft_len:
        raise TooManyFrames(
            f"{frame_sums.size} frames exceed second_fft_len {cfg.second_fft_len}"
        )
    if cfg.drop_dc:
        # remove the mean before zero-padding, otherwise the padded DC lobe
        # leaks into the lowest ~second_fft_len/n_frames bins
        frame_sums = frame_sums - frame_sums.mean()
    mags = dft_magnitude(frame_sums, cfg.second_fft_len)
    if cfg.drop_dc:
        mags[0] = 0.0
    return mags


def amplitude_filter(mags: np.ndarray, keep_k: int) -> np.ndarray:
    """Zero everything except the ``keep_k`` largest entries (ties: lower index wins)."""
    if keep_k < 1:
        raise InvalidSpec(f"keep_k must be >= 1, got {keep_k}")
    mags = np.asarray(mags, dtype=np.float64)
    out = np.zeros_like(mags)
    # stable sort on -mags keeps lower indices first among equal magnitudes
    order = np.argsort(-mags, kind="stable")[:keep_k]
    order = order[mags[order] != 0.0]
    out[order] = mags[order]
    return out


def _frame_stats(clip: AudioClip, cfg: FeatureConfig):
    fc = cfg.frame_cfg
    w = fc.window_samples(clip.sample_rate)
    h = fc.hop_samples(clip.sample_rate)
    n_frames = frame_count(len(clip), w, h)
    if n_frames < MIN_FRAMES:
        raise ClipTooShort(
            f"clip {clip.source_id!r} yields {n_frames} frames, at least {MIN_FRAMES} needed"
        )
    if n_frames > cfg.second_fft_len:
        raise TooManyFrames(
            f"clip {clip.source_id!r} yields {n_frames} frames, second_fft_len is {cfg.second_fft_len}"
        )
    spec = spectrogram(clip, fc)
    return kernels.normalized_row_stats(np.ascontiguousarray(spec.frames))


def extract_features(clip: AudioClip, cfg: Optional[FeatureConfig] = None) -> FeatureVector:
    """Run the six-stage pipeline on one clip (stage 6 sampling excluded)."""
    cfg = cfg or FeatureConfig()
    sums, mean_spectrum = _frame_stats(clip, cfg)
    values = amplitude_filter(second_fft(sums, cfg), cfg.keep_k)
    if cfg.concat_short_term:
        values = np.concatenate([values, mean_spectrum])
    return FeatureVector(values, clip.source_id)


def extract_stage2_features(clip: AudioClip, cfg: Optional[FeatureConfig] = None) -> FeatureVector:
    """Short-term-only baseline: mean normalized frame spectrum, amplitude filtered."""
    cfg = cfg or FeatureConfig()
    _, mean_spectrum = _frame_stats(clip, cfg)
    return FeatureVector(amplitude_filter(mean_spectrum, cfg.keep_k), clip.source_id)


def extract(clip: AudioClip, cfg: FeatureConfig, mode: str = "second_fft") -> FeatureVector:
    if mode == "second_fft":
        return extract_features(clip, cfg)
    if mode == "stage2_only":
        return extract_stage2_features(clip, cfg)
    raise InvalidSpec(f"unknown feature mode {mode!r}; expected one of {FEATURE_MODES}")


def cosine_similarity(a, b) -> float:
    a = a.values if isinstance(a, FeatureVector) else np.asarray(a, dtype=np.float64)
    b = b.values if isinstance(b, FeatureVector) else np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


# ----------------------------------------------------------------------------
# CSV interchange: clip_id,label,v_0,...,v_{D-1}

def write_features_csv(
    path: str | os.PathLike,
    features: Sequence[FeatureVector],
    labels: Sequence[str],
    comment: Optional[str] = None,
) -> None:
    if len(features) != len(labels):
        raise DimensionMismatch("features and labels differ in length")
    dims = {f.dim for f in features}
    if len(dims) > 1:
        raise DimensionMismatch(f"features have mixed dimensions {sorted(dims)}")
    dim = dims.pop() if dims else 0
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["clip_id", "label"] + [f"v_{i}" for i in range(dim)])
        for f, label in zip(features, labels):
            writer.writerow([f.clip_id, label] + [format(v, ".17g") for v in f.values])


def read_features_csv(path: str | os.PathLike) -> tuple[list[FeatureVector], list[str]]:
    features, labels = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows, None)
        if not header or header[:2] != ["clip_id", "label"]:
            raise InvalidSpec(f"{path}: missing clip_id,label header")
        dim = len(header) - 2
        for lineno, row in enumerate(rows, start=2):
            if len(row) != dim + 2:
                raise DimensionMismatch(f"{path}:{lineno}: expected {dim + 2} fields, got {len(row)}")
            features.append(FeatureVector(np.array(row[2:], dtype=np.float64), row[0]))
            labels.append(row[1])
    return features, labels

