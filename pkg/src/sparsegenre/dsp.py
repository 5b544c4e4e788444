"""Windowing, framing and half-spectrum DFT magnitudes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import AudioClip
from .errors import BadLength, ClipTooShort, InvalidSpec, TooShort


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def next_pow2(n: int) -> int:
    return 1 << max(0, (int(n) - 1).bit_length())


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrameConfig:
    window_len_s: float = 0.1
    hop_fraction: float = 0.5
    fft_len_policy: str = "next_pow2"  # or "exact" (only valid when W is a power of two)

    def __post_init__(self):
        if not self.window_len_s > 0:
            raise InvalidSpec(f"window_len_s must be positive, got {self.window_len_s}")
        if not 0 < self.hop_fraction <= 1:
            raise InvalidSpec(f"hop_fraction must lie in (0, 1], got {self.hop_fraction}")
        if self.fft_len_policy not in ("next_pow2", "exact"):
            raise InvalidSpec(f"unknown fft_len_policy {self.fft_len_policy!r}")

    def window_samples(self, sample_rate: int) -> int:
        w = round_half_up(self.window_len_s * sample_rate)
        if w < 2:
            raise InvalidSpec(f"window of {self.window_len_s}s is under 2 samples at {sample_rate} Hz")
        return w

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, round_half_up(self.window_samples(sample_rate) * self.hop_fraction))

    def fft_len(self, sample_rate: int) -> int:
        w = self.window_samples(sample_rate)
        if self.fft_len_policy == "exact":
            if not is_pow2(w):
                raise BadLength(f"exact fft_len policy needs a power-of-two window, got {w}")
            return w
        return next_pow2(w)


@dataclass(frozen=True)
class Spectrogram:
    frames: np.ndarray  # (n_frames, n_bins), non-negative
    fft_len: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self.frames.shape[1]


def hamming_window(n: int) -> np.ndarray:
    """Symmetric Hamming window, ``0.54 - 0.46 cos(2 pi k / (n - 1))``."""
    if n < 2:
        raise TooShort(f"Hamming window needs n >= 2, got {n}")
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def frame_count(length: int, window: int, hop: int) -> int:
    if length < window:
        return 0
    return (length - window) // hop + 1


def frame_signal(clip: AudioClip, cfg: FrameConfig) -> np.ndarray:
    """Return the Hamming-windowed frames as an ``(n_frames, W)`` array.

    Trailing samples that do not fill a whole window are dropped.
    """
    w = cfg.window_samples(clip.sample_rate)
    h = cfg.hop_samples(clip.sample_rate)
    if len(clip) < w:
        raise ClipTooShort(
            f"clip {clip.source_id!r} has {len(clip)} samples, window needs {w}"
        )
    frames = sliding_window_view(clip.samples, w)[::h]
    return frames * hamming_window(w)


def dft_magnitude(frame: np.ndarray, fft_len: int) -> np.ndarray:
    """|X[k]| for k = 0..fft_len/2 of the zero-padded frame.

    Accepts a single frame or a 2-D stack (one frame per row).
    """
    frame = np.asarray(frame, dtype=np.float64)
    if not is_pow2(fft_len):
        raise BadLength(f"fft_len must be a power of two, got {fft_len}")
    if frame.shape[-1] > fft_len:
        raise BadLength(f"frame of length {frame.shape[-1]} exceeds fft_len {fft_len}")
    return np.abs(np.fft.rfft(frame, n=fft_len, axis=-1))


def spectrogram(clip: AudioClip, cfg: FrameConfig) -> Spectrogram:
    n = cfg.fft_len(clip.sample_rate)
    return Spectrogram(dft_magnitude(frame_signal(clip, cfg), n), n)
