"""Synthetic AM-tone corpus whose classes differ only in envelope rate.

Every clip in class ``c`` is an amplitude-modulated tone with envelope rate
``rates[c]``.  The carrier frequency, modulation depth and envelope phase are
drawn at random per clip, and a white-noise floor is added, so only the
long-term (envelope) structure separates the classes.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np

from .audio_io import AMTone, AudioClip, add_awgn, synth_clip, write_wav
from .errors import InvalidSpec

CARRIER_RANGE_HZ = (220.0, 1760.0)
DEPTH_RANGE = (0.6, 1.0)
NOISE_FLOOR_DB = 30.0


def envelope_rates(n_classes: int) -> list[float]:
    """2, 4, 6, 8 Hz for up to four classes; evenly spread over 1..9 Hz beyond."""
    if n_classes < 1:
        raise InvalidSpec("need at least one class")
    if n_classes <= 4:
        return [2.0 * (c + 1) for c in range(n_classes)]
    return [float(r) for r in np.linspace(1.0, 9.0, n_classes)]


def class_name(rate: float) -> str:
    return f"am{rate:05.2f}hz"


def synth_corpus(
    n_classes: int = 4,
    clips_per_class: int = 50,
    seed: int = 0,
    duration_s: float = 5.0,
    sample_rate: int = 22050,
    noise_floor_db: float = NOISE_FLOOR_DB,
) -> list[tuple[AudioClip, str]]:
    out = []
    for c, rate in enumerate(envelope_rates(n_classes)):
        label = class_name(rate)
        for j in range(clips_per_class):
            rng = np.random.default_rng([seed, c, j])
            spec = AMTone(
                carrier=float(rng.uniform(*CARRIER_RANGE_HZ)),
                rate=rate,
                depth=float(rng.uniform(*DEPTH_RANGE)),
                phase=float(rng.uniform(0.0, 2.0 * np.pi)),
            )
            clip = synth_clip(spec, duration_s, sample_rate)
            noise_seed = int(rng.integers(2**32))
            clip = add_awgn(clip, noise_floor_db, noise_seed)
            out.append((AudioClip(clip.samples, sample_rate, f"{label}/{j:04d}"), label))
    return out


def write_synth_corpus(
    out_dir: Union[str, os.PathLike],
    n_classes: int = 4,
    clips_per_class: int = 50,
    seed: int = 0,
    **kwargs,
) -> Path:
    """Write the corpus as ``<out_dir>/<class>/<nnnn>.wav`` (16-bit PCM)."""
    root = Path(out_dir)
    for clip, label in synth_corpus(n_classes, clips_per_class, seed, **kwargs):
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        write_wav(d / f"{clip.source_id.split('/')[-1]}.wav", clip)
    return root
