"""Audio clips: decoding, synthesis, noise corruption and dataset indexing.

Only 16-bit linear PCM is decoded: little-endian RIFF/WAV and big-endian
Sun/NeXT AU (the GTZAN encoding).  Multi-channel input is downmixed by the
per-sample channel mean.
"""
from __future__ import annotations

import math
import os
import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import (
    CorruptFile,
    EmptyAudio,
    EmptyDataset,
    InvalidSpec,
    UnsupportedFormat,
    ZeroPowerSignal,
)

AUDIO_EXTENSIONS = (".wav", ".au")
PCM16_SCALE = 32768.0
AU_MAGIC = 0x2E736E64
AU_LINEAR_16 = 3


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono sample buffer.  ``samples`` is a read-only float64 array."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).ravel()
        if samples.size == 0:
            raise EmptyAudio(f"clip {self.source_id!r} has no samples")
        if self.sample_rate <= 0:
            raise InvalidSpec(f"sample rate must be positive, got {self.sample_rate}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def scaled(self, gain: float) -> "AudioClip":
        return AudioClip(self.samples * gain, self.sample_rate, f"{self.source_id}*{gain!r}")


@dataclass(frozen=True)
class DatasetIndex:
    entries: tuple[tuple[str, str], ...]
    classes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        entries = tuple((str(p), str(c)) for p, c in self.entries)
        classes = tuple(sorted({c for _, c in entries} | set(self.classes)))
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "classes", classes)

    def __len__(self):
        return len(self.entries)

    @property
    def labels(self) -> list[str]:
        return [c for _, c in self.entries]

    @property
    def paths(self) -> list[str]:
        return [p for p, _ in self.entries]


# ----------------------------------------------------------------------------
# decoding

def _pcm16_to_mono(raw: bytes, n_channels: int, byteorder: str) -> np.ndarray:
    data = np.frombuffer(raw, dtype=np.dtype(f"{byteorder}i2")).astype(np.float64)
    data /= PCM16_SCALE
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return data


def _read_wav(path: str) -> tuple[np.ndarray, int]:
    try:
        with wave.open(path, "rb") as w:
            n_channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            n_frames = w.getnframes()
            raw = w.readframes(n_frames)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedFormat(f"{path}: {exc}") from None
        raise CorruptFile(f"{path}: {exc}") from None
    except EOFError:
        raise CorruptFile(f"{path}: truncated header") from None
    if width != 2:
        raise UnsupportedFormat(f"{path}: {8 * width}-bit PCM, only 16-bit is supported")
    if n_channels < 1 or rate <= 0:
        raise CorruptFile(f"{path}: bad header (channels={n_channels}, rate={rate})")
    if len(raw) != n_frames * n_channels * 2:
        raise CorruptFile(
            f"{path}: header declares {n_frames} frames, data holds "
            f"{len(raw) // (2 * n_channels)}"
        )
    return _pcm16_to_mono(raw, n_channels, "<"), rate


def _read_au(path: str) -> tuple[np.ndarray, int]:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 24:
        raise CorruptFile(f"{path}: truncated AU header")
    _, offset, size, encoding, rate, n_channels = struct.unpack(">6I", blob[:24])
    if encoding != AU_LINEAR_16:
        raise UnsupportedFormat(f"{path}: AU encoding {encoding}, only 16-bit linear PCM (3)")
    if offset < 24 or offset > len(blob) or n_channels < 1 or rate <= 0:
        raise CorruptFile(f"{path}: bad AU header")
    payload = blob[offset:]
    # 0xffffffff means "unknown size": use whatever follows the header
    if size != 0xFFFFFFFF:
        if size > len(payload):
            raise CorruptFile(f"{path}: header declares {size} data bytes, found {len(payload)}")
        payload = payload[:size]
    if len(payload) % (2 * n_channels):
        raise CorruptFile(f"{path}: data length not a whole number of frames")
    return _pcm16_to_mono(payload, n_channels, ">"), rate


def load_clip(path: Union[str, os.PathLike]) -> AudioClip:
    """Decode a 16-bit PCM WAV or AU file into a mono clip in [-1, 1)."""
    path = os.fspath(path)
    with open(path, "rb") as f:
        head = f.read(12)
    if head[:4] == b"RIFF" and head[8:12] == b"WAVE":
        samples, rate = _read_wav(path)
    elif len(head) >= 4 and struct.unpack(">I", head[:4])[0] == AU_MAGIC:
        samples, rate = _read_au(path)
    else:
        raise UnsupportedFormat(f"{path}: neither RIFF/WAVE nor AU")
    if samples.size == 0:
        raise EmptyAudio(f"{path}: zero samples")
    return AudioClip(samples, rate, path)


def _to_pcm16(samples: np.ndarray) -> np.ndarray:
    q = np.round(np.asarray(samples, dtype=np.float64) * PCM16_SCALE)
    return np.clip(q, -32768, 32767).astype(np.int16)


def write_wav(path: Union[str, os.PathLike], clip: AudioClip) -> None:
    """Write a mono 16-bit WAV.  Values outside [-1, 1) are clipped."""
    with wave.open(os.fspath(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(clip.sample_rate)
        w.writeframes(_to_pcm16(clip.samples).astype("<i2").tobytes())


def write_au(path: Union[str, os.PathLike], clip: AudioClip) -> None:
    data = _to_pcm16(clip.samples).astype(">i2").tobytes()
    header = struct.pack(">6I", AU_MAGIC, 24, len(data), AU_LINEAR_16, clip.sample_rate, 1)
    with open(path, "wb") as f:
        f.write(header + data)


# ----------------------------------------------------------------------------
# dataset layout

def scan_dataset(root: Union[str, os.PathLike]) -> DatasetIndex:
    """Index ``<root>/<class>/<file>.{wav,au}``; the directory name is the label."""
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"{root}: not a directory")
    entries = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for f in sorted(class_dir.iterdir()):
            if f.is_file() and f.suffix.lower() in AUDIO_EXTENSIONS:
                entries.append((str(f), class_dir.name))
    if not entries:
        raise EmptyDataset(f"{root}: no class directories with audio files")
    return DatasetIndex(tuple(entries))


# ----------------------------------------------------------------------------
# synthesis

@dataclass(frozen=True)
class Tone:
    freq: float


@dataclass(frozen=True)
class AMTone:
    carrier: float
    rate: float
    depth: float
    phase: float = 0.0  # envelope phase, radians


@dataclass(frozen=True)
class WhiteNoise:
    pass


SynthSpec = Union[Tone, AMTone, WhiteNoise]


def synth_clip(kind: SynthSpec, duration_s: float, sample_rate: int, seed: int = 0) -> AudioClip:
    """Synthesize a deterministic test signal scaled to a peak of 0.9."""
    if duration_s <= 0 or sample_rate <= 0:
        raise InvalidSpec("duration and sample rate must be positive")
    n = int(round(duration_s * sample_rate))
    if n == 0:
        raise InvalidSpec("duration shorter than one sample")
    t = np.arange(n) / sample_rate
    if isinstance(kind, Tone):
        if kind.freq <= 0:
            raise InvalidSpec(f"tone frequency must be positive, got {kind.freq}")
        x = np.sin(2 * np.pi * kind.freq * t)
    elif isinstance(kind, AMTone):
        if kind.carrier <= 0 or kind.rate <= 0:
            raise InvalidSpec("AM carrier and envelope rate must be positive")
        if not 0.0 <= kind.depth <= 1.0:
            raise InvalidSpec(f"AM depth must lie in [0, 1], got {kind.depth}")
        env = 1.0 + kind.depth * np.sin(2 * np.pi * kind.rate * t + kind.phase)
        x = env * np.sin(2 * np.pi * kind.carrier * t)
    elif isinstance(kind, WhiteNoise):
        x = np.random.default_rng(seed).standard_normal(n)
    else:
        raise InvalidSpec(f"unknown synthesis kind {kind!r}")
    peak = np.max(np.abs(x))
    if peak > 0:
        x = x * (0.9 / peak)
    return AudioClip(x, sample_rate, f"synth:{kind!r}:seed={seed}")


def signal_power(samples: np.ndarray) -> float:
    return float(np.mean(np.square(samples)))


def add_awgn(clip: AudioClip, snr_db: float, seed: int) -> AudioClip:
    """Add white Gaussian noise at ``snr_db`` relative to the clip's mean power.

    No clipping or renormalization is applied afterwards.
    """
    p_signal = signal_power(clip.samples)
    if p_signal == 0.0:
        raise ZeroPowerSignal(f"clip {clip.source_id!r} is silent; SNR undefined")
    sigma = math.sqrt(p_signal / 10.0 ** (snr_db / 10.0))
    noise = np.random.default_rng(seed).normal(0.0, sigma, clip.samples.size)
    return AudioClip(
        clip.samples + noise, clip.sample_rate, f"{clip.source_id}+awgn({snr_db:g}dB,{seed})"
    )
