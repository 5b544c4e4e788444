"""Run configuration stored as flat ``key = value`` text.

Values are plain strings, numbers, booleans (``true``/``false``) or comma
separated lists.  Lines starting with ``#`` are comments.  Precedence is
defaults < config file < command-line flags.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from typing import Any, Optional

from .classifier import ClassifierConfig
from .dsp import FrameConfig
from .errors import ConfigError
from .features import FeatureConfig

TABLE_IV_SIZES = [1, 10, 20, 30, 40, 50, 70, 80, 99]


@dataclass
class RunConfig:
    # framing / features
    window_len_s: float = 0.1
    hop_fraction: float = 0.5
    fft_len_policy: str = "next_pow2"
    second_fft_len: int = 1024
    keep_k: int = 64
    drop_dc: bool = True
    concat_short_term: bool = False
    feature_mode: str = "second_fft"
    # classifier
    m: int = 35
    k_max: int = 10
    tol: float = 1e-6
    solver: str = "omp"
    lam: float = 0.01
    max_iter: int = 5000
    measurement_mode: str = "gaussian"
    seed: int = 0
    # harness
    folds: int = 5
    trials: int = 10
    noise_trials: int = 3
    sizes: list = field(default_factory=lambda: list(TABLE_IV_SIZES))
    snr_list: list = field(default_factory=lambda: [40.0, 20.0, 10.0, 0.0, -10.0])
    jobs: int = 1
    # paths
    input: Optional[str] = None
    out: Optional[str] = None
    dataset: Optional[str] = None
    model: Optional[str] = None
    features: Optional[str] = None

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            second_fft_len=self.second_fft_len,
            keep_k=self.keep_k,
            drop_dc=self.drop_dc,
            concat_short_term=self.concat_short_term,
            frame_cfg=FrameConfig(self.window_len_s, self.hop_fraction, self.fft_len_policy),
        )

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(
            m=self.m,
            k_max=self.k_max,
            tol=self.tol,
            solver=self.solver,
            lam=self.lam,
            max_iter=self.max_iter,
            seed=self.seed,
            measurement_mode=self.measurement_mode,
        )

    def replace(self, **overrides) -> "RunConfig":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return dataclasses.replace(self, **overrides)


_FIELD_KIND = {
    "sizes": "int_list",
    "snr_list": "float_list",
}


def _kind(f: dataclasses.Field) -> str:
    if f.name in _FIELD_KIND:
        return _FIELD_KIND[f.name]
    return {
        "float": "float",
        "int": "int",
        "bool": "bool",
        "str": "str",
        "Optional[str]": "opt_str",
    }[f.type]


def parse_value(key: str, text: str) -> Any:
    try:
        f = next(f for f in fields(RunConfig) if f.name == key)
    except StopIteration:
        raise ConfigError(f"unknown config key {key!r}") from None
    kind = _kind(f)
    text = text.strip()
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "bool":
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind == "int_list":
            return [int(t) for t in text.split(",") if t.strip()]
        if kind == "float_list":
            return [float(t) for t in text.split(",") if t.strip()]
        if kind == "opt_str":
            return text or None
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(format_value(v) for v in value)
    if value is None:
        return ""
    return str(value)


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def emit_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))


def load_config(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    with open(path) as fh:
        overrides = parse_config_text(fh.read())
    return (base or RunConfig()).replace(**overrides)


def snapshot_hash(snapshot: dict) -> str:
    return hashlib.sha256(json.dumps(snapshot, sort_keys=True).encode()).hexdigest()
