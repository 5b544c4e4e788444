"""Text persistence for trained dictionaries (``.srcm``).

Layout::

    srcm <version>
    key = value            # header: shapes, classes (JSON list), classifier
    ...                    # parameters, feature.* settings, fingerprint
    [phi]
    <m rows of n comma-separated floats>
    [atoms]
    <m rows of N comma-separated floats>
    [labels]
    column,class,clip_id
    ...

Floats use 17 significant digits, which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

import csv
import io
import json
import os
from typing import Union

import numpy as np

from .classifier import ClassifierConfig, Dictionary
from .dsp import FrameConfig
from .errors import ModelFormatError
from .features import FeatureConfig
from .solvers import MeasurementMatrix

FORMAT_VERSION = 1
MAGIC = "srcm"

_FEATURE_KEYS = ("second_fft_len", "keep_k", "drop_dc", "concat_short_term")
_FRAME_KEYS = ("window_len_s", "hop_fraction", "fft_len_policy")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_lines(a: np.ndarray) -> list[str]:
    return [",".join(_fmt(v) for v in row) for row in a]


def save_model(
    path: Union[str, os.PathLike], dictionary: Dictionary, cfg: ClassifierConfig
) -> None:
    phi = dictionary.phi
    header = {
        "m": dictionary.m,
        "n": phi.cols,
        "n_atoms": dictionary.n_atoms,
        "classes": json.dumps(list(dictionary.classes)),
        "seed": phi.seed,
        "measurement_mode": phi.mode,
        "k_max": cfg.k_max,
        "tol": _fmt(cfg.tol),
        "solver": cfg.solver,
        "lam": _fmt(cfg.lam),
        "max_iter": cfg.max_iter,
        "config_fingerprint": dictionary.config_fingerprint,
    }
    fc = dictionary.feature_cfg
    if fc is not None:
        for k in _FEATURE_KEYS:
            header[f"feature.{k}"] = json.dumps(getattr(fc, k))
        for k in _FRAME_KEYS:
            header[f"feature.{k}"] = json.dumps(getattr(fc.frame_cfg, k))

    lines = [f"{MAGIC} {FORMAT_VERSION}"]
    lines += [f"{k} = {v}" for k, v in header.items()]
    lines.append("[phi]")
    lines += _matrix_lines(phi.entries)
    lines.append("[atoms]")
    lines += _matrix_lines(dictionary.atoms)
    lines.append("[labels]")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["column", "class", "clip_id"])
    clip_ids = dictionary.clip_ids or ("",) * dictionary.n_atoms
    for col, (lab, cid) in enumerate(zip(dictionary.labels, clip_ids)):
        w.writerow([col, dictionary.classes[lab], cid])
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n" + buf.getvalue())


def _parse_matrix(lines: list[str], rows: int, cols: int, name: str) -> np.ndarray:
    if len(lines) != rows:
        raise ModelFormatError(f"[{name}] has {len(lines)} rows, header says {rows}")
    try:
        a = np.array([[float(t) for t in ln.split(",")] for ln in lines]) if rows else np.zeros((0, cols))
    except ValueError as exc:
        raise ModelFormatError(f"[{name}]: {exc}") from None
    if a.shape != (rows, cols):
        raise ModelFormatError(f"[{name}] has shape {a.shape}, expected {(rows, cols)}")
    return a


def load_model(path: Union[str, os.PathLike]) -> tuple[Dictionary, ClassifierConfig]:
    with open(path, newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    first = lines[0].split()
    if len(first) != 2 or first[0] != MAGIC:
        raise ModelFormatError(f"{path}: not a {MAGIC} model file")
    if int(first[1]) != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {first[1]}")

    sections: dict[str, list[str]] = {"header": []}
    current = "header"
    for ln in lines[1:]:
        if ln.startswith("[") and ln.endswith("]"):
            current = ln[1:-1]
            sections[current] = []
        elif ln:
            sections[current].append(ln)
    for name in ("phi", "atoms", "labels"):
        if name not in sections:
            raise ModelFormatError(f"{path}: missing [{name}] section")

    hdr = {}
    for ln in sections["header"]:
        k, _, v = ln.partition("=")
        hdr[k.strip()] = v.strip()
    try:
        m, n, n_atoms = int(hdr["m"]), int(hdr["n"]), int(hdr["n_atoms"])
        classes = tuple(json.loads(hdr["classes"]))
        cfg = ClassifierConfig(
            m=m,
            k_max=int(hdr["k_max"]),
            tol=float(hdr["tol"]),
            solver=hdr["solver"],
            lam=float(hdr["lam"]),
            max_iter=int(hdr["max_iter"]),
            seed=int(hdr["seed"]),
            measurement_mode=hdr["measurement_mode"],
        )
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{path}: bad header ({exc})") from None

    feature_cfg = None
    if "feature.second_fft_len" in hdr:
        fk = {k: json.loads(hdr[f"feature.{k}"]) for k in _FEATURE_KEYS}
        frk = {k: json.loads(hdr[f"feature.{k}"]) for k in _FRAME_KEYS}
        feature_cfg = FeatureConfig(frame_cfg=FrameConfig(**frk), **fk)

    phi = _parse_matrix(sections["phi"], m, n, "phi")
    atoms = _parse_matrix(sections["atoms"], m, n_atoms, "atoms")
    rows = list(csv.reader(sections["labels"]))
    if not rows or rows[0] != ["column", "class", "clip_id"] or len(rows) - 1 != n_atoms:
        raise ModelFormatError(f"{path}: [labels] section malformed")
    pos = {c: i for i, c in enumerate(classes)}
    try:
        labels = np.array([pos[r[1]] for r in rows[1:]], dtype=np.int64)
    except KeyError as exc:
        raise ModelFormatError(f"{path}: label {exc} not among classes") from None

    dictionary = Dictionary(
        atoms=atoms,
        labels=labels,
        classes=classes,
        phi=MeasurementMatrix(phi, cfg.seed, cfg.measurement_mode),
        clip_ids=tuple(r[2] for r in rows[1:]),
        feature_cfg=feature_cfg,
        config_fingerprint=hdr.get("config_fingerprint", ""),
    )
    return dictionary, cfg
