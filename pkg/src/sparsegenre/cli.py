"""Command-line interface.

Exit status is 0 on success, 1 on a processing error and 2 on a usage error.
Errors are printed to stderr as a single ``error: <code>: <message>`` line.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from ._backend import BACKEND
from .audio_io import DatasetIndex, load_clip, scan_dataset, AUDIO_EXTENSIONS
from .classifier import build_dictionary, classify
from .config import RunConfig, emit_config, format_value, load_config, parse_value
from .corpus import write_synth_corpus
from .errors import ConfigError, SparseGenreError
from .evaluation import FeatureCache, cross_validate, index_features, learning_curve, noise_sweep
from .features import FeatureConfig, read_features_csv, write_features_csv
from .dsp import FrameConfig
from .model_io import load_model, save_model
from . import reports

DEFAULTS = RunConfig()


class UsageError(SparseGenreError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _field(p: argparse.ArgumentParser, flag: str, name: str, help: str, **kw) -> None:
    default = format_value(getattr(DEFAULTS, name)) or "none"
    p.add_argument(
        flag,
        dest=name,
        default=argparse.SUPPRESS,
        type=lambda s, _n=name: parse_value(_n, s),
        help=f"{help} (default: {default})",
        **kw,
    )


def _common(p, jobs=True):
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="flat key = value config file; flags override it (default: none)")
    _field(p, "--seed", "seed", "random seed for measurement matrix, folds and noise")
    if jobs:
        _field(p, "--jobs", "jobs", "worker threads; results do not depend on it")


def _feature_flags(p):
    _field(p, "--window", "window_len_s", "analysis window length in seconds")
    _field(p, "--hop", "hop_fraction", "hop as a fraction of the window")
    _field(p, "--fft-policy", "fft_len_policy", "first FFT length rule: next_pow2 or exact")
    _field(p, "--second-fft-len", "second_fft_len", "zero-padded length of the frame-sum FFT")
    _field(p, "--keep-k", "keep_k", "bins kept by the amplitude filter")
    _field(p, "--drop-dc", "drop_dc", "remove the frame-sum mean / DC bin (true|false)")
    _field(p, "--concat-short-term", "concat_short_term",
           "append the mean normalized frame spectrum (true|false)")


def _classifier_flags(p, dim_flag="--dim"):
    _field(p, dim_flag, "m", "measured feature dimension (rows of the Gaussian matrix)")
    _field(p, "--k-max", "k_max", "OMP sparsity budget")
    _field(p, "--tol", "tol", "OMP relative residual tolerance")
    _field(p, "--solver", "solver", "sparse coder: omp or ista")
    _field(p, "--lam", "lam", "l1 weight for the ista solver")
    _field(p, "--measurement", "measurement_mode", "gaussian or coordinate_subsample")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsegenre", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="compute feature vectors into a CSV")
    _field(p, "--input", "input", "audio file or dataset directory", required=False)
    _field(p, "--out", "out", "output features CSV")
    _field(p, "--mode", "feature_mode", "second_fft or stage2_only")
    _feature_flags(p)
    _common(p)

    p = sub.add_parser("train", help="build a dictionary model from a features CSV")
    _field(p, "--features", "features", "features CSV written by 'extract'")
    _field(p, "--out", "out", "output model file (.srcm)")
    _classifier_flags(p)
    _common(p, jobs=False)

    p = sub.add_parser("classify", help="classify audio with a trained model")
    _field(p, "--model", "model", "model file (.srcm)")
    _field(p, "--input", "input", "audio file or directory")
    _field(p, "--out", "out", "optional predictions CSV")
    _common(p)

    p = sub.add_parser("evaluate", help="stratified k-fold cross-validation")
    _field(p, "--dataset", "dataset", "dataset root: <root>/<class>/<clip>.{wav,au}")
    _field(p, "--folds", "folds", "number of folds")
    _field(p, "--out", "out", "report CSV")
    _field(p, "--mode", "feature_mode", "second_fft or stage2_only")
    _feature_flags(p)
    _classifier_flags(p)
    _common(p)

    p = sub.add_parser("learning-curve", help="error versus training clips per class")
    _field(p, "--dataset", "dataset", "dataset root")
    _field(p, "--sizes", "sizes", "comma-separated training clips per class")
    p.add_argument("--mode", default="both", choices=["second_fft", "stage2_only", "both"],
                   help="feature mode(s) to sweep (default: both)")
    _field(p, "--trials", "trials", "random training draws per size")
    _field(p, "--out", "out", "curve CSV")
    _feature_flags(p)
    _classifier_flags(p)
    _common(p)

    p = sub.add_parser("noise-sweep", help="accuracy and feature similarity under additive noise")
    _field(p, "--dataset", "dataset", "dataset root")
    _field(p, "--snr", "snr_list", "comma-separated SNR values in dB")
    _field(p, "--trials", "noise_trials", "noise draws per SNR")
    _field(p, "--folds", "folds", "fold count; fold 0 is the held-out test set")
    _field(p, "--out", "out", "noise CSV")
    _feature_flags(p)
    _classifier_flags(p)
    _common(p)

    p = sub.add_parser("synth-corpus", help="write the synthetic AM-tone corpus")
    p.add_argument("--out", required=True, help="output directory (default: required)")
    p.add_argument("--classes", type=int, default=4, help="number of classes (default: 4)")
    p.add_argument("--clips", type=int, default=50, help="clips per class (default: 50)")
    p.add_argument("--duration", type=float, default=5.0, help="clip length in seconds (default: 5.0)")
    p.add_argument("--sample-rate", type=int, default=22050, help="sample rate in Hz (default: 22050)")
    _field(p, "--seed", "seed", "corpus seed")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    names = set(vars(cfg))
    overrides = {k: v for k, v in vars(args).items() if k in names}
    return cfg.replace(**overrides)


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) in (None, "")]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _audio_inputs(path: str) -> DatasetIndex:
    """A single file, a ``<class>/<clip>`` tree, or a flat directory of clips."""
    p = Path(path)
    if p.is_file():
        return DatasetIndex(((str(p), ""),))
    if p.is_dir() and any(d.is_dir() for d in p.iterdir()):
        return scan_dataset(p)
    files = sorted(f for f in p.iterdir() if f.suffix.lower() in AUDIO_EXTENSIONS) if p.is_dir() else []
    if not files:
        raise UsageError(f"{path}: no audio input found")
    return DatasetIndex(tuple((str(f), "") for f in files))


def _feature_cfg_comment(fc: FeatureConfig, mode: str) -> str:
    d = fc.to_dict()
    d["feature_mode"] = mode
    return "feature_config=" + json.dumps(d, sort_keys=True)


def _read_feature_cfg_comment(path: str) -> Optional[FeatureConfig]:
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("# feature_config="):
        return None
    d = json.loads(first[len("# feature_config="):])
    d.pop("feature_mode", None)
    frame = FrameConfig(**d.pop("frame_cfg"))
    return FeatureConfig(frame_cfg=frame, **d)


def cmd_extract(cfg: RunConfig) -> int:
    _require(cfg, "input", "out")
    index = _audio_inputs(cfg.input)
    fc = cfg.feature_config()
    feats = index_features(index, fc, cfg.feature_mode, jobs=cfg.jobs)
    write_features_csv(cfg.out, feats, index.labels, comment=_feature_cfg_comment(fc, cfg.feature_mode))
    print(f"wrote {len(feats)} feature vectors of dimension {feats[0].dim} to {cfg.out}")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    _require(cfg, "features", "out")
    feats, labels = read_features_csv(cfg.features)
    if any(not lab for lab in labels):
        raise UsageError(f"{cfg.features}: every row needs a class label to train")
    fc = _read_feature_cfg_comment(cfg.features)
    clf = cfg.classifier_config()
    d = build_dictionary(feats, labels, clf.m, clf.seed,
                         measurement_mode=clf.measurement_mode, feature_cfg=fc)
    save_model(cfg.out, d, clf)
    counts = ", ".join(f"{c}={n}" for c, n in zip(d.classes, d.class_counts()))
    print(f"trained {d.m}x{d.n_atoms} dictionary ({counts}) -> {cfg.out}")
    return 0


def cmd_classify(cfg: RunConfig) -> int:
    _require(cfg, "model", "input")
    d, clf = load_model(cfg.model)
    fc = d.feature_cfg or FeatureConfig()
    index = _audio_inputs(cfg.input)
    cache = FeatureCache()
    rows = []
    for path, truth in index.entries:
        fv = cache.get(load_clip(path), fc)
        res = classify(d, fv, clf)
        resid = ",".join(f"{c}:{r:.6f}" for c, r in zip(d.classes, res.residuals))
        print(f"{path}\tpredicted={res.predicted}\tresiduals={resid}")
        rows.append([path, truth, res.predicted, format(res.margin, ".17g")]
                    + [format(r, ".17g") for r in res.residuals])
    if cfg.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["clip_id", "truth", "predicted", "margin"] + [f"r_{c}" for c in d.classes])
        w.writerows(rows)
        Path(cfg.out).write_text(buf.getvalue())
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    _require(cfg, "dataset")
    index = scan_dataset(cfg.dataset)
    report = cross_validate(index, cfg.feature_config(), cfg.classifier_config(), cfg.folds,
                            cfg.seed, mode=cfg.feature_mode, jobs=cfg.jobs)
    if cfg.out:
        reports.write_report_csv(cfg.out, report)
    print(reports.summarize_report(report))
    print(f"kernels: {BACKEND}")
    return 0


def cmd_learning_curve(cfg: RunConfig, mode: str) -> int:
    _require(cfg, "dataset")
    index = scan_dataset(cfg.dataset)
    modes = ["second_fft", "stage2_only"] if mode == "both" else [mode]
    cache = FeatureCache()
    curves = [
        learning_curve(index, cfg.sizes, m, cfg.trials, cfg.seed, feature_cfg=cfg.feature_config(),
                       clf_cfg=cfg.classifier_config(), jobs=cfg.jobs, cache=cache)
        for m in modes
    ]
    if cfg.out:
        reports.write_curve_csv(cfg.out, curves)
    print(reports.summarize_curves(curves))
    return 0


def cmd_noise_sweep(cfg: RunConfig) -> int:
    _require(cfg, "dataset")
    index = scan_dataset(cfg.dataset)
    rep = noise_sweep(index, cfg.snr_list, cfg.feature_config(), cfg.classifier_config(), cfg.seed,
                      k=cfg.folds, trials=cfg.noise_trials, jobs=cfg.jobs)
    if cfg.out:
        reports.write_noise_csv(cfg.out, rep)
    print(reports.summarize_noise(rep))
    return 0


def cmd_synth_corpus(args, cfg: RunConfig) -> int:
    root = write_synth_corpus(args.out, args.classes, args.clips, cfg.seed,
                              duration_s=args.duration, sample_rate=args.sample_rate)
    print(f"wrote {args.classes} x {args.clips} clips to {root}")
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        cmd = args.command
        if cmd == "extract":
            return cmd_extract(cfg)
        if cmd == "train":
            return cmd_train(cfg)
        if cmd == "classify":
            return cmd_classify(cfg)
        if cmd == "evaluate":
            return cmd_evaluate(cfg)
        if cmd == "learning-curve":
            return cmd_learning_curve(cfg, args.mode)
        if cmd == "noise-sweep":
            return cmd_noise_sweep(cfg)
        if cmd == "synth-corpus":
            return cmd_synth_corpus(args, cfg)
        raise UsageError(f"unknown command {cmd!r}")
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SparseGenreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
