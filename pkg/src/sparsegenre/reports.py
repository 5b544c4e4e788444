"""Report emission: text summaries and plot-ready CSV files.

Every CSV starts with a ``# config_sha256=...`` comment line.  Wall-clock
timings appear only in text summaries so CSVs stay byte-reproducible.
"""
from __future__ import annotations

import csv
import io
import os
from typing import Sequence, Union

from .config import snapshot_hash
from .evaluation import (
    CURVE_FOOTNOTE,
    REFERENCE_ACCURACY,
    REFERENCE_CURVE,
    REFERENCE_FEATURE_DIM,
    EvalReport,
    LearningCurve,
    NoiseReport,
    format_accuracy,
)

PathLike = Union[str, os.PathLike]


def _g(x: float) -> str:
    return format(float(x), ".10g")


def _write(path: PathLike, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def report_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write(f"# config_sha256={report.config_hash}\n")
    buf.write("# section=confusion (rows=truth, cols=predicted)\n")
    w.writerow(["truth\\predicted", *report.classes])
    for cls, row in zip(report.classes, report.confusion):
        w.writerow([cls, *[int(v) for v in row]])
    buf.write("# section=metrics\n")
    w.writerow(["metric", "value"])
    w.writerow(["accuracy", format_accuracy(report.accuracy)])
    w.writerow(["n_classified", int(report.confusion.sum())])
    w.writerow(["n_folds", len(report.per_fold_accuracy)])
    for f, (acc, n) in enumerate(zip(report.per_fold_accuracy, report.fold_sizes)):
        w.writerow([f"fold_{f}_accuracy", format_accuracy(acc)])
        w.writerow([f"fold_{f}_size", n])
    w.writerow(["feature_dimension", report.config_snapshot["classifier"]["m"]])
    w.writerow(["reference_accuracy_published", REFERENCE_ACCURACY])
    w.writerow(["reference_feature_dimension_published", REFERENCE_FEATURE_DIM])
    return buf.getvalue()


def write_report_csv(path: PathLike, report: EvalReport) -> None:
    _write(path, report_csv(report))


def predictions_csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["clip_id", "truth", "predicted"])
    w.writerows(rows)
    return buf.getvalue()


def summarize_report(report: EvalReport) -> str:
    width = max(len(c) for c in report.classes)
    lines = [
        f"accuracy: {format_accuracy(report.accuracy)} over {int(report.confusion.sum())} clips "
        f"({len(report.per_fold_accuracy)} folds)",
        "per-fold: " + ", ".join(format_accuracy(a) for a in report.per_fold_accuracy),
        f"published GTZAN reference: {REFERENCE_ACCURACY:.3f} at dimension {REFERENCE_FEATURE_DIM} "
        "(comparison only)",
        "confusion (rows=truth):",
        " " * (width + 2) + " ".join(f"{c[:6]:>6}" for c in report.classes),
    ]
    for cls, row in zip(report.classes, report.confusion):
        lines.append(f"  {cls:<{width}} " + " ".join(f"{int(v):>6}" for v in row))
    lines.append(f"config sha256: {report.config_hash}")
    lines.append(f"wall time: {report.wall_time_s:.2f} s")
    return "\n".join(lines)


def curve_csv(curves: Sequence[LearningCurve]) -> str:
    snap = {c.mode: c.config_snapshot for c in curves}
    buf = io.StringIO()
    buf.write(f"# config_sha256={snapshot_hash(snap)}\n")
    for c in curves:
        buf.write(f"# mode={c.mode} n_test_per_class={c.n_test_per_class} unit=error_percent\n")
        buf.write("x,mean,stddev\n")
        for s, mu, sd in zip(c.sizes, c.mean_error_pct, c.std_error_pct):
            buf.write(f"{s},{_g(mu)},{_g(sd)}\n")
    return buf.getvalue()


def write_curve_csv(path: PathLike, curves: Sequence[LearningCurve]) -> None:
    _write(path, curve_csv(curves))


def summarize_curves(curves: Sequence[LearningCurve]) -> str:
    lines = ["error % by training clips per class (mean +/- stddev over trials)"]
    for c in curves:
        cells = ", ".join(f"{s}: {mu:.1f}+/-{sd:.1f}" for s, mu, sd in
                          zip(c.sizes, c.mean_error_pct, c.std_error_pct))
        lines.append(f"  {c.mode:<12} {cells}")
    lines.append("published GTZAN reference (comparison only):")
    for mode in ("stage2_only", "second_fft"):
        cells = ", ".join(f"{s}: {e}" for s, e in zip(REFERENCE_CURVE["sizes"], REFERENCE_CURVE[mode]))
        lines.append(f"  {mode:<12} {cells}")
    lines.append(f"note: {CURVE_FOOTNOTE}")
    return "\n".join(lines)


def noise_csv(report: NoiseReport) -> str:
    buf = io.StringIO()
    buf.write(f"# config_sha256={snapshot_hash(report.config_snapshot)}\n")
    buf.write(f"# clean_accuracy={_g(report.clean_accuracy)}\n")
    buf.write("# metric=accuracy\n")
    buf.write("x,mean,stddev\n")
    for s, mu, sd in zip(report.snr_db, report.accuracy_mean, report.accuracy_std):
        buf.write(f"{_g(s)},{_g(mu)},{_g(sd)}\n")
    buf.write("# metric=cosine_similarity\n")
    buf.write("x,mean,stddev\n")
    for s, mu, sd in zip(report.snr_db, report.similarity_mean, report.similarity_std):
        buf.write(f"{_g(s)},{_g(mu)},{_g(sd)}\n")
    return buf.getvalue()


def write_noise_csv(path: PathLike, report: NoiseReport) -> None:
    _write(path, noise_csv(report))


def summarize_noise(report: NoiseReport) -> str:
    lines = [f"clean accuracy: {report.clean_accuracy:.4f}", "snr_db  accuracy        cos_similarity"]
    for s, am, asd, sm, ssd in zip(report.snr_db, report.accuracy_mean, report.accuracy_std,
                                   report.similarity_mean, report.similarity_std):
        lines.append(f"{s:>6g}  {am:.4f}+/-{asd:.4f}  {sm:.4f}+/-{ssd:.4f}")
    return "\n".join(lines)
