"""Evaluation harness: distribution stats, time-trend, model fits, ablations,
per-feature correlations, and the diff-vs-raw label comparison.

Published figures from the original 18-subject study are carried along as
non-binding reference values, clearly labeled: they are not reproducible
without that data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from drowse.features import FEATURE_NAMES, LabeledSample
from drowse.models import ConstantInput, fit_pipeline, pearson_r, predict_pipeline

LABEL_MODES = ("diff", "raw")
MODEL_KINDS = ("ols", "pca-ols", "svr")


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class LeaveSubjectsOut:
    """Hold out whole subjects (the last fraction in sorted order)."""

    test_fraction: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")

    def describe(self) -> str:
        return f"leave-subjects-out({self.test_fraction})"


@dataclass(frozen=True)
class Pooled:
    """Random row split, subjects mixed across train and test."""

    test_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")

    def describe(self) -> str:
        return f"pooled({self.test_fraction}, seed={self.seed})"


SplitSpec = LeaveSubjectsOut | Pooled

# values reported by the original study; reference only
PAPER_REFERENCE = {
    "diff_mean": 0.95,
    "diff_sd": 2.63,
    "trend_r": 0.69,
    "ols_coefficients": (0.00100983, 0.0006003, -0.08821249, -0.03016235),
    "ablation_ols_drop_mouse_avg_error": 0.55,
    "ablation_ols_drop_mouse_velocity": 0.24,
    "ablation_ols_drop_delete_rate": 0.47,
    "ablation_ols_drop_key_down_time": 0.50,
    "feature_r_mouse_avg_error": 0.24,
    "feature_r_mouse_velocity": 0.078,
    "feature_r_delete_rate": -0.5,
    "feature_r_key_down_time": -0.009,
    "pca_ols_r_diff": 0.55,
    "pca_ols_r_raw": 0.31,
    "svr_r_diff": 0.70,
    "svr_r_raw": 0.36,
    "two_feature_ols_r_diff": 0.53,
    "svr_without_key_down_time_r_diff": 0.58,
}
PAPER_REFERENCE_LABEL = "paper reference (not reproducible without original data)"


@dataclass(frozen=True)
class EvaluationReport:
    diff_mean: float
    diff_sd: float
    trend_r: float
    model_r: dict[str, float]
    ablation: tuple[tuple[str, float], ...]  # ("(none)" baseline row first)
    ablation_kind: str
    feature_correlations: dict[str, float | None]
    label_mode: str
    split: str
    n_samples: int
    n_train: int
    n_test: int
    n_subjects: int


def _matrix(samples: Sequence[LabeledSample]) -> np.ndarray:
    return np.array([s.features.as_tuple() for s in samples], dtype=float)


def _labels(samples: Sequence[LabeledSample], label_mode: str) -> np.ndarray:
    if label_mode == "diff":
        return np.array([s.kss_diff for s in samples], dtype=float)
    if label_mode == "raw":
        return np.array([s.kss_raw for s in samples], dtype=float)
    raise ValueError(f"label mode must be diff|raw, got {label_mode!r}")


def split_dataset(
    samples: Sequence[LabeledSample], split: SplitSpec
) -> tuple[list[int], list[int]]:
    """Deterministic (train_indices, test_indices)."""
    if not samples:
        raise EmptyDataset("no samples to split")
    n = len(samples)
    if isinstance(split, LeaveSubjectsOut):
        subjects = sorted({s.subject_id for s in samples})
        if len(subjects) < 2:
            raise ValueError("leave-subjects-out needs at least 2 subjects")
        n_test = min(len(subjects) - 1, max(1, round(split.test_fraction * len(subjects))))
        held_out = set(subjects[-n_test:])
        train = [i for i, s in enumerate(samples) if s.subject_id not in held_out]
        test = [i for i, s in enumerate(samples) if s.subject_id in held_out]
        return train, test
    import random

    order = list(range(n))
    random.Random(f"pooled-split:{split.seed}").shuffle(order)
    n_test = min(n - 1, max(1, round(split.test_fraction * n)))
    return sorted(order[n_test:]), sorted(order[:n_test])


def trend_correlation(samples: Sequence[LabeledSample]) -> float:
    """Pearson r between window end time and kss_diff, pooled across subjects."""
    if len(samples) < 2:
        raise ConstantInput("need at least 2 samples")
    times = [float(s.window_end_ms) for s in samples]
    diffs = [float(s.kss_diff) for s in samples]
    return pearson_r(times, diffs)


def feature_correlations(
    samples: Sequence[LabeledSample], label_mode: str = "diff"
) -> dict[str, float | None]:
    """Per-feature Pearson r against the label; None for constant columns."""
    X = _matrix(samples)
    y = _labels(samples, label_mode)
    result: dict[str, float | None] = {}
    for j, name in enumerate(FEATURE_NAMES):
        try:
            result[name] = pearson_r(X[:, j], y)
        except ConstantInput:
            result[name] = None
    return result


def evaluate_model(
    samples: Sequence[LabeledSample],
    kind: str,
    split: SplitSpec,
    label_mode: str = "diff",
    drop_feature: str | None = None,
) -> float:
    """Train on the split's train rows, return test-set Pearson r."""
    train_idx, test_idx = split_dataset(samples, split)
    X = _matrix(samples)
    y = _labels(samples, label_mode)
    names = list(FEATURE_NAMES)
    if drop_feature is not None:
        if drop_feature not in names:
            raise ValueError(f"unknown feature {drop_feature!r}")
        keep = [j for j, name in enumerate(names) if name != drop_feature]
        X = X[:, keep]
        names = [names[j] for j in keep]
    pipeline = fit_pipeline(kind, X[train_idx], y[train_idx], tuple(names))
    predictions = predict_pipeline(pipeline, X[test_idx])
    return pearson_r(predictions, y[test_idx])


def ablate(
    samples: Sequence[LabeledSample],
    kind: str,
    split: SplitSpec,
    label_mode: str = "diff",
) -> tuple[tuple[str, float], ...]:
    """Baseline row plus one retrain per removed feature."""
    rows = [("(none)", evaluate_model(samples, kind, split, label_mode))]
    for name in FEATURE_NAMES:
        rows.append((name, evaluate_model(samples, kind, split, label_mode, drop_feature=name)))
    return tuple(rows)


def compare_label_modes(
    samples: Sequence[LabeledSample], kind: str, split: SplitSpec
) -> dict[str, float]:
    """The identical pipeline run twice, once per label mode."""
    return {
        "r_diff": evaluate_model(samples, kind, split, "diff"),
        "r_raw": evaluate_model(samples, kind, split, "raw"),
    }


def run_full_report(
    samples: Sequence[LabeledSample],
    split: SplitSpec,
    label_mode: str = "diff",
    ablation_kind: str = "ols",
) -> EvaluationReport:
    if not samples:
        raise EmptyDataset("cannot evaluate an empty dataset")
    if label_mode not in LABEL_MODES:
        raise ValueError(f"label mode must be diff|raw, got {label_mode!r}")
    diffs = np.array([s.kss_diff for s in samples], dtype=float)
    train_idx, test_idx = split_dataset(samples, split)
    ablation = ablate(samples, ablation_kind, split, label_mode)
    model_r = {}
    for kind in MODEL_KINDS:
        if kind == ablation_kind:
            model_r[kind] = ablation[0][1]  # baseline row, identical computation
        else:
            model_r[kind] = evaluate_model(samples, kind, split, label_mode)
    return EvaluationReport(
        diff_mean=float(diffs.mean()),
        diff_sd=float(np.sqrt(((diffs - diffs.mean()) ** 2).mean())),
        trend_r=trend_correlation(samples),
        model_r=model_r,
        ablation=ablation,
        ablation_kind=ablation_kind,
        feature_correlations=feature_correlations(samples, label_mode),
        label_mode=label_mode,
        split=split.describe(),
        n_samples=len(samples),
        n_train=len(train_idx),
        n_test=len(test_idx),
        n_subjects=len({s.subject_id for s in samples}),
    )


def report_rows(report: EvaluationReport) -> list[tuple[str, str, str, str]]:
    """(name, value, label_mode, split) rows, reference values last."""
    rows: list[tuple[str, str, str, str]] = []

    def add(name: str, value) -> None:
        rows.append((name, repr(value) if isinstance(value, float) else str(value),
                     report.label_mode, report.split))

    add("n_samples", report.n_samples)
    add("n_subjects", report.n_subjects)
    add("n_train", report.n_train)
    add("n_test", report.n_test)
    add("diff_mean", report.diff_mean)
    add("diff_sd", report.diff_sd)
    add("trend_r", report.trend_r)
    for kind in MODEL_KINDS:
        add(f"model_r_{kind.replace('-', '_')}", report.model_r[kind])
    for removed, r in report.ablation:
        suffix = "full" if removed == "(none)" else f"drop_{removed}"
        add(f"ablation_{report.ablation_kind.replace('-', '_')}_{suffix}", r)
    for name, r in report.feature_correlations.items():
        add(f"feature_r_{name}", float("nan") if r is None else r)
    for name, value in PAPER_REFERENCE.items():
        if name == "ols_coefficients":
            continue
        rows.append((f"paper_ref_{name}", repr(value), report.label_mode, PAPER_REFERENCE_LABEL))
    return rows


def write_report_csv(fh: TextIO, report: EvaluationReport) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["name", "value", "label_mode", "split"])
    writer.writerows(report_rows(report))


def format_report(report: EvaluationReport) -> str:
    lines = []
    width = 44
    lines.append(f"{'samples':<{width}} {report.n_samples}")
    lines.append(f"{'subjects':<{width}} {report.n_subjects}")
    lines.append(f"{'split':<{width}} {report.split}")
    lines.append(f"{'label mode':<{width}} {report.label_mode}")
    lines.append(f"{'train / test rows':<{width}} {report.n_train} / {report.n_test}")
    lines.append("")
    lines.append(f"{'KSS-diff mean':<{width}} {report.diff_mean:.4f}")
    lines.append(f"{'KSS-diff sd':<{width}} {report.diff_sd:.4f}")
    lines.append(f"{'trend r (time vs kss_diff)':<{width}} {report.trend_r:.4f}")
    lines.append("")
    for kind in MODEL_KINDS:
        lines.append(f"{f'model r [{kind}]':<{width}} {report.model_r[kind]:.4f}")
    lines.append("")
    lines.append(f"ablation ({report.ablation_kind}):")
    for removed, r in report.ablation:
        label = "full model" if removed == "(none)" else f"without {removed}"
        lines.append(f"  {label:<{width - 2}} {r:.4f}")
    lines.append("")
    lines.append("per-feature correlation with label:")
    for name, r in report.feature_correlations.items():
        value = "constant column" if r is None else f"{r:.4f}"
        lines.append(f"  {name:<{width - 2}} {value}")
    lines.append("")
    lines.append(f"{PAPER_REFERENCE_LABEL}:")
    for name, value in PAPER_REFERENCE.items():
        lines.append(f"  {name:<{width - 2}} {value}")
    return "\n".join(lines) + "\n"
