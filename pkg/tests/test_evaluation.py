import io
import random

import numpy as np
import pytest

from drowse import evaluation as ez
from drowse.features import FEATURE_NAMES, FeatureVector, LabeledSample
from drowse.models import ConstantInput


def _sample(subject, end_ms, features, diff, raw=None):
    return LabeledSample(
        features=FeatureVector(*features),
        kss_raw=raw if raw is not None else max(1, min(9, 5 + diff)),
        kss_diff=diff,
        window_start_ms=end_ms - 300_000,
        window_end_ms=end_ms,
        subject_id=subject,
    )


def _signal_dataset(seed=0, subjects=8, windows=12, offsets=False):
    """delete_rate carries the label; other features are noise."""
    rng = random.Random(seed)
    samples = []
    for s in range(subjects):
        offset = rng.choice([-2, -1, 0, 1, 2]) if offsets else 0
        for w in range(windows):
            level = 3.0 + 4.0 * w / (windows - 1)
            diff = round(level) - 3
            raw = max(1, min(9, round(level) + offset))
            features = (
                rng.gauss(5.0, 1.0),
                rng.gauss(150.0, 20.0),
                1.0 + 1.5 * level + rng.gauss(0.0, 0.2),
                rng.gauss(95.0, 8.0),
            )
            samples.append(
                _sample(f"subj-{s:02d}", 200_000 * (w + 1), features, diff, raw)
            )
    return samples


class TestSplits:
    def test_leave_subjects_out_holds_out_whole_subjects(self):
        samples = _signal_dataset()
        train, test = ez.split_dataset(samples, ez.LeaveSubjectsOut(0.25))
        train_subjects = {samples[i].subject_id for i in train}
        test_subjects = {samples[i].subject_id for i in test}
        assert train_subjects.isdisjoint(test_subjects)
        assert len(test_subjects) == 2  # 25% of 8

    def test_pooled_split_deterministic(self):
        samples = _signal_dataset()
        a = ez.split_dataset(samples, ez.Pooled(0.25, seed=3))
        b = ez.split_dataset(samples, ez.Pooled(0.25, seed=3))
        assert a == b
        c = ez.split_dataset(samples, ez.Pooled(0.25, seed=4))
        assert a != c

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            ez.LeaveSubjectsOut(0.0)
        with pytest.raises(ValueError):
            ez.Pooled(1.0)

    def test_empty_dataset(self):
        with pytest.raises(ez.EmptyDataset):
            ez.split_dataset([], ez.Pooled())


class TestTrendCorrelation:
    def test_monotone_positive(self):
        samples = []
        for s in range(4):
            for w in range(10):
                samples.append(
                    _sample(f"s{s}", 100_000 * (w + 1), (1.0, 2.0, 3.0, 4.0), diff=w // 2)
                )
        assert ez.trend_correlation(samples) > 0

    def test_shuffled_labels_have_small_r(self):
        rng = random.Random(123)
        diffs = [rng.randint(-3, 3) for _ in range(500)]
        samples = [
            _sample("s", 10_000 * (i + 1), (1.0, 2.0, 3.0, 4.0), d) for i, d in enumerate(diffs)
        ]
        assert abs(ez.trend_correlation(samples)) < 0.1

    def test_constant_labels_raise(self):
        samples = [_sample("s", 10_000 * (i + 1), (1.0, 2.0, 3.0, 4.0), 2) for i in range(5)]
        with pytest.raises(ConstantInput):
            ez.trend_correlation(samples)


class TestFeatureCorrelations:
    def test_feature_equal_to_label(self):
        samples = [
            _sample("s", 10_000 * (i + 1), (float(d), 2.0 - d, 3.0, 4.0 + 0.1 * i), d)
            for i, d in enumerate([0, 1, 2, 3, 0, 1, 2, 3])
        ]
        result = ez.feature_correlations(samples)
        assert result["mouse_avg_error"] == 1.0
        assert result["mouse_velocity"] == -1.0
        assert result["delete_rate"] is None  # constant column reported, not fatal


class TestModelEvaluation:
    def test_ablating_the_signal_feature_is_worst(self):
        samples = _signal_dataset(seed=5)
        table = dict(ez.ablate(samples, "ols", ez.LeaveSubjectsOut(0.25)))
        assert min(table, key=table.get) == "delete_rate"

    def test_removing_noise_feature_barely_matters(self):
        samples = _signal_dataset(seed=6, subjects=10, windows=25)
        table = dict(ez.ablate(samples, "ols", ez.LeaveSubjectsOut(0.25)))
        assert abs(table["(none)"] - table["mouse_velocity"]) < 0.05

    def test_diff_labels_beat_raw_when_offsets_planted(self):
        samples = _signal_dataset(seed=7, offsets=True)
        result = ez.compare_label_modes(samples, "ols", ez.LeaveSubjectsOut(0.25))
        assert result["r_diff"] > result["r_raw"]

    def test_label_modes_identical_when_baselines_equal(self):
        samples = _signal_dataset(seed=8, offsets=False)  # every raw = diff + 3
        for kind in ("ols", "svr"):
            result = ez.compare_label_modes(samples, kind, ez.LeaveSubjectsOut(0.25))
            assert abs(result["r_diff"] - result["r_raw"]) < 1e-9

    def test_drop_unknown_feature(self):
        samples = _signal_dataset()
        with pytest.raises(ValueError):
            ez.evaluate_model(samples, "ols", ez.Pooled(), drop_feature="typing_speed")


class TestFullReport:
    def test_empty_dataset_rejected(self):
        with pytest.raises(ez.EmptyDataset):
            ez.run_full_report([], ez.Pooled())

    def test_all_fields_populated(self):
        samples = _signal_dataset(seed=9)
        report = ez.run_full_report(samples, ez.LeaveSubjectsOut(0.25))
        assert set(report.model_r) == {"ols", "pca-ols", "svr"}
        assert len(report.ablation) == 1 + len(FEATURE_NAMES)
        assert all(-1.0 <= r <= 1.0 for r in report.model_r.values())
        assert report.n_train + report.n_test == report.n_samples

    def test_baseline_ablation_row_equals_model_r(self):
        samples = _signal_dataset(seed=10)
        report = ez.run_full_report(samples, ez.LeaveSubjectsOut(0.25), ablation_kind="svr")
        assert report.model_r["svr"] == report.ablation[0][1]

    def test_report_csv_deterministic(self):
        samples = _signal_dataset(seed=11)
        buffers = []
        for _ in range(2):
            buf = io.StringIO()
            report = ez.run_full_report(samples, ez.Pooled(0.25, seed=2))
            ez.write_report_csv(buf, report)
            buffers.append(buf.getvalue())
        assert buffers[0] == buffers[1]
        header = buffers[0].splitlines()[0]
        assert header == "name,value,label_mode,split"

    def test_paper_reference_rows_labeled(self):
        samples = _signal_dataset(seed=12)
        buf = io.StringIO()
        ez.write_report_csv(buf, ez.run_full_report(samples, ez.Pooled(0.25, seed=2)))
        text = buf.getvalue()
        assert "paper_ref_svr_r_diff" in text
        assert ez.PAPER_REFERENCE_LABEL in text

    def test_text_table_renders(self):
        samples = _signal_dataset(seed=13)
        text = ez.format_report(ez.run_full_report(samples, ez.LeaveSubjectsOut(0.25)))
        assert "trend r" in text
        assert "ablation (ols):" in text
