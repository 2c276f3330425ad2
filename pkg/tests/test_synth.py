import io

import numpy as np
import pytest

from drowse import events as ev
from drowse import synth
from drowse.features import extract_samples, write_features_csv


def _flat_spec(**kwargs):
    """All effects off, all noise off: every window must look identical."""
    defaults = dict(
        subjects=3,
        session_duration_s=1800,
        trajectory=synth.LinearTrajectory(5.0, 5.0),
        trajectory_jitter=0.0,
        mouse_avg_error=synth.FeatureEffect(base=6.0, slope=0.0, noise_sd=0.0),
        mouse_velocity=synth.FeatureEffect(base=130.0, slope=0.0, noise_sd=0.0),
        delete_rate=synth.FeatureEffect(base=4.0, slope=0.0, noise_sd=0.0),
        key_down_time=synth.FeatureEffect(base=90.0, slope=0.0, noise_sd=0.0),
        baseline_offset_range=0,
        seed=7,
    )
    defaults.update(kwargs)
    return synth.SynthSpec(**defaults)


class TestZeroEffect:
    def test_all_feature_windows_equal(self):
        spec = _flat_spec()
        vectors = []
        for subject in range(spec.subjects):
            log = synth.generate_session(spec, subject)
            result = extract_samples(log)
            assert result.dropped_missing == 0 and result.dropped_short == 0
            vectors.extend(s.features.as_tuple() for s in result.samples)
        assert len(vectors) >= 9
        reference = np.array(vectors[0])
        for vec in vectors[1:]:
            assert np.abs(np.array(vec) - reference).max() < 1e-9

    def test_planted_values_recovered_exactly(self):
        spec = _flat_spec()
        log = synth.generate_session(spec, 0)
        sample = extract_samples(log).samples[0]
        assert sample.features.key_down_time == 90.0
        assert sample.features.delete_rate == 4.0
        assert abs(sample.features.mouse_velocity - 130.0) < 1e-9
        assert abs(sample.features.mouse_avg_error - 6.0) < 1e-9


class TestValidity:
    def test_sessions_validate_and_keep_cadence(self):
        spec = synth.SynthSpec(subjects=4, seed=3)
        for subject in range(spec.subjects):
            log = synth.generate_session(spec, subject)
            assert ev.validate_session(log.events) == []
            prompts = [e.t for e in log.events if isinstance(e, ev.KssPromptShown)]
            gaps = [b - a for a, b in zip([0] + prompts, prompts)]
            assert all(180_000 <= g <= 480_000 for g in gaps)

    def test_monotone_trajectory_gives_monotone_diffs(self):
        spec = synth.SynthSpec(
            subjects=2,
            trajectory=synth.LinearTrajectory(3.0, 8.0),
            trajectory_jitter=0.0,
            seed=5,
        )
        for subject in range(spec.subjects):
            log = synth.generate_session(spec, subject)
            diffs = [s.kss_diff for s in extract_samples(log).samples]
            assert diffs == sorted(diffs)

    def test_deterministic_given_seed(self):
        spec = synth.SynthSpec(subjects=2, seed=11)
        a = synth.generate_session(spec, 1)
        b = synth.generate_session(spec, 1)
        assert a == b
        buf_a, buf_b = io.StringIO(), io.StringIO()
        write_features_csv(buf_a, synth.generate_benchmark(spec))
        write_features_csv(buf_b, synth.generate_benchmark(spec))
        assert buf_a.getvalue() == buf_b.getvalue()

    def test_zero_subjects_empty_dataset(self):
        assert synth.generate_benchmark(synth.SynthSpec(subjects=0)) == []

    def test_expected_samples_per_subject(self):
        # cadence 3-8 min over 60 min: at least ~8 windows per subject on average
        totals = []
        for seed in range(5):
            spec = synth.SynthSpec(subjects=3, seed=seed)
            samples = synth.generate_benchmark(spec)
            totals.append(len(samples) / spec.subjects)
        assert sum(totals) / len(totals) >= 8.0


class TestSlopeRecovery:
    @staticmethod
    def _fit_slope(x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        x_centered = x - x.mean()
        return float((x_centered @ (y - y.mean())) / (x_centered @ x_centered))

    def test_dwell_slope_recovered_with_zero_noise(self):
        spec = _flat_spec(
            subjects=6,
            session_duration_s=3600,
            trajectory=synth.LinearTrajectory(2.0, 8.0),
            key_down_time=synth.FeatureEffect(base=70.0, slope=10.0, noise_sd=0.0),
        )
        levels, dwells = [], []
        for subject in range(spec.subjects):
            log, plan = synth.generate_session_with_plan(spec, subject)
            samples = extract_samples(log).samples
            assert len(samples) == len(plan.windows)
            levels.extend(w.level for w in plan.windows)
            dwells.extend(s.features.key_down_time for s in samples)
        slope = self._fit_slope(levels, dwells)
        assert abs(slope - 10.0) / 10.0 < 0.05

    def test_all_slopes_recovered_with_zero_noise(self):
        spec = _flat_spec(
            subjects=6,
            session_duration_s=3600,
            trajectory=synth.LinearTrajectory(2.0, 8.0),
            mouse_avg_error=synth.FeatureEffect(base=3.0, slope=0.9, noise_sd=0.0),
            mouse_velocity=synth.FeatureEffect(base=100.0, slope=8.0, noise_sd=0.0),
            delete_rate=synth.FeatureEffect(base=1.0, slope=1.5, noise_sd=0.0),
            key_down_time=synth.FeatureEffect(base=70.0, slope=6.0, noise_sd=0.0),
        )
        levels = []
        columns = {name: [] for name in ("error", "velocity", "delete", "dwell")}
        for subject in range(spec.subjects):
            log, plan = synth.generate_session_with_plan(spec, subject)
            samples = extract_samples(log).samples
            levels.extend(w.level for w in plan.windows)
            for s in samples:
                columns["error"].append(s.features.mouse_avg_error)
                columns["velocity"].append(s.features.mouse_velocity)
                columns["delete"].append(s.features.delete_rate)
                columns["dwell"].append(s.features.key_down_time)
        for name, planted in [("error", 0.9), ("velocity", 8.0), ("delete", 1.5), ("dwell", 6.0)]:
            slope = self._fit_slope(levels, columns[name])
            assert abs(slope - planted) / planted < 0.05, f"{name}: {slope} vs {planted}"


class TestBaselineOffsets:
    def test_offsets_shift_raw_but_not_diff(self):
        import math

        spec = synth.SynthSpec(subjects=8, seed=13, trajectory_jitter=0.0)
        raw_firsts = set()
        offsets = set()
        for subject in range(spec.subjects):
            log, plan = synth.generate_session_with_plan(spec, subject)
            samples = extract_samples(log).samples
            raw_firsts.add(samples[0].kss_raw)
            offsets.add(plan.baseline_offset)
            # the per-subject offset cancels in the diff label: diffs equal the
            # offset-free rounded-level differences
            level_rounds = [math.floor(w.level + 0.5) for w in plan.windows]
            expected = [r - level_rounds[0] for r in level_rounds]
            assert [s.kss_diff for s in samples] == expected
            assert all(s.kss_raw == r + plan.baseline_offset for s, r in zip(samples, level_rounds))
        assert len(raw_firsts) > 1  # offsets actually vary across subjects
        assert len(offsets) > 1


class TestSpecDocuments:
    def test_round_trip(self):
        spec = synth.SynthSpec(
            subjects=5,
            trajectory=synth.PiecewiseTrajectory(((0.0, 3.0), (0.5, 4.0), (1.0, 8.0))),
            seed=99,
        )
        assert synth.spec_from_dict(synth.spec_to_dict(spec)) == spec

    def test_defaults_from_empty_doc(self):
        assert synth.spec_from_dict({}) == synth.SynthSpec()

    def test_piecewise_interpolation(self):
        traj = synth.PiecewiseTrajectory(((0.0, 2.0), (0.5, 6.0), (1.0, 6.0)))
        assert traj.level(0.0) == 2.0
        assert traj.level(0.25) == 4.0
        assert traj.level(0.75) == 6.0

    def test_bad_breakpoints(self):
        with pytest.raises(ValueError):
            synth.PiecewiseTrajectory(((0.5, 3.0), (0.2, 4.0)))
