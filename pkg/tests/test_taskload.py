import math
import random

import pytest

from drowse import events as ev
from drowse import taskload as tl


class FixedDraw:
    """Stub generator returning a fixed unit-interval draw."""

    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


class TestGenerateTransaction:
    def test_probability_zero_is_clean(self):
        rng = random.Random(1)
        for _ in range(50):
            tx = tl.generate_transaction(rng, 0.0)
            assert tx.injected_error is None
            assert tx.amount_due == tx.amount_transferred
            assert tx.account_listed == tx.account_verification

    def test_probability_one_has_exactly_one_mismatch(self):
        rng = random.Random(2)
        for _ in range(200):
            tx = tl.generate_transaction(rng, 1.0)
            assert tx.injected_error in (ev.AMOUNT_MISMATCH, ev.ACCOUNT_MISMATCH)
            amount_mismatch = tx.amount_due != tx.amount_transferred
            account_mismatch = tx.account_listed != tx.account_verification
            assert amount_mismatch != account_mismatch  # exactly one pair differs

    def test_deterministic_given_seed(self):
        a = [tl.generate_transaction(random.Random(42), 0.5) for _ in range(1)]
        b = [tl.generate_transaction(random.Random(42), 0.5) for _ in range(1)]
        assert a == b
        seq_a = []
        seq_b = []
        rng_a, rng_b = random.Random(7), random.Random(7)
        for _ in range(20):
            seq_a.append(tl.generate_transaction(rng_a, 0.5))
            seq_b.append(tl.generate_transaction(rng_b, 0.5))
        assert seq_a == seq_b

    def test_error_fraction_binomial_bound(self):
        rng = random.Random(3)
        p = 0.5
        n = 10_000
        errors = sum(tl.generate_transaction(rng, p).injected_error is not None for _ in range(n))
        sigma = math.sqrt(n * p * (1 - p))
        assert abs(errors - n * p) < 3 * sigma


class TestGradeDecision:
    def _tx(self, injected):
        rng = random.Random(4)
        while True:
            tx = tl.generate_transaction(rng, 0.0 if injected is None else 1.0)
            if tx.injected_error == injected:
                return tx

    def test_clean_confirm_is_correct(self):
        assert tl.grade_decision(self._tx(None), ev.CONFIRM) is True

    def test_amount_mismatch_confirm_is_wrong(self):
        assert tl.grade_decision(self._tx(ev.AMOUNT_MISMATCH), ev.CONFIRM) is False

    def test_account_mismatch_report_is_correct(self):
        assert tl.grade_decision(self._tx(ev.ACCOUNT_MISMATCH), ev.REPORT) is True

    def test_bad_decision_rejected(self):
        with pytest.raises(ValueError):
            tl.grade_decision(self._tx(None), "shrug")


class TestScheduleNextKss:
    def test_bounds_and_midpoint(self):
        config = tl.TaskConfig()
        assert tl.schedule_next_kss(FixedDraw(0.0), 1000, config) == 1000 + 180_000
        assert tl.schedule_next_kss(FixedDraw(1.0), 1000, config) == 1000 + 480_000
        assert tl.schedule_next_kss(FixedDraw(0.5), 1000, config) == 1000 + 330_000

    def test_draws_stay_in_range(self):
        config = tl.TaskConfig()
        rng = random.Random(5)
        for _ in range(1000):
            gap = tl.schedule_next_kss(rng, 0, config)
            assert 180_000 <= gap <= 480_000


class TestCheckCredentials:
    CONFIG = tl.TaskConfig(credentials=tl.Credentials("user", "pass"))

    def test_match(self):
        assert tl.check_credentials(tl.Credentials("user", "pass"), self.CONFIG)

    def test_wrong_password(self):
        assert not tl.check_credentials(tl.Credentials("user", "nope"), self.CONFIG)

    def test_empty_input(self):
        assert not tl.check_credentials(tl.Credentials("", ""), self.CONFIG)


class TestTaskConfig:
    def test_gap_order_enforced(self):
        with pytest.raises(ValueError):
            tl.TaskConfig(kss_min_gap_s=500, kss_max_gap_s=100)

    def test_probability_range_enforced(self):
        with pytest.raises(ValueError):
            tl.TaskConfig(error_probability=1.5)

    def test_duration_positive(self):
        with pytest.raises(ValueError):
            tl.TaskConfig(session_duration_s=0)


def _session(seed=0, **kwargs):
    return tl.TaskSession(tl.TaskConfig(rng_seed=seed, **kwargs))


class TestStateMachine:
    def test_select_emits_transaction_opened(self):
        session = _session()
        tx_id = session.visible_transactions()[0].tx_id
        emitted = session.step(tl.SelectTx(tx_id, now=1000))
        assert emitted == [ev.TransactionOpened(t=1000, tx_id=tx_id)]
        assert session.state.phase is tl.Phase.TRANSACTION_SELECTED

    def test_select_in_wrong_phase_is_illegal(self):
        session = _session()
        tx_id = session.visible_transactions()[0].tx_id
        session.step(tl.SelectTx(tx_id, now=1000))
        session.step(tl.Go(now=2000))
        state_before = session.state
        with pytest.raises(tl.IllegalAction):
            session.step(tl.SelectTx(tx_id, now=3000))
        assert session.state == state_before  # unchanged on illegal action

    def test_unknown_transaction_is_illegal(self):
        session = _session()
        with pytest.raises(tl.IllegalAction):
            session.step(tl.SelectTx("TX-nope", now=1000))

    def test_full_happy_path(self):
        session = _session()
        tx = session.visible_transactions()[0]
        correct_decision = ev.CONFIRM if tx.injected_error is None else ev.REPORT
        actions = [
            tl.Tick(now=500),
            tl.SelectTx(tx.tx_id, now=1000),
            tl.Go(now=2000),
            tl.Decide(correct_decision, now=3000),
            tl.SubmitCredentials("operator", "verify-2026", now=4000),
            tl.SubmitConfidence(8, now=5000),
        ]
        emitted = []
        for action in actions:
            emitted.extend(session.step(action))
        assert session.state.phase is tl.Phase.IDLE
        assert session.state.completed_tx == 1
        assert session.state.correct_tx == 1
        assert [type(e) for e in emitted] == [
            ev.TransactionOpened,
            ev.DecisionMade,
            ev.CredentialResult,
            ev.ConfidenceRated,
        ]
        assert ev.validate_session(emitted) == []

    def test_wrong_decision_not_counted_correct(self):
        session = _session()
        tx = session.visible_transactions()[0]
        wrong = ev.REPORT if tx.injected_error is None else ev.CONFIRM
        session.step(tl.SelectTx(tx.tx_id, now=1000))
        session.step(tl.Go(now=2000))
        session.step(tl.Decide(wrong, now=3000))
        session.step(tl.SubmitCredentials("operator", "verify-2026", now=4000))
        session.step(tl.SubmitConfidence(5, now=5000))
        assert session.state.completed_tx == 1
        assert session.state.correct_tx == 0

    def test_invalid_credentials_reprompt(self):
        session = _session()
        tx = session.visible_transactions()[0]
        session.step(tl.SelectTx(tx.tx_id, now=1000))
        session.step(tl.Go(now=2000))
        session.step(tl.Decide(ev.CONFIRM, now=3000))
        emitted = session.step(tl.SubmitCredentials("operator", "wrong", now=4000))
        assert emitted == [ev.CredentialResult(t=4000, ok=False)]
        assert session.state.phase is tl.Phase.CREDENTIAL_PROMPT
        emitted = session.step(tl.SubmitCredentials("operator", "verify-2026", now=5000))
        assert emitted == [ev.CredentialResult(t=5000, ok=True)]
        assert session.state.phase is tl.Phase.CONFIDENCE_PROMPT

    def test_inventory_refills_after_completion(self):
        session = _session()
        tx = session.visible_transactions()[0]
        session.step(tl.SelectTx(tx.tx_id, now=1000))
        session.step(tl.Go(now=2000))
        session.step(tl.Decide(ev.CONFIRM, now=3000))
        session.step(tl.SubmitCredentials("operator", "verify-2026", now=4000))
        session.step(tl.SubmitConfidence(5, now=5000))
        listed = session.visible_transactions()
        assert len(listed) == tl.VISIBLE_TX_COUNT
        assert tx.tx_id not in [t.tx_id for t in listed]

    def test_clock_must_be_monotone(self):
        session = _session()
        session.step(tl.Tick(now=5000))
        with pytest.raises(tl.IllegalAction):
            session.step(tl.Tick(now=4000))


class TestKssFlow:
    def test_tick_past_pending_emits_prompt_at_scheduled_time(self):
        session = _session()
        pending = session.state.pending_kss_at
        emitted = session.step(tl.Tick(now=pending + 700))
        assert emitted == [ev.KssPromptShown(t=pending)]
        assert session.state.awaiting_kss

    def test_tick_before_pending_emits_nothing(self):
        session = _session()
        assert session.step(tl.Tick(now=session.state.pending_kss_at - 1)) == []

    def test_submit_kss_without_prompt_is_illegal(self):
        session = _session()
        with pytest.raises(tl.IllegalAction):
            session.step(tl.SubmitKss(5, now=1000))

    def test_task_actions_blocked_while_awaiting(self):
        session = _session()
        pending = session.state.pending_kss_at
        session.step(tl.Tick(now=pending))
        tx_id = session.visible_transactions()[0].tx_id
        with pytest.raises(tl.IllegalAction):
            session.step(tl.SelectTx(tx_id, now=pending + 100))
        emitted = session.step(tl.SubmitKss(6, now=pending + 200))
        assert emitted == [ev.KssAnswered(t=pending + 200, score=6)]
        assert not session.state.awaiting_kss
        # task resumes afterwards
        session.step(tl.SelectTx(tx_id, now=pending + 300))

    def test_answer_reschedules_within_bounds(self):
        session = _session()
        pending = session.state.pending_kss_at
        session.step(tl.Tick(now=pending))
        session.step(tl.SubmitKss(4, now=pending))
        gap = session.state.pending_kss_at - pending
        assert 180_000 <= gap <= 480_000

    def test_prompt_overlays_phase_without_resetting_it(self):
        session = _session()
        tx_id = session.visible_transactions()[0].tx_id
        session.step(tl.SelectTx(tx_id, now=1000))
        session.step(tl.Go(now=2000))
        pending = session.state.pending_kss_at
        session.step(tl.Tick(now=pending))
        assert session.state.phase is tl.Phase.VERIFYING
        session.step(tl.SubmitKss(3, now=pending + 500))
        assert session.state.phase is tl.Phase.VERIFYING

    def test_prompt_gaps_stay_in_range_over_long_session(self):
        session = _session(seed=9)
        emitted = []
        now = 0
        while now < 3_600_000:
            now += 1000
            emitted.extend(session.step(tl.Tick(now=now)))
            if session.state.awaiting_kss:
                emitted.extend(session.step(tl.SubmitKss(5, now=now)))
        prompts = [e.t for e in emitted if isinstance(e, ev.KssPromptShown)]
        assert len(prompts) >= 7
        gaps = [b - a for a, b in zip(prompts, prompts[1:])]
        assert all(180_000 <= gap <= 481_000 for gap in gaps)
        assert ev.validate_session(emitted) == []


class TestRandomizedSessions:
    def test_emitted_streams_always_validate(self):
        rng = random.Random(11)
        for seed in range(10):
            session = _session(seed=seed)
            emitted = []
            now = 0
            for _ in range(300):
                now += rng.randint(1, 5000)
                action = self._random_action(rng, session, now)
                try:
                    emitted.extend(session.step(action))
                except tl.IllegalAction:
                    pass
            assert ev.validate_session(emitted) == []
            assert session.state.correct_tx <= session.state.completed_tx

    @staticmethod
    def _random_action(rng, session, now):
        choice = rng.randrange(7)
        if choice == 0:
            txs = session.visible_transactions()
            return tl.SelectTx(rng.choice(txs).tx_id, now=now)
        if choice == 1:
            return tl.Go(now=now)
        if choice == 2:
            return tl.Decide(rng.choice([ev.CONFIRM, ev.REPORT]), now=now)
        if choice == 3:
            word = rng.choice(["operator", "guest"])
            return tl.SubmitCredentials(word, "verify-2026", now=now)
        if choice == 4:
            return tl.SubmitConfidence(rng.randint(1, 10), now=now)
        if choice == 5:
            return tl.SubmitKss(rng.randint(1, 9), now=now)
        return tl.Tick(now=now)


class TestSnapshot:
    def test_snapshot_round_trip_preserves_behavior(self):
        session = _session(seed=21)
        tx_id = session.visible_transactions()[0].tx_id
        session.step(tl.SelectTx(tx_id, now=1000))
        session.step(tl.Go(now=2000))
        snap = session.snapshot()

        restored = tl.TaskSession.from_snapshot(session.config, snap)
        assert restored.state == session.state
        assert restored.visible_transactions() == session.visible_transactions()

        action = tl.Decide(ev.CONFIRM, now=3000)
        assert restored.step(action) == session.step(action)
        assert restored.state == session.state

    def test_snapshot_is_json_compatible(self):
        import json

        session = _session(seed=22)
        text = json.dumps(session.snapshot())
        restored = tl.TaskSession.from_snapshot(session.config, json.loads(text))
        assert restored.state == session.state
