"""Server-side logic of the accounting task-load experiment.

Transactions with planted errors, decision grading, the credential check,
randomized KSS prompt scheduling, and the per-session workflow state machine:

    Idle -> TransactionSelected -> Verifying -> CredentialPrompt -> ConfidencePrompt -> Idle

A pending KSS prompt overlays whatever phase is active and blocks task
actions until answered.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from enum import Enum

from drowse.events import (
    ACCOUNT_MISMATCH,
    AMOUNT_MISMATCH,
    CONFIRM,
    REPORT,
    ConfidenceRated,
    CredentialResult,
    DecisionMade,
    InputEvent,
    KssAnswered,
    KssPromptShown,
    TransactionOpened,
    TransactionRecord,
)

VISIBLE_TX_COUNT = 10


class IllegalAction(ValueError):
    """Action is not legal in the current phase; state is unchanged."""


@dataclass(frozen=True)
class Credentials:
    username: str
    password: str


@dataclass(frozen=True)
class TaskConfig:
    session_duration_s: int = 3600
    kss_min_gap_s: int = 180
    kss_max_gap_s: int = 480
    error_probability: float = 0.5
    credentials: Credentials = Credentials("operator", "verify-2026")
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.session_duration_s <= 0:
            raise ValueError("session_duration_s must be > 0")
        if not 0 < self.kss_min_gap_s <= self.kss_max_gap_s:
            raise ValueError("need 0 < kss_min_gap_s <= kss_max_gap_s")
        if not 0.0 <= self.error_probability <= 1.0:
            raise ValueError("error_probability must be in 0..1")


class Phase(str, Enum):
    IDLE = "idle"
    TRANSACTION_SELECTED = "transaction_selected"
    VERIFYING = "verifying"
    CREDENTIAL_PROMPT = "credential_prompt"
    CONFIDENCE_PROMPT = "confidence_prompt"


@dataclass(frozen=True)
class SessionState:
    phase: Phase = Phase.IDLE
    active_tx_id: str | None = None
    decision: str | None = None  # recorded at Decide, graded at completion
    pending_kss_at: int = 0
    awaiting_kss: bool = False
    completed_tx: int = 0
    correct_tx: int = 0
    last_now: int = 0


# client actions
@dataclass(frozen=True)
class SelectTx:
    tx_id: str
    now: int


@dataclass(frozen=True)
class Go:
    now: int


@dataclass(frozen=True)
class Decide:
    decision: str  # confirm | report
    now: int


@dataclass(frozen=True)
class SubmitCredentials:
    username: str
    password: str
    now: int


@dataclass(frozen=True)
class SubmitConfidence:
    rating: int  # 1..10
    now: int


@dataclass(frozen=True)
class SubmitKss:
    score: int  # 1..9
    now: int


@dataclass(frozen=True)
class Tick:
    now: int


Action = SelectTx | Go | Decide | SubmitCredentials | SubmitConfidence | SubmitKss | Tick

_PAYMENT_METHODS = ("wire transfer", "cheque", "mobile banking", "credit card", "cash deposit")
_BANKS = (
    "First Meridian Bank",
    "Krung Siam Bank",
    "Harbor Trust",
    "Union Commercial",
    "Metro Savings",
)
_FIRST_NAMES = ("Anan", "Beatrice", "Chai", "Dararat", "Emil", "Fon", "Goran", "Hana")
_LAST_NAMES = ("Srisuk", "Novak", "Thongdee", "Okafor", "Petrov", "Boonmee", "Iwata")


def _random_account(rng: random.Random) -> str:
    digits = [rng.randrange(10) for _ in range(10)]
    return f"{digits[0]}{digits[1]}{digits[2]}-{digits[3]}-{digits[4]}{digits[5]}{digits[6]}{digits[7]}{digits[8]}-{digits[9]}"


def generate_transaction(rng: random.Random, error_probability: float) -> TransactionRecord:
    """One plausible synthetic transaction; with probability `error_probability`
    exactly one verification pair mismatches (amount or account, uniformly)."""
    if not 0.0 <= error_probability <= 1.0:
        raise ValueError("error_probability must be in 0..1")
    tx_id = f"TX-{rng.randrange(1_000_000):06d}"
    amount_due = rng.randrange(1_000, 5_000_000)
    account = _random_account(rng)
    injected: str | None = None
    amount_transferred = amount_due
    account_verification = account
    if rng.random() < error_probability:
        injected = AMOUNT_MISMATCH if rng.random() < 0.5 else ACCOUNT_MISMATCH
        if injected == AMOUNT_MISMATCH:
            delta = rng.choice([-1, 1]) * rng.randrange(1, 10_000)
            amount_transferred = max(0, amount_due + delta)
            if amount_transferred == amount_due:  # clamp collision
                amount_transferred = amount_due + abs(delta)
        else:
            position = rng.randrange(len(account))
            while not account[position].isdigit():
                position = rng.randrange(len(account))
            new_digit = str((int(account[position]) + rng.randrange(1, 10)) % 10)
            account_verification = account[:position] + new_digit + account[position + 1 :]
    return TransactionRecord(
        tx_id=tx_id,
        payment_method=rng.choice(_PAYMENT_METHODS),
        bank_name=rng.choice(_BANKS),
        account_listed=account,
        account_verification=account_verification,
        payer_name=f"{rng.choice(_FIRST_NAMES)} {rng.choice(_LAST_NAMES)}",
        amount_due=amount_due,
        amount_transferred=amount_transferred,
        injected_error=injected,
    )


def grade_decision(tx: TransactionRecord, decision: str) -> bool:
    """True iff the decision matches the ground truth planted in the record."""
    if decision not in (CONFIRM, REPORT):
        raise ValueError(f"decision must be confirm|report, got {decision!r}")
    return (decision == CONFIRM) == (tx.injected_error is None)


def schedule_next_kss(rng: random.Random, now_ms: int, config: TaskConfig) -> int:
    """Next prompt time: now plus a uniform draw from the configured gap range."""
    gap_ms = config.kss_min_gap_s * 1000 + rng.random() * (
        (config.kss_max_gap_s - config.kss_min_gap_s) * 1000
    )
    return now_ms + int(round(gap_ms))


def check_credentials(submitted: Credentials, config: TaskConfig) -> bool:
    return (
        submitted.username == config.credentials.username
        and submitted.password == config.credentials.password
    )


class TaskSession:
    """One participant's session: state machine plus transaction inventory.

    Single-threaded per session; distinct sessions are independent.
    """

    def __init__(self, config: TaskConfig, *, _restore: dict | None = None):
        self.config = config
        self.rng = random.Random(config.rng_seed)
        if _restore is not None:
            self._restore(_restore)
            return
        self.transactions: dict[str, TransactionRecord] = {}
        self._tx_order: list[str] = []
        while len(self.transactions) < VISIBLE_TX_COUNT:
            self._add_transaction()
        self.state = SessionState(pending_kss_at=schedule_next_kss(self.rng, 0, config))

    def _add_transaction(self) -> None:
        tx = generate_transaction(self.rng, self.config.error_probability)
        while tx.tx_id in self.transactions:
            tx = generate_transaction(self.rng, self.config.error_probability)
        self.transactions[tx.tx_id] = tx
        self._tx_order.append(tx.tx_id)

    def visible_transactions(self) -> list[TransactionRecord]:
        return [self.transactions[tx_id] for tx_id in self._tx_order]

    def step(self, action: Action) -> list[InputEvent]:
        """Apply one client action; returns the events this step emitted.

        Raises IllegalAction when the action is not legal in the current
        phase; nothing is mutated and nothing is emitted in that case.
        A due prompt fires as part of the next legal step, stamped at its
        scheduled time so prompt-to-prompt gaps equal the scheduled draws.
        An action arriving in the same step the prompt fires still lands;
        only subsequent task actions are blocked until the answer.
        """
        state = self.state
        now = action.now
        if now < state.last_now:
            raise IllegalAction(f"clock went backwards: {now} < {state.last_now}")
        fires = not state.awaiting_kss and now >= state.pending_kss_at

        # legality first: an illegal action must leave no trace
        if isinstance(action, SubmitKss):
            if not (state.awaiting_kss or fires):
                raise IllegalAction("no KSS prompt is awaiting an answer")
        elif not isinstance(action, Tick):
            if state.awaiting_kss:
                raise IllegalAction("KSS prompt must be answered first")
            if isinstance(action, SelectTx):
                if state.phase is not Phase.IDLE:
                    raise IllegalAction(f"SelectTx not legal in {state.phase.value}")
                if action.tx_id not in self.transactions:
                    raise IllegalAction(f"unknown transaction {action.tx_id!r}")
            elif isinstance(action, Go):
                if state.phase is not Phase.TRANSACTION_SELECTED:
                    raise IllegalAction(f"Go not legal in {state.phase.value}")
            elif isinstance(action, Decide):
                if state.phase is not Phase.VERIFYING:
                    raise IllegalAction(f"Decide not legal in {state.phase.value}")
                if action.decision not in (CONFIRM, REPORT):
                    raise IllegalAction(f"bad decision {action.decision!r}")
            elif isinstance(action, SubmitCredentials):
                if state.phase is not Phase.CREDENTIAL_PROMPT:
                    raise IllegalAction(f"SubmitCredentials not legal in {state.phase.value}")
            elif isinstance(action, SubmitConfidence):
                if state.phase is not Phase.CONFIDENCE_PROMPT:
                    raise IllegalAction(f"SubmitConfidence not legal in {state.phase.value}")
                if not 1 <= action.rating <= 10:
                    raise IllegalAction(f"confidence rating must be 1..10, got {action.rating}")
            else:
                raise IllegalAction(f"unsupported action {type(action).__name__}")

        events: list[InputEvent] = []
        if fires:
            events.append(KssPromptShown(t=state.pending_kss_at))
            state = replace(state, awaiting_kss=True)

        if isinstance(action, SubmitKss):
            events.append(KssAnswered(t=now, score=action.score))
            state = replace(
                state,
                awaiting_kss=False,
                pending_kss_at=schedule_next_kss(self.rng, now, self.config),
            )
        elif isinstance(action, SelectTx):
            events.append(TransactionOpened(t=now, tx_id=action.tx_id))
            state = replace(state, phase=Phase.TRANSACTION_SELECTED, active_tx_id=action.tx_id)
        elif isinstance(action, Go):
            state = replace(state, phase=Phase.VERIFYING)
        elif isinstance(action, Decide):
            events.append(DecisionMade(t=now, tx_id=state.active_tx_id, decision=action.decision))
            state = replace(state, phase=Phase.CREDENTIAL_PROMPT, decision=action.decision)
        elif isinstance(action, SubmitCredentials):
            ok = check_credentials(Credentials(action.username, action.password), self.config)
            events.append(CredentialResult(t=now, ok=ok))
            if ok:
                state = replace(state, phase=Phase.CONFIDENCE_PROMPT)
            # invalid credentials re-prompt: phase unchanged
        elif isinstance(action, SubmitConfidence):
            tx = self.transactions[state.active_tx_id]
            events.append(ConfidenceRated(t=now, tx_id=tx.tx_id, rating=action.rating))
            correct = grade_decision(tx, state.decision)
            del self.transactions[tx.tx_id]
            self._tx_order.remove(tx.tx_id)
            self._add_transaction()  # keep the visible list at constant size
            state = replace(
                state,
                phase=Phase.IDLE,
                active_tx_id=None,
                decision=None,
                completed_tx=state.completed_tx + 1,
                correct_tx=state.correct_tx + (1 if correct else 0),
            )

        self.state = replace(state, last_now=now)
        return events

    # persistence across service restarts
    def snapshot(self) -> dict:
        rng_state = self.rng.getstate()
        return {
            "phase": self.state.phase.value,
            "active_tx_id": self.state.active_tx_id,
            "decision": self.state.decision,
            "pending_kss_at": self.state.pending_kss_at,
            "awaiting_kss": self.state.awaiting_kss,
            "completed_tx": self.state.completed_tx,
            "correct_tx": self.state.correct_tx,
            "last_now": self.state.last_now,
            "rng_state": [rng_state[0], list(rng_state[1]), rng_state[2]],
            "transactions": [tx_to_dict(self.transactions[i]) for i in self._tx_order],
        }

    def _restore(self, snap: dict) -> None:
        self.rng.setstate((snap["rng_state"][0], tuple(snap["rng_state"][1]), snap["rng_state"][2]))
        records = [tx_from_dict(d) for d in snap["transactions"]]
        self.transactions = {tx.tx_id: tx for tx in records}
        self._tx_order = [tx.tx_id for tx in records]
        self.state = SessionState(
            phase=Phase(snap["phase"]),
            active_tx_id=snap["active_tx_id"],
            decision=snap["decision"],
            pending_kss_at=snap["pending_kss_at"],
            awaiting_kss=snap["awaiting_kss"],
            completed_tx=snap["completed_tx"],
            correct_tx=snap["correct_tx"],
            last_now=snap["last_now"],
        )

    @classmethod
    def from_snapshot(cls, config: TaskConfig, snap: dict) -> "TaskSession":
        return cls(config, _restore=snap)


def tx_to_dict(tx: TransactionRecord) -> dict:
    return {
        "tx_id": tx.tx_id,
        "payment_method": tx.payment_method,
        "bank_name": tx.bank_name,
        "account_listed": tx.account_listed,
        "account_verification": tx.account_verification,
        "payer_name": tx.payer_name,
        "amount_due": tx.amount_due,
        "amount_transferred": tx.amount_transferred,
        "injected_error": tx.injected_error,
    }


def tx_from_dict(doc: dict) -> TransactionRecord:
    return TransactionRecord(**doc)


def config_to_dict(config: TaskConfig) -> dict:
    return {
        "session_duration_s": config.session_duration_s,
        "kss_min_gap_s": config.kss_min_gap_s,
        "kss_max_gap_s": config.kss_max_gap_s,
        "error_probability": config.error_probability,
        "credentials": {
            "username": config.credentials.username,
            "password": config.credentials.password,
        },
        "rng_seed": config.rng_seed,
    }


def config_from_dict(doc: dict) -> TaskConfig:
    credentials = doc.get("credentials", {})
    defaults = TaskConfig()
    return TaskConfig(
        session_duration_s=doc.get("session_duration_s", defaults.session_duration_s),
        kss_min_gap_s=doc.get("kss_min_gap_s", defaults.kss_min_gap_s),
        kss_max_gap_s=doc.get("kss_max_gap_s", defaults.kss_max_gap_s),
        error_probability=doc.get("error_probability", defaults.error_probability),
        credentials=Credentials(
            username=credentials.get("username", defaults.credentials.username),
            password=credentials.get("password", defaults.credentials.password),
        ),
        rng_seed=doc.get("rng_seed", defaults.rng_seed),
    )
