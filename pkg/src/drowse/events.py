"""Domain types and the canonical on-disk session-log format.

Every telemetry occurrence is one immutable event value carrying an integer
millisecond timestamp relative to session start.  A session log is one header
record followed by one canonically encoded event per line (UTF-8 text,
``.session.jsonl``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Iterable, Iterator, Union


class MalformedLine(ValueError):
    """Line is not a well-formed event record."""


class UnknownType(ValueError):
    """Record has an unrecognized "type" discriminator."""


class DomainViolation(ValueError):
    """Record is well-formed but violates a field's domain (e.g. KSS score 12)."""


# Keys counted as the "delete button" downstream.  Physical keyboards conflate
# Backspace and Delete in practice, so both count.
DELETE_KEYS = frozenset({"Backspace", "Delete"})

# Karolinska sleepiness scale: the five anchor descriptions (levels 2,4,6,8
# are unlabeled intermediate steps).
KSS_DESCRIPTIONS = {
    1: "Extremely alert",
    3: "Alert, normal level",
    5: "Neither alert nor sleepy",
    7: "Sleepy, but no effort to keep alert",
    9: "Very sleepy, great effort to keep alert, fighting sleep",
}

CONFIRM = "confirm"
REPORT = "report"

AMOUNT_MISMATCH = "amount_mismatch"
ACCOUNT_MISMATCH = "account_mismatch"


def _check_t(t: object) -> None:
    if not isinstance(t, int) or isinstance(t, bool):
        raise DomainViolation(f"timestamp must be an integer, got {t!r}")
    if t < 0:
        raise DomainViolation(f"timestamp must be >= 0, got {t}")


def _check_str(value: object, name: str) -> None:
    if not isinstance(value, str) or not value:
        raise DomainViolation(f"{name} must be a non-empty string, got {value!r}")


def _check_num(value: object, name: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainViolation(f"{name} must be a number, got {value!r}")
    if value != value or value in (float("inf"), float("-inf")):
        raise DomainViolation(f"{name} must be finite, got {value!r}")


def _check_int_range(value: object, name: str, lo: int, hi: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DomainViolation(f"{name} must be an integer, got {value!r}")
    if not lo <= value <= hi:
        raise DomainViolation(f"{name} must be in {lo}..{hi}, got {value}")


@dataclass(frozen=True)
class KeyDown:
    t: int
    key: str

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.key, "key")


@dataclass(frozen=True)
class KeyUp:
    t: int
    key: str

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.key, "key")


@dataclass(frozen=True)
class MouseMove:
    t: int
    x: float
    y: float

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_num(self.x, "x")
        _check_num(self.y, "y")


@dataclass(frozen=True)
class MouseDown:
    t: int
    button: str
    x: float
    y: float

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.button, "button")
        _check_num(self.x, "x")
        _check_num(self.y, "y")


@dataclass(frozen=True)
class MouseUp:
    t: int
    button: str
    x: float
    y: float

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.button, "button")
        _check_num(self.x, "x")
        _check_num(self.y, "y")


@dataclass(frozen=True)
class KssPromptShown:
    t: int

    def __post_init__(self) -> None:
        _check_t(self.t)


@dataclass(frozen=True)
class KssAnswered:
    t: int
    score: int

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_int_range(self.score, "score", 1, 9)


@dataclass(frozen=True)
class TransactionOpened:
    t: int
    tx_id: str

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.tx_id, "tx_id")


@dataclass(frozen=True)
class DecisionMade:
    t: int
    tx_id: str
    decision: str

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.tx_id, "tx_id")
        if self.decision not in (CONFIRM, REPORT):
            raise DomainViolation(f"decision must be confirm|report, got {self.decision!r}")


@dataclass(frozen=True)
class ConfidenceRated:
    t: int
    tx_id: str
    rating: int

    def __post_init__(self) -> None:
        _check_t(self.t)
        _check_str(self.tx_id, "tx_id")
        _check_int_range(self.rating, "rating", 1, 10)


@dataclass(frozen=True)
class CredentialResult:
    t: int
    ok: bool

    def __post_init__(self) -> None:
        _check_t(self.t)
        if not isinstance(self.ok, bool):
            raise DomainViolation(f"ok must be a boolean, got {self.ok!r}")


@dataclass(frozen=True)
class TelemetryDropped:
    """Client-side buffer overflow marker: `dropped` MouseMove events were shed."""

    t: int
    dropped: int

    def __post_init__(self) -> None:
        _check_t(self.t)
        if not isinstance(self.dropped, int) or isinstance(self.dropped, bool) or self.dropped < 1:
            raise DomainViolation(f"dropped must be a positive integer, got {self.dropped!r}")


InputEvent = Union[
    KeyDown,
    KeyUp,
    MouseMove,
    MouseDown,
    MouseUp,
    KssPromptShown,
    KssAnswered,
    TransactionOpened,
    DecisionMade,
    ConfidenceRated,
    CredentialResult,
    TelemetryDropped,
]

_EVENT_TYPES: dict[str, type] = {
    "key_down": KeyDown,
    "key_up": KeyUp,
    "mouse_move": MouseMove,
    "mouse_down": MouseDown,
    "mouse_up": MouseUp,
    "kss_prompt_shown": KssPromptShown,
    "kss_answered": KssAnswered,
    "transaction_opened": TransactionOpened,
    "decision_made": DecisionMade,
    "confidence_rated": ConfidenceRated,
    "credential_result": CredentialResult,
    "telemetry_dropped": TelemetryDropped,
}

_TYPE_NAMES: dict[type, str] = {
    KeyDown: "key_down",
    KeyUp: "key_up",
    MouseMove: "mouse_move",
    MouseDown: "mouse_down",
    MouseUp: "mouse_up",
    KssPromptShown: "kss_prompt_shown",
    KssAnswered: "kss_answered",
    TransactionOpened: "transaction_opened",
    DecisionMade: "decision_made",
    ConfidenceRated: "confidence_rated",
    CredentialResult: "credential_result",
    TelemetryDropped: "telemetry_dropped",
}


def _canonical_number(value: float) -> object:
    # Integral floats encode without a decimal point so that e.g. x=3.0 and
    # x=3 produce identical bytes.
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def encode_event(event: InputEvent) -> str:
    """Serialize one event to its canonical single-line text form.

    Key order is fixed ("t", "type", then payload fields in declared order),
    so encoding is byte-deterministic and ``decode_event`` inverts it exactly.
    """
    type_name = _TYPE_NAMES.get(type(event))
    if type_name is None:
        raise UnknownType(f"not an InputEvent: {type(event).__name__}")
    record: dict[str, object] = {"t": event.t, "type": type_name}
    for field in fields(event):
        if field.name == "t":
            continue
        value = getattr(event, field.name)
        if isinstance(value, float):
            value = _canonical_number(value)
        record[field.name] = value
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


def decode_event(line: str) -> InputEvent:
    """Parse one canonical log line back into an event value."""
    try:
        record = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedLine(f"bad event syntax: {exc}") from exc
    return event_from_record(record)


def event_from_record(record: object) -> InputEvent:
    """Build an event from an already-parsed JSON object."""
    if not isinstance(record, dict):
        raise MalformedLine(f"event record must be an object, got {type(record).__name__}")
    record = dict(record)
    type_name = record.pop("type", None)
    if type_name is None:
        raise MalformedLine("event record missing 'type'")
    cls = _EVENT_TYPES.get(type_name)
    if cls is None:
        raise UnknownType(f"unrecognized event type {type_name!r}")
    expected = {f.name for f in fields(cls)}
    got = set(record)
    if got != expected:
        missing = expected - got
        extra = got - expected
        raise MalformedLine(
            f"{type_name}: wrong fields (missing {sorted(missing)}, unexpected {sorted(extra)})"
        )
    return cls(**record)  # __post_init__ raises DomainViolation on bad domains


@dataclass(frozen=True)
class TransactionRecord:
    """One synthetic accounting transaction with an optional planted error.

    Currency amounts are integer minor units (cents/satang) so mismatch
    checks are exact.
    """

    tx_id: str
    payment_method: str
    bank_name: str
    account_listed: str
    account_verification: str
    payer_name: str
    amount_due: int
    amount_transferred: int
    injected_error: str | None = None  # None | AMOUNT_MISMATCH | ACCOUNT_MISMATCH

    def __post_init__(self) -> None:
        if self.injected_error not in (None, AMOUNT_MISMATCH, ACCOUNT_MISMATCH):
            raise DomainViolation(f"bad injected_error {self.injected_error!r}")
        amounts_match = self.amount_due == self.amount_transferred
        accounts_match = self.account_listed == self.account_verification
        if self.injected_error is None:
            if not (amounts_match and accounts_match):
                raise DomainViolation("clean transaction must have matching pairs")
        elif self.injected_error == AMOUNT_MISMATCH:
            if amounts_match or not accounts_match:
                raise DomainViolation("amount_mismatch must mismatch exactly the amount pair")
        else:
            if accounts_match or not amounts_match:
                raise DomainViolation("account_mismatch must mismatch exactly the account pair")


@dataclass(frozen=True)
class SessionLog:
    """Ordered event stream plus metadata for one subject's run."""

    session_id: str
    subject_id: str
    started_at: str  # wall-clock ISO-8601; timestamps inside events are relative
    events: tuple[InputEvent, ...]
    config_snapshot: "object | None" = None  # taskload.TaskConfig when hosted


@dataclass(frozen=True)
class Violation:
    index: int  # event index the violation is detected at (-1 for log-level)
    rule: str
    message: str


ORDER_VIOLATION = "order"
PROMPT_PAIRING_VIOLATION = "prompt_pairing"
NEGATIVE_TIMESTAMP = "negative_timestamp"


def validate_session(events: Iterable[InputEvent]) -> list[Violation]:
    """Check stream-level invariants; an empty list means the log is valid.

    Violations are values, not failures: timestamps must be non-negative and
    non-decreasing, and every KssAnswered must consume a pending
    KssPromptShown.
    """
    violations: list[Violation] = []
    last_t: int | None = None
    prompt_pending = False
    for index, event in enumerate(events):
        if event.t < 0:
            violations.append(
                Violation(index, NEGATIVE_TIMESTAMP, f"timestamp {event.t} < 0")
            )
        if last_t is not None and event.t < last_t:
            violations.append(
                Violation(index, ORDER_VIOLATION, f"timestamp {event.t} after {last_t}")
            )
        last_t = event.t
        if isinstance(event, KssPromptShown):
            prompt_pending = True
        elif isinstance(event, KssAnswered):
            if not prompt_pending:
                violations.append(
                    Violation(
                        index,
                        PROMPT_PAIRING_VIOLATION,
                        "KssAnswered without a pending KssPromptShown",
                    )
                )
            prompt_pending = False
    return violations


SESSION_FILE_SUFFIX = ".session.jsonl"
_HEADER_TYPE = "session"


def encode_header(session_id: str, subject_id: str, started_at: str) -> str:
    return json.dumps(
        {
            "type": _HEADER_TYPE,
            "session_id": session_id,
            "subject_id": subject_id,
            "started_at": started_at,
        },
        separators=(",", ":"),
        ensure_ascii=False,
    )


def decode_header(line: str) -> dict[str, str]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLine(f"bad header syntax: {exc}") from exc
    if not isinstance(record, dict) or record.get("type") != _HEADER_TYPE:
        raise MalformedLine("first line must be the session header record")
    for key in ("session_id", "subject_id", "started_at"):
        if not isinstance(record.get(key), str):
            raise MalformedLine(f"header missing string field {key!r}")
    return record


def write_session_file(path: str, log: SessionLog) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(encode_header(log.session_id, log.subject_id, log.started_at) + "\n")
        for event in log.events:
            fh.write(encode_event(event) + "\n")


def read_session_file(path: str) -> SessionLog:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            raise MalformedLine(f"{path}: empty session file")
        header = decode_header(header_line.rstrip("\n"))
        events = tuple(_decode_lines(fh))
    return SessionLog(
        session_id=header["session_id"],
        subject_id=header["subject_id"],
        started_at=header["started_at"],
        events=events,
    )


def _decode_lines(lines: Iterable[str]) -> Iterator[InputEvent]:
    for lineno, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n")
        if not line:
            continue
        try:
            yield decode_event(line)
        except ValueError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from exc
