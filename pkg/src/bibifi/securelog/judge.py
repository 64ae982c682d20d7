"""Privacy and integrity adjudication for the gallery-log problem.

Privacy: the breaker saw only a challenge log (no token, no transcript) and
claims to know what a query would print.  We run the target's own logread
with the real token; a matching answer means the log leaked its contents.

Integrity: the breaker saw the transcript and submits a corrupted log plus a
query.  If the target's logread answers the corrupted log without raising an
error, and the answer differs from the true one (folded from the transcript),
the breaker changed history undetected.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from tempfile import TemporaryDirectory

from ..targets import Target, normalize_output, run_target
from . import cli
from .challenges import parse_append_argv
from .state import InvalidEvent, LogEvent

CONFIRMED = "confirmed"
REJECTED = "rejected"
CRASH = "crash"


@dataclass(frozen=True)
class SecurityVerdict:
    verdict: str  # confirmed | rejected | crash
    detail: str = ""


def _run_logread(
    target: Target, token: str, query: list[str], log_bytes: bytes, timeout: float
):
    with TemporaryDirectory(prefix="sl-judge-") as tmp:
        path = Path(tmp) / "logfile"
        path.write_bytes(log_bytes)
        return run_target(
            [target.binary("logread"), "-K", token, *query, str(path)],
            timeout=timeout,
        )


def judge_privacy(
    target: Target,
    log: bytes,
    token: str,
    claimed_output: str,
    query: list[str],
    timeout: float = 10.0,
) -> SecurityVerdict:
    """Confirmed iff the target's true answer equals the breaker's claim."""
    try:
        cli.parse_query(query)
    except cli.ArgError as exc:
        return SecurityVerdict(REJECTED, f"malformed query: {exc}")
    result = _run_logread(target, token, query, log, timeout)
    if result.crashed:
        return SecurityVerdict(CRASH, f"target died with signal {result.signal}")
    if result.exit_code != 0:
        return SecurityVerdict(REJECTED, "target errored on its own log")
    if normalize_output(result.stdout) == normalize_output(claimed_output):
        return SecurityVerdict(CONFIRMED, "claimed output matches hidden state")
    return SecurityVerdict(REJECTED, "claimed output does not match")


def judge_integrity(
    target: Target,
    log: bytes,
    corrupted_log: bytes,
    token: str,
    query: list[str],
    transcript: list[list[str]],
    timeout: float = 10.0,
) -> SecurityVerdict:
    """Confirmed iff the target accepts the corrupted log and answers wrong."""
    try:
        mode, persons = cli.parse_query(query)
        events = [parse_append_argv(argv) for argv in transcript]
        correct = cli.answer_query(events, mode, persons)
    except (cli.ArgError, InvalidEvent, ValueError) as exc:
        return SecurityVerdict(REJECTED, f"malformed payload: {exc}")
    if corrupted_log == log:
        return SecurityVerdict(REJECTED, "corrupted log is identical to the original")
    result = _run_logread(target, token, query, corrupted_log, timeout)
    if result.crashed:
        return SecurityVerdict(CRASH, f"target died with signal {result.signal}")
    if result.exit_code != 0:
        return SecurityVerdict(REJECTED, "target detected the corruption")
    answer = normalize_output(result.stdout)
    if answer == cli.INTEGRITY_VIOLATION or answer == cli.INVALID:
        return SecurityVerdict(REJECTED, "target detected the corruption")
    if answer != normalize_output(correct):
        return SecurityVerdict(
            CONFIRMED, "corrupted log produced a different non-error answer"
        )
    return SecurityVerdict(REJECTED, "answer unchanged by the corruption")


def transcript_events(transcript: list[list[str]]) -> list[LogEvent]:
    return [parse_append_argv(argv) for argv in transcript]
