"""Automatic bug-report adjudication.

A break only scores if the infrastructure can reproduce it: correctness
tests must pass on the reference implementation and fail on the target,
crashes must be genuine signal deaths, and security claims go through the
problem-specific judges.  The confirmed category is always the judge's, not
the breaker's claim.
"""

from __future__ import annotations

import base64
import binascii
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import TemporaryDirectory

from ..atm import harness as atm_harness
from ..ehr import judge as ehr_judge
from ..scoring import BugReport, enforce_submission_limits
from ..securelog import judge as securelog_judge
from ..securelog.challenges import ChallengeLog
from ..targets import Target, normalize_output, run_target

ACCEPTED = "accepted"
REJECTED = "rejected"
DISALLOWED = "disallowed"
VOIDED = "voided"
ORACLE_BUG = "oracle-bug"


@dataclass(frozen=True)
class BreakSubmission:
    breaker_team: str
    target_team: str
    problem: str
    category_claim: str
    payload: dict
    report_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])


@dataclass
class JudgeContext:
    """Everything adjudication needs besides the submission itself."""

    oracles: dict[str, Target]
    challenges: dict[str, list[ChallengeLog]] = field(default_factory=dict)
    atm_timeout: float = 10.0
    session_seconds: float = 60.0
    command_timeout: float = 10.0


@dataclass(frozen=True)
class AdjudicationResult:
    status: str  # accepted | rejected | disallowed | voided | oracle-bug
    category: str | None = None
    reason: str = ""

    def to_bug_report(self, submission: BreakSubmission) -> BugReport:
        return BugReport(
            report_id=submission.report_id,
            breaker_team=submission.breaker_team,
            target_team=submission.target_team,
            category=self.category or submission.category_claim,
            accepted=self.status == ACCEPTED,
            evidence_ref=self.reason,
        )


# -- scripted command payloads (securelog and atm) ------------------------


def _run_script(target: Target, problem: str, commands: list[dict], timeout: float):
    """Run a breaker's command script; returns (outcomes, crash_signal)."""
    outcomes = []
    with TemporaryDirectory(prefix="break-") as tmp:
        workdir = Path(tmp)
        if problem == "atm":
            auth = workdir / "bank.auth"
            with atm_harness.BankProcess(target.binary("bank"), auth, timeout) as bank:
                runner = atm_harness.AtmRunner(
                    target.binary("atm"), auth, workdir, bank.port, timeout
                )
                for command in commands:
                    args = [str(a) for a in command.get("args", [])]
                    if atm_harness.FORBIDDEN_ATM_FLAGS & set(args):
                        raise ValueError("script may not override harness flags")
                    exit_code, output, timed_out = runner.run(args)
                    if timed_out:
                        return outcomes, None, True
                    outcomes.append((exit_code, normalize_output(output)))
                    if exit_code < 0:
                        return outcomes, -exit_code, False
            return outcomes, None, False
        for command in commands:
            binary = command.get("binary", "")
            if binary not in ("logappend", "logread"):
                raise ValueError(f"bad binary {binary!r}")
            args = [
                str(workdir / "logfile") if a == "LOGFILE" else str(a)
                for a in command.get("args", [])
            ]
            result = run_target([target.binary(binary), *args], timeout=timeout)
            if result.timed_out:
                return outcomes, None, True
            outcomes.append((result.exit_code, normalize_output(result.stdout)))
            if result.crashed:
                return outcomes, result.signal, False
    return outcomes, None, False


def _script_matches(commands: list[dict], outcomes: list) -> bool:
    if len(outcomes) < len(commands):
        return False
    for command, (exit_code, output) in zip(commands, outcomes):
        expected_exit = command.get("expected_exit", 0)
        if expected_exit is not None and exit_code != expected_exit:
            return False
        expected_output = command.get("expected_output")
        if expected_output is not None and output != normalize_output(expected_output):
            return False
    return True


def adjudicate_correctness(
    target: Target,
    oracle: Target,
    problem: str,
    commands: list[dict],
    timeout: float = 10.0,
) -> AdjudicationResult:
    """Accepted iff the script passes on the oracle but not on the target."""
    try:
        oracle_outcomes, oracle_signal, oracle_hang = _run_script(
            oracle, problem, commands, timeout
        )
    except (ValueError, OSError) as exc:
        return AdjudicationResult(REJECTED, reason=f"malformed script: {exc}")
    if oracle_hang or oracle_signal is not None or not _script_matches(
        commands, oracle_outcomes
    ):
        return AdjudicationResult(
            ORACLE_BUG, reason="script does not pass on the reference implementation"
        )
    try:
        target_outcomes, target_signal, target_hang = _run_script(
            target, problem, commands, timeout
        )
    except (ValueError, OSError) as exc:
        return AdjudicationResult(REJECTED, reason=f"target run failed: {exc}")
    if target_signal is not None:
        return AdjudicationResult(
            ACCEPTED, "crash", f"target died with signal {target_signal}"
        )
    if target_hang:
        return AdjudicationResult(ACCEPTED, "correctness", "target hung on the script")
    if target_outcomes != oracle_outcomes:
        return AdjudicationResult(
            ACCEPTED, "correctness", "target output differs from the reference"
        )
    return AdjudicationResult(REJECTED, reason="target matches the reference")


def adjudicate_crash(
    target: Target,
    problem: str,
    commands: list[dict],
    timeout: float = 10.0,
) -> AdjudicationResult:
    """Accepted iff the target dies by signal; clean nonzero exits do not count."""
    try:
        _, signal, hang = _run_script(target, problem, commands, timeout)
    except (ValueError, OSError) as exc:
        return AdjudicationResult(REJECTED, reason=f"malformed script: {exc}")
    if signal is not None:
        return AdjudicationResult(ACCEPTED, "crash", f"signal {signal}")
    return AdjudicationResult(REJECTED, reason="no abnormal termination")


# -- problem-specific security dispatch -----------------------------------


def _adjudicate_securelog_security(
    submission: BreakSubmission, target: Target, ctx: JudgeContext
) -> AdjudicationResult:
    payload = submission.payload
    challenges = {
        c.challenge_id: c for c in ctx.challenges.get(submission.target_team, [])
    }
    challenge = challenges.get(str(payload.get("challenge_id")))
    if challenge is None:
        return AdjudicationResult(REJECTED, reason="unknown challenge")
    query = [str(a) for a in payload.get("query", [])]
    if submission.category_claim == "privacy":
        if challenge.transcript_revealed:
            return AdjudicationResult(
                REJECTED, reason="challenge transcript was published"
            )
        verdict = securelog_judge.judge_privacy(
            target,
            challenge.log,
            challenge.token,
            str(payload.get("claimed_output", "")),
            query,
            ctx.command_timeout,
        )
    else:
        if not challenge.transcript_revealed:
            return AdjudicationResult(REJECTED, reason="transcript is hidden")
        try:
            corrupted = base64.b64decode(str(payload.get("corrupted_log", "")))
        except (ValueError, binascii.Error):
            return AdjudicationResult(REJECTED, reason="bad corrupted log encoding")
        verdict = securelog_judge.judge_integrity(
            target,
            challenge.log,
            corrupted,
            challenge.token,
            query,
            challenge.transcript,
            ctx.command_timeout,
        )
    if verdict.verdict == securelog_judge.CONFIRMED:
        return AdjudicationResult(ACCEPTED, submission.category_claim, verdict.detail)
    if verdict.verdict == securelog_judge.CRASH:
        return AdjudicationResult(ACCEPTED, "crash", verdict.detail)
    return AdjudicationResult(REJECTED, reason=verdict.detail)


def _adjudicate_atm_security(
    submission: BreakSubmission, target: Target, ctx: JudgeContext
) -> AdjudicationResult:
    source = submission.payload.get("mitm_source")
    if not isinstance(source, str) or not source:
        return AdjudicationResult(REJECTED, reason="payload carries no MITM program")
    with TemporaryDirectory(prefix="mitm-prog-") as tmp:
        program = Path(tmp) / "mitm.py"
        program.write_text(source)
        program.chmod(0o755)
        if submission.category_claim == "integrity":
            verdict = atm_harness.judge_integrity_mitm(
                target,
                ctx.oracles["atm"],
                program,
                atm_timeout=ctx.atm_timeout,
                session_seconds=ctx.session_seconds,
            )
        else:
            verdict = atm_harness.judge_privacy_mitm(
                target,
                program,
                atm_timeout=ctx.atm_timeout,
                session_seconds=ctx.session_seconds,
            )
    status = {
        atm_harness.CONFIRMED: ACCEPTED,
        atm_harness.REJECTED: REJECTED,
        atm_harness.DISALLOWED: DISALLOWED,
        atm_harness.VOIDED: VOIDED,
    }[verdict.verdict]
    category = submission.category_claim if status == ACCEPTED else None
    return AdjudicationResult(status, category, verdict.detail)


def _adjudicate_ehr_security(
    submission: BreakSubmission, target: Target, ctx: JudgeContext
) -> AdjudicationResult:
    programs = submission.payload.get("programs")
    if not isinstance(programs, list) or not all(
        isinstance(p, str) for p in programs
    ):
        return AdjudicationResult(REJECTED, reason="payload carries no programs")
    admin_password = uuid.uuid4().hex[:16]
    programs = [p.replace("%ADMIN%", admin_password) for p in programs]
    try:
        verdict = ehr_judge.adjudicate_security(
            target, programs, admin_password, ctx.command_timeout
        )
    except OSError as exc:
        return AdjudicationResult(REJECTED, reason=f"target server failed: {exc}")
    if verdict.verdict == ehr_judge.CONFIRMED:
        return AdjudicationResult(ACCEPTED, verdict.category, verdict.detail)
    return AdjudicationResult(REJECTED, reason=verdict.detail)


def adjudicate(
    submission: BreakSubmission,
    target: Target,
    ctx: JudgeContext,
    prior_accepted: list[BugReport] = (),
) -> AdjudicationResult:
    """Full dispatch: run the right judge, then apply submission limits.

    Correctness and crash claims run twice; targets that answer differently
    between the runs void the submission rather than gambling on a verdict.
    """
    oracle = ctx.oracles.get(submission.problem)
    if oracle is None:
        return AdjudicationResult(REJECTED, reason="unknown problem")
    claim = submission.category_claim

    if submission.problem == "ehr" and claim in (
        "privacy", "integrity", "availability", "correctness", "crash",
    ):
        result = _adjudicate_ehr_security(submission, target, ctx)
        # correctness-class divergence from a security claim stays accepted
        # under the judge's own category
    elif claim == "correctness":
        commands = submission.payload.get("commands", [])
        first = adjudicate_correctness(
            target, oracle, submission.problem, commands, ctx.command_timeout
        )
        second = adjudicate_correctness(
            target, oracle, submission.problem, commands, ctx.command_timeout
        )
        if (first.status, first.category) != (second.status, second.category):
            return AdjudicationResult(VOIDED, reason="target is nondeterministic")
        result = first
    elif claim == "crash":
        commands = submission.payload.get("commands", [])
        first = adjudicate_crash(target, submission.problem, commands, ctx.command_timeout)
        second = adjudicate_crash(target, submission.problem, commands, ctx.command_timeout)
        if first.status != second.status:
            return AdjudicationResult(VOIDED, reason="target is nondeterministic")
        result = first
    elif submission.problem == "securelog":
        result = _adjudicate_securelog_security(submission, target, ctx)
    elif submission.problem == "atm":
        result = _adjudicate_atm_security(submission, target, ctx)
    else:
        return AdjudicationResult(REJECTED, reason=f"unjudgeable claim {claim!r}")

    if result.status != ACCEPTED:
        return result
    candidate = result.to_bug_report(submission)
    decision = enforce_submission_limits(
        submission.problem, list(prior_accepted), candidate
    )
    if not decision.allowed:
        return AdjudicationResult(REJECTED, reason=f"limit: {decision.reason}")
    return result
