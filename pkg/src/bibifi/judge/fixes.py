"""Fix validation: mechanical prechecks, then a human atomicity ruling.

A fix bundle replaces the team's submission.  Before any judge looks at it,
the machine checks that it still builds, still passes every mandatory test,
and actually defends against every bug report it claims to cover.  Only
then does the human decide whether it fixes one conceptual flaw; approval
re-groups the covered reports into a single defect for scoring.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from ..fixtures.bundles import BundleError, build_bundle
from ..runner.evaluate import evaluate_submission
from ..runner.isolation import IsolationProvider
from ..runner.problems import problem_descriptor
from .adjudicate import (
    ACCEPTED,
    BreakSubmission,
    JudgeContext,
    adjudicate,
)

PENDING = "pending"
APPROVED = "approved"
REJECTED = "rejected"


@dataclass
class Fix:
    fix_id: str
    builder_team: str
    problem: str
    bundle: Path
    covered_report_ids: frozenset[str]
    judge_state: str = PENDING
    diff_ref: str = ""

    def __post_init__(self) -> None:
        if not self.covered_report_ids:
            raise ValueError("a fix must cover at least one report")


@dataclass(frozen=True)
class FixDecision:
    fix_id: str
    approved: bool
    judge: str
    rationale: str
    timestamp: float = field(default_factory=time.time)
    precheck_log: str = ""


@dataclass
class PrecheckReport:
    ok: bool
    log: list[str] = field(default_factory=list)


def precheck_fix(
    fix: Fix,
    covered: list[BreakSubmission],
    ctx: JudgeContext,
    provider: IsolationProvider,
) -> PrecheckReport:
    """The automatic gate: build, mandatory tests, and covered payloads."""
    report = PrecheckReport(ok=True)
    problem = problem_descriptor(fix.problem)
    evidence = evaluate_submission(fix.bundle, problem, provider)
    if not evidence.qualified:
        report.ok = False
        report.log.append("fix bundle does not build and pass mandatory tests")
        return report
    report.log.append("build and mandatory tests pass")
    try:
        fixed_target = build_bundle(fix.bundle)
    except BundleError as exc:
        return PrecheckReport(False, [f"fix bundle rebuild failed: {exc}"])
    for submission in covered:
        result = adjudicate(submission, fixed_target, ctx)
        if result.status == ACCEPTED:
            report.ok = False
            report.log.append(
                f"report {submission.report_id} still reproduces: {result.reason}"
            )
        else:
            report.log.append(f"report {submission.report_id} defended")
    return report


def validate_fix(
    fix: Fix,
    covered: list[BreakSubmission],
    ctx: JudgeContext,
    provider: IsolationProvider,
    judge_decision: bool | None = None,
    judge: str = "",
    rationale: str = "",
) -> FixDecision:
    """Prechecks always run; the human ruling applies only when they pass.

    With `judge_decision` omitted the fix stays pending after prechecks
    (decision recorded as not approved with an empty judge identity).
    """
    wrong_team = [s for s in covered if s.target_team != fix.builder_team]
    if wrong_team:
        fix.judge_state = REJECTED
        return FixDecision(
            fix.fix_id, False, "system", "fix covers another team's reports"
        )
    report = precheck_fix(fix, covered, ctx, provider)
    log = "\n".join(report.log)
    if not report.ok:
        fix.judge_state = REJECTED
        return FixDecision(
            fix.fix_id, False, "system", "failed mechanical prechecks", precheck_log=log
        )
    if judge_decision is None:
        fix.judge_state = PENDING
        return FixDecision(fix.fix_id, False, "", "awaiting judge", precheck_log=log)
    if not judge:
        raise ValueError("a recorded judge identity is required for a ruling")
    fix.judge_state = APPROVED if judge_decision else REJECTED
    return FixDecision(fix.fix_id, judge_decision, judge, rationale, precheck_log=log)
