"""Score computation for the three contest phases.

Everything here is a pure function over exact rationals: ship scores from
test outcomes, resilience deductions from unique defects, and break points
split among the teams that found each defect.  Rendering to two decimals
happens only at serialization time (`render_points`); the arithmetic itself
never rounds, so the per-defect splits always sum exactly to the defect's
value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

PROBLEM_IDS = ("securelog", "atm", "ehr")

CATEGORIES = ("correctness", "crash", "privacy", "integrity", "availability")
SECURITY_CATEGORIES = ("privacy", "integrity", "availability")

# severity of a defect group, ordered cheapest deduction first
SEVERITIES = ("correctness", "crash", "security")


class ScoringError(ValueError):
    """Raised for inputs that violate the scoring contracts."""


@dataclass(frozen=True)
class ScoringParams:
    """Contest-wide scoring constants.

    `multiplier` is the value of one mandatory correctness test; all other
    point values are derived from it.
    """

    multiplier: int = 50
    problem: str = "securelog"

    def __post_init__(self) -> None:
        if self.multiplier <= 0:
            raise ScoringError("multiplier must be positive")
        if self.problem not in PROBLEM_IDS:
            raise ScoringError(f"unknown problem {self.problem!r}")


@dataclass(frozen=True)
class CorrectnessOutcome:
    test_id: str
    kind: str  # "mandatory" | "optional"
    passed: bool

    def __post_init__(self) -> None:
        if self.kind not in ("mandatory", "optional"):
            raise ScoringError(f"bad correctness kind {self.kind!r}")


@dataclass(frozen=True)
class PerformanceOutcome:
    """One performance measurement; lower is better."""

    test_id: str
    measure: Fraction
    unit: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "measure", Fraction(self.measure))
        if self.measure < 0:
            raise ScoringError("performance measure must be nonnegative")


@dataclass(frozen=True)
class BugReport:
    report_id: str
    breaker_team: str
    target_team: str
    category: str
    accepted: bool
    evidence_ref: str = ""

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ScoringError(f"bad bug category {self.category!r}")


@dataclass(frozen=True)
class DefectGroup:
    """The deduplication unit: accepted reports unified by one approved fix.

    `penalty` is derived from the worst member category so a broad fix can
    never launder a security report into a cheaper deduction.
    """

    group_id: str
    target_team: str
    report_ids: frozenset[str]
    severity: str
    penalty: Fraction

    def __post_init__(self) -> None:
        if not self.report_ids:
            raise ScoringError("defect group must contain at least one report")
        if self.severity not in SEVERITIES:
            raise ScoringError(f"bad severity {self.severity!r}")


@dataclass
class ScoreLedger:
    """Per-team score snapshot, recomputable from its inputs."""

    team_id: str
    ship: Fraction = Fraction(0)
    resilience: Fraction = Fraction(0)
    break_score: Fraction = Fraction(0)
    detail: list[str] = field(default_factory=list)

    @property
    def total(self) -> Fraction:
        return self.ship + self.resilience + self.break_score


def severity_of(categories: Iterable[str]) -> str:
    """Worst severity across a group's member categories."""
    worst = "correctness"
    for cat in categories:
        if cat in SECURITY_CATEGORIES:
            return "security"
        if cat == "crash":
            worst = "crash"
        elif cat != "correctness":
            raise ScoringError(f"bad bug category {cat!r}")
    return worst


def severity_penalty(severity: str, multiplier: int) -> Fraction:
    if severity == "correctness":
        return Fraction(multiplier, 2)
    if severity == "crash":
        return Fraction(multiplier)
    if severity == "security":
        return Fraction(2 * multiplier)
    raise ScoringError(f"bad severity {severity!r}")


def performance_points(
    measure: Fraction | int,
    best: Fraction | int,
    worst: Fraction | int,
    multiplier: int,
) -> Fraction:
    """Value of one performance test: full marks at `best`, zero at `worst`.

    The caller clamps the measure into [best, worst] first; a uniform field
    (worst == best) earns full marks.
    """
    v, best, worst = Fraction(measure), Fraction(best), Fraction(worst)
    if v < 0 or best < 0 or worst < 0:
        raise ScoringError("performance inputs must be nonnegative")
    if best > worst:
        raise ScoringError("best must not exceed worst")
    if not best <= v <= worst:
        raise ScoringError("measure must be clamped into [best, worst]")
    if worst == best:
        return Fraction(multiplier)
    return multiplier * (worst - v) / (worst - best)


def compute_ship_score(
    correctness: Sequence[CorrectnessOutcome],
    perf: Sequence[tuple[PerformanceOutcome, Fraction | int, Fraction | int]],
    params: ScoringParams,
) -> Fraction:
    """Build-phase score: passed correctness tests plus performance value.

    `perf` entries carry the contest-wide best/worst measure for their test.
    """
    seen: set[str] = set()
    for out in correctness:
        if out.test_id in seen:
            raise ScoringError(f"duplicate test id {out.test_id!r}")
        seen.add(out.test_id)
    total = Fraction(0)
    for out in correctness:
        if not out.passed:
            continue
        if out.kind == "mandatory":
            total += Fraction(params.multiplier)
        else:
            total += Fraction(params.multiplier, 2)
    for out, best, worst in perf:
        if out.test_id in seen:
            raise ScoringError(f"duplicate test id {out.test_id!r}")
        seen.add(out.test_id)
        v = min(max(out.measure, Fraction(best)), Fraction(worst))
        total += performance_points(v, best, worst, params.multiplier)
    return total


@dataclass(frozen=True)
class FixCoverage:
    """The slice of a fix that scoring needs: which reports one approved
    fix unified.  Pending or rejected fixes never reach this type."""

    fix_id: str
    target_team: str
    covered_report_ids: frozenset[str]


def unify_defects(
    reports: Sequence[BugReport],
    fixes: Sequence[FixCoverage],
    params: ScoringParams,
) -> list[DefectGroup]:
    """Partition the accepted reports into defect groups.

    Each approved fix yields one group over the accepted reports it covers;
    every accepted report not covered by any fix stays a singleton.  A report
    claimed by two fixes is a consistency error (the second approval should
    have been rejected upstream).
    """
    accepted = {r.report_id: r for r in reports if r.accepted}
    claimed: dict[str, str] = {}
    groups: list[DefectGroup] = []
    for fix in fixes:
        members = []
        for rid in sorted(fix.covered_report_ids):
            if rid not in accepted:
                continue
            if rid in claimed:
                raise ScoringError(
                    f"report {rid!r} covered by fixes {claimed[rid]!r} and {fix.fix_id!r}"
                )
            if accepted[rid].target_team != fix.target_team:
                raise ScoringError(
                    f"fix {fix.fix_id!r} covers report {rid!r} against another team"
                )
            claimed[rid] = fix.fix_id
            members.append(accepted[rid])
        if not members:
            continue
        severity = severity_of(r.category for r in members)
        groups.append(
            DefectGroup(
                group_id=f"fix:{fix.fix_id}",
                target_team=fix.target_team,
                report_ids=frozenset(r.report_id for r in members),
                severity=severity,
                penalty=severity_penalty(severity, params.multiplier),
            )
        )
    for rid in sorted(accepted):
        if rid in claimed:
            continue
        report = accepted[rid]
        severity = severity_of([report.category])
        groups.append(
            DefectGroup(
                group_id=f"report:{rid}",
                target_team=report.target_team,
                report_ids=frozenset([rid]),
                severity=severity,
                penalty=severity_penalty(severity, params.multiplier),
            )
        )
    return groups


def singleton_groups(
    reports: Sequence[BugReport], params: ScoringParams
) -> list[DefectGroup]:
    """Pre-fix view: every accepted report is its own defect."""
    return unify_defects(reports, [], params)


def compute_resilience(groups: Sequence[DefectGroup]) -> Fraction:
    """Non-positive deduction: minus the summed penalty of unique defects."""
    teams = {g.target_team for g in groups}
    if len(teams) > 1:
        raise ScoringError("resilience is computed per target team")
    return -sum((g.penalty for g in groups), Fraction(0))


def compute_break_scores(
    groups: Sequence[DefectGroup],
    reports: Sequence[BugReport],
) -> dict[str, Fraction]:
    """Split each group's penalty equally among the teams that found it.

    Duplicate reports by one team within a group earn nothing extra; the
    shares for one group always sum exactly to the group's penalty.
    """
    by_id = {r.report_id: r for r in reports}
    scores: dict[str, Fraction] = {}
    for group in groups:
        finders = sorted({by_id[rid].breaker_team for rid in group.report_ids})
        share = group.penalty / len(finders)
        for team in finders:
            scores[team] = scores.get(team, Fraction(0)) + share
    return scores


# Per-target report budgets.  The log and wire-protocol problems expose at
# most one exploitable privacy and one integrity condition each, so those
# categories are additionally capped at one accepted report apiece.
SUBMISSION_LIMITS: Mapping[str, dict] = {
    "securelog": {"total": 10, "per_category": {"privacy": 1, "integrity": 1}},
    "atm": {"total": 10, "per_category": {"privacy": 1, "integrity": 1}},
    "ehr": {"total": 5, "per_category": {}},
}


@dataclass(frozen=True)
class LimitDecision:
    allowed: bool
    reason: str = ""


def enforce_submission_limits(
    problem: str,
    prior: Sequence[BugReport],
    new: BugReport,
) -> LimitDecision:
    """Check one more report from this breaker against this target.

    `prior` holds the breaker's previously *accepted* reports against the
    same target; rejected reports never count against a budget.
    """
    if problem not in SUBMISSION_LIMITS:
        raise ScoringError(f"unknown problem {problem!r}")
    limits = SUBMISSION_LIMITS[problem]
    counted = [r for r in prior if r.accepted]
    if len(counted) >= limits["total"]:
        return LimitDecision(
            False, f"per-target report cap ({limits['total']}) reached"
        )
    cap = limits["per_category"].get(new.category)
    if cap is not None:
        same = sum(1 for r in counted if r.category == new.category)
        if same >= cap:
            return LimitDecision(
                False, f"per-category cap ({cap} {new.category}) reached"
            )
    return LimitDecision(True)


def render_points(value: Fraction) -> str:
    """Display form: two decimals, rounding half away from zero."""
    num = Decimal(value.numerator) / Decimal(value.denominator)
    return str(num.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
