"""Scoring arithmetic: frozen hand-worked values plus invariants."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bibifi.scoring import (
    BugReport,
    CorrectnessOutcome,
    FixCoverage,
    LimitDecision,
    PerformanceOutcome,
    ScoringError,
    ScoringParams,
    compute_break_scores,
    compute_resilience,
    compute_ship_score,
    enforce_submission_limits,
    performance_points,
    render_points,
    severity_of,
    singleton_groups,
    unify_defects,
)

PARAMS = ScoringParams(multiplier=50, problem="securelog")


def report(rid, breaker="b1", target="t1", category="correctness", accepted=True):
    return BugReport(rid, breaker, target, category, accepted)


class TestPerformancePoints:
    def test_best_earns_full_marks(self):
        assert performance_points(2, 2, 10, 50) == 50

    def test_worst_earns_zero(self):
        assert performance_points(10, 2, 10, 50) == 0

    def test_midpoint_hand_value(self):
        # 50 * (10 - 6) / (10 - 2) = 25
        assert performance_points(6, 2, 10, 50) == 25

    def test_uniform_field_earns_full_marks(self):
        assert performance_points(7, 7, 7, 50) == 50

    def test_exact_rational(self):
        assert performance_points(1, 0, 3, 50) == Fraction(100, 3)

    def test_negative_rejected(self):
        with pytest.raises(ScoringError):
            performance_points(-1, 0, 0, 50)

    @given(
        best=st.integers(0, 100),
        span=st.integers(1, 100),
        offset=st.fractions(0, 1),
        multiplier=st.integers(1, 500),
    )
    def test_output_in_range_and_monotone(self, best, span, offset, multiplier):
        worst = best + span
        v = best + offset * span
        points = performance_points(v, best, worst, multiplier)
        assert 0 <= points <= multiplier
        v2 = min(v + Fraction(span, 7), Fraction(worst))
        assert performance_points(v2, best, worst, multiplier) <= points


class TestShipScore:
    def test_hand_worked_scenario(self):
        correctness = [
            CorrectnessOutcome("m1", "mandatory", True),
            CorrectnessOutcome("m2", "mandatory", True),
            CorrectnessOutcome("o1", "optional", True),
        ]
        perf = [(PerformanceOutcome("p1", Fraction(6)), 2, 10)]
        assert compute_ship_score(correctness, perf, PARAMS) == 150

    def test_all_failed_scores_zero(self):
        correctness = [
            CorrectnessOutcome("m1", "mandatory", False),
            CorrectnessOutcome("o1", "optional", False),
        ]
        assert compute_ship_score(correctness, [], PARAMS) == 0

    def test_single_mandatory(self):
        assert (
            compute_ship_score([CorrectnessOutcome("m1", "mandatory", True)], [], PARAMS)
            == 50
        )

    def test_duplicate_test_ids_rejected(self):
        correctness = [
            CorrectnessOutcome("m1", "mandatory", True),
            CorrectnessOutcome("m1", "mandatory", True),
        ]
        with pytest.raises(ScoringError):
            compute_ship_score(correctness, [], PARAMS)

    def test_measure_clamped_into_range(self):
        perf = [(PerformanceOutcome("p1", Fraction(99)), 2, 10)]
        assert compute_ship_score([], perf, PARAMS) == 0


class TestUnifyDefects:
    def test_one_fix_covering_three_reports(self):
        reports = [report(f"r{i}") for i in range(3)]
        fixes = [FixCoverage("f1", "t1", frozenset(["r0", "r1", "r2"]))]
        groups = unify_defects(reports, fixes, PARAMS)
        assert len(groups) == 1
        assert groups[0].report_ids == {"r0", "r1", "r2"}

    def test_no_fixes_yields_singletons(self):
        reports = [report(f"r{i}") for i in range(4)]
        groups = unify_defects(reports, [], PARAMS)
        assert len(groups) == 4
        assert all(len(g.report_ids) == 1 for g in groups)

    def test_severity_max_rule(self):
        reports = [
            report("r1", category="correctness"),
            report("r2", category="privacy"),
        ]
        fixes = [FixCoverage("f1", "t1", frozenset(["r1", "r2"]))]
        (group,) = unify_defects(reports, fixes, PARAMS)
        assert group.severity == "security"
        assert group.penalty == 100

    def test_rejected_reports_ignored(self):
        reports = [report("r1"), report("r2", accepted=False)]
        groups = unify_defects(reports, [], PARAMS)
        assert [g.report_ids for g in groups] == [frozenset(["r1"])]

    def test_double_coverage_is_error(self):
        reports = [report("r1")]
        fixes = [
            FixCoverage("f1", "t1", frozenset(["r1"])),
            FixCoverage("f2", "t1", frozenset(["r1"])),
        ]
        with pytest.raises(ScoringError):
            unify_defects(reports, fixes, PARAMS)

    @given(
        n=st.integers(0, 12),
        cover=st.sets(st.integers(0, 11)),
    )
    def test_groups_partition_accepted_reports(self, n, cover):
        reports = [report(f"r{i}") for i in range(n)]
        covered = frozenset(f"r{i}" for i in cover if i < n)
        fixes = [FixCoverage("f1", "t1", covered)] if covered else []
        groups = unify_defects(reports, fixes, PARAMS)
        seen: set[str] = set()
        for g in groups:
            assert not (seen & g.report_ids)
            seen |= g.report_ids
        assert seen == {r.report_id for r in reports}


class TestResilience:
    def test_no_groups(self):
        assert compute_resilience([]) == 0

    def test_security_group(self):
        reports = [report("r1", category="integrity")]
        assert compute_resilience(singleton_groups(reports, PARAMS)) == -100

    def test_crash_plus_correctness(self):
        reports = [report("r1", category="crash"), report("r2", category="correctness")]
        assert compute_resilience(singleton_groups(reports, PARAMS)) == -75

    @given(
        cats=st.lists(
            st.sampled_from(["correctness", "crash", "privacy", "integrity"]),
            min_size=1,
            max_size=8,
        ),
        split=st.integers(0, 8),
    )
    def test_unification_never_worsens_resilience(self, cats, split):
        reports = [report(f"r{i}", category=c) for i, c in enumerate(cats)]
        covered = frozenset(r.report_id for r in reports[: min(split, len(reports))])
        fixes = [FixCoverage("f1", "t1", covered)] if covered else []
        unified = compute_resilience(unify_defects(reports, fixes, PARAMS))
        flat = compute_resilience(singleton_groups(reports, PARAMS))
        assert unified >= flat


class TestBreakScores:
    def test_split_between_two_finders(self):
        reports = [
            report("r1", breaker="b1", category="privacy"),
            report("r2", breaker="b2", category="privacy"),
        ]
        fixes = [FixCoverage("f1", "t1", frozenset(["r1", "r2"]))]
        groups = unify_defects(reports, fixes, PARAMS)
        scores = compute_break_scores(groups, reports)
        assert scores == {"b1": 50, "b2": 50}

    def test_within_team_duplicates_earn_once(self):
        reports = [report(f"r{i}", breaker="b1", category="crash") for i in range(4)]
        fixes = [FixCoverage("f1", "t1", frozenset(r.report_id for r in reports))]
        groups = unify_defects(reports, fixes, PARAMS)
        assert compute_break_scores(groups, reports) == {"b1": 50}

    @given(
        finders=st.lists(st.sampled_from(["b1", "b2", "b3", "b4", "b5"]), min_size=1, max_size=10),
        category=st.sampled_from(["correctness", "crash", "privacy"]),
    )
    def test_awards_sum_exactly_to_penalty(self, finders, category):
        reports = [
            report(f"r{i}", breaker=b, category=category) for i, b in enumerate(finders)
        ]
        fixes = [FixCoverage("f1", "t1", frozenset(r.report_id for r in reports))]
        groups = unify_defects(reports, fixes, PARAMS)
        scores = compute_break_scores(groups, reports)
        assert sum(scores.values()) == groups[0].penalty


class TestSubmissionLimits:
    def test_second_privacy_rejected_for_atm(self):
        prior = [report("r1", category="privacy")]
        decision = enforce_submission_limits("atm", prior, report("r2", category="privacy"))
        assert not decision.allowed
        assert "per-category" in decision.reason

    def test_fifth_ehr_security_report_allowed(self):
        prior = [report(f"r{i}", category="integrity") for i in range(4)]
        decision = enforce_submission_limits("ehr", prior, report("r5", category="privacy"))
        assert decision.allowed

    def test_sixth_ehr_report_rejected(self):
        prior = [report(f"r{i}") for i in range(5)]
        decision = enforce_submission_limits("ehr", prior, report("r6"))
        assert not decision.allowed
        assert "per-target" in decision.reason

    def test_eleventh_securelog_report_rejected(self):
        prior = [report(f"r{i}") for i in range(10)]
        decision = enforce_submission_limits("securelog", prior, report("r10"))
        assert not decision.allowed

    def test_rejected_reports_do_not_count(self):
        prior = [report(f"r{i}", accepted=False) for i in range(10)]
        decision = enforce_submission_limits("securelog", prior, report("new"))
        assert decision.allowed

    def test_mixed_categories_within_total(self):
        prior = [
            report("r1", category="privacy"),
            report("r2", category="integrity"),
        ]
        decision = enforce_submission_limits("atm", prior, report("r3", category="crash"))
        assert decision == LimitDecision(True)


class TestRendering:
    def test_half_up_rounding(self):
        assert render_points(Fraction(100, 3)) == "33.33"
        assert render_points(Fraction(50, 3)) == "16.67"
        assert render_points(Fraction(1, 8)) == "0.13"
        assert render_points(Fraction(-75)) == "-75.00"

    def test_severity_of_handles_availability(self):
        assert severity_of(["availability"]) == "security"
        assert severity_of(["crash", "correctness"]) == "crash"
