"""Break adjudication dispatch, limits, neutrality, and fix validation."""

import random

import pytest

from bibifi.fixtures import breaks as breakgen
from bibifi.fixtures import bundles, corpus
from bibifi.judge import (
    BreakSubmission,
    Fix,
    JudgeContext,
    adjudicate,
    validate_fix,
)
from bibifi.judge.adjudicate import adjudicate_correctness, adjudicate_crash
from bibifi.runner.isolation import LocalSandboxProvider
from bibifi.scoring import BugReport
from bibifi.securelog import challenges as sl_challenges


@pytest.fixture(scope="module")
def ctx(oracle_securelog, oracle_atm, oracle_ehr):
    return JudgeContext(
        oracles={
            "securelog": oracle_securelog,
            "atm": oracle_atm,
            "ehr": oracle_ehr,
        },
        atm_timeout=5.0,
        session_seconds=30.0,
        command_timeout=8.0,
    )


WRONGSORT_SCRIPT = [
    {
        "binary": "logappend",
        "args": ["-K", "k", "-T", "1", "-A", "-E", "Zoe", "LOGFILE"],
        "expected_exit": 0,
    },
    {
        "binary": "logappend",
        "args": ["-K", "k", "-T", "2", "-A", "-G", "Al", "LOGFILE"],
        "expected_exit": 0,
    },
    {
        "binary": "logread",
        "args": ["-K", "k", "-S", "LOGFILE"],
        "expected_exit": 0,
        "expected_output": "Zoe\nAl",
    },
]

CRASH_SCRIPT = [
    {
        "binary": "logappend",
        "args": ["-K", "ck", "-T", "1", "-A", "-G", "Solo", "LOGFILE"],
        "expected_exit": 0,
    },
    {
        "binary": "logappend",
        "args": ["-K", "ck", "-T", "2", "-L", "-G", "Solo", "LOGFILE"],
        "expected_exit": 0,
    },
    {
        "binary": "logread",
        "args": ["-K", "ck", "-S", "LOGFILE"],
        "expected_exit": 0,
        "expected_output": "",
    },
]


class TestCorrectness:
    def test_oracle_as_target_rejected(self, ctx):
        oracle = ctx.oracles["securelog"]
        result = adjudicate_correctness(oracle, oracle, "securelog", WRONGSORT_SCRIPT)
        assert result.status == "rejected"

    def test_wrongsort_accepted(self, ctx, fixture_target):
        target = fixture_target("securelog-wrongsort")
        result = adjudicate_correctness(
            target, ctx.oracles["securelog"], "securelog", WRONGSORT_SCRIPT
        )
        assert (result.status, result.category) == ("accepted", "correctness")

    def test_script_failing_on_oracle_routes_to_oracle_bug_queue(self, ctx):
        script = [dict(WRONGSORT_SCRIPT[0], expected_output="nonsense")]
        oracle = ctx.oracles["securelog"]
        result = adjudicate_correctness(oracle, oracle, "securelog", script)
        assert result.status == "oracle-bug"


class TestCrash:
    def test_crashy_fixture_accepted(self, ctx, fixture_target):
        target = fixture_target("securelog-crashy")
        result = adjudicate_crash(target, "securelog", CRASH_SCRIPT)
        assert (result.status, result.category) == ("accepted", "crash")

    def test_controlled_failure_is_not_a_crash(self, ctx):
        script = [
            {
                "binary": "logappend",
                "args": ["-K", "k", "-T", "1", "-L", "-G", "X", "LOGFILE"],
            }
        ]
        result = adjudicate_crash(ctx.oracles["securelog"], "securelog", script)
        assert result.status == "rejected"

    def test_oracle_never_crashes_on_corpus_scripts(self, ctx):
        rng = random.Random(42)
        oracle = ctx.oracles["securelog"]
        for submission in corpus._securelog_correctness(rng, 4):
            result = adjudicate_crash(
                oracle, "securelog", submission.payload["commands"]
            )
            assert result.status == "rejected"


class TestDispatchAndLimits:
    def test_category_comes_from_judge_not_claim(self, ctx, fixture_target):
        target = fixture_target("ehr-hardcoded-password")
        submission = BreakSubmission(
            "b1", "t1", "ehr", "privacy",
            {"programs": breakgen.HARDCODED_PASSWORD_PROGRAMS},
        )
        result = adjudicate(submission, target, ctx)
        assert result.status == "accepted"
        assert result.category == "integrity"  # the program mutates state

    def test_limit_rejection_reports_reason(self, ctx, fixture_target):
        target = fixture_target("securelog-wrongsort")
        submission = BreakSubmission(
            "b1", "t1", "securelog", "correctness", {"commands": WRONGSORT_SCRIPT}
        )
        prior = [
            BugReport(f"r{i}", "b1", "t1", "correctness", accepted=True)
            for i in range(10)
        ]
        result = adjudicate(submission, target, ctx, prior_accepted=prior)
        assert result.status == "rejected"
        assert "limit" in result.reason

    def test_accepted_break_is_reproducible(self, ctx, fixture_target):
        target = fixture_target("securelog-wrongsort")
        submission = BreakSubmission(
            "b1", "t1", "securelog", "correctness", {"commands": WRONGSORT_SCRIPT}
        )
        first = adjudicate(submission, target, ctx)
        second = adjudicate(submission, target, ctx)
        assert first.status == second.status == "accepted"


@pytest.mark.slow
class TestOracleNeutralityCorpusSample:
    def test_sample_of_corpus_rejected_against_oracles(self, ctx):
        challenges = sl_challenges.generate_challenge_logs(
            ctx.oracles["securelog"], seed=31, count=4
        )
        sample = [
            s
            for s in corpus.build_corpus(challenges)
            if s.report_id
            in {
                "sl-corr-0", "sl-crash-0", "sl-priv-0", "sl-int-0",
                "atm-corr-0", "ehr-corr-0", "ehr-priv-chain",
            }
        ]
        assert len(sample) == 7
        for submission in sample:
            target = ctx.oracles[submission.problem]
            result = adjudicate(submission, target, ctx)
            assert result.status != "accepted", (submission.report_id, result)


@pytest.mark.slow
class TestFixValidation:
    def make_fix_flow(self, ctx, tmp_path, provider):
        """The wrongsort team fixes its sort bug (ships the reference)."""
        target = bundles.built_fixture("securelog-wrongsort", tmp_path / "broken")
        submissions = [
            BreakSubmission(
                f"b{i}", "teamw", "securelog", "correctness",
                {"commands": WRONGSORT_SCRIPT}, report_id=f"ws-{i}",
            )
            for i in range(2)
        ]
        for submission in submissions:
            assert adjudicate(submission, target, ctx).status == "accepted"
        fixed_bundle = bundles.write_oracle_bundle("securelog", tmp_path / "fixed")
        fix = Fix(
            fix_id="fix1",
            builder_team="teamw",
            problem="securelog",
            bundle=fixed_bundle,
            covered_report_ids=frozenset(s.report_id for s in submissions),
        )
        return fix, submissions

    def test_approved_fix_flow(self, ctx, tmp_path):
        provider = LocalSandboxProvider(tmp_path / "sbx")
        fix, submissions = self.make_fix_flow(ctx, tmp_path, provider)
        decision = validate_fix(
            fix, submissions, ctx, provider,
            judge_decision=True, judge="organizer-1", rationale="single sort flaw",
        )
        assert decision.approved
        assert fix.judge_state == "approved"
        assert decision.judge == "organizer-1"
        assert decision.timestamp > 0

    def test_fix_that_does_not_defend_is_auto_rejected(self, ctx, tmp_path):
        # crashy qualifies (no mandatory test hits the empty-state query),
        # so an unchanged resubmission survives stage one and must be caught
        # by the covered-payload recheck
        provider = LocalSandboxProvider(tmp_path / "sbx")
        target_bundle = bundles.write_fixture_bundle(
            "securelog-crashy", tmp_path / "still-broken"
        )
        submissions = [
            BreakSubmission(
                "b1", "teamw", "securelog", "crash",
                {"commands": CRASH_SCRIPT}, report_id="cr-0",
            )
        ]
        fix = Fix(
            fix_id="fix2",
            builder_team="teamw",
            problem="securelog",
            bundle=target_bundle,  # "fix" that changes nothing
            covered_report_ids=frozenset(["cr-0"]),
        )
        decision = validate_fix(fix, submissions, ctx, provider, judge_decision=True,
                                judge="organizer-1")
        assert not decision.approved
        assert fix.judge_state == "rejected"
        assert "still reproduces" in decision.precheck_log

    def test_fix_breaking_mandatory_tests_rejected(self, ctx, tmp_path):
        provider = LocalSandboxProvider(tmp_path / "sbx")
        bad = tmp_path / "bad-fix"
        bad.mkdir()
        (bad / "build").write_text("#!/bin/sh\nexit 1\n")
        (bad / "build").chmod(0o755)
        fix = Fix(
            fix_id="fix3",
            builder_team="teamw",
            problem="securelog",
            bundle=bad,
            covered_report_ids=frozenset(["ws-0"]),
        )
        decision = validate_fix(fix, [], ctx, provider, judge_decision=True,
                                judge="organizer-1")
        assert not decision.approved
        assert "mandatory" in decision.rationale or "prechecks" in decision.rationale
