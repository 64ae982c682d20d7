"""Acceptance gate: every primary criterion at its stated tolerance.

Each test prints one PASS/FAIL line so a run of this module doubles as the
acceptance report:

    pytest tests/test_acceptance.py -s
"""

import random
import subprocess
import time
from fractions import Fraction

import networkx as nx
import pytest

from bibifi.atm import harness as atm_harness
from bibifi.ehr import interp, syntax
from bibifi.ehr import judge as ehr_judge
from bibifi.ehr import server as ehr_server
from bibifi.fixtures import breaks as breakgen
from bibifi.fixtures import corpus as corpusgen
from bibifi.fixtures import mitm as mitmgen
from bibifi.judge import JudgeContext, adjudicate
from bibifi.scoring import (
    BugReport,
    CorrectnessOutcome,
    FixCoverage,
    PerformanceOutcome,
    ScoringParams,
    compute_break_scores,
    compute_resilience,
    compute_ship_score,
    enforce_submission_limits,
    unify_defects,
)
from bibifi.securelog import challenges as sl_challenges
from bibifi.securelog import judge as sl_judge
from bibifi.targets import normalize_output, run_target


def report(name: str, ok: bool, detail: str = "") -> None:
    marker = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"{marker}  {name}{suffix}")
    assert ok, f"{name}: {detail}"


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


def test_securelog_transcript_replay(oracle_securelog, tmp_path):
    """Four appends then a state query, byte-exact, under one second."""
    log = tmp_path / "logfile"
    logappend = oracle_securelog.binary("logappend")
    logread = oracle_securelog.binary("logread")
    started = time.monotonic()
    for argv in [
        ["-T", "1", "-K", "secret", "-A", "-G", "Fred"],
        ["-T", "2", "-K", "secret", "-A", "-G", "Jill"],
        ["-T", "3", "-K", "secret", "-A", "-G", "Fred", "-R", "1"],
        ["-T", "4", "-K", "secret", "-A", "-G", "Jill", "-R", "1"],
    ]:
        result = run_target([logappend, *argv, log])
        assert result.exit_code == 0, result.stdout
    result = run_target([logread, "-K", "secret", "-S", log])
    elapsed = time.monotonic() - started
    byte_exact = normalize_output(result.stdout) == "Fred\nJill\n1: Fred,Jill"
    report(
        "gallery-log transcript replay",
        byte_exact and result.exit_code == 0 and elapsed < 1.0,
        f"{elapsed:.2f}s",
    )


def test_atm_transcript_replay(oracle_atm, tmp_path):
    """Account create then withdraw, byte-exact, under two seconds."""
    auth = tmp_path / "bank.auth"
    started = time.monotonic()
    port = atm_harness._free_port()
    bank = subprocess.Popen(
        [str(oracle_atm.binary("bank")), "-p", str(port), "-s", str(auth)],
        stdout=subprocess.PIPE,
        cwd=tmp_path,
    )
    try:
        while not auth.exists():
            assert bank.poll() is None, "bank died"
            time.sleep(0.01)
        atm = oracle_atm.binary("atm")
        common = ["-s", auth, "-c", tmp_path / "bob.card", "-a", "bob", "-p", str(port)]
        create = run_target([atm, *common, "-n", "1000.00"])
        withdraw = run_target([atm, *common, "-w", "63.10"])
        elapsed = time.monotonic() - started
    finally:
        bank.terminate()
        bank.wait()
    ok = (
        normalize_output(create.stdout) == '{"account":"bob","initial_balance":1000}'
        and normalize_output(withdraw.stdout) == '{"account":"bob","withdraw":63.1}'
        and create.exit_code == withdraw.exit_code == 0
        and elapsed < 2.0
    )
    report("bank/atm transcript replay", ok, f"{elapsed:.2f}s")


def test_ehr_transcript_replay(oracle_ehr, tmp_path):
    """Admin program (four status lines) then alice's read, byte-exact."""
    admin_program = (
        'as principal admin password "admin" do\n'
        '   create principal alice "alices_password"\n'
        '   set msg = "Hi Alice. Good luck!"\n'
        "   set delegation msg admin read -> alice\n"
        '   return "success"\n***\n'
    )
    alice_program = (
        'as principal alice password "alices_password" do\n   return msg\n***\n'
    )
    with ehr_judge.TargetServer(oracle_ehr, admin_password="admin", timeout=10.0) as server:
        admin_lines = ehr_server.send_program("127.0.0.1", server.port, admin_program)
        alice_lines = ehr_server.send_program("127.0.0.1", server.port, alice_program)
    ok = admin_lines == [
        '{"status":"CREATE_PRINCIPAL"}',
        '{"status":"SET"}',
        '{"status":"SET_DELEGATION"}',
        '{"status":"RETURNING","output":"success"}',
    ] and alice_lines == ['{"status":"RETURNING","output":"Hi Alice. Good luck!"}']
    report("data-server transcript replay", ok)


def test_scoring_arithmetic_exact():
    """Hand-worked ship and break/resilience numbers, tolerance zero."""
    params = ScoringParams(multiplier=50, problem="securelog")
    ship = compute_ship_score(
        [
            CorrectnessOutcome("m1", "mandatory", True),
            CorrectnessOutcome("m2", "mandatory", True),
            CorrectnessOutcome("o1", "optional", True),
        ],
        [(PerformanceOutcome("p1", Fraction(6)), 2, 10)],
        params,
    )
    reports = [
        BugReport("r1", "teamA", "victim", "privacy", True),
        BugReport("r2", "teamB", "victim", "integrity", True),
    ]
    fixes = [FixCoverage("f1", "victim", frozenset(["r1", "r2"]))]
    groups = unify_defects(reports, fixes, params)
    breaks = compute_break_scores(groups, reports)
    resilience = compute_resilience(groups)
    ok = (
        ship == 150
        and breaks == {"teamA": 50, "teamB": 50}
        and resilience == -100
    )
    report("scoring arithmetic", ok, f"ship={ship} split={dict(breaks)} res={resilience}")


@pytest.mark.slow
def test_judge_soundness_full_corpus(ctx):
    """Every corpus payload is refused when the target is the reference."""
    started = time.monotonic()
    challenges = sl_challenges.generate_challenge_logs(
        ctx.oracles["securelog"], seed=404, count=4
    )
    corpus = corpusgen.build_corpus(challenges)
    assert len(corpus) >= 50, f"corpus has only {len(corpus)} payloads"
    categories = {s.category_claim for s in corpus}
    problems = {s.problem for s in corpus}
    accepted = []
    for submission in corpus:
        result = adjudicate(
            submission, ctx.oracles[submission.problem], ctx,
        )
        if result.status == "accepted":
            accepted.append((submission.report_id, result.reason))
    elapsed = time.monotonic() - started
    ok = (
        not accepted
        and elapsed < 300
        and problems == {"securelog", "atm", "ehr"}
        and categories
        >= {"correctness", "crash", "privacy", "integrity", "availability"}
    )
    report(
        "judge soundness over the fixture corpus",
        ok,
        f"{len(corpus)} payloads, {elapsed:.0f}s, accepted={accepted}",
    )


@pytest.mark.slow
def test_judge_completeness_six_fixtures(ctx, fixture_target, tmp_path):
    """Each canonical vulnerability is caught, each check under 30 s."""
    checks = []

    def timed(name, func):
        started = time.monotonic()
        ok, detail = func()
        elapsed = time.monotonic() - started
        checks.append((name, ok and elapsed < 30, f"{detail}, {elapsed:.1f}s"))

    def plaintext_privacy():
        target = fixture_target("securelog-plaintext")
        challenge = sl_challenges.generate_challenge_logs(target, seed=7, count=2)[1]
        claimed = breakgen.read_plaintext_state(challenge.log)
        verdict = sl_judge.judge_privacy(
            target, challenge.log, challenge.token, claimed, ["-S"]
        )
        return verdict.verdict == "confirmed", verdict.verdict

    def per_record_integrity():
        target = fixture_target("securelog-per-record")
        payload = breakgen.per_record_swap_break(target)
        verdict = sl_judge.judge_integrity(
            target, payload["log"], payload["corrupted_log"], payload["token"],
            payload["query"], payload["transcript"],
        )
        return verdict.verdict == "confirmed", verdict.verdict

    def replay_integrity():
        target = fixture_target("atm-nonce-free")
        mitm = mitmgen.write_mitm(
            tmp_path / "replay.py", "replay", mitmgen.REPLAY_DEPOSIT_REQUESTS
        )
        verdict = atm_harness.judge_integrity_mitm(
            target, ctx.oracles["atm"], mitm, atm_timeout=5.0, session_seconds=25.0
        )
        return verdict.verdict == "confirmed", verdict.detail

    def sniffer_privacy():
        target = fixture_target("atm-plaintext")
        mitm = mitmgen.write_mitm(
            tmp_path / "sniff.py", "sniff", mitmgen.SNIFF_SECRET_REQUESTS
        )
        verdict = atm_harness.judge_privacy_mitm(
            target, mitm, atm_timeout=5.0, session_seconds=25.0
        )
        return verdict.verdict == "confirmed", verdict.detail

    def chain_privacy():
        target = fixture_target("ehr-chain-unchecked")
        programs = breakgen.substitute_admin(
            breakgen.CHAIN_UNCHECKED_PROGRAMS, "hunter2"
        )
        verdict = ehr_judge.adjudicate_security(target, programs, "hunter2")
        return (
            verdict.verdict == "confirmed" and verdict.category == "privacy",
            f"{verdict.verdict}/{verdict.category}",
        )

    def crash_availability():
        target = fixture_target("ehr-crashy")
        programs = breakgen.substitute_admin(
            breakgen.CRASHY_FOREACH_PROGRAMS, "hunter2"
        )
        verdict = ehr_judge.adjudicate_security(target, programs, "hunter2")
        return (
            verdict.verdict == "confirmed" and verdict.category == "availability",
            f"{verdict.verdict}/{verdict.category}",
        )

    timed("plaintext log -> privacy", plaintext_privacy)
    timed("record swap -> integrity", per_record_integrity)
    timed("nonce-free replay -> integrity", replay_integrity)
    timed("plaintext wire sniffer -> privacy", sniffer_privacy)
    timed("unchecked chain -> privacy", chain_privacy)
    timed("crash fixture -> availability", crash_availability)

    for name, ok, detail in checks:
        report(f"judge completeness: {name}", ok, detail)


@pytest.mark.slow
def test_differential_self_fuzz():
    """1000 data-server programs and 500 log command sequences, replayed
    twice each, must agree perfectly inside two minutes."""
    started = time.monotonic()
    ehr_report = breakgen.ehr_self_fuzz(programs_total=1000, seed=1612)
    sl_report = breakgen.securelog_self_fuzz(rounds=500, seed=1613)
    elapsed = time.monotonic() - started
    ok = (
        ehr_report.discrepancies == []
        and sl_report.discrepancies == []
        and ehr_report.rounds >= 1000
        and sl_report.rounds == 500
        and elapsed < 120
    )
    report(
        "differential self-fuzz",
        ok,
        f"{ehr_report.rounds} programs + {sl_report.rounds} sequences in {elapsed:.0f}s",
    )


def test_access_control_matches_closure_oracle():
    """check_right equals brute-force transitive closure on 10,000 graphs."""
    rng = random.Random(1007)
    mismatches = 0
    for _ in range(10_000):
        state = interp.ServerState.fresh()
        names = [f"p{i}" for i in range(rng.randint(1, 8))]
        for name in names:
            state.principals[name] = interp.PasswordEntry.create("pw")
        variables = [f"v{i}" for i in range(rng.randint(1, 8))]
        population = names + ["admin"]
        for variable in variables:
            state.globals[variable] = "x"
            state.owners[variable] = rng.choice(population)
        for _ in range(rng.randrange(64)):
            state.assertions.append(
                interp.DelegationAssertion(
                    rng.choice(variables),
                    rng.choice(population),
                    rng.choice(syntax.RIGHTS),
                    rng.choice(population),
                )
            )
        principal = rng.choice(population)
        right = rng.choice(syntax.RIGHTS)
        variable = rng.choice(variables)
        graph = nx.DiGraph()
        roots = {"admin", state.owners.get(variable)} - {None}
        graph.add_nodes_from(roots)
        for assertion in state.assertions:
            if assertion.variable == variable and assertion.right == right:
                graph.add_edge(assertion.issuer, assertion.grantee)
        reachable = set(roots)
        for root in roots:
            if root in graph:
                reachable |= nx.descendants(graph, root)
        expected = principal in reachable
        if interp.check_right(state, principal, right, variable) != expected:
            mismatches += 1
    report("access-control closure equivalence", mismatches == 0, "10000 graphs")


@pytest.mark.slow
def test_event_sourcing_replay(tmp_path):
    """Scripted mini-contest: replay is byte-identical, the approved fix
    improves resilience and re-splits break points."""
    from bibifi.demo import run_demo

    summary = run_demo(tmp_path / "store", tmp_path / "work")
    pre = {r["team"]: r for r in summary["pre_fix"]["rows"]}
    post = {r["team"]: r for r in summary["scoreboard"]["rows"]}
    bravo = summary["teams"]["bravo"]
    alpha = summary["teams"]["alpha"]
    charlie = summary["teams"]["charlie"]
    ok = (
        summary["replay_matches"]
        and summary["fix_approved"]
        and pre[bravo]["resilience"] == "-100.00"
        and post[bravo]["resilience"] == "-50.00"
        and pre[alpha]["break_score"] == "50.00"
        and post[alpha]["break_score"] == "25.00"
        and pre[charlie]["break_score"] == "50.00"
        and post[charlie]["break_score"] == "25.00"
    )
    report(
        "event-sourcing replay with fix re-split",
        ok,
        f"resilience {pre[bravo]['resilience']} -> {post[bravo]['resilience']}, "
        f"break {pre[alpha]['break_score']} -> {post[alpha]['break_score']}",
    )


def test_submission_limits():
    """The three documented caps all reject with the right reason."""
    def rep(i, category="correctness", accepted=True):
        return BugReport(f"r{i}", "breaker", "victim", category, accepted)

    eleventh = enforce_submission_limits(
        "securelog", [rep(i) for i in range(10)], rep(10)
    )
    second_privacy_sl = enforce_submission_limits(
        "securelog", [rep(0, "privacy")], rep(1, "privacy")
    )
    second_privacy_atm = enforce_submission_limits(
        "atm", [rep(0, "privacy")], rep(1, "privacy")
    )
    sixth_ehr = enforce_submission_limits("ehr", [rep(i) for i in range(5)], rep(5))
    ok = (
        not eleventh.allowed
        and "per-target" in eleventh.reason
        and not second_privacy_sl.allowed
        and "per-category" in second_privacy_sl.reason
        and not second_privacy_atm.allowed
        and "per-category" in second_privacy_atm.reason
        and not sixth_ehr.allowed
        and "per-target" in sixth_ehr.reason
    )
    report("submission limits", ok)
