"""Sandboxed build/test pipeline: isolation, scripts, evaluation, plugin."""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from bibifi.fixtures import bundles
from bibifi.runner import evaluate, problems
from bibifi.runner.isolation import (
    LocalSandboxProvider,
    RunLimits,
    RunRequest,
    SandboxFault,
)


@pytest.fixture(scope="module")
def provider(tmp_path_factory):
    return LocalSandboxProvider(tmp_path_factory.mktemp("sandboxes"))


def make_bundle(path: Path, build_body: str = "exit 0", files: dict | None = None):
    path.mkdir(parents=True, exist_ok=True)
    build = path / "build"
    build.write_text(f"#!/bin/sh\ncd \"$(dirname \"$0\")\"\n{build_body}\n")
    build.chmod(0o755)
    for name, content in (files or {}).items():
        target = path / name
        target.write_text(content)
        target.chmod(0o755)
    return path


class TestLocalProvider:
    def test_fresh_directory_per_sandbox(self, provider):
        a, b = provider.provision(), provider.provision()
        try:
            assert a.root != b.root
            (a.root / "marker").write_text("x")
            assert not (b.root / "marker").exists()
        finally:
            provider.destroy(a)
            provider.destroy(b)

    def test_destroy_removes_state(self, provider):
        sandbox = provider.provision()
        (sandbox.root / "junk").write_text("x")
        provider.destroy(sandbox)
        assert not sandbox.root.exists()
        with pytest.raises(SandboxFault):
            provider.execute(sandbox, RunRequest(argv=("true",)))

    def test_execute_captures_output(self, provider):
        sandbox = provider.provision()
        try:
            result = provider.execute(
                sandbox, RunRequest(argv=("sh", "-c", "echo hi; echo err >&2"))
            )
            assert (result.exit_code, result.stdout, result.stderr) == (0, "hi\n", "err\n")
            assert result.verdict == "ok"
        finally:
            provider.destroy(sandbox)

    def test_wall_timeout(self, provider):
        sandbox = provider.provision()
        try:
            result = provider.execute(
                sandbox,
                RunRequest(argv=("sleep", "5"), limits=RunLimits(wall_seconds=0.3)),
            )
            assert result.verdict == "timeout"
        finally:
            provider.destroy(sandbox)

    def test_no_network_blocks_outside_sockets(self, provider):
        if not provider.supports_network_isolation:
            pytest.skip("kernel denies unshare -n")
        sandbox = provider.provision()
        script = (
            "import socket\n"
            "s = socket.socket()\n"
            "s.settimeout(2)\n"
            "try:\n"
            "    s.connect((\"192.0.2.1\", 80))\n"
            "    print(\"connected\")\n"
            "except OSError:\n"
            "    print(\"blocked\")\n"
        )
        try:
            result = provider.execute(
                sandbox,
                RunRequest(
                    argv=(sys.executable, "-c", script),
                    limits=RunLimits(no_network=True, wall_seconds=10.0),
                ),
            )
            assert result.stdout.strip() == "blocked"
        finally:
            provider.destroy(sandbox)

    def test_isolation_write_outside_fails_and_next_run_pristine(self, tmp_path):
        if os.geteuid() != 0:
            pytest.skip("privilege dropping requires root")
        base = Path("/tmp/bibifi-jail-test")
        provider = LocalSandboxProvider(base, drop_privileges=True)
        protected = tmp_path / "protected.txt"  # root-owned, mode 700 parent
        tmp_path.chmod(0o700)
        sandbox = provider.provision()
        try:
            result = provider.execute(
                sandbox,
                RunRequest(argv=("sh", "-c", f"echo pwned > {protected} && echo wrote")),
            )
            assert result.exit_code != 0
            assert not protected.exists()
            (sandbox.root / "scratch").exists()  # writable inside
        finally:
            provider.destroy(sandbox)
        fresh = provider.provision()
        try:
            assert list(fresh.root.iterdir()) == []
        finally:
            provider.destroy(fresh)


class TestBuild:
    def test_oracle_bundle_builds(self, provider, tmp_path):
        bundle = bundles.write_oracle_bundle("securelog", tmp_path / "oracle")
        problem = problems.problem_descriptor("securelog")
        result = evaluate.run_build(bundle, problem, provider)
        assert result.ok, result.log
        assert set(result.artifacts) == {"logappend", "logread"}

    def test_failing_build(self, provider, tmp_path):
        bundle = make_bundle(tmp_path / "bad", build_body="echo broken >&2; exit 1")
        problem = problems.problem_descriptor("securelog")
        result = evaluate.run_build(bundle, problem, provider)
        assert not result.ok
        assert "broken" in result.log

    def test_build_timeout(self, provider, tmp_path):
        bundle = make_bundle(tmp_path / "slow", build_body="sleep 30")
        problem = problems.problem_descriptor("securelog")
        result = evaluate.run_build(bundle, problem, provider, timeout=0.5)
        assert not result.ok
        assert "timed out" in result.log

    def test_missing_binaries(self, provider, tmp_path):
        bundle = make_bundle(tmp_path / "empty")
        problem = problems.problem_descriptor("securelog")
        result = evaluate.run_build(bundle, problem, provider)
        assert not result.ok
        assert "logappend" in result.log


@pytest.mark.slow
class TestEvaluation:
    def test_oracle_qualifies_on_its_own_problem(self, provider, tmp_path):
        bundle = bundles.write_oracle_bundle("securelog", tmp_path / "oracle")
        problem = problems.problem_descriptor("securelog")
        evidence = evaluate.evaluate_submission(bundle, problem, provider)
        assert evidence.qualified, evidence.transcripts
        assert all(o.passed for o in evidence.correctness), evidence.transcripts
        assert len(evidence.performance) == len(problem.performance_tests)
        assert all(p.measure > 0 for p in evidence.performance)

    def test_failing_mandatory_test_disqualifies(self, provider, tmp_path, fixture_target):
        bundle = bundles.write_fixture_bundle(
            "securelog-wrongsort", tmp_path / "wrongsort"
        )
        problem = problems.problem_descriptor("securelog")
        evidence = evaluate.evaluate_submission(bundle, problem, provider)
        assert not evidence.qualified
        failed = {o.test_id for o in evidence.correctness if not o.passed}
        assert "m-state-query" in failed

    def test_determinism_same_bundle_same_outcomes(self, provider, tmp_path):
        bundle = bundles.write_oracle_bundle("securelog", tmp_path / "oracle")
        problem = problems.problem_descriptor("securelog")
        first = evaluate.evaluate_submission(bundle, problem, provider)
        second = evaluate.evaluate_submission(bundle, problem, provider)
        assert [
            (o.test_id, o.passed) for o in first.correctness
        ] == [(o.test_id, o.passed) for o in second.correctness]


@pytest.mark.slow
class TestPlugin:
    def test_verdict_schema_over_the_pipe(self, tmp_path):
        bundle = bundles.write_oracle_bundle("securelog", tmp_path / "oracle")
        manifest = {
            "problem_id": "securelog",
            "submission_path": str(bundle),
            "test_id": "m-state-query",
        }
        proc = subprocess.run(
            [sys.executable, "-m", "bibifi.runner.plugin"],
            input=json.dumps(manifest).encode(),
            capture_output=True,
            timeout=180,
        )
        assert proc.returncode == 0, proc.stderr
        verdict = json.loads(proc.stdout)
        assert verdict["test_id"] == "m-state-query"
        assert verdict["passed"] is True
        assert verdict["measure"] is None
        assert isinstance(verdict["transcript"], str)


class TestDescriptors:
    def test_all_problems_well_formed(self):
        for problem_id in ("securelog", "atm", "ehr"):
            descriptor = problems.problem_descriptor(problem_id)
            assert descriptor.mandatory_tests
            ids = [t.test_id for t in descriptor.all_tests()]
            assert len(ids) == len(set(ids))
            for test in descriptor.performance_tests:
                assert test.measure in ("wall-time", "output-bytes")
