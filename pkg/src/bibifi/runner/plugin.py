"""Problem plugin contract: one JSON manifest in, one JSON verdict out.

    stdin:  {"problem_id": "...", "submission_path": "...", "test_id": "..."}
    stdout: {"test_id": "...", "passed": bool, "measure": number|null,
             "transcript": "..."}

The runner (or any other infrastructure) can drive problem testing through
this pipe without importing the problem code.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from .evaluate import run_build, run_performance_test, run_test
from .isolation import LocalSandboxProvider
from .problems import problem_descriptor


def run_manifest(manifest: dict) -> dict:
    problem = problem_descriptor(str(manifest["problem_id"]))
    bundle = Path(str(manifest["submission_path"]))
    test_id = str(manifest["test_id"])
    test = next((t for t in problem.all_tests() if t.test_id == test_id), None)
    if test is None:
        raise KeyError(f"unknown test {test_id!r}")
    provider = LocalSandboxProvider()
    build = run_build(bundle, problem, provider)
    if not build.ok:
        return {
            "test_id": test_id,
            "passed": False,
            "measure": None,
            "transcript": build.log,
        }
    built = Path(str(bundle) + ".built")
    runner = run_performance_test if test.kind == "performance" else run_test
    outcome = runner(built, test, provider, problem.needs_loopback)
    return {
        "test_id": outcome.test_id,
        "passed": outcome.passed,
        "measure": None if outcome.measure is None else float(outcome.measure),
        "transcript": outcome.transcript,
    }


def main() -> int:
    try:
        manifest = json.load(sys.stdin)
        verdict = run_manifest(manifest)
    except Exception as exc:  # the contract is JSON out, always
        sys.stdout.write(json.dumps({"error": str(exc)}) + "\n")
        return 1
    sys.stdout.write(json.dumps(verdict) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
