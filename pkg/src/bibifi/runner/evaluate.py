"""Build and test submissions: the ship-score evidence pipeline.

run_build copies the bundle into a sandbox and runs its `build` script;
run_test replays one test script against the built binaries in a fresh
sandbox; evaluate_submission strings it all together and reports whether
the submission qualifies (builds and passes every mandatory test).
"""

from __future__ import annotations

import shutil
import socket
import statistics
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..scoring import CorrectnessOutcome, PerformanceOutcome
from ..targets import normalize_output
from .isolation import (
    IsolationProvider,
    RunLimits,
    RunRequest,
    Sandbox,
    SandboxFault,
)
from .problems import ProblemDescriptor, Step, TestDescriptor

BUILD_TIMEOUT = 600.0
SUBMISSION_DIR = "submission"


@dataclass
class BuildResult:
    ok: bool
    log: str = ""
    artifacts: dict[str, Path] = field(default_factory=dict)


@dataclass
class TestOutcome:
    test_id: str
    passed: bool
    measure: Fraction | None = None
    transcript: str = ""


@dataclass
class ShipEvidence:
    qualified: bool
    build_log: str
    correctness: list[CorrectnessOutcome] = field(default_factory=list)
    performance: list[PerformanceOutcome] = field(default_factory=list)
    transcripts: dict[str, str] = field(default_factory=dict)


def _stage_bundle(bundle: Path, sandbox: Sandbox) -> Path:
    dest = sandbox.root / SUBMISSION_DIR
    shutil.copytree(bundle, dest)
    return dest


def run_build(
    bundle: Path,
    problem: ProblemDescriptor,
    provider: IsolationProvider,
    timeout: float = BUILD_TIMEOUT,
) -> BuildResult:
    """Run the bundle's `build` in a sandbox; artifacts stay in the bundle
    tree (relative paths), which later test sandboxes re-stage."""
    sandbox = provider.provision()
    try:
        staged = _stage_bundle(bundle, sandbox)
        build = staged / "build"
        if not build.exists():
            return BuildResult(False, "bundle has no build script")
        build.chmod(build.stat().st_mode | 0o111)
        result = provider.execute(
            sandbox,
            RunRequest(
                argv=(str(build),),
                limits=RunLimits(
                    cpu_seconds=max(1, int(timeout)),
                    wall_seconds=timeout,
                    no_network=False,  # builds may hit a package mirror
                ),
            ),
        )
        log = result.stdout + result.stderr
        if not result.ok or result.exit_code != 0:
            reason = {
                "timeout": "timed out",
                "resource-exceeded": "exceeded resource limits",
            }.get(result.verdict, "failed")
            return BuildResult(False, f"build {reason}\n{log}")
        missing = [b for b in problem.binaries if not (staged / b).exists()]
        if missing:
            return BuildResult(False, f"build produced no {missing}\n{log}")
        # keep the built tree outside the sandbox so tests can re-stage it
        built = Path(str(bundle) + ".built")
        if built.exists():
            shutil.rmtree(built)
        shutil.copytree(staged, built)
        return BuildResult(
            True, log, {b: built / b for b in problem.binaries}
        )
    finally:
        provider.destroy(sandbox)


def _allocate_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


def _substitute(
    text: str, built: Path, scratch: Path, ports: dict[str, int], tools: dict
) -> str:
    out = text
    if "{dir}" in out:
        out = out.replace("{dir}", str(scratch))
    while "{bin:" in out:
        start = out.index("{bin:")
        end = out.index("}", start)
        name = out[start + 5 : end]
        out = out[:start] + str(built / name) + out[end + 1 :]
    while "{port:" in out:
        start = out.index("{port:")
        end = out.index("}", start)
        name = out[start + 6 : end]
        if name not in ports:
            ports[name] = _allocate_port()
        out = out[:start] + str(ports[name]) + out[end + 1 :]
    return out


def _expand_step(
    step: Step, built: Path, scratch: Path, ports: dict[str, int]
) -> list[str]:
    from .problems import TOOLS

    argv: list[str] = []
    for part in step.argv:
        if part.startswith("{tool:"):
            name = part[6:-1]
            argv.extend(TOOLS[name])
        else:
            argv.append(_substitute(part, built, scratch, ports, TOOLS))
    return argv


def _wait_for_port(port: int, proc: subprocess.Popen, timeout: float) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if proc.poll() is not None:
            return False
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return True
        except OSError:
            time.sleep(0.02)
    return False


def run_test(
    built: Path,
    test: TestDescriptor,
    provider: IsolationProvider,
    needs_loopback: bool = False,
) -> TestOutcome:
    """One scripted test in a fresh sandbox; spawned servers die at the end."""
    sandbox = provider.provision()
    spawned: list[subprocess.Popen] = []
    transcript: list[str] = []
    ports: dict[str, int] = {}
    measured = 0.0
    try:
        staged = sandbox.root / SUBMISSION_DIR
        shutil.copytree(built, staged)
        scratch = sandbox.root
        for index, step in enumerate(test.script):
            argv = _expand_step(step, staged, scratch, ports)
            if step.spawn:
                proc = subprocess.Popen(
                    argv,
                    cwd=scratch,
                    stdout=subprocess.DEVNULL,
                    stderr=subprocess.DEVNULL,
                )
                spawned.append(proc)
                if step.wait_port and not _wait_for_port(
                    ports[step.wait_port], proc, test.timeout
                ):
                    transcript.append(f"[{index}] spawned server never listened")
                    return TestOutcome(test.test_id, False, None, "\n".join(transcript))
                continue
            started = time.monotonic()
            result = provider.execute(
                sandbox,
                RunRequest(
                    argv=tuple(argv),
                    stdin=step.stdin.encode(),
                    limits=RunLimits(
                        wall_seconds=test.timeout,
                        no_network=not needs_loopback,
                    ),
                ),
            )
            measured += time.monotonic() - started
            transcript.append(
                f"[{index}] exit={result.exit_code} verdict={result.verdict} "
                f"stdout={result.stdout!r}"
            )
            if result.verdict != "ok":
                return TestOutcome(test.test_id, False, None, "\n".join(transcript))
            if step.expected_exit is not None and result.exit_code != step.expected_exit:
                transcript.append(
                    f"[{index}] expected exit {step.expected_exit}"
                )
                return TestOutcome(test.test_id, False, None, "\n".join(transcript))
            if step.expected_output is not None:
                got = normalize_output(result.stdout)
                want = normalize_output(step.expected_output)
                if got != want:
                    transcript.append(f"[{index}] expected output {want!r}")
                    return TestOutcome(test.test_id, False, None, "\n".join(transcript))
        measure: Fraction | None = None
        if test.measure == "wall-time":
            measure = Fraction(measured).limit_denominator(10**6)
        elif test.measure == "output-bytes":
            target = scratch / test.measure_path
            if not target.exists():
                transcript.append("measured file missing")
                return TestOutcome(test.test_id, False, None, "\n".join(transcript))
            measure = Fraction(target.stat().st_size)
        return TestOutcome(test.test_id, True, measure, "\n".join(transcript))
    finally:
        for proc in spawned:
            if proc.poll() is None:
                proc.terminate()
                try:
                    proc.wait(timeout=5)
                except subprocess.TimeoutExpired:
                    proc.kill()
                    proc.wait()
        provider.destroy(sandbox)


def run_performance_test(
    built: Path,
    test: TestDescriptor,
    provider: IsolationProvider,
    needs_loopback: bool = False,
) -> TestOutcome:
    """Median of `repetitions` runs; fails if any repetition fails."""
    outcomes = [
        run_test(built, test, provider, needs_loopback)
        for _ in range(max(1, test.repetitions))
    ]
    if not all(o.passed and o.measure is not None for o in outcomes):
        failed = next(o for o in outcomes if not o.passed)
        return failed
    median = statistics.median(sorted(o.measure for o in outcomes))
    return TestOutcome(test.test_id, True, Fraction(median), outcomes[0].transcript)


def evaluate_submission(
    bundle: Path,
    problem: ProblemDescriptor,
    provider: IsolationProvider,
    build_timeout: float = BUILD_TIMEOUT,
) -> ShipEvidence:
    build = run_build(bundle, problem, provider, build_timeout)
    if not build.ok:
        return ShipEvidence(qualified=False, build_log=build.log)
    built = Path(str(bundle) + ".built")
    evidence = ShipEvidence(qualified=True, build_log=build.log)
    for test in problem.mandatory_tests + problem.optional_tests:
        outcome = run_test(built, test, provider, problem.needs_loopback)
        kind = "mandatory" if test in problem.mandatory_tests else "optional"
        evidence.correctness.append(
            CorrectnessOutcome(test.test_id, kind, outcome.passed)
        )
        evidence.transcripts[test.test_id] = outcome.transcript
        if kind == "mandatory" and not outcome.passed:
            evidence.qualified = False
    for test in problem.performance_tests:
        outcome = run_performance_test(built, test, provider, problem.needs_loopback)
        evidence.transcripts[test.test_id] = outcome.transcript
        if outcome.passed and outcome.measure is not None:
            evidence.performance.append(
                PerformanceOutcome(test.test_id, outcome.measure, test.measure)
            )
    return evidence
