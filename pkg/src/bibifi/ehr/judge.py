"""Security-break classification for the data server.

The same program sequence runs on the reference (in process) and on the
target (its real server binary over TCP).  The first diverging program
decides the verdict:

  oracle DENIED a read, target answered        -> privacy
  oracle DENIED a mutation, target proceeded   -> integrity
  oracle succeeded, target errored or hung     -> availability
  anything else that differs                   -> correctness
  no divergence                                -> rejected
"""

from __future__ import annotations

import socket
import subprocess
import time
from dataclasses import dataclass, field
from tempfile import TemporaryDirectory

from ..targets import Target
from . import interp, parser, server, syntax

PRIVACY = "privacy"
INTEGRITY = "integrity"
AVAILABILITY = "availability"
CORRECTNESS = "correctness"
CONFIRMED = "confirmed"
REJECTED = "rejected"


@dataclass
class ProgramTrace:
    lines: list[str] = field(default_factory=list)
    error: str | None = None  # "timeout" | "dropped"
    denied_kind: str | None = None  # oracle side only
    mutating: bool = False  # program contains non-read commands
    state_digest: str | None = None  # oracle side only


@dataclass(frozen=True)
class BreakVerdict:
    verdict: str  # confirmed | rejected
    category: str | None = None
    detail: str = ""
    program_index: int | None = None


def oracle_traces(programs: list[str], admin_password: str) -> list[ProgramTrace]:
    """Run the sequence on a fresh in-process reference server."""
    state = interp.ServerState.fresh(admin_password)
    traces = []
    for text in programs:
        try:
            program = parser.parse_program(text)
        except parser.ParseError:
            program = None
        if program is None:
            result = interp.failed_result(state)
            mutating = False
        else:
            result = interp.execute_program(state, program)
            mutating = any(
                not isinstance(c, syntax.Local) for c in program.commands
            ) or isinstance(program.terminator, syntax.Exit)
            if result.ok:
                state = result.state
        traces.append(
            ProgramTrace(
                lines=[interp.render_status(s) for s in result.statuses],
                denied_kind=result.denied_kind,
                mutating=mutating,
                state_digest=state.digest(),
            )
        )
    return traces


def free_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


class TargetServer:
    """A target's server binary running as a child process."""

    def __init__(self, target: Target, admin_password: str, timeout: float = 10.0):
        self.target = target
        self.admin_password = admin_password
        self.timeout = timeout
        self.port = free_port()
        self.proc: subprocess.Popen | None = None
        self._workdir = TemporaryDirectory(prefix="ehr-target-")

    def __enter__(self) -> "TargetServer":
        self.proc = subprocess.Popen(
            [str(self.target.binary("server")), str(self.port), self.admin_password],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
            cwd=self._workdir.name,
        )
        deadline = time.monotonic() + self.timeout
        while time.monotonic() < deadline:
            if self.proc.poll() is not None:
                raise OSError("target server exited during startup")
            try:
                with socket.create_connection(("127.0.0.1", self.port), timeout=0.2):
                    return self
            except OSError:
                time.sleep(0.02)
        raise OSError("target server never came up")

    def __exit__(self, *exc) -> None:
        if self.proc and self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
        self._workdir.cleanup()

    def run(self, text: str) -> ProgramTrace:
        try:
            lines = server.send_program("127.0.0.1", self.port, text, self.timeout)
            return ProgramTrace(lines=lines)
        except TimeoutError:
            return ProgramTrace(error="timeout")
        except OSError:
            return ProgramTrace(error="dropped")


def target_traces(
    target: Target, programs: list[str], admin_password: str, timeout: float = 10.0
) -> list[ProgramTrace]:
    traces: list[ProgramTrace] = []
    with TargetServer(target, admin_password, timeout) as running:
        for text in programs:
            if running.proc is not None and running.proc.poll() is not None:
                traces.append(ProgramTrace(error="dropped"))
                continue
            traces.append(running.run(text))
    return traces


def _succeeded(trace: ProgramTrace) -> bool:
    if trace.error is not None or not trace.lines:
        return False
    last = trace.lines[-1]
    return last.startswith('{"status":"RETURNING"') or last == '{"status":"EXITING"}'


def _errored(trace: ProgramTrace) -> bool:
    return trace.error is not None or trace.lines in (
        [],
        ['{"status":"DENIED"}'],
        ['{"status":"FAILED"}'],
    )


def judge_break(
    oracle_run: list[ProgramTrace],
    target_run: list[ProgramTrace],
    category_claim: str | None = None,
) -> BreakVerdict:
    """Classify the first divergence between the two runs.

    The confirmed category is the judge's own; the breaker's claim is
    recorded upstream but never trusted.
    """
    for index, (oracle_t, target_t) in enumerate(zip(oracle_run, target_run)):
        if oracle_t.lines == target_t.lines and target_t.error is None:
            continue
        oracle_denied = oracle_t.lines == ['{"status":"DENIED"}']
        if oracle_denied and _succeeded(target_t):
            if oracle_t.denied_kind == "read":
                category = PRIVACY
            elif oracle_t.denied_kind == "auth":
                category = INTEGRITY if oracle_t.mutating else PRIVACY
            else:
                category = INTEGRITY
            return BreakVerdict(
                CONFIRMED,
                category,
                f"reference denied program {index}, target ran it",
                index,
            )
        if _succeeded(oracle_t) and _errored(target_t):
            return BreakVerdict(
                CONFIRMED,
                AVAILABILITY,
                f"reference ran program {index}, target {target_t.error or 'errored'}",
                index,
            )
        return BreakVerdict(
            CONFIRMED,
            CORRECTNESS,
            f"outputs diverge at program {index}",
            index,
        )
    if len(target_run) != len(oracle_run):
        return BreakVerdict(CONFIRMED, AVAILABILITY, "target run ended early")
    return BreakVerdict(REJECTED, None, "traces identical")


def adjudicate_security(
    target: Target,
    programs: list[str],
    admin_password: str = "correcthorse",
    timeout: float = 10.0,
) -> BreakVerdict:
    """End-to-end: run both sides and classify."""
    oracle_run = oracle_traces(programs, admin_password)
    target_run = target_traces(target, programs, admin_password, timeout)
    return judge_break(oracle_run, target_run)
