"""Isolation providers: where untrusted submission code actually runs.

The provider contract is small: provision a sandbox, execute requests in
it, destroy it.  Two runs never share a sandbox, so they never share
mutable state.  The desk-scale provider below is a local subprocess jail:
fresh directory per sandbox, resource limits, wall-clock timeout, and a
network namespace (when the kernel allows) for no-network runs.  Container
or VM backends implement the same three methods.
"""

from __future__ import annotations

import os
import resource
import shutil
import subprocess
import tempfile
import time
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_CPU_SECONDS = 30
DEFAULT_WALL_SECONDS = 30.0
DEFAULT_MEMORY_BYTES = 1 << 30

VERDICT_OK = "ok"
VERDICT_TIMEOUT = "timeout"
VERDICT_CRASHED = "crashed"
VERDICT_RESOURCE = "resource-exceeded"


class SandboxFault(RuntimeError):
    """The sandbox machinery itself failed; distinct from a failing test."""


@dataclass(frozen=True)
class RunLimits:
    cpu_seconds: int = DEFAULT_CPU_SECONDS
    wall_seconds: float = DEFAULT_WALL_SECONDS
    memory_bytes: int = DEFAULT_MEMORY_BYTES
    no_network: bool = True


@dataclass(frozen=True)
class RunRequest:
    argv: tuple[str, ...]
    stdin: bytes = b""
    env: dict[str, str] = field(default_factory=dict)
    limits: RunLimits = field(default_factory=RunLimits)


@dataclass(frozen=True)
class RunResult:
    exit_code: int
    stdout: str
    stderr: str
    wall_time: float
    verdict: str  # ok | timeout | crashed | resource-exceeded

    @property
    def ok(self) -> bool:
        return self.verdict == VERDICT_OK


@dataclass
class Sandbox:
    sandbox_id: str
    root: Path
    destroyed: bool = False


class IsolationProvider(ABC):
    @abstractmethod
    def provision(self) -> Sandbox: ...

    @abstractmethod
    def execute(self, sandbox: Sandbox, request: RunRequest) -> RunResult: ...

    @abstractmethod
    def destroy(self, sandbox: Sandbox) -> None: ...


def _unshare_available() -> bool:
    try:
        probe = subprocess.run(
            ["unshare", "-n", "true"], capture_output=True, timeout=5.0
        )
    except (OSError, subprocess.TimeoutExpired):
        return False
    return probe.returncode == 0


class LocalSandboxProvider(IsolationProvider):
    """Subprocess jail: fresh directory, rlimits, optional network namespace.

    `drop_privileges` switches the child to `nobody` (when running as root),
    which turns writes outside the world-writable sandbox into EACCES.  It
    is off by default because test fixtures live in root-owned trees that
    `nobody` cannot read.
    """

    def __init__(self, base_dir: Path | None = None, drop_privileges: bool = False):
        self._base = Path(base_dir) if base_dir else Path(tempfile.gettempdir())
        self._base.mkdir(parents=True, exist_ok=True)
        self.drop_privileges = drop_privileges
        self._netns = _unshare_available()
        self._live: set[str] = set()

    @property
    def supports_network_isolation(self) -> bool:
        return self._netns

    def provision(self) -> Sandbox:
        sandbox_id = uuid.uuid4().hex[:12]
        root = Path(tempfile.mkdtemp(prefix=f"sbx-{sandbox_id}-", dir=self._base))
        if self.drop_privileges:
            root.chmod(0o777)
        self._live.add(sandbox_id)
        return Sandbox(sandbox_id=sandbox_id, root=root)

    def execute(self, sandbox: Sandbox, request: RunRequest) -> RunResult:
        if sandbox.destroyed or sandbox.sandbox_id not in self._live:
            raise SandboxFault("sandbox already destroyed")
        argv = [str(a) for a in request.argv]
        if request.limits.no_network and self._netns:
            argv = ["unshare", "-n", *argv]
        limits = request.limits

        def apply_limits() -> None:
            resource.setrlimit(
                resource.RLIMIT_CPU, (limits.cpu_seconds, limits.cpu_seconds + 1)
            )
            resource.setrlimit(
                resource.RLIMIT_AS, (limits.memory_bytes, limits.memory_bytes)
            )
            resource.setrlimit(resource.RLIMIT_CORE, (0, 0))
            if self.drop_privileges and os.geteuid() == 0:
                os.setgid(65534)
                os.setuid(65534)

        env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "HOME": str(sandbox.root),
            "LANG": "C.UTF-8",
            **request.env,
        }
        started = time.monotonic()
        try:
            proc = subprocess.run(
                argv,
                input=request.stdin,
                capture_output=True,
                cwd=sandbox.root,
                env=env,
                timeout=limits.wall_seconds,
                preexec_fn=apply_limits,
            )
        except subprocess.TimeoutExpired as exc:
            return RunResult(
                exit_code=-1,
                stdout=(exc.stdout or b"").decode(errors="replace"),
                stderr=(exc.stderr or b"").decode(errors="replace"),
                wall_time=time.monotonic() - started,
                verdict=VERDICT_TIMEOUT,
            )
        except OSError as exc:
            raise SandboxFault(f"could not execute {argv[0]}: {exc}") from exc
        wall = time.monotonic() - started
        if proc.returncode < 0:
            signal = -proc.returncode
            verdict = VERDICT_RESOURCE if signal in (9, 24, 25) else VERDICT_CRASHED
        else:
            verdict = VERDICT_OK
        return RunResult(
            exit_code=proc.returncode,
            stdout=proc.stdout.decode(errors="replace"),
            stderr=proc.stderr.decode(errors="replace"),
            wall_time=wall,
            verdict=verdict,
        )

    def destroy(self, sandbox: Sandbox) -> None:
        if sandbox.destroyed:
            return
        sandbox.destroyed = True
        self._live.discard(sandbox.sandbox_id)
        shutil.rmtree(sandbox.root, ignore_errors=True)

    @property
    def live_sandboxes(self) -> int:
        return len(self._live)
