"""Invoking contest binaries (targets and oracles) as child processes.

A target is a built submission bundle: a directory whose `build` step left
executables at known relative paths.  Judges call those executables through
`run_target`, which enforces a wall-clock timeout and reports signal deaths
separately from ordinary failures (signal deaths are what the crash category
is about).
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from pathlib import Path


class TargetError(RuntimeError):
    """The target bundle is missing a declared binary."""


@dataclass(frozen=True)
class Target:
    """A built submission bundle rooted at `root`."""

    root: Path
    name: str = ""

    def binary(self, name: str) -> Path:
        path = self.root / name
        if not path.exists():
            raise TargetError(f"bundle {self.root} has no binary {name!r}")
        return path


@dataclass(frozen=True)
class Completed:
    exit_code: int
    stdout: str
    stderr: str
    timed_out: bool = False
    signal: int | None = None  # set when killed by a signal

    @property
    def crashed(self) -> bool:
        return self.signal is not None


def run_target(
    argv: list[str | Path],
    *,
    stdin: bytes = b"",
    timeout: float = 10.0,
    cwd: Path | None = None,
) -> Completed:
    try:
        proc = subprocess.run(
            [str(a) for a in argv],
            input=stdin,
            capture_output=True,
            timeout=timeout,
            cwd=str(cwd) if cwd else None,
        )
    except subprocess.TimeoutExpired as exc:
        return Completed(
            exit_code=-1,
            stdout=(exc.stdout or b"").decode(errors="replace"),
            stderr=(exc.stderr or b"").decode(errors="replace"),
            timed_out=True,
        )
    signal = -proc.returncode if proc.returncode < 0 else None
    return Completed(
        exit_code=proc.returncode,
        stdout=proc.stdout.decode(errors="replace"),
        stderr=proc.stderr.decode(errors="replace"),
        signal=signal,
    )


def normalize_output(text: str) -> str:
    """Correctness comparisons are byte-exact except for trailing newlines."""
    return text.rstrip("\n")
