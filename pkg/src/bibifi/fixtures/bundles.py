"""Submission-bundle builders for oracles and fixture targets.

A bundle is the unit the contest ingests: a directory whose executable
`build` script produces the problem's binaries at the bundle root.  The
wrappers written here resolve their implementation relative to themselves,
so a bundle keeps working after being copied into a sandbox.
"""

from __future__ import annotations

import importlib.util
import shutil
import subprocess
import sys
from pathlib import Path

from ..targets import Target

PROBLEM_BINARIES = {
    "securelog": ("logappend", "logread"),
    "atm": ("atm", "bank"),
    "ehr": ("server",),
}

# binary name -> (module run with python -m, fixed leading args)
ORACLE_COMMANDS = {
    "logappend": ("bibifi.securelog.cli", ("append",)),
    "logread": ("bibifi.securelog.cli", ("read",)),
    "atm": ("bibifi.atm.cli", ("atm",)),
    "bank": ("bibifi.atm.cli", ("bank",)),
    "server": ("bibifi.ehr.cli", ("server",)),
}

# fixture name -> (problem, target module, binary -> leading args)
FIXTURES = {
    "securelog-plaintext": (
        "securelog",
        "securelog_plaintext",
        {"logappend": ("append",), "logread": ("read",)},
    ),
    "securelog-per-record": (
        "securelog",
        "securelog_per_record",
        {"logappend": ("append",), "logread": ("read",)},
    ),
    "securelog-truncated-token": (
        "securelog",
        "securelog_truncated_token",
        {"logappend": ("append",), "logread": ("read",)},
    ),
    "securelog-wrongsort": (
        "securelog",
        "securelog_wrongsort",
        {"logappend": ("append",), "logread": ("read",)},
    ),
    "securelog-crashy": (
        "securelog",
        "securelog_crashy",
        {"logappend": ("append",), "logread": ("read",)},
    ),
    "atm-nonce-free": ("atm", "atm_nonce_free", {"atm": ("atm",), "bank": ("bank",)}),
    "atm-plaintext": ("atm", "atm_plaintext", {"atm": ("atm",), "bank": ("bank",)}),
    "ehr-chain-unchecked": ("ehr", "ehr_chain_unchecked", {"server": ()}),
    "ehr-hardcoded-password": ("ehr", "ehr_hardcoded_password", {"server": ()}),
    "ehr-crashy": ("ehr", "ehr_crashy", {"server": ()}),
    "ehr-no-delegate-check": ("ehr", "ehr_no_delegate_check", {"server": ()}),
}


class BundleError(RuntimeError):
    pass


def _wrapper(command: list[str]) -> str:
    quoted = " ".join(f'"{part}"' for part in command)
    return f'#!/bin/sh\nexec {quoted} "$@"\n'


def _write_build_script(root: Path, wrappers: dict[str, str]) -> None:
    lines = ["#!/bin/sh", "set -e", 'cd "$(dirname "$0")"']
    for name, content in wrappers.items():
        lines.append(f"cat > {name} <<'WRAPPER_EOF'")
        lines.append(content.rstrip("\n"))
        lines.append("WRAPPER_EOF")
        lines.append(f"chmod +x {name}")
    lines.append("exit 0")
    build = root / "build"
    build.write_text("\n".join(lines) + "\n")
    build.chmod(0o755)


def write_oracle_bundle(problem: str, dest: Path) -> Path:
    """The reference implementation, packaged like any other submission."""
    if problem not in PROBLEM_BINARIES:
        raise BundleError(f"unknown problem {problem!r}")
    dest.mkdir(parents=True, exist_ok=True)
    wrappers = {}
    for binary in PROBLEM_BINARIES[problem]:
        module, leading = ORACLE_COMMANDS[binary]
        command = [sys.executable, "-m", module, *leading]
        wrappers[binary] = _wrapper(command)
    _write_build_script(dest, wrappers)
    return dest

def write_fixture_bundle(name: str, dest: Path) -> Path:
    """One of the deliberately vulnerable targets, as a submission bundle."""
    if name not in FIXTURES:
        raise BundleError(f"unknown fixture {name!r}")
    _, module_name, binaries = FIXTURES[name]
    # find_spec, not import: fixture modules patch interpreter internals at
    # import time, which must only ever happen inside their own process
    spec = importlib.util.find_spec(f"bibifi.fixtures.targets.{module_name}")
    if spec is None or spec.origin is None:
        raise BundleError(f"fixture module {module_name!r} not found")
    source = Path(spec.origin)
    impl = dest / "impl"
    impl.mkdir(parents=True, exist_ok=True)
    shutil.copy(source, impl / source.name)
    wrappers = {}
    for binary, leading in binaries.items():
        args = "".join(f' "{a}"' for a in leading)
        wrappers[binary] = (
            '#!/bin/sh\nhere="$(cd "$(dirname "$0")" && pwd)"\n'
            f'exec "{sys.executable}" "$here/impl/{source.name}"{args} "$@"\n'
        )
    _write_build_script(dest, wrappers)
    return dest


def build_bundle(root: Path, timeout: float = 60.0) -> Target:
    """Run a bundle's build script in place and return the built target."""
    build = root / "build"
    if not build.exists():
        raise BundleError(f"bundle {root} has no build script")
    proc = subprocess.run(
        [str(build)], cwd=str(root), capture_output=True, timeout=timeout
    )
    if proc.returncode != 0:
        raise BundleError(
            f"build failed ({proc.returncode}): {proc.stderr.decode(errors='replace')}"
        )
    return Target(root=root, name=root.name)


def built_oracle(problem: str, dest: Path) -> Target:
    return build_bundle(write_oracle_bundle(problem, dest))


def built_fixture(name: str, dest: Path) -> Target:
    return build_bundle(write_fixture_bundle(name, dest))
