"""Breaker-side payload construction against the fixture targets.

These functions play the break-it role: they look at what a vulnerable
target leaks (files, wire bytes) and produce the payloads a breaker would
submit.  They are used to prove the judges complete (flawed targets get
caught) while the same judges stay sound (the reference never does).
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import TemporaryDirectory

from ..securelog import challenges, cli, sealed, state
from ..targets import Target, run_target


def read_plaintext_state(log_bytes: bytes) -> str:
    """Attack on the plaintext fixture: just read the file."""
    doc = json.loads(log_bytes)
    events = [state.LogEvent.from_wire(e) for e in doc["events"]]
    return cli.answer_query(events, "-S", [])


def brute_force_truncated_state(log_bytes: bytes) -> str | None:
    """Attack on the truncated-token fixture: the effective keyspace is one
    character, so try every token of length one."""
    for ch in string.ascii_letters + string.digits:
        try:
            events, _ = sealed.unseal(log_bytes, ch)
        except sealed.IntegrityViolation:
            continue
        return cli.answer_query(events, "-S", [])
    return None


PER_RECORD_TRANSCRIPT = [
    ["-T", "1", "-A", "-G", "Alice"],
    ["-T", "2", "-A", "-G", "Alice", "-R", "1"],
    ["-T", "3", "-L", "-G", "Alice", "-R", "1"],
    ["-T", "4", "-A", "-G", "Alice", "-R", "2"],
    ["-T", "5", "-L", "-G", "Alice", "-R", "2"],
]


def per_record_swap_break(target: Target, token: str = "swapbreak") -> dict:
    """Attack on the per-record fixture: swap the room-1 visit with the
    room-2 visit, rewriting the visit order without touching any seal."""
    with TemporaryDirectory(prefix="swap-") as tmp:
        path = Path(tmp) / "logfile"
        for argv in PER_RECORD_TRANSCRIPT:
            result = run_target(
                [target.binary("logappend"), "-K", token, *argv, str(path)]
            )
            if result.exit_code != 0:
                raise RuntimeError(f"fixture logappend failed: {result.stdout!r}")
        log = path.read_bytes()
    lines = log.splitlines(keepends=True)
    # lines: salt, arrive, enter-1, exit-1, enter-2, exit-2
    corrupted = b"".join(
        [lines[0], lines[1], lines[4], lines[5], lines[2], lines[3]]
    )
    return {
        "log": log,
        "corrupted_log": corrupted,
        "token": token,
        "query": ["-R", "-G", "Alice"],
        "transcript": PER_RECORD_TRANSCRIPT,
    }


@dataclass
class FuzzReport:
    rounds: int = 0
    discrepancies: list[str] = field(default_factory=list)


def _random_command_batch(rng: random.Random):
    """A logappend sequence, mostly valid with some malformed entries."""
    token = challenges.random_token(rng)
    events = challenges.random_events(rng, rng.randint(2, 8))
    commands = []
    for event in events:
        argv = ["-K", token, *challenges.append_argv(event)]
        commands.append(argv)
    for _ in range(rng.randint(0, 2)):
        bad = rng.choice(
            [
                ["-K", token, "-T", "0", "-A", "-G", "Early"],  # stale timestamp
                ["-K", "wrongtoken", "-T", "999", "-A", "-G", "Who"],
                ["-K", token, "-T", "999", "-L", "-G", "Ghost"],  # never arrived
                ["-K", token, "-T", "x", "-A", "-G", "Bad"],
            ]
        )
        commands.insert(rng.randrange(len(commands) + 1), list(bad))
    queries = [["-K", token, "-S"]]
    for kind, name in {e.person for e in events}:
        flag = "-E" if kind == state.EMPLOYEE else "-G"
        queries.append(["-K", token, rng.choice(["-R", "-T"]), flag, name])
    return commands, queries


def _run_batch(commands, queries) -> list[tuple[int, str]]:
    outcomes = []
    with TemporaryDirectory(prefix="fuzz-") as tmp:
        path = str(Path(tmp) / "logfile")
        for argv in commands:
            outcomes.append(cli.run_logappend(argv + [path]))
        for argv in queries:
            outcomes.append(cli.run_logread(argv + [path]))
    return outcomes


def securelog_self_fuzz(rounds: int, seed: int) -> FuzzReport:
    """Differential self-test: two independent replays of the same random
    command sequence must agree on every exit code and output."""
    rng = random.Random(seed)
    report = FuzzReport()
    for index in range(rounds):
        commands, queries = _random_command_batch(rng)
        first = _run_batch(commands, queries)
        second = _run_batch(commands, queries)
        if first != second:
            report.discrepancies.append(f"round {index}: {first} != {second}")
        report.rounds += 1
    return report


# the crashy submission aborts on a state query over an emptied gallery
SECURELOG_CRASH_COMMANDS = [
    {
        "binary": "logappend",
        "args": ["-K", "crashkey", "-T", "1", "-A", "-G", "Solo", "LOGFILE"],
        "expected_exit": 0,
    },
    {
        "binary": "logappend",
        "args": ["-K", "crashkey", "-T", "2", "-L", "-G", "Solo", "LOGFILE"],
        "expected_exit": 0,
    },
    {
        "binary": "logread",
        "args": ["-K", "crashkey", "-S", "LOGFILE"],
        "expected_exit": 0,
        "expected_output": "",
    },
]


# -- data-server breaks --------------------------------------------------

CHAIN_UNCHECKED_PROGRAMS = [
    'as principal admin password "%ADMIN%" do\n'
    '   create principal alice "alicepw"\n'
    '   create principal bob "bobpw"\n'
    '   set secret = "the vault combination"\n'
    "   set delegation secret admin read -> alice\n"
    "   set delegation secret admin delegate -> alice\n"
    '   return "ok"\n***',
    'as principal alice password "alicepw" do\n'
    "   set delegation secret alice read -> bob\n"
    '   return "ok"\n***',
    'as principal admin password "%ADMIN%" do\n'
    "   delete delegation secret admin read -> alice\n"
    '   return "ok"\n***',
    'as principal bob password "bobpw" do\n   return secret\n***',
]

HARDCODED_PASSWORD_PROGRAMS = [
    'as principal admin password "admin" do\n'
    '   set pwned = "attacker was here"\n'
    '   return "ok"\n***',
]

CRASHY_FOREACH_PROGRAMS = [
    'as principal admin password "%ADMIN%" do\n'
    "   set xs = []\n"
    '   append to xs with "a"\n'
    '   append to xs with "b"\n'
    '   return "ok"\n***',
    'as principal admin password "%ADMIN%" do\n'
    "   foreach y in xs replacewith y\n"
    "   return xs\n***",
]

NO_DELEGATE_CHECK_PROGRAMS = [
    'as principal admin password "%ADMIN%" do\n'
    '   create principal alice "alicepw"\n'
    '   create principal bob "bobpw"\n'
    '   set secret = "payroll"\n'
    "   set delegation secret admin read -> alice\n"
    '   return "ok"\n***',
    'as principal alice password "alicepw" do\n'
    "   set delegation secret alice read -> bob\n"
    '   return "ok"\n***',
]


def substitute_admin(programs: list[str], admin_password: str) -> list[str]:
    """Break programs authenticate as admin via a placeholder the harness
    fills in; the breaker itself never knows the operator's password."""
    return [p.replace("%ADMIN%", admin_password) for p in programs]


EHR_PRINCIPALS = ("alice", "bob", "carol")
EHR_RIGHTS = ("read", "write", "append", "delegate")


def _ehr_random_program(rng: random.Random, admin_password: str) -> str:
    principal = rng.choice(("admin",) + EHR_PRINCIPALS)
    if principal == "admin":
        password = admin_password if rng.random() < 0.9 else "guess"
    else:
        password = f"{principal}pw" if rng.random() < 0.8 else "wrong"
    variables = [f"v{i}" for i in range(4)]
    strings = ('"red"', '"green"', '"blue"', '"x y z"')
    lines = [f'as principal {principal} password "{password}" do']
    for _ in range(rng.randint(0, 5)):
        variable = rng.choice(variables)
        other = rng.choice(variables)
        kind = rng.randrange(9)
        if kind == 0:
            lines.append(f"   set {variable} = {rng.choice(strings)}")
        elif kind == 1:
            lines.append(f"   set {variable} = []")
        elif kind == 2:
            lines.append(
                f"   set {variable} = {{f = {rng.choice(strings)}, "
                f"g = {rng.choice(strings)}}}"
            )
        elif kind == 3:
            lines.append(f"   append to {variable} with {rng.choice(strings)}")
        elif kind == 4:
            lines.append(f"   append to {variable} with {other}")
        elif kind == 5:
            issuer = rng.choice(("admin",) + EHR_PRINCIPALS)
            grantee = rng.choice(EHR_PRINCIPALS)
            right = rng.choice(EHR_RIGHTS)
            verb = rng.choice(("set", "delete"))
            target = rng.choice((variable, "all"))
            lines.append(
                f"   {verb} delegation {target} {issuer} {right} -> {grantee}"
            )
        elif kind == 6:
            lines.append(f"   local w{rng.randrange(3)} = {rng.choice(strings)}")
        elif kind == 7:
            lines.append(f"   foreach y in {variable} replacewith y")
        else:
            name = rng.choice(EHR_PRINCIPALS)
            lines.append(f'   create principal {name} "{name}pw"')
    ret = rng.randrange(4)
    if ret == 0:
        lines.append(f"   return {rng.choice(variables)}")
    elif ret == 1:
        lines.append(f"   return {rng.choice(strings)}")
    elif ret == 2:
        lines.append("   return []")
    else:
        lines.append(f"   return {{out = {rng.choice(strings)}}}")
    lines.append("***")
    text = "\n".join(lines)
    if rng.random() < 0.1:  # parser fuzz: damage the text
        cut = rng.randrange(len(text))
        text = text[:cut] + rng.choice(("^", "}", '"', "0")) + text[cut:]
    return text


def ehr_self_fuzz(programs_total: int, seed: int) -> FuzzReport:
    """Grammar-fuzzed programs replayed twice through the reference server;
    any difference in responses or state digests is a discrepancy."""
    from ..ehr import judge as ehr_judge

    rng = random.Random(seed)
    admin_password = "fuzzmaster"
    report = FuzzReport()
    while report.rounds < programs_total:
        batch = [
            _ehr_random_program(rng, admin_password)
            for _ in range(min(5, programs_total - report.rounds))
        ]
        first = ehr_judge.oracle_traces(batch, admin_password)
        second = ehr_judge.oracle_traces(batch, admin_password)
        for i, (a, b) in enumerate(zip(first, second)):
            if a.lines != b.lines or a.state_digest != b.state_digest:
                report.discrepancies.append(
                    f"program {report.rounds + i}: {a.lines} != {b.lines}"
                )
        report.rounds += len(batch)
    return report
