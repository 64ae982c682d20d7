"""Problem descriptors: what each contest problem requires of a submission.

A test script is an ordered list of steps.  Plain steps run a process and
may pin its expected exit code and (normalized) output; spawn steps start a
long-running server that is killed when the script ends.  Placeholders are
substituted at run time:

    {bin:NAME}    a binary the submission's build produced
    {tool:NAME}   a harness-provided helper (the data-server test client)
    {port:NAME}   a port allocated for this test run
    {dir}         the scratch directory (also the working directory)
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from ..scoring import SUBMISSION_LIMITS


@dataclass(frozen=True)
class Step:
    argv: tuple[str, ...]
    stdin: str = ""
    expected_output: str | None = None  # None: don't compare
    expected_exit: int | None = 0  # None: don't compare
    spawn: bool = False
    wait_port: str | None = None  # with spawn: poll this port until it opens


@dataclass(frozen=True)
class TestDescriptor:
    test_id: str
    kind: str  # "correctness" | "performance"
    script: tuple[Step, ...]
    timeout: float = 30.0
    measure: str = "none"  # none | wall-time | output-bytes
    measure_path: str | None = None  # for output-bytes
    repetitions: int = 3  # performance runs take the median

    def __post_init__(self) -> None:
        if self.kind not in ("correctness", "performance"):
            raise ValueError(f"bad test kind {self.kind!r}")
        if self.kind == "performance" and self.measure == "none":
            raise ValueError("performance tests must declare a measure")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class ProblemDescriptor:
    problem_id: str
    binaries: tuple[str, ...]
    mandatory_tests: tuple[TestDescriptor, ...]
    optional_tests: tuple[TestDescriptor, ...]
    performance_tests: tuple[TestDescriptor, ...]
    break_categories: frozenset[str]
    limits: dict = field(default_factory=dict)
    needs_loopback: bool = False

    def __post_init__(self) -> None:
        ids = [t.test_id for t in self.all_tests()]
        if len(ids) != len(set(ids)):
            raise ValueError("test ids must be unique")
        if not self.mandatory_tests:
            raise ValueError("at least one mandatory test required")

    def all_tests(self) -> tuple[TestDescriptor, ...]:
        return self.mandatory_tests + self.optional_tests + self.performance_tests


TOOLS = {
    "ehr-client": (sys.executable, "-m", "bibifi.ehr.cli", "client"),
}


def _securelog() -> ProblemDescriptor:
    append = "{bin:logappend}"
    read = "{bin:logread}"
    four_appends = (
        Step((append, "-T", "1", "-K", "secret", "-A", "-G", "Fred", "log1")),
        Step((append, "-T", "2", "-K", "secret", "-A", "-G", "Jill", "log1")),
        Step((append, "-T", "3", "-K", "secret", "-A", "-G", "Fred", "-R", "1", "log1")),
        Step((append, "-T", "4", "-K", "secret", "-A", "-G", "Jill", "-R", "1", "log1")),
    )
    mandatory = (
        TestDescriptor(
            "m-state-query",
            "correctness",
            four_appends
            + (
                Step(
                    (read, "-K", "secret", "-S", "log1"),
                    expected_output="Fred\nJill\n1: Fred,Jill",
                ),
                # employees must list before guests
                Step((append, "-T", "5", "-K", "secret", "-A", "-E", "Zoe", "log1")),
                Step(
                    (read, "-K", "secret", "-S", "log1"),
                    expected_output="Zoe\nFred\nJill\n1: Fred,Jill",
                ),
            ),
        ),
        TestDescriptor(
            "m-history-query",
            "correctness",
            four_appends
            + (
                Step(
                    (read, "-K", "secret", "-R", "-G", "Fred", "log1"),
                    expected_output="1",
                ),
            ),
        ),
        TestDescriptor(
            "m-wrong-token-rejected",
            "correctness",
            four_appends
            + (
                Step(
                    (append, "-T", "9", "-K", "wrong", "-A", "-G", "Eve", "log1"),
                    expected_output="invalid",
                    expected_exit=255,
                ),
                Step(
                    (read, "-K", "wrong", "-S", "log1"),
                    expected_output="integrity violation",
                    expected_exit=255,
                ),
                Step(
                    (read, "-K", "secret", "-S", "log1"),
                    expected_output="Fred\nJill\n1: Fred,Jill",
                ),
            ),
        ),
        TestDescriptor(
            "m-semantic-rules",
            "correctness",
            (
                Step(
                    (append, "-T", "1", "-K", "k1", "-L", "-G", "Ann", "log2"),
                    expected_output="invalid",
                    expected_exit=255,
                ),
                Step((append, "-T", "1", "-K", "k1", "-A", "-G", "Ann", "log2")),
                Step(
                    (append, "-T", "1", "-K", "k1", "-A", "-G", "Bob", "log2"),
                    expected_output="invalid",
                    expected_exit=255,
                ),
                Step(
                    (append, "-T", "2", "-K", "k1", "-L", "-G", "Ann", "-R", "4", "log2"),
                    expected_output="invalid",
                    expected_exit=255,
                ),
            ),
        ),
    )
    optional = (
        TestDescriptor(
            "o-total-time",
            "correctness",
            (
                Step((append, "-T", "1", "-K", "k2", "-A", "-E", "Ann", "log3")),
                Step((append, "-T", "5", "-K", "k2", "-L", "-E", "Ann", "log3")),
                Step(
                    (read, "-K", "k2", "-T", "-E", "Ann", "log3"),
                    expected_output="4",
                ),
            ),
        ),
        TestDescriptor(
            "o-intersection",
            "correctness",
            four_appends
            + (
                Step(
                    (read, "-K", "secret", "-I", "-G", "Fred", "-G", "Jill", "log1"),
                    expected_output="1",
                ),
            ),
        ),
    )
    burst = tuple(
        Step(
            (append, "-T", str(i + 1), "-K", "perfkey", "-A", "-G", f"Guest{i}", "perf.log"),
            expected_exit=None,
        )
        for i in range(24)
    )
    performance = (
        TestDescriptor(
            "p-append-burst",
            "performance",
            burst,
            measure="wall-time",
            timeout=120.0,
        ),
        TestDescriptor(
            "p-log-size",
            "performance",
            burst,
            measure="output-bytes",
            measure_path="perf.log",
            timeout=120.0,
        ),
    )
    return ProblemDescriptor(
        problem_id="securelog",
        binaries=("logappend", "logread"),
        mandatory_tests=mandatory,
        optional_tests=optional,
        performance_tests=performance,
        break_categories=frozenset(
            ["correctness", "crash", "privacy", "integrity"]
        ),
        limits=dict(SUBMISSION_LIMITS["securelog"]),
    )


def _atm() -> ProblemDescriptor:
    bank_spawn = Step(
        ("{bin:bank}", "-p", "{port:bank}", "-s", "{dir}/bank.auth"),
        spawn=True,
        wait_port="bank",
    )
    atm = (
        "{bin:atm}", "-s", "{dir}/bank.auth", "-p", "{port:bank}",
    )
    mandatory = (
        TestDescriptor(
            "m-create-account",
            "correctness",
            (
                bank_spawn,
                Step(
                    atm + ("-c", "bob.card", "-a", "bob", "-n", "1000.00"),
                    expected_output='{"account":"bob","initial_balance":1000}',
                ),
            ),
        ),
        TestDescriptor(
            "m-transaction-cycle",
            "correctness",
            (
                bank_spawn,
                Step(
                    atm + ("-c", "bob.card", "-a", "bob", "-n", "1000.00"),
                    expected_output='{"account":"bob","initial_balance":1000}',
                ),
                Step(
                    atm + ("-c", "bob.card", "-a", "bob", "-w", "63.10"),
                    expected_output='{"account":"bob","withdraw":63.1}',
                ),
                Step(
                    atm + ("-c", "bob.card", "-a", "bob", "-d", "0.40"),
                    expected_output='{"account":"bob","deposit":0.4}',
                ),
                Step(
                    atm + ("-c", "bob.card", "-a", "bob", "-g"),
                    expected_output='{"account":"bob","balance":937.3}',
                ),
            ),
        ),
        TestDescriptor(
            "m-overdraft-refused",
            "correctness",
            (
                bank_spawn,
                Step(
                    atm + ("-c", "al.card", "-a", "al", "-n", "10.00"),
                    expected_output='{"account":"al","initial_balance":10}',
                ),
                Step(
                    atm + ("-c", "al.card", "-a", "al", "-w", "10.01"),
                    expected_output="",
                    expected_exit=255,
                ),
                Step(
                    atm + ("-c", "al.card", "-a", "al", "-g"),
                    expected_output='{"account":"al","balance":10}',
                ),
            ),
        ),
        TestDescriptor(
            "m-duplicate-account-refused",
            "correctness",
            (
                bank_spawn,
                Step(
                    atm + ("-c", "a.card", "-a", "acct", "-n", "5.00"),
                    expected_exit=0,
                ),
                Step(
                    atm + ("-c", "b.card", "-a", "acct", "-n", "5.00"),
                    expected_output="",
                    expected_exit=255,
                ),
            ),
        ),
    )
    steps = [bank_spawn]
    for i in range(8):
        name = f"u{i % 4}"
        card = f"{name}.card"
        if i < 4:
            steps.append(
                Step(atm + ("-c", card, "-a", name, "-n", "100.00"), expected_exit=None)
            )
        else:
            steps.append(
                Step(atm + ("-c", card, "-a", name, "-d", "1.25"), expected_exit=None)
            )
    performance = (
        TestDescriptor(
            "p-transaction-burst",
            "performance",
            tuple(steps),
            measure="wall-time",
            timeout=120.0,
        ),
    )
    return ProblemDescriptor(
        problem_id="atm",
        binaries=("atm", "bank"),
        mandatory_tests=mandatory,
        optional_tests=(),
        performance_tests=performance,
        break_categories=frozenset(
            ["correctness", "crash", "privacy", "integrity"]
        ),
        limits=dict(SUBMISSION_LIMITS["atm"]),
        needs_loopback=True,
    )


EHR_LISTING = (
    'as principal admin password "admin" do\n'
    '   create principal alice "alices_password"\n'
    '   set msg = "Hi Alice. Good luck!"\n'
    "   set delegation msg admin read -> alice\n"
    '   return "success"\n***\n'
)

EHR_LISTING_REPLY = (
    '{"status":"CREATE_PRINCIPAL"}\n'
    '{"status":"SET"}\n'
    '{"status":"SET_DELEGATION"}\n'
    '{"status":"RETURNING","output":"success"}'
)


def _ehr() -> ProblemDescriptor:
    server_spawn = Step(
        ("{bin:server}", "{port:server}"), spawn=True, wait_port="server"
    )
    client = TOOLS["ehr-client"] + ("{port:server}",)
    mandatory = (
        TestDescriptor(
            "m-listing",
            "correctness",
            (
                server_spawn,
                Step(client, stdin=EHR_LISTING, expected_output=EHR_LISTING_REPLY),
                Step(
                    client,
                    stdin='as principal alice password "alices_password" do\n'
                    "   return msg\n***\n",
                    expected_output='{"status":"RETURNING","output":"Hi Alice. Good luck!"}',
                ),
            ),
        ),
        TestDescriptor(
            "m-denied-read",
            "correctness",
            (
                server_spawn,
                Step(
                    client,
                    stdin='as principal admin password "admin" do\n'
                    '   create principal bob "bobs_password"\n'
                    '   set secret = "Super secret"\n'
                    '   return "success"\n***\n',
                    expected_output='{"status":"CREATE_PRINCIPAL"}\n'
                    '{"status":"SET"}\n'
                    '{"status":"RETURNING","output":"success"}',
                ),
                Step(
                    client,
                    stdin='as principal bob password "bobs_password" do\n'
                    "   return secret\n***\n",
                    expected_output='{"status":"DENIED"}',
                ),
            ),
        ),
        TestDescriptor(
            "m-rollback",
            "correctness",
            (
                server_spawn,
                Step(
                    client,
                    stdin='as principal admin password "admin" do\n'
                    '   set kept = "original"\n   return kept\n***\n',
                    expected_output='{"status":"SET"}\n'
                    '{"status":"RETURNING","output":"original"}',
                ),
                Step(
                    client,
                    stdin='as principal admin password "admin" do\n'
                    '   set kept = "clobbered"\n   return missing\n***\n',
                    expected_output='{"status":"FAILED"}',
                ),
                Step(
                    client,
                    stdin='as principal admin password "admin" do\n'
                    "   return kept\n***\n",
                    expected_output='{"status":"RETURNING","output":"original"}',
                ),
            ),
        ),
    )
    optional = (
        TestDescriptor(
            "o-lists-and-records",
            "correctness",
            (
                server_spawn,
                Step(
                    client,
                    stdin='as principal admin password "admin" do\n'
                    "   set xs = []\n"
                    '   append to xs with "a"\n'
                    '   append to xs with {f = "b"}\n'
                    "   foreach y in xs replacewith y\n"
                    "   return xs\n***\n",
                    expected_output='{"status":"SET"}\n'
                    '{"status":"APPEND"}\n'
                    '{"status":"APPEND"}\n'
                    '{"status":"FOREACH"}\n'
                    '{"status":"RETURNING","output":["a",{"f":"b"}]}',
                ),
            ),
        ),
    )
    batch = [server_spawn]
    for i in range(10):
        batch.append(
            Step(
                client,
                stdin=f'as principal admin password "admin" do\n'
                f'   set v{i} = "payload {i}"\n   return v{i}\n***\n',
                expected_exit=None,
            )
        )
    performance = (
        TestDescriptor(
            "p-program-batch",
            "performance",
            tuple(batch),
            measure="wall-time",
            timeout=120.0,
        ),
    )
    return ProblemDescriptor(
        problem_id="ehr",
        binaries=("server",),
        mandatory_tests=mandatory,
        optional_tests=optional,
        performance_tests=performance,
        break_categories=frozenset(
            ["correctness", "crash", "privacy", "integrity", "availability"]
        ),
        limits=dict(SUBMISSION_LIMITS["ehr"]),
        needs_loopback=True,
    )


_PROBLEMS = {"securelog": _securelog, "atm": _atm, "ehr": _ehr}


def problem_descriptor(problem_id: str) -> ProblemDescriptor:
    if problem_id not in _PROBLEMS:
        raise KeyError(f"unknown problem {problem_id!r}")
    return _PROBLEMS[problem_id]()
