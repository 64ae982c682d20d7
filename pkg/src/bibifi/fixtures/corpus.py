"""The fixture payload corpus: every break the judges must understand.

`build_corpus` deterministically produces 50+ break submissions spanning
all three problems and all five categories.  Soundness gate: adjudicating
the whole corpus with the reference implementation as the target accepts
nothing.  The same payloads confirm against their matching fixture targets.
"""

from __future__ import annotations

import base64
import json
import random

from ..atm import client as atm_client
from ..atm import currency
from ..judge.adjudicate import BreakSubmission
from ..securelog import challenges as sl_challenges
from ..securelog import cli as sl_cli
from ..securelog.challenges import ChallengeLog
from . import breaks, mitm

BREAKER = "breakers-united"


def _securelog_correctness(rng: random.Random, count: int) -> list[BreakSubmission]:
    subs = []
    for index in range(count):
        token = sl_challenges.random_token(rng)
        events = sl_challenges.random_events(rng, rng.randint(2, 4))
        commands = []
        for event in events:
            commands.append(
                {
                    "binary": "logappend",
                    "args": ["-K", token, *sl_challenges.append_argv(event), "LOGFILE"],
                    "expected_exit": 0,
                    "expected_output": "",
                }
            )
        expected = sl_cli.answer_query(events, "-S", [])
        commands.append(
            {
                "binary": "logread",
                "args": ["-K", token, "-S", "LOGFILE"],
                "expected_exit": 0,
                "expected_output": expected,
            }
        )
        subs.append(
            BreakSubmission(
                BREAKER, "target", "securelog", "correctness", {"commands": commands},
                report_id=f"sl-corr-{index}",
            )
        )
    return subs


def _securelog_crash(count: int) -> list[BreakSubmission]:
    commands = breaks.SECURELOG_CRASH_COMMANDS
    return [
        BreakSubmission(
            BREAKER, "target", "securelog", "crash", {"commands": commands},
            report_id=f"sl-crash-{i}",
        )
        for i in range(count)
    ]


def _securelog_security(
    rng: random.Random, challenges: list[ChallengeLog]
) -> list[BreakSubmission]:
    subs = []
    hidden = [c for c in challenges if not c.transcript_revealed]
    revealed = [c for c in challenges if c.transcript_revealed]
    blind_guesses = ["", "Mallory\n9999: Mallory"]
    for index, challenge in enumerate(hidden[:2]):
        # a blind guess at the state: without the transcript a breaker can
        # only get this right against a target that leaks it
        claimed = blind_guesses[index % len(blind_guesses)]
        subs.append(
            BreakSubmission(
                BREAKER, "target", "securelog", "privacy",
                {
                    "challenge_id": challenge.challenge_id,
                    "query": ["-S"],
                    "claimed_output": claimed,
                },
                report_id=f"sl-priv-{index}",
            )
        )
    for index, challenge in enumerate(revealed[:2]):
        corrupted = bytearray(challenge.log)
        for _ in range(3):
            corrupted[rng.randrange(len(corrupted))] ^= rng.randrange(1, 256)
        subs.append(
            BreakSubmission(
                BREAKER, "target", "securelog", "integrity",
                {
                    "challenge_id": challenge.challenge_id,
                    "query": ["-S"],
                    "corrupted_log": base64.b64encode(bytes(corrupted)).decode(),
                },
                report_id=f"sl-int-{index}",
            )
        )
    return subs


def _atm_correctness(rng: random.Random, count: int) -> list[BreakSubmission]:
    subs = []
    for index in range(count):
        balances: dict[str, int] = {}
        commands = []
        for _ in range(rng.randint(2, 4)):
            name = rng.choice(["ua", "ub"])
            if name not in balances:
                cents = rng.randrange(1000, 10**6)
                balances[name] = cents
                commands.append(
                    {
                        "args": ["-a", name, "-n", currency.render_amount(cents)],
                        "expected_exit": 0,
                        "expected_output": atm_client.render_receipt(
                            "create", name, cents
                        ),
                    }
                )
                continue
            action = rng.choice(["deposit", "withdraw", "balance", "overdraft"])
            if action == "balance":
                commands.append(
                    {
                        "args": ["-a", name, "-g"],
                        "expected_exit": 0,
                        "expected_output": atm_client.render_receipt(
                            "balance", name, balances[name]
                        ),
                    }
                )
            elif action == "overdraft":
                commands.append(
                    {
                        "args": [
                            "-a", name, "-w",
                            currency.render_amount(balances[name] + 1),
                        ],
                        "expected_exit": 255,
                        "expected_output": "",
                    }
                )
            else:
                cents = rng.randrange(1, 10**5)
                flag = "-d" if action == "deposit" else "-w"
                if action == "withdraw" and cents > balances[name]:
                    cents = balances[name]
                balances[name] += cents if action == "deposit" else -cents
                commands.append(
                    {
                        "args": ["-a", name, flag, currency.render_amount(cents)],
                        "expected_exit": 0,
                        "expected_output": atm_client.render_receipt(
                            action, name, cents
                        ),
                    }
                )
        subs.append(
            BreakSubmission(
                BREAKER, "target", "atm", "correctness", {"commands": commands},
                report_id=f"atm-corr-{index}",
            )
        )
    return subs


def _atm_security() -> list[BreakSubmission]:
    replay = mitm.TEMPLATE.format(
        mode="replay", requests=_dumps(mitm.REPLAY_DEPOSIT_REQUESTS)
    )
    sniff = mitm.TEMPLATE.format(
        mode="sniff", requests=_dumps(mitm.SNIFF_SECRET_REQUESTS)
    )
    passthrough = mitm.TEMPLATE.format(
        mode="passthrough", requests=_dumps(mitm.PASSTHROUGH_REQUESTS)
    )
    return [
        BreakSubmission(
            BREAKER, "target", "atm", "integrity", {"mitm_source": replay},
            report_id="atm-int-replay",
        ),
        BreakSubmission(
            BREAKER, "target", "atm", "privacy", {"mitm_source": sniff},
            report_id="atm-priv-sniff",
        ),
        BreakSubmission(
            BREAKER, "target", "atm", "integrity", {"mitm_source": passthrough},
            report_id="atm-int-passthrough",
        ),
    ]


def _dumps(value) -> str:
    return json.dumps(value, indent=1)


def _ehr_correctness(rng: random.Random, count: int) -> list[BreakSubmission]:
    subs = []
    for index in range(count):
        programs = [
            breaks._ehr_random_program(rng, "%ADMIN%") for _ in range(rng.randint(1, 3))
        ]
        subs.append(
            BreakSubmission(
                BREAKER, "target", "ehr", "correctness", {"programs": programs},
                report_id=f"ehr-corr-{index}",
            )
        )
    return subs


def _ehr_security() -> list[BreakSubmission]:
    return [
        BreakSubmission(
            BREAKER, "target", "ehr", "privacy",
            {"programs": breaks.CHAIN_UNCHECKED_PROGRAMS},
            report_id="ehr-priv-chain",
        ),
        BreakSubmission(
            BREAKER, "target", "ehr", "integrity",
            {"programs": breaks.HARDCODED_PASSWORD_PROGRAMS},
            report_id="ehr-int-backdoor",
        ),
        BreakSubmission(
            BREAKER, "target", "ehr", "availability",
            {"programs": breaks.CRASHY_FOREACH_PROGRAMS},
            report_id="ehr-avail-crash",
        ),
        BreakSubmission(
            BREAKER, "target", "ehr", "integrity",
            {"programs": breaks.NO_DELEGATE_CHECK_PROGRAMS},
            report_id="ehr-int-nodelegate",
        ),
    ]


def build_corpus(
    securelog_challenges: list[ChallengeLog], seed: int = 20160901
) -> list[BreakSubmission]:
    """Deterministic corpus; the challenge logs came from the target under
    adjudication (for soundness runs, from the reference itself)."""
    rng = random.Random(seed)
    corpus: list[BreakSubmission] = []
    corpus += _securelog_correctness(rng, 15)
    corpus += _securelog_crash(2)
    corpus += _securelog_security(rng, securelog_challenges)
    corpus += _atm_correctness(rng, 9)
    corpus += _atm_security()
    corpus += _ehr_correctness(rng, 14)
    corpus += _ehr_security()
    return corpus
