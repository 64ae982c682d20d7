"""Challenge log generation for break-phase judging.

Each qualifying target gets a batch of logs generated by driving *that
target's own* logappend with random valid command sequences.  Breakers get
the log files but never the tokens; for integrity challenges they also get
the command transcript, for privacy challenges they do not.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from pathlib import Path
from tempfile import TemporaryDirectory

from ..targets import Target, run_target
from .state import ARRIVE, EMPLOYEE, GUEST, LEAVE, GalleryState, LogEvent

TOKEN_ALPHABET = string.ascii_letters + string.digits
TOKEN_LEN = 24
NAMES = ["Alice", "Bob", "Carol", "Dave", "Erin", "Frank", "Grace", "Heidi"]


class ChallengeError(RuntimeError):
    """The target failed while generating its own challenge logs."""


@dataclass(frozen=True)
class ChallengeLog:
    challenge_id: str
    log: bytes
    token: str
    transcript: list[list[str]]  # logappend argv without -K/token or path
    transcript_revealed: bool


def random_token(rng: random.Random) -> str:
    return "".join(rng.choice(TOKEN_ALPHABET) for _ in range(TOKEN_LEN))


def random_events(rng: random.Random, count: int) -> list[LogEvent]:
    """A semantically valid event sequence (simulated against the fold)."""
    state = GalleryState()
    events: list[LogEvent] = []
    timestamp = 0
    while len(events) < count:
        timestamp += rng.randint(1, 9)
        kind = rng.choice((EMPLOYEE, GUEST))
        name = rng.choice(NAMES)
        person = (kind, name)
        present = person in state.location
        where = state.location.get(person)
        choices: list[LogEvent] = []
        if not present:
            choices.append(LogEvent(timestamp, kind, name, ARRIVE, None))
        elif where is None:
            choices.append(LogEvent(timestamp, kind, name, LEAVE, None))
            choices.append(
                LogEvent(timestamp, kind, name, ARRIVE, rng.randint(0, 4))
            )
        else:
            choices.append(LogEvent(timestamp, kind, name, LEAVE, where))
        event = rng.choice(choices)
        state.admit(event)
        events.append(event)
    return events


def append_argv(event: LogEvent) -> list[str]:
    """logappend arguments for one event, token and path left to the caller."""
    argv = ["-T", str(event.timestamp)]
    argv += ["-E" if event.kind == EMPLOYEE else "-G", event.name]
    argv += ["-A" if event.action == ARRIVE else "-L"]
    if event.room is not None:
        argv += ["-R", str(event.room)]
    return argv


def parse_append_argv(argv: list[str]) -> LogEvent:
    """Inverse of append_argv, used to fold a revealed transcript."""
    timestamp = room = None
    kind = name = action = None
    i = 0
    while i < len(argv):
        flag = argv[i]
        if flag == "-T":
            timestamp = int(argv[i + 1])
            i += 2
        elif flag == "-R":
            room = int(argv[i + 1])
            i += 2
        elif flag in ("-E", "-G"):
            kind = EMPLOYEE if flag == "-E" else GUEST
            name = argv[i + 1]
            i += 2
        elif flag in ("-A", "-L"):
            action = ARRIVE if flag == "-A" else LEAVE
            i += 1
        else:
            raise ValueError(f"bad transcript flag {flag!r}")
    if timestamp is None or kind is None or name is None or action is None:
        raise ValueError("incomplete transcript entry")
    return LogEvent(timestamp, kind, name, action, room)


def generate_challenge_logs(
    target: Target,
    seed: int,
    count: int = 4,
    events_per_log: int = 6,
    timeout: float = 10.0,
) -> list[ChallengeLog]:
    """Drive the target's logappend to produce `count` challenge logs.

    Deterministic in `seed`: the same seed yields the same tokens and
    command sequences.  Even-numbered challenges reveal their transcript
    (integrity), odd-numbered ones keep it hidden (privacy).
    """
    rng = random.Random(seed)
    logappend = target.binary("logappend")
    challenges: list[ChallengeLog] = []
    for index in range(count):
        token = random_token(rng)
        events = random_events(rng, events_per_log)
        with TemporaryDirectory(prefix="challenge-") as tmp:
            path = Path(tmp) / "logfile"
            transcript = []
            for event in events:
                argv = append_argv(event)
                transcript.append(argv)
                result = run_target(
                    [logappend, "-K", token, *argv, path], timeout=timeout
                )
                if result.exit_code != 0:
                    raise ChallengeError(
                        f"target logappend failed on challenge {index}: "
                        f"{result.stdout!r} {result.stderr!r}"
                    )
            challenges.append(
                ChallengeLog(
                    challenge_id=f"c{index}",
                    log=path.read_bytes(),
                    token=token,
                    transcript=transcript,
                    transcript_revealed=index % 2 == 0,
                )
            )
    return challenges
