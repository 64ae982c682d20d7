"""Gallery log submission that seals each record individually.

Every event is AES-GCM encrypted on its own line, so single records cannot
be forged, but nothing binds a record to its position: the file order *is*
the history.  Swapping lines rewrites history without tripping any check.
"""

import base64
import hashlib
import json
import os
import sys
from pathlib import Path

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from bibifi.securelog import cli, state


def derive_key(token: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", token.encode(), salt, 10_000)


def load(path: Path, token: str):
    lines = path.read_bytes().splitlines()
    if not lines:
        raise ValueError("empty log")
    salt = base64.b64decode(lines[0])
    aead = AESGCM(derive_key(token, salt))
    events = []
    for line in lines[1:]:
        blob = base64.b64decode(line)
        plaintext = aead.decrypt(blob[:12], blob[12:], None)
        events.append(json.loads(plaintext))
    return salt, events


def append_record(path: Path, token: str, record) -> None:
    if path.exists():
        salt, _ = load(path, token)
        aead = AESGCM(derive_key(token, salt))
    else:
        salt = os.urandom(16)
        aead = AESGCM(derive_key(token, salt))
        path.write_bytes(base64.b64encode(salt) + b"\n")
    nonce = os.urandom(12)
    blob = nonce + aead.encrypt(nonce, json.dumps(record).encode(), None)
    with path.open("ab") as handle:
        handle.write(base64.b64encode(blob) + b"\n")


def fold_file_order(raw_events):
    """Replay in file order; positions, not timestamps, define history."""
    events = []
    for index, item in enumerate(raw_events):
        ts, kind, name, action, room = item
        events.append(state.LogEvent(index + 1, kind, name, action, room))
    return events


def append(argv):
    try:
        args = cli._Args.for_append(argv)
        if len(args.positional) != 1:
            raise cli.ArgError("bad args")
        token = args.flags.get("-K", "")
        timestamp = int(args.flags.get("-T", "-1"))
        kind, name = cli._single_person(args.order)
        arrive = "-A" in args.flags
        if arrive == ("-L" in args.flags):
            raise cli.ArgError("bad mode")
        room = int(args.flags["-R"]) if "-R" in args.flags else None
        action = state.ARRIVE if arrive else state.LEAVE
        event = state.LogEvent(timestamp, kind, name, action, room)
    except (cli.ArgError, state.InvalidEvent, ValueError):
        return 255, cli.INVALID
    path = Path(args.positional[0])
    try:
        raw = load(path, token)[1] if path.exists() else []
        events = fold_file_order(raw)
        probe = state.LogEvent(len(events) + 1, kind, name, action, room)
        state.validate_append(events, probe)
        append_record(path, token, event.to_wire())
    except (ValueError, OSError, InvalidTag, state.InvalidEvent):
        return 255, cli.INVALID
    return 0, ""


def read(argv):
    try:
        args = cli._Args.for_read(argv)
        if len(args.positional) != 1:
            raise cli.ArgError("bad args")
        token = args.flags.get("-K", "")
        mode, persons = cli._parse_query(args)
    except cli.ArgError:
        return 255, cli.INVALID
    path = Path(args.positional[0])
    if not path.exists():
        return 255, cli.INVALID
    try:
        _, raw = load(path, token)
        events = fold_file_order(raw)
        state.fold(events)  # containment must still hold
    except (ValueError, OSError, InvalidTag, state.InvalidEvent):
        return 255, cli.INTEGRITY_VIOLATION
    return 0, cli.answer_query(events, mode, persons)


def main():
    if len(sys.argv) < 2:
        print(cli.INVALID)
        return 255
    code, out = append(sys.argv[2:]) if sys.argv[1] == "append" else read(sys.argv[2:])
    if out:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
