"""Gallery log submission that never heard of encryption.

The log file is plain JSON: the token sits next to the events it is supposed
to protect.  Queries behave correctly, so the bundle qualifies, but anyone
holding the file can read the whole history (privacy) or edit it (integrity).
"""

import json
import sys
from pathlib import Path

from bibifi.securelog import cli, state


def load(path: Path):
    doc = json.loads(path.read_text())
    return doc["token"], [state.LogEvent.from_wire(e) for e in doc["events"]]


def store(path: Path, token: str, events):
    doc = {"token": token, "events": [e.to_wire() for e in events]}
    path.write_text(json.dumps(doc))


def append(argv):
    try:
        args = cli._Args.for_append(argv)
        if len(args.positional) != 1:
            raise cli.ArgError("bad args")
        token = args.flags.get("-K", "")
        event = _event_from(args)
    except (cli.ArgError, state.InvalidEvent, ValueError):
        return 255, cli.INVALID
    path = Path(args.positional[0])
    try:
        if path.exists():
            stored_token, events = load(path)
            if stored_token != token:
                return 255, cli.INVALID
        else:
            events = []
        state.validate_append(events, event)
        store(path, token, events + [event])
    except (ValueError, OSError, KeyError, state.InvalidEvent):
        return 255, cli.INVALID
    return 0, ""


def _event_from(args):
    timestamp = int(args.flags.get("-T", "-1"))
    kind, name = cli._single_person(args.order)
    arrive = "-A" in args.flags
    leave = "-L" in args.flags
    if arrive == leave:
        raise cli.ArgError("bad mode")
    room = int(args.flags["-R"]) if "-R" in args.flags else None
    action = state.ARRIVE if arrive else state.LEAVE
    return state.LogEvent(timestamp, kind, name, action, room)


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
        stored_token, events = load(path)
    except (ValueError, OSError, KeyError, state.InvalidEvent):
        return 255, cli.INTEGRITY_VIOLATION
    if stored_token != token:
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
