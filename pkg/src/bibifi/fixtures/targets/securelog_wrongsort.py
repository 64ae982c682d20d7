"""Gallery log submission with a presentation bug: guests print before
employees in the state query.  Storage is sound; this is correctness bait."""

import sys

from bibifi.securelog import cli, sealed, state


def wrong_state(folded):
    employees = sorted(n for (k, n) in folded.location if k == state.EMPLOYEE)
    guests = sorted(n for (k, n) in folded.location if k == state.GUEST)
    rooms = {}
    for (kind, name), where in folded.location.items():
        if where is not None:
            rooms.setdefault(where, []).append(name)
    lines = guests + employees
    for room in sorted(rooms):
        lines.append(f"{room}: {','.join(sorted(rooms[room]))}")
    return "\n".join(lines)


def read(argv):
    try:
        args = cli._Args.for_read(argv)
        if len(args.positional) != 1:
            raise cli.ArgError("bad args")
        token = args.flags.get("-K", "")
        mode, persons = cli._parse_query(args)
    except cli.ArgError:
        return 255, cli.INVALID
    from pathlib import Path

    path = Path(args.positional[0])
    if not path.exists():
        return 255, cli.INVALID
    try:
        events, _ = sealed.read_log(path, token)
    except sealed.IntegrityViolation:
        return 255, cli.INTEGRITY_VIOLATION
    if mode == "-S":
        return 0, wrong_state(state.fold(events))
    return 0, cli.answer_query(events, mode, persons)


def main():
    if len(sys.argv) < 2:
        print(cli.INVALID)
        return 255
    if sys.argv[1] == "append":
        code, out = cli.run_logappend(sys.argv[2:])
    else:
        code, out = read(sys.argv[2:])
    if out:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
