"""Entry points: ``bank -p port -s auth-file`` and
``atm -s auth -c card -a account [-i host] [-p port] <mode>``."""

from __future__ import annotations

import sys


def _parse_flags(argv, value_flags, bare_flags):
    flags = {}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in value_flags:
            if arg in flags or i + 1 >= len(argv):
                return None
            flags[arg] = argv[i + 1]
            i += 2
        elif arg in bare_flags:
            if arg in flags:
                return None
            flags[arg] = True
            i += 1
        else:
            return None
    return flags


def bank_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    flags = _parse_flags(argv, ("-p", "-s"), ())
    if flags is None:
        sys.stderr.write("usage: bank [-p port] [-s auth-file]\n")
        return 255
    try:
        port = int(flags.get("-p", "3000"))
        if not 0 <= port <= 65535:
            raise ValueError
    except ValueError:
        return 255
    auth_path = str(flags.get("-s", "bank.auth"))

    from .bank import BankServer

    server = BankServer(port, auth_path)
    try:
        server.start()
    except OSError:
        return 255
    sys.stdout.write("created\n")
    sys.stdout.flush()
    server.serve_forever()
    return 0


def atm_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    flags = _parse_flags(argv, ("-s", "-c", "-a", "-i", "-p", "-n", "-d", "-w"), ("-g",))
    if flags is None:
        return 255
    modes = [m for m in ("-n", "-d", "-w", "-g") if m in flags]
    account = flags.get("-a")
    if len(modes) != 1 or not isinstance(account, str):
        return 255
    mode = modes[0]
    op = {"-n": "create", "-d": "deposit", "-w": "withdraw", "-g": "balance"}[mode]
    amount = None if mode == "-g" else str(flags[mode])
    try:
        port = int(flags.get("-p", "3000"))
        if not 0 <= port <= 65535:
            raise ValueError
    except ValueError:
        return 255

    from . import client

    try:
        receipt = client.run_atm(
            auth_path=str(flags.get("-s", "bank.auth")),
            card_path=str(flags.get("-c", f"{account}.card")),
            account=account,
            op=op,
            amount_text=amount,
            host=str(flags.get("-i", "127.0.0.1")),
            port=port,
        )
    except client.Failure:
        return 255
    except client.ProtocolFailure:
        return 63
    sys.stdout.write(receipt + "\n")
    sys.stdout.flush()
    return 0


def main() -> int:
    if len(sys.argv) < 2 or sys.argv[1] not in ("atm", "bank"):
        sys.stderr.write("usage: atm|bank ...\n")
        return 255
    if sys.argv[1] == "bank":
        return bank_main(sys.argv[2:])
    return atm_main(sys.argv[2:])


if __name__ == "__main__":
    sys.exit(main())
