"""Entry points: ``server <port> [admin-password]`` plus a tiny test client
(``client <port>``: program text on stdin, response lines on stdout)."""

from __future__ import annotations

import sys


def server_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or not argv[0].isdigit():
        sys.stderr.write("usage: server <port> [admin-password]\n")
        return 255
    port = int(argv[0])
    if port > 65535:
        sys.stderr.write("bad port\n")
        return 255
    admin_password = argv[1] if len(argv) > 1 else "admin"

    from .server import DataServer

    server = DataServer(port, admin_password)
    try:
        server.bind()
    except OSError:
        return 255
    sys.stdout.write("ready\n")
    sys.stdout.flush()
    server.serve_forever()
    return 0


def client_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or not argv[0].isdigit():
        sys.stderr.write("usage: client <port>\n")
        return 255

    from .server import send_program

    text = sys.stdin.read()
    try:
        lines = send_program("127.0.0.1", int(argv[0]), text, timeout=30.0)
    except (OSError, TimeoutError):
        return 63
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def main() -> int:
    if len(sys.argv) < 2 or sys.argv[1] not in ("server", "client"):
        sys.stderr.write("usage: server <port> [admin-password] | client <port>\n")
        return 255
    if sys.argv[1] == "client":
        return client_main(sys.argv[2:])
    return server_main(sys.argv[2:])


if __name__ == "__main__":
    sys.exit(main())
