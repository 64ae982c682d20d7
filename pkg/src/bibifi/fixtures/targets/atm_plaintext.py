"""Bank/ATM pair with no transport protection whatsoever.

Requests and receipts cross the wire as raw JSON: a passive observer on the
path reads every account name and amount, including the harness's secrets.
"""

import json
import os
import re
import socket
import struct
import sys

MAX_CENTS = 429496729599
AMOUNT_RE = re.compile(r"(0|[1-9][0-9]*)(?:\.([0-9]{1,2}))?\Z")


def parse_amount(text):
    match = AMOUNT_RE.match(text)
    if not match:
        raise ValueError(text)
    cents = int(match.group(1)) * 100 + int((match.group(2) or "").ljust(2, "0") or 0)
    if cents > MAX_CENTS:
        raise ValueError(text)
    return cents


def render_amount(cents):
    whole, frac = divmod(cents, 100)
    return str(whole) if frac == 0 else f"{whole}.{frac:02d}".rstrip("0")


def pack(payload):
    blob = json.dumps(payload).encode()
    return struct.pack(">I", len(blob)) + blob


def recv_blob(conn):
    size = struct.unpack(">I", recv_exact(conn, 4))[0]
    if size > 65536:
        raise ValueError("oversized")
    return recv_exact(conn, size)


def recv_exact(conn, count):
    data = bytearray()
    while len(data) < count:
        block = conn.recv(count - len(data))
        if not block:
            raise ValueError("closed")
        data.extend(block)
    return bytes(data)


def bank_main(argv):
    port, auth = 3000, "bank.auth"
    i = 0
    while i < len(argv):
        if argv[i] == "-p":
            port = int(argv[i + 1])
            i += 2
        elif argv[i] == "-s":
            auth = argv[i + 1]
            i += 2
        else:
            return 255
    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        listener.bind(("127.0.0.1", port))
    except OSError:
        return 255
    with open(auth, "wb") as handle:  # never actually used for anything
        handle.write(os.urandom(32))
    listener.listen(16)
    print("created", flush=True)
    accounts = {}
    while True:
        conn, _ = listener.accept()
        with conn:
            conn.settimeout(10.0)
            try:
                request = json.loads(recv_blob(conn))
            except Exception:
                print("protocol_error", flush=True)
                continue
            receipt = apply_request(accounts, request)
            try:
                conn.sendall(pack({"ok": receipt is not None, "receipt": receipt}))
            except OSError:
                pass
    return 0


def apply_request(accounts, request):
    op = request.get("op")
    account = request.get("account")
    card = request.get("card")
    if not isinstance(account, str) or not isinstance(card, str):
        return None
    try:
        if op == "create":
            cents = parse_amount(str(request.get("amount")))
            if account in accounts:
                return None
            accounts[account] = {"balance": cents, "card": card}
            return {"account": account, "initial_balance": cents}
        entry = accounts.get(account)
        if entry is None or entry["card"] != card:
            return None
        if op == "balance":
            return {"account": account, "balance": entry["balance"]}
        cents = parse_amount(str(request.get("amount")))
        if op == "deposit":
            if entry["balance"] + cents > MAX_CENTS:
                return None
            entry["balance"] += cents
            return {"account": account, "deposit": cents}
        if op == "withdraw":
            if cents > entry["balance"]:
                return None
            entry["balance"] -= cents
            return {"account": account, "withdraw": cents}
    except ValueError:
        return None
    return None


RECEIPT_KEYS = {
    "create": "initial_balance",
    "deposit": "deposit",
    "withdraw": "withdraw",
    "balance": "balance",
}


def atm_main(argv):
    flags = {}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg == "-g":
            flags[arg] = True
            i += 1
        elif arg in ("-s", "-c", "-a", "-i", "-p", "-n", "-d", "-w"):
            if i + 1 >= len(argv):
                return 255
            flags[arg] = argv[i + 1]
            i += 2
        else:
            return 255
    modes = [m for m in ("-n", "-d", "-w", "-g") if m in flags]
    account = flags.get("-a")
    if len(modes) != 1 or account is None:
        return 255
    op = {"-n": "create", "-d": "deposit", "-w": "withdraw", "-g": "balance"}[modes[0]]
    card_path = flags.get("-c", f"{account}.card")
    if op == "create":
        if os.path.exists(card_path):
            return 255
        card = os.urandom(16).hex()
    else:
        try:
            with open(card_path) as handle:
                card = handle.read()
        except OSError:
            return 255
    request = {"op": op, "account": account, "card": card}
    if op in ("create", "deposit", "withdraw"):
        try:
            request["amount"] = render_amount(parse_amount(str(flags[modes[0]])))
        except ValueError:
            return 255
    try:
        with socket.create_connection(
            (flags.get("-i", "127.0.0.1"), int(flags.get("-p", "3000"))), timeout=10.0
        ) as conn:
            conn.settimeout(10.0)
            conn.sendall(pack(request))
            payload = json.loads(recv_blob(conn))
    except Exception:
        return 63
    if not payload.get("ok"):
        return 255
    receipt = payload.get("receipt") or {}
    cents = receipt.get(RECEIPT_KEYS[op])
    if receipt.get("account") != account or not isinstance(cents, int):
        return 63
    if op == "create":
        with open(card_path, "w") as handle:
            handle.write(card)
    print(
        '{"account":' + json.dumps(account) + ","
        + json.dumps(RECEIPT_KEYS[op]) + ":" + render_amount(cents) + "}",
        flush=True,
    )
    return 0


if __name__ == "__main__":
    if len(sys.argv) < 2 or sys.argv[1] not in ("atm", "bank"):
        sys.exit(255)
    if sys.argv[1] == "bank":
        sys.exit(bank_main(sys.argv[2:]))
    sys.exit(atm_main(sys.argv[2:]))
