"""ATM client: one invocation, one authenticated transaction.

Exit codes partition the outcomes: 0 success (exactly one JSON receipt on
stdout), 255 semantic refusal (insufficient funds, duplicate account, bad
arguments), 63 protocol trouble (timeout, unverifiable or missequenced
reply).  The distinction is what lets the judge disallow tests a MITM broke.
"""

from __future__ import annotations

import json
import os
import socket

from . import currency, protocol

EXIT_OK = 0
EXIT_FAILURE = 255
EXIT_PROTOCOL = 63

CARD_LEN = 16
DEFAULT_TIMEOUT = 10.0

RECEIPT_KEYS = {
    "create": "initial_balance",
    "deposit": "deposit",
    "withdraw": "withdraw",
    "balance": "balance",
}


class Failure(Exception):
    """Semantic refusal -> exit 255."""


class ProtocolFailure(Exception):
    """Timeout or bad traffic -> exit 63."""


def render_receipt(op: str, account: str, cents: int) -> str:
    """Exactly one line of JSON; amounts rendered with zeros trimmed."""
    key = RECEIPT_KEYS[op]
    return (
        "{" + json.dumps("account") + ":" + json.dumps(account) + ","
        + json.dumps(key) + ":" + currency.render_amount(cents) + "}"
    )


def transact(
    host: str,
    port: int,
    key: bytes,
    request: dict,
    timeout: float = DEFAULT_TIMEOUT,
) -> dict:
    """Send one sealed request, await the matching sealed response."""
    session = protocol.new_session()
    try:
        with socket.create_connection((host, port), timeout=timeout) as conn:
            conn.settimeout(timeout)
            protocol.send_frame(conn, protocol.seal(key, session, 0, request))
            frame = protocol.recv_frame(conn)
    except (OSError, protocol.ProtocolError) as exc:
        raise ProtocolFailure(str(exc)) from exc
    try:
        reply_session, sequence, payload = protocol.open_frame(key, frame)
    except protocol.ProtocolError as exc:
        raise ProtocolFailure(str(exc)) from exc
    if reply_session != session or sequence != 1:
        raise ProtocolFailure("reply does not match this session")
    return payload


def run_atm(
    *,
    auth_path: str,
    card_path: str,
    account: str,
    op: str,
    amount_text: str | None,
    host: str = "127.0.0.1",
    port: int = 3000,
    timeout: float = DEFAULT_TIMEOUT,
) -> str:
    """Execute one transaction; returns the receipt line.

    Raises Failure/ProtocolFailure for the two error exits.
    """
    if not currency.valid_account(account):
        raise Failure("bad account name")
    try:
        key = protocol.load_key(auth_path)
    except (OSError, protocol.ProtocolError) as exc:
        raise Failure(f"unreadable auth file: {exc}") from exc

    cents = None
    if op in ("create", "deposit", "withdraw"):
        if amount_text is None:
            raise Failure("missing amount")
        try:
            cents = currency.parse_amount(amount_text)
        except currency.BadAmount as exc:
            raise Failure(str(exc)) from exc

    if op == "create":
        if os.path.exists(card_path):
            raise Failure("card file already exists")
        card = os.urandom(CARD_LEN).hex()
    else:
        try:
            with open(card_path, "rb") as handle:
                card = handle.read().decode("ascii")
        except (OSError, UnicodeDecodeError) as exc:
            raise Failure(f"unreadable card file: {exc}") from exc

    request = {"op": op, "account": account, "card": card}
    if cents is not None:
        request["amount"] = currency.render_amount(cents)
    payload = transact(host, port, key, request, timeout)
    if not isinstance(payload, dict) or "ok" not in payload:
        raise ProtocolFailure("malformed reply")
    if not payload["ok"]:
        raise Failure("bank refused the transaction")
    receipt = payload.get("receipt") or {}
    reported = receipt.get(RECEIPT_KEYS[op])
    if receipt.get("account") != account or not isinstance(reported, int):
        raise ProtocolFailure("malformed receipt")
    if op == "create":
        tmp = card_path + ".tmp"
        with open(tmp, "w", encoding="ascii") as handle:
            handle.write(card)
        os.replace(tmp, card_path)
    return render_receipt(op, account, reported)
