"""Bank server: account ledger plus the authenticated request loop.

The bank is the root of trust: it generates the auth-file key at startup.
Requests arrive one connection at a time; a request that fails
authentication or replays an old envelope is ignored (logged as
``protocol_error``) without touching state, so the client times out rather
than learning anything.
"""

from __future__ import annotations

import os
import socket

from . import currency, protocol


class BankLedger:
    """Pure account state; every mutation is atomic per request."""

    def __init__(self) -> None:
        self.accounts: dict[str, dict] = {}

    def apply(self, request: dict) -> dict | None:
        """Returns a receipt payload, or None for a semantic refusal."""
        op = request.get("op")
        account = request.get("account")
        card = request.get("card")
        if (
            not isinstance(account, str)
            or not currency.valid_account(account)
            or not isinstance(card, str)
        ):
            return None
        if op == "create":
            try:
                cents = currency.parse_amount(str(request.get("amount")))
            except currency.BadAmount:
                return None
            if account in self.accounts:
                return None
            self.accounts[account] = {"balance": cents, "card": card}
            return {"account": account, "initial_balance": cents}
        entry = self.accounts.get(account)
        if entry is None or entry["card"] != card:
            return None
        if op == "balance":
            return {"account": account, "balance": entry["balance"]}
        if op in ("deposit", "withdraw"):
            try:
                cents = currency.parse_amount(str(request.get("amount")))
            except currency.BadAmount:
                return None
            if op == "deposit":
                if entry["balance"] + cents > currency.MAX_CENTS:
                    return None
                entry["balance"] += cents
                return {"account": account, "deposit": cents}
            if cents > entry["balance"]:
                return None
            entry["balance"] -= cents
            return {"account": account, "withdraw": cents}
        return None


class BankServer:
    def __init__(self, port: int, auth_path: str, host: str = "127.0.0.1"):
        self.host = host
        self.port = port
        self.auth_path = auth_path
        self.ledger = BankLedger()
        self.key: bytes | None = None
        self.seen: set[tuple[bytes, int]] = set()
        self._listener: socket.socket | None = None

    def start(self) -> None:
        """Bind, then write the fresh auth key (the key never pre-exists)."""
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.host, self.port))
        listener.listen(16)
        self._listener = listener
        self.port = listener.getsockname()[1]
        self.key = os.urandom(protocol.KEY_LEN)
        tmp = self.auth_path + ".tmp"
        with open(tmp, "wb") as handle:
            handle.write(self.key)
        os.replace(tmp, self.auth_path)

    def serve_forever(self) -> None:
        assert self._listener is not None
        try:
            while True:
                try:
                    conn, _ = self._listener.accept()
                except OSError:  # listener closed by stop()
                    return
                self.handle_connection(conn)
        finally:
            self._listener.close()

    def stop(self) -> None:
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass

    def handle_connection(self, conn: socket.socket) -> None:
        with conn:
            conn.settimeout(10.0)
            try:
                frame = protocol.recv_frame(conn)
                session, sequence, request = protocol.open_frame(self.key, frame)
            except (protocol.ProtocolError, OSError):
                self.log_protocol_error()
                return
            if sequence != 0 or (session, sequence) in self.seen:
                self.log_protocol_error()
                return
            self.seen.add((session, sequence))
            receipt = self.ledger.apply(request)
            payload = {"ok": receipt is not None, "receipt": receipt}
            try:
                protocol.send_frame(conn, protocol.seal(self.key, session, 1, payload))
            except OSError:
                pass

    def log_protocol_error(self) -> None:
        print("protocol_error", flush=True)
