"""MITM adjudication harness for the bank/ATM problem.

A breaker's MITM sits between the target's atm and bank as a TCP proxy and
drives the test through a *command server*: it asks the harness to run atm
invocations (optionally naming the hidden secrets symbolically), may demand
card files for accounts it created itself, and may submit one guess per
secret.  Integrity judging then replays the same command list on the
reference pair with no MITM: real damage survives the replay comparison,
while differences the MITM merely simulated (drops, corruption, hangs) are
conservatively disallowed.
"""

from __future__ import annotations

import json
import os
import secrets as _secrets
import socket
import string
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import TemporaryDirectory

from ..targets import Target
from . import currency

AMOUNT_SYMBOL = "%AMOUNT%"
ACCOUNT_SYMBOL = "%ACCOUNT%"

DISALLOWED = "disallowed"
CONFIRMED = "confirmed"
REJECTED = "rejected"
VOIDED = "voided"

FORBIDDEN_ATM_FLAGS = {"-s", "-c", "-i", "-p"}


@dataclass(frozen=True)
class SecretPair:
    amount_cents: int
    account: str

    @classmethod
    def generate(cls) -> "SecretPair":
        alphabet = string.ascii_lowercase + string.digits
        account = "".join(_secrets.choice(alphabet) for _ in range(16))
        amount_cents = _secrets.randbelow(499_000) + 1_000  # 10.00 .. 5000.00
        return cls(amount_cents, account)

    @property
    def amount_text(self) -> str:
        return currency.render_amount(self.amount_cents)


@dataclass
class MitmSession:
    """Everything the command server saw: the adjudication record."""

    entries: list[dict] = field(default_factory=list)
    created_accounts: list[str] = field(default_factory=list)
    revealed_cards: set[str] = field(default_factory=set)
    guesses: dict[str, str] = field(default_factory=dict)
    done: bool = False
    disallowed_reason: str | None = None
    rejected_reason: str | None = None

    @property
    def command_entries(self) -> list[dict]:
        return [e for e in self.entries if e["kind"] == "run-atm"]


class AtmRunner:
    """Runs one atm binary against a fixed auth file / port / card dir."""

    def __init__(
        self,
        atm_binary: Path,
        auth_path: Path,
        cards_dir: Path,
        port: int,
        timeout: float = 10.0,
    ):
        self.atm_binary = atm_binary
        self.auth_path = auth_path
        self.cards_dir = cards_dir
        self.port = port
        self.timeout = timeout

    def card_path(self, account: str) -> Path:
        safe = account.replace("/", "_")
        return self.cards_dir / f"{safe}.card"

    def run(self, user_argv: list[str]) -> tuple[int, str, bool]:
        """Returns (exit_code, stdout, timed_out)."""
        account = _account_from_argv(user_argv)
        card = self.card_path(account if account else "unknown")
        argv = [
            str(self.atm_binary),
            "-s",
            str(self.auth_path),
            "-c",
            str(card),
            "-p",
            str(self.port),
            *user_argv,
        ]
        try:
            proc = subprocess.run(
                argv, capture_output=True, timeout=self.timeout, cwd=self.cards_dir
            )
        except subprocess.TimeoutExpired:
            return -1, "", True
        return proc.returncode, proc.stdout.decode(errors="replace"), False


def _account_from_argv(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "-a" and i + 1 < len(argv):
            return argv[i + 1]
    return None


class CommandServer:
    """Newline-delimited JSON service the MITM drives during a test."""

    def __init__(self, runner: AtmRunner, secrets: SecretPair):
        self.runner = runner
        self.secrets = secrets
        self.session = MitmSession()
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind(("127.0.0.1", 0))
        listener.listen(4)
        self._listener = listener
        self.port = listener.getsockname()[1]
        self._thread: threading.Thread | None = None
        self.deadline: float = 0.0

    def substitute(self, text: str) -> str:
        return text.replace(AMOUNT_SYMBOL, self.secrets.amount_text).replace(
            ACCOUNT_SYMBOL, self.secrets.account
        )

    # -- request handlers -------------------------------------------------

    def _handle_command(self, argv) -> dict:
        if not isinstance(argv, list) or not all(isinstance(a, str) for a in argv):
            return self._reject("command argv must be a list of strings")
        if FORBIDDEN_ATM_FLAGS & set(argv):
            return self._reject("command may not override harness flags")
        concrete = [self.substitute(a) for a in argv]
        exit_code, output, timed_out = self.runner.run(concrete)
        if timed_out or exit_code == 63:
            self.session.disallowed_reason = (
                "target timed out" if timed_out else "target protocol error"
            )
        entry = {
            "kind": "run-atm",
            "argv": list(argv),  # symbolic form, for the oracle replay
            "exit_code": exit_code,
            "output": output,
            "timed_out": timed_out,
        }
        self.session.entries.append(entry)
        account = _account_from_argv(concrete)
        if (
            exit_code == 0
            and account
            and "-n" in concrete
            and account not in self.session.created_accounts
        ):
            self.session.created_accounts.append(account)
        return {"exit_code": exit_code, "output": output}

    def _handle_getcard(self, name) -> dict:
        if not isinstance(name, str):
            return self._reject("getcard takes an account name")
        concrete = self.substitute(name)
        entry = {"kind": "get-card", "account": name}
        self.session.entries.append(entry)
        if concrete == self.secrets.account:
            return {"error": "refused"}
        if concrete not in self.session.created_accounts:
            return {"error": "refused"}
        try:
            card = self.runner.card_path(concrete).read_text(encoding="ascii")
        except OSError:
            return {"error": "refused"}
        self.session.revealed_cards.add(concrete)
        return {"card": card}

    def _handle_guess(self, guess) -> dict:
        if not isinstance(guess, dict) or len(guess) != 1:
            return self._reject("guess names exactly one secret")
        (which, value), = guess.items()
        if which not in ("amount", "account") or not isinstance(value, str):
            return self._reject("guess must target amount or account")
        if which in self.session.guesses:
            return self._reject("one guess per secret")
        self.session.guesses[which] = value
        self.session.entries.append({"kind": "guess", "secret": which, "value": value})
        return {"recorded": True}

    def _reject(self, reason: str) -> dict:
        self.session.rejected_reason = reason
        return {"error": "malformed", "detail": reason}

    # -- the serve loop ----------------------------------------------------

    def serve(self, deadline_seconds: float = 60.0) -> None:
        self.deadline = time.monotonic() + deadline_seconds
        self._thread = threading.Thread(target=self._serve_loop, daemon=True)
        self._thread.start()

    def _serve_loop(self) -> None:
        self._listener.settimeout(0.2)
        try:
            while not self._finished():
                try:
                    conn, _ = self._listener.accept()
                except socket.timeout:
                    continue
                self._serve_connection(conn)
        finally:
            self._listener.close()

    def _finished(self) -> bool:
        return (
            self.session.done
            or self.session.rejected_reason is not None
            or self.session.disallowed_reason is not None
            or time.monotonic() > self.deadline
        )

    def _serve_connection(self, conn: socket.socket) -> None:
        with conn, conn.makefile("rwb") as stream:
            conn.settimeout(5.0)
            while not self._finished():
                try:
                    line = stream.readline()
                except (socket.timeout, OSError):
                    return
                if not line:
                    return
                try:
                    request = json.loads(line)
                    if not isinstance(request, dict):
                        raise ValueError("not an object")
                except ValueError:
                    response = self._reject("unparseable request")
                else:
                    response = self._dispatch(request)
                try:
                    stream.write((json.dumps(response) + "\n").encode())
                    stream.flush()
                except OSError:
                    return

    def _dispatch(self, request: dict) -> dict:
        if "command" in request:
            return self._handle_command(request["command"])
        if "getcard" in request:
            return self._handle_getcard(request["getcard"])
        if "guess" in request:
            return self._handle_guess(request["guess"])
        if request.get("done") is True:
            self.session.done = True
            self.session.entries.append({"kind": "done"})
            return {"done": True}
        return self._reject("unknown request")

    def wait(self, extra: float = 1.0) -> None:
        if self._thread:
            self._thread.join(
                timeout=max(0.0, self.deadline - time.monotonic()) + extra
            )


@dataclass(frozen=True)
class MitmVerdict:
    verdict: str  # confirmed | rejected | disallowed | voided
    detail: str = ""
    session: MitmSession | None = None


class BankProcess:
    """A bank binary as a child process that owns its auth file."""

    def __init__(self, bank_binary: Path, auth_path: Path, timeout: float = 10.0):
        self.bank_binary = bank_binary
        self.auth_path = auth_path
        self.timeout = timeout
        self.port = _free_port()
        self.proc: subprocess.Popen | None = None

    def __enter__(self) -> "BankProcess":
        self.proc = subprocess.Popen(
            [str(self.bank_binary), "-p", str(self.port), "-s", str(self.auth_path)],
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            cwd=self.auth_path.parent,
        )
        deadline = time.monotonic() + self.timeout
        while time.monotonic() < deadline:
            if self.proc.poll() is not None:
                raise OSError("bank exited during startup")
            if self.auth_path.exists():
                try:
                    with socket.create_connection(("127.0.0.1", self.port), 0.2):
                        return self
                except OSError:
                    pass
            time.sleep(0.02)
        raise OSError("bank never came up")

    def alive(self) -> bool:
        return self.proc is not None and self.proc.poll() is None

    def __exit__(self, *exc) -> None:
        if self.proc and self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


def _free_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.bind(("127.0.0.1", 0))
        return probe.getsockname()[1]


def _launch_mitm(mitm: Path, listen_port: int, bank_port: int, command_port: int):
    argv = [str(mitm), str(listen_port), str(bank_port), str(command_port)]
    if not os.access(mitm, os.X_OK):
        argv = [sys.executable] + argv
    return subprocess.Popen(
        argv, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL
    )


def run_mitm_phase(
    target: Target,
    mitm_program: Path,
    secrets: SecretPair,
    workdir: Path,
    atm_timeout: float = 10.0,
    session_seconds: float = 60.0,
) -> tuple[MitmSession, dict[str, int | None] | None]:
    """Phase 1: target pair with the MITM in the middle.

    Returns the session record plus the final balance of every account the
    session created (None when unreadable), or None for the balances if the
    session was disallowed or rejected.
    """
    cards = workdir / "cards"
    cards.mkdir(parents=True, exist_ok=True)
    auth = workdir / "bank.auth"
    with BankProcess(target.binary("bank"), auth, atm_timeout) as bank:
        proxy_port = _free_port()
        runner = AtmRunner(target.binary("atm"), auth, cards, proxy_port, atm_timeout)
        command_server = CommandServer(runner, secrets)
        command_server.serve(session_seconds)
        mitm_proc = _launch_mitm(mitm_program, proxy_port, bank.port, command_server.port)
        try:
            command_server.wait()
        finally:
            if mitm_proc.poll() is None:
                mitm_proc.terminate()
                try:
                    mitm_proc.wait(timeout=5)
                except subprocess.TimeoutExpired:
                    mitm_proc.kill()
                    mitm_proc.wait()
        session = command_server.session
        if not bank.alive():
            session.disallowed_reason = session.disallowed_reason or "bank died"
        if session.disallowed_reason or session.rejected_reason or not session.done:
            return session, None
        # balance sweep straight at the bank, bypassing the proxy
        direct = AtmRunner(target.binary("atm"), auth, cards, bank.port, atm_timeout)
        balances: dict[str, int | None] = {}
        for account in session.created_accounts:
            exit_code, output, timed_out = direct.run(["-a", account, "-g"])
            if timed_out or exit_code == 63:
                session.disallowed_reason = "target broke during balance sweep"
                return session, None
            balances[account] = _balance_from_receipt(output) if exit_code == 0 else None
    return session, balances


def _balance_from_receipt(output: str) -> int | None:
    try:
        doc = json.loads(output.strip().splitlines()[-1])
        return currency.parse_amount(str(doc["balance"]))
    except (ValueError, KeyError, IndexError, currency.BadAmount):
        return None


def replay_on_oracle(
    oracle: Target,
    session: MitmSession,
    secrets: SecretPair,
    workdir: Path,
    atm_timeout: float = 10.0,
) -> tuple[list[tuple[int, str]], dict[str, int | None]] | None:
    """Phase 2: the recorded command list, no MITM, fresh reference pair.

    Returns None when the oracle itself misbehaves (oracle-bug path).
    """
    cards = workdir / "cards"
    cards.mkdir(parents=True, exist_ok=True)
    auth = workdir / "bank.auth"
    outcomes: list[tuple[int, str]] = []
    balances: dict[str, int | None] = {}
    def substitute(text: str) -> str:
        return text.replace(AMOUNT_SYMBOL, secrets.amount_text).replace(
            ACCOUNT_SYMBOL, secrets.account
        )

    with BankProcess(oracle.binary("bank"), auth, atm_timeout) as bank:
        runner = AtmRunner(oracle.binary("atm"), auth, cards, bank.port, atm_timeout)
        for entry in session.command_entries:
            concrete = [substitute(a) for a in entry["argv"]]
            exit_code, output, timed_out = runner.run(concrete)
            if timed_out or exit_code == 63:
                return None
            outcomes.append((exit_code, output))
        for account in session.created_accounts:
            exit_code, output, timed_out = runner.run(["-a", account, "-g"])
            if timed_out or exit_code == 63:
                return None
            balances[account] = _balance_from_receipt(output) if exit_code == 0 else None
    return outcomes, balances


def judge_integrity_mitm(
    target: Target,
    oracle: Target,
    mitm_program: Path,
    secrets: SecretPair | None = None,
    atm_timeout: float = 10.0,
    session_seconds: float = 60.0,
) -> MitmVerdict:
    secrets = secrets or SecretPair.generate()
    with TemporaryDirectory(prefix="mitm-int-") as tmp:
        workdir = Path(tmp)
        session, target_balances = run_mitm_phase(
            target, mitm_program, secrets, workdir / "target", atm_timeout, session_seconds
        )
        if session.disallowed_reason:
            return MitmVerdict(DISALLOWED, session.disallowed_reason, session)
        if session.rejected_reason or not session.done:
            return MitmVerdict(
                REJECTED, session.rejected_reason or "mitm never finished", session
            )
        assert target_balances is not None
        oracle_result = replay_on_oracle(
            oracle, session, secrets, workdir / "oracle", atm_timeout
        )
        if oracle_result is None:
            return MitmVerdict(VOIDED, "reference pair failed the replay", session)
        oracle_outcomes, oracle_balances = oracle_result
        target_outcomes = [
            (e["exit_code"], e["output"]) for e in session.command_entries
        ]
        if target_outcomes != oracle_outcomes:
            return MitmVerdict(CONFIRMED, "command outputs diverge", session)
        for account, oracle_balance in oracle_balances.items():
            if account in session.revealed_cards:
                continue
            if target_balances.get(account) != oracle_balance:
                return MitmVerdict(
                    CONFIRMED,
                    f"final balance differs for unrevealed account {account!r}",
                    session,
                )
        return MitmVerdict(REJECTED, "no observable difference", session)


def judge_privacy_mitm(
    target: Target,
    mitm_program: Path,
    secrets: SecretPair | None = None,
    atm_timeout: float = 10.0,
    session_seconds: float = 60.0,
) -> MitmVerdict:
    secrets = secrets or SecretPair.generate()
    with TemporaryDirectory(prefix="mitm-priv-") as tmp:
        session, _ = run_mitm_phase(
            target, mitm_program, secrets, Path(tmp), atm_timeout, session_seconds
        )
        if session.disallowed_reason:
            return MitmVerdict(DISALLOWED, session.disallowed_reason, session)
        if session.rejected_reason or not session.done:
            return MitmVerdict(
                REJECTED, session.rejected_reason or "mitm never finished", session
            )
        amount_guess = session.guesses.get("amount")
        if amount_guess is not None:
            try:
                if currency.parse_amount(amount_guess) == secrets.amount_cents:
                    return MitmVerdict(CONFIRMED, "amount recovered", session)
            except currency.BadAmount:
                pass
        if session.guesses.get("account") == secrets.account:
            return MitmVerdict(CONFIRMED, "account name recovered", session)
        return MitmVerdict(REJECTED, "no correct guess", session)
