"""Transactional interpreter for the data-server command language.

A program runs against a copy of the server state; only a fully successful
run (ending in RETURNING or EXITING) commits.  Any denial or failure rolls
everything back and answers with exactly one status line.

Access control: the owner of a variable and ``admin`` hold every right
irrevocably; everyone else holds a right only through a chain of delegation
assertions that reaches back to the owner or admin.  Deleting an assertion
therefore revokes everything that depended on it.
"""

from __future__ import annotations

import copy
import hashlib
import hmac
import json
import os
from dataclasses import dataclass, field
from typing import Union

from . import syntax
from .syntax import (
    ALL_TARGETS,
    RIGHTS,
    AppendTo,
    ChangePassword,
    CreatePrincipal,
    DefaultDelegator,
    DeleteDelegation,
    EmptyList,
    Exit,
    FieldAccess,
    Foreach,
    Local,
    Program,
    RecordLit,
    Return,
    Set,
    SetDelegation,
    Str,
    Var,
)

ADMIN = "admin"

RuntimeValue = Union[str, list, dict]


class Denied(Exception):
    """Authorization failure; `kind` distinguishes read from mutate paths."""

    def __init__(self, detail: str, kind: str):
        super().__init__(detail)
        self.kind = kind  # "read" | "mutate" | "auth"


class Failed(Exception):
    """Anything else: unknown names, type errors, parse errors."""


@dataclass(frozen=True)
class DelegationAssertion:
    variable: str
    issuer: str
    right: str
    grantee: str


def hash_password(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode(), salt, 20_000)


@dataclass
class PasswordEntry:
    salt: bytes
    digest: bytes

    @classmethod
    def create(cls, password: str) -> "PasswordEntry":
        salt = os.urandom(8)
        return cls(salt, hash_password(password, salt))

    def matches(self, password: str) -> bool:
        return hmac.compare_digest(self.digest, hash_password(password, self.salt))


@dataclass
class ServerState:
    principals: dict[str, PasswordEntry] = field(default_factory=dict)
    globals: dict[str, RuntimeValue] = field(default_factory=dict)
    owners: dict[str, str] = field(default_factory=dict)
    assertions: list[DelegationAssertion] = field(default_factory=list)
    default_delegator: str = ADMIN

    @classmethod
    def fresh(cls, admin_password: str = "admin") -> "ServerState":
        state = cls()
        state.principals[ADMIN] = PasswordEntry.create(admin_password)
        return state

    def digest(self) -> str:
        """Stable fingerprint of the visible state, for desync forensics."""
        doc = {
            "principals": sorted(self.principals),
            "globals": {k: self.globals[k] for k in sorted(self.globals)},
            "owners": {k: self.owners[k] for k in sorted(self.owners)},
            "assertions": sorted(
                (a.variable, a.issuer, a.right, a.grantee) for a in self.assertions
            ),
            "default_delegator": self.default_delegator,
        }
        blob = json.dumps(doc, separators=(",", ":"), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def check_right(state: ServerState, principal: str, right: str, variable: str) -> bool:
    """Does `principal` hold `right` on `variable`?

    Fixpoint over the delegation graph: start from the irrevocable holders
    (admin and the owner) and follow matching assertions; cycles that never
    reach a root grant nothing.
    """
    if right not in RIGHTS:
        raise Failed(f"unknown right {right!r}")
    owner = state.owners.get(variable)
    holders = {ADMIN}
    if owner is not None:
        holders.add(owner)
    if principal in holders:
        return True
    edges = [
        a for a in state.assertions if a.variable == variable and a.right == right
    ]
    changed = True
    while changed:
        changed = False
        for a in edges:
            if a.issuer in holders and a.grantee not in holders:
                holders.add(a.grantee)
                changed = True
                if a.grantee == principal:
                    return True
    return principal in holders


@dataclass
class ExecResult:
    statuses: list[dict]
    state: ServerState
    ok: bool
    exiting: bool = False
    denied_kind: str | None = None  # set when the single line is DENIED
    failed: bool = False  # set when the single line is FAILED


class _Execution:
    def __init__(self, state: ServerState, principal: str):
        self.state = state
        self.principal = principal
        self.locals: dict[str, RuntimeValue] = {}

    # -- helpers --------------------------------------------------------

    def _require(self, right: str, variable: str, kind: str) -> None:
        if not check_right(self.state, self.principal, right, variable):
            raise Denied(f"no {right} right on {variable!r}", kind)

    def _require_principal(self, name: str) -> None:
        if name not in self.state.principals:
            raise Failed(f"unknown principal {name!r}")

    def lookup(self, name: str) -> RuntimeValue:
        if name in self.locals:
            return self.locals[name]
        if name in self.state.globals:
            self._require("read", name, kind="read")
            return self.state.globals[name]
        raise Failed(f"unknown variable {name!r}")

    def evaluate(self, expr: syntax.Expr) -> RuntimeValue:
        if isinstance(expr, Str):
            return expr.text
        if isinstance(expr, Var):
            return copy.deepcopy(self.lookup(expr.name))
        if isinstance(expr, FieldAccess):
            base = self.lookup(expr.base)
            if not isinstance(base, dict):
                raise Failed(f"{expr.base!r} is not a record")
            if expr.field not in base:
                raise Failed(f"record has no field {expr.field!r}")
            return base[expr.field]
        if isinstance(expr, EmptyList):
            return []
        if isinstance(expr, RecordLit):
            record = {}
            for name, value_expr in expr.fields:
                value = self.evaluate(value_expr)
                if not isinstance(value, str):
                    raise Failed("record fields must be strings")
                record[name] = value
            return record
        raise Failed(f"bad expression {expr!r}")

    def _assign(self, name: str, value: RuntimeValue) -> None:
        if name in self.locals:
            self.locals[name] = value
        elif name in self.state.globals:
            self._require("write", name, kind="mutate")
            self.state.globals[name] = value
        else:
            self.state.globals[name] = value
            self.state.owners[name] = self.principal

    # -- one clause per command ----------------------------------------

    def exec_create_principal(self, cmd: CreatePrincipal) -> dict:
        if self.principal != ADMIN:
            raise Denied("only admin may create principals", kind="mutate")
        if cmd.name in self.state.principals:
            raise Failed(f"principal {cmd.name!r} exists")
        self.state.principals[cmd.name] = PasswordEntry.create(cmd.password)
        self._apply_default_delegation(cmd.name)
        return {"status": "CREATE_PRINCIPAL"}

    def _apply_default_delegation(self, grantee: str) -> None:
        delegator = self.state.default_delegator
        if delegator == ADMIN:
            # admin's rights are positional, not assertions; granting "all of
            # admin" would hand out everything, so the initial default is a
            # deliberate no-op
            return
        for variable in list(self.state.globals):
            if not check_right(self.state, delegator, "delegate", variable):
                continue
            for right in RIGHTS:
                if check_right(self.state, delegator, right, variable):
                    self._add_assertion(
                        DelegationAssertion(variable, delegator, right, grantee)
                    )

    def _add_assertion(self, assertion: DelegationAssertion) -> None:
        if assertion not in self.state.assertions:
            self.state.assertions.append(assertion)

    def exec_change_password(self, cmd: ChangePassword) -> dict:
        if self.principal != ADMIN and self.principal != cmd.name:
            raise Denied("may only change own password", kind="mutate")
        self._require_principal(cmd.name)
        self.state.principals[cmd.name] = PasswordEntry.create(cmd.password)
        return {"status": "CHANGE_PASSWORD"}

    def exec_set(self, cmd: Set) -> dict:
        value = self.evaluate(cmd.expr)
        self._assign(cmd.name, value)
        return {"status": "SET"}

    def exec_append_to(self, cmd: AppendTo) -> dict:
        value = self.evaluate(cmd.expr)
        if cmd.name in self.locals:
            target = self.locals[cmd.name]
        elif cmd.name in self.state.globals:
            if not (
                check_right(self.state, self.principal, "append", cmd.name)
                or check_right(self.state, self.principal, "write", cmd.name)
            ):
                raise Denied(f"no append right on {cmd.name!r}", kind="mutate")
            target = self.state.globals[cmd.name]
        else:
            raise Failed(f"unknown variable {cmd.name!r}")
        if not isinstance(target, list):
            raise Failed(f"{cmd.name!r} is not a list")
        if isinstance(value, list):
            target.extend(value)
        else:
            target.append(value)
        return {"status": "APPEND"}

    def exec_local(self, cmd: Local) -> dict:
        value = self.evaluate(cmd.expr)
        if cmd.name in self.locals or cmd.name in self.state.globals:
            raise Failed(f"variable {cmd.name!r} exists")
        self.locals[cmd.name] = value
        return {"status": "LOCAL"}

    def exec_foreach(self, cmd: Foreach) -> dict:
        if cmd.loop_var in self.locals or cmd.loop_var in self.state.globals:
            raise Failed(f"variable {cmd.loop_var!r} exists")
        if cmd.list_var in self.locals:
            target = self.locals[cmd.list_var]
        elif cmd.list_var in self.state.globals:
            self._require("read", cmd.list_var, kind="read")
            self._require("write", cmd.list_var, kind="mutate")
            target = self.state.globals[cmd.list_var]
        else:
            raise Failed(f"unknown variable {cmd.list_var!r}")
        if not isinstance(target, list):
            raise Failed(f"{cmd.list_var!r} is not a list")
        replaced = []
        for element in target:
            self.locals[cmd.loop_var] = element
            try:
                value = self.evaluate(cmd.expr)
            finally:
                del self.locals[cmd.loop_var]
            if isinstance(value, list):
                raise Failed("replacement value may not be a list")
            replaced.append(value)
        target[:] = replaced
        return {"status": "FOREACH"}

    def _delegation_parties(self, issuer: str, grantee: str) -> None:
        self._require_principal(issuer)
        self._require_principal(grantee)

    def exec_set_delegation(self, cmd: SetDelegation) -> dict:
        self._delegation_parties(cmd.issuer, cmd.grantee)
        if self.principal != ADMIN and self.principal != cmd.issuer:
            raise Denied("may only delegate as yourself", kind="mutate")
        if cmd.target == ALL_TARGETS:
            for variable in sorted(self.state.globals):
                if check_right(
                    self.state, cmd.issuer, "delegate", variable
                ) and check_right(self.state, cmd.issuer, cmd.right, variable):
                    self._add_assertion(
                        DelegationAssertion(variable, cmd.issuer, cmd.right, cmd.grantee)
                    )
            return {"status": "SET_DELEGATION"}
        if cmd.target not in self.state.globals:
            raise Failed(f"unknown variable {cmd.target!r}")
        if not check_right(self.state, cmd.issuer, "delegate", cmd.target):
            raise Denied("issuer lacks the delegate right", kind="mutate")
        if not check_right(self.state, cmd.issuer, cmd.right, cmd.target):
            raise Denied("issuer lacks the delegated right", kind="mutate")
        self._add_assertion(
            DelegationAssertion(cmd.target, cmd.issuer, cmd.right, cmd.grantee)
        )
        return {"status": "SET_DELEGATION"}

    def exec_delete_delegation(self, cmd: DeleteDelegation) -> dict:
        self._delegation_parties(cmd.issuer, cmd.grantee)
        if self.principal != ADMIN and self.principal != cmd.issuer:
            raise Denied("may only revoke your own delegations", kind="mutate")
        if cmd.target == ALL_TARGETS:
            self.state.assertions = [
                a
                for a in self.state.assertions
                if not (
                    a.issuer == cmd.issuer
                    and a.right == cmd.right
                    and a.grantee == cmd.grantee
                )
            ]
            return {"status": "DELETE_DELEGATION"}
        if cmd.target not in self.state.globals:
            raise Failed(f"unknown variable {cmd.target!r}")
        assertion = DelegationAssertion(cmd.target, cmd.issuer, cmd.right, cmd.grantee)
        self.state.assertions = [a for a in self.state.assertions if a != assertion]
        return {"status": "DELETE_DELEGATION"}

    def exec_default_delegator(self, cmd: DefaultDelegator) -> dict:
        if self.principal != ADMIN:
            raise Denied("only admin may set the default delegator", kind="mutate")
        self._require_principal(cmd.name)
        self.state.default_delegator = cmd.name
        return {"status": "DEFAULT_DELEGATOR"}

    DISPATCH = {
        CreatePrincipal: exec_create_principal,
        ChangePassword: exec_change_password,
        Set: exec_set,
        AppendTo: exec_append_to,
        Local: exec_local,
        Foreach: exec_foreach,
        SetDelegation: exec_set_delegation,
        DeleteDelegation: exec_delete_delegation,
        DefaultDelegator: exec_default_delegator,
    }

    def exec_prim(self, cmd: syntax.PrimCmd) -> dict:
        handler = self.DISPATCH.get(type(cmd))
        if handler is None:
            raise Failed(f"unknown command {cmd!r}")
        return handler(self, cmd)


def serialize_value(value: RuntimeValue):
    """JSON shape of a runtime value for RETURNING output."""
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return [serialize_value(v) for v in value]
    if isinstance(value, dict):
        return dict(value)
    raise Failed(f"unserializable value {value!r}")


def authenticate(state: ServerState, principal: str, password: str) -> None:
    entry = state.principals.get(principal)
    if entry is None:
        raise Failed(f"unknown principal {principal!r}")
    if not entry.matches(password):
        raise Denied("wrong password", kind="auth")


def execute_program(state: ServerState, program: Program) -> ExecResult:
    """Run one program transactionally against `state`.

    Returns the committed state on success, the *original* state plus a
    single DENIED/FAILED line otherwise.
    """
    working = copy.deepcopy(state)
    statuses: list[dict] = []
    try:
        authenticate(working, program.principal, program.password)
        execution = _Execution(working, program.principal)
        for command in program.commands:
            statuses.append(execution.exec_prim(command))
        if isinstance(program.terminator, Exit):
            if program.principal != ADMIN:
                raise Denied("only admin may exit the server", kind="mutate")
            statuses.append({"status": "EXITING"})
            return ExecResult(statuses, working, ok=True, exiting=True)
        value = execution.evaluate(program.terminator.expr)
        statuses.append({"status": "RETURNING", "output": serialize_value(value)})
        return ExecResult(statuses, working, ok=True)
    except Denied as exc:
        return ExecResult(
            [{"status": "DENIED"}], state, ok=False, denied_kind=exc.kind
        )
    except Failed:
        return ExecResult([{"status": "FAILED"}], state, ok=False, failed=True)


def failed_result(state: ServerState) -> ExecResult:
    """The single-line answer for unparseable or oversized input."""
    return ExecResult([{"status": "FAILED"}], state, ok=False, failed=True)


def render_status(status: dict) -> str:
    return json.dumps(status, separators=(",", ":"))
