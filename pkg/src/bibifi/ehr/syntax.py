"""AST for the data-server command language, one node per production."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

RIGHTS = ("read", "write", "append", "delegate")

ALL_TARGETS = "all"  # the <tgt> wildcard


# expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Str:
    text: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class FieldAccess:
    base: str
    field: str


Value = Union[Str, Var, FieldAccess]


@dataclass(frozen=True)
class EmptyList:
    pass


@dataclass(frozen=True)
class RecordLit:
    fields: tuple[tuple[str, Value], ...]


Expr = Union[Str, Var, FieldAccess, EmptyList, RecordLit]


# commands --------------------------------------------------------------

@dataclass(frozen=True)
class CreatePrincipal:
    name: str
    password: str


@dataclass(frozen=True)
class ChangePassword:
    name: str
    password: str


@dataclass(frozen=True)
class Set:
    name: str
    expr: Expr


@dataclass(frozen=True)
class AppendTo:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Local:
    name: str
    expr: Expr


@dataclass(frozen=True)
class Foreach:
    loop_var: str
    list_var: str
    expr: Expr


@dataclass(frozen=True)
class SetDelegation:
    target: str  # variable name or ALL_TARGETS
    issuer: str
    right: str
    grantee: str


@dataclass(frozen=True)
class DeleteDelegation:
    target: str
    issuer: str
    right: str
    grantee: str


@dataclass(frozen=True)
class DefaultDelegator:
    name: str


PrimCmd = Union[
    CreatePrincipal,
    ChangePassword,
    Set,
    AppendTo,
    Local,
    Foreach,
    SetDelegation,
    DeleteDelegation,
    DefaultDelegator,
]


@dataclass(frozen=True)
class Exit:
    pass


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Program:
    principal: str
    password: str
    commands: tuple[PrimCmd, ...]
    terminator: Union[Exit, Return]


# printing (inverse of the parser, used for round-trip checks) ----------

def _print_value(value: Expr) -> str:
    if isinstance(value, Str):
        return f'"{value.text}"'
    if isinstance(value, Var):
        return value.name
    if isinstance(value, FieldAccess):
        return f"{value.base}.{value.field}"
    if isinstance(value, EmptyList):
        return "[]"
    if isinstance(value, RecordLit):
        inner = ",".join(f"{name}={_print_value(v)}" for name, v in value.fields)
        return "{" + inner + "}"
    raise TypeError(f"not an expression: {value!r}")


def _print_command(cmd: PrimCmd) -> str:
    if isinstance(cmd, CreatePrincipal):
        return f'create principal {cmd.name} "{cmd.password}"'
    if isinstance(cmd, ChangePassword):
        return f'change password {cmd.name} "{cmd.password}"'
    if isinstance(cmd, Set):
        return f"set {cmd.name} = {_print_value(cmd.expr)}"
    if isinstance(cmd, AppendTo):
        return f"append to {cmd.name} with {_print_value(cmd.expr)}"
    if isinstance(cmd, Local):
        return f"local {cmd.name} = {_print_value(cmd.expr)}"
    if isinstance(cmd, Foreach):
        return (
            f"foreach {cmd.loop_var} in {cmd.list_var} "
            f"replacewith {_print_value(cmd.expr)}"
        )
    if isinstance(cmd, SetDelegation):
        return f"set delegation {cmd.target} {cmd.issuer} {cmd.right} -> {cmd.grantee}"
    if isinstance(cmd, DeleteDelegation):
        return (
            f"delete delegation {cmd.target} {cmd.issuer} {cmd.right} -> {cmd.grantee}"
        )
    if isinstance(cmd, DefaultDelegator):
        return f"default delegator = {cmd.name}"
    raise TypeError(f"not a command: {cmd!r}")


def print_program(program: Program) -> str:
    lines = [f'as principal {program.principal} password "{program.password}" do']
    for cmd in program.commands:
        lines.append("   " + _print_command(cmd))
    if isinstance(program.terminator, Exit):
        lines.append("   exit")
    else:
        lines.append("   return " + _print_value(program.terminator.expr))
    lines.append("***")
    return "\n".join(lines) + "\n"
