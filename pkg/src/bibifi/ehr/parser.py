"""Recursive-descent parser for the data-server command language.

Line structure is significant: the header, each command, and the ``***``
terminator sit on their own lines.  Within a line, spacing is free.  String
literals are double-quoted printable ASCII (no double quote, no escapes),
at most 65535 characters; identifiers are [A-Za-z][A-Za-z0-9_]{0,254} and
may not collide with a keyword.
"""

from __future__ import annotations

import re

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

MAX_STRING = 65535
MAX_IDENT = 255
MAX_PROGRAM_BYTES = 1_000_000

KEYWORDS = frozenset(
    """
    all append as change create default delegate delegation delegator delete
    do exit foreach in local password principal read replacewith return set
    to with write
    """.split()
)

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_STRING_RE = re.compile(r'"([ -!#-~]*)"')  # printable ASCII minus double quote


class ParseError(ValueError):
    pass


class _Line:
    """Token cursor over a single line."""

    def __init__(self, text: str, number: int):
        self.text = text
        self.number = number
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r":
            self.pos += 1

    def at_end(self) -> bool:
        self._skip_ws()
        return self.pos >= len(self.text)

    def fail(self, why: str):
        raise ParseError(f"line {self.number}: {why}")

    def peek_word(self) -> str | None:
        self._skip_ws()
        match = _IDENT_RE.match(self.text, self.pos)
        return match.group(0) if match else None

    def take_keyword(self, word: str) -> None:
        if self.peek_word() != word:
            self.fail(f"expected {word!r}")
        self.pos += len(word)

    def try_keyword(self, word: str) -> bool:
        if self.peek_word() == word:
            self.pos += len(word)
            return True
        return False

    def take_identifier(self) -> str:
        word = self.peek_word()
        if word is None:
            self.fail("expected an identifier")
        if word in KEYWORDS:
            self.fail(f"{word!r} is reserved")
        if len(word) > MAX_IDENT:
            self.fail("identifier too long")
        self.pos += len(word)
        return word

    def take_string(self) -> str:
        self._skip_ws()
        match = _STRING_RE.match(self.text, self.pos)
        if not match:
            self.fail("expected a string literal")
        literal = match.group(1)
        if len(literal) > MAX_STRING:
            self.fail("string literal too long")
        self.pos = match.end()
        return literal

    def take_symbol(self, symbol: str) -> None:
        self._skip_ws()
        if not self.text.startswith(symbol, self.pos):
            self.fail(f"expected {symbol!r}")
        self.pos += len(symbol)

    def try_symbol(self, symbol: str) -> bool:
        self._skip_ws()
        if self.text.startswith(symbol, self.pos):
            self.pos += len(symbol)
            return True
        return False

    def expect_end(self) -> None:
        if not self.at_end():
            self.fail(f"trailing input {self.text[self.pos:]!r}")


def _parse_value(line: _Line):
    word = line.peek_word()
    if word is not None and word not in KEYWORDS:
        name = line.take_identifier()
        if line.try_symbol("."):
            field = line.take_identifier()
            return FieldAccess(name, field)
        return Var(name)
    return Str(line.take_string())


def _parse_expr(line: _Line):
    if line.try_symbol("["):
        line.take_symbol("]")
        return EmptyList()
    if line.try_symbol("{"):
        fields: list[tuple[str, syntax.Value]] = []
        seen: set[str] = set()
        while True:
            name = line.take_identifier()
            if name in seen:
                line.fail(f"duplicate record field {name!r}")
            seen.add(name)
            line.take_symbol("=")
            fields.append((name, _parse_value(line)))
            if line.try_symbol("}"):
                return RecordLit(tuple(fields))
            line.take_symbol(",")
    return _parse_value(line)


def _parse_right(line: _Line) -> str:
    word = line.peek_word()
    if word not in RIGHTS:
        line.fail("expected a right (read, write, append, delegate)")
    line.pos += len(word)
    return word


def _parse_target(line: _Line) -> str:
    if line.try_keyword("all"):
        return ALL_TARGETS
    return line.take_identifier()


def _parse_command(line: _Line):
    if line.try_keyword("create"):
        line.take_keyword("principal")
        return CreatePrincipal(line.take_identifier(), line.take_string())
    if line.try_keyword("change"):
        line.take_keyword("password")
        return ChangePassword(line.take_identifier(), line.take_string())
    if line.try_keyword("set"):
        if line.try_keyword("delegation"):
            target = _parse_target(line)
            issuer = line.take_identifier()
            right = _parse_right(line)
            line.take_symbol("->")
            return SetDelegation(target, issuer, right, line.take_identifier())
        name = line.take_identifier()
        line.take_symbol("=")
        return Set(name, _parse_expr(line))
    if line.try_keyword("append"):
        line.take_keyword("to")
        name = line.take_identifier()
        line.take_keyword("with")
        return AppendTo(name, _parse_expr(line))
    if line.try_keyword("local"):
        name = line.take_identifier()
        line.take_symbol("=")
        return Local(name, _parse_expr(line))
    if line.try_keyword("foreach"):
        loop_var = line.take_identifier()
        line.take_keyword("in")
        list_var = line.take_identifier()
        line.take_keyword("replacewith")
        return Foreach(loop_var, list_var, _parse_expr(line))
    if line.try_keyword("delete"):
        line.take_keyword("delegation")
        target = _parse_target(line)
        issuer = line.take_identifier()
        right = _parse_right(line)
        line.take_symbol("->")
        return DeleteDelegation(target, issuer, right, line.take_identifier())
    if line.try_keyword("default"):
        line.take_keyword("delegator")
        line.take_symbol("=")
        return DefaultDelegator(line.take_identifier())
    line.fail("unknown command")


def parse_program(text: str) -> Program:
    """Parse one complete program (through its ``***`` terminator)."""
    if len(text.encode("utf-8", errors="replace")) > MAX_PROGRAM_BYTES:
        raise ParseError("program too large")
    try:
        text.encode("ascii")
    except UnicodeError as exc:
        raise ParseError("program is not ASCII") from exc
    raw_lines = text.split("\n")
    lines = [
        _Line(raw, i + 1) for i, raw in enumerate(raw_lines) if raw.strip() != ""
    ]
    if not lines:
        raise ParseError("empty program")
    header = lines[0]
    header.take_keyword("as")
    header.take_keyword("principal")
    principal = header.take_identifier()
    header.take_keyword("password")
    password = header.take_string()
    header.take_keyword("do")
    header.expect_end()

    commands: list[syntax.PrimCmd] = []
    terminator = None
    index = 1
    while index < len(lines):
        line = lines[index]
        index += 1
        if line.try_symbol("***"):
            line.expect_end()
            if terminator is None:
                line.fail("program must end with exit or return before ***")
            if index != len(lines):
                line.fail("input after ***")
            return Program(principal, password, tuple(commands), terminator)
        if terminator is not None:
            line.fail("command after the terminator")
        if line.try_keyword("exit"):
            line.expect_end()
            terminator = Exit()
            continue
        if line.try_keyword("return"):
            expr = _parse_expr(line)
            line.expect_end()
            terminator = Return(expr)
            continue
        command = _parse_command(line)
        line.expect_end()
        commands.append(command)
    raise ParseError("missing *** terminator")
