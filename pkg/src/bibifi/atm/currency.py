"""Exact currency arithmetic in integer cents.

Amounts are bounded decimals with at most two fraction digits; everything
internal is an int, so sums of deposits and withdrawals never drift.
"""

from __future__ import annotations

import re

MAX_CENTS = 429496729599  # 4294967295.99

_AMOUNT_RE = re.compile(r"(0|[1-9][0-9]*)(?:\.([0-9]{1,2}))?\Z")

ACCOUNT_RE = re.compile(r"[A-Za-z0-9_.\-]{1,122}\Z")


class BadAmount(ValueError):
    pass


def parse_amount(text: str) -> int:
    """'63.10' -> 6310 cents; rejects signs, exponents, and out-of-range."""
    match = _AMOUNT_RE.match(text)
    if not match:
        raise BadAmount(f"bad amount {text!r}")
    whole, frac = match.group(1), match.group(2) or ""
    cents = int(whole) * 100 + int(frac.ljust(2, "0") or 0)
    if cents > MAX_CENTS:
        raise BadAmount("amount out of range")
    return cents


def render_amount(cents: int) -> str:
    """Cents -> display number with trailing fractional zeros trimmed:
    6310 -> '63.1', 100000 -> '1000'."""
    if cents < 0:
        raise BadAmount("negative amount")
    whole, frac = divmod(cents, 100)
    if frac == 0:
        return str(whole)
    text = f"{whole}.{frac:02d}"
    return text.rstrip("0")


def valid_account(name: str) -> bool:
    return bool(ACCOUNT_RE.match(name))
