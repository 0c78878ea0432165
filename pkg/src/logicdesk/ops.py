"""Operator table for the reader and writer.

Operators are keyed by (name, position), where position is one of
"prefix", "infix", "postfix".  Each entry stores its priority (1..1200)
and type (xfx, xfy, yfx, fy, fx, xf, yf).
"""

from __future__ import annotations

PREFIX_TYPES = frozenset({"fy", "fx"})
INFIX_TYPES = frozenset({"xfx", "xfy", "yfx"})
POSTFIX_TYPES = frozenset({"xf", "yf"})
ALL_TYPES = PREFIX_TYPES | INFIX_TYPES | POSTFIX_TYPES

MAX_PRIORITY = 1200

# (priority, type, name); the set of operators the engine's builtins and
# prelude rely on.
DEFAULT_OPERATORS = [
    (1200, "xfx", ":-"),
    (1200, "fx", ":-"),
    (1200, "fx", "?-"),
    (1100, "xfy", ";"),
    (1050, "xfy", "->"),
    (1000, "xfy", ","),
    (900, "fy", "\\+"),
    (700, "xfx", "="),
    (700, "xfx", "\\="),
    (700, "xfx", "=="),
    (700, "xfx", "\\=="),
    (700, "xfx", "@<"),
    (700, "xfx", "@>"),
    (700, "xfx", "@=<"),
    (700, "xfx", "@>="),
    (700, "xfx", "=.."),
    (700, "xfx", "is"),
    (700, "xfx", "=:="),
    (700, "xfx", "=\\="),
    (700, "xfx", "<"),
    (700, "xfx", ">"),
    (700, "xfx", "=<"),
    (700, "xfx", ">="),
    (500, "yfx", "+"),
    (500, "yfx", "-"),
    (400, "yfx", "*"),
    (400, "yfx", "/"),
    (400, "yfx", "//"),
    (400, "yfx", "mod"),
    (400, "yfx", "rem"),
    (200, "xfx", "**"),
    (200, "xfy", "^"),
    (200, "xfy", ":"),
    (200, "fy", "-"),
    (200, "fy", "+"),
]


def _position_of(op_type: str) -> str:
    if op_type in PREFIX_TYPES:
        return "prefix"
    if op_type in INFIX_TYPES:
        return "infix"
    return "postfix"


class OperatorTable:
    """Mutable map of operator definitions, one table per workspace."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict | None = None):
        self.entries: dict[tuple[str, str], tuple[int, str]] = dict(entries or {})

    @classmethod
    def default(cls) -> "OperatorTable":
        table = cls()
        for priority, op_type, name in DEFAULT_OPERATORS:
            # ',' is seeded directly; add() refuses to redefine it later.
            table.entries[(name, _position_of(op_type))] = (priority, op_type)
        return table

    def copy(self) -> "OperatorTable":
        return OperatorTable(self.entries)

    def add(self, priority: int, op_type: str, name: str) -> None:
        """Define or redefine an operator; raises ValueError on bad input."""
        if not isinstance(priority, int) or not 1 <= priority <= MAX_PRIORITY:
            raise ValueError(f"operator priority out of range: {priority!r}")
        if op_type not in ALL_TYPES:
            raise ValueError(f"unknown operator type: {op_type!r}")
        if not isinstance(name, str) or not name:
            raise ValueError(f"operator name must be a non-empty atom: {name!r}")
        if name == ",":
            raise ValueError("the ',' operator cannot be redefined")
        self.entries[(name, _position_of(op_type))] = (priority, op_type)

    def lookup(self, name: str, position: str) -> tuple[int, str] | None:
        """Return (priority, type) or None."""
        return self.entries.get((name, position))

    def is_operator(self, name: str) -> bool:
        return any((name, pos) in self.entries for pos in ("prefix", "infix", "postfix"))

    def prefix(self, name: str) -> tuple[int, str] | None:
        return self.entries.get((name, "prefix"))

    def infix(self, name: str) -> tuple[int, str] | None:
        return self.entries.get((name, "infix"))

    def postfix(self, name: str) -> tuple[int, str] | None:
        return self.entries.get((name, "postfix"))
