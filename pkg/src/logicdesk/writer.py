"""Term writing: plain write and writeq (re-readable quoted form).

The writer honors an operator table, parenthesizes by priority, and runs
on an explicit work stack with a nesting cap, so accidental cyclic terms
(possible without occurs-check) print as "..." instead of hanging.
"""

from __future__ import annotations

from .ops import MAX_PRIORITY, OperatorTable
from .terms import Atom, Compound, Float, Int, Str, Var, deref

WRITE_DEPTH_CAP = 10000

_SYMBOL_CHARS = set("#$&*+-./:<=>?@^~\\")
_SOLO_ATOMS = {"!", ";", "[]", "{}"}

_ESCAPES = {
    "\\": "\\\\",
    "'": "\\'",
    "\n": "\\n",
    "\t": "\\t",
    "\r": "\\r",
    "\a": "\\a",
    "\b": "\\b",
    "\f": "\\f",
    "\v": "\\v",
}


def atom_needs_quotes(name: str) -> bool:
    if name in _SOLO_ATOMS:
        return False
    if not name:
        return True
    if name[0].islower() and name[0].isalpha():
        return not all(c.isalnum() or c == "_" for c in name)
    if all(c in _SYMBOL_CHARS for c in name):
        return False
    return True


def _quote_atom(name: str) -> str:
    out = ["'"]
    for c in name:
        out.append(_ESCAPES.get(c, c))
    out.append("'")
    return "".join(out)


def _quote_string(value: str) -> str:
    out = ['"']
    for c in value:
        if c == '"':
            out.append('\\"')
        else:
            out.append(_ESCAPES.get(c, c))
    out.append('"')
    return "".join(out)


def format_float(value: float) -> str:
    text = repr(value)
    if "e" in text or "E" in text or "." in text or text in ("inf", "-inf", "nan"):
        return text
    return text + ".0"


# Work-stack items:
#   ("t", term, maxp, depth, op_ctx)  write a term; op_ctx marks operator
#                                     arguments, where a bare operator atom
#                                     would be misread and needs parens
#   ("emit", text)                    emit with token-separation spacing
#   ("raw", text)                     append verbatim (structural punctuation)
#   ("fix", name, index)              post-fix spacing after a prefix operator
#   ("ltail", tail, depth)            continue a list spine


class _Writer:
    def __init__(self, ops: OperatorTable, quoted: bool, depth_cap: int):
        self.ops = ops
        self.quoted = quoted
        self.depth_cap = depth_cap
        self.parts: list[str] = []

    def emit(self, text: str):
        # Insert a space where the previous and next characters would
        # otherwise lex as one token (e.g. "1+ -2", "a- -b").
        if self.parts and text:
            prev = self.parts[-1][-1]
            nxt = text[0]
            if (prev in _SYMBOL_CHARS and nxt in _SYMBOL_CHARS) or (
                (prev.isalnum() or prev == "_") and (nxt.isalnum() or nxt == "_")
            ):
                self.parts.append(" ")
        self.parts.append(text)

    def atom_text(self, name: str) -> str:
        if self.quoted and atom_needs_quotes(name):
            return _quote_atom(name)
        return name

    def run(self, term, maxp: int):
        stack = [("t", term, maxp, 0, False)]
        while stack:
            item = stack.pop()
            op = item[0]
            if op == "emit":
                self.emit(item[1])
            elif op == "raw":
                self.parts.append(item[1])
            elif op == "fix":
                _, name, idx = item
                first = self.parts[idx] if idx < len(self.parts) else ""
                # Keep "op(" from reading as a compound, and keep a sign
                # from merging with a numeric literal ("- 1", not "-1").
                if first[:1] == "(" or (name in ("-", "+") and first[:1].isdigit()):
                    self.parts.insert(idx, " ")
            elif op == "ltail":
                self._list_tail(item[1], item[2], stack)
            else:
                self._term(item[1], item[2], item[3], stack, item[4])

    def _term(self, t, maxp: int, depth: int, stack, op_ctx: bool = False):
        if depth > self.depth_cap:
            self.emit("...")
            return
        t = deref(t)
        tt = type(t)
        if tt is Var:
            self.emit(t.display_name())
        elif tt is Int:
            self.emit(str(t.value))
        elif tt is Float:
            self.emit(format_float(t.value))
        elif tt is Str:
            self.emit(_quote_string(t.value) if self.quoted else t.value)
        elif tt is Atom:
            if op_ctx and self.ops.is_operator(t.name):
                self.emit("(")
                self.emit(self.atom_text(t.name))
                self.emit(")")
            else:
                self.emit(self.atom_text(t.name))
        else:
            self._compound(t, maxp, depth, stack)

    def _compound(self, t: Compound, maxp: int, depth: int, stack):
        name = t.name
        arity = len(t.args)
        if name == "." and arity == 2:
            self.parts.append("[")
            stack.append(("ltail", t.args[1], depth + 1))
            stack.append(("t", t.args[0], 999, depth + 1, False))
            return
        if arity == 2:
            entry = self.ops.infix(name)
            if entry is not None:
                p, op_type = entry
                left_max = p if op_type == "yfx" else p - 1
                right_max = p if op_type == "xfy" else p - 1
                wrap = p > maxp
                if wrap:
                    self.emit("(")
                    stack.append(("emit", ")"))
                stack.append(("t", t.args[1], right_max, depth + 1, True))
                if name == ",":
                    stack.append(("raw", ","))
                else:
                    stack.append(("emit", self.atom_text(name)))
                stack.append(("t", t.args[0], left_max, depth + 1, True))
                return
        if arity == 1:
            entry = self.ops.prefix(name)
            if entry is not None:
                p, op_type = entry
                arg_max = p if op_type == "fy" else p - 1
                wrap = p > maxp
                if wrap:
                    self.emit("(")
                    stack.append(("emit", ")"))
                self.emit(self.atom_text(name))
                stack.append(("fix", name, len(self.parts)))
                stack.append(("t", t.args[0], arg_max, depth + 1, True))
                return
            entry = self.ops.postfix(name)
            if entry is not None:
                p, op_type = entry
                arg_max = p if op_type == "yf" else p - 1
                wrap = p > maxp
                if wrap:
                    self.emit("(")
                    stack.append(("emit", ")"))
                stack.append(("emit", self.atom_text(name)))
                stack.append(("t", t.args[0], arg_max, depth + 1, True))
                return
        self.emit(self.atom_text(name))
        self.parts.append("(")
        stack.append(("raw", ")"))
        for i in range(arity - 1, -1, -1):
            stack.append(("t", t.args[i], 999, depth + 1, False))
            if i:
                stack.append(("raw", ","))

    def _list_tail(self, tail, depth: int, stack):
        if depth > self.depth_cap:
            self.emit("...")
            self.parts.append("]")
            return
        tail = deref(tail)
        if type(tail) is Compound and tail.name == "." and len(tail.args) == 2:
            self.parts.append(",")
            stack.append(("ltail", tail.args[1], depth + 1))
            stack.append(("t", tail.args[0], 999, depth + 1, False))
            return
        if type(tail) is Atom and tail.name == "[]":
            self.parts.append("]")
            return
        self.parts.append("|")
        stack.append(("raw", "]"))
        stack.append(("t", tail, 999, depth, False))


def write_term(
    t,
    ops: OperatorTable | None = None,
    quoted: bool = False,
    max_priority: int = MAX_PRIORITY,
    depth_cap: int = WRITE_DEPTH_CAP,
) -> str:
    w = _Writer(ops or OperatorTable.default(), quoted, depth_cap)
    w.run(t, max_priority)
    return "".join(w.parts)


def term_text(t, ops: OperatorTable | None = None) -> str:
    """write/1 form: operators honored, atoms unquoted."""
    return write_term(t, ops, quoted=False)


def writeq_text(t, ops: OperatorTable | None = None) -> str:
    """writeq/1 form: re-reading the text reproduces the term."""
    return write_term(t, ops, quoted=True)
