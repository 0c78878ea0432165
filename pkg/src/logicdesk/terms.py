"""Term model and the structural operations the engine is built on.

A term is a Var, Atom, Int, Float, Str, or Compound.  Lists are sugar for
'.'/2 cells ending in the atom '[]'.  Variables are mutable cells bound
destructively and undone through a trail; every other term is immutable.
"""

from __future__ import annotations

import itertools

_var_ids = itertools.count(1)


class Var:
    """A logic variable: an unbound cell or a reference to its binding."""

    __slots__ = ("id", "name", "ref")

    def __init__(self, name: str | None = None):
        self.id = next(_var_ids)
        self.name = name
        self.ref = None

    def display_name(self) -> str:
        return self.name if self.name else f"_G{self.id}"

    def __repr__(self):
        return f"Var({self.display_name()})"


class Atom:
    """A constant symbol.  `pos` is the source offset when read from text."""

    __slots__ = ("name", "pos")

    def __init__(self, name: str, pos: int | None = None):
        self.name = name
        self.pos = pos

    def __eq__(self, other):
        return isinstance(other, Atom) and other.name == self.name

    def __hash__(self):
        return hash(("atom", self.name))

    def __repr__(self):
        return f"Atom({self.name!r})"


class Int:
    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value

    def __eq__(self, other):
        return isinstance(other, Int) and other.value == self.value

    def __hash__(self):
        return hash(("int", self.value))

    def __repr__(self):
        return f"Int({self.value})"


class Float:
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = value

    def __eq__(self, other):
        return isinstance(other, Float) and other.value == self.value

    def __hash__(self):
        return hash(("float", self.value))

    def __repr__(self):
        return f"Float({self.value})"


class Str:
    __slots__ = ("value",)

    def __init__(self, value: str):
        self.value = value

    def __eq__(self, other):
        return isinstance(other, Str) and other.value == self.value

    def __hash__(self):
        return hash(("str", self.value))

    def __repr__(self):
        return f"Str({self.value!r})"


class Compound:
    """A functor applied to one or more arguments (arity >= 1)."""

    __slots__ = ("name", "args", "pos")

    def __init__(self, name: str, args: list, pos: int | None = None):
        self.name = name
        self.args = args
        self.pos = pos

    def __repr__(self):
        return f"Compound({self.name!r}/{len(self.args)})"


EMPTY_LIST = Atom("[]")
TRUE = Atom("true")


def deref(t):
    while type(t) is Var:
        if t.ref is None:
            return t
        t = t.ref
    return t


def bind(var: Var, value, trail: list) -> None:
    var.ref = value
    trail.append(var)


def undo_to(trail: list, mark: int) -> None:
    while len(trail) > mark:
        trail.pop().ref = None


def unify(a, b, trail: list) -> bool:
    """Unify without occurs-check.  On failure the trail is restored to the
    state at entry, so a failed unification leaves no residual bindings."""
    mark = len(trail)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x)
        y = deref(y)
        if x is y:
            continue
        tx = type(x)
        ty = type(y)
        if tx is Var:
            bind(x, y, trail)
        elif ty is Var:
            bind(y, x, trail)
        elif tx is Atom:
            if ty is not Atom or x.name != y.name:
                undo_to(trail, mark)
                return False
        elif tx is Int:
            if ty is not Int or x.value != y.value:
                undo_to(trail, mark)
                return False
        elif tx is Float:
            if ty is not Float or x.value != y.value:
                undo_to(trail, mark)
                return False
        elif tx is Str:
            if ty is not Str or x.value != y.value:
                undo_to(trail, mark)
                return False
        else:  # Compound
            if (
                ty is not Compound
                or x.name != y.name
                or len(x.args) != len(y.args)
            ):
                undo_to(trail, mark)
                return False
            stack.extend(zip(x.args, y.args))
    return True


def copy_terms(ts: list, mapping: dict | None = None) -> list:
    """Copy terms with fresh variables, sharing the variable mapping across
    all of them.  Iterative so deep lists cannot blow the Python stack."""
    if mapping is None:
        mapping = {}
    out = []
    for t in ts:
        out.append(_copy(t, mapping))
    return out


def copy_term(t, mapping: dict | None = None):
    return _copy(t, {} if mapping is None else mapping)


def _copy(t, mapping):
    t = deref(t)
    tt = type(t)
    if tt is Var:
        v = mapping.get(t.id)
        if v is None:
            v = Var(t.name)
            mapping[t.id] = v
        return v
    if tt is not Compound:
        return t
    # Iterative post-order rebuild of the compound spine.
    root = Compound(t.name, [None] * len(t.args), t.pos)
    work = [(t, root)]
    while work:
        src, dst = work.pop()
        for i, arg in enumerate(src.args):
            arg = deref(arg)
            ta = type(arg)
            if ta is Var:
                v = mapping.get(arg.id)
                if v is None:
                    v = Var(arg.name)
                    mapping[arg.id] = v
                dst.args[i] = v
            elif ta is Compound:
                child = Compound(arg.name, [None] * len(arg.args), arg.pos)
                dst.args[i] = child
                work.append((arg, child))
            else:
                dst.args[i] = arg
    return root


_ORDER_RANK = {Var: 0, Float: 1, Int: 1, Atom: 2, Str: 3, Compound: 4}


def compare_terms(a, b) -> int:
    """Standard order of terms: Var < Number < Atom < String < Compound.
    Returns -1, 0, or 1."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x)
        y = deref(y)
        if x is y:
            continue
        rx = _ORDER_RANK[type(x)]
        ry = _ORDER_RANK[type(y)]
        if rx != ry:
            return -1 if rx < ry else 1
        tx = type(x)
        if tx is Var:
            if x.id != y.id:
                return -1 if x.id < y.id else 1
        elif rx == 1:  # numbers, compared by value; float precedes equal int
            if x.value != y.value:
                return -1 if x.value < y.value else 1
            if type(x) is not type(y):
                return -1 if type(x) is Float else 1
        elif tx is Atom:
            if x.name != y.name:
                return -1 if x.name < y.name else 1
        elif tx is Str:
            if x.value != y.value:
                return -1 if x.value < y.value else 1
        else:  # Compound: arity, then name, then args left to right
            if len(x.args) != len(y.args):
                return -1 if len(x.args) < len(y.args) else 1
            if x.name != y.name:
                return -1 if x.name < y.name else 1
            stack.extend(reversed(list(zip(x.args, y.args))))
    return 0


def term_variables(t) -> list:
    """Unbound variables in t, in first-occurrence (left-to-right) order."""
    seen = set()
    out = []
    stack = [t]
    while stack:
        cur = deref(stack.pop())
        if type(cur) is Var:
            if cur.id not in seen:
                seen.add(cur.id)
                out.append(cur)
        elif type(cur) is Compound:
            stack.extend(reversed(cur.args))
    return out


def make_list(items: list, tail=None):
    result = tail if tail is not None else EMPTY_LIST
    for item in reversed(items):
        result = Compound(".", [item, result])
    return result


def list_elements(t) -> tuple[list, object]:
    """Walk a list spine; returns (elements, tail) with tail dereferenced.
    A proper list has tail == '[]'."""
    elems = []
    t = deref(t)
    while type(t) is Compound and t.name == "." and len(t.args) == 2:
        elems.append(t.args[0])
        t = deref(t.args[1])
    return elems, t


def is_proper_list(t) -> bool:
    _, tail = list_elements(t)
    return type(tail) is Atom and tail.name == "[]"


def functor_of(t) -> tuple[str, int] | None:
    """(name, arity) of an atom or compound, else None."""
    t = deref(t)
    if type(t) is Atom:
        return (t.name, 0)
    if type(t) is Compound:
        return (t.name, len(t.args))
    return None
