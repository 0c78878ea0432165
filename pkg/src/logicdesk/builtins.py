"""Builtin predicates: handler table, meta-argument specs, arithmetic.

Handlers receive the running machine and the goal's argument list.  They
return True (deterministic success), False (failure), or a redo object
(first solution already produced; the machine drives retries through a
choicepoint).  Errors are raised as PrologError.
"""

from __future__ import annotations

import functools
import math

from . import errors
from .reader import COMMENT_KINDS, ReadError, read_term, tokenize
from .terms import (
    Atom,
    Compound,
    Float,
    Int,
    Str,
    Var,
    bind,
    compare_terms,
    copy_term,
    copy_terms,
    deref,
    is_proper_list,
    list_elements,
    make_list,
    term_variables,
)
from .writer import term_text, writeq_text

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

TRUE = Atom("true")


def _indicator(name: str, arity: int):
    return Compound("/", [Atom(name), Int(arity)])


def _check_int_range(v: int) -> int:
    if not (INT_MIN <= v <= INT_MAX):
        raise errors.evaluation_error("int_overflow")
    return v


# ---------------------------------------------------------------------------
# Arithmetic


def arith_eval(t):
    t = deref(t)
    tt = type(t)
    if tt is Int or tt is Float:
        return t.value
    if tt is Var:
        raise errors.instantiation_error()
    if tt is Atom:
        raise errors.type_error("evaluable", _indicator(t.name, 0))
    if tt is Compound:
        fn = _ARITH.get((t.name, len(t.args)))
        if fn is None:
            raise errors.type_error("evaluable", _indicator(t.name, len(t.args)))
        return fn(*[arith_eval(a) for a in t.args])
    raise errors.type_error("evaluable", t)


def _need_number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise errors.type_error("number", _to_term(v))
    return v


def _to_term(v):
    if isinstance(v, float):
        return Float(v)
    return Int(v)


def _arith_add(a, b):
    r = a + b
    return _check_int_range(r) if isinstance(r, int) else r


def _arith_sub(a, b):
    r = a - b
    return _check_int_range(r) if isinstance(r, int) else r


def _arith_mul(a, b):
    r = a * b
    return _check_int_range(r) if isinstance(r, int) else r


def _arith_div(a, b):
    if b == 0:
        raise errors.evaluation_error("zero_divisor")
    if isinstance(a, int) and isinstance(b, int):
        if a % b == 0:
            return _check_int_range(a // b)
        return a / b
    return a / b


def _trunc_div(a, b):
    if not (isinstance(a, int) and isinstance(b, int)):
        raise errors.type_error("integer", _to_term(a if not isinstance(a, int) else b))
    if b == 0:
        raise errors.evaluation_error("zero_divisor")
    q = a // b
    if q < 0 and q * b != a:
        q += 1  # floor -> truncate toward zero
    return _check_int_range(q)


def _arith_mod(a, b):
    if not (isinstance(a, int) and isinstance(b, int)):
        raise errors.type_error("integer", _to_term(a if not isinstance(a, int) else b))
    if b == 0:
        raise errors.evaluation_error("zero_divisor")
    return a % b


def _arith_rem(a, b):
    return _check_int_range(a - _trunc_div(a, b) * b)


def _arith_pow(a, b):
    if isinstance(a, int) and isinstance(b, int) and b >= 0:
        if abs(a) > 1 and b > 1024:
            raise errors.evaluation_error("int_overflow")
        return _check_int_range(a**b)
    return float(a) ** float(b)


def _arith_neg(a):
    r = -a
    return _check_int_range(r) if isinstance(r, int) else r


_ARITH = {
    ("+", 2): _arith_add,
    ("-", 2): _arith_sub,
    ("*", 2): _arith_mul,
    ("/", 2): _arith_div,
    ("//", 2): _trunc_div,
    ("mod", 2): _arith_mod,
    ("rem", 2): _arith_rem,
    ("**", 2): _arith_pow,
    ("^", 2): _arith_pow,
    ("min", 2): lambda a, b: min(a, b),
    ("max", 2): lambda a, b: max(a, b),
    ("-", 1): _arith_neg,
    ("+", 1): lambda a: a,
    ("abs", 1): lambda a: _check_int_range(abs(a)) if isinstance(a, int) else abs(a),
    ("sign", 1): lambda a: (a > 0) - (a < 0) if isinstance(a, int) else float((a > 0) - (a < 0)),
    ("float", 1): lambda a: float(a),
    ("truncate", 1): lambda a: _check_int_range(math.trunc(a)),
    ("floor", 1): lambda a: _check_int_range(math.floor(a)),
    ("ceiling", 1): lambda a: _check_int_range(math.ceil(a)),
    ("round", 1): lambda a: _check_int_range(math.floor(a + 0.5) if isinstance(a, float) else a),
}


# ---------------------------------------------------------------------------
# Redo objects: multi-solution builtins


class BetweenRedo:
    __slots__ = ("var", "next", "high")

    def __init__(self, var, nxt, high):
        self.var = var
        self.next = nxt
        self.high = high

    def redo(self, m):
        bind(self.var, Int(self.next), m.trail)
        if self.next < self.high:
            self.next += 1
            return True
        return "last"

    def close(self):
        pass


class LengthRedo:
    """Enumerates lists of increasing length for length/2 with both
    arguments unbound (or a partial list and unbound length)."""

    __slots__ = ("tail", "lenvar", "next")

    def __init__(self, tail, lenvar, nxt):
        self.tail = tail
        self.lenvar = lenvar
        self.next = nxt

    def redo(self, m):
        fresh = make_list([Var(None) for _ in range(self.next)])
        if not (m.unify(self.tail, fresh) and m.unify(self.lenvar, Int(self.next))):
            return False
        self.next += 1
        return True

    def close(self):
        pass


class IterRedo:
    """Unifies a target with successive pre-built terms (order_by etc.)."""

    __slots__ = ("target", "items", "index")

    def __init__(self, target, items, index=0):
        self.target = target
        self.items = items
        self.index = index

    def redo(self, m):
        while self.index < len(self.items):
            item = self.items[self.index]
            self.index += 1
            if m.unify(self.target, item):
                return True if self.index < len(self.items) else "last"
            # unification with a collected copy cannot leave bindings; retry
        return False

    def close(self):
        pass


# ---------------------------------------------------------------------------
# Handlers


def _bi_unify(m, args):
    return m.unify(args[0], args[1])


def _bi_not_unifiable(m, args):
    mark = len(m.trail)
    if m.unify(args[0], args[1]):
        while len(m.trail) > mark:
            m.trail.pop().ref = None
        return False
    return True


def _bi_structural_eq(m, args):
    return compare_terms(args[0], args[1]) == 0


def _bi_structural_neq(m, args):
    return compare_terms(args[0], args[1]) != 0


def _bi_compare(m, args):
    order, a, b = args
    c = compare_terms(a, b)
    sym = Atom("<") if c < 0 else (Atom(">") if c > 0 else Atom("="))
    o = deref(order)
    if type(o) is Atom and o.name not in ("<", ">", "="):
        raise errors.domain_error("order", o)
    return m.unify(order, sym)


def _bi_var(m, args):
    return type(deref(args[0])) is Var


def _bi_nonvar(m, args):
    return type(deref(args[0])) is not Var


def _bi_atom(m, args):
    return type(deref(args[0])) is Atom


def _bi_number(m, args):
    return type(deref(args[0])) in (Int, Float)


def _bi_integer(m, args):
    return type(deref(args[0])) is Int


def _bi_atomic(m, args):
    return type(deref(args[0])) in (Atom, Int, Float, Str)


def _bi_is_list(m, args):
    return is_proper_list(args[0])


def _bi_is(m, args):
    return m.unify(args[0], _to_term(arith_eval(args[1])))


def _num_compare(op):
    def handler(m, args):
        return op(arith_eval(args[0]), arith_eval(args[1]))

    return handler


def _bi_functor(m, args):
    t = deref(args[0])
    tt = type(t)
    if tt is Var:
        name = deref(args[1])
        arity = deref(args[2])
        if type(name) is Var or type(arity) is Var:
            raise errors.instantiation_error()
        if type(arity) is not Int:
            raise errors.type_error("integer", arity)
        n = arity.value
        if n == 0:
            if type(name) in (Atom, Int, Float, Str):
                return m.unify(t, name)
            raise errors.type_error("atomic", name)
        if type(name) is not Atom:
            raise errors.type_error("atom", name)
        if n < 0:
            raise errors.domain_error("not_less_than_zero", arity)
        return m.unify(t, Compound(name.name, [Var(None) for _ in range(n)]))
    if tt is Compound:
        return m.unify(args[1], Atom(t.name)) and m.unify(args[2], Int(len(t.args)))
    return m.unify(args[1], t) and m.unify(args[2], Int(0))


def _bi_arg(m, args):
    n = deref(args[0])
    t = deref(args[1])
    if type(n) is Var or type(t) is Var:
        raise errors.instantiation_error()
    if type(n) is not Int:
        raise errors.type_error("integer", n)
    if type(t) is not Compound:
        raise errors.type_error("compound", t)
    if 1 <= n.value <= len(t.args):
        return m.unify(args[2], t.args[n.value - 1])
    return False


def _bi_univ(m, args):
    t = deref(args[0])
    if type(t) is Var:
        elems, tail = list_elements(args[1])
        if type(tail) is Var:
            raise errors.instantiation_error()
        if not (type(tail) is Atom and tail.name == "[]"):
            raise errors.type_error("list", args[1])
        if not elems:
            raise errors.domain_error("non_empty_list", args[1])
        head = deref(elems[0])
        if len(elems) == 1:
            if type(head) in (Atom, Int, Float, Str):
                return m.unify(t, head)
            raise errors.type_error("atomic", head)
        if type(head) is not Atom:
            raise errors.type_error("atom", head)
        return m.unify(t, Compound(head.name, elems[1:]))
    if type(t) is Compound:
        return m.unify(args[1], make_list([Atom(t.name)] + list(t.args)))
    return m.unify(args[1], make_list([t]))


def _bi_copy_term(m, args):
    return m.unify(args[1], copy_term(args[0]))


def _bi_between(m, args):
    low = deref(args[0])
    high = deref(args[1])
    x = deref(args[2])
    if type(low) is Var or type(high) is Var:
        raise errors.instantiation_error()
    if type(low) is not Int:
        raise errors.type_error("integer", low)
    if type(high) is not Int:
        raise errors.type_error("integer", high)
    lo, hi = low.value, high.value
    if type(x) is Int:
        return lo <= x.value <= hi
    if type(x) is not Var:
        raise errors.type_error("integer", x)
    if lo > hi:
        return False
    bind(x, Int(lo), m.trail)
    if lo == hi:
        return True
    return BetweenRedo(x, lo + 1, hi)


def _bi_length(m, args):
    elems, tail = list_elements(args[0])
    n = deref(args[1])
    if type(n) is not Var and type(n) is not Int:
        raise errors.type_error("integer", n)
    if type(tail) is Atom and tail.name == "[]":
        return m.unify(args[1], Int(len(elems)))
    if type(tail) is not Var:
        raise errors.type_error("list", args[0])
    if type(n) is Int:
        missing = n.value - len(elems)
        if missing < 0:
            return False
        return m.unify(tail, make_list([Var(None) for _ in range(missing)]))
    redo = LengthRedo(tail, n, len(elems))
    if redo.redo(m) is False:  # n == current prefix length first
        return False
    return redo


def _bi_succ(m, args):
    a = deref(args[0])
    b = deref(args[1])
    if type(a) is Int:
        if a.value < 0:
            raise errors.type_error("not_less_than_zero", a)
        return m.unify(args[1], Int(_check_int_range(a.value + 1)))
    if type(b) is Int:
        if b.value < 0:
            raise errors.type_error("not_less_than_zero", b)
        if b.value == 0:
            return False
        return m.unify(args[0], Int(b.value - 1))
    raise errors.instantiation_error()


def _bi_plus(m, args):
    a, b, c = [deref(x) for x in args]
    known = [type(t) is Int for t in (a, b, c)]
    for t, k in zip((a, b, c), known):
        if not k and type(t) is not Var:
            raise errors.type_error("integer", t)
    if known[0] and known[1]:
        return m.unify(args[2], Int(_check_int_range(a.value + b.value)))
    if known[0] and known[2]:
        return m.unify(args[1], Int(_check_int_range(c.value - a.value)))
    if known[1] and known[2]:
        return m.unify(args[0], Int(_check_int_range(c.value - b.value)))
    raise errors.instantiation_error()


def _text_of(t, what="atom"):
    t = deref(t)
    tt = type(t)
    if tt is Atom:
        return t.name
    if tt is Int:
        return str(t.value)
    if tt is Float:
        from .writer import format_float

        return format_float(t.value)
    if tt is Str:
        return t.value
    if tt is Var:
        raise errors.instantiation_error()
    raise errors.type_error(what, t)


def _bi_atom_length(m, args):
    a = deref(args[0])
    if type(a) is Var:
        raise errors.instantiation_error()
    if type(a) is not Atom:
        raise errors.type_error("atom", a)
    return m.unify(args[1], Int(len(a.name)))


def _codes_to_text(t):
    elems, tail = list_elements(t)
    if not (type(tail) is Atom and tail.name == "[]"):
        raise errors.instantiation_error() if type(tail) is Var else errors.type_error("list", t)
    chars = []
    for e in elems:
        e = deref(e)
        if type(e) is Var:
            raise errors.instantiation_error()
        if type(e) is not Int:
            raise errors.type_error("character_code", e)
        chars.append(chr(e.value))
    return "".join(chars)


def _chars_to_text(t):
    elems, tail = list_elements(t)
    if not (type(tail) is Atom and tail.name == "[]"):
        raise errors.instantiation_error() if type(tail) is Var else errors.type_error("list", t)
    chars = []
    for e in elems:
        e = deref(e)
        if type(e) is Var:
            raise errors.instantiation_error()
        if type(e) is not Atom or len(e.name) != 1:
            raise errors.type_error("character", e)
        chars.append(e.name)
    return "".join(chars)


def _bi_atom_codes(m, args):
    a = deref(args[0])
    if type(a) is not Var:
        text = _text_of(a)
        return m.unify(args[1], make_list([Int(ord(c)) for c in text]))
    return m.unify(args[0], Atom(_codes_to_text(args[1])))


def _bi_atom_chars(m, args):
    a = deref(args[0])
    if type(a) is not Var:
        text = _text_of(a)
        return m.unify(args[1], make_list([Atom(c) for c in text]))
    return m.unify(args[0], Atom(_chars_to_text(args[1])))


def _parse_number_text(text: str):
    text = text.strip()
    try:
        return Int(_check_int_range(int(text)))
    except ValueError:
        pass
    try:
        return Float(float(text))
    except ValueError:
        raise errors.PrologError(
            Compound("error", [Compound("syntax_error", [Atom("number")]), Atom("[]")]),
            "syntax_error",
        )


def _bi_number_codes(m, args):
    n = deref(args[0])
    if type(n) in (Int, Float):
        return m.unify(args[1], make_list([Int(ord(c)) for c in _text_of(n)]))
    if type(n) is not Var:
        raise errors.type_error("number", n)
    return m.unify(args[0], _parse_number_text(_codes_to_text(args[1])))


def _proper_list_or_error(t):
    elems, tail = list_elements(t)
    tail = deref(tail)
    if type(tail) is Var:
        raise errors.instantiation_error()
    if not (type(tail) is Atom and tail.name == "[]"):
        raise errors.type_error("list", t)
    return elems


def _bi_msort(m, args):
    elems = _proper_list_or_error(args[0])
    ordered = sorted(elems, key=functools.cmp_to_key(compare_terms))
    return m.unify(args[1], make_list(ordered))


def _bi_sort(m, args):
    elems = _proper_list_or_error(args[0])
    ordered = sorted(elems, key=functools.cmp_to_key(compare_terms))
    unique = []
    for e in ordered:
        if not unique or compare_terms(unique[-1], e) != 0:
            unique.append(e)
    return m.unify(args[1], make_list(unique))


def _bi_keysort(m, args):
    elems = _proper_list_or_error(args[0])
    for e in elems:
        e = deref(e)
        if type(e) is Var:
            raise errors.instantiation_error()
        if not (type(e) is Compound and e.name == "-" and len(e.args) == 2):
            raise errors.type_error("pair", e)
    ordered = sorted(
        elems, key=functools.cmp_to_key(lambda a, b: compare_terms(deref(a).args[0], deref(b).args[0]))
    )
    return m.unify(args[1], make_list(ordered))


# -- all-solutions predicates


def _bi_findall(m, args):
    template, goal, out = args
    if type(deref(goal)) is Var:
        raise errors.instantiation_error()
    collected = []
    for _ in m.sub_solutions(goal):
        collected.append(copy_term(template))
    return m.unify(out, make_list(collected))


def _bi_forall(m, args):
    cond, action = args
    if type(deref(cond)) is Var or type(deref(action)) is Var:
        raise errors.instantiation_error()
    for _ in m.sub_solutions(cond):
        met = False
        for _ in m.sub_solutions(action):
            met = True
            break
        if not met:
            return False
    return True


def _bi_aggregate_all(m, args):
    spec = deref(args[0])
    goal = args[1]
    if type(spec) is Var:
        raise errors.instantiation_error()
    if type(spec) is Atom and spec.name == "count":
        n = 0
        for _ in m.sub_solutions(goal):
            n += 1
        return m.unify(args[2], Int(n))
    if type(spec) is Compound and len(spec.args) == 1 and spec.name in ("bag", "set", "count"):
        template = spec.args[0]
        collected = []
        for _ in m.sub_solutions(goal):
            collected.append(copy_term(template))
        if spec.name == "count":
            return m.unify(args[2], Int(len(collected)))
        if spec.name == "set":
            ordered = sorted(collected, key=functools.cmp_to_key(compare_terms))
            unique = []
            for e in ordered:
                if not unique or compare_terms(unique[-1], e) != 0:
                    unique.append(e)
            collected = unique
        return m.unify(args[2], make_list(collected))
    raise errors.domain_error("aggregate_spec", spec)


def _bi_count_solutions(m, args):
    goal = args[0]
    if type(deref(goal)) is Var:
        raise errors.instantiation_error()
    n = 0
    for _ in m.sub_solutions(goal):
        n += 1
    return m.unify(args[1], Int(n))


def _bi_order_by(m, args):
    spec = deref(args[0])
    goal = args[1]
    if type(spec) is Var:
        raise errors.instantiation_error()
    if not (type(spec) is Compound and len(spec.args) == 1 and spec.name in ("asc", "desc")):
        raise errors.domain_error("order_spec", spec)
    key = spec.args[0]
    tuple_term = Compound("v", term_variables(goal)) if term_variables(goal) else Atom("v")
    pair = Compound("-", [key, tuple_term])
    collected = []
    for _ in m.sub_solutions(goal):
        collected.append(copy_term(pair))
    if not collected:
        return False
    sign = -1 if spec.name == "desc" else 1
    collected.sort(
        key=functools.cmp_to_key(lambda a, b: sign * compare_terms(a.args[0], b.args[0]))
    )
    redo = IterRedo(pair, collected)
    first = redo.redo(m)
    if first is False:
        return False
    return True if first == "last" else redo


# -- dynamic database


def _clause_parts(arg):
    c = deref(arg)
    if type(c) is Var:
        raise errors.instantiation_error()
    if type(c) is Compound and c.name == ":-" and len(c.args) == 2:
        head, body = deref(c.args[0]), c.args[1]
    else:
        head, body = c, TRUE
    if type(head) is Var:
        raise errors.instantiation_error()
    if type(head) is Compound and head.name == ":" and len(head.args) == 2:
        raise errors.permission_error("modify", "cross_module", head)
    if type(head) not in (Atom, Compound):
        raise errors.type_error("callable", head)
    return head, body


def _assert_clause(m, arg, front: bool):
    head, body = _clause_parts(arg)
    name, arity = (head.name, 0) if type(head) is Atom else (head.name, len(head.args))
    ws = m.ctx.ws
    if ws.is_builtin(name, arity):
        raise errors.permission_error("modify", "static_procedure", _indicator(name, arity))
    pred = ws.predicates.get((name, arity))
    if pred is None:
        pred = ws.ensure_dynamic(name, arity)
    elif not pred.dynamic:
        raise errors.permission_error("modify", "static_procedure", _indicator(name, arity))
    clause = m.ctx.ws.make_clause(*copy_terms([head, body]))
    if front:
        pred.clauses.insert(0, clause)
    else:
        pred.clauses.append(clause)
    return True


def _bi_assertz(m, args):
    return _assert_clause(m, args[0], front=False)


def _bi_asserta(m, args):
    return _assert_clause(m, args[0], front=True)


def _bi_retract(m, args):
    head, body = _clause_parts(args[0])
    name, arity = (head.name, 0) if type(head) is Atom else (head.name, len(head.args))
    ws = m.ctx.ws
    if ws.is_builtin(name, arity):
        raise errors.permission_error("modify", "static_procedure", _indicator(name, arity))
    pred = ws.predicates.get((name, arity))
    if pred is None:
        return False
    if not pred.dynamic:
        raise errors.permission_error("modify", "static_procedure", _indicator(name, arity))
    for clause in list(pred.clauses):
        h, b = copy_terms([clause.head, clause.body])
        mark = len(m.trail)
        if m.unify(head, h) and m.unify(body, b):
            pred.clauses.remove(clause)
            return True
        while len(m.trail) > mark:
            m.trail.pop().ref = None
    return False


# -- I/O


def _bi_write(m, args):
    m.ctx.io.output(term_text(args[0], m.ctx.ws.ops))
    return True


def _bi_writeln(m, args):
    m.ctx.io.output(term_text(args[0], m.ctx.ws.ops) + "\n")
    return True


def _bi_writeq(m, args):
    m.ctx.io.output(writeq_text(args[0], m.ctx.ws.ops))
    return True


def _bi_print(m, args):
    m.ctx.io.output(writeq_text(args[0], m.ctx.ws.ops))
    return True


def _bi_nl(m, args):
    m.ctx.io.output("\n")
    return True


def _format_text(m, fmt, fmt_args):
    f = deref(fmt)
    if type(f) is Atom:
        template = f.name
    elif type(f) is Str:
        template = f.value
    else:
        template = _codes_to_text(f)
    items, tail = list_elements(fmt_args)
    if not (type(deref(tail)) is Atom and deref(tail).name == "[]"):
        items = [fmt_args]
    out = []
    i = 0
    ai = 0

    def next_arg():
        nonlocal ai
        if ai >= len(items):
            raise errors.PrologError(
                Compound("error", [Compound("format_error", [Atom("too_few_arguments")]), Atom("[]")]),
                "format_error",
            )
        ai += 1
        return items[ai - 1]

    while i < len(template):
        c = template[i]
        if c != "~":
            out.append(c)
            i += 1
            continue
        i += 1
        if i >= len(template):
            break
        d = template[i]
        i += 1
        if d == "w":
            out.append(term_text(next_arg(), m.ctx.ws.ops))
        elif d in ("q", "p"):
            out.append(writeq_text(next_arg(), m.ctx.ws.ops))
        elif d == "a":
            out.append(_text_of(next_arg()))
        elif d == "d":
            v = deref(next_arg())
            if type(v) is not Int:
                raise errors.type_error("integer", v)
            out.append(str(v.value))
        elif d == "s":
            v = deref(next_arg())
            out.append(v.value if type(v) is Str else _codes_to_text(v))
        elif d == "n":
            out.append("\n")
        elif d == "~":
            out.append("~")
        else:
            raise errors.domain_error("format_directive", Atom("~" + d))
    return "".join(out)


def _bi_format1(m, args):
    m.ctx.io.output(_format_text(m, args[0], Atom("[]")))
    return True


def _bi_format2(m, args):
    m.ctx.io.output(_format_text(m, args[0], args[1]))
    return True


def _bi_read(m, args):
    while True:
        line = m.ctx.io.read_input()
        if line is None:
            return m.unify(args[0], Atom("end_of_file"))
        tokens = tokenize(line)
        try:
            parsed = read_term(tokens, m.ctx.ws.ops, 0)
            rest = parsed.token_indices[1]
            while rest < len(tokens) and tokens[rest].kind in COMMENT_KINDS:
                rest += 1
            if rest != len(tokens):
                raise ReadError(tokens[rest].start, "unexpected text after full stop")
        except ReadError as err:
            m.ctx.io.parse_error(f"syntax error: {err.message}")
            continue
        return m.unify(args[0], parsed.term)


# ---------------------------------------------------------------------------
# Tables

_COMPARE_HANDLERS = {
    ("<", 2): _num_compare(lambda a, b: a < b),
    (">", 2): _num_compare(lambda a, b: a > b),
    ("=<", 2): _num_compare(lambda a, b: a <= b),
    (">=", 2): _num_compare(lambda a, b: a >= b),
    ("=:=", 2): _num_compare(lambda a, b: a == b),
    ("=\\=", 2): _num_compare(lambda a, b: a != b),
}

BUILTINS = {
    ("=", 2): _bi_unify,
    ("\\=", 2): _bi_not_unifiable,
    ("==", 2): _bi_structural_eq,
    ("\\==", 2): _bi_structural_neq,
    ("compare", 3): _bi_compare,
    ("var", 1): _bi_var,
    ("nonvar", 1): _bi_nonvar,
    ("atom", 1): _bi_atom,
    ("number", 1): _bi_number,
    ("integer", 1): _bi_integer,
    ("atomic", 1): _bi_atomic,
    ("is_list", 1): _bi_is_list,
    ("is", 2): _bi_is,
    **_COMPARE_HANDLERS,
    ("functor", 3): _bi_functor,
    ("arg", 3): _bi_arg,
    ("=..", 2): _bi_univ,
    ("copy_term", 2): _bi_copy_term,
    ("between", 3): _bi_between,
    ("length", 2): _bi_length,
    ("succ", 2): _bi_succ,
    ("plus", 3): _bi_plus,
    ("atom_length", 2): _bi_atom_length,
    ("atom_codes", 2): _bi_atom_codes,
    ("atom_chars", 2): _bi_atom_chars,
    ("number_codes", 2): _bi_number_codes,
    ("sort", 2): _bi_sort,
    ("msort", 2): _bi_msort,
    ("keysort", 2): _bi_keysort,
    ("findall", 3): _bi_findall,
    ("forall", 2): _bi_forall,
    ("aggregate_all", 3): _bi_aggregate_all,
    ("count_solutions", 2): _bi_count_solutions,
    ("order_by", 2): _bi_order_by,
    ("assert", 1): _bi_assertz,
    ("asserta", 1): _bi_asserta,
    ("assertz", 1): _bi_assertz,
    ("retract", 1): _bi_retract,
    ("write", 1): _bi_write,
    ("writeln", 1): _bi_writeln,
    ("print", 1): _bi_print,
    ("writeq", 1): _bi_writeq,
    ("nl", 0): _bi_nl,
    ("format", 1): _bi_format1,
    ("format", 2): _bi_format2,
    ("read", 1): _bi_read,
}

# Control constructs handled inside the machine, not by handlers.
CONTROL = frozenset(
    [
        ("true", 0),
        ("fail", 0),
        ("false", 0),
        ("!", 0),
        (",", 2),
        (";", 2),
        ("->", 2),
        ("\\+", 1),
        ("distinct", 1),
        ("limit", 2),
        ("time", 1),
    ]
    + [("call", n) for n in range(1, 9)]
)

# Meta-argument specs: per argument, None for data, an integer K for a goal
# called with K extra arguments, or "clause" for assert/retract arguments.
META: dict[tuple[str, int], tuple] = {
    (",", 2): (0, 0),
    (";", 2): (0, 0),
    ("->", 2): (0, 0),
    ("\\+", 1): (0,),
    ("findall", 3): (None, 0, None),
    ("forall", 2): (0, 0),
    ("aggregate_all", 3): (None, 0, None),
    ("count_solutions", 2): (0, None),
    ("order_by", 2): (None, 0),
    ("distinct", 1): (0,),
    ("limit", 2): (None, 0),
    ("time", 1): (0,),
    ("assert", 1): ("clause",),
    ("asserta", 1): ("clause",),
    ("assertz", 1): ("clause",),
    ("retract", 1): ("clause",),
    ("maplist", 2): (1, None),
    ("maplist", 3): (2, None, None),
    ("maplist", 4): (3, None, None, None),
}
for _n in range(1, 9):
    META[("call", _n)] = (_n - 1,) + (None,) * (_n - 1)


def whitelist() -> set[tuple[str, int, tuple]]:
    """All safe (name, arity) pairs with their meta-argument annotations."""
    entries = set()
    keys = set(BUILTINS) | CONTROL | set(META)
    for name, arity in keys:
        spec = META.get((name, arity), (None,) * arity)
        entries.add((name, arity, spec))
    return entries


def is_builtin(name: str, arity: int) -> bool:
    return (name, arity) in BUILTINS or (name, arity) in CONTROL


# ---------------------------------------------------------------------------
# Pure-Prolog prelude, loaded into every workspace with library origin so
# the sandbox can unfold these predicates.

PRELUDE_SOURCE = """
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).

member(X, [X|_]).
member(X, [_|T]) :- member(X, T).

reverse([], []).
reverse([H|T], R) :- reverse(T, RT), append(RT, [H], R).

nth0(0, [E|_], E).
nth0(I, [_|T], E) :- nth0(I0, T, E), succ(I0, I).

nth1(1, [E|_], E).
nth1(I, [_|T], E) :- nth1(I0, T, E), succ(I0, I).

last([X], X).
last([_|T], X) :- last(T, X).

maplist(_, []).
maplist(G, [H|T]) :- call(G, H), maplist(G, T).

maplist(_, [], []).
maplist(G, [H1|T1], [H2|T2]) :- call(G, H1, H2), maplist(G, T1, T2).

maplist(_, [], [], []).
maplist(G, [H1|T1], [H2|T2], [H3|T3]) :-
    call(G, H1, H2, H3), maplist(G, T1, T2, T3).

select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).

permutation([], []).
permutation(L, [X|P]) :- select(X, L, R), permutation(R, P).
"""

LIBRARY_PREDICATES = frozenset(
    [
        ("append", 3),
        ("member", 2),
        ("reverse", 2),
        ("nth0", 3),
        ("nth1", 3),
        ("last", 2),
        ("maplist", 2),
        ("maplist", 3),
        ("maplist", 4),
        ("select", 3),
        ("permutation", 2),
    ]
)
