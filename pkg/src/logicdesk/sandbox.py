"""Static safety analysis for directives and queries.

Queries are approved by unfolding every reachable goal: whitelisted
builtins pass (recursing into declared meta-arguments), workspace
predicates are unfolded through their clause bodies, and anything else is
rejected.  A visited set keyed on (name, arity, argument callability)
makes the unfolding terminate on recursive programs.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import builtins as bi
from .ops import ALL_TYPES, MAX_PRIORITY
from .terms import Atom, Compound, Float, Int, Str, Var, copy_terms, deref, undo_to, unify


@dataclass
class Violation:
    kind: str  # instantiation | permission | cross_module
    culprit: object
    trace: list  # unfolding path from the root goal to the culprit


@dataclass
class SafetyVerdict:
    safe: bool
    violation: Violation | None = None


def _ok() -> SafetyVerdict:
    return SafetyVerdict(safe=True)


_META_TABLE: dict[tuple[str, int], tuple] | None = None
_SAFE_NAMES: frozenset | None = None


def _meta_table() -> dict[tuple[str, int], tuple]:
    global _META_TABLE
    if _META_TABLE is None:
        _META_TABLE = {(n, a): spec for n, a, spec in bi.whitelist()}
    return _META_TABLE


def _safe_names() -> frozenset:
    global _SAFE_NAMES
    if _SAFE_NAMES is None:
        _SAFE_NAMES = frozenset(name for name, _ in _meta_table())
    return _SAFE_NAMES


def whitelist() -> set[tuple[str, int, tuple]]:
    """The builtin table with meta-argument annotations."""
    return bi.whitelist()


class _Unsafe(Exception):
    def __init__(self, violation: Violation):
        self.violation = violation


class _Analyzer:
    def __init__(self, ws):
        self.ws = ws
        self.visited: set = set()
        self.path: list = []
        self.trail: list = []

    def _raise(self, kind: str, culprit) -> None:
        # Snapshot the path while head-unification bindings are still live.
        snapshot = copy_terms(list(self.path))
        raise _Unsafe(Violation(kind=kind, culprit=snapshot[-1], trace=snapshot))

    def check(self, goal) -> None:
        goal = deref(goal)
        self.path.append(goal)
        try:
            self._check_body(goal)
        finally:
            self.path.pop()

    def _check_body(self, goal) -> None:
        tg = type(goal)
        if tg is Var:
            self._raise("instantiation", goal)
        if tg not in (Atom, Compound):
            self._raise("permission", goal)
        name = goal.name
        args = goal.args if tg is Compound else []
        key = (name, len(args))

        if key == (":", 2):
            self._raise("cross_module", goal)
        if key in ((",", 2), (";", 2), ("->", 2)):
            self.check(args[0])
            self.check(args[1])
            return
        if key == ("\\+", 1):
            self.check(args[0])
            return

        pred = self.ws.predicates.get(key)
        if pred is not None and pred.origin == "local":
            self._unfold(goal, key, args, pred)
            return
        meta = _meta_table().get(key)
        if meta is not None:
            self._check_meta(goal, args, meta)
            return
        if pred is not None:
            self._unfold(goal, key, args, pred)
            return
        if name in _safe_names():
            # A whitelisted builtin name applied at an undefined arity (for
            # example a closure like plus(1) extended by maplist/2): nothing
            # can define it, so the worst runtime outcome is an existence
            # error, which is harmless.
            return
        self._raise("permission", goal)

    def _check_meta(self, goal, args, meta: tuple) -> None:
        for i, spec in enumerate(meta):
            if spec is None:
                continue
            arg = deref(args[i])
            if spec == "clause":
                self._check_clause_arg(goal, arg)
                continue
            # goal argument, called with `spec` extra arguments
            if type(arg) is Var:
                self._raise("instantiation", goal)
            extended = self._extend(goal, arg, spec)
            self.check(extended)

    def _extend(self, goal, closure, extras: int):
        if type(closure) is Atom:
            if extras == 0:
                return closure
            return Compound(closure.name, [Var(None) for _ in range(extras)])
        if type(closure) is Compound:
            if extras == 0:
                return closure
            return Compound(closure.name, list(closure.args) + [Var(None) for _ in range(extras)])
        self._raise("permission", goal)

    def _check_clause_arg(self, goal, clause) -> None:
        if type(clause) is Var:
            self._raise("instantiation", goal)
        if type(clause) is Compound and clause.name == ":-" and len(clause.args) == 2:
            head, body = deref(clause.args[0]), clause.args[1]
        else:
            head, body = clause, None
        if type(head) is Var:
            self._raise("instantiation", goal)
        if type(head) is Compound and head.name == ":" and len(head.args) == 2:
            self._raise("permission", goal)
        if type(head) not in (Atom, Compound):
            self._raise("permission", goal)
        if body is not None:
            self.check(body)

    def _callability(self, args) -> tuple:
        out = []
        for a in args:
            a = deref(a)
            ta = type(a)
            if ta is Var:
                out.append("v")
            elif ta in (Atom, Compound):
                out.append("c")
            else:
                out.append("d")
        return tuple(out)

    def _unfold(self, goal, key, args, pred) -> None:
        vkey = (key[0], key[1], self._callability(args))
        if vkey in self.visited:
            return
        self.visited.add(vkey)
        for clause in pred.clauses:
            head, body = copy_terms([clause.head, clause.body])
            mark = len(self.trail)
            if unify(goal, head, self.trail):
                try:
                    self.check(body)
                finally:
                    undo_to(self.trail, mark)
            else:
                undo_to(self.trail, mark)


def safe_goal(goal, ws) -> SafetyVerdict:
    """Approve a query for execution against a workspace."""
    analyzer = _Analyzer(ws)
    try:
        analyzer.check(goal)
    except _Unsafe as u:
        return SafetyVerdict(safe=False, violation=u.violation)
    return _ok()


def _unsafe_directive(d, kind: str = "permission") -> SafetyVerdict:
    return SafetyVerdict(safe=False, violation=Violation(kind=kind, culprit=d, trace=[d]))


def safe_directive(d) -> SafetyVerdict:
    """Approve a directive (the argument of ':-'/1) for load-time execution."""
    d = deref(d)
    if type(d) is Var:
        return _unsafe_directive(d, "instantiation")
    if type(d) is not Compound:
        return _unsafe_directive(d)
    key = (d.name, len(d.args))
    if key == ("dynamic", 1):
        spec = deref(d.args[0])
        if (
            type(spec) is Compound
            and spec.name == "/"
            and len(spec.args) == 2
            and type(deref(spec.args[0])) is Atom
            and type(deref(spec.args[1])) is Int
            and deref(spec.args[1]).value >= 0
        ):
            return _ok()
        return _unsafe_directive(d)
    if key == ("discontiguous", 1):
        return _ok()
    if key == ("op", 3):
        p, t, n = [deref(a) for a in d.args]
        if (
            type(p) is Int
            and 1 <= p.value <= MAX_PRIORITY
            and type(t) is Atom
            and t.name in ALL_TYPES
            and type(n) is Atom
            and n.name != ","
        ):
            return _ok()
        return _unsafe_directive(d)
    if key == ("include", 1):
        return _ok() if type(deref(d.args[0])) is Atom else _unsafe_directive(d)
    if key == ("use_rendering", 1):
        return _ok() if type(deref(d.args[0])) is Atom else _unsafe_directive(d)
    return _unsafe_directive(d)
