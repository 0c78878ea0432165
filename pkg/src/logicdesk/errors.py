"""Engine exceptions carrying ISO-style error terms."""

from __future__ import annotations

from .terms import Atom, Compound, Int


class PrologError(Exception):
    """Raised by the engine when a goal signals an error.  `term` is the
    error(Formal, Context) term; `kind` is the formal functor name."""

    def __init__(self, term, kind: str):
        self.term = term
        self.kind = kind
        super().__init__(kind)


class QueryAborted(Exception):
    """The query was aborted from outside the engine."""


def _error(formal, context=None) -> PrologError:
    kind = formal.name if isinstance(formal, (Atom, Compound)) else "error"
    ctx = context if context is not None else Atom("[]")
    return PrologError(Compound("error", [formal, ctx]), kind)


def instantiation_error():
    return _error(Atom("instantiation_error"))


def type_error(expected: str, culprit):
    return _error(Compound("type_error", [Atom(expected), culprit]))


def domain_error(domain: str, culprit):
    return _error(Compound("domain_error", [Atom(domain), culprit]))


def existence_error(name: str, arity: int):
    indicator = Compound("/", [Atom(name), Int(arity)])
    return _error(Compound("existence_error", [Atom("procedure"), indicator]))


def permission_error(action: str, perm_type: str, culprit):
    return _error(
        Compound("permission_error", [Atom(action), Atom(perm_type), culprit])
    )


def evaluation_error(what: str):
    return _error(Compound("evaluation_error", [Atom(what)]))


def resource_error(what: str):
    return _error(Compound("resource_error", [Atom(what)]))
