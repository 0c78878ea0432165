"""Server-side editor support: document mirrors, cross-reference analysis,
semantically enriched tokens, hover info and completion templates.

Tokens are grouped per source term (clause or directive); comments attach
to the following term's group and trailing comments form a final group.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from dataclasses import dataclass, field

from . import docs
from .builtins import LIBRARY_PREDICATES, META, is_builtin
from .ops import OperatorTable
from .reader import COMMENT_KINDS, Token, build_line_index, offset_to_line, parse_tokens, tokenize
from .terms import Atom, Compound, Var, deref


class HighlightError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code  # stale_generation | unknown_uuid
        super().__init__(message)


@dataclass
class Mirror:
    uuid: str
    text: str
    generation: int
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class MirrorRegistry:
    """Shared uuid -> Mirror map; per-document operations are serialized by
    the mirror lock."""

    def __init__(self):
        self._mirrors: dict[str, Mirror] = {}
        self._lock = threading.Lock()

    def _get(self, uuid: str) -> Mirror:
        with self._lock:
            mirror = self._mirrors.get(uuid)
        if mirror is None:
            raise HighlightError("unknown_uuid", f"no mirror for {uuid}")
        return mirror

    def update_full(self, uuid: str, text: str) -> int:
        with self._lock:
            mirror = self._mirrors.get(uuid)
            if mirror is None:
                mirror = Mirror(uuid, "", 0)
                self._mirrors[uuid] = mirror
        with mirror.lock:
            mirror.text = text
            mirror.generation += 1
            return mirror.generation

    def update_changes(self, uuid: str, changes: list[dict], generation: int) -> int:
        mirror = self._get(uuid)
        with mirror.lock:
            if generation != mirror.generation:
                raise HighlightError(
                    "stale_generation",
                    f"client generation {generation} does not match {mirror.generation}",
                )
            text = mirror.text
            for change in changes:
                start = change["from"]
                end = change["to"]
                insert = change.get("insert", "")
                if not (0 <= start <= end <= len(text)):
                    raise HighlightError("stale_generation", "change span out of range")
                text = text[:start] + insert + text[end:]
            mirror.text = text
            mirror.generation += 1
            return mirror.generation

    def text_of(self, uuid: str) -> tuple[str, int]:
        mirror = self._get(uuid)
        with mirror.lock:
            return mirror.text, mirror.generation

    def drop(self, uuid: str) -> None:
        with self._lock:
            self._mirrors.pop(uuid, None)


def update_mirror(registry: MirrorRegistry, uuid: str, payload) -> int:
    """payload: {"text": str} or {"changes": [...], "generation": int}."""
    if "text" in payload:
        return registry.update_full(uuid, payload["text"])
    return registry.update_changes(uuid, payload.get("changes", []), payload.get("generation", -1))


# ---------------------------------------------------------------------------
# Cross-reference analysis


@dataclass
class XrefTable:
    defined: dict = field(default_factory=dict)  # (name, arity) -> first line
    called: set = field(default_factory=set)
    dynamic_decls: set = field(default_factory=set)

    def origin_of(self, name: str, arity: int) -> str | None:
        key = (name, arity)
        if key in self.defined:
            return "local"
        if is_builtin(name, arity):
            return "builtin"
        if key in LIBRARY_PREDICATES:
            return "library"
        if key in self.dynamic_decls:
            return "dynamic"
        return None

    def undefined(self) -> set:
        out = set()
        for key in self.called:
            if (
                key not in self.defined
                and key not in self.dynamic_decls
                and not is_builtin(*key)
                and key not in LIBRARY_PREDICATES
                and key not in META
            ):
                out.add(key)
        return out


_DIRECTIVE_NAMES = {"dynamic", "discontiguous", "op", "include", "use_rendering"}


def _functor_key(t):
    if type(t) is Atom:
        return (t.name, 0)
    if type(t) is Compound:
        return (t.name, len(t.args))
    return None


def _walk_goals(t, visit, extras: int = 0) -> None:
    """visit(node, effective_arity) for every goal position reachable from
    t through control constructs and known meta-arguments."""
    t = deref(t)
    if type(t) not in (Atom, Compound):
        return
    args = t.args if type(t) is Compound else []
    arity = len(args) + extras
    visit(t, arity)
    key = (t.name, len(args))
    if key in ((",", 2), (";", 2), ("->", 2)):
        _walk_goals(args[0], visit)
        _walk_goals(args[1], visit)
        return
    if key == ("\\+", 1):
        _walk_goals(args[0], visit)
        return
    spec = META.get(key)
    if spec is None and is_builtin(*key):
        spec = (None,) * len(args)
    if spec is not None:
        for i, s in enumerate(spec):
            if isinstance(s, int):
                _walk_goals(args[i], visit, extras=s)
            elif s == "clause":
                clause = deref(args[i])
                if type(clause) is Compound and clause.name == ":-" and len(clause.args) == 2:
                    _walk_goals(clause.args[1], visit)


def xref(text: str, ops: OperatorTable | None = None) -> XrefTable:
    terms, _issues = parse_tokens(tokenize(text), ops)
    table = XrefTable()
    line_index = build_line_index(text)
    for pt in terms:
        t = pt.term
        line = offset_to_line(line_index, pt.span[0])
        if type(t) is Compound and t.name == ":-" and len(t.args) == 1:
            d = deref(t.args[0])
            key = _functor_key(d)
            if key == ("dynamic", 1):
                spec = deref(d.args[0])
                if (
                    type(spec) is Compound
                    and spec.name == "/"
                    and len(spec.args) == 2
                    and type(deref(spec.args[0])) is Atom
                ):
                    arity = deref(spec.args[1])
                    if hasattr(arity, "value"):
                        table.dynamic_decls.add((deref(spec.args[0]).name, arity.value))
            continue
        if type(t) is Compound and t.name == ":-" and len(t.args) == 2:
            head, body = deref(t.args[0]), t.args[1]
        else:
            head, body = t, None
        hkey = _functor_key(head)
        if hkey is not None:
            table.defined.setdefault(hkey, line)
        if body is not None:
            _walk_goals(body, lambda node, arity: table.called.add((node.name, arity)))
    return table


# ---------------------------------------------------------------------------
# Enriched tokens


@dataclass
class EnrichedToken:
    token: Token
    cls: str | None = None  # goal_built_in goal_local goal_dynamic
    #                          goal_undefined head_defined singleton var_normal
    origin: str | None = None  # builtin | library | local

    def to_json(self) -> dict:
        out = {"kind": self.token.kind, "len": self.token.end - self.token.start}
        if self.cls:
            out["class"] = self.cls
        if self.origin:
            out["origin"] = self.origin
        return out


@dataclass
class Analysis:
    tokens: list[Token]
    groups: list[list[EnrichedToken]]
    xref: XrefTable
    info: dict  # token index -> (name, arity, cls, origin)
    line_index: list[int]


_GOAL_TOKEN_KINDS = ("atom", "functor")


def _goal_class(table: XrefTable, name: str, arity: int) -> tuple[str, str | None]:
    key = (name, arity)
    if key in table.defined:
        return "goal_local", "local"
    if key in table.dynamic_decls:
        return "goal_dynamic", "local"
    if is_builtin(name, arity) or key in META:
        return "goal_built_in", "builtin"
    if key in LIBRARY_PREDICATES:
        return "goal_built_in", "library"
    return "goal_undefined", None


def analyze(text: str, ops: OperatorTable | None = None) -> Analysis:
    tokens = tokenize(text)
    terms, issues = parse_tokens(tokens, ops)
    table = xref(text, ops)
    line_index = build_line_index(text)
    starts = [t.start for t in tokens]

    cls_by_index: dict[int, tuple[str, str | None, str, int]] = {}

    def token_at(pos: int | None) -> int | None:
        if pos is None:
            return None
        i = bisect_right(starts, pos) - 1
        if 0 <= i < len(tokens) and tokens[i].start == pos:
            return i
        return None

    def classify(node, arity: int, cls: str | None = None) -> None:
        idx = token_at(getattr(node, "pos", None))
        if idx is None or tokens[idx].kind not in _GOAL_TOKEN_KINDS:
            return
        if cls is not None:
            cls_by_index[idx] = (cls, "local", node.name, arity)
            return
        gcls, origin = _goal_class(table, node.name, arity)
        cls_by_index[idx] = (gcls, origin, node.name, arity)

    for pt in terms:
        t = pt.term
        if type(t) is Compound and t.name == ":-" and len(t.args) == 1:
            d = deref(t.args[0])
            if type(d) in (Atom, Compound) and d.name in _DIRECTIVE_NAMES:
                idx = token_at(d.pos)
                if idx is not None and tokens[idx].kind in _GOAL_TOKEN_KINDS:
                    arity = len(d.args) if type(d) is Compound else 0
                    cls_by_index[idx] = ("goal_built_in", "builtin", d.name, arity)
            continue
        if type(t) is Compound and t.name == ":-" and len(t.args) == 2:
            head, body = deref(t.args[0]), t.args[1]
        else:
            head, body = t, None
        hkey = _functor_key(head)
        if hkey is not None:
            classify(head, hkey[1], cls="head_defined")
        if body is not None:
            _walk_goals(body, classify)

    # variable classes per term
    var_cls: dict[int, str] = {}
    for pt in terms:
        lo, hi = pt.token_indices
        for i in range(lo, hi):
            tok = tokens[i]
            if tok.kind == "var":
                var_cls[i] = "singleton" if tok.value in pt.singletons else "var_normal"
            elif tok.kind == "anon_var":
                var_cls[i] = "var_normal"

    # group tokens per term / error region, comments attaching forward
    segments: list[tuple[int, int]] = [pt.token_indices for pt in terms]
    segments += [issue.token_range for issue in issues if issue.token_range[1] > issue.token_range[0]]
    segments.sort()

    groups: list[list[EnrichedToken]] = []
    cursor = 0

    def enrich(i: int) -> EnrichedToken:
        tok = tokens[i]
        if i in cls_by_index:
            cls, origin, _, _ = cls_by_index[i]
            return EnrichedToken(tok, cls, origin)
        if i in var_cls:
            return EnrichedToken(tok, var_cls[i])
        return EnrichedToken(tok)

    for lo, hi in segments:
        group = [enrich(i) for i in range(cursor, hi)]
        if group:
            groups.append(group)
        cursor = hi
    if cursor < len(tokens):
        groups.append([enrich(i) for i in range(cursor, len(tokens))])

    info = {i: (name, arity, cls, origin) for i, (cls, origin, name, arity) in cls_by_index.items()}
    return Analysis(tokens=tokens, groups=groups, xref=table, info=info, line_index=line_index)


def enriched_tokens(registry: MirrorRegistry, uuid: str, ops=None) -> tuple[int, list[list[EnrichedToken]]]:
    text, generation = registry.text_of(uuid)
    return generation, analyze(text, ops).groups


def hover_info(registry: MirrorRegistry, uuid: str, offset: int, ops=None) -> dict | None:
    text, _ = registry.text_of(uuid)
    analysis = analyze(text, ops)
    for i, tok in enumerate(analysis.tokens):
        if tok.start <= offset < tok.end:
            meta = analysis.info.get(i)
            if meta is None:
                return None
            name, arity, cls, origin = meta
            if cls == "goal_undefined":
                return None
            entry = docs.doc_for(name, arity)
            if entry is not None and origin in ("builtin", "library"):
                doc_origin, template, summary = entry
                return {"origin": doc_origin, "summary": f"{template}: {summary}"}
            key = (name, arity)
            line = analysis.xref.defined.get(key)
            if line is not None:
                return {"origin": "local", "summary": f"{name}/{arity} is defined at line {line}"}
            if key in analysis.xref.dynamic_decls:
                return {"origin": "local", "summary": f"{name}/{arity} is a dynamic predicate"}
            return None
    return None


def templates(prefix: str = "") -> list[str]:
    return docs.templates(prefix)
