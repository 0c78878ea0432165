"""Tree-walking resolution engine.

The machine is an explicit-stack interpreter: a cons-list goal stack, a
choicepoint stack, and a trail.  That keeps Prolog recursion off the
Python stack, makes the abort flag checkable per inference, and gives
the 4-port tracer and retry natural attachment points.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from . import builtins as bi
from . import errors
from .errors import PrologError, QueryAborted
from .ops import OperatorTable
from .reader import (
    COMMENT_KINDS,
    ParsedTerm,
    ReadError,
    build_line_index,
    offset_to_line,
    parse_program,
    read_term,
    tokenize,
)
from .terms import (
    Atom,
    Compound,
    Float,
    Int,
    Str,
    Var,
    copy_terms,
    deref,
    term_variables,
    undo_to,
    unify,
)
from .writer import writeq_text


@dataclass
class Budget:
    """Resource limits for one query."""

    wall_time_limit: float = 60.0
    inference_limit: int = 10**8
    depth_limit: int = 10**6

    def __post_init__(self):
        if self.wall_time_limit <= 0 or self.inference_limit <= 0 or self.depth_limit <= 0:
            raise ValueError("budget limits must be positive")


class Clause:
    __slots__ = ("head", "body", "line", "index_key")

    def __init__(self, head, body, line=None):
        self.head = head
        self.body = body
        self.line = line
        self.index_key = _index_key_of_head(self.head)


def _index_key_of_head(head):
    if type(head) is not Compound:
        return None
    return _index_key(head.args[0])


def _index_key(arg):
    """First-argument index key; None means 'matches anything'."""
    a = deref(arg)
    ta = type(a)
    if ta is Var:
        return None
    if ta is Atom:
        return ("a", a.name)
    if ta is Int:
        return ("i", a.value)
    if ta is Float:
        return ("f", a.value)
    if ta is Str:
        return ("s", a.value)
    return ("c", a.name, len(a.args))


class Pred:
    __slots__ = ("clauses", "dynamic", "origin")

    def __init__(self, clauses=None, dynamic=False, origin="local"):
        self.clauses = clauses if clauses is not None else []
        self.dynamic = dynamic
        self.origin = origin


_PRELUDE_CLAUSES: list[Clause] | None = None


def _prelude_clauses() -> list[Clause]:
    global _PRELUDE_CLAUSES
    if _PRELUDE_CLAUSES is None:
        terms, issues = parse_program(bi.PRELUDE_SOURCE)
        assert not issues, f"prelude must parse cleanly: {issues}"
        clauses = []
        for pt in terms:
            t = pt.term
            if type(t) is Compound and t.name == ":-" and len(t.args) == 2:
                clauses.append(Clause(t.args[0], t.args[1]))
            else:
                clauses.append(Clause(t, Atom("true")))
        _strip_positions([c.head for c in clauses] + [c.body for c in clauses])
        _PRELUDE_CLAUSES = clauses
    return _PRELUDE_CLAUSES


def _strip_positions(terms):
    stack = list(terms)
    while stack:
        t = stack.pop()
        tt = type(t)
        if tt is Atom:
            t.pos = None
        elif tt is Compound:
            t.pos = None
            stack.extend(t.args)


class Workspace:
    """A private predicate database plus operator table and renderer list.
    One workspace per engine; never shared."""

    def __init__(self, ops: OperatorTable | None = None, prelude: bool = True):
        self.predicates: dict[tuple[str, int], Pred] = {}
        self.ops = ops or OperatorTable.default()
        self.renderers: list[str] = []
        self.line_index: list[int] = [0]
        if prelude:
            for clause in _prelude_clauses():
                head = clause.head
                key = (head.name, 0) if type(head) is Atom else (head.name, len(head.args))
                pred = self.predicates.get(key)
                if pred is None:
                    pred = Pred(origin="library")
                    self.predicates[key] = pred
                pred.clauses.append(clause)

    def is_builtin(self, name: str, arity: int) -> bool:
        return bi.is_builtin(name, arity)

    def origin(self, name: str, arity: int) -> str | None:
        if self.is_builtin(name, arity):
            return "builtin"
        pred = self.predicates.get((name, arity))
        return pred.origin if pred else None

    def ensure_dynamic(self, name: str, arity: int) -> Pred:
        pred = self.predicates.get((name, arity))
        if pred is None:
            pred = Pred(dynamic=True, origin="local")
            self.predicates[(name, arity)] = pred
        else:
            pred.dynamic = True
        return pred

    def make_clause(self, head, body, line=None) -> Clause:
        return Clause(head, body, line)

    def set_source(self, text: str) -> None:
        self.line_index = build_line_index(text)


# ---------------------------------------------------------------------------
# Loading programs


@dataclass
class LoadError:
    kind: str  # permission | include_cycle | existence | type | domain | syntax
    message: str
    line: int | None = None


_ALLOWED_DIRECTIVES = {
    ("dynamic", 1),
    ("discontiguous", 1),
    ("op", 3),
    ("include", 1),
    ("use_rendering", 1),
}


def consult(
    program: list[ParsedTerm],
    ws: Workspace,
    directive_ok=None,
    include_resolver=None,
    line_index: list[int] | None = None,
    _include_stack: tuple = (),
) -> list[LoadError]:
    """Add clauses and execute directives.  Errors are collected, never
    raised; the workspace keeps everything that did load."""
    out: list[LoadError] = []
    for pt in program:
        term = pt.term
        line = offset_to_line(line_index, pt.span[0]) if line_index else None
        if type(term) is Compound and term.name == ":-" and len(term.args) == 1:
            _consult_directive(
                term.args[0], ws, directive_ok, include_resolver, line, _include_stack, out
            )
        else:
            _consult_clause(term, ws, line, out)
    return out


def _consult_clause(term, ws: Workspace, line, out: list[LoadError]) -> None:
    if type(term) is Compound and term.name == ":-" and len(term.args) == 2:
        head, body = deref(term.args[0]), term.args[1]
    else:
        head, body = term, Atom("true")
    if type(head) is Compound and head.name == ":" and len(head.args) == 2:
        out.append(LoadError("permission", "clause head may not be module-qualified", line))
        return
    if type(head) is Atom:
        key = (head.name, 0)
    elif type(head) is Compound:
        key = (head.name, len(head.args))
    else:
        out.append(LoadError("type", f"invalid clause head: {writeq_text(head)}", line))
        return
    if ws.is_builtin(*key):
        out.append(
            LoadError("permission", f"cannot redefine builtin {key[0]}/{key[1]}", line)
        )
        return
    pred = ws.predicates.get(key)
    if pred is None or pred.origin == "library":
        # A local definition shadows the prelude.
        pred = Pred(origin="local")
        ws.predicates[key] = pred
    pred.clauses.append(ws.make_clause(head, body, line))


def _consult_directive(
    d, ws: Workspace, directive_ok, include_resolver, line, include_stack, out
) -> None:
    if directive_ok is not None:
        verdict = directive_ok(d)
        if not verdict.safe:
            out.append(
                LoadError("permission", f"directive not allowed: {writeq_text(d, ws.ops)}", line)
            )
            return
    key = (d.name, len(d.args)) if type(d) is Compound else (d.name, 0) if type(d) is Atom else None
    if key == ("dynamic", 1):
        spec = deref(d.args[0])
        if (
            type(spec) is Compound
            and spec.name == "/"
            and len(spec.args) == 2
            and type(deref(spec.args[0])) is Atom
            and type(deref(spec.args[1])) is Int
        ):
            name = deref(spec.args[0]).name
            arity = deref(spec.args[1]).value
            if ws.is_builtin(name, arity):
                out.append(LoadError("permission", f"cannot make builtin {name}/{arity} dynamic", line))
                return
            pred = ws.predicates.get((name, arity))
            if pred is not None and pred.origin == "library":
                out.append(
                    LoadError("permission", f"cannot make library predicate {name}/{arity} dynamic", line)
                )
                return
            ws.ensure_dynamic(name, arity)
        else:
            out.append(LoadError("type", "dynamic/1 expects Name/Arity", line))
    elif key == ("discontiguous", 1):
        pass  # accepted, no effect on clause storage
    elif key == ("op", 3):
        p, t, n = [deref(a) for a in d.args]
        if type(p) is Int and type(t) is Atom and type(n) is Atom:
            try:
                ws.ops.add(p.value, t.name, n.name)
            except ValueError as exc:
                out.append(LoadError("domain", str(exc), line))
        else:
            out.append(LoadError("type", "op/3 expects (Priority, Type, Name)", line))
    elif key == ("use_rendering", 1):
        r = deref(d.args[0])
        from .render import RENDERER_NAMES

        if type(r) is not Atom:
            out.append(LoadError("type", "use_rendering/1 expects an atom", line))
        elif r.name not in RENDERER_NAMES:
            out.append(LoadError("domain", f"unknown renderer: {r.name}", line))
        elif r.name not in ws.renderers:
            ws.renderers.append(r.name)
    elif key == ("include", 1):
        _consult_include(d, ws, directive_ok, include_resolver, line, include_stack, out)
    else:
        out.append(
            LoadError("permission", f"directive not allowed: {writeq_text(d, ws.ops)}", line)
        )


def _consult_include(d, ws, directive_ok, include_resolver, line, include_stack, out):
    spec = deref(d.args[0])
    if type(spec) is not Atom:
        out.append(LoadError("type", "include/1 expects an atom", line))
        return
    if include_resolver is None:
        out.append(LoadError("existence", "no store available for include/1", line))
        return
    if spec.name in include_stack:
        out.append(LoadError("include_cycle", f"include cycle through {spec.name}", line))
        return
    text = include_resolver(spec.name)
    if text is None:
        out.append(LoadError("existence", f"included file not found: {spec.name}", line))
        return
    terms, issues = parse_program(text, ws.ops)
    for issue in issues:
        out.append(LoadError("syntax", f"in include({spec.name}): {issue.message}", line))
    # Positions inside included text would be meaningless against the main
    # source, so breakpoint/line info is stripped.
    _strip_positions([pt.term for pt in terms])
    out.extend(
        consult(
            terms,
            ws,
            directive_ok=directive_ok,
            include_resolver=include_resolver,
            line_index=None,
            _include_stack=include_stack + (spec.name,),
        )
    )


# ---------------------------------------------------------------------------
# I/O channel


class CollectingIO:
    """Library/test I/O: output is collected, input comes from a list."""

    def __init__(self, inputs=None):
        self.outputs: list[str] = []
        self.notes: list[str] = []
        self.inputs = list(inputs or [])

    def output(self, text: str) -> None:
        self.outputs.append(text)

    def read_input(self) -> str | None:
        if self.inputs:
            return self.inputs.pop(0)
        return None

    def parse_error(self, message: str) -> None:
        self.notes.append(message)

    def text(self) -> str:
        return "".join(self.outputs)


# ---------------------------------------------------------------------------
# Debugging: frames, tracer, 4-port model

PORTS = ("call", "exit", "redo", "fail")


class Frame:
    __slots__ = (
        "no",
        "goal",
        "depth",
        "line",
        "state",
        "entry_node",
        "entry_cplen",
        "entry_trailmark",
        "machine",
    )

    def __init__(self, no, goal, depth, line, entry_node, entry_cplen, entry_trailmark, machine):
        self.no = no
        self.goal = goal
        self.depth = depth
        self.line = line
        self.state = "called"
        self.entry_node = entry_node
        self.entry_cplen = entry_cplen
        self.entry_trailmark = entry_trailmark
        self.machine = machine


class StepTransport:
    """Debug command source for library use: a scripted command list."""

    def __init__(self, commands=None):
        self.commands = list(commands or [])
        self.pauses: list[dict] = []

    def wait_command(self, snapshot: dict) -> str:
        self.pauses.append(snapshot)
        if self.commands:
            return self.commands.pop(0)
        return "continue"


class Tracer:
    """4-port tracer: legality of emitted ports per frame is the caller's
    contract; pausing policy lives here."""

    def __init__(self, transport=None, mode="creep", breakpoints=None, ops=None, record=True):
        self.transport = transport or StepTransport()
        self.mode = mode  # creep | ("skip", depth) | ("out", depth) | nodebug
        self.breakpoints: set[int] = set(breakpoints or ())
        self.ops = ops
        self.record = record
        self.log: list[dict] = []
        self.current: dict | None = None
        self._frame_no = 0

    def next_frame_no(self) -> int:
        self._frame_no += 1
        return self._frame_no

    def _should_pause(self, port: str, frame: Frame) -> bool:
        if port == "call" and frame.line is not None and frame.line in self.breakpoints:
            return True
        mode = self.mode
        if mode == "creep":
            return True
        if mode == "nodebug":
            return False
        which, depth = mode
        if which == "skip":
            return frame.depth <= depth
        return frame.depth < depth  # "out"

    def port(self, port: str, frame: Frame, machine) -> tuple | None:
        """Returns None to continue, or ("retry", frame)."""
        snapshot = {
            "port": port,
            "goal": writeq_text(frame.goal, self.ops),
            "depth": frame.depth,
            "line": frame.line,
            "frame": frame.no,
        }
        if self.record:
            self.log.append(snapshot)
        if not self._should_pause(port, frame):
            return None
        self.current = snapshot
        while True:
            cmd = self.transport.wait_command(snapshot)
            if cmd == "step_into":
                self.mode = "creep"
                return None
            if cmd == "step_over":
                self.mode = ("skip", frame.depth)
                return None
            if cmd == "step_out":
                self.mode = ("out", frame.depth)
                return None
            if cmd == "continue":
                self.mode = "nodebug"
                return None
            if cmd == "retry":
                self.mode = "creep"
                if port == "call" or frame.machine is not machine:
                    return None  # retry at the call port is the identity
                return ("retry", frame)
            if cmd == "abort":
                raise QueryAborted()
            # unknown command: ask again


def validate_port_log(log: list[dict]) -> bool:
    """Check every frame's port sequence against the 4-port automaton:
    call (exit redo)* (exit | fail)?, truncation allowed anywhere."""
    state: dict[int, str] = {}
    for entry in log:
        frame = entry["frame"]
        port = entry["port"]
        prev = state.get(frame)
        if prev is None:
            if port != "call":
                return False
        elif prev == "call":
            if port not in ("exit", "fail"):
                return False
        elif prev == "exit":
            if port != "redo":
                return False
        elif prev == "redo":
            if port not in ("exit", "fail"):
                return False
        else:  # fail is final
            return False
        state[frame] = port
    return True


# ---------------------------------------------------------------------------
# Engine context and machine


class EngineContext:
    __slots__ = (
        "ws",
        "io",
        "budget",
        "tracer",
        "abort_flag",
        "inferences",
        "deadline",
        "start_time",
    )

    def __init__(self, ws, io=None, budget=None, tracer=None, abort_flag=None):
        self.ws = ws
        self.io = io or CollectingIO()
        self.budget = budget or Budget()
        self.tracer = tracer
        self.abort_flag = abort_flag or threading.Event()
        self.inferences = 0
        self.start_time = time.monotonic()
        self.deadline = self.start_time + self.budget.wall_time_limit

    def line_of(self, term) -> int | None:
        pos = getattr(term, "pos", None)
        if pos is None:
            return None
        return offset_to_line(self.ws.line_index, pos)


class CP:
    __slots__ = ("kind", "goals", "trailmark", "payload", "frame")

    def __init__(self, kind, goals, trailmark, payload, frame=None):
        self.kind = kind
        self.goals = goals
        self.trailmark = trailmark
        self.payload = payload
        self.frame = frame


_TRUE_ATOM = Atom("true")
_FAIL_ATOM = Atom("fail")


def variant_key(t):
    """Hashable key identifying a term up to variable renaming."""
    varmap: dict[int, int] = {}
    out = []
    stack = [(t, False)]
    build: list = []
    while stack:
        cur, done = stack.pop()
        if done:
            # assemble compound from the last len(args) keys on build
            name, arity = cur
            args = tuple(build[-arity:])
            del build[-arity:]
            build.append(("c", name, args))
            continue
        cur = deref(cur)
        tc = type(cur)
        if tc is Var:
            idx = varmap.setdefault(cur.id, len(varmap))
            build.append(("v", idx))
        elif tc is Atom:
            build.append(("a", cur.name))
        elif tc is Int:
            build.append(("i", cur.value))
        elif tc is Float:
            build.append(("f", cur.value))
        elif tc is Str:
            build.append(("s", cur.value))
        else:
            stack.append(((cur.name, len(cur.args)), True))
            for a in reversed(cur.args):
                stack.append((a, False))
    return build[0]


class Machine:
    """One depth-first derivation; nested machines share the context."""

    __slots__ = ("ctx", "goals", "cps", "trail", "current_depth", "_started", "_done")

    def __init__(self, ctx: EngineContext, goal, depth: int = 1):
        self.ctx = ctx
        self.goals = (("g", goal, depth, 0), None)
        self.cps: list[CP] = []
        self.trail: list = []
        self.current_depth = depth
        self._started = False
        self._done = False

    # -- public helpers used by builtin handlers

    def unify(self, a, b) -> bool:
        return unify(a, b, self.trail)

    def sub_solutions(self, goal):
        """Iterate the solutions of goal in a nested machine; bindings are
        live during each yield and undone when iteration ends."""
        sub = Machine(self.ctx, goal, self.current_depth + 1)
        try:
            while sub.next_solution():
                yield sub
        finally:
            sub.close()

    # -- lifecycle

    def next_solution(self) -> bool:
        if self._done:
            return False
        if not self._started:
            self._started = True
        else:
            if not self._backtrack():
                self._done = True
                return False
        if self._run():
            return True
        self._done = True
        return False

    def close(self) -> None:
        for cp in self.cps:
            if cp.kind == "bi":
                cp.payload[0].close()
        self.cps.clear()
        undo_to(self.trail, 0)
        self._done = True

    def has_choicepoints(self) -> bool:
        return bool(self.cps)

    # -- tracing helpers

    def _make_frame(self, goal, depth, entry_node) -> Frame:
        tracer = self.ctx.tracer
        return Frame(
            tracer.next_frame_no(),
            goal,
            depth,
            self.ctx.line_of(goal),
            entry_node,
            len(self.cps),
            len(self.trail),
            self,
        )

    def _port(self, port: str, frame: Frame) -> bool:
        """Emit a port; True means a retry was performed and the main loop
        must re-dispatch from the restored goal stack."""
        act = self.ctx.tracer.port(port, frame, self)
        if act is None:
            return False
        target = act[1]
        undo_to(self.trail, target.entry_trailmark)
        while len(self.cps) > target.entry_cplen:
            cp = self.cps.pop()
            if cp.kind == "bi":
                cp.payload[0].close()
        self.goals = target.entry_node
        return True

    # -- the interpreter

    def _run(self) -> bool:
        ctx = self.ctx
        budget = ctx.budget
        while True:
            node = self.goals
            if node is None:
                return True
            item = node[0]
            self.goals = node[1]
            kind = item[0]

            if kind == "g":
                _, term, depth, cutparent = item
                ctx.inferences += 1
                if ctx.abort_flag.is_set():
                    raise QueryAborted()
                if ctx.inferences > budget.inference_limit:
                    raise errors.resource_error("inferences")
                if (ctx.inferences & 1023) == 0 and time.monotonic() > ctx.deadline:
                    raise errors.resource_error("wall_time")
                if depth > budget.depth_limit:
                    raise errors.resource_error("depth")
                self.current_depth = depth

                t = deref(term)
                tt = type(t)
                if tt is Var:
                    raise errors.instantiation_error()
                if tt is Atom:
                    name, args = t.name, ()
                elif tt is Compound:
                    name, args = t.name, t.args
                else:
                    raise errors.type_error("callable", t)
                key = (name, len(args))

                # control constructs
                if key == ("true", 0):
                    continue
                if key == ("fail", 0) or key == ("false", 0):
                    if self._backtrack():
                        continue
                    return False
                if key == (",", 2):
                    rest = (("g", args[1], depth, cutparent), self.goals)
                    self.goals = (("g", args[0], depth, cutparent), rest)
                    continue
                if key == (";", 2):
                    left = deref(args[0])
                    if type(left) is Compound and left.name == "->" and len(left.args) == 2:
                        self._push_ite(left.args[0], left.args[1], args[1], depth, cutparent)
                    else:
                        self.cps.append(
                            CP("alt", self.goals, len(self.trail), (args[1], depth, cutparent))
                        )
                        self.goals = (("g", args[0], depth, cutparent), self.goals)
                    continue
                if key == ("->", 2):
                    self._push_ite(args[0], args[1], _FAIL_ATOM, depth, cutparent)
                    continue
                if key == ("!", 0):
                    self._cut_to(cutparent)
                    continue
                if name == "call" and 1 <= len(args) <= 8:
                    inner = self._extend_goal(args[0], list(args[1:]))
                    self.goals = (("g", inner, depth, len(self.cps)), self.goals)
                    continue
                if key == ("\\+", 1):
                    if self._dispatch_naf(t, args[0], depth, node):
                        continue
                    if self._backtrack():
                        continue
                    return False
                if key == ("distinct", 1):
                    tvars = term_variables(args[0])
                    tuple_term = Compound("v", tvars) if tvars else Atom("v")
                    self.goals = (
                        ("g", args[0], depth, len(self.cps)),
                        (("dcheck", set(), tuple_term), self.goals),
                    )
                    continue
                if key == ("limit", 2):
                    n = deref(args[0])
                    if type(n) is Var:
                        raise errors.instantiation_error()
                    if type(n) is not Int:
                        raise errors.type_error("integer", n)
                    if n.value <= 0:
                        if self._backtrack():
                            continue
                        return False
                    self.goals = (
                        ("g", args[1], depth, len(self.cps)),
                        (("lcheck", [n.value], len(self.cps)), self.goals),
                    )
                    continue
                if key == ("time", 1):
                    self.goals = (
                        ("g", args[0], depth, len(self.cps)),
                        (("tmark", time.monotonic(), ctx.inferences), self.goals),
                    )
                    continue

                handler = bi.BUILTINS.get(key)
                if handler is not None:
                    if self._dispatch_builtin(handler, t, args, depth, node):
                        continue
                    if self._backtrack():
                        continue
                    return False

                if self._dispatch_user(t, key, args, depth, node):
                    continue
                if self._backtrack():
                    continue
                return False

            if kind == "exit":
                frame = item[1]
                if frame.state == "exited":
                    if self._port("redo", frame):
                        continue
                    frame.state = "called"
                self._port("exit", frame)
                frame.state = "exited"
                continue

            if kind == "ite":
                _, target, then_term, depth, cutparent = item
                self._cut_to(target)
                self.goals = (("g", then_term, depth, cutparent), self.goals)
                continue

            if kind == "dcheck":
                _, seen, tuple_term = item
                key2 = variant_key(tuple_term)
                if key2 in seen:
                    if self._backtrack():
                        continue
                    return False
                seen.add(key2)
                continue

            if kind == "lcheck":
                _, state, target = item
                state[0] -= 1
                if state[0] <= 0:
                    self._cut_to(target)
                continue

            if kind == "tmark":
                _, t0, i0 = item
                wall = time.monotonic() - t0
                ctx.io.output(f"time: {wall:.3f} wall, {ctx.inferences - i0} inferences\n")
                continue

            raise AssertionError(f"unknown goal-stack item {kind!r}")

    # -- dispatch pieces

    def _push_ite(self, cond, then_term, else_term, depth, cutparent):
        h = len(self.cps)
        self.cps.append(CP("alt", self.goals, len(self.trail), (else_term, depth, cutparent)))
        self.goals = (
            ("g", cond, depth, h + 1),
            (("ite", h, then_term, depth, cutparent), self.goals),
        )

    def _cut_to(self, target: int) -> None:
        cps = self.cps
        while len(cps) > target:
            cp = cps.pop()
            if cp.kind == "bi":
                cp.payload[0].close()

    def _extend_goal(self, closure, extra: list):
        g = deref(closure)
        tg = type(g)
        if tg is Var:
            raise errors.instantiation_error()
        if not extra:
            if tg in (Atom, Compound):
                return g
            raise errors.type_error("callable", g)
        if tg is Atom:
            return Compound(g.name, extra)
        if tg is Compound:
            return Compound(g.name, list(g.args) + extra, g.pos)
        raise errors.type_error("callable", g)

    def _dispatch_naf(self, goal, inner, depth, node) -> bool:
        """\\+/1: returns True when the continuation should proceed."""
        tracer = self.ctx.tracer
        frame = None
        if tracer is not None:
            frame = self._make_frame(goal, depth, node)
            if self._port("call", frame):
                return True
        sub = Machine(self.ctx, inner, depth + 1)
        try:
            found = sub.next_solution()
        finally:
            sub.close()
        if found:
            if frame is not None and self._port("fail", frame):
                return True
            return False
        if frame is not None:
            self._port("exit", frame)
            frame.state = "exited"
        return True

    def _dispatch_builtin(self, handler, goal, args, depth, node) -> bool:
        tracer = self.ctx.tracer
        frame = None
        if tracer is not None:
            frame = self._make_frame(goal, depth, node)
            if self._port("call", frame):
                return True
        mark = len(self.trail)
        result = handler(self, list(args))
        if result is True:
            if frame is not None:
                self._port("exit", frame)
                frame.state = "exited"
            return True
        if result is False:
            if frame is not None and self._port("fail", frame):
                return True
            return False
        # redo object: first solution already produced
        self.cps.append(CP("bi", self.goals, mark, (result, frame), frame))
        if frame is not None:
            self._port("exit", frame)
            frame.state = "exited"
        return True

    def _dispatch_user(self, goal, key, args, depth, node) -> bool:
        ws = self.ctx.ws
        pred = ws.predicates.get(key)
        if pred is None:
            raise errors.existence_error(*key)
        tracer = self.ctx.tracer
        frame = None
        if tracer is not None:
            frame = self._make_frame(goal, depth, node)
            if self._port("call", frame):
                return True
            self.cps.append(CP("fm", None, len(self.trail), frame, frame))
        body_cut = len(self.cps)
        clauses = pred.clauses
        if pred.dynamic:
            clauses = list(clauses)  # logical update view
        if args:
            gkey = _index_key(args[0])
            if gkey is not None:
                clauses = [c for c in clauses if c.index_key is None or c.index_key == gkey]
        return self._try_clauses(goal, clauses, 0, depth, body_cut, frame, self.goals)

    def _try_clauses(self, goal, clauses, start, depth, body_cut, frame, cont) -> bool:
        trail = self.trail
        i = start
        n = len(clauses)
        mark = len(trail)  # pre-call bindings; unify restores it on failure
        while i < n:
            clause = clauses[i]
            i += 1
            head, body = copy_terms([clause.head, clause.body])
            if unify(goal, head, trail):
                if i < n:
                    self.cps.append(
                        CP("cl", cont, mark, (goal, clauses, i, depth, body_cut), frame)
                    )
                base = cont
                if frame is not None:
                    base = (("exit", frame), base)
                if not (type(body) is Atom and body.name == "true"):
                    base = (("g", body, depth + 1, body_cut), base)
                self.goals = base
                return True
        return False

    # -- backtracking

    def _backtrack(self) -> bool:
        cps = self.cps
        trail = self.trail
        while cps:
            cp = cps[-1]
            undo_to(trail, cp.trailmark)
            kind = cp.kind
            if kind == "cl":
                goal, clauses, start, depth, body_cut = cp.payload
                frame = cp.frame
                if frame is not None and frame.state == "exited":
                    if self._port("redo", frame):
                        return True
                    frame.state = "called"
                cps.pop()
                if self._try_clauses(goal, clauses, start, depth, body_cut, frame, cp.goals):
                    return True
                continue
            if kind == "alt":
                cps.pop()
                goal, depth, cutparent = cp.payload
                self.goals = (("g", goal, depth, cutparent), cp.goals)
                return True
            if kind == "bi":
                redoobj, frame = cp.payload
                if frame is not None and frame.state == "exited":
                    if self._port("redo", frame):
                        return True
                    frame.state = "called"
                r = redoobj.redo(self)
                if r is False:
                    cps.pop()
                    redoobj.close()
                    if frame is not None:
                        if self._port("fail", frame):
                            return True
                        frame.state = "failed"
                    continue
                if r == "last":
                    cps.pop()
                if frame is not None:
                    if self._port("exit", frame):
                        return True
                    frame.state = "exited"
                self.goals = cp.goals
                return True
            if kind == "fm":
                cps.pop()
                frame = cp.payload
                if frame.state == "exited":
                    if self._port("redo", frame):
                        return True
                    frame.state = "called"
                if self._port("fail", frame):
                    return True
                frame.state = "failed"
                continue
            raise AssertionError(f"unknown choicepoint {kind!r}")
        return False


# ---------------------------------------------------------------------------
# Queries and solution streams


@dataclass
class Solution:
    bindings: list  # (name, term) in first-occurrence order
    more: bool


class SolutionStream:
    """Lazy solution enumeration with chunked retrieval."""

    def __init__(self, machine: Machine, var_names, ctx: EngineContext):
        self.machine = machine
        self.var_names = [(n, v) for n, v in var_names if not n.startswith("_")]
        self.ctx = ctx
        self.exhausted = False
        self._pending_error: PrologError | None = None

    def _solution(self) -> Solution:
        values = copy_terms([v for _, v in self.var_names])
        more = self.machine.has_choicepoints()
        return Solution(list(zip([n for n, _ in self.var_names], values)), more)

    def next(self, n: int) -> tuple[list[Solution], bool]:
        """Up to n further solutions plus a more-solutions flag.  A pending
        error is raised on the call after the solutions preceding it were
        delivered."""
        if n < 1:
            raise ValueError("chunk size must be >= 1")
        if self._pending_error is not None:
            err = self._pending_error
            self._pending_error = None
            self.exhausted = True
            raise err
        if self.exhausted:
            return [], False
        out: list[Solution] = []
        while len(out) < n:
            try:
                found = self.machine.next_solution()
            except PrologError as err:
                if out:
                    self._pending_error = err
                    return out, True
                self.exhausted = True
                raise
            if not found:
                self.exhausted = True
                return out, False
            out.append(self._solution())
        more = self.machine.has_choicepoints()
        if not more:
            self.exhausted = True
        return out, more

    def close(self) -> None:
        self.machine.close()
        self.exhausted = True

    def __iter__(self):
        while True:
            sols, more = self.next(1)
            yield from sols
            if not more:
                return


def solve(
    ws: Workspace,
    query,
    budget: Budget | None = None,
    io=None,
    tracer: Tracer | None = None,
    var_names=None,
    abort_flag=None,
) -> SolutionStream:
    """Run one query against a workspace.  The query must already have
    passed the sandbox when sandboxing is in force.  abort_flag, when
    given, is polled once per inference from outside the running thread."""
    ctx = EngineContext(ws, io=io, budget=budget, tracer=tracer, abort_flag=abort_flag)
    if tracer is not None and tracer.ops is None:
        tracer.ops = ws.ops
    machine = Machine(ctx, query, depth=1)
    return SolutionStream(machine, var_names or [], ctx)


def parse_query(text: str, ws: Workspace):
    """Parse a query string with the workspace operator table; the trailing
    full stop is optional.  Returns (goal, var_names)."""
    tokens = tokenize(text)
    content = [i for i, t in enumerate(tokens) if t.kind not in COMMENT_KINDS]
    if not content:
        raise ReadError(0, "empty query", unterminated=True)
    if tokens[content[-1]].kind != "fullstop":
        tokens = tokenize(text + " .")
    parsed = read_term(tokens, ws.ops, 0)
    rest = parsed.token_indices[1]
    while rest < len(tokens) and tokens[rest].kind in COMMENT_KINDS:
        rest += 1
    if rest != len(tokens):
        raise ReadError(tokens[rest].start, "only one query term is allowed")
    return parsed.term, parsed.var_names


# ---------------------------------------------------------------------------
# Solution modifiers


def _fresh_name(base: str, var_names) -> str:
    taken = {n for n, _ in var_names}
    if base not in taken:
        return base
    i = 2
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def apply_modifier(query, modifier, var_names=None):
    """Wrap a query in a solution-modifier meta-goal.

    modifier is one of: "count_all", "distinct", "time", "debug",
    ("limit", k), ("order_by", var_name, "asc"|"desc").

    Returns (wrapped_query, var_names, debug_requested).
    """
    var_names = list(var_names or [])
    if modifier == "count_all":
        name = _fresh_name("Count", var_names)
        count_var = Var(name)
        wrapped = Compound("count_solutions", [query, count_var])
        return wrapped, var_names + [(name, count_var)], False
    if modifier == "distinct":
        return Compound("distinct", [query]), var_names, False
    if modifier == "time":
        return Compound("time", [query]), var_names, False
    if modifier == "debug":
        return query, var_names, True
    if isinstance(modifier, tuple) and modifier[0] == "limit":
        return Compound("limit", [Int(int(modifier[1])), query]), var_names, False
    if isinstance(modifier, tuple) and modifier[0] == "order_by":
        _, name, direction = modifier
        if direction not in ("asc", "desc"):
            raise errors.domain_error("order_direction", Atom(str(direction)))
        var = next((v for n, v in var_names if n == name), None)
        if var is None:
            raise errors.domain_error("query_variable", Atom(str(name)))
        spec = Compound(direction, [var])
        return Compound("order_by", [spec, query]), var_names, False
    raise errors.domain_error("solution_modifier", Atom(str(modifier)))
