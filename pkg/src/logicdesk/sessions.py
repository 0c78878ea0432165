"""Engine sessions: one sandboxed query engine per client, driven through
an ordered event queue.

Each session owns a worker thread for its single query.  The HTTP layer
talks to sessions only through thread-safe methods here: command queues
in, a cursor-based event queue out.  Abort is a flag the engine polls
every inference.
"""

from __future__ import annotations

import queue
import threading
import time
import uuid as uuidlib
from dataclasses import dataclass, field

from . import render, sandbox
from .engine import (
    Budget,
    Solution,
    Tracer,
    Workspace,
    consult,
    parse_query,
    solve,
)
from .errors import PrologError, QueryAborted
from .reader import ReadError, build_line_index, parse_program
from .writer import writeq_text

CREATED = "created"
RUNNING = "running"
WAITING_MORE = "waiting_more"
PROMPTING_INPUT = "prompting_input"
PAUSED_DEBUG = "paused_debug"
DONE = "done"
ABORTED = "aborted"
FAILED_ERROR = "failed_error"
DESTROYED = "destroyed"

TERMINAL_STATES = frozenset({DONE, ABORTED, FAILED_ERROR})

_TRANSITIONS = {
    CREATED: {RUNNING, DESTROYED},
    RUNNING: {WAITING_MORE, PROMPTING_INPUT, PAUSED_DEBUG, DONE, ABORTED, FAILED_ERROR, DESTROYED},
    WAITING_MORE: {RUNNING, DONE, ABORTED, DESTROYED},
    PROMPTING_INPUT: {RUNNING, ABORTED, FAILED_ERROR, DESTROYED},
    PAUSED_DEBUG: {RUNNING, ABORTED, FAILED_ERROR, DESTROYED},
    DONE: {DESTROYED},
    ABORTED: {DESTROYED},
    FAILED_ERROR: {DESTROYED},
    DESTROYED: set(),
}

DEBUG_COMMANDS = frozenset({"step_into", "step_over", "step_out", "retry", "continue", "abort"})


@dataclass
class ServerConfig:
    data_root: str | None = None
    max_engines: int = 16
    sandbox: bool = True
    budget: Budget = field(default_factory=Budget)
    default_chunk: int = 1
    max_chunk: int = 1000
    destroy_grace: float = 60.0
    forget_after: float = 30.0
    idle_ttl: float = 900.0
    reap_interval: float = 0.05
    max_poll_timeout: float = 30.0
    static_dir: str | None = None


class ProtocolError(Exception):
    """A request that the session state machine does not allow."""


class TooManyEngines(Exception):
    pass


class UnknownSession(Exception):
    pass


class _SessionIO:
    """Engine I/O redirected onto the session's event queue."""

    def __init__(self, session: "EngineSession"):
        self.session = session

    def output(self, text: str) -> None:
        self.session.push_event("output", text=text)

    def read_input(self) -> str | None:
        s = self.session
        s.set_state(PROMPTING_INPUT)
        s.push_event("prompt", prompt=ReadPrompt.READ_TERM)
        value = s.wait_queue(s.inputs)
        s.set_state(RUNNING)
        return value

    def parse_error(self, message: str) -> None:
        self.session.push_event(
            "error", error={"text": message, "kind": "syntax_error"}, fatal=False
        )


class ReadPrompt:
    READ_TERM = "read_term"
    DEBUG = "debug"


class _SessionDebugTransport:
    """Debug pauses surface as debug + prompt events; commands arrive via
    respond()."""

    def __init__(self, session: "EngineSession"):
        self.session = session

    def wait_command(self, snapshot: dict) -> str:
        s = self.session
        s.set_state(PAUSED_DEBUG)
        s.push_event(
            "debug",
            port=snapshot["port"],
            goal=snapshot["goal"],
            depth=snapshot["depth"],
            line=snapshot["line"],
        )
        s.push_event("prompt", prompt=ReadPrompt.DEBUG)
        cmd = s.wait_queue(s.debug_commands)
        s.set_state(RUNNING)
        if cmd == "abort":
            raise QueryAborted()
        return cmd


class EngineSession:
    def __init__(self, session_id: str, ws: Workspace, config: ServerConfig):
        self.id = session_id
        self.ws = ws
        self.config = config
        self.state = CREATED
        self.lock = threading.RLock()
        self.cond = threading.Condition(self.lock)
        self.events: list[dict] = []
        self.delivered = 0
        self.acked = 0
        self.commands: queue.Queue = queue.Queue()
        self.inputs: queue.Queue = queue.Queue()
        self.debug_commands: queue.Queue = queue.Queue()
        self.abort_flag = threading.Event()
        self.breakpoints: set[int] = set()
        self.asked = False
        self.thread: threading.Thread | None = None
        self.created_at = time.monotonic()
        self.last_activity = self.created_at
        self.terminal_at: float | None = None
        self.destroyed_at: float | None = None

    # -- events

    def push_event(self, kind: str, **payload) -> None:
        with self.cond:
            self.events.append({"kind": kind, **payload})
            self.last_activity = time.monotonic()
            self.cond.notify_all()

    def pull_events(self, timeout: float) -> list[dict]:
        """Long-poll: pulling acknowledges the previous batch; events stay
        queued until then so a reconnect cannot lose them."""
        deadline = time.monotonic() + max(0.0, timeout)
        with self.cond:
            self.acked = self.delivered
            while len(self.events) <= self.acked:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self.cond.wait(remaining)
            batch = self.events[self.acked :]
            self.delivered = len(self.events)
            self.last_activity = time.monotonic()
            return batch

    # -- state machine

    def set_state(self, new_state: str) -> None:
        with self.lock:
            if new_state == self.state:
                return
            allowed = _TRANSITIONS[self.state]
            if new_state not in allowed:
                raise AssertionError(f"illegal transition {self.state} -> {new_state}")
            self.state = new_state
            self.last_activity = time.monotonic()

    def wait_queue(self, q: queue.Queue):
        """Block on a queue while staying responsive to abort."""
        while True:
            if self.abort_flag.is_set():
                raise QueryAborted()
            try:
                return q.get(timeout=0.05)
            except queue.Empty:
                continue

    # -- query worker

    def start_query(self, goal, var_names, chunk: int, debug: bool) -> None:
        tracer = None
        if debug or self.breakpoints:
            tracer = Tracer(
                transport=_SessionDebugTransport(self),
                mode="creep" if debug else "nodebug",
                breakpoints=self.breakpoints,
                ops=self.ws.ops,
            )
        self.asked = True
        self.set_state(RUNNING)
        self.thread = threading.Thread(
            target=self._run_query,
            args=(goal, var_names, chunk, tracer),
            name=f"engine-{self.id[:8]}",
            daemon=True,
        )
        self.thread.start()

    def _render_solutions(self, solutions: list[Solution]) -> list[dict]:
        out = []
        for sol in solutions:
            bindings = []
            for name, value in sol.bindings:
                renderings = render.render_term(value, self.ws)
                bindings.append({"name": name, "renderings": [r.to_json() for r in renderings]})
            out.append({"bindings": bindings})
        return out

    def _run_query(self, goal, var_names, chunk: int, tracer) -> None:
        io = _SessionIO(self)
        stream = solve(
            self.ws,
            goal,
            budget=self.config.budget,
            io=io,
            tracer=tracer,
            var_names=var_names,
            abort_flag=self.abort_flag,
        )
        first = True
        try:
            while True:
                started = time.monotonic()
                solutions, more = stream.next(chunk)
                elapsed = time.monotonic() - started
                if first and not solutions and not more:
                    self.push_event("failure", time=elapsed)
                    self._finish(DONE)
                    return
                first = False
                if more:
                    # flip state before the event is visible, so a client
                    # reacting to it immediately may call next/stop
                    self.set_state(WAITING_MORE)
                self.push_event(
                    "success",
                    solutions=self._render_solutions(solutions),
                    more=more,
                    time=round(elapsed, 6),
                )
                if not more:
                    self._finish(DONE)
                    return
                cmd = self.wait_queue(self.commands)
                if cmd[0] == "next":
                    chunk = cmd[1]
                    self.set_state(RUNNING)
                    continue
                if cmd[0] == "stop":
                    self.push_event("stopped")
                    self._finish(DONE)
                    return
        except QueryAborted:
            self.push_event("aborted")
            self._finish(ABORTED)
        except PrologError as err:
            self.push_event(
                "error",
                error={"text": writeq_text(err.term, self.ws.ops), "kind": err.kind},
                fatal=True,
            )
            self._finish(FAILED_ERROR)
        except Exception as err:  # engine bug: fail the session, not the server
            self.push_event(
                "error", error={"text": f"internal error: {err}", "kind": "system_error"}, fatal=True
            )
            self._finish(FAILED_ERROR)

    def _finish(self, state: str) -> None:
        with self.lock:
            self.set_state(state)
            self.terminal_at = time.monotonic()

    def fail_query(self, error: dict) -> None:
        """Mark the one query as consumed and failed without a worker."""
        with self.lock:
            self.asked = True
            self.set_state(RUNNING)
            self.push_event("error", error=error, fatal=True)
            self._finish(FAILED_ERROR)

    def destroy(self) -> None:
        with self.lock:
            if self.state == DESTROYED:
                return
            if self.state not in TERMINAL_STATES and self.state != CREATED:
                self.abort_flag.set()
            self.state = DESTROYED
            self.destroyed_at = time.monotonic()
        self.push_event("destroyed")


class SessionRegistry:
    """All live sessions plus the reaper enforcing expiry and the engine
    limit."""

    def __init__(self, config: ServerConfig | None = None, store=None):
        self.config = config or ServerConfig()
        self.store = store
        self.sessions: dict[str, EngineSession] = {}
        self.lock = threading.Lock()
        self._reaper = threading.Thread(target=self._reap_loop, name="session-reaper", daemon=True)
        self._reaper_stop = threading.Event()
        self._reaper.start()

    # -- lifecycle

    def close(self) -> None:
        self._reaper_stop.set()
        with self.lock:
            sessions = list(self.sessions.values())
        for s in sessions:
            s.abort_flag.set()

    def _non_destroyed(self) -> int:
        return sum(1 for s in self.sessions.values() if s.state != DESTROYED)

    def create(self, src: str) -> EngineSession:
        self.reap()
        with self.lock:
            if self._non_destroyed() >= self.config.max_engines:
                raise TooManyEngines(f"engine limit {self.config.max_engines} reached")
            session_id = uuidlib.uuid4().hex
            ws = Workspace()
            session = EngineSession(session_id, ws, self.config)
            self.sessions[session_id] = session
        ws.set_source(src)
        terms, issues = parse_program(src, ws.ops)
        checker = sandbox.safe_directive if self.config.sandbox else None
        resolver = self.store.resolve_include if self.store is not None else None
        load_errors = consult(
            terms,
            ws,
            directive_ok=checker,
            include_resolver=resolver,
            line_index=build_line_index(src),
        )
        session.push_event("create", id=session_id)
        for issue in issues:
            session.push_event(
                "error",
                error={"text": issue.message, "kind": "syntax_error", "position": issue.position},
                fatal=False,
            )
        for err in load_errors:
            session.push_event(
                "error",
                error={"text": err.message, "kind": err.kind, "line": err.line},
                fatal=False,
            )
        return session

    def get(self, session_id: str) -> EngineSession:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    # -- protocol operations

    def ask(self, session_id: str, query: str, chunk: int | None = None, debug: bool = False) -> None:
        session = self.get(session_id)
        with session.lock:
            if session.state != CREATED or session.asked:
                raise ProtocolError("this engine has already been asked its one query")
            chunk = self._clamp_chunk(chunk if chunk is not None else self.config.default_chunk)
            try:
                goal, var_names = parse_query(query, session.ws)
            except ReadError as err:
                session.fail_query(
                    {"text": err.message, "kind": "syntax_error", "position": err.position}
                )
                return
            if self.config.sandbox:
                verdict = sandbox.safe_goal(goal, session.ws)
                if not verdict.safe:
                    v = verdict.violation
                    session.fail_query(
                        {
                            "text": f"goal not allowed: {writeq_text(v.culprit, session.ws.ops)}",
                            "kind": v.kind,
                            "trace": [writeq_text(t, session.ws.ops) for t in v.trace],
                        }
                    )
                    return
            session.start_query(goal, var_names, chunk, debug)

    def _clamp_chunk(self, count) -> int:
        try:
            count = int(count)
        except (TypeError, ValueError):
            return self.config.default_chunk
        return max(1, min(count, self.config.max_chunk))

    def next(self, session_id: str, count: int) -> None:
        session = self.get(session_id)
        with session.lock:
            if session.state != WAITING_MORE:
                raise ProtocolError(f"next is not allowed in state {session.state}")
            session.commands.put(("next", self._clamp_chunk(count)))

    def stop(self, session_id: str) -> None:
        session = self.get(session_id)
        with session.lock:
            if session.state != WAITING_MORE:
                raise ProtocolError(f"stop is not allowed in state {session.state}")
            session.commands.put(("stop",))

    def abort(self, session_id: str) -> None:
        session = self.get(session_id)
        with session.lock:
            if session.state not in (RUNNING, WAITING_MORE, PROMPTING_INPUT, PAUSED_DEBUG):
                raise ProtocolError(f"abort is not allowed in state {session.state}")
            session.abort_flag.set()

    def respond(self, session_id: str, value: str) -> None:
        session = self.get(session_id)
        with session.lock:
            if session.state == PROMPTING_INPUT:
                session.inputs.put(value)
            elif session.state == PAUSED_DEBUG:
                cmd = value.strip()
                if cmd not in DEBUG_COMMANDS:
                    session.push_event(
                        "error",
                        error={"text": f"unknown debug command: {cmd}", "kind": "domain_error"},
                        fatal=False,
                    )
                    session.push_event("prompt", prompt=ReadPrompt.DEBUG)
                    return
                session.debug_commands.put(cmd)
            else:
                raise ProtocolError(f"respond is not allowed in state {session.state}")

    def set_breakpoints(self, session_id: str, lines) -> None:
        session = self.get(session_id)
        with session.lock:
            if session.state not in (CREATED, PAUSED_DEBUG):
                raise ProtocolError(f"breakpoints cannot be changed in state {session.state}")
            session.breakpoints.clear()
            session.breakpoints.update(int(x) for x in lines)

    def pull_events(self, session_id: str, timeout: float) -> list[dict]:
        session = self.get(session_id)
        return session.pull_events(min(max(timeout, 0.0), self.config.max_poll_timeout))

    # -- reaping

    def reap(self) -> None:
        now = time.monotonic()
        cfg = self.config
        with self.lock:
            sessions = list(self.sessions.items())
        for sid, s in sessions:
            with s.lock:
                state = s.state
                if state in TERMINAL_STATES and now - s.terminal_at >= cfg.destroy_grace:
                    s.destroy()
                elif state == CREATED and now - s.last_activity >= cfg.idle_ttl:
                    s.destroy()
                elif (
                    state in (WAITING_MORE, PROMPTING_INPUT, PAUSED_DEBUG)
                    and now - s.last_activity >= cfg.idle_ttl
                ):
                    s.abort_flag.set()
            if s.state == DESTROYED and s.destroyed_at is not None:
                if now - s.destroyed_at >= cfg.forget_after:
                    with self.lock:
                        self.sessions.pop(sid, None)

    def _reap_loop(self) -> None:
        while not self._reaper_stop.wait(self.config.reap_interval):
            try:
                self.reap()
            except Exception:
                pass  # the reaper must survive
