import random
import time

import pytest
from fastapi.testclient import TestClient

from logicdesk.engine import Budget
from logicdesk.server import create_app
from logicdesk.sessions import ServerConfig


def make_client(**overrides):
    defaults = dict(
        destroy_grace=0.15,
        forget_after=0.5,
        reap_interval=0.02,
        idle_ttl=60.0,
        budget=Budget(wall_time_limit=10.0),
    )
    defaults.update(overrides)
    app = create_app(ServerConfig(**defaults))
    return TestClient(app)


@pytest.fixture
def client():
    return make_client()


def create_engine(client, src=""):
    response = client.post("/api/pengine/create", json={"src": src})
    assert response.status_code == 201
    return response.json()["id"]


def collect_events(client, sid, until_kinds, deadline=5.0, extra_timeout=0.5):
    """Poll until one of until_kinds arrives; returns all events seen."""
    events = []
    limit = time.monotonic() + deadline
    while time.monotonic() < limit:
        batch = client.get(
            f"/api/pengine/{sid}/events", params={"timeout": extra_timeout}
        ).json()["events"]
        events.extend(batch)
        if any(e["kind"] in until_kinds for e in batch):
            return events
    raise AssertionError(f"never saw {until_kinds}; got {events}")


def validate_session_events(events) -> bool:
    """The session event automaton: create first, at most one terminal
    outcome, destroyed last."""
    if not events or events[0]["kind"] != "create":
        return False
    terminal = False
    destroyed = False
    for e in events[1:]:
        if destroyed:
            return False
        kind = e["kind"]
        if kind == "destroyed":
            destroyed = True
        elif terminal:
            return False
        elif kind == "success":
            if e["more"] is False:
                terminal = True
        elif kind in ("failure", "stopped", "aborted"):
            terminal = True
        elif kind == "error":
            if e.get("fatal"):
                terminal = True
        elif kind in ("output", "prompt", "debug", "create"):
            pass
        else:
            return False
    return True


class TestLifecycle:
    def test_create_emits_create_event(self, client):
        sid = create_engine(client, "p(1).")
        events = collect_events(client, sid, {"create"})
        assert events[0] == {"kind": "create", "id": sid}

    def test_load_errors_reported_but_session_created(self, client):
        sid = create_engine(client, ":- initialization(main).\np(1).")
        events = collect_events(client, sid, {"error"})
        err = next(e for e in events if e["kind"] == "error")
        assert err["error"]["kind"] == "permission"
        assert not err["fatal"]
        client.post(f"/api/pengine/{sid}/ask", json={"query": "p(X)"})
        events = collect_events(client, sid, {"success"})
        assert any(e["kind"] == "success" for e in events)

    def test_ask_success_roundtrip(self, client):
        sid = create_engine(client, "")
        r = client.post(f"/api/pengine/{sid}/ask", json={"query": "X = 1"})
        assert r.status_code == 200
        events = collect_events(client, sid, {"success"})
        success = next(e for e in events if e["kind"] == "success")
        assert success["more"] is False
        binding = success["solutions"][0]["bindings"][0]
        assert binding["name"] == "X"
        assert binding["renderings"][0]["payload"] == "1"

    def test_failure_event(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "fail"})
        events = collect_events(client, sid, {"failure"})
        assert any(e["kind"] == "failure" for e in events)

    def test_second_ask_is_protocol_error(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "true"})
        collect_events(client, sid, {"success"})
        r = client.post(f"/api/pengine/{sid}/ask", json={"query": "true"})
        assert r.status_code == 409
        assert r.json()["error"] == "protocol_error"

    def test_unknown_engine_404(self, client):
        assert client.post("/api/pengine/nope/ask", json={"query": "true"}).status_code == 404
        assert client.get("/api/pengine/nope/events").status_code == 404

    def test_syntax_error_in_query(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "foo(("})
        events = collect_events(client, sid, {"error"})
        err = next(e for e in events if e["kind"] == "error")
        assert err["error"]["kind"] == "syntax_error"

    def test_unsafe_query_error_carries_trace(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "read(X), call(X)"})
        events = collect_events(client, sid, {"error"})
        err = next(e for e in events if e["kind"] == "error")
        assert err["error"]["kind"] == "instantiation"
        assert len(err["error"]["trace"]) == 2

    def test_sandbox_can_be_disabled(self):
        client = make_client(sandbox=False)
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "shell(nothing)"})
        events = collect_events(client, sid, {"error"})
        err = next(e for e in events if e["kind"] == "error")
        # no sandbox verdict: the engine itself reports a missing predicate
        assert err["error"]["kind"] == "existence_error"

    def test_destroyed_emitted_and_then_404(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "true"})
        events = collect_events(client, sid, {"destroyed"})
        assert events[-1]["kind"] == "destroyed"
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            if client.get(f"/api/pengine/{sid}/events").status_code == 404:
                break
            time.sleep(0.05)
        assert client.get(f"/api/pengine/{sid}/events").status_code == 404


class TestChunking:
    def test_next_stop_flow(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "between(1,25,X)", "chunk": 10})
        events = collect_events(client, sid, {"success"})
        success = [e for e in events if e["kind"] == "success"][-1]
        assert len(success["solutions"]) == 10 and success["more"]
        r = client.post(f"/api/pengine/{sid}/next", json={"count": 10})
        assert r.status_code == 200
        events = collect_events(client, sid, {"success"})
        success = [e for e in events if e["kind"] == "success"][-1]
        assert len(success["solutions"]) == 10 and success["more"]
        client.post(f"/api/pengine/{sid}/next", json={"count": 1000})
        events = collect_events(client, sid, {"success"})
        success = [e for e in events if e["kind"] == "success"][-1]
        assert len(success["solutions"]) == 5 and success["more"] is False

    def test_counts_clamped(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "between(1,2000,X)", "chunk": 1})
        collect_events(client, sid, {"success"})
        client.post(f"/api/pengine/{sid}/next", json={"count": 99999})
        events = collect_events(client, sid, {"success"})
        success = [e for e in events if e["kind"] == "success"][-1]
        assert len(success["solutions"]) == 1000

    def test_stop_then_second_stop_is_protocol_error(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "between(1,100,X)", "chunk": 1})
        collect_events(client, sid, {"success"})
        assert client.post(f"/api/pengine/{sid}/stop").status_code == 200
        collect_events(client, sid, {"stopped"})
        assert client.post(f"/api/pengine/{sid}/stop").status_code == 409

    def test_next_on_done_is_protocol_error(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "true"})
        collect_events(client, sid, {"success"})
        assert client.post(f"/api/pengine/{sid}/next", json={"count": 10}).status_code == 409


class TestAbort:
    def test_abort_infinite_loop_within_a_second(self, client):
        sid = create_engine(client, "loop :- loop.")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "loop"})
        time.sleep(0.1)
        t0 = time.monotonic()
        assert client.post(f"/api/pengine/{sid}/abort").status_code == 200
        events = collect_events(client, sid, {"aborted"}, deadline=2.0, extra_timeout=0.2)
        assert time.monotonic() - t0 < 1.0
        assert any(e["kind"] == "aborted" for e in events)

    def test_abort_after_done_is_protocol_error(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "true"})
        collect_events(client, sid, {"success"})
        assert client.post(f"/api/pengine/{sid}/abort").status_code == 409

    def test_abort_while_prompting(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "read(X)"})
        collect_events(client, sid, {"prompt"})
        assert client.post(f"/api/pengine/{sid}/abort").status_code == 200
        events = collect_events(client, sid, {"aborted"})
        assert any(e["kind"] == "aborted" for e in events)


class TestRespond:
    def test_read_roundtrip(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "read(X), writeln(X)"})
        events = collect_events(client, sid, {"prompt"})
        prompt = next(e for e in events if e["kind"] == "prompt")
        assert prompt["prompt"] == "read_term"
        client.post(f"/api/pengine/{sid}/respond", json={"input": "hello."})
        events = collect_events(client, sid, {"success"})
        output = next(e for e in events if e["kind"] == "output")
        assert output["text"] == "hello\n"
        success = next(e for e in events if e["kind"] == "success")
        assert success["solutions"][0]["bindings"][0]["renderings"][-1]["payload"] == "hello"

    def test_unparsable_input_reprompts(self, client):
        sid = create_engine(client, "")
        client.post(f"/api/pengine/{sid}/ask", json={"query": "read(X)"})
        collect_events(client, sid, {"prompt"})
        client.post(f"/api/pengine/{sid}/respond", json={"input": "oops("})
        events = collect_events(client, sid, {"prompt"})
        assert any(e["kind"] == "error" and not e["fatal"] for e in events)
        client.post(f"/api/pengine/{sid}/respond", json={"input": "ok."})
        collect_events(client, sid, {"success"})

    def test_respond_in_wrong_state(self, client):
        sid = create_engine(client, "")
        r = client.post(f"/api/pengine/{sid}/respond", json={"input": "x."})
        assert r.status_code == 409


class TestDebugOverHttp:
    SRC = "inc(X, Y) :-\n    Y is X + 1.\n"

    def test_breakpoint_pause_and_continue(self, client):
        sid = create_engine(client, self.SRC)
        r = client.post(f"/api/pengine/{sid}/breakpoints", json={"lines": [2]})
        assert r.status_code == 200
        client.post(f"/api/pengine/{sid}/ask", json={"query": "inc(1, R)"})
        events = collect_events(client, sid, {"debug"})
        debug = next(e for e in events if e["kind"] == "debug")
        assert debug["port"] == "call" and debug["line"] == 2
        client.post(f"/api/pengine/{sid}/respond", json={"input": "continue"})
        events = collect_events(client, sid, {"success"})
        assert any(e["kind"] == "success" for e in events)

    def test_debug_flag_starts_creep(self, client):
        sid = create_engine(client, self.SRC)
        client.post(f"/api/pengine/{sid}/ask", json={"query": "inc(1, R)", "debug": True})
        events = collect_events(client, sid, {"debug"})
        debug = next(e for e in events if e["kind"] == "debug")
        assert debug["port"] == "call"
        client.post(f"/api/pengine/{sid}/respond", json={"input": "continue"})
        collect_events(client, sid, {"success"})

    def test_retry_replays_call(self, client):
        sid = create_engine(client, self.SRC)
        client.post(f"/api/pengine/{sid}/ask", json={"query": "inc(1, R)", "debug": True})
        seen = []
        deadline = time.monotonic() + 5
        retried = False
        while time.monotonic() < deadline:
            events = client.get(f"/api/pengine/{sid}/events", params={"timeout": 0.5}).json()["events"]
            for e in events:
                if e["kind"] == "debug":
                    seen.append((e["port"], e["goal"]))
                    if e["port"] == "exit" and e["goal"].startswith("inc(") and not retried:
                        retried = True
                        client.post(f"/api/pengine/{sid}/respond", json={"input": "retry"})
                    else:
                        client.post(f"/api/pengine/{sid}/respond", json={"input": "step_into"})
            if any(e["kind"] == "success" for e in events):
                break
        assert ("exit", "inc(1,2)") in seen
        after = seen[seen.index(("exit", "inc(1,2)")) + 1 :]
        assert ("call", "inc(1,R)") in after

    def test_breakpoints_wrong_state(self, client):
        sid = create_engine(client, self.SRC)
        client.post(f"/api/pengine/{sid}/ask", json={"query": "inc(1, R)"})
        collect_events(client, sid, {"success"})
        r = client.post(f"/api/pengine/{sid}/breakpoints", json={"lines": [1]})
        assert r.status_code == 409


class TestIsolation:
    def test_dynamic_databases_are_private(self, client):
        src = ":- dynamic(v/1).\nput(X) :- assert(v(X)).\nget(X) :- v(X).\n"
        a = create_engine(client, src)
        b = create_engine(client, src)
        client.post(f"/api/pengine/{a}/ask", json={"query": "put(from_a), get(X)"})
        events = collect_events(client, a, {"success"})
        success = next(e for e in events if e["kind"] == "success")
        assert success["solutions"][0]["bindings"][0]["renderings"][-1]["payload"] == "from_a"
        client.post(f"/api/pengine/{b}/ask", json={"query": "get(X)"})
        events = collect_events(client, b, {"failure", "success"})
        assert any(e["kind"] == "failure" for e in events)


class TestLimits:
    def test_engine_limit_429(self):
        client = make_client(max_engines=3, destroy_grace=10.0)
        ids = [create_engine(client) for _ in range(3)]
        r = client.post("/api/pengine/create", json={"src": ""})
        assert r.status_code == 429

    def test_limit_frees_after_destroy(self):
        client = make_client(max_engines=2, destroy_grace=0.05, forget_after=10.0)
        for _ in range(6):
            sid = create_engine(client)
            client.post(f"/api/pengine/{sid}/ask", json={"query": "true"})
            collect_events(client, sid, {"destroyed"})


class TestEventDelivery:
    def test_empty_poll_times_out(self, client):
        sid = create_engine(client, "")
        collect_events(client, sid, {"create"})
        t0 = time.monotonic()
        batch = client.get(f"/api/pengine/{sid}/events", params={"timeout": 0.3}).json()["events"]
        assert batch == []
        assert 0.25 <= time.monotonic() - t0 < 2.0

    def test_events_redelivered_until_next_pull(self, client):
        # the batch stays queued until a later pull acknowledges it
        sid = create_engine(client, "")
        session = client.app.state.registry.get(sid)
        batch1 = session.pull_events(1.0)
        assert [e["kind"] for e in batch1] == ["create"]
        assert session.events[session.acked :]  # still queued, not yet acked
        session.pull_events(0.0)
        assert session.acked == 1


class TestRandomClientScripts:
    @pytest.mark.parametrize("seed", range(8))
    def test_event_traces_accepted_by_state_machine(self, seed):
        client = make_client(destroy_grace=0.05, forget_after=5.0)
        rng = random.Random(seed)
        programs = ["", "p(1). p(2). p(3).", "loop :- loop.", ":- dynamic(d/1)."]
        queries = ["p(X)", "between(1, 30, X)", "fail", "X is 1 + foo", "loop", "true"]
        sid = create_engine(client, rng.choice(programs))
        events = []

        def pull():
            r = client.get(f"/api/pengine/{sid}/events", params={"timeout": 0.2})
            if r.status_code == 200:
                events.extend(r.json()["events"])

        pull()
        client.post(
            f"/api/pengine/{sid}/ask",
            json={"query": rng.choice(queries), "chunk": rng.choice([1, 5])},
        )
        for _ in range(rng.randint(2, 10)):
            action = rng.choice(["next", "stop", "abort", "pull", "respond"])
            if action == "next":
                client.post(f"/api/pengine/{sid}/next", json={"count": rng.choice([1, 10])})
            elif action == "stop":
                client.post(f"/api/pengine/{sid}/stop")
            elif action == "abort":
                client.post(f"/api/pengine/{sid}/abort")
            elif action == "respond":
                client.post(f"/api/pengine/{sid}/respond", json={"input": "x."})
            else:
                pull()
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline and not any(e["kind"] == "destroyed" for e in events):
            if client.get(f"/api/pengine/{sid}/events", params={"timeout": 0.2}).status_code == 404:
                break
            pull()
            if not any(e["kind"] == "destroyed" for e in events):
                # drive the session toward a terminal state
                client.post(f"/api/pengine/{sid}/abort")
        assert validate_session_events(events), events


class TestStaticAndMisc:
    def test_index_page(self, client):
        r = client.get("/")
        assert r.status_code == 200
        assert "logicdesk" in r.text

    def test_store_and_highlight_endpoints_mounted(self, client):
        r = client.post("/api/store", json={"content": "x."})
        assert r.status_code == 201
        name = r.json()["name"]
        assert client.get(f"/api/store/{name}").text == "x."
        r = client.post("/api/highlight/u1", json={"text": "a."})
        assert r.status_code == 200
        assert client.get("/api/templates", params={"prefix": "memb"}).json()["templates"]
