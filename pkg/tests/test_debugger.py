import pytest

from conftest import load

from logicdesk.engine import (
    StepTransport,
    Tracer,
    parse_query,
    solve,
    validate_port_log,
)
from logicdesk.errors import QueryAborted

# line numbers below are load-bearing: sublist/2 lives on lines 1-2,
# append on lines 4-5 (shadowing the prelude so breakpoints can hit it)
LISTS_SRC = """\
sublist(Sub, List) :-
    append(_, Tail, List),
    append(Sub, _, Tail).
append([], L, L).
append([H|T], L, [H|R]) :-
    append(T, L, R).
"""


def traced_run(src, query, commands=None, mode="creep", breakpoints=(), chunk=50):
    ws = load(src)
    transport = StepTransport(commands=list(commands or []))
    tracer = Tracer(transport=transport, mode=mode, breakpoints=set(breakpoints), ops=ws.ops)
    goal, vn = parse_query(query, ws)
    stream = solve(ws, goal, var_names=vn, tracer=tracer)
    solutions, _more = stream.next(chunk)
    return tracer, transport, solutions


class TestBreakpoints:
    def test_pauses_at_call_port_on_line(self):
        tracer, transport, _ = traced_run(
            LISTS_SRC, "sublist(S, [a,b])", mode="nodebug", breakpoints={2}, commands=["continue"] * 50
        )
        assert transport.pauses, "breakpoint never hit"
        first = transport.pauses[0]
        assert first["port"] == "call"
        assert first["line"] == 2
        assert first["goal"].startswith("append(")

    def test_empty_breakpoints_never_pause(self):
        _, transport, solutions = traced_run(
            LISTS_SRC, "sublist(S, [a])", mode="nodebug", breakpoints=set()
        )
        assert transport.pauses == []
        assert solutions

    def test_breakpoint_fires_in_any_mode(self):
        _, transport, _ = traced_run(
            LISTS_SRC,
            "sublist(S, [a])",
            mode="nodebug",
            breakpoints={3},
            commands=["continue"] * 10,
        )
        assert any(p["line"] == 3 and p["port"] == "call" for p in transport.pauses)


class TestStepping:
    def test_creep_pauses_every_port(self):
        tracer, transport, _ = traced_run(
            "a :- b.\nb.\n", "a", mode="creep", commands=["step_into"] * 50
        )
        assert len(transport.pauses) == len(tracer.log)

    def test_step_over_skips_deeper_ports(self):
        tracer, transport, _ = traced_run(
            LISTS_SRC,
            "sublist(S, [a,b])",
            mode="creep",
            commands=["step_over"] + ["step_into"] * 100,
            chunk=1,
        )
        first, second = transport.pauses[0], transport.pauses[1]
        assert first["port"] == "call"
        assert second["depth"] <= first["depth"]

    def test_step_out_pauses_shallower(self):
        tracer, transport, _ = traced_run(
            LISTS_SRC,
            "sublist(S, [a,b])",
            mode="creep",
            commands=["step_into", "step_out"] + ["step_into"] * 100,
            chunk=1,
        )
        at = transport.pauses[1]
        after = transport.pauses[2]
        assert after["depth"] < at["depth"]


class TestRetry:
    def test_retry_at_exit_replays_call_with_pre_call_bindings(self):
        src = "inc(X, Y) :- Y is X + 1.\n"
        commands = ["step_into"] * 3 + ["retry"] + ["step_into"] * 20
        tracer, transport, solutions = traced_run(src, "inc(1, R)", commands=commands, chunk=1)
        ports = [(p["port"], p["goal"]) for p in transport.pauses]
        # pauses: call inc, call is, exit is, exit inc (retry here), call inc...
        assert ports[3] == ("exit", "inc(1,2)")
        replay = transport.pauses[4]
        assert replay["port"] == "call"
        assert replay["goal"] == "inc(1,R)"  # R unbound again: pre-call state
        assert solutions and dict(solutions[0].bindings)["R"].value == 2

    def test_retry_at_call_port_is_identity(self):
        src = "one(1).\n"
        commands = ["retry"] + ["step_into"] * 10
        tracer, transport, solutions = traced_run(src, "one(X)", commands=commands, chunk=1)
        calls = [p for p in transport.pauses if p["port"] == "call" and p["goal"].startswith("one")]
        assert len(calls) == 1
        assert solutions


class TestPortLegality:
    @pytest.mark.parametrize(
        "src,query",
        [
            ("a :- b.\na :- c.\nb :- fail.\nc.\n", "a"),
            (LISTS_SRC, "sublist(S, [a,b])"),
            ("p(1). p(2). p(3).\n", "p(X), X > 1"),
            ("q(X) :- member(X, [1,2]), \\+ X = 2.\n", "q(X)"),
            ("r(X) :- ( X = 1 -> true ; X = 2 ).\n", "r(X)"),
            ("s :- between(1, 3, X), X > 5.\ns.\n", "s"),
        ],
    )
    def test_automaton_accepts_trace(self, src, query):
        tracer, _, _ = traced_run(src, query, mode="nodebug", chunk=100)
        assert tracer.log, "expected a recorded trace"
        assert validate_port_log(tracer.log)

    def test_validator_rejects_bad_traces(self):
        assert not validate_port_log([{"frame": 1, "port": "exit"}])
        assert not validate_port_log(
            [{"frame": 1, "port": "call"}, {"frame": 1, "port": "redo"}]
        )
        assert not validate_port_log(
            [
                {"frame": 1, "port": "call"},
                {"frame": 1, "port": "exit"},
                {"frame": 1, "port": "exit"},
            ]
        )
        assert not validate_port_log(
            [
                {"frame": 1, "port": "call"},
                {"frame": 1, "port": "fail"},
                {"frame": 1, "port": "redo"},
            ]
        )

    def test_truncation_is_legal(self):
        assert validate_port_log([{"frame": 1, "port": "call"}])
        assert validate_port_log(
            [{"frame": 1, "port": "call"}, {"frame": 1, "port": "exit"}]
        )


class TestAbort:
    def test_abort_command_raises(self):
        with pytest.raises(QueryAborted):
            traced_run("a. \n", "a", mode="creep", commands=["abort"])

    def test_unknown_commands_reprompt(self):
        tracer, transport, solutions = traced_run(
            "a.\n", "a", mode="creep", commands=["bogus", "step_into", "step_into"]
        )
        assert solutions
