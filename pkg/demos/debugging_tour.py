"""Driving the 4-port tracer: breakpoints, stepping, and retry.

The tracer pauses at ports and asks its transport for a command.  Here
the transport is a scripted list; the web client does the same thing
over HTTP with debug/prompt events.
"""

from logicdesk.engine import StepTransport, Tracer, Workspace, consult, parse_query, solve
from logicdesk.reader import parse_program
from logicdesk.writer import writeq_text

SRC = """\
sublist(Sub, List) :-
    append2(_, Tail, List),
    append2(Sub, _, Tail).
append2([], L, L).
append2([H|T], L, [H|R]) :-
    append2(T, L, R).
"""

ws = Workspace()
ws.set_source(SRC)
terms, _ = parse_program(SRC, ws.ops)
consult(terms, ws, line_index=ws.line_index)

print("== break on line 2, then step a little")
transport = StepTransport(commands=["step_into", "step_into", "step_over", "continue"])
tracer = Tracer(transport=transport, mode="nodebug", breakpoints={2}, ops=ws.ops)
goal, vn = parse_query("sublist(S, [a,b])", ws)
solve(ws, goal, var_names=vn, tracer=tracer).next(1)
for pause in transport.pauses:
    line = f"line {pause['line']}" if pause["line"] else "no line"
    print(f"   paused at {pause['port']:<5} depth {pause['depth']}  {pause['goal']}   ({line})")

print()
print("== retry re-runs a goal from its call port with pre-call bindings")
transport = StepTransport(commands=["step_into"] * 3 + ["retry"] + ["continue"])
tracer = Tracer(transport=transport, mode="creep", ops=ws.ops)
ws2 = Workspace()
t2, _ = parse_program("inc(X, Y) :- Y is X + 1.", ws2.ops)
consult(t2, ws2)
goal, vn = parse_query("inc(1, R)", ws2)
sols, _ = solve(ws2, goal, var_names=vn, tracer=tracer).next(1)
for pause in transport.pauses:
    print(f"   {pause['port']:<5} {pause['goal']}")
print("   answer:", writeq_text(dict(sols[0].bindings)["R"]))

print()
print("== the recorded trace obeys the 4-port automaton")
from logicdesk.engine import validate_port_log

print("   legal:", validate_port_log(tracer.log), f"({len(tracer.log)} ports)")
