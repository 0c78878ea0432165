"""Quickstart: load a program into a workspace and run queries.

The engine is plain Python: no server needed.  A workspace holds the
program; solve() gives a lazy solution stream you can pull in chunks.
"""

from logicdesk.engine import Budget, Workspace, apply_modifier, consult, parse_query, solve
from logicdesk.reader import parse_program
from logicdesk.writer import writeq_text

PROGRAM = """
likes(alice, prolog).
likes(bob, chess).
likes(carol, prolog).

fans(Thing, Fans) :- findall(P, likes(P, Thing), Fans).
"""

ws = Workspace()
terms, issues = parse_program(PROGRAM, ws.ops)
assert not issues
errors = consult(terms, ws)
assert not errors

print("== all solutions, one by one")
goal, var_names = parse_query("likes(Who, What)", ws)
for solution in solve(ws, goal, var_names=var_names):
    row = ", ".join(f"{n} = {writeq_text(t, ws.ops)}" for n, t in solution.bindings)
    print("  ", row)

print("== chunked retrieval (chunk of 2)")
goal, var_names = parse_query("likes(Who, _)", ws)
stream = solve(ws, goal, var_names=var_names)
while True:
    chunk, more = stream.next(2)
    print("   chunk:", [writeq_text(dict(s.bindings)["Who"]) for s in chunk], "more:", more)
    if not more:
        break

print("== meta-call and aggregation")
goal, var_names = parse_query("fans(prolog, Fans)", ws)
(sol,), _ = solve(ws, goal, var_names=var_names).next(1)
print("   prolog fans:", writeq_text(dict(sol.bindings)["Fans"], ws.ops))

print("== solution modifiers")
goal, var_names = parse_query("likes(Who, _)", ws)
wrapped, var_names, _ = apply_modifier(goal, "count_all", var_names)
(sol,), _ = solve(ws, wrapped, var_names=var_names).next(1)
print("   count_all:", dict(sol.bindings)["Count"].value)

goal, var_names = parse_query("likes(_, What)", ws)
wrapped, var_names, _ = apply_modifier(goal, "distinct", var_names)
sols, _ = solve(ws, wrapped, var_names=var_names).next(10)
print("   distinct things:", [writeq_text(dict(s.bindings)["What"]) for s in sols])

print("== budgets turn runaway queries into resource errors")
ws2 = Workspace()
terms, _ = parse_program("loop :- loop.", ws2.ops)
consult(terms, ws2)
goal, var_names = parse_query("loop", ws2)
try:
    solve(ws2, goal, var_names=var_names, budget=Budget(inference_limit=10_000)).next(1)
except Exception as err:
    print("   stopped:", err)
