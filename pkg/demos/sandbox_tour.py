"""What the sandbox lets through, and how it explains a rejection.

safe_goal unfolds every reachable goal against the builtin whitelist;
a rejection carries the unfolding path from the query to the culprit.
"""

from logicdesk.engine import Workspace, consult, parse_query
from logicdesk.reader import parse_program
from logicdesk.sandbox import safe_directive, safe_goal
from logicdesk.writer import writeq_text

PROGRAM = """
:- dynamic(counter/1).
counter(0).
bump :- retract(counter(N)), N1 is N + 1, assert(counter(N1)).
run_all([]).
run_all([G|Gs]) :- call(G), run_all(Gs).
"""

ws = Workspace()
terms, _ = parse_program(PROGRAM, ws.ops)
consult(terms, ws)

QUERIES = [
    "maplist(plus(1), [1,2,3])",
    "bump",
    "read(X), call(X)",
    "assert(m:foo)",
    "shell('ls')",
    "run_all([writeln(hi), nl])",
    "run_all(Gs)",
]

for text in QUERIES:
    goal, _ = parse_query(text, ws)
    verdict = safe_goal(goal, ws)
    if verdict.safe:
        print(f"SAFE    {text}")
    else:
        v = verdict.violation
        path = "  ->  ".join(writeq_text(t, ws.ops) for t in v.trace)
        print(f"UNSAFE  {text}")
        print(f"        kind: {v.kind}")
        print(f"        via:  {path}")

print()
print("directives get their own table:")
for text in ["dynamic(hits/1)", "op(700, xfx, ===)", "initialization(main)", "op(9999, xfx, nope)"]:
    d, _ = parse_query(text, ws)
    verdict = safe_directive(d)
    print(f"  :- {text:28} {'allowed' if verdict.safe else 'refused'}")
