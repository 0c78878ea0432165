"""Answer renderings: terms can offer alternative displays.

A workspace enables renderers with use_rendering directives; every term
always has the plain writeq rendering as a fallback.
"""

import json

from logicdesk.engine import Workspace, consult, parse_query, solve
from logicdesk.reader import parse_program
from logicdesk.render import render_table, render_term

PROGRAM = """
:- use_rendering(chess).

queens4([2,4,1,3]).
"""

ws = Workspace()
terms, _ = parse_program(PROGRAM, ws.ops)
assert consult(terms, ws) == []

goal, vn = parse_query("queens4(Board)", ws)
(sol,), _ = solve(ws, goal, var_names=vn).next(1)
board = dict(sol.bindings)["Board"]

print("renderings offered for the 4-queens board:")
for rendering in render_term(board, ws):
    kind = "default" if rendering.is_default else "alternative"
    print(f"  {rendering.renderer} ({kind})")

chess = render_term(board, ws)[0]
print()
print("the chess markup tree (as sent over the wire):")
print(json.dumps(chess.to_json(), indent=1)[:400], "…")

print()
print("table mode renders a whole solution set:")
goal, vn = parse_query("member(X-Y, [1-one, 2-two, 3-three])", ws)
sols, _ = solve(ws, goal, var_names=vn).next(10)
table = render_table(sols, ops=ws.ops)
for row in table.children:
    cells = ["".join(str(c) for c in cell.children) for cell in row.children]
    print("  ", " | ".join(f"{c:>7}" for c in cells))
