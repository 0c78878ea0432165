"""The content-addressed program store: saves, versions, forks, includes.

Every blob is addressed by the SHA-1 of its bytes; a name is a head
pointing at the latest version.  Forks keep the origin's history.
"""

import tempfile

from logicdesk.engine import Workspace, consult, parse_query, solve
from logicdesk.reader import parse_program
from logicdesk.store import Conflict, Store
from logicdesk.writer import writeq_text

root = tempfile.mkdtemp(prefix="logicdesk-store-")
store = Store(root)
print("store at", root)

name, v1 = store.save_new("double(X, Y) :- Y is X * 2.\n")
print(f"anonymous save -> name {name}, blob {v1[:12]}…")

v2 = store.save_version(name, "double(X, Y) :- Y is X * 2.\ntriple(X, Y) :- Y is X * 3.\n", v1)
print(f"new version    -> blob {v2[:12]}…")

try:
    store.save_version(name, "conflicting.\n", v1)
except Conflict as err:
    print(f"stale save     -> conflict, current head is {err.current[:12]}…")

fork_name, _ = store.fork(name, "mathlib")
print(f"fork           -> {fork_name}, history:")
for commit in store.history(fork_name):
    origin = f" (forked from {commit.forked_from[0]})" if commit.forked_from else ""
    print(f"   {commit.name:<12} {commit.blob[:12]}…{origin}")

print("pinned load    ->", store.load(name, version=v1)[0].strip())

print()
print("include resolution during consult:")
ws = Workspace()
terms, _ = parse_program(":- include(mathlib).\nboth(X, D, T) :- double(X, D), triple(X, T).\n", ws.ops)
errors = consult(terms, ws, include_resolver=store.resolve_include)
assert not errors, errors
goal, vn = parse_query("both(7, D, T)", ws)
(sol,), _ = solve(ws, goal, var_names=vn).next(1)
print("   both(7, D, T) ->", ", ".join(f"{n}={writeq_text(t)}" for n, t in sol.bindings))
