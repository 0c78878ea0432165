"""The full HTTP protocol: create an engine, ask, pull events, continue.

Starts a real server on localhost (needs the 'server' extra for uvicorn:
pip install logicdesk[server]) and drives it with stdlib urllib only, the
same way any client would.
"""

import json
import threading
import time
import urllib.request

import uvicorn

from logicdesk.engine import Budget
from logicdesk.server import create_app
from logicdesk.sessions import ServerConfig

PORT = 8123
BASE = f"http://127.0.0.1:{PORT}"

PROGRAM = """/** <examples>
?- append([one], [two,three], List).
*/
:- use_rendering(chess).

queens(Qs) :- place([1,2,3,4], [], Qs).
place([], Acc, Acc).
place(Unplaced, Acc, Qs) :-
    select(Q, Unplaced, Rest),
    no_attack(Q, Acc, 1),
    place(Rest, [Q|Acc], Qs).
no_attack(_, [], _).
no_attack(Q, [P|Ps], D) :-
    Q =\\= P + D, Q =\\= P - D,
    D1 is D + 1,
    no_attack(Q, Ps, D1).
"""


def call(method, path, payload=None, params=""):
    url = BASE + path + params
    data = json.dumps(payload).encode() if payload is not None else None
    req = urllib.request.Request(url, data=data, method=method)
    if data:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as resp:
            body = resp.read().decode()
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read().decode() or "{}")
    return 200, json.loads(body) if body.startswith(("{", "[")) else body


config = ServerConfig(destroy_grace=2.0, budget=Budget(wall_time_limit=10.0))
app = create_app(config)
server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=PORT, log_level="warning"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.02)
print(f"server up at {BASE}")

# one engine per query: create, ask once, pull answers in chunks
_, created = call("POST", "/api/pengine/create", {"src": PROGRAM})
engine = created["id"]
print("engine:", engine)

_, _ = call("POST", f"/api/pengine/{engine}/ask", {"query": "queens(Qs)", "chunk": 1})
done = False
asked_more = False
while not done:
    _, events = call("GET", f"/api/pengine/{engine}/events", params="?timeout=2")
    for event in events["events"]:
        kind = event["kind"]
        if kind == "success":
            for solution in event["solutions"]:
                for binding in solution["bindings"]:
                    offers = [r["renderer"] for r in binding["renderings"]]
                    text = binding["renderings"][-1]["payload"]
                    print(f"  {binding['name']} = {text}   (renderings: {', '.join(offers)})")
            if event["more"] and not asked_more:
                asked_more = True
                print("  … asking for the next 10")
                call("POST", f"/api/pengine/{engine}/next", {"count": 10})
            elif event["more"]:
                call("POST", f"/api/pengine/{engine}/stop")
            else:
                done = True
        elif kind in ("stopped", "aborted", "failure"):
            print(" ", kind)
            done = True
        elif kind == "error":
            print("  error:", event["error"])
            done = True

# the store and highlight APIs ride on the same server
_, saved = call("POST", "/api/store", {"content": PROGRAM})
print("saved program as", saved["name"])
_, meta = call("GET", f"/api/store/{saved['name']}", params="?format=json")
print("examples menu entries:", meta["examples"])

_, tokens = call("POST", "/api/highlight/tour-doc", {"text": "go :- queens(Q)."})
print("token groups:", len(tokens["groups"]), "generation:", tokens["generation"])

server.should_exit = True
time.sleep(0.2)
print("done")
