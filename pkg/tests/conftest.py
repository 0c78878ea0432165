import pytest

from logicdesk.engine import Workspace, consult, parse_query, solve
from logicdesk.reader import parse_program
from logicdesk.writer import writeq_text


def load(src: str) -> Workspace:
    ws = Workspace()
    ws.set_source(src)
    terms, issues = parse_program(src, ws.ops)
    assert not issues, issues
    errors = consult(terms, ws, line_index=ws.line_index)
    assert not errors, errors
    return ws


def run(ws: Workspace, query: str, chunk: int = 1000, **kwargs):
    """All solutions (up to chunk) as lists of (name, writeq text) pairs."""
    goal, var_names = parse_query(query, ws)
    stream = solve(ws, goal, var_names=var_names, **kwargs)
    solutions, more = stream.next(chunk)
    rows = [[(n, writeq_text(t, ws.ops)) for n, t in s.bindings] for s in solutions]
    return rows, more


def solutions_of(ws: Workspace, query: str, **kwargs):
    rows, _more = run(ws, query, **kwargs)
    return rows


@pytest.fixture
def ws():
    return Workspace()
