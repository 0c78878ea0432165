"""Answer-term renderers.

Renderers inspect a term and either contribute a renderer-neutral markup
tree or abstain.  The "prolog" writeq rendering is always present and is
the fallback default.  Markup trees serialize to JSON as
{"tag": ..., "attrs": {...}, "children": [...]}, with plain strings as
text children.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ops import OperatorTable
from .terms import Atom, Compound, Int, Var, deref, is_proper_list, list_elements
from .writer import writeq_text

QUEEN = "♛"  # black chess queen


@dataclass
class Element:
    tag: str
    attrs: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    def to_json(self):
        return {
            "tag": self.tag,
            "attrs": dict(self.attrs),
            "children": [c.to_json() if isinstance(c, Element) else c for c in self.children],
        }


@dataclass
class Rendering:
    renderer: str
    payload: object  # Element tree or plain text
    is_default: bool = False

    def to_json(self):
        payload = self.payload.to_json() if isinstance(self.payload, Element) else self.payload
        return {"renderer": self.renderer, "default": self.is_default, "payload": payload}


def _int_list(t) -> list[int] | None:
    elems, tail = list_elements(t)
    if not (type(tail) is Atom and tail.name == "[]"):
        return None
    out = []
    for e in elems:
        e = deref(e)
        if type(e) is not Int:
            return None
        out.append(e.value)
    return out


def render_chess(t) -> Element | None:
    """A proper list of N integers in 1..N becomes an N-by-N board with a
    queen in column i, row t[i]; anything else abstains."""
    values = _int_list(t)
    if not values:
        return None
    n = len(values)
    if any(not 1 <= v <= n for v in values):
        return None
    board = Element("table", {"class": "chess-board", "data-n": n})
    for row in range(n, 0, -1):
        tr = Element("tr")
        for col in range(1, n + 1):
            shade = "light" if (row + col) % 2 == 0 else "dark"
            cell = Element("td", {"class": f"square {shade}"})
            if values[col - 1] == row:
                cell.attrs["data-col"] = col
                cell.attrs["data-row"] = row
                cell.children.append(QUEEN)
            tr.children.append(cell)
        board.children.append(tr)
    return board


def render_sudoku(t) -> Element | None:
    """9x9 list of lists of integers 1..9."""
    rows, tail = list_elements(t)
    if len(rows) != 9 or not (type(tail) is Atom and tail.name == "[]"):
        return None
    grid = []
    for row in rows:
        values = _int_list(row)
        if values is None or len(values) != 9 or any(not 1 <= v <= 9 for v in values):
            return None
        grid.append(values)
    table = Element("table", {"class": "sudoku-board"})
    for values in grid:
        tr = Element("tr")
        for v in values:
            tr.children.append(Element("td", {"class": "cell"}, [str(v)]))
        table.children.append(tr)
    return table


def _is_atomic_leaf(t) -> bool:
    return type(deref(t)) is not Compound


def render_parse_tree(t) -> Element | None:
    """Compound of depth >= 2 with atomic leaves, drawn as a nested tree."""
    t = deref(t)
    if type(t) is not Compound:
        return None
    if not any(type(deref(a)) is Compound for a in t.args):
        return None  # depth < 2
    ok, markup = _tree_node(t, 0)
    return markup if ok else None


def _tree_node(t, depth: int):
    t = deref(t)
    if type(t) is not Compound:
        if type(t) is Var:
            return False, None
        return True, Element("li", {"class": "leaf"}, [writeq_text(t)])
    if depth > 100:
        return False, None
    node = Element("li", {"class": "node"}, [Element("span", {"class": "label"}, [t.name])])
    kids = Element("ul", {"class": "children"})
    for a in t.args:
        ok, child = _tree_node(a, depth + 1)
        if not ok:
            return False, None
        kids.children.append(child)
    node.children.append(kids)
    return True, node


def _rows_of(t):
    """Rows for the per-term table renderer: a proper list of compounds
    sharing one functor/arity, or a list of equal-length lists."""
    rows, tail = list_elements(t)
    if len(rows) < 1 or not (type(tail) is Atom and tail.name == "[]"):
        return None
    first = deref(rows[0])
    if is_proper_list(first):
        width = len(list_elements(first)[0])
        if width == 0:
            return None
        out = []
        for r in rows:
            r = deref(r)
            if not is_proper_list(r):
                return None
            cells, _ = list_elements(r)
            if len(cells) != width:
                return None
            out.append(cells)
        return out
    if type(first) is Compound:
        name, arity = first.name, len(first.args)
        out = []
        for r in rows:
            r = deref(r)
            if type(r) is not Compound or r.name != name or len(r.args) != arity:
                return None
            out.append(list(r.args))
        return out
    return None


def make_term_table_renderer(ops: OperatorTable | None):
    def render(t):
        rows = _rows_of(t)
        if rows is None:
            return None
        table = Element("table", {"class": "term-table"})
        for cells in rows:
            tr = Element("tr")
            for cell in cells:
                tr.children.append(Element("td", {}, [writeq_text(cell, ops)]))
            table.children.append(tr)
        return table

    return render


RENDERER_NAMES = ("table", "chess", "sudoku", "parse_tree")


def _registry(ops):
    return {
        "chess": render_chess,
        "sudoku": render_sudoku,
        "parse_tree": render_parse_tree,
        "table": make_term_table_renderer(ops),
    }


def render_term(t, ws, var_names=None) -> list[Rendering]:
    """All applicable renderings in workspace order; the writeq "prolog"
    rendering is always last and is the default when nothing else matched."""
    registry = _registry(ws.ops)
    out: list[Rendering] = []
    for name in ws.renderers:
        renderer = registry.get(name)
        if renderer is None:
            continue
        markup = renderer(t)
        if markup is not None:
            out.append(Rendering(name, markup, is_default=not out))
    out.append(Rendering("prolog", writeq_text(t, ws.ops), is_default=not out))
    return out


def render_table(solutions, var_names: list[str] | None = None, ops=None) -> Element:
    """Answer-table mode: one column per query variable, one row per
    solution."""
    if var_names is None:
        var_names = [name for name, _ in solutions[0].bindings] if solutions else []
    table = Element("table", {"class": "answers"})
    header = Element("tr")
    for name in var_names:
        header.children.append(Element("th", {}, [name]))
    table.children.append(header)
    for sol in solutions:
        row = Element("tr")
        values = dict(sol.bindings)
        for name in var_names:
            value = values.get(name)
            row.children.append(Element("td", {}, [writeq_text(value, ops) if value is not None else ""]))
        table.children.append(row)
    return table
