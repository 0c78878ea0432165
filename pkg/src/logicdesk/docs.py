"""Documentation table for builtins and library predicates: one template
and one summary line per predicate, backing hover info and completion
templates."""

from __future__ import annotations

# (name, arity) -> (template, summary)
BUILTIN_DOCS: dict[tuple[str, int], tuple[str, str]] = {
    ("true", 0): ("true", "Always succeeds."),
    ("fail", 0): ("fail", "Always fails."),
    ("!", 0): ("!", "Cut: discard choice points created since the clause was entered."),
    (",", 2): ("','(:Goal1, :Goal2)", "Conjunction: Goal1 and then Goal2."),
    (";", 2): ("';'(:Goal1, :Goal2)", "Disjunction: Goal1 or Goal2."),
    ("->", 2): ("'->'(:Cond, :Then)", "If-then: commit to the first solution of Cond."),
    ("\\+", 1): ("\\+(:Goal)", "Negation as failure: true if Goal has no solution."),
    ("call", 1): ("call(:Goal)", "Call Goal as a goal."),
    ("call", 2): ("call(:Goal, ?A1)", "Call Goal with one extra argument."),
    ("call", 3): ("call(:Goal, ?A1, ?A2)", "Call Goal with two extra arguments."),
    ("call", 4): ("call(:Goal, ?A1, ?A2, ?A3)", "Call Goal with three extra arguments."),
    ("call", 5): ("call(:Goal, ?A1, ?A2, ?A3, ?A4)", "Call Goal with four extra arguments."),
    ("call", 6): ("call(:Goal, ?A1, ?A2, ?A3, ?A4, ?A5)", "Call Goal with five extra arguments."),
    ("call", 7): ("call(:Goal, ?A1, ?A2, ?A3, ?A4, ?A5, ?A6)", "Call Goal with six extra arguments."),
    ("call", 8): ("call(:Goal, ?A1, ?A2, ?A3, ?A4, ?A5, ?A6, ?A7)", "Call Goal with seven extra arguments."),
    ("=", 2): ("=(?Term1, ?Term2)", "Unify Term1 with Term2."),
    ("\\=", 2): ("\\=(?Term1, ?Term2)", "True if Term1 and Term2 do not unify."),
    ("==", 2): ("==(?Term1, ?Term2)", "True if Term1 is structurally identical to Term2."),
    ("\\==", 2): ("\\==(?Term1, ?Term2)", "True if Term1 is not identical to Term2."),
    ("compare", 3): ("compare(?Order, ?Term1, ?Term2)", "Order is <, = or > in the standard order of terms."),
    ("var", 1): ("var(?Term)", "True if Term is an unbound variable."),
    ("nonvar", 1): ("nonvar(?Term)", "True if Term is not an unbound variable."),
    ("atom", 1): ("atom(?Term)", "True if Term is an atom."),
    ("number", 1): ("number(?Term)", "True if Term is an integer or float."),
    ("integer", 1): ("integer(?Term)", "True if Term is an integer."),
    ("atomic", 1): ("atomic(?Term)", "True if Term is an atom, number or string."),
    ("is_list", 1): ("is_list(?Term)", "True if Term is a proper list."),
    ("is", 2): ("is(-Number, +Expr)", "Number is the value of arithmetic expression Expr."),
    ("<", 2): ("<(+Expr1, +Expr2)", "Arithmetic less-than."),
    (">", 2): (">(+Expr1, +Expr2)", "Arithmetic greater-than."),
    ("=<", 2): ("=<(+Expr1, +Expr2)", "Arithmetic less-or-equal."),
    (">=", 2): (">=(+Expr1, +Expr2)", "Arithmetic greater-or-equal."),
    ("=:=", 2): ("=:=(+Expr1, +Expr2)", "Arithmetic equality."),
    ("=\\=", 2): ("=\\=(+Expr1, +Expr2)", "Arithmetic inequality."),
    ("functor", 3): ("functor(?Term, ?Name, ?Arity)", "Relate a term to its principal functor and arity."),
    ("arg", 3): ("arg(+N, +Term, ?Arg)", "Arg is the Nth argument of Term."),
    ("=..", 2): ("=..(?Term, ?List)", "Univ: Term decomposes into [Name|Args]."),
    ("copy_term", 2): ("copy_term(+In, -Out)", "Out is a copy of In with fresh variables."),
    ("between", 3): ("between(+Low, +High, ?X)", "X is an integer in Low..High; enumerates on backtracking."),
    ("length", 2): ("length(?List, ?Length)", "Length is the number of elements of List."),
    ("succ", 2): ("succ(?Int1, ?Int2)", "Int2 is Int1 + 1; both are non-negative integers."),
    ("plus", 3): ("plus(?Int1, ?Int2, ?Int3)", "Int3 is Int1 + Int2; any one argument may be unbound."),
    ("atom_length", 2): ("atom_length(+Atom, -Length)", "Length is the number of characters of Atom."),
    ("atom_codes", 2): ("atom_codes(?Atom, ?Codes)", "Convert between an atom and a list of character codes."),
    ("atom_chars", 2): ("atom_chars(?Atom, ?Chars)", "Convert between an atom and a list of one-char atoms."),
    ("number_codes", 2): ("number_codes(?Number, ?Codes)", "Convert between a number and its character codes."),
    ("sort", 2): ("sort(+List, -Sorted)", "Sort removing duplicates in the standard order of terms."),
    ("msort", 2): ("msort(+List, -Sorted)", "Sort keeping duplicates."),
    ("keysort", 2): ("keysort(+Pairs, -Sorted)", "Stable sort of Key-Value pairs by key."),
    ("findall", 3): ("findall(?Template, :Goal, -Bag)", "Bag holds a Template copy per solution of Goal."),
    ("forall", 2): ("forall(:Cond, :Action)", "True if Action succeeds for every solution of Cond."),
    ("aggregate_all", 3): ("aggregate_all(+Spec, :Goal, -Result)", "Aggregate solutions: count, bag(T) or set(T)."),
    ("count_solutions", 2): ("count_solutions(:Goal, -Count)", "Count is the number of solutions of Goal."),
    ("distinct", 1): ("distinct(:Goal)", "Solutions of Goal with duplicate bindings removed."),
    ("limit", 2): ("limit(+Count, :Goal)", "At most Count solutions of Goal."),
    ("order_by", 2): ("order_by(+Spec, :Goal)", "Solutions of Goal ordered by asc(V) or desc(V)."),
    ("time", 1): ("time(:Goal)", "Run Goal, reporting wall time and inferences."),
    ("assert", 1): ("assert(+Clause)", "Add Clause at the end of a dynamic predicate."),
    ("asserta", 1): ("asserta(+Clause)", "Add Clause at the start of a dynamic predicate."),
    ("assertz", 1): ("assertz(+Clause)", "Add Clause at the end of a dynamic predicate."),
    ("retract", 1): ("retract(+Clause)", "Remove the first clause that unifies with Clause."),
    ("write", 1): ("write(+Term)", "Write Term without quoting."),
    ("writeln", 1): ("writeln(+Term)", "Write Term followed by a newline."),
    ("print", 1): ("print(+Term)", "Write Term in quoted form."),
    ("writeq", 1): ("writeq(+Term)", "Write Term so that it can be read back."),
    ("nl", 0): ("nl", "Write a newline."),
    ("format", 1): ("format(+Format)", "Write a format string (~w, ~q, ~a, ~d, ~n, ...)."),
    ("format", 2): ("format(+Format, +Args)", "Write a format string with arguments."),
    ("read", 1): ("read(-Term)", "Read a term from the query's input prompt."),
}

LIBRARY_DOCS: dict[tuple[str, int], tuple[str, str]] = {
    ("append", 3): ("append(?List1, ?List2, ?List12)", "List12 is the concatenation of List1 and List2."),
    ("member", 2): ("member(?Elem, ?List)", "Elem is a member of List."),
    ("reverse", 2): ("reverse(?List, ?Reversed)", "Reversed has the elements of List in reverse order."),
    ("nth0", 3): ("nth0(?Index, ?List, ?Elem)", "Elem is the Index-th element of List, counting from 0."),
    ("nth1", 3): ("nth1(?Index, ?List, ?Elem)", "Elem is the Index-th element of List, counting from 1."),
    ("last", 2): ("last(?List, ?Elem)", "Elem is the last element of List."),
    ("maplist", 2): ("maplist(:Goal, ?List)", "Goal succeeds for every element of List."),
    ("maplist", 3): ("maplist(:Goal, ?List1, ?List2)", "Goal maps List1 onto List2 element-wise."),
    ("maplist", 4): ("maplist(:Goal, ?List1, ?List2, ?List3)", "Goal relates three lists element-wise."),
    ("select", 3): ("select(?Elem, ?List, ?Rest)", "Rest is List with one occurrence of Elem removed."),
    ("permutation", 2): ("permutation(?List, ?Perm)", "Perm is a permutation of List."),
}


def doc_for(name: str, arity: int) -> tuple[str, str, str] | None:
    """(origin, template, summary) for a builtin or library predicate."""
    entry = BUILTIN_DOCS.get((name, arity))
    if entry is not None:
        return ("builtin", entry[0], entry[1])
    entry = LIBRARY_DOCS.get((name, arity))
    if entry is not None:
        return ("library", entry[0], entry[1])
    return None


def templates(prefix: str = "") -> list[str]:
    """All templates whose predicate name starts with prefix, sorted by
    name then arity."""
    rows = []
    for (name, arity), (template, _) in {**BUILTIN_DOCS, **LIBRARY_DOCS}.items():
        if name.startswith(prefix):
            rows.append((name, arity, template))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [template for _, _, template in rows]
