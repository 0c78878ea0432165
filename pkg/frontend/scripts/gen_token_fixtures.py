"""Regenerate tests/fixtures/tokens.json from the server tokenizer.

The client tokenizer must agree with the server token for token; this
writes the golden file the vitest suite checks against.

    python scripts/gen_token_fixtures.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2] / "src"))

from logicdesk.reader import tokenize  # noqa: E402

CORPUS = [
    "foo(X). % c",
    "'it''s'",
    "X-Y",
    "append([one], [two,three], List).",
    "a :- b, c ; d -> e.",
    "queens(Qs) :- place([1,2,3,4,5,6,7,8], [], Qs).",
    "X is 1 + 2 * 3.5e2 - 0'a.",
    'say("hello world", \'Quoted Atom\').',
    "/* block\ncomment */ p(_Anon, _, Var).",
    ":- dynamic(counter/1).\ncounter(0).",
    "bad @#` glyphs",
    "w :- \\+ member(X, [a|T]), X @< b.",
    "empty([]).  nested(f(g(h(1)))).",
    "op_test :- A = {curly}, B = 'a.b', C = \"str.\", format(\"~w~n\", [A-B-C]).",
    "0''' 0'\\n 12.5 7e2 1e+3",
    "a. /* unterminated",
    "'unterminated too",
    "x:-y.%eol",
    "deep([[[1],[2]],[[3]]]).",
    "ops :- X = (a , b), Y =.. [f|Args], Z == W, P \\== Q.",
]


def main() -> None:
    out = []
    for text in CORPUS:
        out.append(
            {
                "text": text,
                "tokens": [
                    {"kind": t.kind, "text": t.text, "start": t.start, "end": t.end}
                    for t in tokenize(text)
                ],
            }
        )
    target = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "tokens.json"
    target.write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {target} ({len(out)} cases)")


if __name__ == "__main__":
    main()
