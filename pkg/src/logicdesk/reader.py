"""Tokenizer and parser for the mini logic language.

Tokenization is total: unlexable characters become error tokens, and the
token spans tile the input exactly (tokens plus skipped whitespace
reproduce the source).  Parsing is operator-precedence driven by a
per-workspace operator table.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .ops import MAX_PRIORITY, OperatorTable
from .terms import Atom, Compound, Float, Int, Str, Var

SYMBOL_CHARS = frozenset("#$&*+-./:<=>?@^~\\")
_PUNCT = frozenset("()[]{},|")
_CLOSERS = frozenset(")]},|")

_CHAR_ESCAPES = {
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "a": "\a",
    "b": "\b",
    "f": "\f",
    "v": "\v",
    "0": "\0",
    "\\": "\\",
    "'": "'",
    '"': '"',
    "`": "`",
}


@dataclass
class Token:
    kind: str  # atom quoted_atom var anon_var integer float string punct
    #            functor operator comment_line comment_block fullstop error
    text: str
    start: int
    end: int
    value: object = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass
class ParsedTerm:
    term: object
    var_names: list  # (name, Var) pairs in first-occurrence order
    singletons: set  # names occurring exactly once, '_'-prefixed excluded
    span: tuple[int, int]  # whole term including the full stop
    token_indices: tuple[int, int]  # [first, last) range into the token list


@dataclass
class SyntaxIssue:
    position: int
    message: str
    kind: str = "syntax"  # or "unterminated"
    token_range: tuple[int, int] = (0, 0)


class ReadError(Exception):
    def __init__(self, position: int, message: str, unterminated: bool = False):
        self.position = position
        self.message = message
        self.unterminated = unterminated
        super().__init__(f"{message} at {position}")


COMMENT_KINDS = frozenset({"comment_line", "comment_block"})


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    n = len(text)
    pos = 0
    while pos < n:
        c = text[pos]
        if c.isspace():
            pos += 1
            continue
        if c == "%":
            end = text.find("\n", pos)
            end = n if end < 0 else end
            tokens.append(Token("comment_line", text[pos:end], pos, end))
            pos = end
            continue
        if c == "/" and pos + 1 < n and text[pos + 1] == "*":
            close = text.find("*/", pos + 2)
            if close < 0:
                tokens.append(Token("error", text[pos:], pos, n))
                pos = n
            else:
                end = close + 2
                tokens.append(Token("comment_block", text[pos:end], pos, end))
                pos = end
            continue
        if c == "'" or c == '"':
            tokens.append(_scan_quoted(text, pos, c))
            pos = tokens[-1].end
            continue
        if c.isdigit():
            tokens.append(_scan_number(text, pos))
            pos = tokens[-1].end
            continue
        if c.isalpha() or c == "_":
            end = pos + 1
            while end < n and (text[end].isalnum() or text[end] == "_"):
                end += 1
            word = text[pos:end]
            if c == "_" and len(word) == 1:
                tokens.append(Token("anon_var", word, pos, end, word))
            elif c == "_" or c.isupper():
                tokens.append(Token("var", word, pos, end, word))
            else:
                kind = "functor" if end < n and text[end] == "(" else "atom"
                tokens.append(Token(kind, word, pos, end, word))
            pos = end
            continue
        if c in _PUNCT:
            tokens.append(Token("punct", c, pos, pos + 1, c))
            pos += 1
            continue
        if c == "!" or c == ";":
            tokens.append(Token("atom", c, pos, pos + 1, c))
            pos += 1
            continue
        if c in SYMBOL_CHARS:
            end = pos + 1
            while end < n and text[end] in SYMBOL_CHARS:
                if text[end] == "/" and end + 1 < n and text[end + 1] == "*":
                    break  # a block comment interrupts a symbol run
                end += 1
            run = text[pos:end]
            if run == "." and (end >= n or text[end].isspace() or text[end] == "%"):
                tokens.append(Token("fullstop", ".", pos, end, "."))
            else:
                tokens.append(Token("operator", run, pos, end, run))
            pos = end
            continue
        tokens.append(Token("error", c, pos, pos + 1))
        pos += 1
    return tokens


def _scan_quoted(text: str, pos: int, quote: str) -> Token:
    n = len(text)
    i = pos + 1
    out: list[str] = []
    while i < n:
        c = text[i]
        if c == quote:
            if i + 1 < n and text[i + 1] == quote:  # doubled quote
                out.append(quote)
                i += 2
                continue
            end = i + 1
            kind = "quoted_atom" if quote == "'" else "string"
            return Token(kind, text[pos:end], pos, end, "".join(out))
        if c == "\\" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "\n":  # line continuation
                i += 2
                continue
            if nxt in _CHAR_ESCAPES:
                out.append(_CHAR_ESCAPES[nxt])
                i += 2
                continue
            out.append(nxt)
            i += 2
            continue
        out.append(c)
        i += 1
    return Token("error", text[pos:], pos, n)  # unterminated quoted material


def _scan_number(text: str, pos: int) -> Token:
    n = len(text)
    if text[pos] == "0" and pos + 1 < n and text[pos + 1] == "'":
        return _scan_char_code(text, pos)
    end = pos
    while end < n and text[end].isdigit():
        end += 1
    is_float = False
    if end + 1 < n and text[end] == "." and text[end + 1].isdigit():
        is_float = True
        end += 1
        while end < n and text[end].isdigit():
            end += 1
    if end < n and text[end] in "eE":
        j = end + 1
        if j < n and text[j] in "+-":
            j += 1
        if j < n and text[j].isdigit():
            is_float = True
            end = j
            while end < n and text[end].isdigit():
                end += 1
    lexeme = text[pos:end]
    if is_float:
        return Token("float", lexeme, pos, end, float(lexeme))
    return Token("integer", lexeme, pos, end, int(lexeme))


def _scan_char_code(text: str, pos: int) -> Token:
    n = len(text)
    i = pos + 2
    if i >= n:
        return Token("error", text[pos:], pos, n)
    c = text[i]
    if c == "\\" and i + 1 < n:
        nxt = text[i + 1]
        value = _CHAR_ESCAPES.get(nxt, nxt)
        end = i + 2
    elif c == "'":
        if i + 1 < n and text[i + 1] == "'":
            value = "'"
            end = i + 2
        else:
            value = "'"
            end = i + 1
    else:
        value = c
        end = i + 1
    return Token("integer", text[pos:end], pos, end, ord(value))


# ---------------------------------------------------------------------------
# Parsing


class _Parser:
    def __init__(self, tokens: list[Token], ops: OperatorTable, start: int):
        self.tokens = tokens
        self.ops = ops
        self.i = start
        self.varmap: dict[str, Var] = {}
        self.var_order: list[tuple[str, Var]] = []
        self.var_counts: dict[str, int] = {}

    def _skip_comments(self):
        while self.i < len(self.tokens) and self.tokens[self.i].kind in COMMENT_KINDS:
            self.i += 1

    def peek(self) -> Token | None:
        self._skip_comments()
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return None

    def next(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def _eof_position(self) -> int:
        if self.tokens:
            return self.tokens[-1].end
        return 0

    def fail(self, message: str, tok: Token | None = None):
        if tok is None:
            raise ReadError(self._eof_position(), message, unterminated=True)
        raise ReadError(tok.start, message)

    def make_var(self, tok: Token) -> Var:
        if tok.kind == "anon_var":
            return Var(None)
        name = tok.value
        v = self.varmap.get(name)
        if v is None:
            v = Var(name)
            self.varmap[name] = v
            self.var_order.append((name, v))
            self.var_counts[name] = 1
        else:
            self.var_counts[name] += 1
        return v

    # -- operator helpers

    def _as_op_name(self, tok: Token) -> str | None:
        # functor included: "a is(b)" applies the infix operator to a
        # parenthesized right operand
        if tok.kind in ("atom", "operator", "quoted_atom", "functor"):
            return tok.value
        return None

    def _can_start_term(self, tok: Token | None) -> bool:
        """Whether tok can begin a term.  Valid right after peek() returned
        tok, so self.i is its index."""
        if tok is None or tok.kind == "fullstop" or tok.kind == "error":
            return False
        if tok.kind == "punct" and tok.text in _CLOSERS:
            return False
        name = self._as_op_name(tok)
        if name is not None and self.ops.prefix(name) is None:
            # Pure infix/postfix operators cannot begin a term, unless they
            # open a compound like '=(' with no intervening whitespace.
            if self.ops.infix(name) or self.ops.postfix(name):
                j = self.i + 1
                nxt = self.tokens[j] if j < len(self.tokens) else None
                if not (
                    nxt is not None
                    and nxt.kind == "punct"
                    and nxt.text == "("
                    and nxt.start == tok.end
                ):
                    return False
        return True

    # -- grammar

    def parse(self, maxp: int) -> tuple[object, int]:
        left, lp = self.parse_primary(maxp)
        while True:
            tok = self.peek()
            if tok is None or tok.kind == "fullstop":
                break
            if tok.kind == "punct" and tok.text == ",":
                name = ","
                entry = (1000, "xfy")
            else:
                name = self._as_op_name(tok)
                if name is None:
                    break
                entry = self.ops.infix(name)
                if entry is None:
                    post = self.ops.postfix(name)
                    if post is None:
                        break
                    p, op_type = post
                    left_max = p if op_type == "yf" else p - 1
                    if p > maxp or lp > left_max:
                        break
                    self.next()
                    left = Compound(name, [left], pos=tok.start)
                    lp = p
                    continue
            p, op_type = entry
            left_max = p if op_type == "yfx" else p - 1
            right_max = p if op_type == "xfy" else p - 1
            if p > maxp or lp > left_max:
                break
            self.next()
            right, _ = self.parse(right_max)
            left = Compound(name, [left, right], pos=tok.start)
            lp = p
        return left, lp

    def parse_primary(self, maxp: int) -> tuple[object, int]:
        tok = self.next()
        if tok is None:
            self.fail("unexpected end of input, term expected")
        kind = tok.kind
        if kind == "integer":
            return Int(tok.value), 0
        if kind == "float":
            return Float(tok.value), 0
        if kind == "string":
            return Str(tok.value), 0
        if kind in ("var", "anon_var"):
            return self.make_var(tok), 0
        if kind == "punct":
            if tok.text == "(":
                term, _ = self.parse(MAX_PRIORITY)
                closer = self.next()
                if closer is None or closer.text != ")":
                    self.fail("expected ')'", closer)
                return term, 0
            if tok.text == "[":
                return self.parse_list(tok), 0
            if tok.text == "{":
                self.fail("curly-brace terms are not supported", tok)
            self.fail(f"unexpected {tok.text!r}", tok)
        if kind in ("atom", "quoted_atom", "functor", "operator"):
            return self.parse_atomic(tok, maxp)
        if kind == "error":
            self.fail("unexpected character", tok)
        self.fail(f"unexpected token {tok.text!r}", tok)

    def parse_atomic(self, tok: Token, maxp: int) -> tuple[object, int]:
        name = tok.value
        nxt = self.tokens[self.i] if self.i < len(self.tokens) else None
        # Compound term: functor immediately followed by '(' (no whitespace).
        if nxt is not None and nxt.kind == "punct" and nxt.text == "(" and nxt.start == tok.end:
            self.next()
            args = [self.parse(999)[0]]
            while True:
                sep = self.next()
                if sep is None:
                    self.fail("expected ',' or ')' in argument list", sep)
                if sep.kind == "punct" and sep.text == ",":
                    args.append(self.parse(999)[0])
                    continue
                if sep.kind == "punct" and sep.text == ")":
                    break
                self.fail("expected ',' or ')' in argument list", sep)
            return Compound(name, args, pos=tok.start), 0
        if tok.kind != "quoted_atom":
            prefix = self.ops.prefix(name)
            if prefix is not None:
                follower = self.peek()
                # Negative/positive numeric literal: sign directly before digits.
                if (
                    name in ("-", "+")
                    and follower is not None
                    and follower.kind in ("integer", "float")
                    and follower.start == tok.end
                ):
                    self.next()
                    value = follower.value if name == "+" else -follower.value
                    if follower.kind == "integer":
                        return Int(value), 0
                    return Float(value), 0
                if self._can_start_term(follower):
                    p, op_type = prefix
                    if p > maxp:
                        self.fail(f"operator priority clash on {name!r}", tok)
                    arg_max = p if op_type == "fy" else p - 1
                    arg, _ = self.parse(arg_max)
                    return Compound(name, [arg], pos=tok.start), p
        return Atom(name, pos=tok.start), 0

    def parse_list(self, open_tok: Token):
        tok = self.peek()
        if tok is not None and tok.kind == "punct" and tok.text == "]":
            self.next()
            return Atom("[]", pos=open_tok.start)
        items = [self.parse(999)[0]]
        tail = None
        while True:
            sep = self.next()
            if sep is None:
                self.fail("expected ',', '|' or ']' in list", sep)
            if sep.kind == "punct" and sep.text == ",":
                items.append(self.parse(999)[0])
                continue
            if sep.kind == "punct" and sep.text == "|":
                tail = self.parse(999)[0]
                closer = self.next()
                if closer is None or closer.text != "]":
                    self.fail("expected ']' after list tail", closer)
                break
            if sep.kind == "punct" and sep.text == "]":
                break
            self.fail("expected ',', '|' or ']' in list", sep)
        result = tail if tail is not None else Atom("[]")
        for item in reversed(items):
            result = Compound(".", [item, result], pos=open_tok.start)
        return result


def read_term(tokens: list[Token], ops: OperatorTable, start: int = 0) -> ParsedTerm:
    """Parse one term ending in a full stop, starting at token index
    `start` (which must not point at a comment)."""
    parser = _Parser(tokens, ops, start)
    first = parser.peek()
    if first is None:
        raise ReadError(parser._eof_position(), "no term before end of input", unterminated=True)
    first_index = parser.i
    term, _ = parser.parse(MAX_PRIORITY)
    stop = parser.next()
    if stop is None:
        raise ReadError(parser._eof_position(), "full stop expected", unterminated=True)
    if stop.kind != "fullstop":
        parser.fail("operator expected or missing full stop", stop)
    singletons = {
        name
        for name, count in parser.var_counts.items()
        if count == 1 and not name.startswith("_")
    }
    return ParsedTerm(
        term=term,
        var_names=parser.var_order,
        singletons=singletons,
        span=(first.start, stop.end),
        token_indices=(first_index, parser.i),
    )


def _apply_op_directive(term, ops: OperatorTable, owned: bool) -> tuple[OperatorTable, bool]:
    """If term is ':- op(P, T, N)' with a valid definition, apply it to a
    private copy of the table so later terms in the same text parse with it."""
    if not (isinstance(term, Compound) and term.name == ":-" and len(term.args) == 1):
        return ops, owned
    d = term.args[0]
    if not (isinstance(d, Compound) and d.name == "op" and len(d.args) == 3):
        return ops, owned
    p, t, n = d.args
    if isinstance(p, Int) and isinstance(t, Atom) and isinstance(n, Atom):
        try:
            if not owned:
                ops = ops.copy()
                owned = True
            ops.add(p.value, t.name, n.name)
        except ValueError:
            pass  # rejected definitions are reported at consult time
    return ops, owned


def parse_tokens(
    tokens: list[Token], ops: OperatorTable | None = None
) -> tuple[list[ParsedTerm], list[SyntaxIssue]]:
    ops = ops or OperatorTable.default()
    owned = False
    terms: list[ParsedTerm] = []
    issues: list[SyntaxIssue] = []
    i = 0
    n = len(tokens)
    while True:
        while i < n and tokens[i].kind in COMMENT_KINDS:
            i += 1
        if i >= n:
            break
        try:
            parsed = read_term(tokens, ops, i)
        except ReadError as err:
            start = i
            while i < n and tokens[i].kind != "fullstop":
                i += 1
            i = min(i + 1, n)
            issues.append(
                SyntaxIssue(
                    position=err.position,
                    message=err.message,
                    kind="unterminated" if err.unterminated else "syntax",
                    token_range=(start, i),
                )
            )
            if err.unterminated:
                break
            continue
        terms.append(parsed)
        i = parsed.token_indices[1]
        ops, owned = _apply_op_directive(parsed.term, ops, owned)
    return terms, issues


def parse_program(
    text: str, ops: OperatorTable | None = None
) -> tuple[list[ParsedTerm], list[SyntaxIssue]]:
    """Parse a whole source text term-by-term, collecting syntax errors and
    resuming after the offending full stop."""
    return parse_tokens(tokenize(text), ops)


# ---------------------------------------------------------------------------
# Example queries embedded in structured comments

EXAMPLES_MARKER = "<examples>"


def extract_examples(text: str) -> list[str]:
    """Query strings from block comments whose body starts with the
    '<examples>' marker: each '?- Goal.' contributes the goal's source text."""
    results: list[str] = []
    for tok in tokenize(text):
        if tok.kind != "comment_block":
            continue
        body = tok.text[2:-2]  # strip '/*' and '*/'
        stripped = body.lstrip(" \t\r\n*")
        if not stripped.startswith(EXAMPLES_MARKER):
            continue
        content = stripped[len(EXAMPLES_MARKER):]
        inner = tokenize(content)
        idx = 0
        while idx < len(inner):
            t = inner[idx]
            if t.kind == "operator" and t.text == "?-":
                end_idx = idx + 1
                while end_idx < len(inner) and inner[end_idx].kind != "fullstop":
                    end_idx += 1
                if end_idx >= len(inner):
                    break  # malformed: no terminating full stop
                query_text = content[t.end : inner[end_idx].start].strip()
                if query_text:
                    results.append(query_text)
                idx = end_idx + 1
            else:
                idx += 1
    return results


# ---------------------------------------------------------------------------
# Source layout helpers


def build_line_index(text: str) -> list[int]:
    """Offsets of line starts; line numbers are 1-based."""
    starts = [0]
    for i, c in enumerate(text):
        if c == "\n":
            starts.append(i + 1)
    return starts


def offset_to_line(line_index: list[int], offset: int) -> int:
    return bisect_right(line_index, offset)
