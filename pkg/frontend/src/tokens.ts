/**
 * Client-side tokenizer, a faithful mirror of the server's token grammar.
 *
 * The server returns enriched tokens as kinds + lengths only; this
 * tokenizer produces the stream they are matched against, so the two
 * implementations must agree token for token (a golden-file test pins
 * that against server output).
 */

export type TokenKind =
  | "atom"
  | "quoted_atom"
  | "var"
  | "anon_var"
  | "integer"
  | "float"
  | "string"
  | "punct"
  | "functor"
  | "operator"
  | "comment_line"
  | "comment_block"
  | "fullstop"
  | "error";

export interface Token {
  kind: TokenKind;
  text: string;
  start: number;
  end: number;
}

const SYMBOL_CHARS = new Set("#$&*+-./:<=>?@^~\\");
const PUNCT = new Set("()[]{},|");

const CHAR_ESCAPES: Record<string, string> = {
  n: "\n",
  t: "\t",
  r: "\r",
  a: "\x07",
  b: "\b",
  f: "\f",
  v: "\x0B",
  "0": "\0",
  "\\": "\\",
  "'": "'",
  '"': '"',
  "`": "`",
};

const isSpace = (c: string) => /\s/.test(c);
const isDigit = (c: string) => c >= "0" && c <= "9";
const isAlpha = (c: string) => /[A-Za-z]/.test(c);
const isAlnum = (c: string) => isAlpha(c) || isDigit(c);
const isUpper = (c: string) => c >= "A" && c <= "Z";

export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  const n = text.length;
  let pos = 0;
  const push = (kind: TokenKind, start: number, end: number) => {
    tokens.push({ kind, text: text.slice(start, end), start, end });
    pos = end;
  };

  while (pos < n) {
    const c = text[pos];
    if (isSpace(c)) {
      pos += 1;
      continue;
    }
    if (c === "%") {
      let end = text.indexOf("\n", pos);
      if (end < 0) end = n;
      push("comment_line", pos, end);
      continue;
    }
    if (c === "/" && text[pos + 1] === "*") {
      const close = text.indexOf("*/", pos + 2);
      if (close < 0) push("error", pos, n);
      else push("comment_block", pos, close + 2);
      continue;
    }
    if (c === "'" || c === '"') {
      scanQuoted(text, pos, c, tokens);
      pos = tokens[tokens.length - 1].end;
      continue;
    }
    if (isDigit(c)) {
      scanNumber(text, pos, tokens);
      pos = tokens[tokens.length - 1].end;
      continue;
    }
    if (isAlpha(c) || c === "_") {
      let end = pos + 1;
      while (end < n && (isAlnum(text[end]) || text[end] === "_")) end += 1;
      const word = text.slice(pos, end);
      if (c === "_" && word.length === 1) push("anon_var", pos, end);
      else if (c === "_" || isUpper(c)) push("var", pos, end);
      else push(end < n && text[end] === "(" ? "functor" : "atom", pos, end);
      continue;
    }
    if (PUNCT.has(c)) {
      push("punct", pos, pos + 1);
      continue;
    }
    if (c === "!" || c === ";") {
      push("atom", pos, pos + 1);
      continue;
    }
    if (SYMBOL_CHARS.has(c)) {
      let end = pos + 1;
      while (end < n && SYMBOL_CHARS.has(text[end])) {
        if (text[end] === "/" && text[end + 1] === "*") break; // comment wins
        end += 1;
      }
      const run = text.slice(pos, end);
      if (run === "." && (end >= n || isSpace(text[end]) || text[end] === "%")) {
        push("fullstop", pos, end);
      } else {
        push("operator", pos, end);
      }
      continue;
    }
    push("error", pos, pos + 1);
  }
  return tokens;
}

function scanQuoted(text: string, pos: number, quote: string, tokens: Token[]): void {
  const n = text.length;
  let i = pos + 1;
  while (i < n) {
    const c = text[i];
    if (c === quote) {
      if (text[i + 1] === quote) {
        i += 2; // doubled quote
        continue;
      }
      tokens.push({
        kind: quote === "'" ? "quoted_atom" : "string",
        text: text.slice(pos, i + 1),
        start: pos,
        end: i + 1,
      });
      return;
    }
    if (c === "\\" && i + 1 < n) {
      i += 2;
      continue;
    }
    i += 1;
  }
  tokens.push({ kind: "error", text: text.slice(pos), start: pos, end: n });
}

function scanNumber(text: string, pos: number, tokens: Token[]): void {
  const n = text.length;
  if (text[pos] === "0" && text[pos + 1] === "'") {
    scanCharCode(text, pos, tokens);
    return;
  }
  let end = pos;
  while (end < n && isDigit(text[end])) end += 1;
  let isFloat = false;
  if (end + 1 < n && text[end] === "." && isDigit(text[end + 1])) {
    isFloat = true;
    end += 1;
    while (end < n && isDigit(text[end])) end += 1;
  }
  if (end < n && (text[end] === "e" || text[end] === "E")) {
    let j = end + 1;
    if (j < n && (text[j] === "+" || text[j] === "-")) j += 1;
    if (j < n && isDigit(text[j])) {
      isFloat = true;
      end = j;
      while (end < n && isDigit(text[end])) end += 1;
    }
  }
  tokens.push({
    kind: isFloat ? "float" : "integer",
    text: text.slice(pos, end),
    start: pos,
    end,
  });
}

function scanCharCode(text: string, pos: number, tokens: Token[]): void {
  const n = text.length;
  const i = pos + 2;
  if (i >= n) {
    tokens.push({ kind: "error", text: text.slice(pos), start: pos, end: n });
    return;
  }
  const c = text[i];
  let end: number;
  if (c === "\\" && i + 1 < n) end = i + 2;
  else if (c === "'") end = text[i + 1] === "'" ? i + 2 : i + 1;
  else end = i + 1;
  tokens.push({ kind: "integer", text: text.slice(pos, end), start: pos, end });
}

/** Cooked value of a quoted atom or string token (escapes resolved). */
export function quotedValue(token: Token): string {
  const quote = token.text[0];
  const body = token.text.slice(1, -1);
  let out = "";
  let i = 0;
  while (i < body.length) {
    const c = body[i];
    if (c === quote && body[i + 1] === quote) {
      out += quote;
      i += 2;
    } else if (c === "\\" && i + 1 < body.length) {
      const next = body[i + 1];
      if (next === "\n") {
        i += 2; // line continuation
      } else {
        out += CHAR_ESCAPES[next] ?? next;
        i += 2;
      }
    } else {
      out += c;
      i += 1;
    }
  }
  return out;
}
