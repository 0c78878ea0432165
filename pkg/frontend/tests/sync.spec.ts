import { describe, expect, it } from "vitest";

import { matchAndStyle, resync, styleWithResync, type ServerToken } from "../src/sync.js";
import { tokenize, type Token } from "../src/tokens.js";

/** Build server groups the way the server would: tokenize, split at full
 * stops, and attach synthetic enrichment by base kind. */
function serverGroupsFor(text: string): ServerToken[][] {
  const groups: ServerToken[][] = [];
  let current: ServerToken[] = [];
  for (const tok of tokenize(text)) {
    current.push(enrich(tok));
    if (tok.kind === "fullstop") {
      groups.push(current);
      current = [];
    }
  }
  if (current.length) groups.push(current);
  return groups;
}

function enrich(tok: Token): ServerToken {
  const out: ServerToken = { kind: tok.kind, len: tok.end - tok.start };
  if (tok.kind === "atom" || tok.kind === "functor") {
    out.class = "goal_local";
    out.origin = "local";
  } else if (tok.kind === "var") {
    out.class = "var_normal";
  }
  return out;
}

describe("matchAndStyle", () => {
  it("adopts enrichment when every kind matches", () => {
    const text = "p(X) :- q(X).";
    const result = matchAndStyle(tokenize(text), serverGroupsFor(text));
    expect(result.resyncNeeded).toBe(false);
    const p = result.styled[0];
    expect(p.cls).toBe("goal_local");
  });

  it("falls back from the first mismatch", () => {
    const old = "p(X) :- q(X).";
    const now = "p(9) :- q(X)."; // var became integer
    const result = matchAndStyle(tokenize(now), serverGroupsFor(old));
    expect(result.resyncNeeded).toBe(true);
    const mismatch = result.mismatchIndex;
    expect(tokenize(now)[mismatch].text).toBe("9");
    for (const styled of result.styled.slice(mismatch)) {
      expect(styled.cls).toBeUndefined();
    }
  });

  it("never styles a token with enrichment of a mismatched kind", () => {
    const old = "alpha(X). beta(Y).";
    const now = "alpha(X). 'beta'(Y)."; // atom became quoted_atom
    const { styled } = styleWithResync(tokenize(now), serverGroupsFor(old));
    const flatServer = serverGroupsFor(old).flat();
    styled.forEach((s, i) => {
      if (s.cls !== undefined) {
        expect(flatServer.some((srv) => srv.kind === s.token.kind && srv.class === s.cls)).toBe(true);
      }
    });
  });
});

describe("resync on single-token edits", () => {
  const base = "p(Alpha) :- q(Alpha), r(Alpha, 42). s(B) :- p(B). t(0).";

  interface Edit {
    name: string;
    apply: (tokens: Token[], text: string) => string | null;
  }

  const edits: Edit[] = [
    {
      name: "delete one token",
      apply(tokens, text) {
        const candidates = tokens.filter((t) => t.kind !== "fullstop");
        const target = candidates[candidates.length % candidates.length];
        return text.slice(0, target.start) + text.slice(target.end);
      },
    },
    {
      name: "insert one token",
      apply(tokens, text) {
        const target = tokens[tokens.length >> 1];
        return text.slice(0, target.start) + "zz " + text.slice(target.start);
      },
    },
    {
      name: "modify one token",
      apply(tokens, text) {
        const target = tokens.find((t) => t.kind === "integer") ?? tokens[0];
        return text.slice(0, target.start) + "777" + text.slice(target.end);
      },
    },
  ];

  it("realigns 100 generated single-token edits without a server round trip", () => {
    const groups = serverGroupsFor(base);
    const tokens = tokenize(base);
    let realigned = 0;
    for (let i = 0; i < 100; i++) {
      const kind = i % 3;
      let edited: string;
      if (kind === 0) {
        // delete the i-th deletable token
        const candidates = tokens.filter((t) => t.kind !== "fullstop");
        const target = candidates[i % candidates.length];
        edited = base.slice(0, target.start) + base.slice(target.end);
      } else if (kind === 1) {
        // insert an atom before the i-th token
        const target = tokens[i % tokens.length];
        edited = base.slice(0, target.start) + "zz " + base.slice(target.start);
      } else {
        // replace the i-th token with a different token of another kind
        const target = tokens[i % tokens.length];
        edited = base.slice(0, target.start) + "777" + base.slice(target.end);
      }
      const clientTokens = tokenize(edited);
      const match = matchAndStyle(clientTokens, groups);
      if (!match.resyncNeeded) continue; // edit was invisible to kinds
      const alignment = resync(clientTokens, groups, match.mismatchIndex);
      expect(alignment.kind).not.toBe("give_up");
      realigned++;
      const { styled } = styleWithResync(clientTokens, groups);
      // enrichment is only ever copied onto a matching base kind
      for (const s of styled) {
        if (s.cls === "goal_local") expect(["atom", "functor"]).toContain(s.token.kind);
        if (s.cls === "var_normal") expect(s.token.kind).toBe("var");
      }
      // everything well past the edit point is enriched again
      const tail = styled.slice(match.mismatchIndex + 2);
      const enrichable = tail.filter(
        (s) => s.token.kind === "atom" || s.token.kind === "functor" || s.token.kind === "var"
      );
      if (alignment.kind === "single_edit") {
        expect(enrichable.length === 0 || enrichable.some((s) => s.cls !== undefined)).toBe(true);
      }
    }
    expect(realigned).toBeGreaterThan(50);
  });

  it("resumes at the next full stop after a multi-token rewrite", () => {
    const old = "p(Alpha) :- q(Alpha). s(B) :- p(B). t(0).";
    const now = "p(1, 2, 3, wholly, different). s(B) :- p(B). t(0).";
    const clientTokens = tokenize(now);
    const groups = serverGroupsFor(old);
    const match = matchAndStyle(clientTokens, groups);
    expect(match.resyncNeeded).toBe(true);
    const alignment = resync(clientTokens, groups, match.mismatchIndex);
    expect(alignment.kind).toBe("next_clause");
    if (alignment.kind === "next_clause") {
      // realigned exactly at the token after the rewritten clause's stop
      const stop = clientTokens.findIndex(
        (t, i) => i >= match.mismatchIndex && t.kind === "fullstop"
      );
      expect(alignment.clientFrom).toBe(stop + 1);
      const { styled } = styleWithResync(clientTokens, groups);
      const sAtom = styled.find((s, i) => i >= alignment.clientFrom && s.token.text === "s");
      expect(sAtom?.cls).toBe("goal_local");
    }
  });

  it("gives up on a garbage region with no full stop", () => {
    const old = "p(X) :- q(X). r(1).";
    const now = "p(X) :- @#` garbage without stop";
    const clientTokens = tokenize(now);
    const groups = serverGroupsFor(old);
    const match = matchAndStyle(clientTokens, groups);
    const alignment = resync(clientTokens, groups, match.mismatchIndex);
    expect(alignment.kind).toBe("give_up");
    const { styled } = styleWithResync(clientTokens, groups);
    for (const s of styled.slice(match.mismatchIndex)) {
      expect(s.cls).toBeUndefined();
    }
  });
});
