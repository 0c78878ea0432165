/**
 * Query-editor menus: Examples (from the stored program), History (this
 * browser session's queries), and Solutions (meta-call wrappers).
 */

import { tokenize } from "./tokens.js";

export type Modifier =
  | { kind: "count_all" }
  | { kind: "distinct" }
  | { kind: "time" }
  | { kind: "debug" }
  | { kind: "limit"; count: number }
  | { kind: "order_by"; variable: string; direction: "asc" | "desc" };

export interface WrappedQuery {
  query: string;
  debug: boolean;
}

/** Embed a query in the meta-goal for the chosen Solutions entry. */
export function wrapQuery(query: string, modifier: Modifier): WrappedQuery {
  const q = query.trim().replace(/\.$/, "");
  switch (modifier.kind) {
    case "count_all":
      return { query: `count_solutions((${q}), Count)`, debug: false };
    case "distinct":
      return { query: `distinct((${q}))`, debug: false };
    case "time":
      return { query: `time((${q}))`, debug: false };
    case "debug":
      return { query: q, debug: true };
    case "limit":
      return { query: `limit(${modifier.count}, (${q}))`, debug: false };
    case "order_by":
      return {
        query: `order_by(${modifier.direction}(${modifier.variable}), (${q}))`,
        debug: false,
      };
  }
}

/** Variable names a query mentions, for the order_by submenu. */
export function queryVariables(query: string): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const tok of tokenize(query)) {
    if (tok.kind === "var" && !tok.text.startsWith("_") && !seen.has(tok.text)) {
      seen.add(tok.text);
      out.push(tok.text);
    }
  }
  return out;
}

/** Session-local query history, most recent first, deduplicated. */
export class QueryHistory {
  private entries: string[] = [];

  constructor(readonly limit = 50) {}

  push(query: string): void {
    const q = query.trim();
    if (!q) return;
    this.entries = [q, ...this.entries.filter((e) => e !== q)].slice(0, this.limit);
  }

  list(): readonly string[] {
    return this.entries;
  }
}
