/**
 * Token matching and re-synchronization.
 *
 * The server sends enriched tokens grouped per clause; the client matches
 * its own token stream against them by base kind and adopts the
 * enrichment where the kinds agree.  After an edit the streams drift:
 * resync() first tries the three single-token edits (insert, delete,
 * modify) at the mismatch, verifying with a fixed lookahead window, and
 * otherwise realigns at the next full stop with the following server
 * group.  If both fail the remainder is styled from base kinds only.
 */

import type { Token } from "./tokens.js";

export interface ServerToken {
  kind: string;
  len: number;
  class?: string;
  origin?: string;
}

export interface StyledToken {
  token: Token;
  cls?: string;
  origin?: string;
}

export interface MatchResult {
  styled: StyledToken[];
  resyncNeeded: boolean;
  mismatchIndex: number; // client token index of the first mismatch, or -1
}

/** Verification window for candidate alignments (an implementation
 * constant; large enough to make accidental matches unlikely). */
export const RESYNC_LOOKAHEAD = 10;

export function flattenGroups(groups: ServerToken[][]): ServerToken[] {
  return groups.flat();
}

function kindsMatch(client: Token, server: ServerToken): boolean {
  return client.kind === server.kind;
}

export function matchAndStyle(clientTokens: Token[], serverGroups: ServerToken[][]): MatchResult {
  const flat = flattenGroups(serverGroups);
  const styled: StyledToken[] = [];
  let mismatchIndex = -1;
  for (let i = 0; i < clientTokens.length; i++) {
    const server = flat[i];
    if (mismatchIndex < 0 && server !== undefined && kindsMatch(clientTokens[i], server)) {
      styled.push({ token: clientTokens[i], cls: server.class, origin: server.origin });
    } else {
      if (mismatchIndex < 0) mismatchIndex = i;
      styled.push({ token: clientTokens[i] }); // base styling only
    }
  }
  if (mismatchIndex < 0 && flat.length > clientTokens.length) {
    mismatchIndex = clientTokens.length; // server has tokens the client lacks
  }
  return { styled, resyncNeeded: mismatchIndex >= 0, mismatchIndex };
}

function verify(clientTokens: Token[], ci: number, flat: ServerToken[], si: number): boolean {
  for (let k = 0; k < RESYNC_LOOKAHEAD; k++) {
    const c = clientTokens[ci + k];
    const s = flat[si + k];
    if (c === undefined || s === undefined) return c === undefined && s === undefined;
    if (!kindsMatch(c, s)) return false;
  }
  return true;
}

export type Alignment =
  | { kind: "single_edit"; edit: "inserted" | "deleted" | "modified"; clientFrom: number; serverFrom: number }
  | { kind: "next_clause"; clientFrom: number; serverFrom: number }
  | { kind: "give_up" };

export function resync(
  clientTokens: Token[],
  serverGroups: ServerToken[][],
  mismatchIndex: number
): Alignment {
  const flat = flattenGroups(serverGroups);
  const m = mismatchIndex;
  // one token was inserted, deleted, or modified at the mismatch
  if (verify(clientTokens, m + 1, flat, m)) {
    return { kind: "single_edit", edit: "inserted", clientFrom: m + 1, serverFrom: m };
  }
  if (verify(clientTokens, m, flat, m + 1)) {
    return { kind: "single_edit", edit: "deleted", clientFrom: m, serverFrom: m + 1 };
  }
  if (verify(clientTokens, m + 1, flat, m + 1)) {
    return { kind: "single_edit", edit: "modified", clientFrom: m + 1, serverFrom: m + 1 };
  }
  // realign after the next full stop with the next server group
  let clientFrom = -1;
  for (let i = m; i < clientTokens.length; i++) {
    if (clientTokens[i].kind === "fullstop") {
      clientFrom = i + 1;
      break;
    }
  }
  if (clientFrom >= 0) {
    let seen = 0;
    for (let g = 0; g < serverGroups.length; g++) {
      seen += serverGroups[g].length;
      if (seen > m) {
        const serverFrom = seen; // start of group g+1 in the flat stream
        if (verify(clientTokens, clientFrom, flat, serverFrom)) {
          return { kind: "next_clause", clientFrom, serverFrom };
        }
        break;
      }
    }
  }
  return { kind: "give_up" };
}

/**
 * Full client-side pipeline: match, then re-style the tail using the
 * alignment resync found.  Tokens in the edited region keep base
 * styling; a give_up leaves everything after the mismatch plain until
 * fresh server tokens arrive.
 */
export function styleWithResync(
  clientTokens: Token[],
  serverGroups: ServerToken[][]
): { styled: StyledToken[]; alignment: Alignment | null; resyncNeeded: boolean } {
  const result = matchAndStyle(clientTokens, serverGroups);
  if (!result.resyncNeeded) {
    return { styled: result.styled, alignment: null, resyncNeeded: false };
  }
  const alignment = resync(clientTokens, serverGroups, result.mismatchIndex);
  if (alignment.kind === "give_up") {
    return { styled: result.styled, alignment, resyncNeeded: true };
  }
  const flat = flattenGroups(serverGroups);
  const styled = result.styled.slice();
  let si = alignment.serverFrom;
  for (let ci = alignment.clientFrom; ci < clientTokens.length && si < flat.length; ci++, si++) {
    if (kindsMatch(clientTokens[ci], flat[si])) {
      styled[ci] = { token: clientTokens[ci], cls: flat[si].class, origin: flat[si].origin };
    } else {
      break; // drifted again; stay plain from here
    }
  }
  return { styled, alignment, resyncNeeded: true };
}
