"""Independent oracles the test suite checks the implementation against.

Nothing in here may import the code paths it is used to verify: the SHA-1
follows FIPS 180-1 directly, the queens count is a brute-force permutation
filter, and the reference interpreter is a tiny substitution-based solver
that shares no code with the engine.
"""

from __future__ import annotations

import itertools
import struct


# ---------------------------------------------------------------------------
# SHA-1 (FIPS 180-1), minimal and slow


def sha1_reference(data: bytes) -> str:
    h0, h1, h2, h3, h4 = 0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0

    def rol(value, amount):
        return ((value << amount) | (value >> (32 - amount))) & 0xFFFFFFFF

    message = bytearray(data)
    bit_length = len(data) * 8
    message.append(0x80)
    while len(message) % 64 != 56:
        message.append(0)
    message += struct.pack(">Q", bit_length)

    for offset in range(0, len(message), 64):
        chunk = message[offset : offset + 64]
        w = list(struct.unpack(">16I", chunk))
        for i in range(16, 80):
            w.append(rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1))
        a, b, c, d, e = h0, h1, h2, h3, h4
        for i in range(80):
            if i < 20:
                f, k = (b & c) | ((~b) & d), 0x5A827999
            elif i < 40:
                f, k = b ^ c ^ d, 0x6ED9EBA1
            elif i < 60:
                f, k = (b & c) | (b & d) | (c & d), 0x8F1BBCDC
            else:
                f, k = b ^ c ^ d, 0xCA62C1D6
            a, b, c, d, e = (
                (rol(a, 5) + f + e + k + w[i]) & 0xFFFFFFFF,
                a,
                rol(b, 30),
                c,
                d,
            )
        h0 = (h0 + a) & 0xFFFFFFFF
        h1 = (h1 + b) & 0xFFFFFFFF
        h2 = (h2 + c) & 0xFFFFFFFF
        h3 = (h3 + d) & 0xFFFFFFFF
        h4 = (h4 + e) & 0xFFFFFFFF

    return "".join(f"{h:08x}" for h in (h0, h1, h2, h3, h4))


# ---------------------------------------------------------------------------
# N-queens by exhaustive permutation filtering


def queens_count_brute_force(n: int = 8) -> int:
    count = 0
    for perm in itertools.permutations(range(1, n + 1)):
        if all(
            abs(perm[i] - perm[j]) != j - i
            for i in range(n)
            for j in range(i + 1, n)
        ):
            count += 1
    return count


# ---------------------------------------------------------------------------
# Naive reference interpreter (pure clauses, no cut, no builtins).
#
# Terms: ("var", name) | ("atom", name) | ("int", n) | ("comp", name, args)


def walk(t, subst):
    while t[0] == "var" and t[1] in subst:
        t = subst[t[1]]
    return t


def resolve(t, subst):
    t = walk(t, subst)
    if t[0] == "comp":
        return ("comp", t[1], tuple(resolve(a, subst) for a in t[2]))
    return t


def unify_naive(a, b, subst):
    a = walk(a, subst)
    b = walk(b, subst)
    if a == b:
        return subst
    if a[0] == "var":
        out = dict(subst)
        out[a[1]] = b
        return out
    if b[0] == "var":
        out = dict(subst)
        out[b[1]] = a
        return out
    if a[0] == "comp" and b[0] == "comp" and a[1] == b[1] and len(a[2]) == len(b[2]):
        for x, y in zip(a[2], b[2]):
            subst = unify_naive(x, y, subst)
            if subst is None:
                return None
        return subst
    return None


def _rename(t, mapping, counter):
    if t[0] == "var":
        if t[1] not in mapping:
            mapping[t[1]] = ("var", f"_R{counter[0]}")
            counter[0] += 1
        return mapping[t[1]]
    if t[0] == "comp":
        return ("comp", t[1], tuple(_rename(a, mapping, counter) for a in t[2]))
    return t


def solve_reference(program, goals, max_solutions=10000, max_depth=400):
    """Depth-first, left-to-right, clause-order solutions of `goals`.
    program: list of (head, [body goals]).  Yields substitutions."""
    counter = [0]
    out = []

    def step(goals, subst, depth):
        if len(out) >= max_solutions:
            return
        if depth > max_depth:
            raise RecursionError("reference interpreter depth exceeded")
        if not goals:
            out.append(subst)
            return
        first, rest = goals[0], goals[1:]
        for head, body in program:
            mapping = {}
            head2 = _rename(head, mapping, counter)
            body2 = [_rename(g, mapping, counter) for g in body]
            s2 = unify_naive(first, head2, subst)
            if s2 is not None:
                step(body2 + list(rest), s2, depth + 1)

    step(list(goals), {}, 0)
    return out


def term_to_tuple(t):
    """Convert an engine term into the reference representation."""
    from logicdesk.terms import Atom, Compound, Int, Var, deref

    t = deref(t)
    if isinstance(t, Var):
        return ("var", f"_V{t.id}")
    if isinstance(t, Atom):
        return ("atom", t.name)
    if isinstance(t, Int):
        return ("int", t.value)
    if isinstance(t, Compound):
        return ("comp", t.name, tuple(term_to_tuple(a) for a in t.args))
    raise TypeError(f"unsupported term for reference interpreter: {t!r}")
