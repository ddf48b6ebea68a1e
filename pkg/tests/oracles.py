"""Naive reference implementations used only by the tests.

Each oracle is written independently of the code it checks: nested loops
instead of grouping, arbitrary precision instead of floats, exhaustive
enumeration instead of greedy iteration.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

from mpmath import mp, mpf
from mpmath import log as mp_log

mp.dps = 60


def canon(text: str) -> str:
    import unicodedata

    return unicodedata.normalize("NFC", " ".join(unicodedata.normalize("NFC", text).split()).casefold())


# --- relational algebra -------------------------------------------------------


def brute_project(tuples, key_field, key, out_fields):
    out = set()
    for t in tuples:
        if getattr(t, key_field) == key:
            out.add(tuple(getattr(t, f) for f in out_fields))
    return out


def brute_select(tuples, owner_field):
    out = set()
    for x in tuples:
        for y in tuples:
            a, b = getattr(x, owner_field), getattr(y, owner_field)
            if a != b and canon(x.value) == canon(y.value):
                out.add((min(a, b), max(a, b)))
    return out


def brute_difference(a, b):
    out = []
    for x in a:
        found = False
        for y in b:
            if x == y:
                found = True
        if not found and x not in out:
            out.append(x)
    return set(out)


def brute_union(a, b):
    out = []
    for x in list(a) + list(b):
        if x not in out:
            out.append(x)
    return set(out)


# --- similarity ---------------------------------------------------------------


def mp_aggregate(pairs) -> mpf:
    """Pooled log(1 + src) weighted mean in 60-digit arithmetic."""
    num = mpf(0)
    den = mpf(0)
    for s, src in pairs:
        w = mp_log(1 + mpf(src))
        num += mpf(s) * w
        den += w
    return num / den


def recursive_levenshtein(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def exact_lexical(a: str, b: str) -> Fraction:
    import re

    a, b = canon(a), canon(b)
    if a == b:
        return Fraction(1)
    ta, tb = set(re.findall(r"\w+", a)), set(re.findall(r"\w+", b))
    jac = Fraction(len(ta & tb), len(ta | tb)) if ta | tb else Fraction(0)
    edit = 1 - Fraction(recursive_levenshtein(a, b), max(len(a), len(b)))
    return min(Fraction(1), max(Fraction(0), (jac + edit) / 2))


# --- greedy matching ----------------------------------------------------------


def greedy_by_enumeration(source_ids, target_ids, score):
    """Greedy matching recovered as the lexicographic maximum over all injections.

    The greedy rule (each source in order takes its best free target, ties
    to the smallest target id) picks the assignment maximizing the sequence
    ``(s_1, -rank(t_1), s_2, -rank(t_2), ...)`` lexicographically.
    Returns ``{source: target or None}``.
    """
    srcs = sorted(source_ids)
    tgts = sorted(target_ids)
    k = min(len(srcs), len(tgts))
    best_key, best = None, None
    for perm in itertools.permutations(range(len(tgts)), k):
        key = []
        for i, j in enumerate(perm):
            key += [score(srcs[i], tgts[j]), -j]
        if best_key is None or key > best_key:
            best_key, best = key, perm
    result = {s: None for s in srcs}
    for i, j in enumerate(best or ()):
        result[srcs[i]] = tgts[j]
    return result


# --- random relations -----------------------------------------------------------

_VALUES = ["alpha", "Alpha", " alpha ", "beta", "BETA  ", "gamma", "delta"]


def random_property_tuples(rng, max_len=8):
    from ctxalign.relational import PropertyTriple

    n = rng.randint(0, max_len)
    return [
        PropertyTriple(f"e{rng.randint(0, 3)}", f"p{rng.randint(0, 3)}", rng.choice(_VALUES))
        for _ in range(n)
    ]


def random_descriptor_tuples(rng, kind, max_len=8):
    from ctxalign.relational import DescriptorTriple

    n = rng.randint(0, max_len)
    return [
        DescriptorTriple(f"p{rng.randint(0, 3)}", f"d{rng.randint(0, 4)}", rng.choice(_VALUES), kind, rng.randint(0, 3))
        for _ in range(n)
    ]
