"""Slow, obviously-correct reference computations used as test oracles.

Nothing here shares code with the package beyond plain data types.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter


def span_set(cols, p: int, m: int) -> set[tuple[int, ...]]:
    """Every vector in the column span, by enumerating all coefficient choices."""
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(cols)):
        v = [0] * m
        for c, col in zip(coeffs, cols):
            for i in range(m):
                v[i] = (v[i] + c * col[i]) % p
        out.add(tuple(v))
    return out


def dim_of(vectors: set, p: int) -> int:
    return round(math.log(len(vectors), p))


def brute_rank(cols, p: int, m: int) -> int:
    return dim_of(span_set(cols, p, m), p)


def brute_entropy_of_images(mats, p: int, m: int) -> float:
    """H(X^T M_1, ..., X^T M_k) for uniform X, by enumerating X."""
    counts = Counter()
    for x in itertools.product(range(p), repeat=m):
        key = tuple(tuple(sum(x[i] * col[i] for i in range(m)) % p for col in M) for M in mats)
        counts[key] += 1
    n = p**m
    return -sum(c / n * math.log2(c / n) for c in counts.values())


def _is_cycle(seq) -> bool:
    n = len(seq)
    for i in range(n):
        (a, b), (c, d) = seq[i], seq[(i + 1) % n]
        if i % 2 == 0 and not (a == c and b != d):
            return False
        if i % 2 == 1 and not (b == d and a != c):
            return False
    return True


def _canonical(seq):
    n = len(seq)
    forms = []
    # walking backwards from the last cell also starts with a row step
    for s in (list(seq), list(reversed(seq))):
        for k in range(0, n, 2):
            forms.append(tuple(s[k:] + s[:k]))
    return min(forms)


def brute_cycles(m1: int, m2: int, max_len: int | None = None) -> set:
    """All grid cycles with distinct cells, each as a canonical tuple."""
    cells = [(a, b) for a in range(m1) for b in range(m2)]
    max_len = max_len or len(cells)
    found = set()
    for n in range(4, max_len + 1, 2):
        for seq in itertools.permutations(cells, n):
            if seq[0] != min(seq):
                continue
            if _is_cycle(seq):
                found.add(_canonical(seq))
    return found


def compose_all(perms_with_signs, m: int):
    """Product of (mapping, inverted?) pairs, rightmost applied first, on lists."""
    out = list(range(m))
    for mapping, inv in perms_with_signs:
        if inv:
            inverse = [0] * m
            for x, y in enumerate(mapping):
                inverse[y] = x
            mapping = inverse
        out = [out[mapping[x]] for x in range(m)]
    return out


def brute_min_entropy_coloring(atoms, probs, conflict) -> float:
    """Minimum class entropy over all set partitions respecting ``conflict(i, j)``."""
    n = len(atoms)
    best = math.inf

    def rec(i, classes):
        nonlocal best
        if i == n:
            h = 0.0
            for cl in classes:
                q = sum(float(probs[j]) for j in cl)
                h -= q * math.log2(q)
            best = min(best, h)
            return
        for cl in classes:
            if all(not conflict(i, j) for j in cl):
                cl.append(i)
                rec(i + 1, classes)
                cl.pop()
        classes.append([i])
        rec(i + 1, classes)
        classes.pop()

    rec(0, [])
    return best
