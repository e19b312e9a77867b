"""Brute-force single-letter optimum via minimum-entropy coloring.

A deterministic one-shot encoder is a coloring of the support: two atoms that
share ``w1'`` but differ in ``w1`` (or share ``w2'`` but differ in ``w2``) must
get different broadcast values.  The best encoder minimizes the entropy of the
color-class probabilities.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .distributions import GeneralCBInstance, W1, W2, converse_bound, entropy
from .errors import DegenerateDemand, SearchBudgetExceeded, TooLarge

MAX_ATOMS = 4096
DEFAULT_NODE_BUDGET = 20_000_000
CMP_TOL = 1e-12


@dataclass(frozen=True)
class ConflictInstance:
    atoms: tuple
    probs: tuple
    conflicts: frozenset  # pairs (i, j) with i < j

    def neighbours(self) -> list[set[int]]:
        adj = [set() for _ in self.atoms]
        for i, j in self.conflicts:
            adj[i].add(j)
            adj[j].add(i)
        return adj


def build_conflicts(inst: GeneralCBInstance) -> ConflictInstance:
    """Pairs of atoms no zero-error single-letter encoder may merge.

    Raises:
        TooLarge: above 4096 support atoms.
    """
    n = len(inst.atoms)
    if n > MAX_ATOMS:
        raise TooLarge(f"{n} atoms exceed the conflict-graph guard of {MAX_ATOMS}")
    pairs = set()
    for i in range(n):
        w1, w1p, w2, w2p = inst.atoms[i]
        for j in range(i + 1, n):
            v1, v1p, v2, v2p = inst.atoms[j]
            if (w1p == v1p and w1 != v1) or (w2p == v2p and w2 != v2):
                pairs.add((i, j))
    return ConflictInstance(inst.atoms, inst.probs, frozenset(pairs))


@dataclass
class ColoringResult:
    coloring: tuple[int, ...]
    h_bits: float
    optimal: bool
    nodes: int
    class_probs: tuple[Fraction, ...] = field(default_factory=tuple)

    @property
    def colors(self) -> int:
        return len(self.class_probs)


def _int_weights(probs) -> tuple[list[int], int]:
    den = 1
    for p in probs:
        den = den * p.denominator // math.gcd(den, p.denominator)
    return [int(p * den) for p in probs], den


def min_entropy_coloring(
    ci: ConflictInstance,
    lower_bound: float = 0.0,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_colors: int | None = None,
) -> ColoringResult:
    """Exact branch and bound over restricted-growth colorings.

    Atoms are colored in their stored order, trying colors in increasing
    order, so the first optimum found is the lexicographically smallest one.
    A subtree is cut when even pouring all uncolored mass into its heaviest
    class cannot beat the incumbent.  ``lower_bound`` (any valid bound on the
    optimum, in bits) lets the search stop as soon as it is met.

    Raises:
        SearchBudgetExceeded: after ``node_budget`` nodes; ``.result`` carries
            the best coloring found with ``optimal=False``.
    """
    n = len(ci.atoms)
    if n == 0:
        return ColoringResult((), 0.0, True, 0, ())
    w, den = _int_weights(ci.probs)
    adj = ci.neighbours()
    log_den = math.log2(den)

    @lru_cache(maxsize=None)
    def f(x: int) -> float:
        return x * math.log2(x) if x > 0 else 0.0

    def h_of(total_f: float) -> float:
        # H = log2(den) - sum(w log w)/den
        return log_den - total_f / den

    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + w[i]

    colors = [0] * n
    class_w: list[int] = []
    best = {"h": math.inf, "col": None, "f": 0.0}
    nodes = 0
    stop = False
    target = lower_bound - 1e-9

    def visit(i: int, total_f: float):
        nonlocal nodes, stop
        nodes += 1
        if nodes > node_budget:
            stop = True
            return
        if i == n:
            h = h_of(total_f)
            if h < best["h"] - CMP_TOL:
                best.update(h=h, col=tuple(colors))
                if h <= target + 2e-9:
                    stop = True
            return
        # Schur-convexity bound: everything left lands on the heaviest class
        heavy = max(class_w) if class_w else 0
        bound_f = total_f - f(heavy) + f(heavy + suffix[i])
        if h_of(bound_f) >= best["h"] - CMP_TOL:
            return
        banned = {colors[j] for j in adj[i] if j < i}
        k = len(class_w)
        for c in range(k + 1):
            if c in banned:
                continue
            if c == k:
                if max_colors is not None and k >= max_colors:
                    break
                class_w.append(0)
            old = class_w[c]
            class_w[c] = old + w[i]
            colors[i] = c
            visit(i + 1, total_f - f(old) + f(old + w[i]))
            class_w[c] = old
            if c == k:
                class_w.pop()
            if stop:
                return

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, n + 200))
    try:
        visit(0, 0.0)
    finally:
        sys.setrecursionlimit(limit)

    def pack(col, optimal):
        if col is None:
            return ColoringResult((), math.inf, False, nodes, ())
        k = max(col) + 1
        mass = [Fraction(0)] * k
        for a, c in enumerate(col):
            mass[c] += ci.probs[a]
        h = -sum(float(p) * math.log2(p) for p in mass)
        return ColoringResult(col, h, optimal, nodes, tuple(mass))

    if nodes > node_budget:
        raise SearchBudgetExceeded(f"node budget {node_budget} exhausted", result=pack(best["col"], False))
    return pack(best["col"], True)


@dataclass
class OracleReport:
    h_w1w2: float
    h_bits: float
    r1: float
    capacity_ub: float
    converse_cost_lb: float
    gap: float
    optimal: bool
    coloring: tuple[int, ...]
    nodes: int

    def to_json(self) -> dict:
        return {
            "h_w1w2": self.h_w1w2,
            "h_bits": self.h_bits,
            "r1": self.r1,
            "capacity_ub": self.capacity_ub,
            "converse_cost_lb": self.converse_cost_lb,
            "gap_to_capacity_ub": self.gap,
            "optimal": self.optimal,
            "coloring": list(self.coloring),
            "nodes": self.nodes,
        }


def brute_capacity_L1(inst: GeneralCBInstance, node_budget: int = DEFAULT_NODE_BUDGET) -> OracleReport:
    """Best single-letter rate ``H(w1, w2) / min H(S)`` and its gap to the converse.

    A search that runs out of budget returns its best coloring with
    ``optimal=False`` rather than raising.
    """
    h12 = entropy(inst, W1 | W2)
    try:
        conv = converse_bound(inst)
        lb, cap_ub = conv.converse_cost_lb, conv.capacity_ub
    except DegenerateDemand:
        lb, cap_ub = 0.0, math.inf
    ci = build_conflicts(inst)
    try:
        res = min_entropy_coloring(ci, lower_bound=lb, node_budget=node_budget)
    except SearchBudgetExceeded as exc:
        res = exc.result
    if res.h_bits <= 0:
        r1 = math.inf if h12 > 0 else math.nan
    else:
        r1 = h12 / res.h_bits
    gap = cap_ub - r1 if math.isfinite(cap_ub) and math.isfinite(r1) else math.nan
    return OracleReport(h12, res.h_bits, r1, cap_ub, lb, gap, res.optimal, res.coloring, res.nodes)
