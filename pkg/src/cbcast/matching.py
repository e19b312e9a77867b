"""Matching instances: permutation grids, cycles, structure classes and δ/γ schemes.

A matching instance has side-information ``(w1', w2')`` on an ``m1 x m2`` grid
and ``w2 = pi[w1'][w2'](w1)`` for a table of permutations on ``[m]``.  Cells
are 0-indexed ``(row, col)`` pairs; permutations are 0-indexed internally and
printed 1-indexed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .distributions import GeneralCBInstance
from .errors import CycleBudgetExceeded, InvalidCycle, TooLarge, WrongShape

Cell = tuple[int, int]

DEFAULT_CYCLE_CAP = 10**6
DEFAULT_MAX_SIDE = 6
TO_GENERAL_LIMIT = 10**6


# permutations --------------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``range(m)``; ``(p * q)(x) == p(q(x))``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        mp = tuple(int(v) for v in self.mapping)
        if sorted(mp) != list(range(len(mp))):
            raise ValueError(f"not a permutation of range({len(mp)}): {mp}")
        object.__setattr__(self, "mapping", mp)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(m)))

    @classmethod
    def shift(cls, m: int, k: int) -> "Permutation":
        return cls(tuple((x + k) % m for x in range(m)))

    @classmethod
    def from_one_indexed(cls, values: Sequence[int]) -> "Permutation":
        return cls(tuple(int(v) - 1 for v in values))

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "Permutation":
        return cls(tuple(int(v) for v in rng.permutation(m)))

    @property
    def m(self) -> int:
        return len(self.mapping)

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.m != self.m:
            raise ValueError("permutations act on different sets")
        return Permutation(tuple(self.mapping[x] for x in other.mapping))

    def inverse(self) -> "Permutation":
        inv = [0] * self.m
        for x, y in enumerate(self.mapping):
            inv[y] = x
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.mapping))

    def is_derangement(self) -> bool:
        return all(x != y for x, y in enumerate(self.mapping))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mapping, dtype=np.int64)

    def one_indexed(self) -> list[int]:
        return [v + 1 for v in self.mapping]

    def __repr__(self):
        return f"Permutation({self.one_indexed()})"


# instances -----------------------------------------------------------------


@dataclass(frozen=True)
class MatchingInstance:
    m: int
    m1: int
    m2: int
    pi: tuple[tuple[Permutation, ...], ...]
    name: str = ""

    def __post_init__(self):
        pi = tuple(tuple(row) for row in self.pi)
        object.__setattr__(self, "pi", pi)
        if len(pi) != self.m1 or any(len(row) != self.m2 for row in pi):
            raise ValueError(f"permutation table must be {self.m1} x {self.m2}")
        for row in pi:
            for perm in row:
                if perm.m != self.m:
                    raise ValueError(f"table entry acts on [{perm.m}], expected [{self.m}]")

    @classmethod
    def from_shifts(cls, m: int, z: Sequence[Sequence[int]], name: str = "") -> "MatchingInstance":
        """Table with ``pi[a][b](w) = (w + z[a][b]) mod m``."""
        pi = [[Permutation.shift(m, k) for k in row] for row in z]
        return cls(m, len(pi), len(pi[0]), pi, name=name)

    def __getitem__(self, cell: Cell) -> Permutation:
        return self.pi[cell[0]][cell[1]]

    def cells(self) -> list[Cell]:
        return [(a, b) for a in range(self.m1) for b in range(self.m2)]

    def table_one_indexed(self) -> list[list[list[int]]]:
        return [[p.one_indexed() for p in row] for row in self.pi]


def cb1() -> MatchingInstance:
    return MatchingInstance.from_shifts(4, [[0, 1], [2, 3]], name="CB1")


def cb2() -> MatchingInstance:
    return MatchingInstance.from_shifts(4, [[0, 1], [3, 2]], name="CB2")


def random_maximal(rng: np.random.Generator, m: int, m1: int, m2: int) -> MatchingInstance:
    """Instance with ``pi[i][j] = gamma_j * delta_i`` for random permutations."""
    deltas = [Permutation.random(m, rng) for _ in range(m1)]
    gammas = [Permutation.random(m, rng) for _ in range(m2)]
    return MatchingInstance(m, m1, m2, [[gammas[j] * deltas[i] for j in range(m2)] for i in range(m1)], name="maximal")


# cycles --------------------------------------------------------------------


def check_cycle(cells: Sequence[Cell]) -> None:
    """Raise InvalidCycle unless ``cells`` alternate row steps and column steps."""
    n = len(cells)
    if n < 4 or n % 2:
        raise InvalidCycle(f"cycle length must be even and at least 4, got {n}")
    for i in range(n):
        (a, b), (c, d) = cells[i], cells[(i + 1) % n]
        if i % 2 == 0 and not (a == c and b != d):
            raise InvalidCycle(f"step {i + 1} must stay in one row and change column: {cells[i]} -> {cells[(i + 1) % n]}")
        if i % 2 == 1 and not (b == d and a != c):
            raise InvalidCycle(f"step {i + 1} must stay in one column and change row: {cells[i]} -> {cells[(i + 1) % n]}")


def induced_permutation(inst: MatchingInstance, cells: Sequence[Cell]) -> Permutation:
    """``pi[c1] * pi[c2]^-1 * pi[c3] * ... * pi[cN]^-1`` along a cycle."""
    check_cycle(cells)
    for a, b in cells:
        if not (0 <= a < inst.m1 and 0 <= b < inst.m2):
            raise InvalidCycle(f"cell {(a, b)} outside the {inst.m1} x {inst.m2} grid")
    out = Permutation.identity(inst.m)
    for i, cell in enumerate(cells):
        out = out * (inst[cell] if i % 2 == 0 else inst[cell].inverse())
    return out


def iter_cycles(m1: int, m2: int, cells: Iterable[Cell] | None = None) -> Iterator[tuple[Cell, ...]]:
    """Yield each simple cycle once, in a deterministic order.

    A cycle is reported starting at its smallest cell with a row step first,
    which picks one description out of its rotations and reflections.
    ``cells`` restricts the search to a subset of the grid.
    """
    allowed = set(cells) if cells is not None else {(a, b) for a in range(m1) for b in range(m2)}
    by_row: dict[int, list[Cell]] = {}
    by_col: dict[int, list[Cell]] = {}
    for c in sorted(allowed):
        by_row.setdefault(c[0], []).append(c)
        by_col.setdefault(c[1], []).append(c)

    for start in sorted(allowed):
        path = [start]
        on_path = {start}
        # stack of (path length when pushed, candidate iterator)
        stack = [iter([c for c in by_row.get(start[0], []) if c > start])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            if len(path) % 2 == 0:
                # just took a row step; the closing step needs the start's column
                if len(path) >= 4 and nxt[1] == start[1]:
                    yield tuple(path)
                stack.append(iter([c for c in by_col.get(nxt[1], []) if c > start and c[0] != nxt[0]]))
            else:
                stack.append(iter([c for c in by_row.get(nxt[0], []) if c > start and c[1] != nxt[1]]))


def enumerate_cycles(m1: int, m2: int, cap: int = DEFAULT_CYCLE_CAP, cells: Iterable[Cell] | None = None) -> list[tuple[Cell, ...]]:
    """All simple cycles of the grid (or of a cell subset).

    Raises:
        CycleBudgetExceeded: when more than ``cap`` cycles exist.
    """
    out = []
    for cyc in iter_cycles(m1, m2, cells):
        out.append(cyc)
        if len(out) > cap:
            raise CycleBudgetExceeded(f"more than {cap} cycles in the {m1} x {m2} grid")
    return out


def contains_cycle(cells: Iterable[Cell]) -> bool:
    """True iff the cells (as row-column edges of a bipartite graph) close a cycle."""
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in cells:
        ra, rb = find(("r", a)), find(("c", b))
        if ra == rb:
            return True
        parent[ra] = rb
    return False


# bullet sets ---------------------------------------------------------------


@dataclass(frozen=True)
class BulletSet:
    m1: int
    m2: int
    z1: int
    z2: int
    cells: frozenset

    def circle_cells(self) -> frozenset:
        return frozenset((a, b) for a in range(self.m1) for b in range(self.m2)) - self.cells

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self.cells

    @property
    def index(self) -> int:
        """Position of this translation among all ``m1*m2`` of them."""
        return self.z1 * self.m2 + self.z2


def _standard_cells(m1: int, m2: int) -> set[Cell]:
    if m1 >= m2:
        # full first column plus the diagonal just right of it
        return {(a, 0) for a in range(m1)} | {(a, a + 1) for a in range(m2 - 1)}
    # transposed pattern so the set still spans every row and column
    return {(0, b) for b in range(m2)} | {(b + 1, b) for b in range(m1 - 1)}


def standard_bullet_set(m1: int, m2: int) -> BulletSet:
    return BulletSet(m1, m2, 0, 0, frozenset(_standard_cells(m1, m2)))


def translate(bs: BulletSet, z1: int, z2: int) -> BulletSet:
    """Cyclically shift rows by ``z1`` and columns by ``z2``."""
    cells = frozenset(((a + z1) % bs.m1, (b + z2) % bs.m2) for a, b in bs.cells)
    return BulletSet(bs.m1, bs.m2, (bs.z1 + z1) % bs.m1, (bs.z2 + z2) % bs.m2, cells)


def all_translations(m1: int, m2: int) -> list[BulletSet]:
    std = standard_bullet_set(m1, m2)
    return [translate(std, z1, z2) for z1 in range(m1) for z2 in range(m2)]


def acceptable_sets(m1: int, m2: int, cell: Cell) -> list[BulletSet]:
    """Translations of the standard set that contain ``cell`` (there are m1+m2-1)."""
    return [bs for bs in all_translations(m1, m2) if tuple(cell) in bs.cells]


# delta/gamma schemes -------------------------------------------------------


@dataclass(frozen=True)
class DeltaGammaScheme:
    """Row permutations ``deltas`` and column permutations ``gammas``.

    On every cell of ``cells``, ``gammas[b] * deltas[a] == pi[a][b]``.
    """

    cells: frozenset
    deltas: tuple[Permutation, ...]
    gammas: tuple[Permutation, ...]
    bullet: BulletSet | None = None

    def encode(self, w1p: int, w1: int) -> int:
        return self.deltas[w1p](w1)

    def decode_user1(self, s: int, w1p: int) -> int:
        return self.deltas[w1p].inverse()(s)

    def decode_user2(self, s: int, w2p: int) -> int:
        return self.gammas[w2p](s)

    def satisfied_on(self, inst: MatchingInstance) -> set[Cell]:
        """Cells of the full grid where the factorization holds."""
        return {c for c in inst.cells() if self.gammas[c[1]] * self.deltas[c[0]] == inst[c]}


def build_delta_gamma(inst: MatchingInstance, bs, anchor_col: int | None = None) -> DeltaGammaScheme:
    """Factor ``pi`` on a tree-shaped cell set, fixing the anchor column's gamma to identity.

    ``bs`` is a BulletSet or any iterable of cells whose row/column graph is
    connected and acyclic (for a cyclic set the result holds on a spanning tree
    only).  Rows or columns the set never touches get the identity.
    """
    bullet = bs if isinstance(bs, BulletSet) else None
    cells = frozenset(bs.cells if bullet else (tuple(c) for c in bs))
    if anchor_col is None:
        anchor_col = bullet.z2 if bullet else min(b for _, b in cells)
    ident = Permutation.identity(inst.m)
    deltas: dict[int, Permutation] = {}
    gammas: dict[int, Permutation] = {anchor_col: ident}
    frontier = [("c", anchor_col)]
    while frontier:
        kind, idx = frontier.pop(0)
        for a, b in sorted(cells):
            if kind == "c" and b == idx and a not in deltas:
                deltas[a] = gammas[b].inverse() * inst[(a, b)]
                frontier.append(("r", a))
            elif kind == "r" and a == idx and b not in gammas:
                gammas[b] = inst[(a, b)] * deltas[a].inverse()
                frontier.append(("c", b))
    return DeltaGammaScheme(
        cells,
        tuple(deltas.get(a, ident) for a in range(inst.m1)),
        tuple(gammas.get(b, ident) for b in range(inst.m2)),
        bullet,
    )


def encode_bullet(scheme: DeltaGammaScheme, w1p: int, w1: int) -> int:
    return scheme.encode(w1p, w1)


def decode_user1(scheme: DeltaGammaScheme, s: int, w1p: int) -> int:
    return scheme.decode_user1(s, w1p)


def decode_user2(scheme: DeltaGammaScheme, s: int, w2p: int) -> int:
    return scheme.decode_user2(s, w2p)


def maximal_scheme(inst: MatchingInstance) -> DeltaGammaScheme:
    """Factorization from column 0 and row 0: valid everywhere iff the table is maximal."""
    tree = {(a, 0) for a in range(inst.m1)} | {(0, b) for b in range(inst.m2)}
    return build_delta_gamma(inst, tree, anchor_col=0)


def is_maximal(inst: MatchingInstance) -> bool:
    return len(maximal_scheme(inst).satisfied_on(inst)) == inst.m1 * inst.m2


# classification ------------------------------------------------------------


MAXIMAL, MINIMAL, NEITHER, UNDETERMINED = "maximal", "minimal", "neither", "not-maximal-undetermined"


@dataclass
class Classification:
    cls: str
    cycles_checked: int = 0
    witness: tuple | None = None
    note: str = ""

    def __str__(self):
        return self.cls


def classify(inst: MatchingInstance, cap: int = DEFAULT_CYCLE_CAP, max_side: int = DEFAULT_MAX_SIDE) -> Classification:
    """Maximal by factorization, else minimal/neither by exhaustive cycle search.

    A grid with no cycles at all is reported maximal.  When the cycle budget
    runs out (or a side exceeds ``max_side``) before a non-derangement cycle
    turns up, the class is ``not-maximal-undetermined``.
    """
    if is_maximal(inst):
        return Classification(MAXIMAL)
    if max(inst.m1, inst.m2) > max_side:
        return Classification(UNDETERMINED, note=f"grid side exceeds {max_side}; minimality not searched")
    count = 0
    for cyc in iter_cycles(inst.m1, inst.m2):
        count += 1
        if not induced_permutation(inst, cyc).is_derangement():
            return Classification(NEITHER, count, cyc)
        if count >= cap:
            return Classification(UNDETERMINED, count, note=f"cycle budget {cap} exhausted")
    return Classification(MINIMAL, count)


# bounds --------------------------------------------------------------------


def cost_gap(m1: int, m2: int) -> float:
    """``log2(m1*m2) - log2(m1+m2-1)``: bits needed to name an acceptable bullet set."""
    return math.log2(m1 * m2) - math.log2(m1 + m2 - 1)


@dataclass
class MatchingBounds:
    cls: str
    hstar_lb_bits: float
    hstar_ub_bits: float
    h_w1w2: float
    capacity_lb: float
    capacity_ub: float
    grid_capacity_lb: float
    grid_capacity_ub: float
    tight: bool
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "class": self.cls,
            "hstar_lb_bits": self.hstar_lb_bits,
            "hstar_ub_bits": self.hstar_ub_bits,
            "capacity_lb": self.capacity_lb,
            "capacity_ub": self.capacity_ub,
            "tight": self.tight,
            "h_w1w2": self.h_w1w2,
            "grid_capacity_lb": self.grid_capacity_lb,
            "grid_capacity_ub": self.grid_capacity_ub,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def joint_demand_entropy(inst: MatchingInstance) -> float:
    """Exact H(w1, w2) in bits under the uniform matching law."""
    counts: dict[tuple[int, int], int] = {}
    for row in inst.pi:
        for perm in row:
            for w1 in range(inst.m):
                key = (w1, perm(w1))
                counts[key] = counts.get(key, 0) + 1
    total = inst.m * inst.m1 * inst.m2
    return -sum(c / total * math.log2(c / total) for c in counts.values())


def bounds(inst: MatchingInstance, classification: Classification | None = None, cap: int = DEFAULT_CYCLE_CAP) -> MatchingBounds:
    c = classification or classify(inst, cap=cap)
    lm = math.log2(inst.m) if inst.m > 1 else 0.0
    lo, hi = lm, lm + cost_gap(inst.m1, inst.m2)
    notes = []
    if c.cls == MAXIMAL:
        hi = lo
    elif c.cls == MINIMAL:
        lo = hi
    else:
        notes.append("structure is neither maximal nor minimal: only the interval is known")
    h = joint_demand_entropy(inst)
    ratio = lambda num, den: num / den if den > 0 else float("inf")  # noqa: E731
    return MatchingBounds(
        cls=c.cls,
        hstar_lb_bits=lo,
        hstar_ub_bits=hi,
        h_w1w2=h,
        capacity_lb=ratio(h, hi),
        capacity_ub=ratio(h, lo),
        grid_capacity_lb=ratio(2 * lm, lm + cost_gap(inst.m1, inst.m2)),
        grid_capacity_ub=2.0 if lm > 0 else float("inf"),
        tight=lo == hi,
        notes=notes,
    )


# the 4 x 3 single-letter scheme -------------------------------------------


BAND_4X3 = frozenset({(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2)})


@dataclass(frozen=True)
class Scheme4x3:
    """One flag bit picks the band or its complement, then ``delta[w1'](w1)`` follows."""

    band: DeltaGammaScheme
    rest: DeltaGammaScheme
    m: int

    @property
    def cost_bits(self) -> float:
        return math.log2(self.m) + 1

    def _part(self, flag: int) -> DeltaGammaScheme:
        return self.band if flag == 0 else self.rest

    def encode(self, w1p: int, w2p: int, w1: int) -> tuple[int, int]:
        flag = 0 if (w1p, w2p) in BAND_4X3 else 1
        return flag, self._part(flag).encode(w1p, w1)

    def decode_user1(self, msg: tuple[int, int], w1p: int) -> int:
        return self._part(msg[0]).decode_user1(msg[1], w1p)

    def decode_user2(self, msg: tuple[int, int], w2p: int) -> int:
        return self._part(msg[0]).decode_user2(msg[1], w2p)

    def verify(self, inst: MatchingInstance) -> int:
        """Exhaustively count decode failures over all 12*m inputs."""
        bad = 0
        for (a, b) in inst.cells():
            for w1 in range(inst.m):
                msg = self.encode(a, b, w1)
                if self.decode_user1(msg, a) != w1 or self.decode_user2(msg, b) != inst[(a, b)](w1):
                    bad += 1
        return bad


def scheme_4x3(inst: MatchingInstance) -> Scheme4x3:
    """Zero-error single-letter scheme at ``log2(m) + 1`` bits for 4 x 3 grids.

    Raises:
        WrongShape: unless the grid is 4 x 3.
    """
    if (inst.m1, inst.m2) != (4, 3):
        raise WrongShape(f"needs a 4 x 3 grid, got {inst.m1} x {inst.m2}")
    rest = frozenset(inst.cells()) - BAND_4X3
    return Scheme4x3(build_delta_gamma(inst, BAND_4X3, 0), build_delta_gamma(inst, rest, 0), inst.m)


# feasibility analysis ------------------------------------------------------


@dataclass
class FeasibilityReport:
    """Per broadcast value: which side-information cells remain possible."""

    feasible: dict = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    max_size: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def feasible_set_check(
    encoder: Callable[[int, int, int], object],
    inst: MatchingInstance,
    cells: Iterable[Cell] | None = None,
    size_limit: int | None = None,
    cap: int = DEFAULT_CYCLE_CAP,
) -> FeasibilityReport:
    """Audit a deterministic single-letter encoder ``encoder(w1', w2', w1)``.

    Checks both users decode uniquely, then that no feasible cell set holds a
    cycle inducing a derangement.  For minimal instances (or when
    ``size_limit`` is given) feasible sets larger than ``m1+m2-1`` are flagged.
    ``cells`` restricts the side-information domain (default: the whole grid).
    """
    domain = sorted(set(cells)) if cells is not None else inst.cells()
    rep = FeasibilityReport()
    seen1: dict = {}
    seen2: dict = {}
    for a, b in domain:
        for w1 in range(inst.m):
            s = encoder(a, b, w1)
            w2 = inst[(a, b)](w1)
            rep.feasible.setdefault(s, set()).add((a, b))
            if seen1.setdefault((s, a), w1) != w1:
                rep.violations.append(f"user 1 cannot decode: value {s!r} with w1'={a} fits w1 in {{{seen1[(s, a)]}, {w1}}}")
            if seen2.setdefault((s, b), w2) != w2:
                rep.violations.append(f"user 2 cannot decode: value {s!r} with w2'={b} fits w2 in {{{seen2[(s, b)]}, {w2}}}")
    if size_limit is None and classify(inst, cap=cap).cls == MINIMAL:
        size_limit = inst.m1 + inst.m2 - 1
    for s, cellset in rep.feasible.items():
        rep.max_size = max(rep.max_size, len(cellset))
        if size_limit is not None and len(cellset) > size_limit:
            rep.violations.append(f"value {s!r}: {len(cellset)} feasible cells exceed {size_limit}")
        if contains_cycle(cellset):
            for cyc in iter_cycles(inst.m1, inst.m2, cellset):
                if induced_permutation(inst, cyc).is_derangement():
                    rep.violations.append(f"value {s!r}: feasible cells hold derangement cycle {cyc}")
                    break
    return rep


def bullet_encoder(inst: MatchingInstance, choose: Callable[[Cell], BulletSet] | None = None):
    """Single-letter encoder sending (translation index, delta symbol).

    ``choose`` maps a side-information cell to one acceptable translation; the
    default takes the first in translation order.
    """
    choose = choose or (lambda cell: acceptable_sets(inst.m1, inst.m2, cell)[0])
    cache: dict[int, DeltaGammaScheme] = {}

    def enc(a: int, b: int, w1: int):
        bs = choose((a, b))
        if bs.index not in cache:
            cache[bs.index] = build_delta_gamma(inst, bs)
        return bs.index, cache[bs.index].encode(a, w1)

    return enc


# conversion ----------------------------------------------------------------


def to_general(inst: MatchingInstance) -> GeneralCBInstance:
    """Uniform law over ``(w1, w1', pi[w1'][w2'](w1), w2')``.

    Raises:
        TooLarge: if ``m*m1*m2`` exceeds 10**6.
    """
    n = inst.m * inst.m1 * inst.m2
    if n > TO_GENERAL_LIMIT:
        raise TooLarge(f"{n} atoms exceed the conversion guard")
    pr = Fraction(1, n)
    pmf = {}
    for a, b in inst.cells():
        for w1 in range(inst.m):
            pmf[(w1, a, inst[(a, b)](w1), b)] = pr
    alph = (tuple(range(inst.m)), tuple(range(inst.m1)), tuple(range(inst.m)), tuple(range(inst.m2)))
    return GeneralCBInstance.from_pmf(pmf, alphabets=alph, name=inst.name)
