"""Exact joint distributions over (w1, w1', w2, w2') and their Shannon quantities.

Probabilities are kept as :class:`fractions.Fraction`; entropies are returned
in bits as floats.  Variable subsets are 4-bit masks in the fixed order
``(w1, w1p, w2, w2p)``; the helpers accept masks, names, or iterables of names.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateDemand, InvariantError, TooLarge

if TYPE_CHECKING:
    from .lcb import LinearCBInstance

VARS = ("w1", "w1p", "w2", "w2p")
W1, W1P, W2, W2P = 1, 2, 4, 8
FULL = 15
TOL = 1e-9
FROM_LINEAR_LIMIT = 1 << 20

_ALIASES = {"w1": W1, "w1p": W1P, "w1'": W1P, "w2": W2, "w2p": W2P, "w2'": W2P}


def to_mask(subset) -> int:
    """Normalize a subset spec (mask, name, or iterable of names) to a bitmask."""
    if isinstance(subset, (int, np.integer)):
        mask = int(subset)
    elif isinstance(subset, str):
        mask = _ALIASES[subset]
    else:
        mask = 0
        for s in subset:
            mask |= to_mask(s)
    if not 0 <= mask <= FULL:
        raise ValueError(f"invalid subset mask {mask}")
    return mask


def mask_name(mask: int) -> str:
    return ",".join(v for i, v in enumerate(VARS) if mask >> i & 1)


@dataclass(frozen=True)
class GeneralCBInstance:
    """A finite joint pmf over (w1, w1', w2, w2').

    Args:
        alphabets: four label tuples in the order (w1, w1', w2, w2').
        atoms: support tuples ``(w1, w1p, w2, w2p)``.
        probs: exact positive probabilities, one per atom, summing to 1.
    """

    alphabets: tuple[tuple, tuple, tuple, tuple]
    atoms: tuple[tuple, ...]
    probs: tuple[Fraction, ...]
    name: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        alph = tuple(tuple(a) for a in self.alphabets)
        atoms = tuple(tuple(t) for t in self.atoms)
        probs = tuple(Fraction(p) for p in self.probs)
        object.__setattr__(self, "alphabets", alph)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if len(alph) != 4:
            raise InvariantError("need exactly four alphabets")
        if len(atoms) != len(probs):
            raise InvariantError("atoms and probabilities differ in length")
        if len(set(atoms)) != len(atoms):
            raise InvariantError("support tuples must be distinct")
        for t in atoms:
            if len(t) != 4:
                raise InvariantError(f"support tuple {t!r} does not have four entries")
            for k in range(4):
                if t[k] not in alph[k]:
                    raise InvariantError(f"label {t[k]!r} not in the {VARS[k]} alphabet")
        for p in probs:
            if p <= 0:
                raise InvariantError("probabilities must be strictly positive")
        total = sum(probs, Fraction(0))
        if total != 1:
            raise InvariantError(f"probabilities sum to {total}, not 1")
        for k in range(4):
            used = {t[k] for t in atoms}
            unused = [a for a in alph[k] if a not in used]
            if unused:
                raise InvariantError(f"{VARS[k]} labels {unused!r} never occur in the support")

    @classmethod
    def from_pmf(cls, pmf: Mapping[tuple, Fraction | int | str], alphabets=None, name: str = "") -> "GeneralCBInstance":
        """Build from ``{(w1, w1p, w2, w2p): prob}``; alphabets default to the labels used."""
        items = sorted(((tuple(k), Fraction(v)) for k, v in pmf.items()), key=lambda kv: repr(kv[0]))
        atoms = tuple(k for k, _ in items)
        probs = tuple(v for _, v in items)
        if alphabets is None:
            alphabets = tuple(tuple(sorted({t[k] for t in atoms}, key=repr)) for k in range(4))
        return cls(alphabets, atoms, probs, name=name)

    @property
    def ell_max(self) -> float:
        """Bits needed to name the largest of the four alphabets."""
        return max(math.log2(len(a)) for a in self.alphabets)

    def marginal(self, subset) -> dict[tuple, Fraction]:
        mask = to_mask(subset)
        key = ("marginal", mask)
        if key not in self._cache:
            idx = [k for k in range(4) if mask >> k & 1]
            out: dict[tuple, Fraction] = defaultdict(Fraction)
            for t, p in zip(self.atoms, self.probs):
                out[tuple(t[k] for k in idx)] += p
            self._cache[key] = dict(out)
        return self._cache[key]


def _h(probs: Iterable[Fraction]) -> float:
    return -sum(float(p) * math.log2(p) for p in probs if p)


def entropy(inst: GeneralCBInstance, subset) -> float:
    """Joint entropy in bits of the variables in ``subset`` (empty set gives 0)."""
    mask = to_mask(subset)
    if mask == 0:
        return 0.0
    key = ("H", mask)
    if key not in inst._cache:
        inst._cache[key] = _h(inst.marginal(mask).values())
    return inst._cache[key]


def cond_entropy(inst: GeneralCBInstance, a, b=0) -> float:
    """H(A | B) in bits."""
    a, b = to_mask(a), to_mask(b)
    return entropy(inst, a | b) - entropy(inst, b)


def mutual_info(inst: GeneralCBInstance, a, b, given=0) -> float:
    """I(A; B | C) in bits."""
    a, b, c = to_mask(a), to_mask(b), to_mask(given)
    return entropy(inst, a | c) + entropy(inst, b | c) - entropy(inst, a | b | c) - entropy(inst, c)


@dataclass(frozen=True)
class EntropyProfile:
    """Entropies (bits) of all 15 nonempty subsets, keyed by 4-bit mask."""

    values: Mapping[int, float]

    def __getitem__(self, subset) -> float:
        return self.values[to_mask(subset)]

    def as_named(self) -> dict[str, float]:
        return {mask_name(m): v for m, v in sorted(self.values.items())}

    def max_abs_diff(self, other: "EntropyProfile") -> float:
        return max(abs(self.values[m] - other.values[m]) for m in range(1, 16))

    def shannon_violations(self, tol: float = TOL) -> list[str]:
        """Monotonicity and submodularity failures (empty for any real pmf)."""
        h = dict(self.values)
        h[0] = 0.0
        out = []
        for a in range(16):
            for b in range(16):
                if a & b == a and h[a] > h[b] + tol:
                    out.append(f"monotone {mask_name(a)} > {mask_name(b)}")
                if h[a] + h[b] < h[a | b] + h[a & b] - tol:
                    out.append(f"submodular {mask_name(a)} / {mask_name(b)}")
        return out


def entropy_profile(inst: GeneralCBInstance) -> EntropyProfile:
    return EntropyProfile({m: entropy(inst, m) for m in range(1, 16)})


@dataclass
class BoundsReport:
    """Converse and (optionally) achievability figures for one instance.

    Costs are in ``unit`` per source symbol (bits for general instances, q-ary
    symbols for linear ones).  ``capacity_exact`` is set only when the ratio is
    a known rational.
    """

    h_w1w2: float
    converse_cost_lb: float
    capacity_ub: float | None
    achiev_cost_ub: float | None = None
    capacity_lb: float | None = None
    tight: bool = False
    unit: str = "bits"
    capacity_exact: Fraction | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def capacity(self) -> float | None:
        return self.capacity_ub if self.tight else None

    def to_json(self) -> dict:
        out = {
            "h_w1w2": self.h_w1w2,
            "converse_cost_lb": self.converse_cost_lb,
            "capacity_ub": self.capacity_ub,
            "achiev_cost_ub": self.achiev_cost_ub,
            "capacity_lb": self.capacity_lb,
            "tight": self.tight,
            "unit": self.unit,
        }
        if self.capacity_exact is not None:
            out["capacity_exact"] = f"{self.capacity_exact.numerator}/{self.capacity_exact.denominator}"
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def converse_terms(inst: GeneralCBInstance) -> dict[str, float]:
    """The pieces of the general converse, in bits."""
    h1 = cond_entropy(inst, W1, W1P)
    h2 = cond_entropy(inst, W2, W2P)
    i1 = mutual_info(inst, W1, W2 | W2P, W1P)
    i2 = mutual_info(inst, W2, W1 | W1P, W2P)
    # genie-aided forms: user 1 first, then user 2 with everything user 1 knows
    first = h1 + cond_entropy(inst, W2, W1 | W1P | W2P)
    second = h2 + cond_entropy(inst, W1, W2 | W2P | W1P)
    return {"h1": h1, "h2": h2, "i1": i1, "i2": i2, "first": first, "second": second}


def converse_bound(inst: GeneralCBInstance) -> BoundsReport:
    """General converse: H(S)/L >= H(w1|w1') + H(w2|w2') - min(I1, I2).

    Raises:
        DegenerateDemand: when H(w1, w2) = 0.
    """
    t = converse_terms(inst)
    denom = t["h1"] + t["h2"] - min(t["i1"], t["i2"])
    denom = max(denom, t["first"], t["second"], t["h1"], t["h2"])
    h12 = entropy(inst, W1 | W2)
    if h12 <= TOL:
        raise DegenerateDemand("H(w1, w2) = 0: nothing to deliver, cost 0")
    if denom <= TOL:
        return BoundsReport(h_w1w2=h12, converse_cost_lb=0.0, capacity_ub=float("inf"),
                            notes=["side information already determines both demands: rate unbounded"])
    return BoundsReport(h_w1w2=h12, converse_cost_lb=denom, capacity_ub=h12 / denom)


def from_linear(lin: "LinearCBInstance") -> GeneralCBInstance:
    """Enumerate X over GF(p)^m and tabulate (X^T V1, X^T V1', X^T V2, X^T V2').

    Labels are tuples of field elements.  Each X has weight 1/p^m.

    Raises:
        TooLarge: if p^m exceeds 2^20.
    """
    p, m = lin.field.p, lin.m
    if p ** m > FROM_LINEAR_LIMIT:
        raise TooLarge(f"{p}^{m} basis vectors exceed the enumeration guard")
    X = np.array(list(itertools.product(range(p), repeat=m)), dtype=np.int64).reshape(-1, m)
    mats = (lin.V1, lin.V1p, lin.V2, lin.V2p)
    images = [(X @ V.data) % p for V in mats]
    counts: dict[tuple, int] = defaultdict(int)
    for row in range(X.shape[0]):
        key = tuple(tuple(int(v) for v in img[row]) for img in images)
        counts[key] += 1
    total = p ** m
    pmf = {k: Fraction(c, total) for k, c in counts.items()}
    return GeneralCBInstance.from_pmf(pmf, name=f"linear:{lin.name}" if lin.name else "linear")


def uniform_instance(rows: Sequence[tuple], name: str = "") -> GeneralCBInstance:
    """Equiprobable pmf over the given (possibly repeated) tuples."""
    counts: dict[tuple, int] = defaultdict(int)
    for r in rows:
        counts[tuple(r)] += 1
    n = len(rows)
    return GeneralCBInstance.from_pmf({k: Fraction(c, n) for k, c in counts.items()}, name=name)
