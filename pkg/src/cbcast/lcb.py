"""Optimal linear schemes for linear computation broadcast.

Every message and side-information is ``X^T V`` for a uniform basis vector X
over GF(p).  :func:`build_scheme` splits each demand into the part recoverable
from both side-informations (a), the part tied to the other user's demand (b)
and the independent rest (c), then broadcasts

    S = X^T [V1' Q1' + V2' P2' | V2b M2b + V2' M2' | V1c | V2c]

which meets the converse with equality.  All costs are counted in q-ary
symbols.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gf
from .distributions import BoundsReport
from .errors import DecompositionInvariantViolated, DegenerateDemand, FactorizationFailed, Inconsistent
from .gf import FieldMatrix, PrimeField, hstack, rank, vstack


@dataclass(frozen=True)
class LinearCBInstance:
    """Linear instance: ``W1 = X^T V1``, ``W1' = X^T V1p`` and so on."""

    field: PrimeField
    m: int
    V1: FieldMatrix
    V1p: FieldMatrix
    V2: FieldMatrix
    V2p: FieldMatrix
    name: str = ""

    def __post_init__(self):
        fld = self.field if isinstance(self.field, PrimeField) else PrimeField(int(self.field))
        object.__setattr__(self, "field", fld)
        for label in ("V1", "V1p", "V2", "V2p"):
            V = getattr(self, label)
            if V.field != fld:
                raise ValueError(f"{label} is over {V.field}, expected {fld}")
            if V.rows != self.m:
                raise ValueError(f"{label} has {V.rows} rows, expected m={self.m}")

    @classmethod
    def from_columns(cls, p: int, m: int, V1, V1p, V2, V2p, name: str = "") -> "LinearCBInstance":
        mk = lambda cols: FieldMatrix.from_columns(p, cols, rows=m)  # noqa: E731
        return cls(PrimeField(p), m, mk(V1), mk(V1p), mk(V2), mk(V2p), name=name)

    def swapped(self) -> "LinearCBInstance":
        return LinearCBInstance(self.field, self.m, self.V2, self.V2p, self.V1, self.V1p, name=self.name)

    @property
    def p(self) -> int:
        return self.field.p


def _basis_or_empty(M: FieldMatrix) -> FieldMatrix:
    return gf.column_basis(M) if M.cols else M


def converse_symbols(inst: LinearCBInstance) -> tuple[int, int]:
    """The two genie bounds of the converse, as integer ranks.

    Returns ``(first, second)`` with
    first  = rank[V1 V1'] - rank V1' + rank[all] - rank[V1 V1' V2'] and
    second = rank[V2 V2'] - rank V2' + rank[all] - rank[V2 V2' V1'];
    the converse denominator is their maximum.
    """
    V1, V1p, V2, V2p = inst.V1, inst.V1p, inst.V2, inst.V2p
    r_all = rank(hstack(V1, V1p, V2, V2p))
    first = rank(hstack(V1, V1p)) - rank(V1p) + r_all - rank(hstack(V1, V1p, V2p))
    second = rank(hstack(V2, V2p)) - rank(V2p) + r_all - rank(hstack(V2, V2p, V1p))
    return first, second


def converse_denominator(inst: LinearCBInstance) -> int:
    return max(converse_symbols(inst))


# normalization -------------------------------------------------------------


@dataclass(frozen=True)
class Normalized:
    """A demand-reduced instance plus maps back to the original demands.

    ``reconstruct1`` has shape ``(n1_reduced + n1', n1)`` and satisfies
    ``[V1_reduced | V1'] @ reconstruct1 == V1``; likewise for user 2.
    """

    inst: LinearCBInstance
    reconstruct1: FieldMatrix
    reconstruct2: FieldMatrix


def _reduce_demand(V: FieldMatrix, Vp: FieldMatrix) -> tuple[FieldMatrix, FieldMatrix]:
    shared = gf.intersect_column_spaces(V, Vp) if V.cols and Vp.cols else FieldMatrix.zeros(V.field, V.rows, 0)
    reduced = gf.extend_basis(shared, V)
    # V = [shared | reduced] C  and  shared = Vp D
    C = gf.solve(hstack(shared, reduced), V)
    D = gf.solve(Vp, shared) if shared.cols else FieldMatrix.zeros(V.field, Vp.cols, 0)
    k = shared.cols
    C_shared = FieldMatrix(V.field, C.data[:k])
    C_reduced = FieldMatrix(V.field, C.data[k:])
    recon = vstack(C_reduced, D @ C_shared) if (C_reduced.rows + Vp.cols) else C
    return reduced, recon


def normalize(inst: LinearCBInstance) -> Normalized:
    """Strip from each demand whatever the user's own side-information already spans."""
    red1, rec1 = _reduce_demand(inst.V1, inst.V1p)
    red2, rec2 = _reduce_demand(inst.V2, inst.V2p)
    new = LinearCBInstance(inst.field, inst.m, red1, inst.V1p, red2, inst.V2p, name=inst.name)
    return Normalized(new, rec1, rec2)


# decomposition -------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    V1a: FieldMatrix
    V1b: FieldMatrix
    V1c: FieldMatrix
    V2a: FieldMatrix
    V2b: FieldMatrix
    V2c: FieldMatrix

    n1a = property(lambda self: self.V1a.cols)
    n1b = property(lambda self: self.V1b.cols)
    n1c = property(lambda self: self.V1c.cols)
    n2a = property(lambda self: self.V2a.cols)
    n2b = property(lambda self: self.V2b.cols)
    n2c = property(lambda self: self.V2c.cols)

    @property
    def nb(self) -> int:
        return self.n1b

    def counts(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in ("n1a", "n1b", "n1c", "n2a", "n2b", "n2c")}


def _same_span(A: FieldMatrix, B: FieldMatrix) -> bool:
    ra, rb = rank(A), rank(B)
    return ra == rb and rank(hstack(A, B)) == ra


def _empty(inst: LinearCBInstance) -> FieldMatrix:
    return FieldMatrix.zeros(inst.field, inst.m, 0)


def _intersect(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    if A.cols == 0 or B.cols == 0:
        return FieldMatrix.zeros(A.field, A.rows, 0)
    return gf.intersect_column_spaces(A, B)


def _split(V: FieldMatrix, side: FieldMatrix, other: FieldMatrix):
    a = _intersect(V, side)
    ab_space = _intersect(V, hstack(side, other))
    b = gf.extend_basis(a, ab_space) if ab_space.cols else _empty_like(V)
    c = gf.extend_basis(hstack(a, b), V)
    return a, b, c


def _empty_like(V: FieldMatrix) -> FieldMatrix:
    return FieldMatrix.zeros(V.field, V.rows, 0)


def check_decomposition(inst: LinearCBInstance, dec: Decomposition) -> list[str]:
    """Return the names of the eight partition properties that fail (empty if valid)."""
    side = hstack(inst.V1p, inst.V2p)
    failures = []
    for i, (V, other, a, b, c) in enumerate(
        ((inst.V1, inst.V2, dec.V1a, dec.V1b, dec.V1c), (inst.V2, inst.V1, dec.V2a, dec.V2b, dec.V2c)), start=1
    ):
        abc = hstack(a, b, c)
        if rank(abc) != abc.cols:
            failures.append(f"user{i}: a/b/c columns not independent")
        if not _same_span(a, _intersect(V, side)):
            failures.append(f"user{i}: a does not span V{i} ∩ (V1' ∪ V2')")
        if not _same_span(hstack(a, b), _intersect(V, hstack(side, other))):
            failures.append(f"user{i}: a∪b does not span V{i} ∩ (V1' ∪ V2' ∪ V{3 - i})")
        if not _same_span(abc, V):
            failures.append(f"user{i}: a∪b∪c does not span V{i}")
    if dec.n1b != dec.n2b:
        failures.append(f"n1b={dec.n1b} != n2b={dec.n2b}")
    return failures


def decompose(inst: LinearCBInstance) -> Decomposition:
    """a/b/c partition of a normalized instance.

    Raises:
        DecompositionInvariantViolated: if any partition property fails.
    """
    side = hstack(inst.V1p, inst.V2p)
    V1a, V1b, V1c = _split(inst.V1, side, inst.V2)
    V2a, V2b, V2c = _split(inst.V2, side, inst.V1)
    dec = Decomposition(V1a, V1b, V1c, V2a, V2b, V2c)
    bad = check_decomposition(inst, dec)
    if bad:
        raise DecompositionInvariantViolated("; ".join(bad))
    return dec


# factorizations ------------------------------------------------------------


def _split_rows(M: FieldMatrix, *sizes: int) -> list[FieldMatrix]:
    out, start = [], 0
    for s in sizes:
        out.append(FieldMatrix(M.field, M.data[start : start + s]))
        start += s
    return out


def factor_b(dec: Decomposition, inst: LinearCBInstance) -> tuple[FieldMatrix, FieldMatrix, FieldMatrix]:
    """Solve ``V1b = V1' M1' + V2' M2' + V2b M2b`` with M2b square and invertible."""
    if dec.n1b != dec.n2b:
        raise FactorizationFailed(f"n1b={dec.n1b} differs from n2b={dec.n2b}")
    basis = hstack(inst.V1p, inst.V2p, dec.V2b)
    try:
        X = gf.solve(basis, dec.V1b)
    except Inconsistent as exc:
        raise FactorizationFailed("V1b is not in span(V1', V2', V2b)") from exc
    M1p, M2p, M2b = _split_rows(X, inst.V1p.cols, inst.V2p.cols, dec.n2b)
    if dec.nb and rank(M2b) != dec.nb:
        raise FactorizationFailed("M2b is singular")
    return M1p, M2p, M2b


def factor_a(dec: Decomposition, inst: LinearCBInstance) -> tuple[FieldMatrix, FieldMatrix, FieldMatrix, FieldMatrix]:
    """Solve ``V1a = V1' P1' + V2' P2'`` and ``[V2a, 0] = V1' Q1' + V2' Q2'``.

    Requires ``n1a >= n2a``; callers swap users otherwise.
    """
    if dec.n1a < dec.n2a:
        raise ValueError("factor_a expects n1a >= n2a; swap the users first")
    side = hstack(inst.V1p, inst.V2p)
    pad = FieldMatrix.zeros(inst.field, inst.m, dec.n1a - dec.n2a)
    try:
        P = gf.solve(side, dec.V1a)
        Q = gf.solve(side, hstack(dec.V2a, pad))
    except Inconsistent as exc:
        raise FactorizationFailed("a-part is not in span(V1', V2')") from exc
    P1p, P2p = _split_rows(P, inst.V1p.cols, inst.V2p.cols)
    Q1p, Q2p = _split_rows(Q, inst.V1p.cols, inst.V2p.cols)
    return P1p, P2p, Q1p, Q2p


# scheme --------------------------------------------------------------------


@dataclass(frozen=True)
class LinearScheme:
    """Broadcast ``S = X^T s_cols`` with decode maps.

    ``decode1`` has shape ``(cost + n1', n1)``: user 1 computes
    ``W1 = [S | W1'] @ decode1``.  Likewise ``decode2`` for user 2.
    ``segments`` gives the widths of the a, b and c blocks of S.
    """

    s_cols: FieldMatrix
    decode1: FieldMatrix
    decode2: FieldMatrix
    segments: dict = field(default_factory=dict)
    orientation: str = "normal"

    @property
    def cost_symbols(self) -> int:
        return self.s_cols.cols

    @property
    def p(self) -> int:
        return self.s_cols.p

    @property
    def m(self) -> int:
        return self.s_cols.rows

    def to_json(self) -> dict:
        return {
            "field": self.p,
            "m": self.m,
            "s_cols": self.s_cols.columns(),
            "segments": dict(self.segments),
            "decode1": self.decode1.columns(),
            "decode2": self.decode2.columns(),
            "decode1_rows": self.decode1.rows,
            "decode2_rows": self.decode2.rows,
            "cost_symbols": self.cost_symbols,
            "orientation": self.orientation,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "LinearScheme":
        p, m = int(obj["field"]), int(obj["m"])
        s_cols = FieldMatrix.from_columns(p, obj["s_cols"], rows=m)
        d1 = FieldMatrix.from_columns(p, obj["decode1"], rows=int(obj.get("decode1_rows", 0)))
        d2 = FieldMatrix.from_columns(p, obj["decode2"], rows=int(obj.get("decode2_rows", 0)))
        return cls(s_cols, d1, d2, dict(obj.get("segments", {})), obj.get("orientation", "normal"))

    def without_columns(self, idx) -> "LinearScheme":
        """Copy with some broadcast columns deleted (decode maps left as-is)."""
        drop = set(idx)
        keep = [j for j in range(self.s_cols.cols) if j not in drop]
        return LinearScheme(self.s_cols.select_columns(keep), self.decode1, self.decode2, dict(self.segments), self.orientation)


def _selector(p: int, rows: int, cols: int, row_offset: int, n: int, col_offset: int = 0) -> np.ndarray:
    out = np.zeros((rows, cols), dtype=np.int64)
    for k in range(n):
        out[row_offset + k, col_offset + k] = 1
    return out


def _build_oriented(norm: Normalized) -> tuple[FieldMatrix, FieldMatrix, FieldMatrix, dict]:
    inst = norm.inst
    p = inst.p
    dec = decompose(inst)
    M1p, M2p, M2b = factor_b(dec, inst)
    P1p, P2p, Q1p, Q2p = factor_a(dec, inst)
    n1a, nb, n1c, n2a, n2c = dec.n1a, dec.nb, dec.n1c, dec.n2a, dec.n2c
    n1p, n2p = inst.V1p.cols, inst.V2p.cols

    Sa = inst.V1p @ Q1p + inst.V2p @ P2p
    Sb = dec.V2b @ M2b + inst.V2p @ M2p
    s_cols = hstack(Sa, Sb, dec.V1c, dec.V2c)
    cost = s_cols.cols
    fld = inst.field

    # user 1: W1a = Sa + W1'(P1' - Q1'),  W1b = Sb + W1' M1',  W1c = S1c
    n1abc = n1a + nb + n1c
    E1 = np.zeros((cost, n1abc), dtype=np.int64)
    E1 += _selector(p, cost, n1abc, 0, n1a)
    E1 += _selector(p, cost, n1abc, n1a, nb, n1a)
    E1 += _selector(p, cost, n1abc, n1a + nb, n1c, n1a + nb)
    F1 = np.zeros((n1p, n1abc), dtype=np.int64)
    F1[:, :n1a] = (P1p - Q1p).data
    F1[:, n1a : n1a + nb] = M1p.data
    T1 = gf.solve(hstack(dec.V1a, dec.V1b, dec.V1c), inst.V1)

    # user 2: [W2a, 0] = Sa + W2'(Q2' - P2'),  W2b = (Sb - W2' M2') M2b^-1,  W2c = S2c
    n2abc = n2a + nb + n2c
    M2b_inv = gf.inverse(M2b) if nb else FieldMatrix.zeros(fld, 0, 0)
    E2 = np.zeros((cost, n2abc), dtype=np.int64)
    E2 += _selector(p, cost, n2abc, 0, n2a)
    if nb:
        E2[n1a : n1a + nb, n2a : n2a + nb] = M2b_inv.data
    E2 += _selector(p, cost, n2abc, n1a + nb + n1c, n2c, n2a + nb)
    F2 = np.zeros((n2p, n2abc), dtype=np.int64)
    F2[:, :n2a] = (Q2p - P2p).data[:, :n2a]
    if nb:
        F2[:, n2a : n2a + nb] = (-(M2p @ M2b_inv)).data
    T2 = gf.solve(hstack(dec.V2a, dec.V2b, dec.V2c), inst.V2)

    def compose(E, F, T, recon, n_red, n_side):
        # [S | W'] -> reduced demand -> original demand
        top = FieldMatrix(fld, E) @ T
        bottom = FieldMatrix(fld, F) @ T
        R_red = FieldMatrix(fld, recon.data[:n_red])
        R_side = FieldMatrix(fld, recon.data[n_red : n_red + n_side])
        return vstack(top @ R_red, bottom @ R_red + R_side)

    d1 = compose(E1, F1, T1, norm.reconstruct1, inst.V1.cols, n1p)
    d2 = compose(E2, F2, T2, norm.reconstruct2, inst.V2.cols, n2p)
    segments = {"a": n1a, "b": nb, "c": n1c + n2c}
    return s_cols, d1, d2, {"segments": segments, "decomposition": dec}


def build_scheme(inst: LinearCBInstance) -> tuple[LinearScheme, BoundsReport]:
    """Construct the optimal linear scheme and its capacity report.

    Users are swapped internally when the a-part of user 1 is smaller than
    user 2's; the scheme's ``orientation`` records it and the decode maps are
    always returned for the caller's user labels.
    """
    norm = normalize(inst)
    probe = decompose(norm.inst)
    swapped = probe.n1a < probe.n2a
    if swapped:
        snorm = Normalized(norm.inst.swapped(), norm.reconstruct2, norm.reconstruct1)
        s_cols, d2, d1, info = _build_oriented(snorm)
    else:
        s_cols, d1, d2, info = _build_oriented(norm)
    scheme = LinearScheme(s_cols, d1, d2, info["segments"], "swapped" if swapped else "normal")

    h12 = rank(hstack(inst.V1, inst.V2))
    cost = scheme.cost_symbols
    report = BoundsReport(
        h_w1w2=float(h12),
        converse_cost_lb=float(converse_denominator(inst)),
        capacity_ub=None,
        achiev_cost_ub=float(cost),
        unit="symbols",
    )
    report.tight = cost == converse_denominator(inst)
    if h12 == 0:
        report.notes.append("degenerate demand: H(w1,w2) = 0, capacity ratio undefined")
        return scheme, report
    if cost == 0:
        report.notes.append("side information already determines both demands: cost 0, rate unbounded")
        report.capacity_ub = report.capacity_lb = float("inf")
        return scheme, report
    report.capacity_exact = Fraction(h12, cost)
    report.capacity_ub = h12 / report.converse_cost_lb
    report.capacity_lb = h12 / cost
    return scheme, report


def capacity(inst: LinearCBInstance) -> Fraction:
    """Exact capacity H(W1, W2) / cost as a rational.

    Raises:
        DegenerateDemand: if H(w1, w2) = 0 or the cost is 0.
    """
    _, report = build_scheme(inst)
    if report.capacity_exact is None:
        raise DegenerateDemand("; ".join(report.notes))
    return report.capacity_exact


# verification ---------------------------------------------------------------


@dataclass
class VerificationReport:
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def verify_scheme(inst: LinearCBInstance, scheme: LinearScheme) -> VerificationReport:
    """Check a scheme against the decoding constraints by rank arithmetic."""
    s = scheme.s_cols
    checks = {}
    checks["user1_span"] = gf.in_span(inst.V1, hstack(s, inst.V1p)) if inst.V1.cols else True
    checks["user2_span"] = gf.in_span(inst.V2, hstack(s, inst.V2p)) if inst.V2.cols else True
    checks["no_redundancy"] = rank(s) == scheme.cost_symbols
    checks["meets_converse"] = scheme.cost_symbols == converse_denominator(inst)

    def decodes(D, Vp, V):
        A = hstack(s, Vp)
        return D.shape == (A.cols, V.cols) and (A @ D) == V

    checks["decode1_exact"] = decodes(scheme.decode1, inst.V1p, inst.V1)
    checks["decode2_exact"] = decodes(scheme.decode2, inst.V2p, inst.V2)
    return VerificationReport(checks)


def random_instance(rng: np.random.Generator, p: int, m: int, max_cols: int | None = None) -> LinearCBInstance:
    """Random instance with each of the four matrices having 0..max_cols columns."""
    max_cols = m if max_cols is None else max_cols
    mats = [gf.random_matrix(p, m, int(rng.integers(0, max_cols + 1)), rng) for _ in range(4)]
    return LinearCBInstance(PrimeField(p), m, *mats)
