"""Reference instances, built in code so the bundled JSON files can be checked against them."""

from __future__ import annotations

from .distributions import GeneralCBInstance, uniform_instance
from .lcb import LinearCBInstance
from .matching import MatchingInstance, cb1, cb2


def _e(m: int, *terms: tuple[int, int]) -> list[int]:
    """Coefficient column: ``_e(7, (1, 1), (2, 2))`` is e1 + 2 e2 (1-indexed axes)."""
    v = [0] * m
    for coeff, axis in terms:
        v[axis - 1] = coeff
    return v


def lcb_sec3() -> LinearCBInstance:
    """Seven basis symbols over GF(3); the running linear example."""
    e = lambda *t: _e(7, *t)  # noqa: E731
    V1p = [e((1, 1)), e((1, 3))]
    V1 = [e((1, 1), (2, 2)), e((1, 3), (1, 5)), e((1, 1), (1, 4), (1, 6)), e((1, 7))]
    V2p = [e((1, 2)), e((1, 4))]
    V2 = [e((2, 1), (1, 2)), e((1, 5)), e((1, 2), (1, 4), (2, 6))]
    return LinearCBInstance.from_columns(3, 7, V1, V1p, V2, V2p, name="lcb_sec3")


def example2(p: int = 3) -> LinearCBInstance:
    """w1 + w2 + w1' + w2' = 0 with any three of them free and uniform."""
    neg = p - 1
    return LinearCBInstance.from_columns(p, 3, [[1, 0, 0]], [[0, 1, 0]], [[0, 0, 1]], [[neg, neg, neg]], name="example2")


def butterfly() -> LinearCBInstance:
    """User 1 wants A and holds B; user 2 wants B and holds A (GF(2))."""
    return LinearCBInstance.from_columns(2, 2, [[1, 0]], [[0, 1]], [[0, 1]], [[1, 0]], name="butterfly")


def andor() -> GeneralCBInstance:
    """A, B uniform bits; user 1 holds A and wants A or B, user 2 holds B and wants A and B."""
    rows = [(a | b, a, a & b, b) for a in (0, 1) for b in (0, 1)]
    return uniform_instance(rows, name="andor")


def ternary_andor() -> GeneralCBInstance:
    """Ternary A, B; OR is 0 only at (0,0), AND is 1 only at (1,1)."""
    rows = [(int((a, b) != (0, 0)), a, int((a, b) == (1, 1)), b) for a in range(3) for b in range(3)]
    return uniform_instance(rows, name="ternary_andor")


BUILDERS = {
    "lcb_sec3": lcb_sec3,
    "example2": example2,
    "butterfly": butterfly,
    "andor": andor,
    "ternary_andor": ternary_andor,
    "cb1": cb1,
    "cb2": cb2,
}

LOCATIONS = {
    "lcb_sec3": "worked linear example: seven basis symbols over GF(3), cost 4 symbols",
    "example2": "minimal linear dependence w1+w2+w1'+w2'=0 over GF(3)",
    "butterfly": "butterfly network: each user holds the other's message",
    "andor": "binary AND/OR toy problem with a single-letter gap",
    "ternary_andor": "ternary AND/OR variant whose capacity is open",
    "cb1": "matching instance with shift table [[0,1],[2,3]] on Z4 (maximal)",
    "cb2": "matching instance with shift table [[0,1],[3,2]] on Z4 (minimal)",
}


def build(name: str):
    return BUILDERS[name]()


def is_instance(obj) -> bool:
    return isinstance(obj, (LinearCBInstance, GeneralCBInstance, MatchingInstance))
