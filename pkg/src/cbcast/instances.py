"""JSON instance files: parsing with located errors, serialization, bundled library."""

from __future__ import annotations

import json
import os
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .distributions import GeneralCBInstance
from .errors import InvariantError, ParseError
from .gf import FieldMatrix, PrimeField
from .lcb import LinearCBInstance
from .matching import MatchingInstance, Permutation

VAR_KEYS = ("w1", "w1p", "w2", "w2p")


def _label(v):
    # JSON arrays become tuples so labels stay hashable
    return tuple(_label(x) for x in v) if isinstance(v, list) else v


def _require(obj: dict, key: str, ptr: str):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", ptr)
    if key not in obj:
        raise ParseError(f"missing field {key!r}", ptr)
    return obj[key]


def _int(v, ptr: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"expected an integer, got {v!r}", ptr)
    return v


def _columns(v, m: int, ptr: str) -> list[list[int]]:
    if not isinstance(v, list):
        raise ParseError("expected a list of columns", ptr)
    out = []
    for j, col in enumerate(v):
        if not isinstance(col, list) or len(col) != m:
            raise ParseError(f"column must be a list of length m={m}", f"{ptr}/{j}")
        out.append([_int(x, f"{ptr}/{j}/{i}") for i, x in enumerate(col)])
    return out


def _fraction(v, ptr: str) -> Fraction:
    try:
        if isinstance(v, bool):
            raise ValueError
        if isinstance(v, float):
            raise ParseError("probabilities must be exact: use a \"num/den\" string", ptr)
        return Fraction(v)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ParseError(f"not a rational number: {v!r}", ptr) from None


def parse_linear(obj: dict) -> LinearCBInstance:
    p = _int(_require(obj, "field", ""), "/field")
    m = _int(_require(obj, "m", ""), "/m")
    if m < 0:
        raise ParseError("m must be non-negative", "/m")
    try:
        fld = PrimeField(p)
    except ValueError as exc:
        raise InvariantError(str(exc)) from None
    mats = {k: FieldMatrix.from_columns(fld, _columns(_require(obj, k, ""), m, f"/{k}"), rows=m) for k in ("V1", "V1p", "V2", "V2p")}
    return LinearCBInstance(fld, m, mats["V1"], mats["V1p"], mats["V2"], mats["V2p"], name=obj.get("name", ""))


def parse_general(obj: dict) -> GeneralCBInstance:
    alph = _require(obj, "alphabets", "")
    alphabets = []
    for k in VAR_KEYS:
        labels = _require(alph, k, "/alphabets")
        if not isinstance(labels, list) or not labels:
            raise ParseError("alphabet must be a non-empty list", f"/alphabets/{k}")
        alphabets.append(tuple(_label(x) for x in labels))
    pmf = _require(obj, "pmf", "")
    if not isinstance(pmf, list):
        raise ParseError("expected a list of atoms", "/pmf")
    atoms, probs = [], []
    for i, entry in enumerate(pmf):
        ptr = f"/pmf/{i}"
        atoms.append(tuple(_label(_require(entry, k, ptr)) for k in VAR_KEYS))
        probs.append(_fraction(_require(entry, "p", ptr), f"{ptr}/p"))
    return GeneralCBInstance(tuple(alphabets), tuple(atoms), tuple(probs), name=obj.get("name", ""))


def parse_matching(obj: dict) -> MatchingInstance:
    m = _int(_require(obj, "m", ""), "/m")
    m1 = _int(_require(obj, "m1", ""), "/m1")
    m2 = _int(_require(obj, "m2", ""), "/m2")
    pi = _require(obj, "pi", "")
    if not isinstance(pi, list) or len(pi) != m1:
        raise ParseError(f"expected {m1} rows", "/pi")
    table = []
    for a, row in enumerate(pi):
        if not isinstance(row, list) or len(row) != m2:
            raise ParseError(f"expected {m2} entries", f"/pi/{a}")
        out_row = []
        for b, perm in enumerate(row):
            ptr = f"/pi/{a}/{b}"
            if not isinstance(perm, list) or len(perm) != m:
                raise ParseError(f"expected a permutation of length {m}", ptr)
            vals = [_int(x, f"{ptr}/{k}") for k, x in enumerate(perm)]
            if sorted(vals) != list(range(1, m + 1)):
                raise InvariantError(f"{ptr}: {vals} is not a bijection on 1..{m}")
            out_row.append(Permutation.from_one_indexed(vals))
        table.append(out_row)
    return MatchingInstance(m, m1, m2, table, name=obj.get("name", ""))


PARSERS = {"linear": parse_linear, "general": parse_general, "matching": parse_matching}


def parse_obj(obj):
    kind = _require(obj, "type", "")
    if kind not in PARSERS:
        raise ParseError(f"unknown instance type {kind!r}; expected one of {sorted(PARSERS)}", "/type")
    return PARSERS[kind](obj)


def parse_text(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_obj(obj)


def parse_instance(path):
    """Load an instance file; falls back to the bundled library for unknown paths."""
    p = resolve_path(path)
    try:
        text = Path(p).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"file is not UTF-8: {exc}") from None
    return parse_text(text)


# serialization ---------------------------------------------------------------


def _jsonable(label):
    return list(_jsonable(x) for x in label) if isinstance(label, tuple) else label


def to_json(inst) -> dict:
    if isinstance(inst, LinearCBInstance):
        return {
            "type": "linear",
            "name": inst.name,
            "field": inst.p,
            "m": inst.m,
            **{k: getattr(inst, k).columns() for k in ("V1", "V1p", "V2", "V2p")},
        }
    if isinstance(inst, GeneralCBInstance):
        return {
            "type": "general",
            "name": inst.name,
            "alphabets": {k: [_jsonable(x) for x in a] for k, a in zip(VAR_KEYS, inst.alphabets)},
            "pmf": [
                {**{k: _jsonable(v) for k, v in zip(VAR_KEYS, atom)}, "p": f"{p.numerator}/{p.denominator}"}
                for atom, p in zip(inst.atoms, inst.probs)
            ],
        }
    if isinstance(inst, MatchingInstance):
        return {"type": "matching", "name": inst.name, "m": inst.m, "m1": inst.m1, "m2": inst.m2, "pi": inst.table_one_indexed()}
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def dumps(inst) -> str:
    return json.dumps(to_json(inst), indent=1, sort_keys=True)


# bundled library -------------------------------------------------------------


def bundled_dir():
    return resources.files("cbcast") / "data"


def bundled_names() -> list[str]:
    manifest = json.loads((bundled_dir() / "manifest.json").read_text(encoding="utf-8"))
    return sorted(manifest)


def manifest() -> dict:
    return json.loads((bundled_dir() / "manifest.json").read_text(encoding="utf-8"))


def load_bundled(name: str):
    stem = name[:-5] if name.endswith(".json") else name
    return parse_text((bundled_dir() / f"{stem}.json").read_text(encoding="utf-8"))


def resolve_path(path) -> str:
    """Return ``path`` if it exists, else the bundled file with the same base name."""
    path = os.fspath(path)
    if os.path.exists(path):
        return path
    candidate = bundled_dir() / os.path.basename(path)
    if candidate.is_file():
        return str(candidate)
    raise FileNotFoundError(f"no such instance file: {path}")
