"""Command-line front end: ``cbcast <command> [options]``.

Exit codes: 0 success, 1 analysis error, 2 parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import binning, distributions, instances, lcb, library, matching, oracle
from .distributions import GeneralCBInstance
from .errors import CBError, InvariantError, ParseError
from .lcb import LinearCBInstance
from .matching import MatchingInstance

EXIT_OK, EXIT_ANALYSIS, EXIT_PARSE = 0, 1, 2
ORACLE_AUTO_ATOMS = 64


class AnalysisError(CBError):
    pass


def _default_seed() -> int:
    try:
        return int(os.environ.get("CBCAST_SEED", "0"))
    except ValueError:
        return 0


def _frac(x: Fraction | None) -> str | None:
    return None if x is None else f"{x.numerator}/{x.denominator}"


def _clean(obj):
    """Replace non-finite floats so the JSON output stays strict."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def emit(payload: dict, as_json: bool, out=None):
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(_clean(payload), sort_keys=True) + "\n")
        return
    width = max((len(k) for k in payload), default=0)
    for k, v in payload.items():
        if isinstance(v, float):
            v = f"{v:.6f}"
        elif isinstance(v, (dict, list)):
            v = json.dumps(_clean(v), sort_keys=True)
        out.write(f"{k.ljust(width)}  {v}\n")


def _as_general(inst) -> GeneralCBInstance:
    if isinstance(inst, GeneralCBInstance):
        return inst
    if isinstance(inst, MatchingInstance):
        return matching.to_general(inst)
    return distributions.from_linear(inst)


# commands --------------------------------------------------------------------


def linear_summary(inst: LinearCBInstance) -> dict:
    scheme, report = lcb.build_scheme(inst)
    ver = lcb.verify_scheme(inst, scheme)
    dec = lcb.decompose(lcb.normalize(inst).inst)
    return {
        "type": "linear",
        "name": inst.name,
        "field": inst.p,
        "cost_symbols": scheme.cost_symbols,
        "converse_symbols": lcb.converse_denominator(inst),
        "h_w1w2_symbols": int(report.h_w1w2),
        "capacity": _frac(report.capacity_exact),
        "tight": report.tight,
        "orientation": scheme.orientation,
        "partition": dec.counts(),
        "verification": ver.checks,
        "notes": report.notes,
    }


def cmd_analyze(inst, args) -> dict:
    if isinstance(inst, LinearCBInstance):
        return linear_summary(inst)
    if isinstance(inst, MatchingInstance):
        c = matching.classify(inst)
        return {"type": "matching", "name": inst.name, **matching.bounds(inst, c).to_json()}
    prof = distributions.entropy_profile(inst)
    out = {"type": "general", "name": inst.name, "entropy_profile_bits": prof.as_named()}
    out.update(cmd_bounds(inst, args))
    return out


def cmd_solve(inst, args) -> dict:
    if not isinstance(inst, LinearCBInstance):
        raise AnalysisError("solve constructs linear schemes; use bounds or simulate for other instance types")
    scheme, report = lcb.build_scheme(inst)
    ver = lcb.verify_scheme(inst, scheme)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(scheme.to_json(), sort_keys=True, indent=1) + "\n")
    out = linear_summary(inst)
    out["scheme"] = scheme.to_json()
    if not ver.passed:
        raise AnalysisError(f"emitted scheme failed verification: {ver.failed()}")
    return out


def cmd_classify(inst, args) -> dict:
    if not isinstance(inst, MatchingInstance):
        raise AnalysisError("classify applies to matching instances only")
    c = matching.classify(inst, cap=args.cap)
    return {"class": c.cls, "cycles_checked": c.cycles_checked, "witness": c.witness, "note": c.note}


def cmd_bounds(inst, args) -> dict:
    if isinstance(inst, MatchingInstance):
        return matching.bounds(inst).to_json()
    if isinstance(inst, LinearCBInstance):
        _, report = lcb.build_scheme(inst)
        out = report.to_json()
        out["tight"] = report.tight
        return out
    report = distributions.converse_bound(inst)
    out = report.to_json()
    notes = ["capacity open: only the converse upper bound and a single-letter lower bound are known"]
    if len(inst.atoms) <= ORACLE_AUTO_ATOMS:
        orc = oracle.brute_capacity_L1(inst, node_budget=getattr(args, "cap", None) or oracle.DEFAULT_NODE_BUDGET)
        out["capacity_lb"] = orc.r1
        out["achiev_cost_ub"] = orc.h_bits
        out["single_letter_optimal"] = orc.optimal
    out["tight"] = False
    out["notes"] = notes
    return out


def cmd_oracle(inst, args) -> dict:
    g = _as_general(inst)
    budget = args.cap or oracle.DEFAULT_NODE_BUDGET
    return oracle.brute_capacity_L1(g, node_budget=budget).to_json()


def cmd_simulate(inst, args) -> dict:
    seed = args.seed if args.seed is not None else _default_seed()
    if inst is None:
        if args.n1 is None or args.n2 is None:
            raise AnalysisError("simulate needs an instance path or both --n1 and --n2")
        cfg = binning.BinningConfig(args.n1, args.n2, args.L, args.delta, args.trials, seed)
        res = binning.simulate_binning(cfg, workers=args.workers)
        return {**res.to_json(), "L": args.L, "seed": seed}
    if not isinstance(inst, MatchingInstance):
        raise AnalysisError("simulate runs matching instances or plain binning (--n1/--n2)")
    fallback = 8 * args.L + 1 if inst.name == "CB2" else None
    res = binning.run_matching_scheme(
        inst, args.L, args.trials, seed, delta=args.delta, fallback_bits=fallback,
        inject_failure=args.inject_failure, workers=args.workers,
    )
    return res.to_json()


# selftest --------------------------------------------------------------------


def golden_checks() -> list[tuple[str, bool, str]]:
    """Recompute the reference values; returns (label, passed, detail)."""
    rows = []

    def check(label, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed selftest
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((label, bool(ok), detail))

    sec3 = library.lcb_sec3()

    def sec3_cost():
        s, _ = lcb.build_scheme(sec3)
        return s.cost_symbols == 4, f"cost {s.cost_symbols} symbols"

    def sec3_capacity():
        _, r = lcb.build_scheme(sec3)
        return r.capacity_exact == Fraction(7, 4), f"capacity {_frac(r.capacity_exact)} (reference 7/4)"

    def sec3_partition():
        d = lcb.decompose(lcb.normalize(sec3).inst).counts()
        return d == {"n1a": 1, "n1b": 2, "n1c": 1, "n2a": 1, "n2b": 2, "n2c": 0}, str(d)

    def example2_capacity():
        s, r = lcb.build_scheme(library.example2())
        return s.cost_symbols == 1 and r.capacity_exact == 2, f"cost {s.cost_symbols}, capacity {_frac(r.capacity_exact)}"

    def butterfly_capacity():
        r = distributions.converse_bound(distributions.from_linear(library.butterfly()))
        return abs(r.converse_cost_lb - 1) < 1e-9 and abs(r.capacity_ub - 2) < 1e-9, f"cost {r.converse_cost_lb:.6f}, capacity_ub {r.capacity_ub:.6f}"

    def andor_single_letter():
        r = oracle.brute_capacity_L1(library.andor())
        want = 2 - 0.75 * math.log2(3)
        return abs(r.h_bits - want) < 1e-9 and r.r1 < r.capacity_ub, f"h {r.h_bits:.6f}, R1 {r.r1:.4f} < {r.capacity_ub:.4f}"

    def andor_converse():
        r = distributions.converse_bound(library.andor())
        return abs(r.converse_cost_lb - 0.5) < 1e-9, f"converse {r.converse_cost_lb:.6f} bits"

    def cb_profiles():
        a = distributions.entropy_profile(matching.to_general(matching.cb1()))
        b = distributions.entropy_profile(matching.to_general(matching.cb2()))
        return a.max_abs_diff(b) <= 1e-9, f"max diff {a.max_abs_diff(b):.2e}"

    def cb1_bounds():
        r = matching.bounds(matching.cb1())
        return r.cls == "maximal" and abs(r.hstar_ub_bits - 2) < 1e-9, f"{r.cls}, H* {r.hstar_ub_bits:.6f}"

    def cb2_bounds():
        r = matching.bounds(matching.cb2())
        want = 4 - math.log2(3)
        return r.cls == "minimal" and abs(r.hstar_lb_bits - want) < 1e-9, f"{r.cls}, H* {r.hstar_lb_bits:.6f}"

    def cb1_oracle():
        r = oracle.brute_capacity_L1(matching.to_general(matching.cb1()))
        return abs(r.h_bits - 2) < 1e-9 and r.optimal, f"h {r.h_bits:.6f}, optimal {r.optimal}"

    def gap_4x3():
        return matching.cost_gap(4, 3) == 1.0, f"gap {matching.cost_gap(4, 3)}"

    check("linear example: cost 4 symbols", sec3_cost)
    check("linear example: capacity 7/4", sec3_capacity)
    check("linear example: a/b/c sizes 1,2,1 / 1,2,0", sec3_partition)
    check("minimal linear dependence: capacity 2", example2_capacity)
    check("butterfly: capacity 2", butterfly_capacity)
    check("AND/OR: converse 0.5 bits", andor_converse)
    check("AND/OR: single-letter optimum 2 - 0.75 log2 3", andor_single_letter)
    check("CB1 and CB2 share all 15 entropies", cb_profiles)
    check("CB1: maximal, H* = 2", cb1_bounds)
    check("CB2: minimal, H* = 4 - log2 3", cb2_bounds)
    check("CB1: single-letter optimum 2 bits", cb1_oracle)
    check("4 x 3 grid: gap term 1 bit", gap_4x3)
    return rows


def cmd_selftest(args) -> tuple[dict, int]:
    rows = golden_checks()
    payload = {label: ("PASS" if ok else "FAIL") + f"  {detail}" for label, ok, detail in rows}
    code = EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_ANALYSIS
    return payload, code


# argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cbcast", description="Two-user computation broadcast analysis.")
    ap.add_argument("--json", action="store_true", help="machine-readable output with sorted keys")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_path(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("path", help="instance JSON file (bundled names such as examples/cb2.json also work)")
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        return p

    with_path("analyze", "full report for any instance type")
    p = with_path("solve", "build and verify the optimal linear scheme")
    p.add_argument("--emit", metavar="OUT", help="write the scheme JSON here")
    p = with_path("classify", "maximal / minimal / neither for matching instances")
    p.add_argument("--cap", type=int, default=matching.DEFAULT_CYCLE_CAP, help="cycle budget")
    p = with_path("bounds", "converse and achievability bounds")
    p.add_argument("--cap", type=int, default=None, help="oracle node budget for general instances")
    p = with_path("oracle", "single-letter optimum by exhaustive coloring")
    p.add_argument("--cap", type=int, default=None, help="node budget")

    p = sub.add_parser("simulate", help="Monte-Carlo binning or bullet-set scheme")
    p.add_argument("path", nargs="?", help="matching instance; omit to simulate plain binning")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--L", type=int, default=100)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=None, help="defaults to $CBCAST_SEED or 0")
    p.add_argument("--delta", type=float, default=None, help="defaults to 1/sqrt(L)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--inject-failure", action="store_true", help="force the uncoded fallback")

    p = sub.add_parser("selftest", help="recompute the reference values")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    return ap


COMMANDS = {
    "analyze": cmd_analyze,
    "solve": cmd_solve,
    "classify": cmd_classify,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            payload, code = cmd_selftest(args)
            emit(payload, args.json)
            return code
        inst = None
        if getattr(args, "path", None):
            inst = instances.parse_instance(args.path)
        payload = COMMANDS[args.command](inst, args)
    except (ParseError, InvariantError, FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CBError, ValueError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    emit(payload, args.json)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
