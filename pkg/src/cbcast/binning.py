"""Seeded Monte-Carlo of random binning and the bullet-set broadcast schemes.

Random binning hashes every one of the ``n1**L`` candidate tuples into ``B``
bins and conveys the position, inside bin 0, of one tuple from an acceptable
subset of ``n2**L`` tuples.  When ``n1**L`` is small every tuple is hashed and
counted exactly; otherwise bin occupancies are drawn from their exact
binomial laws (Poisson or normal limits once the counts are astronomically
large).

Reproducibility: trial ``i`` draws only from ``SeedSequence(seed,
spawn_key=(i,))``, so results are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import matching as mt
from .errors import DegenerateConfig

EXACT_LIMIT = 10**6
BINOMIAL_LIMIT = 1 << 62
POISSON_LIMIT = 1e6

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def splitmix64(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def trial_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(i),)))


# configuration -------------------------------------------------------------


@dataclass(frozen=True)
class BinningConfig:
    n1: int
    n2: int
    L: int
    delta: float | None = None
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("block length L must be at least 1")
        if not 1 <= self.n2 < self.n1:
            raise DegenerateConfig(f"need 1 <= n2 < n1, got n1={self.n1}, n2={self.n2}")
        if self.delta is None:
            object.__setattr__(self, "delta", 1 / math.sqrt(self.L))
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.bins < 1:
            raise DegenerateConfig(f"n2^(L(1-delta)) rounds to {self.bins} bins")

    @property
    def bin_exponent(self) -> float:
        """``L(1-delta)``, the exponent of n2 giving the bin count."""
        return self.L * (1 - self.delta)

    @property
    def bins(self) -> int:
        e = self.bin_exponent
        if abs(e - round(e)) < 1e-9 and round(e) >= 0:
            return self.n2 ** int(round(e))
        x = e * math.log2(self.n2)
        if x < 52:
            return int(round(2.0**x))
        whole = int(math.floor(e))
        return int(round(self.n2 ** (e - whole) * 2**40)) * self.n2**whole >> 40

    @property
    def log2_bins(self) -> float:
        e = self.bin_exponent
        if abs(e - round(e)) < 1e-9:
            return round(e) * math.log2(self.n2)
        return math.log2(self.bins)

    @property
    def log2_mu1(self) -> float:
        """log2 of the expected bin-0 occupancy ``n1**L / B``."""
        return self.L * math.log2(self.n1) - self.log2_bins

    @property
    def log2_mu2(self) -> float:
        """log2 of the expected number of acceptable tuples in bin 0."""
        return self.L * math.log2(self.n2) - self.log2_bins

    @property
    def exact(self) -> bool:
        return self.n1**self.L <= EXACT_LIMIT

    def position_bits(self) -> float:
        """Bits to name a position inside an unsaturated bin: log2((1+delta) mu1)."""
        return math.log2(1 + self.delta) + self.log2_mu1

    def bits_per_symbol(self) -> float:
        return self.position_bits() / self.L

    def chebyshev_bound(self) -> float:
        """Overflow plus empty-bin failure bound, evaluated in log space."""
        d2 = 2 * math.log2(self.delta)
        B = self.bins
        t1 = 0.0 if B <= 1 else 2.0 ** (math.log2(B - 1) - d2 - self.L * math.log2(self.n1))
        e = self.bin_exponent
        inv_b = 2.0 ** (-e * math.log2(self.n2)) if e * math.log2(self.n2) < 1000 else 0.0
        t2 = (1 - inv_b) * 2.0 ** (-d2 - self.L * self.delta * math.log2(self.n2))
        return t1 + t2

    def overflow_threshold(self) -> float:
        return (1 + self.delta) * 2.0**self.log2_mu1 if self.log2_mu1 < 1000 else math.inf


# occupancy draws -----------------------------------------------------------


def _draw_count(rng: np.random.Generator, log2_n: float, n_exact: int | None, log2_b: float, b: int) -> tuple[float, float]:
    """Sample a Binomial(N, 1/B) count; returns (count or nan, deviation / 2**log2_n * B).

    The second value is the deviation from the mean scaled by the mean, which
    stays finite when counts do not fit in a float.
    """
    log2_mu = log2_n - log2_b
    if n_exact is not None and n_exact < BINOMIAL_LIMIT and b < BINOMIAL_LIMIT:
        c = int(rng.binomial(n_exact, 1.0 / b))
        mu = n_exact / b
        return float(c), (c - mu) / mu if mu > 0 else 0.0
    if log2_mu <= math.log2(POISSON_LIMIT):
        mu = 2.0**log2_mu
        c = int(rng.poisson(mu))
        return float(c), (c - mu) / mu
    # relative normal limit: sd / mean = sqrt((1 - 1/B) / mu)
    z = float(rng.standard_normal())
    rel = z * 2.0 ** (-log2_mu / 2) * math.sqrt(max(0.0, 1 - 2.0**-log2_b))
    return math.nan, rel


@dataclass
class BinOutcome:
    failed: bool
    overflow: bool
    empty: bool
    chosen: np.ndarray | None = None  # per-coordinate acceptable choice, when known


def _statistical_trial(cfg: BinningConfig, rng: np.random.Generator) -> BinOutcome:
    n1L = cfg.n1**cfg.L if cfg.L * math.log2(cfg.n1) < 62 else None
    n2L = cfg.n2**cfg.L if cfg.L * math.log2(cfg.n2) < 62 else None
    b = cfg.bins
    t2, rel2 = _draw_count(rng, cfg.L * math.log2(cfg.n2), n2L, cfg.log2_bins, b)
    log2_rest = cfg.L * math.log2(cfg.n1) + math.log2(1 - (cfg.n2 / cfg.n1) ** cfg.L)
    rest_exact = None if n1L is None or n2L is None else n1L - n2L
    r, rel_r = _draw_count(rng, log2_rest, rest_exact, cfg.log2_bins, b)
    if math.isnan(t2):
        empty = False  # mean is astronomically large
    else:
        empty = t2 == 0
    # (T1 - mu1) / mu1 = (rel2 * mu2 + rel_r * mu_rest) / mu1
    w2 = 2.0 ** (cfg.log2_mu2 - cfg.log2_mu1)
    rel1 = rel2 * w2 + rel_r * (1 - w2)
    overflow = rel1 >= cfg.delta
    return BinOutcome(empty or overflow, overflow, empty)


def _exact_trial(cfg: BinningConfig, rng: np.random.Generator, accept: np.ndarray) -> BinOutcome:
    """Hash every tuple; ``accept`` is an (L, n1) boolean table of acceptable symbols."""
    N = cfg.n1**cfg.L
    key = np.uint64(int(rng.integers(0, 2**63)))
    idx = np.arange(N, dtype=np.uint64)
    bin_of = splitmix64(idx ^ key) % np.uint64(cfg.bins)
    in_bin = np.nonzero(bin_of == 0)[0]
    digits = _digits(in_bin, cfg.n1, cfg.L)
    ok = np.all(accept[np.arange(cfg.L), digits], axis=1) if in_bin.size else np.zeros(0, dtype=bool)
    t1, t2 = int(in_bin.size), int(ok.sum())
    overflow = t1 >= cfg.overflow_threshold()
    empty = t2 == 0
    if overflow or empty:
        return BinOutcome(True, overflow, empty)
    # encoder: smallest acceptable tuple in bin 0, sent as its rank in the bin
    rank = int(np.argmax(ok))
    # decoder: bin 0 is public (shared hash key), so the rank names the tuple
    decoded = int(in_bin[rank])
    chosen = _digits(np.array([decoded]), cfg.n1, cfg.L)[0]
    assert np.all(accept[np.arange(cfg.L), chosen]), "decoded tuple is not acceptable"
    return BinOutcome(False, False, False, chosen)


def _digits(idx: np.ndarray, base: int, L: int) -> np.ndarray:
    out = np.empty((idx.size, L), dtype=np.int64)
    x = idx.astype(np.int64)
    for l in range(L):
        out[:, l] = x % base
        x = x // base
    return out


# plain binning ---------------------------------------------------------------


@dataclass
class BinningResult:
    empirical_error: float
    overflow_rate: float
    empty_rate: float
    bits_per_symbol: float
    chebyshev_bound: float
    trials: int
    mode: str
    bins_log2: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _map_trials(fn, trials: int, workers: int):
    if workers <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(trials)))


def simulate_binning(cfg: BinningConfig, workers: int = 1) -> BinningResult:
    """Binning failure statistics against the Chebyshev bound.

    Each coordinate accepts a random ``n2``-subset of its ``n1`` symbols.

    Raises:
        DegenerateConfig: via the config when fewer than one bin remains.
    """

    def one(i: int) -> BinOutcome:
        rng = trial_rng(cfg.seed, i)
        if cfg.exact:
            accept = np.zeros((cfg.L, cfg.n1), dtype=bool)
            for l in range(cfg.L):
                accept[l, rng.choice(cfg.n1, cfg.n2, replace=False)] = True
            return _exact_trial(cfg, rng, accept)
        return _statistical_trial(cfg, rng)

    outs = _map_trials(one, cfg.trials, workers)
    t = cfg.trials
    return BinningResult(
        empirical_error=sum(o.failed for o in outs) / t,
        overflow_rate=sum(o.overflow for o in outs) / t,
        empty_rate=sum(o.empty for o in outs) / t,
        bits_per_symbol=cfg.bits_per_symbol(),
        chebyshev_bound=cfg.chebyshev_bound(),
        trials=t,
        mode="exact" if cfg.exact else "statistical",
        bins_log2=cfg.log2_bins,
    )


# end-to-end schemes -----------------------------------------------------------


@dataclass
class SchemeRunResult:
    bits_per_symbol_mean: float
    bits_per_symbol_std: float
    decode_errors: int
    binning_failure_rate: float
    chebyshev_bound: float | None
    L: int
    trials: int
    seed: int
    mode: str = ""
    translations_used: list[int] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "bits_per_symbol_mean": self.bits_per_symbol_mean,
            "bits_per_symbol_std": self.bits_per_symbol_std,
            "decode_errors": self.decode_errors,
            "binning_failure_rate": self.binning_failure_rate,
            "chebyshev_bound": self.chebyshev_bound,
            "L": self.L,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.mode:
            out["mode"] = self.mode
        out.update(self.extra)
        return out


class _Tables:
    """Per-translation delta, delta^-1 and gamma lookup arrays."""

    def __init__(self, inst: mt.MatchingInstance):
        self.sets = mt.all_translations(inst.m1, inst.m2)
        n1, m = len(self.sets), inst.m
        self.D = np.empty((n1, inst.m1, m), dtype=np.int64)
        self.Dinv = np.empty_like(self.D)
        self.G = np.empty((n1, inst.m2, m), dtype=np.int64)
        for t, bs in enumerate(self.sets):
            dg = mt.build_delta_gamma(inst, bs)
            for a, d in enumerate(dg.deltas):
                self.D[t, a] = d.as_array()
                self.Dinv[t, a] = d.inverse().as_array()
            for b, g in enumerate(dg.gammas):
                self.G[t, b] = g.as_array()
        # acceptable translations per cell, in translation order
        self.acc = np.empty((inst.m1, inst.m2, inst.m1 + inst.m2 - 1), dtype=np.int64)
        self.member = np.zeros((inst.m1, inst.m2, n1), dtype=bool)
        for a in range(inst.m1):
            for b in range(inst.m2):
                ts = [t for t, bs in enumerate(self.sets) if (a, b) in bs.cells]
                self.acc[a, b] = ts
                self.member[a, b, ts] = True
        pi = np.empty((inst.m1, inst.m2, m), dtype=np.int64)
        for a in range(inst.m1):
            for b in range(inst.m2):
                pi[a, b] = inst[(a, b)].as_array()
        self.pi = pi


def run_matching_scheme(
    inst: mt.MatchingInstance,
    L: int,
    trials: int,
    seed: int,
    delta: float | None = None,
    fallback_bits: float | None = None,
    inject_failure: bool = False,
    workers: int = 1,
) -> SchemeRunResult:
    """Binning to agree on acceptable bullet sets, then one delta symbol per coordinate.

    Cost per trial is ``1 + log2(K) + L*log2(m)`` bits on success, with
    ``K = (1+delta) mu1`` the bin capacity, or ``fallback_bits`` (default
    ``2L*log2(m) + 1``) when binning fails or ``inject_failure`` is set.
    Every trial is decoded and compared symbol by symbol.  Maximal instances
    skip binning and run the single-letter factorization at ``log2(m)``.
    """
    lm = math.log2(inst.m)
    fallback = 2 * L * lm + 1 if fallback_bits is None else fallback_bits
    extra: dict = {}
    if (inst.m1, inst.m2) == (4, 3):
        s43 = mt.scheme_4x3(inst)
        extra["scheme_4x3_bits_per_symbol"] = s43.cost_bits
        extra["scheme_4x3_decode_errors"] = s43.verify(inst)

    if mt.is_maximal(inst):
        dg = mt.maximal_scheme(inst)
        D = np.array([d.as_array() for d in dg.deltas])
        Dinv = np.array([d.inverse().as_array() for d in dg.deltas])
        G = np.array([g.as_array() for g in dg.gammas])
        pi = np.array([[p.as_array() for p in row] for row in inst.pi])

        def one_max(i: int):
            rng = trial_rng(seed, i)
            a = rng.integers(0, inst.m1, L)
            b = rng.integers(0, inst.m2, L)
            w1 = rng.integers(0, inst.m, L)
            w2 = pi[a, b, w1]
            s = D[a, w1]
            bad = int(np.sum(Dinv[a, s] != w1) + np.sum(G[b, s] != w2))
            return L * lm, bad

        outs = _map_trials(one_max, trials, workers)
        bits = np.array([o[0] for o in outs]) / L
        extra["short_circuit"] = "maximal: single-letter factorization"
        return SchemeRunResult(float(bits.mean()), float(bits.std()), sum(o[1] for o in outs), 0.0, None, L, trials, seed, "maximal", [], extra)

    cfg = BinningConfig(inst.m1 * inst.m2, inst.m1 + inst.m2 - 1, L, delta, trials, seed)
    tab = _Tables(inst)
    k_bits = cfg.position_bits() if cfg.log2_mu1 > 50 else math.log2(math.ceil(cfg.overflow_threshold()))

    def one(i: int):
        rng = trial_rng(seed, i)
        a = rng.integers(0, inst.m1, L)
        b = rng.integers(0, inst.m2, L)
        w1 = rng.integers(0, inst.m, L)
        w2 = tab.pi[a, b, w1]
        if cfg.exact:
            outcome = _exact_trial(cfg, rng, tab.member[a, b])
        else:
            outcome = _statistical_trial(cfg, rng)
            if not outcome.failed:
                # the tuple found in bin 0 is uniform over acceptable ones
                outcome.chosen = tab.acc[a, b, rng.integers(0, cfg.n2, L)]
        if inject_failure or outcome.failed:
            # uncoded fallback: both demands sent verbatim after a flag bit
            return fallback, 0, True, ()
        t = outcome.chosen
        s = tab.D[t, a, w1]
        bad = int(np.sum(tab.Dinv[t, a, s] != w1) + np.sum(tab.G[t, b, s] != w2))
        return 1 + k_bits + L * lm, bad, False, tuple(np.unique(t).tolist())

    outs = _map_trials(one, trials, workers)
    bits = np.array([o[0] for o in outs]) / L
    used = sorted(set().union(*[set(o[3]) for o in outs])) if outs else []
    extra["target_bits_per_symbol"] = lm + mt.cost_gap(inst.m1, inst.m2)
    return SchemeRunResult(
        bits_per_symbol_mean=float(bits.mean()),
        bits_per_symbol_std=float(bits.std()),
        decode_errors=sum(o[1] for o in outs),
        binning_failure_rate=sum(o[2] for o in outs) / trials,
        chebyshev_bound=cfg.chebyshev_bound(),
        L=L,
        trials=trials,
        seed=seed,
        mode="exact" if cfg.exact else "statistical",
        translations_used=used,
        extra=extra,
    )


def run_cb2_scheme(L: int, trials: int, seed: int, inject_failure: bool = False, workers: int = 1) -> SchemeRunResult:
    """The bullet-set scheme on CB2, with an ``8L + 1`` bit uncoded fallback."""
    return run_matching_scheme(mt.cb2(), L, trials, seed, fallback_bits=8 * L + 1, inject_failure=inject_failure, workers=workers)
