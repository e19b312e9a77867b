import math

import numpy as np
import pytest

from cbcast import binning
from cbcast import matching as mt
from cbcast.binning import BinningConfig
from cbcast.errors import DegenerateConfig

LOG3 = math.log2(3)


def analytic_bits(L):
    return (2 - LOG3) + LOG3 / math.sqrt(L) + math.log2(1 + 1 / math.sqrt(L)) / L


def test_config_validation():
    with pytest.raises(DegenerateConfig):
        BinningConfig(3, 3, 10)
    with pytest.raises(ValueError):
        BinningConfig(4, 3, 0)
    with pytest.raises(DegenerateConfig):
        BinningConfig(4, 3, 4, delta=2.0)
    assert BinningConfig(4, 3, 4, delta=1.0).bins == 1


def test_default_delta_and_exact_mode():
    cfg = BinningConfig(4, 3, 100)
    assert cfg.delta == pytest.approx(0.1) and not cfg.exact
    assert BinningConfig(4, 3, 8).exact and not BinningConfig(4, 3, 11).exact


@pytest.mark.parametrize("L", [4, 25, 100, 400, 1600, 10_000])
def test_analytic_bits_per_symbol(L):
    assert BinningConfig(4, 3, L).bits_per_symbol() == pytest.approx(analytic_bits(L), abs=1e-12)


def test_bits_per_symbol_floor_and_two_to_one():
    for L in (16, 100, 2500):
        assert BinningConfig(4, 3, L).bits_per_symbol() >= 2 - LOG3
    # log2(2/1) = 1; the slack shrinks like 1/L
    slack = [BinningConfig(2, 1, L).bits_per_symbol() - 1 for L in (100, 1000, 10_000)]
    assert slack[0] > slack[1] > slack[2] > 0 and slack[2] < 1e-3


def test_chebyshev_formula():
    L, d = 100, 0.1
    want = (3 ** (L * (1 - d)) - 1) / (d * d * 4**L) + (1 - 3 ** (-L * (1 - d))) / (d * d * 3 ** (L * d))
    assert BinningConfig(4, 3, L).chebyshev_bound() == pytest.approx(want, rel=1e-9)


def test_splitmix_is_a_fixed_function():
    x = np.array([0, 1, 2**63], dtype=np.uint64)
    assert np.array_equal(binning.splitmix64(x), binning.splitmix64(x.copy()))
    assert len(set(binning.splitmix64(np.arange(1000, dtype=np.uint64)).tolist())) == 1000


def test_statistical_error_within_bound():
    res = binning.simulate_binning(BinningConfig(4, 3, 100, trials=2000, seed=7))
    assert res.mode == "statistical" and res.empirical_error <= res.chebyshev_bound


def test_exact_mode_small_L():
    res = binning.simulate_binning(BinningConfig(4, 3, 6, trials=300, seed=3))
    assert res.mode == "exact" and 0 <= res.empirical_error <= 1


def test_simulation_is_reproducible_across_workers():
    cfg = BinningConfig(4, 3, 6, trials=200, seed=11)
    assert binning.simulate_binning(cfg, workers=1) == binning.simulate_binning(cfg, workers=4)
    a = binning.run_cb2_scheme(25, 40, seed=5, workers=1).to_json()
    b = binning.run_cb2_scheme(25, 40, seed=5, workers=3).to_json()
    assert a == b


def test_cb2_scheme_small_L_decodes():
    for L in (4, 8):
        res = binning.run_cb2_scheme(L, 100, seed=1)
        assert res.decode_errors == 0 and res.mode == "exact"


def test_cb2_forced_fallback_cost():
    L = 50
    res = binning.run_cb2_scheme(L, 10, seed=2, inject_failure=True)
    assert res.decode_errors == 0 and res.binning_failure_rate == 1.0
    assert res.bits_per_symbol_mean * L == pytest.approx(8 * L + 1)


def test_cb2_cost_improves_with_L():
    means = [binning.run_cb2_scheme(L, 30, seed=9).bits_per_symbol_mean for L in (25, 100, 400)]
    assert means[0] > means[1] > means[2] > 4 - LOG3


def test_maximal_short_circuit(rng):
    inst = mt.random_maximal(rng, 5, 3, 3)
    res = binning.run_matching_scheme(inst, 50, 20, seed=1)
    assert res.mode == "maximal" and res.decode_errors == 0
    assert res.bits_per_symbol_mean == pytest.approx(math.log2(5))


def test_4x3_instance_end_to_end(rng):
    inst = mt.MatchingInstance(3, 4, 3, tuple(tuple(mt.Permutation.random(3, rng) for _ in range(3)) for _ in range(4)))
    if mt.is_maximal(inst):
        pytest.skip("drew a maximal table")
    res = binning.run_matching_scheme(inst, 200, 20, seed=4)
    assert res.decode_errors == 0
    assert res.extra["scheme_4x3_decode_errors"] == 0
    assert res.extra["target_bits_per_symbol"] == pytest.approx(math.log2(3) + 1)


def test_result_json_keys():
    j = binning.run_cb2_scheme(16, 5, seed=0).to_json()
    assert {"bits_per_symbol_mean", "bits_per_symbol_std", "decode_errors", "binning_failure_rate", "chebyshev_bound", "L", "trials", "seed"} <= set(j)
