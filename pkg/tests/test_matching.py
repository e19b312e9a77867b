import itertools
import math

import numpy as np
import pytest

import brute
from cbcast import distributions as dist
from cbcast import matching as mt
from cbcast.errors import CycleBudgetExceeded, InvalidCycle, TooLarge, WrongShape
from cbcast.matching import MatchingInstance, Permutation

TOL = 1e-9


def shift(k, m=4):
    return Permutation.shift(m, k)


def swap01(m=4):
    return Permutation(tuple([1, 0] + list(range(2, m))))


def identity_table(m, m1, m2):
    ident = Permutation.identity(m)
    return MatchingInstance(m, m1, m2, tuple(tuple(ident for _ in range(m2)) for _ in range(m1)))


def neither_2x2():
    ident = Permutation.identity(4)
    return MatchingInstance(4, 2, 2, ((swap01(), ident), (ident, ident)))


# permutations ---------------------------------------------------------------


def test_permutation_basics(rng):
    p = Permutation.random(6, rng)
    assert (p * p.inverse()).is_identity()
    assert shift(2).is_derangement() and not swap01().is_derangement()
    assert Permutation.from_one_indexed([2, 1, 3]).mapping == (1, 0, 2)
    assert (shift(1) * shift(2)) == shift(3)
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


# cycles ---------------------------------------------------------------------


@pytest.mark.parametrize("m1,m2", [(2, 2), (3, 2), (2, 3), (3, 3), (2, 4)])
def test_cycle_enumeration_matches_brute_force(m1, m2):
    fast = {brute._canonical(list(c)) for c in mt.enumerate_cycles(m1, m2)}
    assert len(fast) == len(mt.enumerate_cycles(m1, m2))  # no duplicates
    assert fast == brute.brute_cycles(m1, m2)


def test_cycle_counts_frozen():
    # brute-force counts, frozen
    assert [len(mt.enumerate_cycles(*s)) for s in [(2, 2), (3, 2), (3, 3), (4, 3)]] == [1, 3, 15, 96]
    assert mt.enumerate_cycles(1, 5) == [] and mt.enumerate_cycles(4, 1) == []


def test_cycle_enumeration_is_deterministic():
    assert mt.enumerate_cycles(3, 3) == mt.enumerate_cycles(3, 3)


def test_cycle_budget():
    with pytest.raises(CycleBudgetExceeded):
        mt.enumerate_cycles(4, 4, cap=100)


def test_check_cycle_rejects_bad_walks():
    mt.check_cycle([(0, 0), (0, 1), (1, 1), (1, 0)])
    for bad in ([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 0), (0, 1), (1, 1)], [(0, 0), (0, 1), (0, 0), (0, 1)]):
        with pytest.raises(InvalidCycle):
            mt.check_cycle(bad)


def test_induced_permutations_examples():
    cyc = [(0, 0), (0, 1), (1, 1), (1, 0)]
    assert mt.induced_permutation(identity_table(4, 2, 2), cyc).is_identity()
    assert mt.induced_permutation(mt.cb1(), cyc).is_identity()
    assert mt.induced_permutation(mt.cb2(), cyc) == shift(2)
    assert mt.induced_permutation(neither_2x2(), cyc) == swap01()


def test_reversed_cycle_gives_inverse(rng):
    for _ in range(20):
        m1, m2 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        inst = MatchingInstance(5, m1, m2, tuple(tuple(Permutation.random(5, rng) for _ in range(m2)) for _ in range(m1)))
        for cyc in mt.enumerate_cycles(m1, m2):
            back = [cyc[0]] + list(reversed(cyc[1:]))
            # walking backwards starts with a column step; rotate once to keep row-first
            back = back[1:] + back[:1]
            assert mt.induced_permutation(inst, back) == mt.induced_permutation(inst, cyc).inverse()


def test_induced_permutation_against_list_composition(rng):
    inst = MatchingInstance(5, 3, 3, tuple(tuple(Permutation.random(5, rng) for _ in range(3)) for _ in range(3)))
    for cyc in mt.enumerate_cycles(3, 3):
        pairs = [(inst[c].mapping, k % 2 == 1) for k, c in enumerate(cyc)]
        assert list(mt.induced_permutation(inst, cyc).mapping) == brute.compose_all(pairs, 5)


# classification -------------------------------------------------------------


def test_classify_examples():
    assert mt.classify(mt.cb1()).cls == mt.MAXIMAL
    assert mt.classify(mt.cb2()).cls == mt.MINIMAL
    assert mt.classify(neither_2x2()).cls == mt.NEITHER
    assert mt.classify(identity_table(3, 1, 4)).cls == mt.MAXIMAL


def test_classify_undetermined_when_budget_runs_out(rng):
    inst = MatchingInstance(4, 4, 4, tuple(tuple(shift(int(rng.integers(1, 4))) for _ in range(4)) for _ in range(4)))
    if mt.is_maximal(inst):
        pytest.skip("drew a maximal table")
    assert mt.classify(inst, cap=5).cls in (mt.UNDETERMINED, mt.NEITHER)


def test_factorization_test_agrees_with_cycle_enumeration(rng):
    for i in range(60):
        m1, m2, m = int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(2, 4))
        if i % 3 == 0:
            inst = mt.random_maximal(rng, m, m1, m2)
        else:
            inst = MatchingInstance(m, m1, m2, tuple(tuple(Permutation.random(m, rng) for _ in range(m2)) for _ in range(m1)))
        all_identity = all(mt.induced_permutation(inst, c).is_identity() for c in mt.enumerate_cycles(m1, m2))
        assert mt.is_maximal(inst) == all_identity
        cls = mt.classify(inst).cls
        induced = [mt.induced_permutation(inst, c) for c in mt.enumerate_cycles(m1, m2)]
        if cls == mt.MINIMAL:
            assert all(p.is_derangement() for p in induced)
        if cls == mt.NEITHER:
            assert any(not p.is_identity() for p in induced) and any(not p.is_derangement() for p in induced)


# bullet sets ----------------------------------------------------------------


def test_bullet_set_shapes():
    assert mt.standard_bullet_set(2, 2).cells == {(0, 0), (1, 0), (0, 1)}
    assert len(mt.all_translations(1, 1)) == 1 and mt.standard_bullet_set(1, 1).cells == {(0, 0)}
    for m1, m2 in [(3, 2), (2, 3), (4, 3), (3, 5), (5, 5)]:
        std = mt.standard_bullet_set(m1, m2)
        assert len(std.cells) == m1 + m2 - 1 and not mt.contains_cycle(std.cells)
        assert {r for r, _ in std.cells} == set(range(m1)) and {c for _, c in std.cells} == set(range(m2))
        assert len({bs.cells for bs in mt.all_translations(m1, m2)}) == m1 * m2


def test_acceptable_sets_counts():
    assert len(mt.acceptable_sets(3, 2, (1, 0))) == 4
    for m1, m2 in [(2, 2), (3, 2), (2, 3), (4, 3), (3, 5)]:
        for cell in itertools.product(range(m1), range(m2)):
            assert len(mt.acceptable_sets(m1, m2, cell)) == m1 + m2 - 1


# delta/gamma ----------------------------------------------------------------


def test_delta_gamma_cb1():
    inst = mt.cb1()
    dg = mt.build_delta_gamma(inst, mt.standard_bullet_set(2, 2))
    assert dg.deltas == (shift(0), shift(2)) and dg.gammas == (shift(0), shift(1))
    assert dg.gammas[1] * dg.deltas[1] == shift(3) == inst[(1, 1)]
    s = dg.encode(1, 1)
    assert s == 3 and dg.decode_user2(s, 1) == 0 == inst[(1, 1)](1)


def test_delta_gamma_cb2():
    inst = mt.cb2()
    dg = mt.build_delta_gamma(inst, mt.standard_bullet_set(2, 2))
    assert dg.deltas == (shift(0), shift(3)) and dg.gammas == (shift(0), shift(1))
    assert (dg.gammas[1] * dg.deltas[1]).is_identity() and inst[(1, 1)] == shift(2)
    assert dg.satisfied_on(inst) == {(0, 0), (1, 0), (0, 1)}


def test_delta_gamma_identity_table():
    dg = mt.build_delta_gamma(identity_table(3, 3, 2), mt.standard_bullet_set(3, 2))
    assert all(p.is_identity() for p in dg.deltas + dg.gammas)


def test_every_translation_factorizes_and_decodes(rng):
    for m1, m2 in [(2, 2), (3, 2), (2, 3), (4, 3), (3, 4)]:
        m = 5
        inst = MatchingInstance(m, m1, m2, tuple(tuple(Permutation.random(m, rng) for _ in range(m2)) for _ in range(m1)))
        for bs in mt.all_translations(m1, m2):
            dg = mt.build_delta_gamma(inst, bs)
            assert bs.cells <= dg.satisfied_on(inst)
            for (a, b), w1 in itertools.product(bs.cells, range(m)):
                s = mt.encode_bullet(dg, a, w1)
                assert mt.decode_user1(dg, s, a) == w1
                assert mt.decode_user2(dg, s, b) == inst[(a, b)](w1)


def test_maximal_instances_decode_everywhere(rng):
    for _ in range(20):
        m, m1, m2 = int(rng.integers(2, 7)), int(rng.integers(1, 6)), int(rng.integers(1, 6))
        inst = mt.random_maximal(rng, m, m1, m2)
        dg = mt.maximal_scheme(inst)
        assert dg.satisfied_on(inst) == set(inst.cells())


# bounds ---------------------------------------------------------------------


def test_bounds_cb1_cb2():
    b1 = mt.bounds(mt.cb1())
    assert b1.cls == mt.MAXIMAL and b1.hstar_ub_bits == pytest.approx(2, abs=TOL) and b1.tight
    assert b1.capacity_lb == pytest.approx(2, abs=TOL)
    b2 = mt.bounds(mt.cb2())
    assert b2.cls == mt.MINIMAL and b2.hstar_lb_bits == pytest.approx(4 - math.log2(3), abs=TOL) and b2.tight
    assert b2.capacity_ub == pytest.approx(4 / (4 - math.log2(3)), abs=TOL)
    assert set(b2.to_json()) >= {"class", "hstar_lb_bits", "hstar_ub_bits", "capacity_lb", "capacity_ub", "tight"}


def test_bounds_neither_reports_interval():
    b = mt.bounds(neither_2x2())
    assert b.cls == mt.NEITHER and not b.tight and b.hstar_lb_bits < b.hstar_ub_bits


def test_cost_gap():
    assert mt.cost_gap(4, 3) == 1.0
    assert mt.cost_gap(2, 2) == pytest.approx(2 - math.log2(3), abs=TOL)
    assert mt.cost_gap(1, 7) == 0.0


# 4x3 scheme -----------------------------------------------------------------


def test_scheme_4x3_random_and_structured(rng):
    for m in (2, 3, 5):
        inst = MatchingInstance(m, 4, 3, tuple(tuple(Permutation.random(m, rng) for _ in range(3)) for _ in range(4)))
        s = mt.scheme_4x3(inst)
        assert s.verify(inst) == 0 and s.cost_bits == pytest.approx(math.log2(m) + 1, abs=TOL)
    ident = identity_table(4, 4, 3)
    s = mt.scheme_4x3(ident)
    assert s.verify(ident) == 0
    assert all(s.encode(a, b, w)[1] == w for a, b in ident.cells() for w in range(4))
    maximal = mt.random_maximal(rng, 4, 4, 3)
    assert mt.scheme_4x3(maximal).verify(maximal) == 0 and mt.is_maximal(maximal)


def test_scheme_4x3_shape_guard():
    with pytest.raises(WrongShape):
        mt.scheme_4x3(mt.cb2())


# feasibility audits ---------------------------------------------------------


def test_feasible_sets_cb1_shift_encoder():
    rep = mt.feasible_set_check(lambda a, b, w1: (w1 + 2 * a) % 4, mt.cb1())
    assert rep.ok and rep.max_size == 4


def test_feasible_sets_verbatim_encoder():
    rep = mt.feasible_set_check(lambda a, b, w1: (w1, a, b), mt.cb2())
    assert rep.ok and rep.max_size == 1


def test_feasible_sets_bullet_encoder_cb2():
    rep = mt.feasible_set_check(mt.bullet_encoder(mt.cb2()), mt.cb2())
    assert rep.ok and rep.max_size <= 3


def test_feasible_sets_flag_cb1_encoder_on_cb2():
    # the cb1 shift encoder cannot serve user 2 on cb2
    rep = mt.feasible_set_check(lambda a, b, w1: (w1 + 2 * a) % 4, mt.cb2())
    assert not rep.ok


def test_acyclic_subsets_stay_below_m1_plus_m2(rng):
    for _ in range(200):
        m1, m2 = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        cells = [(a, b) for a in range(m1) for b in range(m2)]
        pick = rng.choice(len(cells), m1 + m2, replace=False)
        assert mt.contains_cycle([cells[k] for k in pick])
        # greedy acyclic growth never exceeds m1+m2-1 cells
        forest = []
        for k in rng.permutation(len(cells)):
            if not mt.contains_cycle(forest + [cells[k]]):
                forest.append(cells[k])
        assert len(forest) == m1 + m2 - 1


def test_contains_cycle_matches_enumeration(rng):
    for _ in range(100):
        cells = [(a, b) for a in range(3) for b in range(3) if rng.random() < 0.5]
        assert mt.contains_cycle(cells) == bool(mt.enumerate_cycles(3, 3, cells=cells))


# conversion -----------------------------------------------------------------


def test_to_general():
    g = mt.to_general(mt.cb1())
    assert len(g.atoms) == 16 and all(pr == pytest.approx(1 / 16) for pr in g.probs)
    one = mt.to_general(identity_table(1, 2, 2))
    assert dist.entropy(one, dist.W1 | dist.W2) == 0
    big = MatchingInstance(1001, 1, 1000, ((Permutation.identity(1001),) * 1000,))
    with pytest.raises(TooLarge):
        mt.to_general(big)
