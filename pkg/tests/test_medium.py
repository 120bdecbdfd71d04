"""Tests for oriented-hypercube construction and payoff-derived media."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nashwalk.errors import (
    AlphaOutOfRange,
    AxisOutOfRange,
    DimensionTooLarge,
    ExhaustiveModeRequired,
    IncompleteTable,
    NonCanonicalEdge,
)
from nashwalk.medium import (
    DOWN,
    MODE_LAZY,
    TIE,
    UP,
    EdgeRef,
    Medium,
    PayoffGame,
    PayoffSpec,
    build_medium,
    edge_count,
    edge_index,
    expand_bit,
    medium_from_payoffs,
    neighbor_partition,
    orientation,
    sample_payoff_game,
    squeeze_bit,
)
from nashwalk.rng import fold, TAG_MEDIUM

from conftest import CYCLIC2_PAYOFFS, GAMMA2_PAYOFFS, make_all_tie


# ---------------------------------------------------------------------------
# hand-checked orientations


def test_gamma2_every_edge_points_to_origin(gamma2_medium):
    # Both players strictly prefer action 0 given any opponent action, so
    # all four edges orient toward their canonical base.
    for base, axis in [(0, 0), (2, 0), (0, 1), (1, 1)]:
        assert gamma2_medium.orientation(EdgeRef(base, axis)) == DOWN
    assert orientation(gamma2_medium, EdgeRef(0, 0)) == DOWN


def test_gamma2_orientation_seen_from(gamma2_medium):
    # Edge 0-1 points into vertex 0, i.e. out of vertex 1.
    assert gamma2_medium.orientation_seen_from(0, 0) == DOWN
    assert gamma2_medium.orientation_seen_from(1, 0) == UP


def test_gamma2_neighbor_partition(gamma2_medium):
    p3 = gamma2_medium.neighbor_partition(3)
    assert p3.out == [2, 1]
    assert p3.inward == [] and p3.tie == []
    p0 = neighbor_partition(gamma2_medium, 0)
    assert p0.out == [] and sorted(p0.inward) == [1, 2]


def test_cyclic2_is_a_rotation(cyclic2_medium):
    assert cyclic2_medium.require_table().tolist() == [UP, DOWN, DOWN, UP]


def test_constant_payoffs_give_all_ties():
    payoffs = np.full((2, 4), 0.5)
    med = medium_from_payoffs(PayoffGame(2, payoffs))
    assert (med.require_table() == TIE).all()


def test_all_tie_partition():
    med = make_all_tie(3)
    for v in range(8):
        part = med.neighbor_partition(v)
        assert part.out == [] and part.inward == []
        assert sorted(part.tie) == sorted(v ^ (1 << a) for a in range(3))


# ---------------------------------------------------------------------------
# random construction: marginals, purity, modes


def test_alpha_zero_never_ties():
    for i in range(200):
        med = build_medium(2, 0.0, fold(31, TAG_MEDIUM, i))
        assert (med.require_table() != TIE).all()


def test_pooled_edge_marginals():
    # Exact i.i.d. edge law: across many media the pooled tie and up
    # fractions should sit within 3 standard errors of alpha and beta.
    n, alpha, runs = 10, 0.35, 1000
    tie = up = total = 0
    for i in range(runs):
        table = build_medium(n, alpha, fold(555, TAG_MEDIUM, i)).require_table()
        tie += int((table == TIE).sum())
        up += int((table == UP).sum())
        total += table.size
    beta = (1 - alpha) / 2
    assert abs(tie / total - alpha) < 3 * math.sqrt(alpha * (1 - alpha) / total)
    assert abs(up / total - beta) < 3 * math.sqrt(beta * (1 - beta) / total)


def test_two_fixed_edges_look_independent():
    # Joint frequency of (UP, UP) on two distinct edges should be close to
    # the product of the marginals.
    hits = 0
    runs = 1000
    for i in range(runs):
        med = build_medium(4, 0.5, fold(77, TAG_MEDIUM, i))
        if med.orientation(EdgeRef(0, 0)) == UP and med.orientation(EdgeRef(1, 1)) == UP:
            hits += 1
    p = 0.25 * 0.25
    assert abs(hits / runs - p) < 3 * math.sqrt(p * (1 - p) / runs)


def test_same_seed_same_medium_different_seed_differs():
    a = build_medium(8, 0.5, 1234).require_table()
    b = build_medium(8, 0.5, 1234).require_table()
    c = build_medium(8, 0.5, 1235).require_table()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.8])
def test_lazy_matches_exhaustive(alpha):
    n, seed = 6, 2024
    ex = build_medium(n, alpha, seed)
    lz = build_medium(n, alpha, seed, mode=MODE_LAZY)
    for axis in range(n):
        for base in ex.axis_bases(axis):
            ref = EdgeRef(int(base), axis)
            assert ex.orientation(ref) == lz.orientation(ref)


def test_degrees_sum_to_dimension():
    med = build_medium(7, 0.4, 99)
    out_deg, in_deg, tie_deg = med.degrees()
    total = out_deg.astype(int) + in_deg + tie_deg
    assert (total == 7).all()
    # Every oriented edge contributes one out- and one in-degree.
    assert int(out_deg.sum()) == int(in_deg.sum())
    src, dst = med.oriented_edge_arrays()
    assert len(src) == int(out_deg.sum())
    assert np.array_equal(np.bincount(src, minlength=1 << 7), out_deg)
    assert np.array_equal(np.bincount(dst, minlength=1 << 7), in_deg)


def test_partition_agrees_with_degrees():
    med = build_medium(6, 0.6, 5)
    out_deg, in_deg, tie_deg = med.degrees()
    for v in range(1 << 6):
        part = med.neighbor_partition(v)
        assert (len(part.out), len(part.inward), len(part.tie)) == (
            int(out_deg[v]),
            int(in_deg[v]),
            int(tie_deg[v]),
        )


# ---------------------------------------------------------------------------
# edge indexing


@given(st.integers(min_value=1, max_value=10), st.data())
def test_squeeze_expand_roundtrip(n, data):
    axis = data.draw(st.integers(min_value=0, max_value=n - 1))
    base = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
    base &= ~(1 << axis)  # canonical form: chosen bit cleared
    packed = squeeze_bit(base, axis)
    assert expand_bit(packed, axis) == base
    idx = edge_index(base, axis, n)
    assert 0 <= idx < edge_count(n)


def test_edge_index_is_a_bijection():
    n = 5
    seen = {edge_index(int(b), a, n) for a in range(n) for b in range(1 << n) if not (b >> a) & 1}
    assert seen == set(range(edge_count(n)))


# ---------------------------------------------------------------------------
# payoff sampling


def test_payoff_spec_induced_alpha():
    assert PayoffSpec("continuous_uniform").induced_alpha() == 0.0
    assert PayoffSpec("bernoulli", p=0.3).induced_alpha() == pytest.approx(0.3**2 + 0.7**2)
    assert PayoffSpec("discrete_uniform", k=4).induced_alpha() == pytest.approx(0.25)


def test_sample_payoff_game_shape_and_determinism():
    spec = PayoffSpec("continuous_uniform")
    g1 = sample_payoff_game(5, spec, seed=42)
    g2 = sample_payoff_game(5, spec, seed=42)
    g3 = sample_payoff_game(5, spec, seed=43)
    assert g1.payoffs.shape == (5, 32)
    assert ((g1.payoffs >= 0) & (g1.payoffs < 1)).all()
    assert np.array_equal(g1.payoffs, g2.payoffs)
    assert not np.array_equal(g1.payoffs, g3.payoffs)


def test_sample_payoff_game_bernoulli_support():
    g = sample_payoff_game(4, PayoffSpec("bernoulli", p=0.5), seed=7)
    assert set(np.unique(g.payoffs)) <= {0.0, 1.0}
    g_all = sample_payoff_game(4, PayoffSpec("bernoulli", p=1.0), seed=7)
    assert (g_all.payoffs == 1.0).all()


def naive_orientation_from_payoffs(game: PayoffGame, base: int, axis: int) -> int:
    """Direct payoff comparison for one edge, bypassing the array path."""
    partner = base | (1 << axis)
    z_base = game.payoffs[axis, base]
    z_partner = game.payoffs[axis, partner]
    if z_base > z_partner:
        return DOWN
    if z_partner > z_base:
        return UP
    return TIE


@pytest.mark.parametrize("spec", [PayoffSpec("discrete_uniform", k=4), PayoffSpec("continuous_uniform")])
def test_medium_from_payoffs_matches_naive_comparison(spec):
    for trial in range(20):
        game = sample_payoff_game(5, spec, seed=fold(303, trial))
        med = medium_from_payoffs(game)
        for axis in range(5):
            for base in med.axis_bases(axis):
                got = med.orientation(EdgeRef(int(base), axis))
                assert got == naive_orientation_from_payoffs(game, int(base), axis)


def test_medium_from_payoffs_records_induced_alpha():
    game = sample_payoff_game(4, PayoffSpec("discrete_uniform", k=2), seed=1)
    med = medium_from_payoffs(game)
    assert med.params.alpha == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# validation and serialization


def test_alpha_out_of_range_rejected():
    with pytest.raises(AlphaOutOfRange):
        build_medium(4, -0.1, 0)
    with pytest.raises(AlphaOutOfRange):
        build_medium(4, 1.1, 0)


def test_dimension_caps():
    with pytest.raises(DimensionTooLarge):
        build_medium(25, 0.5, 0)
    with pytest.raises(DimensionTooLarge):
        build_medium(63, 0.5, 0, mode=MODE_LAZY)


def test_non_canonical_edge_rejected(gamma2_medium):
    with pytest.raises(NonCanonicalEdge):
        gamma2_medium.orientation(EdgeRef(1, 0))  # bit 0 of base is set
    with pytest.raises(AxisOutOfRange):
        gamma2_medium.orientation(EdgeRef(0, 2))


def test_lazy_medium_has_no_table():
    med = build_medium(30, 0.5, 0, mode=MODE_LAZY)
    with pytest.raises(ExhaustiveModeRequired):
        med.require_table()
    # but individual edges still resolve
    assert med.orientation(EdgeRef(0, 3)) in (TIE, UP, DOWN)


def test_dump_load_roundtrip():
    med = build_medium(6, 0.3, 404)
    blob = med.dump_bytes()
    back = Medium.load_bytes(blob)
    assert back.n_players == 6
    assert back.params.alpha == pytest.approx(0.3)
    assert back.params.seed == 404
    assert np.array_equal(back.require_table(), med.require_table())


def test_load_rejects_bad_blobs():
    med = build_medium(4, 0.5, 1)
    blob = med.dump_bytes()
    with pytest.raises(IncompleteTable):
        Medium.load_bytes(b"WRONGMAG" + blob[8:])
    with pytest.raises(IncompleteTable):
        Medium.load_bytes(blob[:-3])
