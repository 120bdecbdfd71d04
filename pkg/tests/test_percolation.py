"""Tests for bond percolation sampling and the growth coupling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from nashwalk.errors import (
    BetaOutOfRange,
    DimensionTooLarge,
    EmptyTrialCount,
    IncompleteTable,
    SeedCollision,
)
from nashwalk.medium import build_medium
from nashwalk.percolation import (
    PercolationGraph,
    check_lemma_finally,
    connected_component,
    coupling_run,
    fragment_stats,
    largest_component,
    reverse_accessible_from_zero,
    sample_percolation,
)
from nashwalk.rng import fold, TAG_MEDIUM, TAG_PERC

from conftest import make_all_tie


# ---------------------------------------------------------------------------
# sampling


def test_sampling_is_deterministic():
    a = sample_percolation(8, 0.3, 42)
    b = sample_percolation(8, 0.3, 42)
    c = sample_percolation(8, 0.3, 43)
    assert np.array_equal(a.open_edges, b.open_edges)
    assert not np.array_equal(a.open_edges, c.open_edges)
    assert a.beta == 0.3 and a.seed == 42


def test_sampling_marginal():
    total = opened = 0
    for i in range(500):
        g = sample_percolation(9, 0.3, fold(5, TAG_PERC, i))
        opened += int(g.open_edges.sum())
        total += g.open_edges.size
    se = math.sqrt(0.3 * 0.7 / total)
    assert abs(opened / total - 0.3) < 3 * se


def test_open_sets_nest_as_beta_grows():
    # Same seed, larger beta: strictly more edges can only open, never close.
    lo = sample_percolation(8, 0.2, 77)
    hi = sample_percolation(8, 0.6, 77)
    assert (hi.open_edges | lo.open_edges).sum() == hi.open_edges.sum()
    assert (lo.open_edges & ~hi.open_edges).sum() == 0


def test_sampling_validation():
    with pytest.raises(BetaOutOfRange):
        sample_percolation(4, 0.0, 1)
    with pytest.raises(BetaOutOfRange):
        sample_percolation(4, 1.0, 1)
    with pytest.raises(DimensionTooLarge):
        sample_percolation(25, 0.5, 1)


def test_open_neighbors_are_symmetric():
    g = sample_percolation(6, 0.5, 9)
    for v in range(1 << 6):
        for w in g.open_neighbors(v):
            assert v in g.open_neighbors(w)
            assert (v ^ w).bit_count() == 1


# ---------------------------------------------------------------------------
# components


def union_find_components(g: PercolationGraph):
    """Independent component labelling via union-find."""
    parent = list(range(1 << g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in range(1 << g.n):
        for axis in range(g.n):
            if (v >> axis) & 1:
                continue
            if g.is_open(v, axis):
                a, b = find(v), find(v | (1 << axis))
                if a != b:
                    parent[a] = b
    groups = {}
    for v in range(1 << g.n):
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


def test_connected_component_matches_union_find():
    g = sample_percolation(6, 0.4, 123)
    groups = union_find_components(g)
    by_vertex = {v: grp for grp in groups for v in grp}
    for v in (0, 17, 40, 63):
        assert connected_component(g, v) == by_vertex[v]


def test_largest_component_tie_breaks_to_smallest_vertex():
    # Two open edges, 0-1 and 2-3: two size-2 components, report the one
    # containing vertex 0.
    open_edges = np.array([True, True, False, False])
    g = PercolationGraph(2, open_edges)
    assert sorted(largest_component(g).tolist()) == [0, 1]
    stats = fragment_stats(g)
    assert stats.largest_component_size == 2
    assert stats.largest_component_min_vertex == 0
    assert stats.fragment_size == 2


def test_fragment_stats_fully_open():
    g = PercolationGraph(3, np.ones(12, dtype=bool))
    stats = fragment_stats(g)
    assert stats.largest_component_size == 8
    assert stats.fragment_size == 0


def test_open_edge_array_length_is_checked():
    with pytest.raises(IncompleteTable):
        PercolationGraph(3, np.ones(11, dtype=bool))


# ---------------------------------------------------------------------------
# reverse accessibility


def forward_reaches_zero(medium):
    """Vertices with an oriented path to 0, by per-vertex forward search."""
    out = {}
    size = 1 << medium.n_players
    result = set()
    for v in range(size):
        seen = {v}
        stack = [v]
        hit = False
        while stack:
            u = stack.pop()
            if u == 0:
                hit = True
                break
            for w in medium.neighbor_partition(u).out:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if hit:
            result.add(v)
    return result


@pytest.mark.parametrize("alpha,seed", [(0.3, 3), (0.6, 4)])
def test_reverse_accessible_matches_forward_search(alpha, seed):
    med = build_medium(7, alpha, seed)
    assert reverse_accessible_from_zero(med) == forward_reaches_zero(med)


def test_reverse_accessible_all_ties():
    assert reverse_accessible_from_zero(make_all_tie(4)) == {0}


def test_reverse_accessible_lazy_agrees_with_exhaustive():
    ex = build_medium(6, 0.4, 2025)
    lz = build_medium(6, 0.4, 2025, mode="lazy")
    assert reverse_accessible_from_zero(ex) == reverse_accessible_from_zero(lz)


# ---------------------------------------------------------------------------
# the coupling


def test_coupling_identity_on_fixtures(gamma2_medium, cyclic2_medium):
    for med, expect in ((gamma2_medium, {0, 1, 2, 3}), (cyclic2_medium, {0, 1, 2, 3})):
        initial = sample_percolation(2, 0.25, 1001)
        final, audit = coupling_run(med, initial)
        assert audit.identity_holds
        assert audit.q_final == frozenset(expect)
        assert final.n == 2


def test_coupling_identity_all_ties():
    med = make_all_tie(4)
    initial = sample_percolation(4, 0.25, 55)
    final, audit = coupling_run(med, initial)
    assert audit.identity_holds
    assert audit.q_final == frozenset({0})
    assert audit.rounds_to_fixpoint <= 1


def test_coupling_identity_random_media():
    for i in range(50):
        med = build_medium(7, 0.5, fold(606, TAG_MEDIUM, i))
        initial = sample_percolation(7, 0.25, fold(606, TAG_PERC, i))
        final, audit = coupling_run(med, initial)
        assert audit.identity_holds
        assert audit.q_final == audit.reverse_accessible
        assert set(connected_component(final, 0)) == set(audit.q_final)


def test_coupling_preserves_open_marginal():
    # Overwritten statuses are fresh beta coins, so the final graph keeps
    # the i.i.d. open probability.
    beta = 0.25
    opened = total = 0
    for i in range(200):
        med = build_medium(7, 0.5, fold(909, TAG_MEDIUM, i))
        initial = sample_percolation(7, beta, fold(909, TAG_PERC, i))
        final, _ = coupling_run(med, initial)
        opened += int(final.open_edges.sum())
        total += final.open_edges.size
    se = math.sqrt(beta * (1 - beta) / total)
    assert abs(opened / total - beta) < 3 * se


def test_coupling_rejects_seed_reuse():
    med = build_medium(5, 0.5, 321)
    with pytest.raises(SeedCollision):
        coupling_run(med, sample_percolation(5, 0.25, 321))


def test_coupling_rejects_size_mismatch():
    med = build_medium(5, 0.5, 1)
    with pytest.raises(IncompleteTable):
        coupling_run(med, sample_percolation(4, 0.25, 2))


# ---------------------------------------------------------------------------
# serialization


def test_percolation_roundtrip():
    g = sample_percolation(7, 0.35, 888)
    back = PercolationGraph.load_bytes(g.dump_bytes())
    assert back.n == 7
    assert back.beta == pytest.approx(0.35)
    assert back.seed == 888
    assert np.array_equal(back.open_edges, g.open_edges)


def test_percolation_load_rejects_garbage():
    g = sample_percolation(4, 0.5, 3)
    blob = g.dump_bytes()
    with pytest.raises(IncompleteTable):
        PercolationGraph.load_bytes(b"BADMAGIC" + blob[8:])
    with pytest.raises(IncompleteTable):
        PercolationGraph.load_bytes(blob[:12])


# ---------------------------------------------------------------------------
# lemma check harness


def test_check_lemma_finally_reports():
    report = check_lemma_finally(6, 0.5, 30, seed=5)
    assert report["trials"] == 30
    assert 0.0 <= report["mismatch_frequency"] <= 1.0
    assert report["beta"] == pytest.approx(0.25)
    assert report == check_lemma_finally(6, 0.5, 30, seed=5)


def test_lemma_mismatches_fade_with_dimension():
    small = check_lemma_finally(4, 0.5, 60, seed=5)
    big = check_lemma_finally(10, 0.5, 60, seed=5)
    assert big["mismatch_frequency"] < small["mismatch_frequency"]


def test_check_lemma_finally_needs_trials():
    with pytest.raises(EmptyTrialCount):
        check_lemma_finally(4, 0.5, 0, seed=1)
