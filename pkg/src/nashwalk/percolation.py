"""Bond percolation on the cube and its coupling to oriented media.

An oriented medium with tie mass alpha induces, through a growth recursion,
a bond percolation with open probability beta = (1 - alpha) / 2: starting from
the set {0}, each round adds every outside vertex with an oriented edge into
the current set, while the percolation status of each set-to-boundary edge is
overwritten by that edge's "points inward" indicator — a fresh beta coin.  The
recursion's fixpoint is, deterministically, both the open component of vertex
0 in the final percolation and the set of vertices with an oriented path to 0.
Every run re-checks that identity; the run itself is the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .container import pack_container, unpack_container
from .errors import (
    BetaOutOfRange,
    DimensionTooLarge,
    EmptyTrialCount,
    IncompleteTable,
    SeedCollision,
)
from .medium import (
    DOWN,
    EXHAUSTIVE_CAP,
    Medium,
    Vertex,
    build_medium,
    edge_count,
    file_positions,
    squeeze_bit,
)
from .rng import MASK64, TAG_MEDIUM, TAG_PERC, fold, fold_np, threshold

PERC_MAGIC = b"NWPERC\x00\x00"  # 8-byte field, name NUL-padded
PERC_FORMAT_VERSION = 1


@dataclass
class PercolationGraph:
    """Open/closed state for every cube edge, axis-major like Medium tables."""

    n: int
    open_edges: np.ndarray  # bool, length n * 2^(n-1)
    beta: float | None = None
    seed: int | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(self.open_edges, dtype=bool)
        if arr.shape != (edge_count(self.n),):
            raise IncompleteTable(
                f"open-edge array must have {edge_count(self.n)} entries"
            )
        self.open_edges = arr

    def is_open(self, base: Vertex, axis: int) -> bool:
        return bool(self.open_edges[axis * (1 << (self.n - 1)) + squeeze_bit(base, axis)])

    def open_neighbors(self, v: Vertex) -> list[Vertex]:
        half = 1 << (self.n - 1)
        return [
            v ^ (1 << axis)
            for axis in range(self.n)
            if self.open_edges[axis * half + squeeze_bit(v, axis)]
        ]

    # -- serialization ----------------------------------------------------

    def header(self) -> dict:
        return {
            "n": self.n,
            "beta": self.beta,
            "seed": self.seed,
            "format_version": PERC_FORMAT_VERSION,
        }

    def dump_bytes(self) -> bytes:
        file_order = np.zeros(edge_count(self.n), dtype=np.uint8)
        file_order[file_positions(self.n)] = self.open_edges
        payload = np.packbits(file_order, bitorder="little").tobytes()
        return pack_container(PERC_MAGIC, self.header(), payload)

    @classmethod
    def load_bytes(cls, data: bytes) -> "PercolationGraph":
        header, payload = unpack_container(data, PERC_MAGIC)
        n = int(header["n"])
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
        if bits.size < edge_count(n):
            raise IncompleteTable("percolation payload too short")
        file_order = bits[: edge_count(n)].astype(bool)
        beta = header.get("beta")
        seed = header.get("seed")
        return cls(
            n,
            file_order[file_positions(n)],
            None if beta is None else float(beta),
            None if seed is None else int(seed),
        )


def sample_percolation(n: int, beta: float, seed: int) -> PercolationGraph:
    """i.i.d. bond percolation: each edge open with probability beta.

    Edge coins come from the stream fold(seed, "perc", base, axis), disjoint
    from medium orientation streams; for a fixed seed the open set is monotone
    nondecreasing in beta (shared uniforms, moving threshold).
    """
    if not (0.0 < beta < 1.0):
        raise BetaOutOfRange(f"beta must be in (0, 1), got {beta}")
    if not (1 <= n <= EXHAUSTIVE_CAP):
        raise DimensionTooLarge(f"percolation needs 1 <= n <= {EXHAUSTIVE_CAP}")
    seed &= MASK64
    half = 1 << (n - 1)
    t = np.uint64(threshold(beta))
    open_edges = np.empty(edge_count(n), dtype=bool)
    for axis in range(n):
        s = np.arange(half, dtype=np.uint64)
        low = s & np.uint64((1 << axis) - 1)
        bases = low | ((s >> np.uint64(axis)) << np.uint64(axis + 1))
        h = fold_np(seed, TAG_PERC, bases, axis)
        open_edges[axis * half : (axis + 1) * half] = h < t
    return PercolationGraph(n, open_edges, beta, seed)


# -- components --------------------------------------------------------------


def _component_labels(perc: PercolationGraph) -> np.ndarray:
    n = perc.n
    size = 1 << n
    half = 1 << (n - 1)
    srcs = []
    dsts = []
    for axis in range(n):
        block = perc.open_edges[axis * half : (axis + 1) * half]
        s = np.arange(half, dtype=np.uint64)
        low = s & np.uint64((1 << axis) - 1)
        bases = (low | ((s >> np.uint64(axis)) << np.uint64(axis + 1))).astype(np.int64)
        open_bases = bases[block]
        srcs.append(open_bases)
        dsts.append(open_bases | (1 << axis))
    src = np.concatenate(srcs)
    dst = np.concatenate(dsts)
    graph = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(size, size))
    _, labels = connected_components(graph, directed=False)
    return labels


def connected_component(perc: PercolationGraph, v: Vertex) -> set[int]:
    """Open-edge component of v."""
    seen = {v}
    queue = [v]
    while queue:
        u = queue.pop()
        for w in perc.open_neighbors(u):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


@dataclass(frozen=True)
class FragmentStats:
    n: int
    largest_component_size: int
    largest_component_min_vertex: int
    fragment_size: int  # 2^n minus the largest component


def largest_component(perc: PercolationGraph) -> np.ndarray:
    """Vertices of the largest open component, ties broken by smallest vertex."""
    labels = _component_labels(perc)
    sizes = np.bincount(labels)
    best = np.nonzero(sizes == sizes.max())[0]
    if len(best) > 1:
        # first occurrence of each label = its smallest vertex
        first = np.full(sizes.size, np.iinfo(np.int64).max, dtype=np.int64)
        idx = np.arange(labels.size, dtype=np.int64)
        np.minimum.at(first, labels, idx)
        best = best[np.argmin(first[best])]
    else:
        best = best[0]
    return np.nonzero(labels == best)[0]


def fragment_stats(perc: PercolationGraph) -> FragmentStats:
    comp = largest_component(perc)
    return FragmentStats(
        n=perc.n,
        largest_component_size=len(comp),
        largest_component_min_vertex=int(comp[0]),
        fragment_size=(1 << perc.n) - len(comp),
    )


# -- reverse accessibility and the coupling ----------------------------------


def reverse_accessible_from_zero(medium: Medium) -> set[int]:
    """Vertices with an oriented (best-response) path into vertex 0."""
    if medium.mode == "exhaustive":
        src, dst = medium.oriented_edge_arrays()
        size = 1 << medium.n_players
        rev = csr_matrix(
            (np.ones(len(src), dtype=np.int8), (dst, src)), shape=(size, size)
        )
        order = breadth_first_order(rev, 0, directed=True, return_predecessors=False)
        return set(int(x) for x in order)
    seen = {0}
    queue = [0]
    while queue:
        u = queue.pop()
        for w in medium.neighbor_partition(u).inward:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


@dataclass(frozen=True)
class CouplingAudit:
    q_final: frozenset
    component_of_zero: frozenset
    reverse_accessible: frozenset
    rounds_to_fixpoint: int
    identity_holds: bool


def coupling_run(
    medium: Medium, initial: PercolationGraph
) -> tuple[PercolationGraph, CouplingAudit]:
    """Grow the reverse-accessible set of 0, overwriting boundary edges.

    Each round assigns every edge between the current set and its complement
    (once — assignments are idempotent, asserted) the indicator "oriented into
    the set member", then admits outside endpoints of the open ones.  Returns
    the final percolation and an audit of the set identity, which must hold on
    every run.
    """
    n = medium.n_players
    if initial.n != n:
        raise IncompleteTable(f"percolation is on n={initial.n}, medium on n={n}")
    if initial.seed is not None and initial.seed == medium.params.seed:
        raise SeedCollision(
            "medium and initial percolation share a seed; use distinct streams"
        )
    half = 1 << (n - 1)
    final_open = initial.open_edges.copy()
    updated = np.zeros(final_open.size, dtype=bool)
    in_set = np.zeros(1 << n, dtype=bool)
    in_set[0] = True
    frontier = [0]
    rounds = 0
    while frontier:
        rounds += 1
        joined: list[int] = []
        for u in frontier:
            for axis in range(n):
                w = u ^ (1 << axis)
                if in_set[w]:
                    continue  # settled edge; never boundary again
                eid = axis * half + squeeze_bit(u, axis)
                # set-once: each boundary edge is assigned exactly when its
                # first endpoint joins, and assignments are idempotent anyway
                assert not updated[eid]
                code = medium.orientation_seen_from(u, axis)
                opens = code == DOWN  # oriented w -> u, into the set
                final_open[eid] = opens
                updated[eid] = True
                if opens:
                    joined.append(w)
        joined = sorted(set(joined))
        for w in joined:
            in_set[w] = True
        frontier = joined

    final = PercolationGraph(n, final_open, initial.beta, None)
    q_final = frozenset(int(v) for v in np.nonzero(in_set)[0])
    comp_zero = frozenset(connected_component(final, 0))
    rev = frozenset(reverse_accessible_from_zero(medium))
    audit = CouplingAudit(
        q_final=q_final,
        component_of_zero=comp_zero,
        reverse_accessible=rev,
        rounds_to_fixpoint=rounds,
        identity_holds=(q_final == comp_zero == rev),
    )
    return final, audit


def check_lemma_finally(n: int, alpha: float, trials: int, seed: int) -> dict:
    """Frequency of {largest open component != reverse-accessible set} over
    fresh (medium, percolation, coupling) trials."""
    if trials < 1:
        raise EmptyTrialCount(f"trials must be >= 1, got {trials}")
    beta = (1.0 - alpha) / 2.0
    mismatches = 0
    for i in range(trials):
        medium = build_medium(n, alpha, fold(seed, TAG_MEDIUM, i))
        initial = sample_percolation(n, beta, fold(seed, TAG_PERC, i))
        final, audit = coupling_run(medium, initial)
        assert audit.identity_holds
        big = frozenset(int(v) for v in largest_component(final))
        if big != audit.reverse_accessible:
            mismatches += 1
    return {
        "schema_version": 1,
        "n": n,
        "alpha": alpha,
        "beta": beta,
        "seed": seed,
        "trials": trials,
        "mismatches": mismatches,
        "mismatch_frequency": mismatches / trials,
    }
