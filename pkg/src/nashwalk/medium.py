"""Randomly oriented hypercube media.

A medium over n players assigns each edge of the n-cube one of three states:
Tie (unoriented), Up (oriented from the endpoint whose axis bit is 0 toward the
endpoint whose axis bit is 1) or Down (the reverse).  Vertices are n-bit ints,
bit i being player i's action; flipping bit i moves along axis i.  Each edge is
i.i.d.: Tie with probability alpha, each direction with beta = (1 - alpha) / 2.

Orientations are a pure function of (seed, base, axis).  Exhaustive media
materialize the whole table (n * 2^(n-1) entries); lazy media hash on demand
and agree with their exhaustive twin edge-for-edge.  Media can also be derived
from an explicit payoff table: the edge along axis i is oriented toward the
endpoint where player i earns strictly more, Tie on equal payoffs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .container import pack_container, unpack_container
from .errors import (
    AlphaOutOfRange,
    AxisOutOfRange,
    DimensionTooLarge,
    ExhaustiveModeRequired,
    IncompleteTable,
    NonCanonicalEdge,
)
from .rng import MASK64, fold, fold_np, threshold

Vertex = int

TIE = 0
UP = 1
DOWN = 2

MODE_EXHAUSTIVE = "exhaustive"
MODE_LAZY = "lazy"

EXHAUSTIVE_CAP = 24
LAZY_CAP = 62

MEDIUM_MAGIC = b"NWMEDIUM"
MEDIUM_FORMAT_VERSION = 1


@dataclass(frozen=True)
class EdgeRef:
    """Canonical edge handle: base vertex with the axis bit clear."""

    base: Vertex
    axis: int


@dataclass(frozen=True)
class MediumParams:
    n_players: int
    alpha: float
    seed: int
    mode: str = MODE_EXHAUSTIVE

    @property
    def beta(self) -> float:
        return (1.0 - self.alpha) / 2.0


class NeighborPartition(NamedTuple):
    out: list[Vertex]
    inward: list[Vertex]
    tie: list[Vertex]


def edge_count(n: int) -> int:
    return n << (n - 1)


def squeeze_bit(v: int, axis: int) -> int:
    """Drop bit `axis` from v, closing the gap (inverse of expand_bit)."""
    low = v & ((1 << axis) - 1)
    return low | ((v >> (axis + 1)) << axis)


def expand_bit(s: int, axis: int) -> int:
    """Insert a zero bit at position `axis`."""
    low = s & ((1 << axis) - 1)
    return low | ((s >> axis) << (axis + 1))


def edge_index(base: Vertex, axis: int, n: int) -> int:
    """Axis-major position of a canonical edge in the in-memory table."""
    return axis * (1 << (n - 1)) + squeeze_bit(base, axis)


def _tie_up_thresholds(alpha: float) -> tuple[int, int]:
    # [0, t_tie) -> Tie, [t_tie, t_up) -> Up, [t_up, 2^64) -> Down.  The
    # Up/Down split is the exact integer midpoint of the non-tie mass.
    t_tie = threshold(alpha)
    t_up = t_tie + ((1 << 64) - t_tie) // 2
    return t_tie, t_up


def _validate_params(params: MediumParams) -> None:
    if not (0.0 <= params.alpha < 1.0):
        raise AlphaOutOfRange(f"alpha must be in [0, 1), got {params.alpha}")
    if params.n_players < 1:
        raise DimensionTooLarge("n_players must be >= 1")
    cap = EXHAUSTIVE_CAP if params.mode == MODE_EXHAUSTIVE else LAZY_CAP
    if params.n_players > cap:
        raise DimensionTooLarge(
            f"n_players={params.n_players} exceeds {params.mode} cap {cap}"
        )
    if params.mode not in (MODE_EXHAUSTIVE, MODE_LAZY):
        raise ValueError(f"unknown mode {params.mode!r}")


class Medium:
    """Orientation oracle over the n-cube's edges.

    Use :func:`build_medium` / :func:`medium_from_payoffs` /
    :meth:`Medium.from_orientation_table` instead of constructing directly.
    """

    def __init__(self, params: MediumParams, table: np.ndarray | None):
        self.params = params
        self._table = table  # int8, axis-major, or None in lazy mode
        n = params.n_players
        self._half = 1 << (n - 1)
        if table is None:
            self._t_tie, self._t_up = _tie_up_thresholds(params.alpha)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_orientation_table(
        cls, n: int, table, alpha: float = 0.0, seed: int = 0
    ) -> "Medium":
        """Wrap an explicit axis-major orientation table (tests, fixtures)."""
        arr = np.ascontiguousarray(table, dtype=np.int8)
        if arr.shape != (edge_count(n),):
            raise IncompleteTable(
                f"orientation table must have {edge_count(n)} entries, got {arr.shape}"
            )
        if arr.size and (arr.min() < TIE or arr.max() > DOWN):
            raise IncompleteTable("orientation codes must be 0 (tie), 1 (up) or 2 (down)")
        return cls(MediumParams(n, alpha, seed, MODE_EXHAUSTIVE), arr)

    # -- core queries ------------------------------------------------------

    @property
    def n_players(self) -> int:
        return self.params.n_players

    @property
    def mode(self) -> str:
        return self.params.mode

    def check_edge(self, edge: EdgeRef) -> None:
        n = self.params.n_players
        if not (0 <= edge.axis < n):
            raise AxisOutOfRange(f"axis {edge.axis} outside [0, {n})")
        if not (0 <= edge.base < (1 << n)):
            raise NonCanonicalEdge(f"base {edge.base} outside the {n}-cube")
        if (edge.base >> edge.axis) & 1:
            raise NonCanonicalEdge(
                f"base {edge.base:#x} has bit {edge.axis} set; not canonical"
            )

    def orientation(self, edge: EdgeRef) -> int:
        """Orientation code of a canonical edge (TIE / UP / DOWN)."""
        self.check_edge(edge)
        if self._table is not None:
            return int(self._table[edge_index(edge.base, edge.axis, self.n_players)])
        return self._hash_orientation(edge.base, edge.axis)

    def _hash_orientation(self, base: int, axis: int) -> int:
        h = fold(self.params.seed, base, axis)
        if h < self._t_tie:
            return TIE
        return UP if h < self._t_up else DOWN

    def orientation_seen_from(self, v: Vertex, axis: int) -> int:
        """Edge state relative to v: UP = out of v, DOWN = into v, TIE = tie."""
        code = self.orientation(EdgeRef(v & ~(1 << axis), axis))
        if code == TIE:
            return TIE
        if (v >> axis) & 1:
            return DOWN if code == UP else UP
        return code

    def neighbor_partition(self, v: Vertex) -> NeighborPartition:
        """Split v's n neighbors into (out, inward, tie), ordered by axis."""
        n = self.params.n_players
        if not (0 <= v < (1 << n)):
            raise NonCanonicalEdge(f"vertex {v} outside the {n}-cube")
        out: list[int] = []
        inward: list[int] = []
        tie: list[int] = []
        table = self._table
        for axis in range(n):
            if table is not None:
                code = int(table[axis * self._half + squeeze_bit(v, axis)])
            else:
                code = self._hash_orientation(v & ~(1 << axis), axis)
            w = v ^ (1 << axis)
            if code == TIE:
                tie.append(w)
            elif (code == UP) == (((v >> axis) & 1) == 0):
                out.append(w)
            else:
                inward.append(w)
        return NeighborPartition(out, inward, tie)

    # -- vectorized views (exhaustive only) --------------------------------

    def require_table(self) -> np.ndarray:
        if self._table is None:
            raise ExhaustiveModeRequired(
                "operation needs an exhaustive orientation table"
            )
        return self._table

    def axis_block(self, axis: int) -> np.ndarray:
        """Orientation codes for all canonical edges along one axis."""
        table = self.require_table()
        return table[axis * self._half : (axis + 1) * self._half]

    def axis_bases(self, axis: int) -> np.ndarray:
        """Base vertices for axis_block(axis), in block order (uint64)."""
        s = np.arange(self._half, dtype=np.uint64)
        low = s & np.uint64((1 << axis) - 1)
        return low | ((s >> np.uint64(axis)) << np.uint64(axis + 1))

    def degrees(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(out_degree, in_degree, tie_degree) arrays over all vertices."""
        n = self.n_players
        size = 1 << n
        out_deg = np.zeros(size, dtype=np.int16)
        in_deg = np.zeros(size, dtype=np.int16)
        tie_deg = np.zeros(size, dtype=np.int16)
        for axis in range(n):
            block = self.axis_block(axis)
            bases = self.axis_bases(axis).astype(np.int64)
            partners = bases | (1 << axis)
            up = block == UP
            down = block == DOWN
            t = block == TIE
            out_deg[bases] += up
            in_deg[partners] += up
            out_deg[partners] += down
            in_deg[bases] += down
            tie_deg[bases] += t
            tie_deg[partners] += t
        return out_deg, in_deg, tie_deg

    def oriented_edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """All oriented edges as (src, dst) int64 arrays (ties excluded)."""
        n = self.n_players
        srcs: list[np.ndarray] = []
        dsts: list[np.ndarray] = []
        for axis in range(n):
            block = self.axis_block(axis)
            bases = self.axis_bases(axis).astype(np.int64)
            partners = bases | (1 << axis)
            up = block == UP
            down = block == DOWN
            srcs.append(bases[up])
            dsts.append(partners[up])
            srcs.append(partners[down])
            dsts.append(bases[down])
        return np.concatenate(srcs), np.concatenate(dsts)

    # -- serialization ------------------------------------------------------

    def header(self) -> dict:
        return {
            "n_players": self.params.n_players,
            "alpha": self.params.alpha,
            "seed": self.params.seed,
            "mode": self.params.mode,
            "format_version": MEDIUM_FORMAT_VERSION,
        }

    def dump_bytes(self) -> bytes:
        """Binary dump: header plus 2-bit entries in (base asc, axis asc) order."""
        table = self.require_table()
        n = self.n_players
        file_order = np.empty(table.size, dtype=np.uint8)
        file_order[file_positions(n)] = table
        return pack_container(MEDIUM_MAGIC, self.header(), _pack2(file_order))

    @classmethod
    def load_bytes(cls, data: bytes) -> "Medium":
        header, payload = unpack_container(data, MEDIUM_MAGIC)
        n = int(header["n_players"])
        params = MediumParams(
            n, float(header["alpha"]), int(header["seed"]), str(header["mode"])
        )
        _validate_params(params)
        file_order = _unpack2(payload, edge_count(n))
        table = file_order[file_positions(n)].astype(np.int8)
        if table.size and table.max() > DOWN:
            raise IncompleteTable("orientation payload contains invalid codes")
        return cls(params, table)


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def _edge_offsets(n: int) -> np.ndarray:
    """offsets[v] = number of canonical edges with base < v."""
    v = np.arange(1 << n, dtype=np.uint64)
    zeros = n - _popcount(v)
    offsets = np.zeros(1 << n, dtype=np.int64)
    np.cumsum(zeros[:-1], out=offsets[1:])
    return offsets


def file_positions(n: int) -> np.ndarray:
    """Permutation from the axis-major table layout to the serialized
    (base ascending, axis ascending) canonical edge order."""
    half = 1 << (n - 1)
    pos = np.empty(edge_count(n), dtype=np.int64)
    offsets = _edge_offsets(n)
    for axis in range(n):
        s = np.arange(half, dtype=np.uint64)
        low = s & np.uint64((1 << axis) - 1)
        bases = (low | ((s >> np.uint64(axis)) << np.uint64(axis + 1))).astype(np.int64)
        rank = axis - _popcount(bases & ((1 << axis) - 1))
        pos[axis * half : (axis + 1) * half] = offsets[bases] + rank
    return pos


def _pack2(codes: np.ndarray) -> bytes:
    """Pack 2-bit codes, four per byte, entry k in bits 2k..2k+1 of its byte."""
    padded = np.zeros((codes.size + 3) // 4 * 4, dtype=np.uint8)
    padded[: codes.size] = codes
    quads = padded.reshape(-1, 4)
    return (
        quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4) | (quads[:, 3] << 6)
    ).astype(np.uint8).tobytes()


def _unpack2(payload: bytes, count: int) -> np.ndarray:
    if len(payload) < (count + 3) // 4:
        raise IncompleteTable(
            f"payload holds {len(payload) * 4} entries, need {count}"
        )
    raw = np.frombuffer(payload, dtype=np.uint8)
    out = np.empty(len(raw) * 4, dtype=np.uint8)
    out[0::4] = raw & 3
    out[1::4] = (raw >> 2) & 3
    out[2::4] = (raw >> 4) & 3
    out[3::4] = (raw >> 6) & 3
    return out[:count]


def build_medium(
    n_players: int,
    alpha: float,
    seed: int,
    mode: str = MODE_EXHAUSTIVE,
) -> Medium:
    """Sample the i.i.d. edge law: Tie w.p. alpha, Up/Down w.p. (1-alpha)/2 each.

    The orientation of edge (base, axis) is a pure function of
    (seed, base, axis); exhaustive and lazy media with equal params agree on
    every edge.
    """
    params = MediumParams(n_players, alpha, seed & MASK64, mode)
    _validate_params(params)
    if mode == MODE_LAZY:
        return Medium(params, None)
    t_tie, t_up = _tie_up_thresholds(alpha)  # both < 2^64 since alpha < 1
    n = n_players
    half = 1 << (n - 1)
    table = np.empty(edge_count(n), dtype=np.int8)
    tt, tu = np.uint64(t_tie), np.uint64(t_up)
    for axis in range(n):
        s = np.arange(half, dtype=np.uint64)
        low = s & np.uint64((1 << axis) - 1)
        bases = low | ((s >> np.uint64(axis)) << np.uint64(axis + 1))
        h = fold_np(params.seed, bases, axis)
        codes = np.full(half, DOWN, dtype=np.int8)
        codes[h < tu] = UP
        if t_tie > 0:
            codes[h < tt] = TIE
        table[axis * half : (axis + 1) * half] = codes
    return Medium(params, table)


# -- payoff games ----------------------------------------------------------

DIST_CONTINUOUS_UNIFORM = "continuous_uniform"
DIST_BERNOULLI = "bernoulli"
DIST_DISCRETE_UNIFORM = "discrete_uniform"
DIST_EXPLICIT = "explicit"

_PAYOFF_TAG = int.from_bytes(b"payoff", "little")


@dataclass(frozen=True)
class PayoffSpec:
    kind: str
    p: float | None = None
    k: int | None = None

    def induced_alpha(self) -> float:
        """Tie probability of the orientation law this family induces."""
        if self.kind == DIST_CONTINUOUS_UNIFORM:
            return 0.0
        if self.kind == DIST_BERNOULLI:
            p = 0.5 if self.p is None else self.p
            return p * p + (1.0 - p) * (1.0 - p)
        if self.kind == DIST_DISCRETE_UNIFORM:
            return 1.0 / self.k
        return 0.0  # explicit tables carry no generative tie mass


@dataclass(frozen=True, eq=False)
class PayoffGame:
    """n-player binary-action game: payoffs[i][u] is player i's payoff at u."""

    n_players: int
    payoffs: np.ndarray  # shape (n, 2^n), float64
    spec: PayoffSpec = field(default_factory=lambda: PayoffSpec(DIST_EXPLICIT))

    def __post_init__(self):
        arr = np.asarray(self.payoffs, dtype=np.float64)
        n = self.n_players
        if arr.shape != (n, 1 << n):
            raise IncompleteTable(
                f"payoff table must be shape ({n}, {1 << n}), got {arr.shape}"
            )
        if not np.isfinite(arr).all():
            raise IncompleteTable("payoff table contains non-finite entries")
        object.__setattr__(self, "payoffs", arr)


def sample_payoff_game(n_players: int, spec: PayoffSpec, seed: int) -> PayoffGame:
    """Draw an explicit payoff table from one of the supported families."""
    if n_players < 1 or n_players > EXHAUSTIVE_CAP:
        raise DimensionTooLarge(f"payoff games need 1 <= n <= {EXHAUSTIVE_CAP}")
    size = 1 << n_players
    table = np.empty((n_players, size), dtype=np.float64)
    for i in range(n_players):
        h = fold_np(seed, _PAYOFF_TAG, i, np.arange(size, dtype=np.uint64))
        if spec.kind == DIST_CONTINUOUS_UNIFORM:
            table[i] = (h >> np.uint64(11)) * (2.0 ** -53)
        elif spec.kind == DIST_BERNOULLI:
            p = 0.5 if spec.p is None else spec.p
            t = threshold(p)
            if t >= 1 << 64:
                table[i] = 1.0
            else:
                table[i] = (h < np.uint64(t)).astype(np.float64)
        elif spec.kind == DIST_DISCRETE_UNIFORM:
            if not spec.k or spec.k < 1:
                raise IncompleteTable("discrete_uniform needs k >= 1")
            table[i] = (h % np.uint64(spec.k)).astype(np.float64)
        else:
            raise IncompleteTable(f"cannot sample family {spec.kind!r}")
    return PayoffGame(n_players, table, spec)


def medium_from_payoffs(game: PayoffGame) -> Medium:
    """Orient each edge toward the endpoint its mover strictly prefers.

    Edge (base, axis) compares player `axis`'s payoff at base and at
    base^(1<<axis); equal payoffs give a tie.
    """
    n = game.n_players
    half = 1 << (n - 1)
    table = np.empty(edge_count(n), dtype=np.int8)
    for axis in range(n):
        s = np.arange(half, dtype=np.uint64)
        low = s & np.uint64((1 << axis) - 1)
        bases = (low | ((s >> np.uint64(axis)) << np.uint64(axis + 1))).astype(np.int64)
        partners = bases | (1 << axis)
        at_base = game.payoffs[axis, bases]
        at_partner = game.payoffs[axis, partners]
        codes = np.full(half, TIE, dtype=np.int8)
        codes[at_partner > at_base] = UP
        codes[at_base > at_partner] = DOWN
        table[axis * half : (axis + 1) * half] = codes
    params = MediumParams(n, game.spec.induced_alpha(), 0, MODE_EXHAUSTIVE)
    return Medium(params, table)


# module-level operation aliases matching the functional interface

def orientation(medium: Medium, edge: EdgeRef) -> int:
    return medium.orientation(edge)


def neighbor_partition(medium: Medium, v: Vertex) -> NeighborPartition:
    return medium.neighbor_partition(v)
