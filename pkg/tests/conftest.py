"""Shared fixtures: small hand-built games and orientation tables.

The two-player examples are small enough to verify by hand; the escape
cube is a three-player table built so that best-response walkers get
stuck in the bottom face while mixed walkers can climb out of it.
"""

from __future__ import annotations

import numpy as np
import pytest

from nashwalk.medium import DOWN, TIE, UP, Medium, PayoffGame, medium_from_payoffs

# Payoffs for a 2-player game whose best-response digraph points every
# edge toward vertex 0 (the unique pure equilibrium).
GAMMA2_PAYOFFS = np.array(
    [
        [0.322, 0.214, 0.469, 0.202],
        [0.412, 0.878, 0.233, 0.311],
    ]
)

# Matching-pennies payoffs: the four vertices form one directed cycle,
# so there is no pure equilibrium and the whole square is a trap.
CYCLIC2_PAYOFFS = np.array(
    [
        [0.0, 1.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, 1.0],
    ]
)


@pytest.fixture
def gamma2_game() -> PayoffGame:
    return PayoffGame(2, GAMMA2_PAYOFFS.copy())


@pytest.fixture
def gamma2_medium(gamma2_game) -> Medium:
    return medium_from_payoffs(gamma2_game)


@pytest.fixture
def cyclic2_medium() -> Medium:
    return medium_from_payoffs(PayoffGame(2, CYCLIC2_PAYOFFS.copy()))


def make_all_tie(n: int) -> Medium:
    """Medium whose edges are all ties: every vertex is a sink."""
    table = np.zeros(n << (n - 1), dtype=np.int8)
    return Medium.from_orientation_table(n, table)


@pytest.fixture
def all_tie_medium() -> Medium:
    return make_all_tie(3)


@pytest.fixture
def escape_cube_medium() -> Medium:
    """3-cube: bottom face is a 4-cycle trap, top face drains into a PNE at 7.

    Axis-2 edges point down into the trap except 3-7, which is a tie.  A
    pure best-response walk started at 0 never leaves the bottom face; a
    walk that may also traverse in-edges can climb to vertex 7.
    """
    table = np.array(
        [
            UP, DOWN, UP, UP,        # axis 0: 0->1, 3->2, 4->5, 6->7
            DOWN, UP, UP, UP,        # axis 1: 2->0, 1->3, 4->6, 5->7
            DOWN, DOWN, DOWN, TIE,   # axis 2: 4->0, 5->1, 6->2, 3-7 tie
        ],
        dtype=np.int8,
    )
    return Medium.from_orientation_table(3, table)
