"""Shared fixtures and helpers for the test suite."""

from fractions import Fraction

import pytest

from irgames.game import Game, Infoset, Node, make_game
from irgames.strategies import BehavioralStrategy, StrategyProfile, profile_from


def strat(player: int, table: dict) -> BehavioralStrategy:
    """Shorthand: rows given as tuples of ints/Fractions/floats."""
    return BehavioralStrategy(
        player=player,
        table={iid: tuple(_num(p) for p in row) for iid, row in table.items()},
    )


def _num(p):
    if isinstance(p, float):
        return p
    return Fraction(p)


def single(table: dict) -> StrategyProfile:
    return profile_from(strat(1, table))


@pytest.fixture
def tiny_game() -> Game:
    """One decision node, two leaves; the smallest valid game."""
    nodes = [
        Node(id="r", owner=1, actions=("a", "b"), children=("za", "zb")),
        Node(id="za", owner="terminal"),
        Node(id="zb", owner="terminal"),
    ]
    utilities = {"za": (Fraction(1),), "zb": (Fraction(0),)}
    infosets = [Infoset(id="I", player=1, nodes=("r",), actions=("a", "b"))]
    return make_game(1, "r", nodes, utilities, infosets, name="tiny")
