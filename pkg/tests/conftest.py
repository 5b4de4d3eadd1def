"""Shared helpers for the test suite: deterministic random rationals,
tiny game builders, and a brute-force social-cost oracle."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from congames import CostPolynomial, Game, State, make_player


def random_fraction(rng: random.Random, lo: int, hi: int, den: int = 8) -> Fraction:
    """Uniform rational in [lo, hi] on the grid Z/den."""
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_polynomial(
    rng: random.Random, degree: int, max_coeff: int = 3, allow_zero: bool = True
) -> CostPolynomial:
    coeffs = [random_fraction(rng, 0, max_coeff) for _ in range(degree + 1)]
    if not allow_zero and all(c == 0 for c in coeffs):
        coeffs[rng.randrange(degree + 1)] = random_fraction(rng, 1, max_coeff)
    return CostPolynomial(tuple(coeffs))


def random_game(
    rng: random.Random,
    n: int,
    degree: int,
    num_resources: int,
    strategies: int = 3,
    max_size: int = 2,
    positive_costs: bool = False,
) -> Game:
    resources = tuple(
        random_polynomial(rng, degree, allow_zero=not positive_costs)
        for _ in range(num_resources)
    )
    players = []
    for _ in range(n):
        weight = random_fraction(rng, 1, 3)
        strats = []
        for _ in range(strategies):
            size = rng.randint(1, max_size)
            strats.append(rng.sample(range(num_resources), size))
        players.append(make_player(weight, strats))
    return Game(degree=degree, resources=resources, players=tuple(players))


def random_state(rng: random.Random, game: Game) -> State:
    return State(tuple(rng.randrange(len(p.strategies)) for p in game.players))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)


def single_player_game() -> Game:
    """One player, weight 1, single strategy on a linear resource."""
    return Game(
        degree=1,
        resources=(CostPolynomial((Fraction(0), Fraction(1))),),
        players=(make_player(Fraction(1), [[0]]),),
    )
