"""Instance generators: the tight lower-bound family and random games.

The lower-bound family has n players on n+1 chained resources.  With
r the unique positive root of rho*(x+1)^d = x^(d+1), player i carries
weight r^(-i), resource 1 costs a constant r^(d+2)/rho, and resource
j >= 2 costs r^((d+1)*j) * t^d.  Each player chooses between resource i
(the "optimal" slot) and resource i+1 (the "congested" slot).  At the
all-congested profile every player's best improvement factor is exactly
rho, while the social cost ratio against the all-optimal profile
approaches r^(d+1) as n grows.

Because the root is irrational it enters the instance only as a rational
approximation, obtained by exact bisection and taken from BELOW the true
root; this one-sided choice keeps the all-congested profile an exact
rho-equilibrium while perturbing the improvement ratios by less than
10^(1-digits) relative.

Random games use a splitmix-style 64-bit generator with fixed published
constants so identical seeds reproduce identical instances across
platforms and languages.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import MalformedInstanceError, PrecisionTooLowError
from .game import CostPolynomial, Game, PlayerSpec, State


def rational_root_below(d: int, rho: Fraction, digits: int) -> Fraction:
    """Rational lower approximation of the positive root of
    rho*(x+1)^d = x^(d+1), within 10^(-digits) of the root.

    Pure bisection in exact arithmetic; the returned value never exceeds
    the true root, so ratio-based equilibrium properties built from it
    err on the conservative side.
    """
    if d < 1 or rho < 1:
        raise MalformedInstanceError(f"need d >= 1 and rho >= 1, got d={d}, rho={rho}")

    def f(x: Fraction) -> Fraction:
        return rho * (x + 1) ** d - x ** (d + 1)

    lo = Fraction(1)
    hi = Fraction(2)
    while f(hi) > 0:
        hi *= 2
    width = Fraction(1, 10**digits)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class LowerBoundBundle:
    """A generated lower-bound instance with its two distinguished states.

    ``equilibrium_state`` puts player i on resource i+1 (strategy index 1
    everywhere); ``optimal_state`` puts player i on resource i (index 0).
    ``root_approx`` is the rational approximation of the generalized golden
    ratio the construction used.
    """

    game: Game
    equilibrium_state: State
    optimal_state: State
    root_approx: Fraction
    precision_digits: int


def gen_lower_bound(
    d: int, rho: Fraction, n: int, precision_digits: int
) -> LowerBoundBundle:
    """Build the n-player singleton lower-bound game for (d, rho).

    Weights are below 1 by construction, so weight normalization is
    deliberately skipped: the equilibrium and cost-ratio properties are
    scale-invariant and the verifier works on ratios only.

    Raises PrecisionTooLowError if the built instance cannot certify every
    improvement ratio within 10^(2-digits) relative of rho.
    """
    rho = Fraction(rho)
    if n < 1:
        raise MalformedInstanceError(f"need n >= 1, got {n}")
    if precision_digits < 10:
        raise MalformedInstanceError(
            f"need precision_digits >= 10, got {precision_digits}"
        )
    r = rational_root_below(d, rho, precision_digits)
    w = 1 / r

    resources = [CostPolynomial((r ** (d + 2) / rho,) + (Fraction(0),) * d)]
    for j in range(2, n + 2):
        coeffs = (Fraction(0),) * d + (r ** ((d + 1) * j),)
        resources.append(CostPolynomial(coeffs))

    players = tuple(
        PlayerSpec(weight=w**i, strategies=((i - 1,), (i,))) for i in range(1, n + 1)
    )
    game = Game(degree=d, resources=tuple(resources), players=players)
    equilibrium_state = State((1,) * n)
    optimal_state = State((0,) * n)

    # Certify the improvement ratios.  The chain structure makes every
    # player's ratio one of two exact values: player 1's weight cancels
    # against the constant resource, giving exactly rho, and each later
    # player's ratio telescopes to r^(d+1) / (1+r)^d, which equals rho only
    # at the true root.  (The small-n tests recompute per-player ratios from
    # full game evaluation and agree.)
    tolerance = Fraction(1, 10 ** (precision_digits - 2))
    first = (w * game.resources[1](w)) / (w * game.resources[0](w))
    if first != rho:
        raise PrecisionTooLowError(f"anchor player's ratio {first} is not exactly rho")
    if n >= 2:
        rest = r ** (d + 1) / (1 + r) ** d
        if abs(rest / rho - 1) > tolerance:
            raise PrecisionTooLowError(
                f"chain improvement ratio {float(rest):.6g} is not within "
                f"10^{2 - precision_digits} of rho={rho}"
            )
    return LowerBoundBundle(
        game=game,
        equilibrium_state=equilibrium_state,
        optimal_state=optimal_state,
        root_approx=r,
        precision_digits=precision_digits,
    )


class SplitMix64:
    """Splitmix-style 64-bit PRNG (constants 0x9E3779B97F4A7C15,
    0xBF58476D1CE4E5B9, 0x94D049BB133111EB), chosen for trivially portable
    cross-language reproduction."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int) -> None:
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n); modulo bias is irrelevant at the
        tiny ranges used here and keeps the stream definition one-line."""
        return self.next_u64() % n


def _sample_fraction(rng: SplitMix64, lo: Fraction, hi: Fraction, q: int) -> Fraction:
    """A rational in [lo, hi] with denominator dividing q."""
    lo_k = -((-lo.numerator * q) // lo.denominator)  # ceil(lo * q)
    hi_k = (hi.numerator * q) // hi.denominator      # floor(hi * q)
    if hi_k < lo_k:
        raise MalformedInstanceError(f"range [{lo}, {hi}] too narrow for grid 1/{q}")
    return Fraction(lo_k + rng.below(hi_k - lo_k + 1), q)


def gen_random(
    n: int,
    d: int,
    num_resources: int,
    strategies_per_player: int,
    max_strategy_size: int,
    coeff_range: tuple[Fraction, Fraction] = (Fraction(0), Fraction(2)),
    weight_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(3)),
    seed: int = 0,
    denominator: int = 4,
) -> Game:
    """Deterministic random game: same seed, same game, byte for byte.

    Coefficients and weights are rationals on the grid Z/denominator
    clipped to the given ranges; every coefficient slot 0..d is sampled
    independently.  Strategies are distinct-when-possible random resource
    subsets of size 1..max_strategy_size.
    """
    if n < 1 or d < 1 or num_resources < 1 or strategies_per_player < 1:
        raise MalformedInstanceError("all sizes must be positive")
    if not 1 <= max_strategy_size <= num_resources:
        raise MalformedInstanceError(
            f"max_strategy_size {max_strategy_size} not in [1, {num_resources}]"
        )
    lo_c, hi_c = Fraction(coeff_range[0]), Fraction(coeff_range[1])
    lo_w, hi_w = Fraction(weight_range[0]), Fraction(weight_range[1])
    if lo_c < 0 or lo_w <= 0:
        raise MalformedInstanceError("coefficients must be >= 0 and weights > 0")
    rng = SplitMix64(seed)

    resources = tuple(
        CostPolynomial(
            tuple(_sample_fraction(rng, lo_c, hi_c, denominator) for _ in range(d + 1))
        )
        for _ in range(num_resources)
    )

    players = []
    for _ in range(n):
        weight = _sample_fraction(rng, lo_w, hi_w, denominator)
        strategies: list[tuple[int, ...]] = []
        for _ in range(strategies_per_player):
            for _attempt in range(8):
                size = 1 + rng.below(max_strategy_size)
                pool = list(range(num_resources))
                picked = []
                for _k in range(size):
                    picked.append(pool.pop(rng.below(len(pool))))
                strat = tuple(sorted(picked))
                if strat not in strategies:
                    break
            strategies.append(strat)
        players.append(PlayerSpec(weight=weight, strategies=tuple(strategies)))
    return Game(degree=d, resources=resources, players=tuple(players))
