"""Exact-arithmetic weighted congestion games with polynomial costs.

A game of degree d has a set of resources, each carrying a cost polynomial
of degree at most d with nonnegative coefficients, and a set of players,
each with a positive weight and an explicit list of strategies (nonempty
subsets of resource indices).  A state fixes one strategy index per player.

All scalars are `fractions.Fraction`: weights, coefficients, loads, costs
and potentials are exact, so every threshold comparison made by the solver
is bit-exact and reproducible.  All types are immutable after construction
and safe to share between threads; the operations below are pure functions.

Instance file format (JSON, UTF-8, strict — unknown keys are rejected)::

    {
      "degree": 2,
      "resources": [ {"coeffs": ["0", "1/2", "3"]}, ... ],
      "players":   [ {"weight": "3/2", "strategies": [[0, 1], [2]]}, ... ],
      "initial_state": [0, 1]          // optional
    }

Rationals are written as "p/q" or integer strings, always in lowest terms.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import (
    DegreeMismatchError,
    EmptyStrategyError,
    MalformedInstanceError,
    NegativeCoefficientError,
    ResourceIndexError,
)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse a strict "p/q" or integer string into an exact Fraction.

    Decimal notation is deliberately rejected: exact quantities never pass
    through floating point.
    """
    if not isinstance(text, str) or not _RATIONAL_RE.match(text.strip()):
        raise MalformedInstanceError(f"not a rational 'p/q' string: {text!r}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError as exc:
        raise MalformedInstanceError(f"zero denominator in {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p/q" (or "p" when the denominator is 1)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class CostPolynomial:
    """A polynomial cost function with nonnegative rational coefficients.

    ``coeffs[v]`` is the coefficient of x**v.  Trailing zeros are allowed;
    evaluation is nondecreasing on x >= 0 because all coefficients are >= 0.
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise MalformedInstanceError("cost polynomial needs >= 1 coefficient")
        for c in self.coeffs:
            if c < 0:
                raise NegativeCoefficientError(f"negative coefficient {c}")

    @property
    def degree(self) -> int:
        """Largest exponent with a nonzero coefficient (0 for the zero polynomial)."""
        for v in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[v] != 0:
                return v
        return 0

    def __call__(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def padded(self, degree: int) -> "CostPolynomial":
        """Return the same polynomial with exactly degree+1 coefficients."""
        if len(self.coeffs) > degree + 1:
            raise DegreeMismatchError(
                f"{len(self.coeffs)} coefficients exceed degree {degree}"
            )
        pad = (Fraction(0),) * (degree + 1 - len(self.coeffs))
        return CostPolynomial(self.coeffs + pad)


@dataclass(frozen=True)
class PlayerSpec:
    """A player: positive weight plus an explicit, nonempty strategy list.

    Each strategy is a set of resource indices, stored as a sorted tuple so
    that structural equality and serialization are canonical.
    """

    weight: Fraction
    strategies: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise MalformedInstanceError(f"weight must be positive, got {self.weight}")
        if not self.strategies:
            raise EmptyStrategyError("player has no strategies")
        for strat in self.strategies:
            if not strat:
                raise EmptyStrategyError("empty strategy")
            if len(set(strat)) != len(strat):
                raise MalformedInstanceError(f"duplicate resource in strategy {strat}")
            if tuple(sorted(strat)) != strat:
                raise MalformedInstanceError("strategy not in canonical sorted order")


def make_player(weight: Fraction, strategies: Iterable[Iterable[int]]) -> PlayerSpec:
    """Build a PlayerSpec, canonicalizing each strategy to a sorted tuple."""
    return PlayerSpec(
        weight=Fraction(weight),
        strategies=tuple(tuple(sorted(set(s))) for s in strategies),
    )


@dataclass(frozen=True)
class Game:
    """An immutable weighted congestion game of some fixed degree.

    Invariants checked at construction: degree >= 1, at least one player,
    every polynomial fits the degree (padded to exactly degree+1
    coefficients), and every strategy points at existing resources.
    """

    degree: int
    resources: tuple[CostPolynomial, ...]
    players: tuple[PlayerSpec, ...]

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise MalformedInstanceError(f"degree must be >= 1, got {self.degree}")
        if not self.players:
            raise MalformedInstanceError("game needs at least one player")
        if not self.resources:
            raise MalformedInstanceError("game needs at least one resource")
        object.__setattr__(
            self, "resources", tuple(p.padded(self.degree) for p in self.resources)
        )
        for player in self.players:
            for strat in player.strategies:
                for e in strat:
                    if not 0 <= e < len(self.resources):
                        raise ResourceIndexError(f"resource index {e} out of range")

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def num_resources(self) -> int:
        return len(self.resources)

    @property
    def is_normalized(self) -> bool:
        """True when every weight is >= 1 (the solver's preferred form)."""
        return min(p.weight for p in self.players) >= 1


@dataclass(frozen=True)
class State:
    """One chosen strategy index per player."""

    choices: tuple[int, ...]

    def with_choice(self, player: int, strategy: int) -> "State":
        c = list(self.choices)
        c[player] = strategy
        return State(tuple(c))


def validate_state(game: Game, state: State) -> None:
    if len(state.choices) != game.n:
        raise MalformedInstanceError(
            f"state has {len(state.choices)} entries for {game.n} players"
        )
    for u, k in enumerate(state.choices):
        if not 0 <= k < len(game.players[u].strategies):
            raise MalformedInstanceError(f"strategy index {k} invalid for player {u}")


def normalize(game: Game) -> Game:
    """Rescale weights and coefficients so that every weight is >= 1.

    With w_min the minimum weight, weights become w/w_min and the
    coefficient of x**v becomes a_v * w_min**v.  Every player's cost in
    every state is then scaled by the uniform factor 1/w_min, so all cost
    ratios between states are preserved exactly.  Identity when w_min >= 1.
    """
    w_min = min(p.weight for p in game.players)
    if w_min >= 1:
        return game
    resources = tuple(
        CostPolynomial(tuple(c * w_min**v for v, c in enumerate(poly.coeffs)))
        for poly in game.resources
    )
    players = tuple(
        PlayerSpec(weight=p.weight / w_min, strategies=p.strategies)
        for p in game.players
    )
    return Game(degree=game.degree, resources=resources, players=players)


def loads(game: Game, state: State) -> tuple[Fraction, ...]:
    """Total weight on each resource under the given state."""
    totals = [Fraction(0)] * game.num_resources
    for u, player in enumerate(game.players):
        w = player.weight
        for e in player.strategies[state.choices[u]]:
            totals[e] += w
    return tuple(totals)


def load(game: Game, state: State, resource: int) -> Fraction:
    """Total weight of players whose chosen strategy uses the resource."""
    if not 0 <= resource < game.num_resources:
        raise ResourceIndexError(f"resource index {resource} out of range")
    total = Fraction(0)
    for u, player in enumerate(game.players):
        if resource in player.strategies[state.choices[u]]:
            total += player.weight
    return total


def group_load(
    game: Game, state: State, players: Iterable[int], resource: int
) -> Fraction:
    """Total weight contributed to the resource by the given player group."""
    if not 0 <= resource < game.num_resources:
        raise ResourceIndexError(f"resource index {resource} out of range")
    total = Fraction(0)
    for u in players:
        player = game.players[u]
        if resource in player.strategies[state.choices[u]]:
            total += player.weight
    return total


def group_loads(game: Game, state: State, players: Iterable[int]) -> tuple[Fraction, ...]:
    """Per-resource loads restricted to a player group."""
    totals = [Fraction(0)] * game.num_resources
    for u in players:
        player = game.players[u]
        for e in player.strategies[state.choices[u]]:
            totals[e] += player.weight
    return tuple(totals)


def player_cost(game: Game, state: State, u: int) -> Fraction:
    """Exact cost of player u: weight times the summed resource costs."""
    if not 0 <= u < game.n:
        raise ResourceIndexError(f"player index {u} out of range")
    x = loads(game, state)
    player = game.players[u]
    total = Fraction(0)
    for e in player.strategies[state.choices[u]]:
        total += game.resources[e](x[e])
    return player.weight * total


def player_costs(game: Game, state: State) -> tuple[Fraction, ...]:
    """All players' costs at the state (loads computed once)."""
    x = loads(game, state)
    out = []
    for u, player in enumerate(game.players):
        total = Fraction(0)
        for e in player.strategies[state.choices[u]]:
            total += game.resources[e](x[e])
        out.append(player.weight * total)
    return tuple(out)


def group_cost(game: Game, state: State, players: Iterable[int]) -> Fraction:
    """Summed cost of a player group, via the per-resource form
    sum_e x_{R,e} * c_e(x_e); agrees exactly with summing player costs."""
    group = set(players)
    x = loads(game, state)
    x_group = group_loads(game, state, group)
    total = Fraction(0)
    for e in range(game.num_resources):
        if x_group[e] != 0:
            total += x_group[e] * game.resources[e](x[e])
    return total


def social_cost(game: Game, state: State) -> Fraction:
    return group_cost(game, state, range(game.n))


# --------------------------------------------------------------------------
# Instance (de)serialization
# --------------------------------------------------------------------------


def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise MalformedInstanceError(f"unknown keys {sorted(unknown)} in {where}")


def parse_instance(
    data: bytes | str, *, normalize_weights: bool = True
) -> tuple[Game, State | None]:
    """Parse an instance file; returns the game and its optional initial state.

    Parsing is strict: unknown keys, non-string rationals and malformed
    structure are rejected.  Weights below 1 are normalized away unless
    ``normalize_weights`` is False.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedInstanceError("top level must be an object")
    _require_keys(raw, {"degree", "resources", "players", "initial_state"}, "instance")

    degree = raw.get("degree")
    if not isinstance(degree, int) or isinstance(degree, bool) or degree < 1:
        raise MalformedInstanceError(f"degree must be an integer >= 1, got {degree!r}")

    if not isinstance(raw.get("resources"), list):
        raise MalformedInstanceError("'resources' must be a list")
    resources = []
    for i, entry in enumerate(raw["resources"]):
        if not isinstance(entry, dict):
            raise MalformedInstanceError(f"resource {i} must be an object")
        _require_keys(entry, {"coeffs"}, f"resource {i}")
        coeffs = entry.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            raise MalformedInstanceError(f"resource {i}: 'coeffs' must be a nonempty list")
        if len(coeffs) > degree + 1:
            raise DegreeMismatchError(
                f"resource {i}: {len(coeffs)} coefficients exceed degree {degree}"
            )
        resources.append(CostPolynomial(tuple(parse_rational(c) for c in coeffs)))

    if not isinstance(raw.get("players"), list):
        raise MalformedInstanceError("'players' must be a list")
    players = []
    for i, entry in enumerate(raw["players"]):
        if not isinstance(entry, dict):
            raise MalformedInstanceError(f"player {i} must be an object")
        _require_keys(entry, {"weight", "strategies"}, f"player {i}")
        weight = parse_rational(entry.get("weight"))
        strategies = entry.get("strategies")
        if not isinstance(strategies, list) or not strategies:
            raise EmptyStrategyError(f"player {i}: 'strategies' must be a nonempty list")
        parsed_strategies = []
        for strat in strategies:
            if not isinstance(strat, list):
                raise MalformedInstanceError(f"player {i}: strategy must be a list")
            for e in strat:
                if not isinstance(e, int) or isinstance(e, bool):
                    raise MalformedInstanceError(
                        f"player {i}: resource index {e!r} must be an integer"
                    )
            if len(set(strat)) != len(strat):
                raise MalformedInstanceError(f"player {i}: duplicate resource in {strat}")
            parsed_strategies.append(strat)
        players.append(make_player(weight, parsed_strategies))

    game = Game(degree=degree, resources=tuple(resources), players=tuple(players))

    initial_state = None
    if "initial_state" in raw:
        entries = raw["initial_state"]
        if not isinstance(entries, list) or not all(
            isinstance(k, int) and not isinstance(k, bool) for k in entries
        ):
            raise MalformedInstanceError("'initial_state' must be a list of integers")
        initial_state = State(tuple(entries))
        validate_state(game, initial_state)

    if normalize_weights:
        game = normalize(game)
    return game, initial_state


def parse_game(data: bytes | str, *, normalize_weights: bool = True) -> Game:
    """Parse an instance file, discarding any initial state."""
    return parse_instance(data, normalize_weights=normalize_weights)[0]


def serialize_instance(game: Game, initial_state: State | None = None) -> str:
    """Serialize to the canonical instance format (deterministic bytes)."""
    doc: dict = {
        "degree": game.degree,
        "resources": [
            {"coeffs": [format_rational(c) for c in poly.coeffs]}
            for poly in game.resources
        ],
        "players": [
            {
                "weight": format_rational(p.weight),
                "strategies": [list(s) for s in p.strategies],
            }
            for p in game.players
        ],
    }
    if initial_state is not None:
        doc["initial_state"] = list(initial_state.choices)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
