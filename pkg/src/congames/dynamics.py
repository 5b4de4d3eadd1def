"""Phased best-response dynamics for weighted polynomial congestion games.

The solver runs in m phases gated by geometrically decreasing cost
boundaries b_i = g^(-i) * c_max.  Phase 0 lets any player whose cost is at
least b_1 take a best response whenever that improves her cost by a factor
greater than alpha + 1/p (alpha = d+1).  Each later phase i allows a
non-fixed player to move if either her cost lies in [b_{i+1}, b_i) and she
improves beyond alpha + 1/p, or her cost is at least b_i and she improves
beyond the much larger factor p; when the phase drains, every non-fixed
player with cost >= b_i is fixed for good.  After the last phase all
remaining players are fixed (b_m is below every achievable cost), and the
final state is a p*(1+3/p)/(1-2/p)-approximate equilibrium.

All thresholds are exact rationals; the run is fully deterministic: the
scan always picks the lowest-index eligible player and ties between equal
best responses resolve to the lowest strategy index.  A complete Trace of
the run is emitted for independent auditing.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import IO

from .errors import (
    AlreadyZeroError,
    MalformedInstanceError,
    MoveBudgetExceededError,
    TraceMismatchError,
    ZeroMinCostError,
)
from .game import (
    Game,
    State,
    format_rational,
    loads,
    parse_rational,
    player_costs,
    serialize_instance,
    validate_state,
)
from .potential import alpha, potential

ALPHA_MOVE = "alpha_move"
P_MOVE = "p_move"


def target_p(degree: int) -> int:
    """The schedule's improvement-factor constant p = (2d+3)(d+1)(4d)^(d+1)."""
    d = degree
    return (2 * d + 3) * (d + 1) * (4 * d) ** (d + 1)


def best_response(game: Game, state: State, u: int) -> tuple[int, Fraction]:
    """Best strategy index for player u against the others' choices, with
    its exact cost.  Ties resolve to the lowest strategy index."""
    player = game.players[u]
    base = list(loads(game, state))
    for e in player.strategies[state.choices[u]]:
        base[e] -= player.weight
    best_idx = 0
    best_cost: Fraction | None = None
    for k, strat in enumerate(player.strategies):
        total = Fraction(0)
        for e in strat:
            total += game.resources[e](base[e] + player.weight)
        cost = player.weight * total
        if best_cost is None or cost < best_cost:
            best_idx, best_cost = k, cost
    assert best_cost is not None
    return best_idx, best_cost


def has_rho_move(game: Game, state: State, u: int, rho: Fraction) -> int | None:
    """Index of a strategy improving player u's cost by a factor strictly
    greater than rho, or None.  The witness returned is the best response."""
    if rho < 1:
        raise MalformedInstanceError(f"rho must be >= 1, got {rho}")
    br, br_cost = best_response(game, state, u)
    current = player_costs(game, state)[u]
    if current > rho * br_cost:
        return br
    return None


@dataclass(frozen=True)
class Schedule:
    """Derived constants of one solver run.

    boundaries[i] = g^(-i) * c_max for i = 0..m; b_m never exceeds c_min,
    the cheapest best response any player has against empty resources.
    ``exact_constants`` is False when p was overridden for experimentation.
    """

    p: int
    alpha: int
    c_max: Fraction
    c_min: Fraction
    m: int
    g: int
    boundaries: tuple[Fraction, ...]
    n_players: int
    exact_constants: bool = True

    @property
    def alpha_threshold(self) -> Fraction:
        """The small improvement factor alpha + 1/p."""
        return Fraction(self.alpha * self.p + 1, self.p)

    @property
    def final_factor_ceiling(self) -> Fraction:
        """Guaranteed equilibrium factor of the final state:
        p * (1 + 3/p) / (1 - 2/p)."""
        return Fraction(self.p * (self.p + 3), self.p - 2)

    def move_budget(self, phase: int) -> int:
        """Theoretical cap on moves in a phase; exceeding it means a bug."""
        n = self.n_players
        if phase == 0:
            return n * self.alpha * self.g * (self.alpha * self.p + 1)
        return n * self.g * (self.alpha * self.p + 1) * self.p


@dataclass(frozen=True)
class MoveRecord:
    """One executed best-response move, with exact before/after bookkeeping."""

    phase: int
    step: int
    player: int
    from_strategy: int
    to_strategy: int
    cost_before: Fraction
    cost_after: Fraction
    move_class: str
    potential_before: Fraction
    potential_after: Fraction


@dataclass(frozen=True)
class Trace:
    """Complete audit surface of a run.

    ``phase_end_states`` holds the state after each phase 0..m-1 and
    ``movers_per_phase`` the players who moved in each.  ``fixed_sets`` has
    m+1 entries: entry i < m lists the players fixed at the end of phase i
    (always empty for phase 0), entry m the players fixed by the final
    sweep at the b_m boundary.  ``schedule`` is None only for the trivial
    run in which every initial cost is zero.
    """

    schedule: Schedule | None
    initial_state: State
    final_state: State
    moves: tuple[MoveRecord, ...]
    phase_end_states: tuple[State, ...]
    movers_per_phase: tuple[frozenset[int], ...]
    fixed_sets: tuple[frozenset[int], ...]
    game_sha256: str


def game_fingerprint(game: Game) -> str:
    """SHA-256 of the canonical instance serialization (no initial state)."""
    return hashlib.sha256(serialize_instance(game).encode("utf-8")).hexdigest()


def empty_profile_best_cost(game: Game, u: int) -> Fraction:
    """Cheapest cost player u can get when she is alone on her resources:
    min over strategies of w_u * sum_e c_e(w_u)."""
    player = game.players[u]
    best: Fraction | None = None
    for strat in player.strategies:
        total = Fraction(0)
        for e in strat:
            total += game.resources[e](player.weight)
        cost = player.weight * total
        if best is None or cost < best:
            best = cost
    assert best is not None
    return best


def _ceil_log2(q: Fraction) -> int:
    """Smallest k >= 0 with 2^k >= q, for q >= 1, computed exactly."""
    k = 0
    power = 1
    while power < q:
        power *= 2
        k += 1
    return k


def compute_schedule(
    game: Game, s_init: State, p_override: int | None = None
) -> Schedule:
    """Derive the run's constants from the game and initial state.

    c_max is the largest player cost at s_init; c_min the smallest
    empty-profile best-response cost; m = max(1, ceil(log2(c_max/c_min)));
    g = n*p^3*(1+m*(1+p))^d*d^d + 1; boundaries b_i = g^(-i)*c_max.

    Raises AlreadyZeroError when c_max = 0 (s_init is trivially an
    equilibrium) and ZeroMinCostError when c_min = 0 (m is undefined).
    """
    validate_state(game, s_init)
    if not game.is_normalized:
        # the potential's alpha-approximation property needs weights >= 1
        raise MalformedInstanceError(
            "player weights must be >= 1 for the solver; apply normalize() first"
        )
    costs = player_costs(game, s_init)
    c_max = max(costs)
    if c_max == 0:
        raise AlreadyZeroError("all player costs are zero at the initial state")
    c_min = min(empty_profile_best_cost(game, u) for u in range(game.n))
    if c_min == 0:
        raise ZeroMinCostError("a player can reach cost zero; phase count undefined")

    d = game.degree
    p = target_p(d) if p_override is None else p_override
    if p < alpha(d) + 1:  # the p-move class must be stronger than alpha + 1/p
        raise MalformedInstanceError(f"p must be >= {alpha(d) + 1} for degree {d}, got {p}")
    m = max(1, _ceil_log2(c_max / c_min))
    g = game.n * p**3 * (1 + m * (1 + p)) ** d * d**d + 1
    boundaries = tuple(c_max * Fraction(1, g**i) for i in range(m + 1))
    return Schedule(
        p=p,
        alpha=alpha(d),
        c_max=c_max,
        c_min=c_min,
        m=m,
        g=g,
        boundaries=boundaries,
        exact_constants=p_override is None,
        n_players=game.n,
    )


def _trivial_trace(game: Game, s_init: State) -> Trace:
    return Trace(
        schedule=None,
        initial_state=s_init,
        final_state=s_init,
        moves=(),
        phase_end_states=(),
        movers_per_phase=(),
        fixed_sets=(),
        game_sha256=game_fingerprint(game),
    )


def run_algorithm(
    game: Game, s_init: State, p_override: int | None = None
) -> tuple[State, Trace]:
    """Run the phased best-response dynamics from s_init.

    Inside each phase the lowest-index eligible player moves first
    (re-scanned after every move), so runs are deterministic.  Every
    comparison against a boundary or an improvement threshold is exact.
    Returns the final state and the full Trace.  If all initial costs are
    zero the state is returned unchanged with an empty trace.
    """
    try:
        schedule = compute_schedule(game, s_init, p_override)
    except AlreadyZeroError:
        return s_init, _trivial_trace(game, s_init)

    n = game.n
    b = schedule.boundaries
    m = schedule.m
    thr_alpha = schedule.alpha_threshold
    thr_p = Fraction(schedule.p)

    state = s_init
    fixed: set[int] = set()
    moves: list[MoveRecord] = []
    phase_end_states: list[State] = []
    movers_per_phase: list[frozenset[int]] = []
    fixed_sets: list[frozenset[int]] = []
    step = 0

    def find_move(phase: int) -> tuple[int, int, Fraction, Fraction, str] | None:
        """First eligible (player, br, cost_before, cost_after, class)."""
        costs = player_costs(game, state)
        for u in range(n):
            if u in fixed:
                continue
            cost = costs[u]
            if phase == 0:
                if cost < b[1]:
                    continue
                threshold = thr_alpha
                move_class = ALPHA_MOVE
            elif cost >= b[phase]:
                threshold = thr_p
                move_class = P_MOVE
            elif cost >= b[phase + 1]:
                threshold = thr_alpha
                move_class = ALPHA_MOVE
            else:
                continue
            br, br_cost = best_response(game, state, u)
            if cost > threshold * br_cost:
                return u, br, cost, br_cost, move_class
        return None

    def run_phase(phase: int) -> None:
        nonlocal state, step
        budget = schedule.move_budget(phase)
        count = 0
        movers: set[int] = set()
        while True:
            found = find_move(phase)
            if found is None:
                break
            u, br, cost_before, cost_after, move_class = found
            count += 1
            if count > budget:
                raise MoveBudgetExceededError(
                    f"phase {phase} exceeded its move budget {budget}"
                )
            pot_before = potential(game, state)
            new_state = state.with_choice(u, br)
            pot_after = potential(game, new_state)
            moves.append(
                MoveRecord(
                    phase=phase,
                    step=step,
                    player=u,
                    from_strategy=state.choices[u],
                    to_strategy=br,
                    cost_before=cost_before,
                    cost_after=cost_after,
                    move_class=move_class,
                    potential_before=pot_before,
                    potential_after=pot_after,
                )
            )
            movers.add(u)
            state = new_state
            step += 1
        movers_per_phase.append(frozenset(movers))
        phase_end_states.append(state)

    run_phase(0)
    fixed_sets.append(frozenset())
    for phase in range(1, m):
        run_phase(phase)
        costs = player_costs(game, state)
        newly = frozenset(u for u in range(n) if u not in fixed and costs[u] >= b[phase])
        fixed |= newly
        fixed_sets.append(newly)
    costs = player_costs(game, state)
    newly = frozenset(u for u in range(n) if u not in fixed and costs[u] >= b[m])
    fixed |= newly
    fixed_sets.append(newly)

    trace = Trace(
        schedule=schedule,
        initial_state=s_init,
        final_state=state,
        moves=tuple(moves),
        phase_end_states=tuple(phase_end_states),
        movers_per_phase=tuple(movers_per_phase),
        fixed_sets=tuple(fixed_sets),
        game_sha256=game_fingerprint(game),
    )
    return state, trace


# --------------------------------------------------------------------------
# Trace (de)serialization: JSON Lines, header first, one move per line
# --------------------------------------------------------------------------


def _schedule_to_doc(schedule: Schedule | None) -> dict | None:
    if schedule is None:
        return None
    return {
        "p": schedule.p,
        "alpha": schedule.alpha,
        "c_max": format_rational(schedule.c_max),
        "c_min": format_rational(schedule.c_min),
        "m": schedule.m,
        "g": schedule.g,
        "boundaries": [format_rational(x) for x in schedule.boundaries],
        "exact_constants": schedule.exact_constants,
        "n_players": schedule.n_players,
    }


def _schedule_from_doc(doc: dict | None) -> Schedule | None:
    if doc is None:
        return None
    return Schedule(
        p=doc["p"],
        alpha=doc["alpha"],
        c_max=parse_rational(doc["c_max"]),
        c_min=parse_rational(doc["c_min"]),
        m=doc["m"],
        g=doc["g"],
        boundaries=tuple(parse_rational(x) for x in doc["boundaries"]),
        exact_constants=doc["exact_constants"],
        n_players=doc["n_players"],
    )


def write_trace(trace: Trace, fp: IO[str]) -> None:
    """Write a trace as JSON Lines: one header line, then one move per line."""
    header = {
        "game_sha256": trace.game_sha256,
        "schedule": _schedule_to_doc(trace.schedule),
        "initial_state": list(trace.initial_state.choices),
        "final_state": list(trace.final_state.choices),
        "phase_end_states": [list(s.choices) for s in trace.phase_end_states],
        "movers_per_phase": [sorted(r) for r in trace.movers_per_phase],
        "fixed_sets": [sorted(r) for r in trace.fixed_sets],
    }
    fp.write(json.dumps(header, sort_keys=True) + "\n")
    for mv in trace.moves:
        fp.write(
            json.dumps(
                {
                    "phase": mv.phase,
                    "step": mv.step,
                    "player": mv.player,
                    "from_strategy": mv.from_strategy,
                    "to_strategy": mv.to_strategy,
                    "cost_before": format_rational(mv.cost_before),
                    "cost_after": format_rational(mv.cost_after),
                    "move_class": mv.move_class,
                    "potential_before": format_rational(mv.potential_before),
                    "potential_after": format_rational(mv.potential_after),
                },
                sort_keys=True,
            )
            + "\n"
        )


def read_trace(fp: IO[str]) -> Trace:
    """Read a trace written by write_trace."""
    lines = [line for line in fp.read().splitlines() if line.strip()]
    if not lines:
        raise TraceMismatchError("empty trace file")
    try:
        header = json.loads(lines[0])
        move_docs = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise TraceMismatchError(f"invalid trace JSON: {exc}") from exc
    moves = tuple(
        MoveRecord(
            phase=doc["phase"],
            step=doc["step"],
            player=doc["player"],
            from_strategy=doc["from_strategy"],
            to_strategy=doc["to_strategy"],
            cost_before=parse_rational(doc["cost_before"]),
            cost_after=parse_rational(doc["cost_after"]),
            move_class=doc["move_class"],
            potential_before=parse_rational(doc["potential_before"]),
            potential_after=parse_rational(doc["potential_after"]),
        )
        for doc in move_docs
    )
    return Trace(
        schedule=_schedule_from_doc(header["schedule"]),
        initial_state=State(tuple(header["initial_state"])),
        final_state=State(tuple(header["final_state"])),
        moves=moves,
        phase_end_states=tuple(
            State(tuple(s)) for s in header["phase_end_states"]
        ),
        movers_per_phase=tuple(frozenset(r) for r in header["movers_per_phase"]),
        fixed_sets=tuple(frozenset(r) for r in header["fixed_sets"]),
        game_sha256=header["game_sha256"],
    )
