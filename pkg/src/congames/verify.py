"""Verification oracles: equilibrium factors, brute-force PoA, trace audits.

Everything here recomputes from first principles in exact rational
arithmetic.  The brute-force enumerations are deliberately capped and fail
loudly rather than truncating, since their whole value is oracle status.
A player who has positive cost but a zero-cost deviation gets the explicit
infinite factor (math.inf), never a large stand-in number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .dynamics import (
    ALPHA_MOVE,
    P_MOVE,
    Trace,
    best_response,
    compute_schedule,
    game_fingerprint,
)
from .errors import (
    AlreadyZeroError,
    NoEquilibriumError,
    StateSpaceTooLargeError,
    TraceMismatchError,
)
from .game import Game, State, group_cost, player_costs, social_cost
from .potential import partial_potential, potential

Factor = Fraction | float  # exact rational, or math.inf as explicit sentinel


def _ratio(numer: Fraction, denom: Fraction) -> Factor:
    if denom == 0:
        return Fraction(1) if numer == 0 else math.inf
    return numer / denom


def min_equilibrium_factor(
    game: Game, state: State, players: Iterable[int] | None = None
) -> Factor:
    """Smallest rho for which the state is a rho-equilibrium for the group:
    the worst ratio of current cost to best-response cost over the group.

    0/0 counts as factor 1; positive cost against a zero-cost deviation is
    the explicit infinite factor.
    """
    group = range(game.n) if players is None else players
    costs = player_costs(game, state)
    worst: Factor = Fraction(1)
    for u in group:
        _, br_cost = best_response(game, state, u)
        r = _ratio(costs[u], br_cost)
        if r > worst:
            worst = r
    return worst


def enumerate_states(game: Game, state_cap: int = 10**6) -> list[State]:
    """All states of the game, or StateSpaceTooLargeError above the cap."""
    total = 1
    for p in game.players:
        total *= len(p.strategies)
        if total > state_cap:
            raise StateSpaceTooLargeError(
                f"state space exceeds cap {state_cap}"
            )
    ranges = [range(len(p.strategies)) for p in game.players]
    return [State(choices) for choices in itertools.product(*ranges)]


def brute_force_poa(
    game: Game, rho: Fraction, state_cap: int = 10**6
) -> tuple[Factor, State, State]:
    """Exhaustive price of anarchy of rho-approximate equilibria.

    Enumerates every state; the optimum minimizes social cost, and the
    result is the worst ratio C(s)/C(s*) over states whose equilibrium
    factor is at most rho.  Raises NoEquilibriumError when no state
    qualifies (possible in weighted games for small rho).
    """
    states = enumerate_states(game, state_cap)
    costs = [social_cost(game, s) for s in states]
    opt_index = min(range(len(states)), key=lambda i: costs[i])
    optimum = states[opt_index]
    opt_cost = costs[opt_index]

    poa: Factor | None = None
    worst_state: State | None = None
    for s, c in zip(states, costs):
        if min_equilibrium_factor(game, s) > rho:
            continue
        r = _ratio(c, opt_cost)
        if poa is None or r > poa:
            poa, worst_state = r, s
    if poa is None or worst_state is None:
        raise NoEquilibriumError(f"no {rho}-approximate equilibrium exists")
    return poa, worst_state, optimum


def smoothness_peakroup_poa_ratio(
    game: Game, rho: Fraction, state_cap: int = 10**6
) -> Factor:
    """Worst group cost ratio C_R(s)/C_R(s*) over all triples (R, s, s*)
    where s is a rho-equilibrium for R and the complement of R plays the
    same strategies in s and s*.  Exhaustive; tiny games only."""
    states = enumerate_states(game, state_cap)
    n = game.n
    factors = [
        [_ratio(player_costs(game, s)[u], best_response(game, s, u)[1]) for u in range(n)]
        for s in states
    ]
    worst: Factor = Fraction(0)
    for group_sizes in range(1, n + 1):
        for group in itertools.combinations(range(n), group_sizes):
            complement = [u for u in range(n) if u not in group]
            group_costs = [group_cost(game, s, group) for s in states]
            buckets: dict[tuple[int, ...], list[int]] = {}
            for i, s in enumerate(states):
                key = tuple(s.choices[u] for u in complement)
                buckets.setdefault(key, []).append(i)
            for bucket in buckets.values():
                eq = [i for i in bucket if max(factors[i][u] for u in group) <= rho]
                if not eq:
                    continue
                for i in eq:
                    for j in bucket:
                        r = _ratio(group_costs[i], group_costs[j])
                        if r > worst:
                            worst = r
    return worst


def max_rho_stretch_ratio(
    game: Game, rho: Fraction, state_cap: int = 10**6
) -> Factor:
    """Worst partial-potential ratio over the same (R, s, s') triples as
    smoothness_peakroup_poa_ratio; bounded by alpha * Phi(d, rho)^(d+1)."""
    states = enumerate_states(game, state_cap)
    n = game.n
    factors = [
        [_ratio(player_costs(game, s)[u], best_response(game, s, u)[1]) for u in range(n)]
        for s in states
    ]
    worst: Factor = Fraction(0)
    for group_sizes in range(1, n + 1):
        for group in itertools.combinations(range(n), group_sizes):
            complement = [u for u in range(n) if u not in group]
            potentials = [partial_potential(game, s, group) for s in states]
            buckets: dict[tuple[int, ...], list[int]] = {}
            for i, s in enumerate(states):
                key = tuple(s.choices[u] for u in complement)
                buckets.setdefault(key, []).append(i)
            for bucket in buckets.values():
                eq = [i for i in bucket if max(factors[i][u] for u in group) <= rho]
                for i in eq:
                    for j in bucket:
                        r = _ratio(potentials[i], potentials[j])
                        if r > worst:
                            worst = r
    return worst


# --------------------------------------------------------------------------
# Trace auditing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MoveAudit:
    """Per-move ledger entry: exact potential drop against the floor
    cost_before/(alpha*p + 1), plus eligibility legality."""

    step: int
    phase: int
    player: int
    cost_before: Fraction
    potential_drop: Fraction
    required_drop: Fraction
    drop_ok: bool
    legal: bool


@dataclass(frozen=True)
class PhaseAudit:
    """Per-phase summary.

    ``key_slack`` is n*p*b_i - partial potential of the phase's movers at
    the phase-start state (phases >= 1 only); nonnegative slack is the
    phase-potential bound the runtime argument rests on.  ``settled`` means
    no eligible player remained when the phase ended.
    """

    phase: int
    movers: frozenset[int]
    boundary: Fraction
    start_partial_potential: Fraction
    key_slack: Fraction | None
    key_ok: bool
    last_move_costs_bound: Fraction      # alpha * sum of movers' last-move costs
    end_partial_potential: Fraction
    cost_reveal_ok: bool
    move_count: int
    move_budget: int
    budget_ok: bool
    settled: bool


@dataclass(frozen=True)
class FixAudit:
    """Cost drift of one player from the state where she was fixed to the
    final state; bounded by the factor 1 + 3/p."""

    player: int
    fixed_after_phase: int
    cost_at_fix: Fraction
    final_cost: Fraction
    ok: bool


@dataclass(frozen=True)
class AuditReport:
    moves: tuple[MoveAudit, ...]
    phases: tuple[PhaseAudit, ...]
    fixes: tuple[FixAudit, ...]
    final_factor: Factor
    factor_ceiling: Fraction | None
    factor_ok: bool
    passed: bool
    failures: tuple[str, ...] = field(default=())


def _check_same(label: str, recorded, recomputed) -> None:
    if recorded != recomputed:
        raise TraceMismatchError(
            f"{label}: recorded {recorded!r} disagrees with recomputation {recomputed!r}"
        )


def _eligible_move_exists(
    game: Game,
    state: State,
    phase: int,
    fixed: set[int],
    boundaries: Sequence[Fraction],
    thr_alpha: Fraction,
    thr_p: Fraction,
) -> bool:
    costs = player_costs(game, state)
    for u in range(game.n):
        if u in fixed:
            continue
        cost = costs[u]
        if phase == 0:
            if cost < boundaries[1]:
                continue
            threshold = thr_alpha
        elif cost >= boundaries[phase]:
            threshold = thr_p
        elif cost >= boundaries[phase + 1]:
            threshold = thr_alpha
        else:
            continue
        if cost > threshold * best_response(game, state, u)[1]:
            return True
    return False


def audit_trace(game: Game, trace: Trace) -> AuditReport:
    """Replay a trace from scratch and check every invariant the run claims.

    Recorded values (costs, potentials, states, schedule, fingerprint) must
    match exact recomputation; disagreement raises TraceMismatchError.
    Property violations — potential drops below the per-move floor, a
    phase-start partial potential above n*p*b_i, cost inflation of a fixed
    player beyond 1 + 3/p, busted move budgets, an excessive final factor —
    do not raise; they are returned in the report with the offending
    phase or move named.
    """
    _check_same("game fingerprint", trace.game_sha256, game_fingerprint(game))

    failures: list[str] = []
    final_factor = min_equilibrium_factor(game, trace.final_state)

    if trace.schedule is None:
        if max(player_costs(game, trace.initial_state)) != 0:
            raise TraceMismatchError("scheduleless trace but initial costs not all zero")
        _check_same("final state", trace.final_state, trace.initial_state)
        _check_same("move count", len(trace.moves), 0)
        return AuditReport(
            moves=(),
            phases=(),
            fixes=(),
            final_factor=final_factor,
            factor_ceiling=None,
            factor_ok=True,
            passed=True,
        )

    schedule = trace.schedule
    recomputed = compute_schedule(
        game,
        trace.initial_state,
        p_override=None if schedule.exact_constants else schedule.p,
    )
    _check_same("schedule", schedule, recomputed)

    n = game.n
    b = schedule.boundaries
    m = schedule.m
    a = schedule.alpha
    p = schedule.p
    thr_alpha = schedule.alpha_threshold
    thr_p = Fraction(p)
    drop_denominator = a * p + 1

    _check_same("phase count (end states)", len(trace.phase_end_states), m)
    _check_same("phase count (movers)", len(trace.movers_per_phase), m)
    _check_same("fixed set count", len(trace.fixed_sets), m + 1)

    move_audits: list[MoveAudit] = []
    phase_audits: list[PhaseAudit] = []
    fix_audits: list[FixAudit] = []

    state = trace.initial_state
    fixed: set[int] = set()
    fixed_after: dict[int, tuple[int, Fraction]] = {}  # player -> (phase, cost then)
    move_iter = iter(trace.moves)
    pending = next(move_iter, None)
    expected_step = 0

    for phase in range(m):
        movers: set[int] = set()
        last_cost_after: dict[int, Fraction] = {}
        start_state = state
        move_count = 0

        while pending is not None and pending.phase == phase:
            mv = pending
            _check_same(f"move {mv.step} step order", mv.step, expected_step)
            u = mv.player
            costs = player_costs(game, state)
            _check_same(f"move {mv.step} from_strategy", mv.from_strategy, state.choices[u])
            _check_same(f"move {mv.step} cost_before", mv.cost_before, costs[u])
            pot_before = potential(game, state)
            _check_same(f"move {mv.step} potential_before", mv.potential_before, pot_before)
            new_state = state.with_choice(u, mv.to_strategy)
            _check_same(
                f"move {mv.step} cost_after",
                mv.cost_after,
                player_costs(game, new_state)[u],
            )
            pot_after = potential(game, new_state)
            _check_same(f"move {mv.step} potential_after", mv.potential_after, pot_after)

            legal = u not in fixed
            if mv.move_class == P_MOVE:
                legal = legal and phase >= 1 and costs[u] >= b[phase]
                legal = legal and mv.cost_before > thr_p * mv.cost_after
            elif mv.move_class == ALPHA_MOVE:
                if phase == 0:
                    legal = legal and costs[u] >= b[1]
                else:
                    legal = legal and b[phase + 1] <= costs[u] < b[phase]
                legal = legal and mv.cost_before > thr_alpha * mv.cost_after
            else:
                legal = False
            if not legal:
                failures.append(f"move {mv.step}: ineligible move recorded")

            drop = pot_before - pot_after
            required = mv.cost_before / drop_denominator
            drop_ok = drop >= required
            if not drop_ok:
                failures.append(
                    f"move {mv.step}: potential drop {drop} below floor {required}"
                )
            move_audits.append(
                MoveAudit(
                    step=mv.step,
                    phase=phase,
                    player=u,
                    cost_before=mv.cost_before,
                    potential_drop=drop,
                    required_drop=required,
                    drop_ok=drop_ok,
                    legal=legal,
                )
            )
            movers.add(u)
            last_cost_after[u] = mv.cost_after
            state = new_state
            move_count += 1
            expected_step += 1
            pending = next(move_iter, None)

        if pending is not None and pending.phase < phase:
            raise TraceMismatchError(f"move {pending.step}: phases not nondecreasing")

        _check_same(f"phase {phase} end state", trace.phase_end_states[phase], state)
        _check_same(f"phase {phase} movers", trace.movers_per_phase[phase], frozenset(movers))

        start_partial = partial_potential(game, start_state, movers)
        end_partial = partial_potential(game, state, movers)

        key_slack: Fraction | None = None
        key_ok = True
        if phase >= 1:
            key_slack = n * p * b[phase] - start_partial
            key_ok = key_slack >= 0
            if not key_ok:
                failures.append(
                    f"phase {phase}: movers' start potential {start_partial} "
                    f"exceeds n*p*b_{phase} = {n * p * b[phase]}"
                )

        reveal_bound = a * sum(last_cost_after.values(), Fraction(0))
        cost_reveal_ok = end_partial <= reveal_bound
        if not cost_reveal_ok:
            failures.append(
                f"phase {phase}: movers' end potential {end_partial} exceeds "
                f"alpha-weighted last-move costs {reveal_bound}"
            )

        budget = schedule.move_budget(phase)
        budget_ok = move_count <= budget
        if not budget_ok:
            failures.append(f"phase {phase}: {move_count} moves exceed budget {budget}")

        settled = not _eligible_move_exists(game, state, phase, fixed, b, thr_alpha, thr_p)
        if not settled:
            failures.append(f"phase {phase}: ended while an eligible move remained")

        phase_audits.append(
            PhaseAudit(
                phase=phase,
                movers=frozenset(movers),
                boundary=b[phase],
                start_partial_potential=start_partial,
                key_slack=key_slack,
                key_ok=key_ok,
                last_move_costs_bound=reveal_bound,
                end_partial_potential=end_partial,
                cost_reveal_ok=cost_reveal_ok,
                move_count=move_count,
                move_budget=budget,
                budget_ok=budget_ok,
                settled=settled,
            )
        )

        if phase >= 1:
            costs = player_costs(game, state)
            newly = frozenset(
                u for u in range(n) if u not in fixed and costs[u] >= b[phase]
            )
            _check_same(f"phase {phase} fixed set", trace.fixed_sets[phase], newly)
            for u in sorted(newly):
                fixed_after[u] = (phase, costs[u])
            fixed |= newly

    if pending is not None:
        raise TraceMismatchError(f"move {pending.step}: phase {pending.phase} >= m = {m}")

    _check_same("fixed set for phase 0", trace.fixed_sets[0], frozenset())
    costs = player_costs(game, state)
    newly = frozenset(u for u in range(n) if u not in fixed and costs[u] >= b[m])
    _check_same("final fixed set", trace.fixed_sets[m], newly)
    for u in sorted(newly):
        fixed_after[u] = (m, costs[u])
    fixed |= newly
    _check_same("all players fixed", frozenset(range(n)), frozenset(fixed))
    _check_same("final state", trace.final_state, state)

    inflation_bound = Fraction(p + 3, p)
    final_costs = player_costs(game, trace.final_state)
    for u in range(n):
        j, cost_then = fixed_after[u]
        ok = final_costs[u] <= inflation_bound * cost_then
        if not ok:
            failures.append(
                f"player {u}: cost grew from {cost_then} at fixing (phase {j}) "
                f"to {final_costs[u]}, beyond factor 1 + 3/p"
            )
        fix_audits.append(
            FixAudit(
                player=u,
                fixed_after_phase=j,
                cost_at_fix=cost_then,
                final_cost=final_costs[u],
                ok=ok,
            )
        )

    ceiling = schedule.final_factor_ceiling
    factor_ok = final_factor <= ceiling
    if not factor_ok:
        failures.append(f"final factor {final_factor} exceeds ceiling {ceiling}")

    return AuditReport(
        moves=tuple(move_audits),
        phases=tuple(phase_audits),
        fixes=tuple(fix_audits),
        final_factor=final_factor,
        factor_ceiling=ceiling,
        factor_ok=factor_ok,
        passed=not failures,
        failures=tuple(failures),
    )
