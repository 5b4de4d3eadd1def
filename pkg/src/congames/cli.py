"""Command-line entry point wiring all modules together.

Subcommands: solve, verify, audit, brute-poa, poa, gen-lb, gen-random.
Exit codes are stable for scripting: 0 success / all checks pass,
1 usage error, 2 verification or audit failure, 3 input error.

Exact quantities (rho, weights, coefficients) are accepted only as "p/q"
or integer strings; decimal notation is rejected so nothing exact ever
passes through floating point.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, dynamics, instances, verify
from .errors import (
    CongamesError,
    InstanceError,
    NoEquilibriumError,
    StateSpaceTooLargeError,
    TraceMismatchError,
)
from .game import (
    State,
    format_rational,
    parse_instance,
    parse_rational,
    serialize_instance,
    validate_state,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_INPUT = 3


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors exit with code 1 instead of 2."""

    def error(self, message: str):  # noqa: D102
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_instance(path: str, keep_weights: bool):
    data = Path(path).read_bytes()
    return parse_instance(data, normalize_weights=not keep_weights)


def _read_state(path: str) -> State:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "choices" not in doc:
        raise InstanceError(f"{path}: state file must be {{\"choices\": [...]}}")
    return State(tuple(doc["choices"]))


def _write_state(path: str, state: State) -> None:
    Path(path).write_text(json.dumps({"choices": list(state.choices)}) + "\n")


def _factor_str(factor) -> str:
    if factor == float("inf"):
        return "inf"
    return f"{format_rational(factor)} (~{float(factor):.6f})"


def _cmd_solve(args: argparse.Namespace) -> int:
    game, initial = _read_instance(args.input, args.keep_weights)
    state = initial if initial is not None else State((0,) * game.n)
    validate_state(game, state)
    final, trace = dynamics.run_algorithm(game, state, p_override=args.p_override)
    _write_state(args.output, final)
    if args.trace:
        with open(args.trace, "w") as fp:
            dynamics.write_trace(trace, fp)
    factor = verify.min_equilibrium_factor(game, final)
    print(f"moves: {len(trace.moves)}")
    if trace.schedule is not None:
        print(f"phases: {trace.schedule.m}  p: {trace.schedule.p}"
              f"{'' if trace.schedule.exact_constants else '  (p overridden)'}")
    print(f"final equilibrium factor: {_factor_str(factor)}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    game, _ = _read_instance(args.game, args.keep_weights)
    state = _read_state(args.state)
    validate_state(game, state)
    group = None
    if args.group:
        group = [int(tok) for tok in args.group.split(",") if tok != ""]
        for u in group:
            if not 0 <= u < game.n:
                raise InstanceError(f"player index {u} out of range")
    factor = verify.min_equilibrium_factor(game, state, group)
    print(f"equilibrium factor: {_factor_str(factor)}")
    if args.rho is not None:
        rho = parse_rational(args.rho)
        ok = factor <= rho
        print(f"{'PASS' if ok else 'FAIL'}: factor <= {args.rho}")
        return EXIT_OK if ok else EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    game, _ = _read_instance(args.game, args.keep_weights)
    with open(args.trace) as fp:
        trace = dynamics.read_trace(fp)
    report = verify.audit_trace(game, trace)
    for ph in report.phases:
        slack = "-" if ph.key_slack is None else format_rational(ph.key_slack)
        print(
            f"phase {ph.phase}: moves={ph.move_count} movers={sorted(ph.movers)} "
            f"key_slack={slack} settled={ph.settled}"
        )
    print(f"final factor: {_factor_str(report.final_factor)}")
    if report.factor_ceiling is not None:
        print(f"ceiling:      {_factor_str(report.factor_ceiling)}")
    for failure in report.failures:
        print(f"FAIL: {failure}")
    print("audit: PASS" if report.passed else "audit: FAIL")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_brute_poa(args: argparse.Namespace) -> int:
    game, _ = _read_instance(args.game, args.keep_weights)
    rho = parse_rational(args.rho)
    poa, worst, optimum = verify.brute_force_poa(game, rho, state_cap=args.state_cap)
    print(f"poa: {_factor_str(poa)}")
    print(f"worst_state: {list(worst.choices)}")
    print(f"optimum_state: {list(optimum.choices)}")
    return EXIT_OK


def _analysis_rows(d_values: list[int], rho: float) -> list[dict]:
    rows = []
    for d in d_values:
        r = analysis.poa_bounds(d, rho)
        rows.append(
            {
                "d": d,
                "rho": rho,
                "phi": r.phi,
                "poa_bound": r.poa_bound,
                "lambert_bound": r.lambert_bound,
                "mu_hat": r.mu_hat,
                "B_at_mu_hat": r.B_at_mu_hat,
            }
        )
    return rows


def _cmd_poa(args: argparse.Namespace) -> int:
    rho = float(parse_rational(args.rho))
    d_values = list(range(1, args.table + 1)) if args.table else [args.d]
    rows = _analysis_rows(d_values, rho)
    cols = ["d", "rho", "phi", "poa_bound", "lambert_bound", "mu_hat", "B_at_mu_hat"]
    if args.format == "json":
        print(json.dumps(rows, indent=2, sort_keys=True))
    elif args.format == "csv":
        print(",".join(cols))
        for row in rows:
            print(",".join(f"{row[c]:.12g}" if c != "d" else str(row[c]) for c in cols))
    else:
        for row in rows:
            print(
                f"d={row['d']} rho={row['rho']:g}  phi={row['phi']:.6f}  "
                f"poa_bound={row['poa_bound']:.6f}  lambert_bound={row['lambert_bound']:.6f}  "
                f"mu_hat={row['mu_hat']:.6f}  B(mu_hat)={row['B_at_mu_hat']:.6f}"
            )
    return EXIT_OK


def _cmd_gen_lb(args: argparse.Namespace) -> int:
    rho = parse_rational(args.rho)
    bundle = instances.gen_lower_bound(args.d, rho, args.n, args.precision)
    Path(args.out).write_text(
        serialize_instance(bundle.game, initial_state=bundle.equilibrium_state)
    )
    print(
        json.dumps(
            {
                "equilibrium_state": list(bundle.equilibrium_state.choices),
                "optimal_state": list(bundle.optimal_state.choices),
                "root_approx": format_rational(bundle.root_approx),
                "root_approx_float": float(bundle.root_approx),
                "precision_digits": bundle.precision_digits,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _parse_range(text: str) -> tuple[Fraction, Fraction]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InstanceError(f"range must be LO:HI, got {text!r}")
    return parse_rational(lo), parse_rational(hi)


def _cmd_gen_random(args: argparse.Namespace) -> int:
    game = instances.gen_random(
        n=args.n,
        d=args.d,
        num_resources=args.resources,
        strategies_per_player=args.strategies,
        max_strategy_size=args.max_size,
        coeff_range=_parse_range(args.coeff_range),
        weight_range=_parse_range(args.weight_range),
        seed=args.seed,
    )
    Path(args.out).write_text(serialize_instance(game))
    print(f"wrote {args.out}: n={game.n} d={game.degree} resources={game.num_resources}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="congames", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_keep_weights(p: _Parser) -> None:
        p.add_argument(
            "--keep-weights",
            action="store_true",
            help="skip the automatic rescaling of weights below 1",
        )

    p = sub.add_parser("solve", help="run the phased best-response solver")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--trace", default=None)
    p.add_argument("--p-override", type=int, default=None)
    add_keep_weights(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="measure a state's equilibrium factor")
    p.add_argument("--game", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--rho", default=None, help='factor to check, as "p/q"')
    p.add_argument("--group", default=None, help="comma-separated player indices")
    add_keep_weights(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("audit", help="replay and check a solver trace")
    p.add_argument("--game", required=True)
    p.add_argument("--trace", required=True)
    add_keep_weights(p)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("brute-poa", help="exhaustive PoA of rho-equilibria")
    p.add_argument("--game", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--state-cap", type=int, default=10**6)
    add_keep_weights(p)
    p.set_defaults(func=_cmd_brute_poa)

    p = sub.add_parser("poa", help="PoA bounds table for (d, rho)")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--rho", default="1", help='approximation factor, as "p/q"')
    p.add_argument("--table", type=int, default=None, metavar="DMAX")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.set_defaults(func=_cmd_poa)

    p = sub.add_parser("gen-lb", help="generate a tight lower-bound instance")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--precision", type=int, default=40)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_lb)

    p = sub.add_parser("gen-random", help="generate a seeded random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--resources", type=int, required=True)
    p.add_argument("--strategies", type=int, default=2)
    p.add_argument("--max-size", type=int, default=2)
    p.add_argument("--coeff-range", default="0:2")
    p.add_argument("--weight-range", default="1:3")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_random)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (TraceMismatchError, NoEquilibriumError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (InstanceError, StateSpaceTooLargeError, CongamesError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
