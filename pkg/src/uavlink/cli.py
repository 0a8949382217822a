"""Command-line driver: evaluate, sweep, simulate, optimize.

Exit codes: 0 success, 1 usage or I/O failure, 2 infeasible policy.
All commands are deterministic given their flags (seeds included).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import presets as ps
from . import simulator as sim
from . import throughput as tp
from .errors import ScenarioError, StabilityError, UavLinkError
from .scenario_io import Scenario, load_scenario_file, write_results
from .throughput import PolicyVector

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

log = logging.getLogger("uavlink")


class _Parser(argparse.ArgumentParser):
    # exit-code contract reserves 2 for infeasibility; usage problems are 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_beta_overrides(pairs: list[str]) -> dict[str, float]:
    overrides = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ScenarioError(f"--beta expects NODE=VALUE, got {pair!r}")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise ScenarioError(f"--beta {pair!r}: value is not a number") from None
    return overrides


def _load(path: str) -> Scenario:
    scenario = load_scenario_file(path)
    log.debug("loaded scenario %s: %d node(s)", path, len(scenario.nodes))
    return scenario


def _policy(scenario: Scenario, overrides: dict[str, float]) -> PolicyVector:
    policy = PolicyVector.from_scenario(scenario)
    for node_id, beta in overrides.items():
        scenario.node(node_id)  # raises for unknown ids
        policy = policy.updated(node_id, beta)
    return policy


def _print_breakdown(breakdown: tp.LossBreakdown) -> None:
    print(f"p_delay    = {breakdown.p_delay:.12g}")
    print(f"p_overflow = {breakdown.p_overflow:.12g}")
    print(f"p_error    = {breakdown.p_error:.12g}")
    print(f"p_loss     = {breakdown.p_loss:.12g}")
    print(f"throughput = {breakdown.throughput:.12g}")


def cmd_evaluate(args) -> int:
    scenario = _load(args.scenario)
    policy = _policy(scenario, _parse_beta_overrides(args.beta))
    breakdown = tp.evaluate(scenario, policy, approximate=args.approx)
    _print_breakdown(breakdown)
    if args.out:
        write_results(
            [
                {
                    "p_delay": breakdown.p_delay,
                    "p_overflow": breakdown.p_overflow,
                    "p_error": breakdown.p_error,
                    "p_loss": breakdown.p_loss,
                    "throughput": breakdown.throughput,
                }
            ],
            args.out,
        )
    if breakdown.p_delay >= 1.0 - 1e-12:
        print(
            "infeasible: the threshold sits on the stability boundary "
            "(deadline drop probability is 1)",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.preset:
        columns, rows = ps.run_preset(args.preset, args.seed)
    else:
        if not args.scenario or not args.var or not args.values:
            raise ScenarioError("sweep needs either --preset or --scenario/--var/--values")
        scenario = _load(args.scenario)
        values = tuple(float(v) for v in args.values.split(","))
        if args.var == "interferer_count":
            values = tuple(int(v) for v in values)
        columns, rows = ps.run_sweep(scenario, ps.SweepSpec(args.var, values))
    if args.out:
        write_results(rows, args.out, columns)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        write_results(rows, sys.stdout, columns)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = _load(args.scenario)
    policy = _policy(scenario, _parse_beta_overrides(args.beta))
    cfg = sim.SimConfig(
        num_slots=args.slots,
        seed=args.seed,
        warmup_slots=args.warmup,
        replication_count=args.replications,
    )
    result = sim.run(scenario, policy, cfg)
    try:
        analytic = tp.evaluate(scenario, policy)
        analytic_row = {
            "p_delay": analytic.p_delay,
            "p_overflow": analytic.p_overflow,
            "p_error": analytic.p_error,
            "throughput": analytic.throughput,
        }
    except StabilityError:
        analytic_row = None
    empirical = {
        "p_delay": result.p_delay,
        "p_overflow": result.p_overflow,
        "p_error": result.p_error,
        "throughput": result.throughput,
    }
    print(f"{'metric':<12}{'analytic':>16}{'empirical':>16}{'halfwidth':>14}{'gap':>14}")
    rows = []
    for name, estimate in empirical.items():
        if analytic_row is not None:
            gap = abs(analytic_row[name] - estimate.value)
            print(
                f"{name:<12}{analytic_row[name]:>16.6g}{estimate.value:>16.6g}"
                f"{estimate.halfwidth:>14.3g}{gap:>14.3g}"
            )
        else:
            gap = math.nan
            print(f"{name:<12}{'n/a':>16}{estimate.value:>16.6g}{estimate.halfwidth:>14.3g}{'n/a':>14}")
        rows.append(
            {
                "metric": name,
                "analytic": analytic_row[name] if analytic_row else math.nan,
                "empirical": estimate.value,
                "halfwidth": estimate.halfwidth,
                "gap": gap,
            }
        )
    if args.out:
        write_results(rows, args.out, ["metric", "analytic", "empirical", "halfwidth", "gap"])
    return EXIT_OK


def cmd_optimize(args) -> int:
    scenario = _load(args.scenario)
    result = tp.jacobi_best_response(
        scenario,
        grid_size=args.grid,
        tol=args.tol,
        max_iters=args.max_iters,
        objective=args.objective,
    )
    status = "converged" if result.converged else "not converged (best iterate returned)"
    print(f"status     = {status}")
    print(f"iterations = {result.iterations}")
    for node_id in sorted(result.policy.betas):
        last = result.trace[-1]
        print(
            f"node {node_id:<8} beta = {result.policy.get(node_id):<10.6g} "
            f"throughput = {last['throughput'][node_id]:.6g}"
        )
    if args.out:
        rows = []
        for entry in result.trace:
            for node_id, beta in entry["betas"].items():
                rows.append(
                    {
                        "iteration": entry["iteration"],
                        "node": node_id,
                        "beta": beta,
                        "throughput": entry["throughput"][node_id],
                    }
                )
        write_results(rows, args.out, ["iteration", "node", "beta", "throughput"])
        print(f"wrote trace ({len(rows)} rows) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uavlink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", metavar="PATH", help="scenario document (YAML)")
        p.add_argument("--out", metavar="PATH", help="write results to this file")

    p_eval = sub.add_parser("evaluate", help="loss breakdown of a scenario's source node")
    add_common(p_eval)
    p_eval.add_argument(
        "--beta", action="append", default=[], metavar="NODE=VALUE",
        help="override a node's threshold (repeatable)",
    )
    mode = p_eval.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="approx", action="store_false",
                      help="exact composed throughput (default)")
    mode.add_argument("--approx", dest="approx", action="store_true",
                      help="component-sum throughput approximation")
    p_eval.set_defaults(approx=False, func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="evaluate along a parameter axis or a preset")
    add_common(p_sweep)
    p_sweep.add_argument("--preset", choices=sorted(ps.PRESETS),
                         help="built-in sweep (pins the scenario)")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="placement seed override for presets")
    p_sweep.add_argument("--var", choices=ps.SWEEP_VARIABLES, help="sweep variable")
    p_sweep.add_argument("--values", help="comma-separated sweep values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="Monte Carlo oracle vs the analytic model")
    add_common(p_sim)
    p_sim.add_argument("--beta", action="append", default=[], metavar="NODE=VALUE",
                       help="override a node's threshold (repeatable)")
    p_sim.add_argument("--slots", type=int, default=100_000, help="slots per replication")
    p_sim.add_argument("--replications", type=int, default=4)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--warmup", type=int, default=1000, help="slots discarded before counting")
    p_sim.set_defaults(func=cmd_simulate)

    p_opt = sub.add_parser("optimize", help="Jacobi best-response over per-node thresholds")
    add_common(p_opt)
    p_opt.add_argument("--grid", type=int, default=64, help="candidate thresholds per node")
    p_opt.add_argument("--tol", type=float, default=1e-3, help="convergence tolerance on beta")
    p_opt.add_argument("--max-iters", type=int, default=50)
    p_opt.add_argument("--objective", choices=("own", "sum"), default="own",
                       help="best response on own throughput or the network sum")
    p_opt.set_defaults(func=cmd_optimize)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("UAVLINK_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "scenario", None) is not None and not Path(args.scenario).exists():
            print(f"error: scenario file not found: {args.scenario}", file=sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except StabilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UavLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
