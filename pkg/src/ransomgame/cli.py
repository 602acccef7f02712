"""Command-line front end: ``ransomgame <command> --config FILE [options]``.

Exit codes: 0 success, 1 usage error, 2 invalid or unreadable input,
3 no equilibrium found (``solve`` only). Data goes to stdout (or ``--out``),
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from typing import Optional, Sequence

from .experiment import (
    ConfigError,
    ScenarioConfig,
    format_value,
    load_config,
    load_sweep_spec,
    parse_overrides,
    run_sweep,
    write_csv,
)
from .model import DefenderProfile, ParameterError, payoff_report
from .simulate import SimulationConfig, simulate_stage2
from .solver import (
    OutcomeKind,
    best_response_dynamics,
    check_deterrence,
    deterrence_threshold,
    find_equilibrium,
    no_attack_backups,
    social_optimum,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_NOT_FOUND = 3

THRESHOLD_BRACKETS = {"C_B": (1e-4, 1e4), "C_A": (1e-4, 1e6)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for invalid input here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, metavar="PATH", help="scenario file")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a scenario value (repeatable)",
    )
    p.add_argument("--tolerance", type=float, help="equilibrium verification tolerance")
    p.add_argument("--quiet", action="store_true", help="suppress the human-readable report")
    p.add_argument("--json", action="store_true", help="print a JSON report on stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ransomgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="find an equilibrium of one scenario")
    _common(p)

    p = sub.add_parser("social-optimum", help="backups maximizing aggregate org payoff")
    _common(p)

    p = sub.add_parser("deterrence", help="deterrence check and thresholds")
    _common(p)

    p = sub.add_parser("dynamics", help="best-response dynamics trace as CSV")
    _common(p)
    p.add_argument("--start", nargs=2, type=float, metavar=("B1", "B2"),
                   help="initial backups (default: no-attack levels)")
    p.add_argument("--out", metavar="PATH", help="write the trace here instead of stdout")

    p = sub.add_parser("simulate", help="Monte Carlo check of the equilibrium payoffs")
    _common(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    _common(p)
    p.add_argument("--spec", required=True, metavar="PATH", help="sweep spec file")
    p.add_argument("--out", required=True, metavar="PATH", help="CSV destination")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _load(args) -> ScenarioConfig:
    overrides = parse_overrides(args.overrides)
    if args.tolerance is not None:
        overrides["solver.tolerance"] = repr(args.tolerance)
    return load_config(args.config, overrides)


def _say(args, text: str = "") -> None:
    if not args.quiet and not args.json:
        print(text)


def _emit_json(args, payload) -> None:
    if args.json:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _profile_dict(defenders, attacker, report) -> dict:
    return {
        "backup_1": defenders.backup_1,
        "backup_2": defenders.backup_2,
        "effort_1": attacker.effort_1,
        "effort_2": attacker.effort_2,
        "ransom": attacker.ransom,
        "org_payoff_1": report.org_payoff_1,
        "org_payoff_2": report.org_payoff_2,
        "attacker_payoff": report.attacker_payoff,
    }


def _describe(args, defenders, attacker, report) -> None:
    _say(args, f"  backups          b1={defenders.backup_1:.9g}  b2={defenders.backup_2:.9g}")
    _say(args, f"  attack efforts   a1={attacker.effort_1:.9g}  a2={attacker.effort_2:.9g}")
    _say(args, f"  ransom           r={attacker.ransom:.9g}")
    _say(args, f"  org payoffs      U1={report.org_payoff_1:.9g}  U2={report.org_payoff_2:.9g}")
    _say(args, f"  attacker payoff  {report.attacker_payoff:.9g}")


def cmd_solve(args) -> int:
    config = _load(args)
    s = config.solver
    outcome = find_equilibrium(
        config.groups, config.gparams, s.tolerance, s.max_iterations, s.cycle_tolerance
    )
    _say(args, outcome.kind.value)
    _describe(args, outcome.defenders, outcome.attacker, outcome.report)
    if outcome.cycle is not None:
        for i, prof in enumerate(outcome.cycle, start=1):
            _say(args, f"  cycle profile {i}  b=({prof.defenders.backup_1:.9g}, "
                       f"{prof.defenders.backup_2:.9g})  a=({prof.attacker.effort_1:.9g}, "
                       f"{prof.attacker.effort_2:.9g})  r={prof.attacker.ransom:.9g}")
    payload = {"kind": outcome.kind.value, "iterations": outcome.iterations}
    payload.update(_profile_dict(outcome.defenders, outcome.attacker, outcome.report))
    _emit_json(args, payload)
    if outcome.kind is OutcomeKind.NOT_FOUND:
        print("no equilibrium found within the iteration cap", file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def cmd_social_optimum(args) -> int:
    config = _load(args)
    so = social_optimum(config.groups, config.gparams, grid_points=config.solver.so_grid_points)
    _say(args, "SOCIAL_OPTIMUM")
    _describe(args, so.defenders, so.attacker, so.report)
    _say(args, f"  aggregate org payoff  {so.aggregate_org_payoff:.9g}")
    payload = _profile_dict(so.defenders, so.attacker, so.report)
    payload["aggregate_org_payoff"] = so.aggregate_org_payoff
    _emit_json(args, payload)
    return EXIT_OK


def cmd_deterrence(args) -> int:
    config = _load(args)
    deterred, defenders = check_deterrence(config.groups, config.gparams)
    thresholds = {}
    for name, (lo, hi) in THRESHOLD_BRACKETS.items():
        thresholds[name] = deterrence_threshold(config.groups, config.gparams, name, lo, hi)
    _say(args, f"deterred: {'yes' if deterred else 'no'}")
    _say(args, f"  no-attack backups  b1={defenders.backup_1:.9g}  b2={defenders.backup_2:.9g}")
    for name, value in thresholds.items():
        lo, hi = THRESHOLD_BRACKETS[name]
        text = f"{value:.9g}" if value is not None else f"no switch in [{lo:g}, {hi:g}]"
        _say(args, f"  {name} threshold  {text}")
    _emit_json(args, {
        "deterred": deterred,
        "backup_1": defenders.backup_1,
        "backup_2": defenders.backup_2,
        "thresholds": thresholds,
    })
    return EXIT_OK


TRACE_COLUMNS = ("iteration", "b1", "b2", "a1", "a2", "r")


def cmd_dynamics(args) -> int:
    config = _load(args)
    s = config.solver
    if args.start is not None:
        start = DefenderProfile(*args.start)
    else:
        start = no_attack_backups(config.groups, config.gparams)
    outcome, trace = best_response_dynamics(
        config.groups, config.gparams, start,
        max_iterations=s.max_iterations, tolerance=s.cycle_tolerance,
    )
    rows = [
        (k, p.defenders.backup_1, p.defenders.backup_2,
         p.attacker.effort_1, p.attacker.effort_2, p.attacker.ransom)
        for k, p in enumerate(trace, start=1)
    ]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    finally:
        if args.out:
            fh.close()
    print(f"{outcome.kind.value} after {outcome.iterations} rounds", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load(args)
    sim_config = SimulationConfig(args.samples, args.seed)
    s = config.solver
    outcome = find_equilibrium(
        config.groups, config.gparams, s.tolerance, s.max_iterations, s.cycle_tolerance
    )
    if outcome.cycle is not None:
        # Simulate each cycle profile separately; an averaged profile is not a play of the game.
        profiles = list(outcome.cycle)
    else:
        profiles = [outcome]
    results = []
    for prof in profiles:
        report = payoff_report(config.groups, config.gparams, prof.defenders, prof.attacker)
        result = simulate_stage2(
            config.groups, config.gparams, prof.defenders, prof.attacker, sim_config, args.workers
        )
        results.append((prof, report, result))
    _say(args, f"{outcome.kind.value}: {args.samples} samples, seed {args.seed}")
    payload = {"kind": outcome.kind.value, "samples": args.samples, "seed": args.seed, "profiles": []}
    for prof, report, result in results:
        _describe(args, prof.defenders, prof.attacker, report)
        labels = ("U1", "U2")
        for i in range(2):
            _say(args, f"  simulated {labels[i]}     {result.mean_org_payoff[i]:.9g} "
                       f"+/- {result.std_error_org[i]:.3g}")
        _say(args, f"  simulated attacker  {result.mean_attacker_payoff:.9g} "
                   f"+/- {result.std_error_attacker:.3g}")
        _say(args, f"  within 3 SE: {'yes' if result.within(report) else 'no'}")
        entry = _profile_dict(prof.defenders, prof.attacker, report)
        entry.update({
            "sim_org_payoff_1": result.mean_org_payoff[0],
            "sim_org_payoff_2": result.mean_org_payoff[1],
            "se_org_payoff_1": result.std_error_org[0],
            "se_org_payoff_2": result.std_error_org[1],
            "sim_attacker_payoff": result.mean_attacker_payoff,
            "se_attacker_payoff": result.std_error_attacker,
            "within_3se": result.within(report),
        })
        payload["profiles"].append(entry)
    _emit_json(args, payload)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args)
    spec = load_sweep_spec(args.spec)
    started = time.perf_counter()
    table = run_sweep(config, spec, jobs=args.jobs)
    write_csv(table, args.out)
    failed = sum(1 for r in table.rows if r.get("state") in ("NOT_FOUND", "ERROR"))
    if not args.quiet:
        print(
            f"{len(table.rows)} points -> {args.out} in {time.perf_counter() - started:.1f}s"
            + (f" ({failed} without equilibrium)" if failed else ""),
            file=sys.stderr,
        )
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "social-optimum": cmd_social_optimum,
    "deterrence": cmd_deterrence,
    "dynamics": cmd_dynamics,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParameterError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read or write file: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
