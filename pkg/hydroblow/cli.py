#!/usr/bin/env python3
"""
hydroblow command line
profile, simulate, oracle, modulate, fit, scenario, sweep and accept
"""

import argparse
import json
import logging
import math
import sys
import traceback
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .acceptance import AcceptanceSuite
from .config.settings import output_root, parse_config
from .core.errors import ConfigError, HydroblowError, PipelineStageError, ProfileDomainError, ScenarioError
from .core.profile import ProfileSpec, evaluate_points, profile_residual
from .core.scaling_laws import DecayLaw, LawMode, fit_blowup_time, fit_nu_law, fit_remainder_decay, fit_summary
from .output_writer import emit_outputs, fmt, read_modulation, read_norms, to_jsonable
from .pipeline.run_complete_pipeline import CompletePipelineRunner, explore_kappa, summarize, sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_ACCEPTANCE = 4

COMMANDS = ("profile", "simulate", "oracle", "modulate", "fit", "scenario", "sweep", "accept")


class UsageParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {self.prog}: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="hydroblow", description="Reduced primitive-equations blow-up laboratory")
    parser.add_argument("--version", action="version", version=f"hydroblow {__version__}")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", parser_class=UsageParser)

    p = sub.add_parser("profile", help="tabulate phi_beta, phi', psi and the ODE residual")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--zmin", type=float, default=0.0)
    p.add_argument("--zmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", help="CSV path (default: stdout)")

    for name, text in (("simulate", "integrate the reduced model"),
                       ("oracle", "compare the solver with the characteristics oracle"),
                       ("modulate", "solver plus modulation diagnostics"),
                       ("scenario", "full scenario run with fits and verdicts")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.add_argument("--out", help="output directory (default: <root>/<name>)")
        p.add_argument("--progress", action="store_true")
        if name == "oracle":
            p.add_argument("--n", type=int, default=None, help="particle intervals (default: grid.n)")

    p = sub.add_parser("fit", help="fit rate laws from written CSV outputs")
    p.add_argument("--norms", required=True)
    p.add_argument("--modulation")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--window-frac", type=float, default=0.25)
    p.add_argument("--out", help="JSON path (default: stdout)")

    p = sub.add_parser("sweep", help="run several scenarios, or one scenario over kappa values")
    p.add_argument("--config", required=True, nargs="+")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--kappas", type=float, nargs="+", help="explore kappa on the first config")

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", help="skip the long scenario criteria")
    return parser


def _configure_logging(verbose: bool):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def cmd_profile(args) -> int:
    if args.points < 2 or not args.zmax > args.zmin >= 0.0:
        raise ConfigError("profile needs points >= 2 and 0 <= zmin < zmax")
    try:
        spec = ProfileSpec(beta=args.beta)
    except ProfileDomainError as e:
        raise ConfigError(str(e)) from e
    zs = np.linspace(args.zmin, args.zmax, args.points)
    lines = ["z,phi,phi_prime,psi,residual"]
    for point in evaluate_points(spec, zs):
        try:
            residual = profile_residual(spec, point.z) if point.z > 0.0 else math.nan
        except ProfileDomainError:
            residual = math.nan
        lines.append(",".join(fmt(v) for v in (point.z, point.phi, point.phi_prime, point.psi, residual)))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"💾 Profile written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _out_dir(args, spec) -> Path:
    return Path(args.out) if args.out else output_root(spec) / spec.name


def cmd_run(args) -> int:
    spec = parse_config(args.config)
    runner = CompletePipelineRunner(progress=args.progress)
    if args.command == "simulate":
        bundle = runner.run_simulation_only(spec)
    elif args.command == "oracle":
        if args.n is not None or not spec.oracle_n:
            spec = replace(spec, oracle_n=args.n if args.n is not None else spec.grid_n)
        bundle = runner.run_scenario(spec)
        report = bundle.simulation.oracle
        print(f"📊 Oracle discrepancy {report.discrepancy:.6e} ({report.relative:.6e} of sup) at t={report.time:.10g}")
    else:
        bundle = runner.run_scenario(spec)
    emit_outputs(bundle, _out_dir(args, spec), command=args.command)
    return EXIT_OK


def cmd_fit(args) -> int:
    norms = read_norms(args.norms)
    blowup = fit_blowup_time(norms["t"], norms["sup"], args.window_frac)
    power = log_law = None
    slopes = {}
    if args.modulation:
        mod = read_modulation(args.modulation)
        before = mod["t"] < blowup.T
        ts, nus = mod["t"][before], mod["nu"][before]
        beta = args.beta if args.beta is not None else 0.0
        if beta > 0.0:
            power = fit_nu_law(ts, nus, blowup.T, LawMode.POWER, args.window_frac)
        else:
            log_law = fit_nu_law(ts, nus, blowup.T, LawMode.LOG, args.window_frac)
        law = DecayLaw.POWER if beta == 0.0 else DecayLaw.EXP
        for name in ("E1", "E2"):
            values = mod[name][before]
            usable = np.isfinite(values) & (values > 0.0)
            if np.count_nonzero(usable) >= 2:
                slopes[name] = fit_remainder_decay(mod["s"][before][usable], values[usable], law)
    summary = fit_summary(blowup, power, log_law, slopes)
    text = json.dumps(to_jsonable(summary), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"💾 Fits written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    specs = [parse_config(path) for path in args.config]
    if args.kappas:
        report = explore_kappa(specs[0], args.kappas, workers=args.workers)
        print(json.dumps(to_jsonable({"kappas": report.kappas, "passed": report.passed,
                                      "largest_passing": report.largest_passing}), indent=2))
        return EXIT_OK
    outcomes = sweep(specs, workers=args.workers)
    for outcome in outcomes:
        if outcome.bundle is not None:
            emit_outputs(outcome.bundle, output_root(outcome.bundle.spec) / outcome.name, command="sweep")
        else:
            print(f"❌ {outcome.name}: {outcome.error}")
    summary = summarize(outcomes)
    print(f"📊 Sweep: {summary['passed']}/{summary['total']} passed, {summary['errors']} errors")
    return EXIT_RUNTIME if summary["errors"] else EXIT_OK


def cmd_accept(args) -> int:
    suite = AcceptanceSuite(quick=args.quick)
    return EXIT_OK if suite.run() else EXIT_ACCEPTANCE


HANDLERS = {
    "profile": cmd_profile,
    "simulate": cmd_run,
    "oracle": cmd_run,
    "modulate": cmd_run,
    "scenario": cmd_run,
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "accept": cmd_accept,
}


def dispatch(command: str, args) -> int:
    """Run one subcommand and map failures to exit codes"""
    handler = HANDLERS.get(command)
    if handler is None:
        print(f"❌ Unknown command '{command}' (expected one of {', '.join(COMMANDS)})", file=sys.stderr)
        return EXIT_USAGE
    try:
        return handler(args)
    except PipelineStageError as e:
        if isinstance(e.cause, (ConfigError, ScenarioError)):
            print(f"❌ Configuration error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, ScenarioError) as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (HydroblowError, OSError) as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        if getattr(args, "verbose", False):
            traceback.print_exc()
        return EXIT_RUNTIME


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    return dispatch(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
