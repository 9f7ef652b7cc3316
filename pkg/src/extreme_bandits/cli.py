"""Command-line front end.

Subcommands: ``run``, ``oracle``, ``estimate``, ``analyze``, ``presets``.
Exit codes: 0 success, 1 I/O error, 2 usage or configuration error.

Precedence for ``run`` and ``oracle``: command-line flags override values
from ``--config``, which override the preset defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .distributions import SecondOrderParetoParams
from .evt_analysis import frechet_main_term, lemma3_bound
from .harness import PRESETS, ExperimentConfig, oracle_curve, preset, regret_curves, resolve_threads
from .tail_estimation import estimate_c, estimate_h
from .traces import TraceFormatError, bundled_trace_path

EXIT_OK, EXIT_IO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _add_source_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help=f"named experiment: {', '.join(sorted(PRESETS))}")
    src.add_argument("--config", type=Path, help="YAML experiment file")
    p.add_argument("--trace", type=Path, default=None,
                   help="trace CSV for the trace preset (default: the bundled synthetic trace)")
    p.add_argument("--seed", type=int, default=None, help="base seed")
    p.add_argument("--horizon", type=_positive_int, default=None, help="horizon n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extreme-bandits", description="Extreme bandit experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", help="run an experiment and write the regret CSV")
    _add_source_args(p)
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    p.add_argument("--replications", type=_positive_int, default=None, help="episodes per policy")
    p.add_argument("--oracle-replications", type=_positive_int, default=None, help="oracle Monte Carlo draws")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes (default: $EXTREME_BANDITS_THREADS or the core count)")
    p.add_argument("--plot", action="store_true", help="also write a PNG of the regret curves next to the CSV")

    p = sub.add_parser("oracle", help="print the oracle benchmark E[G*_t]")
    _add_source_args(p)
    p.add_argument("--t", type=_int_list, default=None, help="rounds, comma separated (default: horizon)")
    p.add_argument("--replications", type=_positive_int, default=None, help="oracle Monte Carlo draws")

    p = sub.add_parser("estimate", help="tail estimates for a file of values, one per line")
    p.add_argument("data", type=Path, help="text file, one number per line")
    p.add_argument("--b", type=float, default=1.0, help="second-order rate lower bound b (default 1)")

    p = sub.add_parser("analyze", help="closed-form extreme-value quantities")
    p.add_argument("--alpha", type=float, required=True, help="tail index")
    p.add_argument("--C", type=float, default=1.0, help="scale C (default 1)")
    p.add_argument("--n", type=float, default=None, help="horizon, for the Frechet main term")
    p.add_argument("--Cprime", type=float, default=None, help="second-order constant C'")
    p.add_argument("--beta", type=float, default=None, help="second-order rate beta")
    p.add_argument("--T", type=float, default=None, help="sample count for the deviation bound")
    p.add_argument("--x", type=float, default=None, help="evaluation point for the deviation bound")

    sub.add_parser("presets", help="list the named experiments")
    return parser


# ---------------------------------------------------------------------------


def _experiment(args, **flag_overrides) -> ExperimentConfig:
    overrides = {k: v for k, v in flag_overrides.items() if v is not None}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.horizon is not None:
        overrides["n"] = args.horizon
    if args.preset is not None:
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(PRESETS))}")
        trace = None
        if args.preset == "trace":
            trace = args.trace if args.trace is not None else bundled_trace_path()
        return preset(args.preset, trace=trace, **overrides)
    cfg = load_config(args.config)
    if "n" in overrides:
        overrides["checkpoints"] = None
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def cmd_run(args) -> int:
    cfg = _experiment(args, replications=args.replications, oracle_replications=args.oracle_replications)
    threads = resolve_threads(args.threads)
    result = regret_curves(cfg, threads=threads)
    text = result.to_csv()
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    for c in result.curves:
        frac = " ".join(f"{f:.3f}" for f in c.pull_fraction[-1])
        print(f"{c.label}: regret {c.regret_mean[-1]:.6g} +- {c.regret_sem[-1]:.3g}  pulls [{frac}]")
    print(f"wrote {args.out}")
    if args.plot:
        from .plotting import plot_regret_csv

        print(f"wrote {plot_regret_csv(args.out, title=cfg.name)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _experiment(args)
    ts = args.t if args.t is not None else [cfg.n]
    if not ts or any(t < 1 for t in ts):
        raise UsageError("--t values must be positive integers")
    ts = sorted(set(ts))
    reps = args.replications if args.replications is not None else cfg.oracle_replications
    o = oracle_curve(cfg.arms, ts, reps, cfg.base_seed)
    print("t,oracle_mean,oracle_sem,best_arm")
    for j, t in enumerate(ts):
        print(f"{t},{o.mean[j]:.9g},{o.sem[j]:.9g},{int(o.best_arm[j])}")
    return EXIT_OK


def _read_values(path: Path) -> list[float]:
    values = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise UsageError(f"{path}: line {line_no}: not a number: {text!r}") from None
            if not math.isfinite(v):
                raise UsageError(f"{path}: line {line_no}: value must be finite")
            values.append(v)
    if not values:
        raise UsageError(f"{path}: no values")
    return values


def cmd_estimate(args) -> int:
    if not args.b > 0:
        raise UsageError("--b must be > 0")
    values = _read_values(args.data)
    h = estimate_h(values, args.b)
    c = estimate_c(values, h, args.b)
    print(f"h_hat: {h:.6f}")
    print(f"alpha: {'inf' if h == 0 else format(1.0 / h, '.6f')}")
    print(f"c_hat: {c:.6f}")
    print(f"T: {len(values)}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    second_order = [args.Cprime, args.beta, args.T, args.x]
    if args.n is None and all(v is None for v in second_order):
        raise UsageError("analyze needs --n and/or --T with --x")
    if args.n is not None:
        try:
            print(f"frechet_main_term: {frechet_main_term(args.n, args.C, args.alpha):.6f}")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if any(v is not None for v in second_order):
        if args.T is None or args.x is None:
            raise UsageError("the deviation bound needs both --T and --x")
        try:
            params = SecondOrderParetoParams(
                args.alpha, args.C,
                0.0 if args.Cprime is None else args.Cprime,
                math.inf if args.beta is None else args.beta,
            )
            bound = lemma3_bound(params, args.T, args.x)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(f"M: {bound.M:.6f}")
        print(f"B_const: {bound.B_const:.6f}")
        print(f"x_at_least_B_const: {str(bound.valid).lower()}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        print(f"{name}: {PRESETS[name]}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "oracle": cmd_oracle, "estimate": cmd_estimate,
            "analyze": cmd_analyze, "presets": cmd_presets}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
