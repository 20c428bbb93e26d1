"""Command-line entry point: ``coutile run | sweep | dump-config | trace``."""

import argparse
import sys
from collections.abc import Callable, Sequence
from enum import Enum
from pathlib import Path

from coutile.core.config import SimConfig, dump_config, parse_config
from coutile.core.error_handlers import EXIT_OK, handle_cli_error
from coutile.core.telemetry import setup_telemetry
from coutile.exceptions import (
    AnonymityViolationError,
    ConfigurationError,
    CoutileError,
)
from coutile.models.enums import (
    ComputationKindName,
    CryptoBackend,
    Mode,
    PunishmentRule,
)
from coutile.services.channel import audit_trace
from coutile.services.figures import emit_run, emit_sweep, emit_trace
from coutile.services.simnet import build_world, run_simulation, run_sweep
from coutile.utils.logger import logger, setup_logging

# (flag, config field, type, help)
SIMULATION_FLAGS: list[tuple[str, str, Callable, str]] = [
    ("--peers", "peers", int, "number of peers n (default 100)"),
    ("--clients", "clients", int, "clients per joint computation m (default 10)"),
    ("--redundancy", "redundancy", int, "workers per client r (default 3)"),
    ("--iterations", "iterations", int, "simulated iterations T (default 250)"),
    ("--delta", "delta", float, "reputation flexibility δ (default 0.002)"),
    ("--p-forward", "p_forward", float, "hop probability p (default 0.67)"),
    ("--managers", "managers", int, "accountability managers M (default 3)"),
    ("--kappa-min", "kappa_min", int, "lower bound of κ_i (default 60)"),
    ("--kappa-max", "kappa_max", int, "upper bound of κ_i (default 99)"),
    ("--epsilon", "epsilon", float, "reputation stop tolerance ε (default 1e-6)"),
    ("--max-iter", "max_iter", int, "reputation iteration cap (default 1000)"),
    ("--malicious-frac", "malicious_frac", float, "malicious share (default 0.2)"),
    ("--opinion-prior", "opinion_prior", float, "starting opinion ℓ (default 2)"),
    ("--punishment", "punishment", PunishmentRule, "reset or decrement"),
    ("--band-below", "band_below", float, "band under g_i in δ"),
    ("--band-above", "band_above", float, "band over g_i in δ"),
    ("--mode", "mode", Mode, "hbc, rational or baseline (default rational)"),
    ("--seed", "seed", int, "random seed (default 1)"),
    ("--out", "output_dir", Path, "output directory (default results)"),
    ("--computation", "computation", ComputationKindName, "rank, diffs or tally"),
    ("--tally-options", "tally_options", str, "comma-separated ballot options"),
    ("--crypto-backend", "crypto_backend", CryptoBackend, "digest or curve"),
    ("--block-size", "block_size", int, "ciphertext block size in bytes"),
    ("--max-hops", "max_hops", int, "forced submission after this many hops"),
    ("--non-rewarding-frac", "non_rewarding_frac", float, "share of free riders"),
]
SWITCHES: list[tuple[str, str, str]] = [
    ("--publish-output", "publish_output", "post outputs to a public bulletin"),
    ("--distributed-reputation", "distributed_reputation", "manager-based update"),
    ("--malicious-forwarding", "malicious_forwarding", "malicious peers drop"),
    ("--malicious-managers", "malicious_managers", "malicious managers dissent"),
]
CONFIG_FIELDS = [field for _, field, *_ in SIMULATION_FLAGS + SWITCHES]


def _add_simulation_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("simulation")
    group.add_argument("--config", type=Path, help="flat key=value config file")
    for flag, field, kind, text in SIMULATION_FLAGS:
        is_enum = isinstance(kind, type) and issubclass(kind, Enum)
        choices = list(kind) if is_enum else None
        group.add_argument(flag, dest=field, type=kind, choices=choices, help=text)
    for flag, field, text in SWITCHES:
        group.add_argument(
            flag, dest=field, action=argparse.BooleanOptionalAction, help=text
        )


def _comma_list(kind: Callable) -> Callable[[str], list]:
    def parse(text: str) -> list:
        try:
            return [kind(item.strip()) for item in text.split(",") if item.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def load_config(args: argparse.Namespace, **forced) -> SimConfig:
    """Merge command-line flags over the optional config file."""
    fields = [*CONFIG_FIELDS, "trace"]
    overrides = {field: getattr(args, field, None) for field in fields}
    overrides.update(forced)
    return parse_config(overrides, getattr(args, "config", None))


def run_command(args: argparse.Namespace) -> int:
    config = load_config(args)
    world = build_world(config)
    metrics = run_simulation(config, world)
    paths = emit_run(metrics, config.output_dir, args.window)
    if config.trace:
        paths.append(emit_trace(world.trace, config.output_dir / "trace.csv"))
    names = ", ".join(path.name for path in paths)
    logger.info(f"Wrote {names} to {config.output_dir}")
    return EXIT_OK


def sweep_command(args: argparse.Namespace) -> int:
    config = load_config(args)
    rows = run_sweep(
        config,
        fracs=args.fracs,
        modes=args.modes,
        seeds=args.seeds or [config.seed],
        workers=args.workers,
    )
    path = emit_sweep(rows, config.output_dir / "fig4.csv")
    logger.info(f"Wrote {len(rows)} sweep rows to {path}")
    return EXIT_OK


def dump_config_command(args: argparse.Namespace) -> int:
    sys.stdout.write(dump_config(load_config(args)))
    return EXIT_OK


def trace_command(args: argparse.Namespace) -> int:
    """Run with channel tracing, write trace.csv and audit it for originator leaks."""
    config = load_config(args, trace=True)
    world = build_world(config)
    run_simulation(config, world)
    path = emit_trace(world.trace, config.output_dir / "trace.csv")
    violations = audit_trace(world.trace, world.trace_origins)
    if violations:
        raise AnonymityViolationError(
            f"{len(violations)} trace records expose an originator"
        )
    logger.info(f"Trace audit passed: {len(world.trace)} records in {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coutile",
        description="Co-utile circuit-free MPC simulator",
    )
    parser.add_argument("--log-level", help="loguru level (default LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="single run: fig1-3, reputation, iterations")
    _add_simulation_flags(run)
    run.add_argument("--trace", dest="trace", action=argparse.BooleanOptionalAction)
    run.add_argument(
        "--window",
        type=int,
        default=100,
        help="last iterations covered by fig3.csv (default 100)",
    )
    run.set_defaults(handler=run_command)

    sweep = commands.add_parser("sweep", help="malicious_frac × mode grid: fig4")
    _add_simulation_flags(sweep)
    sweep.add_argument(
        "--fracs", type=_comma_list(float), default=[0.1, 0.2, 0.3, 0.4]
    )
    sweep.add_argument(
        "--modes", type=_comma_list(Mode), default=[Mode.RATIONAL, Mode.BASELINE]
    )
    sweep.add_argument("--seeds", type=_comma_list(int), default=None)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(handler=sweep_command)

    dump = commands.add_parser("dump-config", help="print the effective config")
    _add_simulation_flags(dump)
    dump.set_defaults(handler=dump_config_command)

    trace = commands.add_parser("trace", help="run with channel trace and audit it")
    _add_simulation_flags(trace)
    trace.set_defaults(handler=trace_command)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Parse arguments and dispatch to a subcommand.

    Returns:
        int: 0 on success, 2 for configuration errors, 1 for other failures.
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    setup_telemetry()
    try:
        if getattr(args, "workers", 1) < 1:
            raise ConfigurationError("workers must be ≥ 1", "workers")
        return args.handler(args)
    except CoutileError as exc:
        return handle_cli_error(exc)


if __name__ == "__main__":
    sys.exit(main())
