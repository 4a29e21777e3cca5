"""Command-line interface.

Subcommands: describe, simulate, estimate, network, diffusion, blocks,
pipeline. Data-bearing commands read a key = value config file (see
config.py for the grammar); --alpha, --bins, --seed, --jobs and --out
override config values. Exit codes: 0 success, 1 configuration error,
2 data error, 3 estimation hard failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys

from . import pipeline
from .config import RunConfig, apply_overrides, load_config
from .errors import ConfigError, DataError, SpillnetError
from .panel import panel_to_csv
from .simulate import simulate_panel

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are configuration errors
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(parser: argparse.ArgumentParser, config_required: bool = True):
    parser.add_argument("--config", required=config_required, help="path to the run config file")
    parser.add_argument("--alpha", type=float, help="edge significance level override")
    parser.add_argument("--bins", type=int, help="curve bin count override")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--jobs", type=int, help="parallel pairwise fits override")
    parser.add_argument("--out", help="output directory override")


def _load(args) -> RunConfig:
    config = load_config(args.config)
    return apply_overrides(
        config,
        alpha=args.alpha,
        bins=args.bins,
        seed=args.seed,
        jobs=args.jobs,
        out=args.out,
    )


def _parse_edge(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected FROM,TO,A_OFF,B_OFF, got {text!r}")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spillnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, needs_config in (
        ("describe", True),
        ("estimate", True),
        ("network", True),
        ("diffusion", True),
        ("blocks", True),
        ("pipeline", True),
    ):
        p = sub.add_parser(name)
        _add_common(p, needs_config)
        if name == "describe":
            p.add_argument(
                "--ttest",
                metavar="PERIOD_A:PERIOD_B",
                help="also emit a per-node Welch t-test comparing two periods",
            )

    sim = sub.add_parser("simulate", help="write a synthetic panel CSV")
    sim.add_argument("--nodes", type=int, required=True)
    sim.add_argument("--length", type=int, required=True, help="number of daily rows")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--burn-in", type=int, default=200)
    sim.add_argument(
        "--edge",
        action="append",
        type=_parse_edge,
        default=[],
        metavar="FROM,TO,A_OFF,B_OFF",
        help="planted directed coupling (0-based node indices); repeatable",
    )
    sim.add_argument("--start-date", default="2020-01-01", help="ISO date of the first row")
    sim.add_argument("--out", required=True, help="output CSV path")
    return parser


def _run(args) -> None:
    if args.command == "simulate":
        try:
            start = dt.date.fromisoformat(args.start_date)
        except ValueError as exc:
            raise ConfigError(f"--start-date: {exc}") from exc
        panel = simulate_panel(
            args.nodes, args.edge, args.length, args.seed,
            burn_in=args.burn_in, start_date=start,
        )
        panel_to_csv(panel, args.out)
        logger.info("wrote %d x %d panel to %s", panel.n_obs, panel.n_nodes, args.out)
        return

    config = _load(args)
    if args.command == "describe":
        pipeline.run_describe(config, ttest=args.ttest)
    elif args.command == "estimate":
        pipeline.run_estimate(config)
    elif args.command == "network":
        pipeline.run_network(config)
    elif args.command == "diffusion":
        pipeline.run_diffusion(config)
    elif args.command == "blocks":
        pipeline.run_blocks(config)
    elif args.command == "pipeline":
        pipeline.run_pipeline(config)
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SpillnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
