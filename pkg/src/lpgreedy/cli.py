"""Command line front end for the experiment harness.

Each subcommand runs one experiment kind from a JSON config and writes
result.csv + summary.json into the output directory.  Exit codes: 0 on a
clean run, 2 when the configuration is unusable, 3 when the run completed
but an invariant check failed (details land in summary.json and stderr).
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, DomainError, SolverError, StructuralError
from .harness import load_config, run_experiment

_COMMANDS = {
    "analyze": ("analyze", "compute exact/sampled dictionary constants"),
    "recover": ("recovery", "planted-sparse recovery sweep"),
    "lebesgue": ("lebesgue", "residual over exact best m-term error"),
    "ratebound": ("rate_bound", "check the exponential decay bound per row"),
    "bilinear": ("bilinear", "rank-one deflation vs the exact truncation error"),
    "decay": ("decay_demo", "qualitative residual decay slope"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpgreedy",
        description="Greedy sparse approximation experiments over weighted L_p grids",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, text) in _COMMANDS.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="JSON experiment config")
        cmd.add_argument("--out", default=None, help="output directory (default: config out or ./results)")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--threads", type=int, default=1, help="concurrent trials")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind = _COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config)
        if cfg.kind is None:
            cfg.kind = kind
        elif cfg.kind != kind:
            raise ConfigurationError(
                f"config kind {cfg.kind!r} does not match subcommand {args.command!r}"
            )
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigurationError(f"seed must be nonnegative, got {args.seed}")
            cfg.seed = args.seed
        result = run_experiment(cfg, threads=args.threads)
    except (ConfigurationError, DomainError, StructuralError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 1
    out_dir = args.out or cfg.out or "results"
    paths = result.save(out_dir)
    print(f"{result.kind}: {len(result.rows)} rows -> {paths['result']}")
    if result.violations:
        for line in result.violations:
            print(f"invariant violation: {line}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
