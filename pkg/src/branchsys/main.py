"""
Command-line entry point.

    branchsys <command> <config.toml> [flags]

Exit codes: 0 when every check passes, 1 for usage or configuration errors,
2 when a check fails.
"""

import argparse
import sys
from typing import Any, Callable, Dict, List, NoReturn, Optional

from branchsys import __version__
from branchsys.commands import (
    cmd_invariant,
    cmd_lemma,
    cmd_matrix_rep,
    cmd_pf,
    cmd_relations,
    cmd_truncation,
    cmd_validate,
)
from branchsys.commands.dependencies import ExitCode
from branchsys.core.exceptions import BranchSysError, ConfigError
from branchsys.core.logging_config import logger
from branchsys.schemas.config import RunConfig
from branchsys.services.system_io import load_run_config

COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "validate": cmd_validate,
    "lemma": cmd_lemma,
    "relations": cmd_relations,
    "pf": cmd_pf,
    "truncation": cmd_truncation,
    "matrix-rep": cmd_matrix_rep,
    "invariant": cmd_invariant,
}

# flag destination -> dotted config key
OVERRIDES = {
    "seed": "seed",
    "cells": "grid.cells",
    "n_max": "system.n_max",
    "output_dir": "output_dir",
    "input": "perron.input_csv",
    "n": "perron.n",
    "samples": "perron.samples",
    "bins": "perron.bins",
    "ns": "perron.ns",
    "max_iters": "perron.max_iters",
    "tol": "perron.tol_l1",
    "n_block": "perron.n_block",
    "cover_required": "relations.cover_required",
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved for failed checks here."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def _ns(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="branchsys",
        description="Check branching function systems and their Perron-Frobenius operators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = ArgumentParser(add_help=False)
    common.add_argument("config", help="run configuration (TOML)")
    common.add_argument("--seed", type=int, help="seed for random test functions and sampling")
    common.add_argument("--cells", type=int, help="number of grid cells")
    common.add_argument("--n-max", dest="n_max", type=int, help="number of instantiated branches")
    common.add_argument("--output-dir", dest="output_dir", help="directory for report files")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    sub.add_parser("validate", parents=[common], help="check the six system conditions")
    lemma = sub.add_parser("lemma", parents=[common], help="check the sufficient conditions")
    lemma.add_argument("--cover-required", dest="cover_required", action="store_true", default=None)
    sub.add_parser("relations", parents=[common], help="verify the generator relations")

    pf = sub.add_parser("pf", parents=[common], help="apply the Perron-Frobenius operator once")
    pf.add_argument("--input", help="input density CSV on the configured grid")
    pf.add_argument("-N", dest="n", type=int, help="number of branches summed")
    pf.add_argument(
        "--samples", "--monte-carlo", dest="samples", type=int, help="Monte-Carlo samples (unset disables)"
    )
    pf.add_argument("--bins", type=int, help="Monte-Carlo histogram bins")

    truncation = sub.add_parser("truncation", parents=[common], help="partial sums over N")
    truncation.add_argument("--input", help="input density CSV on the configured grid")
    truncation.add_argument("--ns", type=_ns, help="comma-separated truncation indices")

    matrix_rep = sub.add_parser("matrix-rep", parents=[common], help="matrix of P_F on range indicators")
    matrix_rep.add_argument("--n-block", dest="n_block", type=int, help="block size")

    invariant = sub.add_parser("invariant", parents=[common], help="iterate to an invariant density")
    invariant.add_argument("--input", help="initial density CSV on the configured grid")
    invariant.add_argument("--max-iters", dest="max_iters", type=int)
    invariant.add_argument("--tol", type=float, help="L1 stopping tolerance")
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        key: getattr(args, dest)
        for dest, key in OVERRIDES.items()
        if getattr(args, dest, None) is not None
    }


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_run_config(args.config, collect_overrides(args))
        return int(COMMANDS[args.command](config))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return ExitCode.USAGE
    except (BranchSysError, ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return ExitCode.USAGE


if __name__ == "__main__":
    sys.exit(main())
