# pyright: reportMissingTypeStubs=false

from __future__ import annotations

import sys
from argparse import ArgumentParser, ArgumentTypeError
from pathlib import Path
from typing import TYPE_CHECKING

from colorama import Fore, init

from mollow_gain.commands import COMMANDS, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK
from mollow_gain.config import load_config
from mollow_gain.errors import ConfigError, SimulationError
from mollow_gain.logs import setup_logging
from mollow_gain.results import ResultFormat

if TYPE_CHECKING:
    from argparse import Namespace
    from collections.abc import Sequence

init(autoreset=True)

_DEFAULT_CONFIG = Path(__file__).resolve().parent / "config.yml"


def main(argv: None | Sequence[str] = None) -> int:
    args = _get_args(argv)
    setup_logging(verbose=args.verbose)
    try:
        config = load_config(args.config)
        command_cls = COMMANDS[args.command]
        command = command_cls(
            config,
            out=args.out,
            fmt=args.format,
            workers=args.workers,
            visualize=getattr(args, "visualize", False),
        )
        outcome = command.run()
    except ConfigError as err:
        print(f"{Fore.RED}Configuration error in {err}")
        return EXIT_CONFIG
    except SimulationError as err:
        print(f"{Fore.RED}Numerical failure ({type(err).__name__}): {err}")
        return EXIT_NUMERICAL

    color = Fore.GREEN if outcome.exit_code == EXIT_OK else Fore.RED
    for line in outcome.summary:
        print(f"{color}{line}")
    for path in outcome.files:
        print(f"Wrote {path}")
    return outcome.exit_code


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise ArgumentTypeError(f"must be at least 1, got {number}")
    return number


def _get_args(argv: None | Sequence[str]) -> Namespace:
    parser = ArgumentParser(
        description="Weak-probe reflection off a strongly pumped transmon"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=Path,
        default=_DEFAULT_CONFIG if _DEFAULT_CONFIG.exists() else None,
    )
    common.add_argument("--workers", type=_positive_int)
    common.add_argument("--out", type=Path)
    common.add_argument("--format", type=ResultFormat, choices=list(ResultFormat))
    common.add_argument("--verbose", action="store_true")

    seen: set[type] = set()
    for command_cls in COMMANDS.values():
        if command_cls in seen:
            continue
        seen.add(command_cls)
        sub = subparsers.add_parser(
            command_cls.name,
            aliases=command_cls.aliases,
            parents=[common],
            help=(command_cls.__doc__ or "").strip(),
        )
        if command_cls.can_visualize:
            sub.add_argument("-v", "--visualize", action="store_true")

    return parser.parse_args(argv)


if __name__ == "__main__":
    sys.exit(main())
