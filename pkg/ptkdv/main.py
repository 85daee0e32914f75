# ptkdv/main.py

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from loguru import logger

from . import __version__
from .commands import charges, curve, evolve, specfun, verify
from .core.config import settings
from .core.errors import PtkdvError, UsageError, exit_code_for
from .core.logging import setup_logging

COMMANDS = (curve, evolve, charges, specfun, verify)


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="ptkdv",
        description="PT-symmetric deformed KdV toolkit: travelling waves, evolution and conservation laws",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="JSON file mirroring the command flags")
    parser.add_argument("--log-level", default=None, help="override PTKDV_LOG_LEVEL")
    parser.add_argument("--output-root", default=None, help="override PTKDV_OUTPUT_ROOT")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    command_parsers = {}
    for module in COMMANDS:
        command_parsers[module.__name__.rsplit(".", 1)[-1]] = module.add_parser(subparsers)
    return parser, command_parsers


def load_config(path: str) -> Dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return data


def apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser,
                 sub: argparse.ArgumentParser, config: Dict):
    """Fill values left at their defaults from the config file.

    The file holds global keys at the top level and per-command sections
    under the command name; flags given on the command line win.
    """
    section = {k: v for k, v in config.items() if not isinstance(v, dict)}
    section.update(config.get(args.command, {}))

    # flag spellings (`N`, `no-dealias`) map to their destinations
    actions = {}
    for action in parser._actions + sub._actions:
        actions[action.dest] = action
        for option in action.option_strings:
            actions[option.lstrip("-").replace("-", "_")] = action

    for key, value in section.items():
        action = actions.get(key.replace("-", "_"))
        dest = action.dest if action else key.replace("-", "_")
        if isinstance(action, argparse._AppendAction) and not isinstance(value, list):
            value = [value]
        if dest in ("config", "command", "func"):
            continue
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for command {args.command}")
        default = sub.get_default(dest) if sub.get_default(dest) is not None else parser.get_default(dest)
        if getattr(args, dest) == default:
            setattr(args, dest, value)


def main(argv: Optional[List[str]] = None) -> int:
    parser, command_parsers = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.config:
            apply_config(args, parser, command_parsers[args.command], load_config(args.config))
        if args.output_root:
            settings.output_root = Path(args.output_root)
        setup_logging(args.log_level)
        logger.debug(f"ptkdv {__version__}: {args.command}")
        return args.func(args)

    except PtkdvError as exc:
        code = exit_code_for(exc)
        logger.error(f"{type(exc).__name__}: {exc}")
        return code
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
