# ptkdv/commands/verify.py
"""
`verify`: run the acceptance checks and emit a pass/fail report.
"""

import argparse

from loguru import logger

from ..core.errors import EXIT_OK, EXIT_VERIFY_FAILED
from ..core.logging import log_performance
from ..services.acceptance import CheckOptions, run_checks, write_junit
from ..utils.helpers import format_duration


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("verify", help="run the acceptance checks")
    parser.add_argument("--filter", default=None, help="only checks whose group or name contains this text")
    parser.add_argument("--inject-flux3-sign-flip", action="store_true",
                        help="negate the third flux (the flux-consistency check must then fail)")
    parser.add_argument("--samples", type=int, default=401, help="samples per figure-preset curve")
    parser.add_argument("--report", default=None, help="JUnit XML report path")
    parser.set_defaults(func=cmd_verify)
    return parser


@log_performance("verify", slow_seconds=300.0)
def cmd_verify(args) -> int:
    options = CheckOptions(curve_samples=args.samples, flip_flux3=args.inject_flux3_sign_flip)
    results = run_checks(args.filter, options)

    if args.report:
        path = write_junit(results, args.report)
        logger.info(f"JUnit report written: {path}")

    failed = [r for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.group}.{r.name}  {r.detail or r.error or ''}")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {format_duration(total)}")

    if not results:
        logger.warning(f"No acceptance check matches {args.filter!r}")
    if failed:
        logger.error(f"Failed checks: {', '.join(f'{r.group}.{r.name}' for r in failed)}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK
