# ptkdv/commands/specfun.py
"""
`specfun`: evaluate one special function and print it to 17 significant digits.
"""

import argparse
from typing import Callable, Dict, List, Tuple

from ..core.errors import EXIT_OK, UsageError
from ..services import specfun
from ..services.model import deformed_power
from ..utils.helpers import format_complex, parse_complex


def _real(text: str) -> float:
    value = parse_complex(text)
    if value.imag != 0:
        raise UsageError(f"expected a real argument, got {text!r}")
    return value.real


def _integer(text: str) -> int:
    value = _real(text)
    if not value.is_integer():
        raise UsageError(f"expected an integer argument, got {text!r}")
    return int(value)


def _dn(u, m):
    return float(specfun.jacobi_dn(_real(u), _real(m)))


# name -> (argument names, evaluator)
FUNCTIONS: Dict[str, Tuple[List[str], Callable]] = {
    'f1': (["alpha", "beta", "beta_p", "gamma", "x", "y"],
           lambda a, b, bp, g, x, y: specfun.appell_f1(*map(parse_complex, (a, b, bp, g, x, y)))),
    '2f1': (["a", "b", "c", "z"],
            lambda a, b, c, z: specfun.gauss_2f1(*map(parse_complex, (a, b, c, z)))),
    'betainc': (["z", "a", "b"],
                lambda z, a, b: specfun.incomplete_beta(*map(parse_complex, (z, a, b)))),
    'dn': (["u", "m"], _dn),
    'gamma': (["z"], lambda z: specfun.gamma(parse_complex(z))),
    'phase_vx': (["eps", "n"], lambda eps, n: specfun.branch_phase_vx(_real(eps), _integer(n))),
    'phase_xt': (["eps", "n"], lambda eps, n: specfun.branch_phase_xt(_real(eps), _integer(n))),
    'power': (["z", "p", "n"], lambda z, p, n: deformed_power(parse_complex(z), _real(p), _integer(n))),
}


def add_parser(subparsers) -> argparse.ArgumentParser:
    lines = [f"  {name} {' '.join(names)}" for name, (names, _) in FUNCTIONS.items()]
    parser = subparsers.add_parser(
        "specfun", help="evaluate a special function",
        description="functions:\n" + "\n".join(lines),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("function", choices=sorted(FUNCTIONS))
    parser.add_argument("arguments", nargs="*", help="complex literals, e.g. 0.5, 1+2i, i/sqrt2")
    parser.set_defaults(func=cmd_specfun)
    return parser


def evaluate(name: str, arguments: List[str]):
    if name not in FUNCTIONS:
        raise UsageError(f"unknown function {name!r}")
    names, evaluator = FUNCTIONS[name]
    if name == 'power' and len(arguments) == 2:
        arguments = list(arguments) + ["0"]
    if len(arguments) != len(names):
        raise UsageError(f"{name} takes {len(names)} arguments ({' '.join(names)}), got {len(arguments)}")
    return evaluator(*arguments)


def cmd_specfun(args) -> int:
    value = evaluate(args.function, args.arguments)
    if isinstance(value, float):
        print(f"{value:.17g}")
    else:
        print(format_complex(value))
    return EXIT_OK
