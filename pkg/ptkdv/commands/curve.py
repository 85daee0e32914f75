# ptkdv/commands/curve.py
"""
`curve`: sample (x - ct)(v) for branch sets and report where it is real.
"""

import argparse
from dataclasses import dataclass
from typing import List, Optional, Tuple

from loguru import logger

from ..core.config import get_figure_preset, list_figure_presets, settings
from ..core.errors import EXIT_CONVERGENCE, EXIT_OK, UsageError
from ..services import storage
from ..services.waves import TravelingWaveParams, build_curve, check_epsilon, ode_residual, real_coverage
from ..utils.helpers import parse_complex, parse_range, run_chunked, sanitize_filename


@dataclass(frozen=True)
class CurveTask:
    epsilon: float
    branch_n: int
    k_text: str
    m: float
    v_range: Tuple[float, float]
    real_range: Optional[Tuple[float, float]] = None

    @property
    def stem(self) -> str:
        return sanitize_filename(f"curve_eps{self.epsilon:g}_n{self.branch_n}_k{self.k_text}_m{self.m:g}")


@dataclass
class CurveOutcome:
    task: CurveTask
    files: List[str]
    intervals: List[Tuple[float, float]]
    failed: int
    residual: Optional[float]
    coverage: Optional[float]


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("curve", help="sample travelling-wave branches (x - ct)(v)")
    parser.add_argument("--eps", type=float, action="append", help="deformation parameter (repeatable)")
    parser.add_argument("--n", type=int, action="append", dest="branches", help="branch label (repeatable)")
    parser.add_argument("--k", default="1/sqrt2", help="complex wavenumber, e.g. 1/sqrt2, i/sqrt2, 0.5+0.1i")
    parser.add_argument("--m", type=float, default=0.9, help="elliptic parameter in [0, 1]")
    parser.add_argument("--vrange", default="-1:0", help="v-range lo:hi")
    parser.add_argument("--samples", type=int, default=None, help="samples per curve")
    parser.add_argument("--preset", choices=list_figure_presets(), help="reproduce a figure's parameter sets")
    parser.add_argument("--prefactor", choices=["derived", "displayed"], default="derived",
                        help="prefactor exponent of the m = 1 closed form")
    parser.add_argument("--out", default=None, help="output directory")
    parser.set_defaults(func=cmd_curve)
    return parser


def build_tasks(args) -> List[CurveTask]:
    if args.preset:
        return [
            CurveTask(s.epsilon, n, s.k, s.m, s.v_range, s.real_range)
            for s in get_figure_preset(args.preset)
            for n in s.branches
        ]

    if not args.eps or not args.branches:
        raise UsageError("curve needs --eps and --n (or --preset)")
    v_range = parse_range(args.vrange) if isinstance(args.vrange, str) else tuple(args.vrange)
    # fail before any file is written
    TravelingWaveParams(parse_complex(args.k), args.m)
    for eps in args.eps:
        check_epsilon(eps)
    return [CurveTask(eps, n, args.k, args.m, v_range) for eps in args.eps for n in args.branches]


def _run_task(task: CurveTask, directory, samples: Optional[int], prefactor: str) -> CurveOutcome:
    wave = TravelingWaveParams(parse_complex(task.k_text), task.m)
    curve = build_curve(wave, task.epsilon, task.branch_n, task.v_range, samples, prefactor=prefactor)
    residual = ode_residual(curve, wave) if curve.v.size >= 5 else None
    files = storage.write_curve(curve, directory, task.stem, residual)
    coverage = real_coverage(curve.real_intervals, task.real_range) if task.real_range else None
    return CurveOutcome(task, [p.name for p in files], list(curve.real_intervals),
                        curve.failed, residual, coverage)


def _format_intervals(intervals) -> str:
    if not intervals:
        return "-"
    return " ".join(f"[{a:.4g}, {b:.4g}]" for a, b in intervals)


def print_table(outcomes: List[CurveOutcome]):
    print(f"{'eps':>5} {'n':>3} {'k':>9} {'m':>5} {'failed':>6} {'ode_res':>9} {'coverage':>8}  real intervals")
    for o in outcomes:
        t = o.task
        residual = f"{o.residual:.2e}" if o.residual is not None else "-"
        coverage = f"{o.coverage:.3f}" if o.coverage is not None else "-"
        print(f"{t.epsilon:>5g} {t.branch_n:>3d} {t.k_text:>9} {t.m:>5g} {o.failed:>6d} "
              f"{residual:>9} {coverage:>8}  {_format_intervals(o.intervals)}")


def cmd_curve(args) -> int:
    tasks = build_tasks(args)
    samples = args.samples or settings.curve_samples
    directory = storage.run_directory("curve", args.out)
    manifest = storage.new_manifest("curve", {
        'preset': args.preset,
        'samples': samples,
        'prefactor': args.prefactor,
        'tasks': [{'epsilon': t.epsilon, 'branch_n': t.branch_n, 'k': t.k_text, 'm': t.m,
                   'v_range': list(t.v_range)} for t in tasks],
    })
    logger.info(f"Sampling {len(tasks)} curves into {directory}")

    outcomes = run_chunked(tasks, lambda task: _run_task(task, directory, samples, args.prefactor))

    for outcome in outcomes:
        manifest.outputs.extend(outcome.files)
    print_table(outcomes)

    failed = sum(o.failed for o in outcomes)
    if failed:
        manifest.status = "partial"
        manifest.notes.append(f"{failed} samples failed to converge")
    storage.write_manifest(manifest, directory)

    if failed:
        logger.error(f"{failed} curve samples failed to converge")
        return EXIT_CONVERGENCE
    return EXIT_OK
