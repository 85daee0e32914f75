# ptkdv/commands/evolve.py
"""
`evolve`: integrate the deformed equation from a named or CSV initial state.
"""

import argparse
import math
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from ..core.errors import EXIT_DYNAMICS, EXIT_OK, UsageError
from ..services import storage
from ..services.evolve import EvolveConfig, evolve
from ..services.model import DeformationParams, Field, Variant
from ..services.waves import SolutionKind, TravelingWaveParams, cnoidal_period, exact_field
from ..utils.helpers import parse_complex

NAMED_INITS = ("cnoidal", "sech2", "sine", "tan2")
SOLITON_LENGTH = 40.0


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("evolve", help="time-evolve a field with pseudospectral RK4")
    parser.add_argument("--eps", type=float, default=1.0, help="deformation parameter")
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.SCALED.value)
    parser.add_argument("--branch", type=int, default=0, help="branch label of the complex powers")
    parser.add_argument("--N", type=int, default=64, dest="grid_points", help="grid points (power of two)")
    parser.add_argument("--L", type=float, default=None, dest="length", help="domain length")
    parser.add_argument("--dt", type=float, default=None, help="time step")
    parser.add_argument("--T", default="0.1", dest="t_final", help="final time, or 'period' for cnoidal waves")
    parser.add_argument("--init", default="sine", help="cnoidal, sech2, sine, tan2 or a field CSV path")
    parser.add_argument("--k", default="1/sqrt2", help="wavenumber of the exact-solution inits")
    parser.add_argument("--m", type=float, default=0.9, help="elliptic parameter of the cnoidal init")
    parser.add_argument("--offset", type=float, default=0.0, help="constant added to the sine init")
    parser.add_argument("--amplitude", type=float, default=0.5, help="amplitude of the sine init")
    parser.add_argument("--clamp", default="off", help="'off' or the |u_x| clamp threshold")
    parser.add_argument("--stride", type=int, default=100, help="steps between snapshots")
    parser.add_argument("--no-dealias", action="store_true", help="disable the 2/3 rule")
    parser.add_argument("--out", default=None, help="output directory")
    parser.set_defaults(func=cmd_evolve)
    return parser


def parse_clamp(text) -> Optional[float]:
    if text is None or str(text).lower() == "off":
        return None
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"--clamp expects 'off' or a number, got {text!r}")
    if not value > 0:
        raise UsageError(f"--clamp must be positive, got {value}")
    return value


def initial_field(args) -> Tuple[Field, Optional[float]]:
    """Initial field and, for cnoidal waves, the temporal period."""
    init = args.init
    count = args.grid_points

    if init not in NAMED_INITS:
        path = Path(init)
        if not path.exists():
            raise UsageError(f"--init must be one of {', '.join(NAMED_INITS)} or an existing CSV file")
        return storage.read_field_csv(path, args.length), None

    if init == "sine":
        length = args.length or 2.0 * math.pi
        return Field.from_function(
            lambda x: args.offset + args.amplitude * np.sin(2.0 * math.pi * x / length), length, count
        ), None

    wave = TravelingWaveParams(parse_complex(args.k), args.m if init == "cnoidal" else 1.0)
    if init == "cnoidal":
        length, period = cnoidal_period(wave)
        if args.length is not None and not math.isclose(args.length, length, rel_tol=1e-12):
            logger.warning(f"--L {args.length} replaced by the cnoidal period {length}")
        return exact_field(SolutionKind.CNOIDAL, wave, count), period

    return exact_field(SolutionKind(init), wave, count, length=args.length or SOLITON_LENGTH), None


def resolve_time(t_final, period: Optional[float]) -> float:
    if str(t_final).lower() == "period":
        if period is None:
            raise UsageError("--T period needs the cnoidal init")
        return period
    try:
        return float(t_final)
    except ValueError:
        raise UsageError(f"--T expects a number or 'period', got {t_final!r}")


def cmd_evolve(args) -> int:
    params = DeformationParams(args.eps, branch_n=args.branch, variant=Variant(args.variant))
    clamp = parse_clamp(args.clamp)
    f0, period = initial_field(args)
    if f0.count != args.grid_points:
        logger.info(f"Grid size taken from the initial field: {f0.count}")
    t_final = resolve_time(args.t_final, period)

    dt = args.dt or EvolveConfig.default_dt(f0.length, f0.count)
    if t_final > 0:
        # land exactly on t_final
        dt = t_final / math.ceil(t_final / dt - 1e-9)

    cfg = EvolveConfig(f0.count, f0.length, dt, t_final, snapshot_stride=args.stride,
                       dealias=not args.no_dealias, singular_clamp=clamp)
    directory = storage.run_directory("evolve", args.out)

    traj = evolve(f0, cfg, params)

    outputs = storage.write_trajectory(traj, directory)
    summaries = storage.charge_summaries(traj.charge_reports)
    storage.write_json([s.model_dump() for s in summaries], directory / "charges.json")
    outputs.append("charges.json")

    parameters = storage.trajectory_parameters(traj)
    parameters['init'] = args.init
    manifest = storage.new_manifest("evolve", parameters)
    manifest.outputs = outputs
    manifest.abort = traj.abort
    if traj.aborted:
        manifest.status = "aborted"
    storage.write_manifest(manifest, directory)

    for summary in summaries:
        print(f"I{summary.charge_index}: drift {summary.drift:.3e}")

    if traj.aborted:
        abort = traj.abort
        print(f"aborted at t={abort['time']}: {abort['message']} (grid index {abort['grid_index']})")
        return EXIT_DYNAMICS
    return EXIT_OK
