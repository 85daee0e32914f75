# ptkdv/commands/charges.py
"""
`charges`: audit the conservation laws of a stored trajectory.
"""

import argparse
from pathlib import Path

from loguru import logger

from ..core.errors import EXIT_OK, TrajectoryError
from ..services import storage
from ..services.charges import CHARGE_INDICES, charge_report

AUDIT_NAME = "charges_audit.json"


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("charges", help="conservation residuals and drift of a trajectory")
    parser.add_argument("run_dir", help="run directory written by the evolve command")
    parser.add_argument("--sign-flip", action="store_true", help="audit with the third flux negated")
    parser.add_argument("--out", default=None, help="audit file (default: <run_dir>/charges_audit.json)")
    parser.set_defaults(func=cmd_charges)
    return parser


def cmd_charges(args) -> int:
    run_dir = Path(args.run_dir)
    traj = storage.load_trajectory(run_dir)
    clamp = traj.config.singular_clamp if traj.config else None
    logger.info(f"Auditing {len(traj.snapshots)} snapshots from {run_dir}")

    if len(traj.snapshots) < 3:
        raise TrajectoryError(f"{run_dir} holds {len(traj.snapshots)} snapshots, the audit needs at least 3")

    summaries = []
    for n in CHARGE_INDICES:
        flip = args.sign_flip and n == 3
        report = charge_report(n, traj, traj.params, clamp, sign_flip=flip)
        summaries.append(storage.ChargeSummary(charge_index=n, drift=report.drift,
                                               flux_residual=report.flux_residual))
        print(f"I{n}: drift {report.drift:.3e}, conservation residual {report.flux_residual:.3e}")

    out = Path(args.out) if args.out else run_dir / AUDIT_NAME
    storage.write_json({
        'run_dir': str(run_dir),
        'params': traj.params.to_dict(),
        'snapshots': len(traj.snapshots),
        'charges': [s.model_dump() for s in summaries],
    }, out)
    logger.info(f"Charge audit written: {out}")
    return EXIT_OK
