# ptkdv/services/storage.py
"""
File formats: field, curve and charge CSVs, JSON sidecars and run manifests.

Every file goes through an atomic write; the manifest is written last and
marks a completed command.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field as PydanticField

from .. import __version__
from ..core.config import get_system_info, settings
from ..core.errors import TrajectoryError
from ..utils.helpers import atomic_write_text, format_real
from .charges import ChargeReport
from .evolve import EvolveConfig, Snapshot, Trajectory
from .model import DeformationParams, Field
from .waves import Curve

MANIFEST_NAME = "manifest.json"


class CurveSidecar(BaseModel):
    """JSON companion of a curve CSV."""
    epsilon: float
    branch_n: int
    k_re: float
    k_im: float
    m: float
    real_intervals: List[Tuple[float, float]]
    form: str = "general"
    prefactor: str = "derived"
    failed: int = 0
    ode_residual: Optional[float] = None


class ChargeSummary(BaseModel):
    charge_index: int
    drift: float
    flux_residual: Optional[float] = None


class RunManifest(BaseModel):
    """Record of one command run."""
    command: str
    parameters: Dict[str, Any] = PydanticField(default_factory=dict)
    outputs: List[str] = PydanticField(default_factory=list)
    started_at: datetime
    finished_at: Optional[datetime] = None
    version: str = __version__
    host: Dict[str, Any] = PydanticField(default_factory=dict)
    status: str = "ok"
    notes: List[str] = PydanticField(default_factory=list)
    abort: Optional[Dict[str, Any]] = None


# ---------------------------------------------------------------------------
# CSV codecs
# ---------------------------------------------------------------------------

def _rows(header: str, columns: Sequence[np.ndarray]) -> str:
    lines = [header]
    for row in zip(*columns):
        lines.append(",".join(format_real(value) for value in row))
    return "\n".join(lines) + "\n"


def _load_columns(path: Path, expected: int) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise TrajectoryError(f"cannot read {path}: {exc}")
    if data.shape[1] != expected:
        raise TrajectoryError(f"{path} has {data.shape[1]} columns, expected {expected}")
    return data


def field_to_csv(f: Field) -> str:
    return _rows("x,re_u,im_u", (f.x, f.values.real, f.values.imag))


def write_field_csv(f: Field, path: Path) -> Path:
    return atomic_write_text(path, field_to_csv(f))


def read_field_csv(path: Path, length: Optional[float] = None) -> Field:
    """Read a field CSV; the domain length defaults to count times the grid spacing."""
    data = _load_columns(Path(path), 3)
    x = data[:, 0]
    if length is None:
        if x.size < 2:
            raise TrajectoryError(f"{path}: cannot infer the domain length from one sample")
        length = x.size * (x[1] - x[0])
    return Field(data[:, 1] + 1j * data[:, 2], length)


def write_curve(curve: Curve, directory: Path, stem: str,
                ode_residual: Optional[float] = None) -> List[Path]:
    """Curve CSV (v, re_xct, im_xct) plus its JSON sidecar."""
    directory = Path(directory)
    csv_path = atomic_write_text(directory / f"{stem}.csv",
                                 _rows("v,re_xct,im_xct", (curve.v, curve.xct.real, curve.xct.imag)))

    sidecar = CurveSidecar(
        epsilon=curve.epsilon,
        branch_n=curve.branch_n,
        k_re=curve.wave.k.real,
        k_im=curve.wave.k.imag,
        m=curve.wave.m,
        real_intervals=list(curve.real_intervals),
        form=curve.form,
        prefactor=curve.prefactor,
        failed=curve.failed,
        ode_residual=ode_residual,
    )
    json_path = atomic_write_text(directory / f"{stem}.json", sidecar.model_dump_json(indent=2))
    return [csv_path, json_path]


def read_curve_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    data = _load_columns(Path(path), 3)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def charges_to_csv(reports: Sequence[ChargeReport]) -> str:
    if not reports:
        return "t\n"
    header = "t," + ",".join(f"re_I{r.charge_index},im_I{r.charge_index}" for r in reports)
    columns = [np.asarray(reports[0].times)]
    for report in reports:
        values = np.asarray(report.values)
        columns.extend([values.real, values.imag])
    return _rows(header, columns)


def charge_summaries(reports: Sequence[ChargeReport]) -> List[ChargeSummary]:
    return [ChargeSummary(charge_index=r.charge_index, drift=r.drift, flux_residual=r.flux_residual)
            for r in reports]


# ---------------------------------------------------------------------------
# Manifests and trajectories
# ---------------------------------------------------------------------------

def new_manifest(command: str, parameters: Dict[str, Any]) -> RunManifest:
    return RunManifest(command=command, parameters=parameters, started_at=datetime.now(),
                       host=get_system_info())


def write_manifest(manifest: RunManifest, directory: Path) -> Path:
    """Write the manifest last; every listed output must already exist."""
    directory = Path(directory)
    missing = [p for p in manifest.outputs if not (directory / p).exists() and not Path(p).exists()]
    if missing:
        logger.warning(f"Manifest lists missing outputs: {missing}")
        manifest.notes.append(f"missing outputs: {missing}")
        manifest.status = "partial"

    manifest.finished_at = datetime.now()
    path = atomic_write_text(directory / MANIFEST_NAME, manifest.model_dump_json(indent=2))
    logger.info(f"Manifest written: {path}")
    return path


def read_manifest(directory: Path) -> RunManifest:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise TrajectoryError(f"no manifest in {directory}")
    try:
        return RunManifest.model_validate_json(path.read_text())
    except ValueError as exc:
        raise TrajectoryError(f"malformed manifest {path}: {exc}")


def snapshot_name(index: int) -> str:
    return f"snapshot_{index:05d}.csv"


def write_trajectory(traj: Trajectory, directory: Path) -> List[str]:
    """One field CSV per snapshot plus the charge CSV; returns paths relative to the run directory."""
    directory = Path(directory)
    outputs = []
    for i, snap in enumerate(traj.snapshots):
        write_field_csv(snap.field, directory / snapshot_name(i))
        outputs.append(snapshot_name(i))

    if traj.last_good is not None and traj.aborted:
        write_field_csv(traj.last_good.field, directory / "last_good.csv")
        outputs.append("last_good.csv")

    if traj.charge_reports:
        atomic_write_text(directory / "charges.csv", charges_to_csv(traj.charge_reports))
        outputs.append("charges.csv")
    return outputs


def trajectory_parameters(traj: Trajectory) -> Dict[str, Any]:
    return {
        'config': traj.config.to_dict() if traj.config else None,
        'params': traj.params.to_dict(),
        'dt': traj.dt,
        'snapshot_times': [snap.t for snap in traj.snapshots],
    }


def load_trajectory(directory: Path) -> Trajectory:
    """Rebuild a trajectory from a run directory written by the evolve command."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    parameters = manifest.parameters

    try:
        params = DeformationParams.from_dict(parameters['params'])
        config = EvolveConfig.from_dict(parameters['config']) if parameters.get('config') else None
        times = [float(t) for t in parameters['snapshot_times']]
        dt = float(parameters['dt'])
    except (KeyError, TypeError, ValueError) as exc:
        raise TrajectoryError(f"manifest in {directory} lacks trajectory parameters: {exc}")

    length = config.domain_length if config else None
    snapshots = []
    for i, t in enumerate(times):
        path = directory / snapshot_name(i)
        if not path.exists():
            raise TrajectoryError(f"missing snapshot {path}")
        snapshots.append(Snapshot(t, read_field_csv(path, length)))

    if not snapshots:
        raise TrajectoryError(f"no snapshots in {directory}")
    if any(not snapshots[0].field.same_grid(s.field) for s in snapshots[1:]):
        raise TrajectoryError(f"snapshots in {directory} do not share one grid")

    return Trajectory(snapshots, dt, params, config, abort=manifest.abort)


def write_json(data: Any, path: Path) -> Path:
    return atomic_write_text(path, json.dumps(data, indent=2, default=str))


def run_directory(command: str, out: Optional[Path] = None) -> Path:
    """Output directory of one command run, under the configured output root unless given."""
    if out is None:
        out = settings.output_root / f"{command}_{datetime.now().strftime('%Y%m%d_%H%M%S_%f')}"
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out
