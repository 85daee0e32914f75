# ptkdv/services/evolve.py
"""
Pseudospectral time evolution of the deformed equation with explicit RK4.
"""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
from loguru import logger

from ..core.config import settings
from ..core.errors import BlowUpError, DomainError, DynamicsAbort
from ..core.logging import log_performance
from .charges import ChargeReport, charge_reports
from .model import DeformationParams, Field, dx_of, eom_rhs, resample


@dataclass(frozen=True)
class EvolveConfig:
    """Grid, step and output cadence of one evolution run."""
    grid_points: int
    domain_length: float
    dt: float
    t_final: float
    snapshot_stride: int = 1
    dealias: bool = True
    singular_clamp: Optional[float] = None

    def __post_init__(self):
        if self.grid_points < 16 or self.grid_points & (self.grid_points - 1):
            raise DomainError(f"grid_points must be a power of two >= 16, got {self.grid_points}")
        if not self.domain_length > 0:
            raise DomainError(f"domain_length must be positive, got {self.domain_length}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.t_final != 0 and self.t_final < self.dt:
            raise DomainError(f"t_final must be 0 or at least dt, got {self.t_final}")
        if self.snapshot_stride < 1:
            raise DomainError(f"snapshot_stride must be at least 1, got {self.snapshot_stride}")
        if self.singular_clamp is not None and not self.singular_clamp > 0:
            raise DomainError(f"singular_clamp must be positive, got {self.singular_clamp}")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def dx(self) -> float:
        return self.domain_length / self.grid_points

    @property
    def k_max(self) -> float:
        resolved = self.grid_points / 3.0 if self.dealias else self.grid_points / 2.0
        return 2.0 * math.pi / self.domain_length * resolved

    def stability_dt(self, dispersion_scale: float = 1.0) -> float:
        """Largest stable RK4 step for u_t = -s u_xxx at the highest resolved mode."""
        if dispersion_scale <= 0:
            return math.inf
        return 2.8 / (dispersion_scale * self.k_max ** 3)

    def with_stable_dt(self, f0: Field, params: DeformationParams, safety: float = 0.5) -> 'EvolveConfig':
        """Same run with dt = t_final / steps, just below safety times the estimate on f0."""
        if self.t_final <= 0:
            raise DomainError("a stable step needs t_final > 0")
        limit = safety * self.stability_dt(dispersion_scale(f0, params, self.singular_clamp))
        steps = max(1, math.ceil(self.t_final / limit))
        return replace(self, dt=self.t_final / steps)

    @staticmethod
    def default_dt(domain_length: float, grid_points: int) -> float:
        return 0.1 * (domain_length / grid_points) ** 3

    def to_dict(self) -> dict:
        return {
            'grid_points': self.grid_points,
            'domain_length': self.domain_length,
            'dt': self.dt,
            't_final': self.t_final,
            'snapshot_stride': self.snapshot_stride,
            'dealias': self.dealias,
            'singular_clamp': self.singular_clamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'EvolveConfig':
        return cls(
            grid_points=int(data['grid_points']),
            domain_length=float(data['domain_length']),
            dt=float(data['dt']),
            t_final=float(data['t_final']),
            snapshot_stride=int(data.get('snapshot_stride', 1)),
            dealias=bool(data.get('dealias', True)),
            singular_clamp=data.get('singular_clamp'),
        )


@dataclass(frozen=True)
class Snapshot:
    t: float
    field: Field


@dataclass
class Trajectory:
    """Uniformly spaced snapshots of one run."""
    snapshots: List[Snapshot]
    dt: float
    params: DeformationParams
    config: Optional[EvolveConfig] = None
    charge_reports: List[ChargeReport] = field(default_factory=list)
    abort: Optional[dict] = None
    last_good: Optional[Snapshot] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([snap.t for snap in self.snapshots])

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def aborted(self) -> bool:
        return self.abort is not None

    def report(self, n: int) -> Optional[ChargeReport]:
        for report in self.charge_reports:
            if report.charge_index == n:
                return report
        return None


def dispersion_scale(f: Field, params: DeformationParams, clamp: Optional[float] = None) -> float:
    """max |eps (i u_x)^(eps-1)| on f, the coefficient of u_xxx in the linearized equation."""
    p = params.epsilon - 1.0
    if p == 0:
        return abs(params.epsilon)
    slope = np.abs(dx_of(f.values, f.length))
    if p < 0:
        slope = np.maximum(slope, settings.singular_clamp if clamp is None else clamp)
    return float(abs(params.epsilon) * np.max(slope ** p))


def dealias(values: np.ndarray) -> np.ndarray:
    """2/3 rule: zero every mode with |j| > N/3."""
    count = values.size
    modes = np.abs(np.fft.fftfreq(count, d=1.0 / count))
    spectrum = np.fft.fft(values)
    spectrum[modes > count / 3.0] = 0.0
    return np.fft.ifft(spectrum)


def _stage(f: Field, params: DeformationParams, apply_dealias: bool, clamp: Optional[float]) -> np.ndarray:
    rate = eom_rhs(f, params, clamp).values
    return dealias(rate) if apply_dealias else rate


def step_rk4(f: Field, params: DeformationParams, dt: float, dealias: bool = False,
             clamp: Optional[float] = None, blowup_threshold: Optional[float] = None) -> Field:
    """One classical fourth-order Runge-Kutta step of eom_rhs."""
    threshold = blowup_threshold if blowup_threshold is not None else settings.blowup_threshold
    u = f.values

    k1 = _stage(f, params, dealias, clamp)
    k2 = _stage(f.with_values(u + 0.5 * dt * k1), params, dealias, clamp)
    k3 = _stage(f.with_values(u + 0.5 * dt * k2), params, dealias, clamp)
    k4 = _stage(f.with_values(u + dt * k3), params, dealias, clamp)
    updated = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    magnitude = np.abs(updated)
    bad = np.flatnonzero(~np.isfinite(magnitude) | (magnitude > threshold))
    if bad.size:
        index = int(bad[0])
        raise BlowUpError(
            f"|u| = {magnitude[index]:.3e} exceeds {threshold:.1e} at grid index {index}",
            grid_index=index, magnitude=float(magnitude[index]),
        )
    return f.with_values(updated)


@log_performance("evolve")
def evolve(f0: Field, cfg: EvolveConfig, params: DeformationParams) -> Trajectory:
    """Integrate to cfg.t_final, keeping every snapshot_stride-th state.

    A blow-up or singularity stops the run; the trajectory keeps the snapshots
    taken so far, the last good state and the abort diagnostics.
    """
    if f0.count != cfg.grid_points or not math.isclose(f0.length, cfg.domain_length, rel_tol=1e-12):
        raise DomainError(
            f"initial field ({f0.count} points, length {f0.length}) does not match the configured grid "
            f"({cfg.grid_points} points, length {cfg.domain_length})"
        )

    if not params.integer_epsilon:
        logger.warning(f"epsilon = {params.epsilon} is not an integer; evolution is experimental")
    scale = dispersion_scale(f0, params, cfg.singular_clamp)
    if cfg.dt > cfg.stability_dt(scale):
        logger.warning(f"dt = {cfg.dt:.3e} exceeds the linear RK4 stability estimate {cfg.stability_dt(scale):.3e} "
                       f"(dispersion coefficient up to {scale:.3g})")

    steps = cfg.steps
    if steps and not math.isclose(steps * cfg.dt, cfg.t_final, rel_tol=1e-9):
        logger.warning(f"t_final = {cfg.t_final} is not a multiple of dt; stopping at {steps * cfg.dt}")

    logger.info(f"Evolving eps={params.epsilon} ({params.variant.value}) on {cfg.grid_points} points, "
                f"{steps} steps of dt={cfg.dt:.3e}")

    state = f0
    snapshots = [Snapshot(0.0, f0)]
    last_good = snapshots[0]
    abort = None

    for step in range(1, steps + 1):
        try:
            state = step_rk4(state, params, cfg.dt, cfg.dealias, cfg.singular_clamp)
        except DynamicsAbort as exc:
            exc.time = last_good.t
            abort = exc.to_dict()
            logger.error(f"Evolution aborted at t={last_good.t:.6g}: {exc}")
            break

        last_good = Snapshot(step * cfg.dt, state)
        if step % cfg.snapshot_stride == 0:
            snapshots.append(last_good)

    traj = Trajectory(snapshots, cfg.dt, params, cfg, abort=abort, last_good=last_good)

    try:
        traj.charge_reports = charge_reports(traj, params, cfg.singular_clamp)
    except DynamicsAbort as exc:
        logger.warning(f"Charge monitoring skipped: {exc}")

    for report in traj.charge_reports:
        logger.info(f"I{report.charge_index}: drift {report.drift:.3e}")

    return traj


def resolution_error(f0: Field, cfg: EvolveConfig, params: DeformationParams) -> float:
    """Error estimate of one run at t_final: the larger of its distance to a dt/2 run and to a 2N run.

    The 2N run starts from the trigonometric interpolant of f0 with dt/8 and is
    compared on the shared even grid points. Returns inf when any run aborts.
    """
    refined_cfg = replace(cfg, grid_points=2 * cfg.grid_points, dt=cfg.dt / 8.0, snapshot_stride=10 ** 9)
    runs = [
        evolve(f0, replace(cfg, snapshot_stride=10 ** 9), params),
        evolve(f0, replace(cfg, dt=cfg.dt / 2.0, snapshot_stride=10 ** 9), params),
        evolve(resample(f0, refined_cfg.grid_points), refined_cfg, params),
    ]
    if any(run.aborted for run in runs):
        logger.warning("resolution estimate unavailable: a comparison run aborted")
        return math.inf

    base, half_step, refined = (run.last_good.field.values for run in runs)
    temporal = float(np.max(np.abs(base - half_step)))
    spatial = float(np.max(np.abs(base - refined[::2])))
    logger.debug(f"resolution error: temporal {temporal:.3e}, spatial {spatial:.3e}")
    return max(temporal, spatial)
