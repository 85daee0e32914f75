# ptkdv/services/charges.py
"""
Conserved charges I1 = int u, I2 = int u^2, I3 = H, their densities and fluxes.

Both equation variants are written as u_t = d/dx(F) with
F = beta u^2 - eps (i u_x)^(eps-1) u_xx, beta = 3 (scaled) or -1/2 (unscaled).
The fluxes below satisfy T_t + X_x = 0 along solutions with kappa = 0.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np
from loguru import logger

from ..core.errors import DomainError, TrajectoryError
from .model import (
    DeformationParams,
    Field,
    Variant,
    prepare_slope,
    deformed_power,
    derivatives,
    dx_of,
)

if TYPE_CHECKING:
    from .evolve import Trajectory

CHARGE_INDICES = (1, 2, 3)


def advection_coefficient(params: DeformationParams) -> float:
    """beta in u_t = d/dx(beta u^2 - ...)."""
    return 3.0 if params.variant is Variant.SCALED else -0.5


def _check_index(n: int):
    if n not in CHARGE_INDICES:
        raise DomainError(f"charge index must be 1, 2 or 3, got {n}")


@dataclass(frozen=True)
class ChargeReport:
    """Time series of one charge with drift and flux-law statistics."""
    charge_index: int
    times: Tuple[float, ...]
    values: Tuple[complex, ...]
    drift: float
    flux_residual: Optional[float] = None

    @classmethod
    def from_series(cls, charge_index: int, times, values,
                    flux_residual: Optional[float] = None) -> 'ChargeReport':
        values = tuple(complex(v) for v in values)
        if not values:
            raise TrajectoryError("charge report needs at least one value")
        initial = values[0]
        drift = max(abs(v - initial) for v in values) / (1.0 + abs(initial))
        return cls(charge_index, tuple(float(t) for t in times), values, float(drift), flux_residual)

    def to_dict(self) -> dict:
        return {
            'charge_index': self.charge_index,
            'drift': self.drift,
            'flux_residual': self.flux_residual,
            'initial_re': self.values[0].real,
            'initial_im': self.values[0].imag,
        }


# ---------------------------------------------------------------------------
# Densities and fluxes
# ---------------------------------------------------------------------------

def density(n: int, f: Field, params: DeformationParams) -> np.ndarray:
    """Conserved density T(n) on the grid."""
    _check_index(n)
    u = f.values
    if n == 1:
        return u.copy()
    if n == 2:
        return u ** 2

    eps = params.epsilon
    ux = dx_of(u, f.length)
    beta = advection_coefficient(params)
    return beta / 3.0 * u ** 3 - deformed_power(1j * ux, eps + 1, params.branch_n) / (1 + eps)


def charge(n: int, f: Field, params: DeformationParams) -> complex:
    """Periodic-grid integral of the n-th conserved density."""
    return complex(np.sum(density(n, f, params)) * f.dx)


def flux(n: int, f: Field, params: DeformationParams, clamp: Optional[float] = None,
         sign_flip: bool = False) -> Field:
    """Flux X(n) evaluated with spectral derivatives and principal-branch powers.

    ``sign_flip`` negates the result; used to check that the flux audits
    catch a wrong sign.
    """
    _check_index(n)
    eps = params.epsilon
    bn = params.branch_n
    beta = advection_coefficient(params)

    u = f.values
    ux, uxx, uxxx = derivatives(f)
    ux = prepare_slope(ux, eps, clamp)
    w = 1j * ux
    w_em1 = deformed_power(w, eps - 1, bn)

    if n == 1:
        values = -beta * u ** 2 + eps * w_em1 * uxx
    elif n == 2:
        values = (2.0 * eps / (1 + eps) * deformed_power(w, eps + 1, bn)
                  + 2.0 * eps * u * w_em1 * uxx
                  - 4.0 * beta / 3.0 * u ** 3)
    else:
        gradient = beta * u ** 2 - eps * w_em1 * uxx
        gradient_x = 2.0 * beta * u * ux - eps * w_em1 * uxxx
        if eps != 1:
            gradient_x = gradient_x - 1j * eps * (eps - 1) * deformed_power(w, eps - 2, bn) * uxx ** 2
        values = -0.5 * gradient ** 2 + 1j * deformed_power(w, eps, bn) * gradient_x

    if sign_flip:
        values = -values
    return f.with_values(values)


def displayed_flux3(f: Field, params: DeformationParams) -> np.ndarray:
    """Expanded third flux of the scaled equation, term by term."""
    eps = params.epsilon
    bn = params.branch_n
    u = f.values
    ux, uxx, uxxx = derivatives(f)
    w = 1j * ux
    return ((eps ** 2 / 2 - eps) * deformed_power(w, 2 * eps - 2, bn) * uxx ** 2
            + 3.0 * (eps * u * uxx - 2.0 * ux ** 2) * u * deformed_power(w, eps - 1, bn)
            - 1j * eps * deformed_power(w, 2 * eps - 1, bn) * uxxx
            - 4.5 * u ** 4)


# ---------------------------------------------------------------------------
# Trajectory audits
# ---------------------------------------------------------------------------

def _snapshot_spacing(traj: 'Trajectory') -> float:
    times = np.array([snap.t for snap in traj.snapshots])
    if times.size < 3:
        raise TrajectoryError(f"conservation residual needs at least 3 snapshots, got {times.size}")

    steps = np.diff(times)
    spacing = float(steps[0])
    if spacing <= 0 or np.max(np.abs(steps - spacing)) > 1e-9 * max(spacing, 1.0):
        raise TrajectoryError("snapshot times must be strictly increasing and uniform")
    return spacing


def conservation_residual(n: int, traj: 'Trajectory', params: DeformationParams,
                          clamp: Optional[float] = None, sign_flip: bool = False) -> float:
    """max |dT/dt + dX/dx| over interior snapshots, central differences in t."""
    _check_index(n)
    spacing = _snapshot_spacing(traj)
    snapshots = traj.snapshots

    densities = [density(n, snap.field, params) for snap in snapshots]
    residual = 0.0
    for j in range(1, len(snapshots) - 1):
        f = snapshots[j].field
        t_rate = (densities[j + 1] - densities[j - 1]) / (2.0 * spacing)
        x_rate = dx_of(flux(n, f, params, clamp, sign_flip).values, f.length)
        residual = max(residual, float(np.max(np.abs(t_rate + x_rate))))

    return residual


def charge_report(n: int, traj: 'Trajectory', params: DeformationParams,
                  clamp: Optional[float] = None, sign_flip: bool = False) -> ChargeReport:
    """Charge time series plus drift, with the flux residual when enough snapshots exist."""
    _check_index(n)
    times = [snap.t for snap in traj.snapshots]
    values = [charge(n, snap.field, params) for snap in traj.snapshots]

    residual = None
    if len(traj.snapshots) >= 3:
        residual = conservation_residual(n, traj, params, clamp, sign_flip)

    report = ChargeReport.from_series(n, times, values, residual)
    logger.debug(f"I{n}: drift {report.drift:.3e}, flux residual {report.flux_residual}")
    return report


def charge_reports(traj: 'Trajectory', params: DeformationParams,
                   clamp: Optional[float] = None) -> List[ChargeReport]:
    return [charge_report(n, traj, params, clamp) for n in CHARGE_INDICES]
