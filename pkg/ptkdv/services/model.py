# ptkdv/services/model.py
"""
The deformed KdV family on a periodic grid.

Hamiltonian density, energy, the two equation-of-motion variants, the
variational cross-check, and the PT and Galilean transformations.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger

from ..core.config import settings
from ..core.errors import DomainError, PoleError, SingularityError
from .specfun import branch_power, branch_power_array


class Variant(str, Enum):
    """Equation-of-motion normalization."""
    UNSCALED = "unscaled"   # u_t + u u_x + ...
    SCALED = "scaled"       # u_t - 6 u u_x + ... - kappa, derived from the Hamiltonian


@dataclass(frozen=True)
class DeformationParams:
    """Deformation exponent, global branch label and integration constants."""
    epsilon: float
    branch_n: int = 0
    kappa: float = 0.0
    kappa_hat: float = 0.0
    variant: Variant = Variant.SCALED

    def __post_init__(self):
        if self.epsilon == -1:
            raise PoleError("epsilon = -1 is a pole of the Hamiltonian density")
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, 'variant', Variant(self.variant))

    @property
    def integer_epsilon(self) -> bool:
        return float(self.epsilon).is_integer()

    def to_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'branch_n': self.branch_n,
            'kappa': self.kappa,
            'kappa_hat': self.kappa_hat,
            'variant': self.variant.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'DeformationParams':
        return cls(
            epsilon=float(data['epsilon']),
            branch_n=int(data.get('branch_n', 0)),
            kappa=float(data.get('kappa', 0.0)),
            kappa_hat=float(data.get('kappa_hat', 0.0)),
            variant=Variant(data.get('variant', Variant.SCALED.value)),
        )


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of u on the periodic grid x_j = j * length / count."""
    values: np.ndarray
    length: float

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("field values must be a nonempty one-dimensional array")
        if not self.length > 0:
            raise DomainError(f"domain length must be positive, got {self.length}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'length', float(self.length))

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return self.length / self.count

    @property
    def x(self) -> np.ndarray:
        return grid(self.length, self.count)

    def with_values(self, values: np.ndarray) -> 'Field':
        return Field(values, self.length)

    def same_grid(self, other: 'Field') -> bool:
        return self.count == other.count and math.isclose(self.length, other.length, rel_tol=1e-14)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], length: float, count: int) -> 'Field':
        return cls(np.asarray(func(grid(length, count)), dtype=complex), length)

    @classmethod
    def constant(cls, value: complex, length: float, count: int) -> 'Field':
        return cls(np.full(count, value, dtype=complex), length)


def grid(length: float, count: int) -> np.ndarray:
    """Periodic grid without the duplicated endpoint."""
    if count < 1:
        raise DomainError(f"grid needs at least one point, got {count}")
    return np.arange(count) * (length / count)


# ---------------------------------------------------------------------------
# Spectral calculus
# ---------------------------------------------------------------------------

def wavenumbers(length: float, count: int) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(count, d=length / count)


def _spectral(values: np.ndarray, length: float, order: int) -> np.ndarray:
    count = values.size
    multiplier = (1j * wavenumbers(length, count)) ** order
    if order % 2 == 1 and count % 2 == 0:
        multiplier[count // 2] = 0.0
    return np.fft.ifft(multiplier * np.fft.fft(values))


def spectral_derivative(f: Field, order: int) -> Field:
    """Fourier derivative of the given order; Nyquist mode zeroed for odd orders."""
    if order not in (1, 2, 3):
        raise DomainError(f"derivative order must be 1, 2 or 3, got {order}")
    return f.with_values(_spectral(f.values, f.length, order))


def derivatives(f: Field) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """u_x, u_xx, u_xxx from a single forward transform."""
    count = f.count
    k = wavenumbers(f.length, count)
    spectrum = np.fft.fft(f.values)

    odd = 1j * k
    if count % 2 == 0:
        odd[count // 2] = 0.0

    ux = np.fft.ifft(odd * spectrum)
    uxx = np.fft.ifft(-(k ** 2) * spectrum)
    uxxx = np.fft.ifft(odd * -(k ** 2) * spectrum)
    return ux, uxx, uxxx


def dx_of(values: np.ndarray, length: float) -> np.ndarray:
    return _spectral(np.asarray(values, dtype=complex), length, 1)


# ---------------------------------------------------------------------------
# Deformed powers
# ---------------------------------------------------------------------------

def deformed_power(w, p: float, branch_n: int = 0):
    """(w)^p on the branch_n-th sheet of the logarithm.

    Integer exponents are evaluated as exact integer powers; otherwise the
    principal power is multiplied by exp(2 pi i n p).
    """
    p = float(p)
    scalar = np.isscalar(w)

    if p.is_integer():
        if scalar:
            return branch_power(w, p) if p < 0 else complex(w) ** int(p)
        arr = np.asarray(w, dtype=complex)
        if p < 0 and np.any(arr == 0):
            raise PoleError(f"0 raised to the negative power {p}")
        return arr ** int(p)

    phase = np.exp(2j * np.pi * branch_n * p) if branch_n else 1.0
    if scalar:
        return branch_power(w, p) * phase
    return branch_power_array(w, p) * phase


def _needs_nonzero_ux(epsilon: float) -> bool:
    if epsilon < 1:
        return True
    return epsilon != 1 and epsilon < 2


def prepare_slope(ux: np.ndarray, epsilon: float, clamp: Optional[float]) -> np.ndarray:
    if not _needs_nonzero_ux(epsilon):
        return ux

    magnitude = np.abs(ux)
    if clamp is None:
        threshold = settings.singular_clamp
        bad = np.flatnonzero(magnitude <= threshold)
        if bad.size:
            index = int(bad[0])
            raise SingularityError(
                f"|u_x| = {magnitude[index]:.3e} <= {threshold:.1e} at grid index {index} "
                f"with epsilon = {epsilon} (negative power of i u_x)",
                grid_index=index, magnitude=float(magnitude[index]),
            )
        return ux

    phase = np.where(magnitude > 0, ux / np.where(magnitude > 0, magnitude, 1.0), 1.0)
    return np.maximum(magnitude, clamp) * phase


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def hamiltonian_density(u, ux, params: DeformationParams):
    """u^3 - (i u_x)^(eps+1) / (1+eps)."""
    eps = params.epsilon
    if eps == -1:
        raise PoleError("Hamiltonian density has a pole at epsilon = -1")

    if np.isscalar(u) and np.isscalar(ux):
        return complex(u) ** 3 - deformed_power(1j * complex(ux), eps + 1, params.branch_n) / (1 + eps)

    u = np.asarray(u, dtype=complex)
    ux = np.asarray(ux, dtype=complex)
    return u ** 3 - deformed_power(1j * ux, eps + 1, params.branch_n) / (1 + eps)


def energy(f: Field, params: DeformationParams) -> complex:
    """E = integral of the Hamiltonian density, rectangle rule on the periodic grid."""
    ux = dx_of(f.values, f.length)
    return complex(np.sum(hamiltonian_density(f.values, ux, params)) * f.dx)


def variational_gradient(f: Field, params: DeformationParams, clamp: Optional[float] = None) -> np.ndarray:
    """delta H / delta u = 3 u^2 - eps (i u_x)^(eps-1) u_xx."""
    eps = params.epsilon
    ux, uxx, _ = derivatives(f)
    ux = prepare_slope(ux, eps, clamp)
    return 3.0 * f.values ** 2 - eps * deformed_power(1j * ux, eps - 1, params.branch_n) * uxx


# ---------------------------------------------------------------------------
# Equations of motion
# ---------------------------------------------------------------------------

def dispersive_terms(f: Field, params: DeformationParams, clamp: Optional[float] = None) -> np.ndarray:
    """i eps (eps-1) (i u_x)^(eps-2) u_xx^2 + eps (i u_x)^(eps-1) u_xxx."""
    eps = params.epsilon
    ux, uxx, uxxx = derivatives(f)
    ux = prepare_slope(ux, eps, clamp)
    w = 1j * ux

    result = eps * deformed_power(w, eps - 1, params.branch_n) * uxxx
    if eps != 1:
        result = result + 1j * eps * (eps - 1) * deformed_power(w, eps - 2, params.branch_n) * uxx ** 2
    return result


def eom_rhs(f: Field, params: DeformationParams, clamp: Optional[float] = None) -> Field:
    """u_t solved from the selected variant.

    Unscaled: u_t = -u u_x - D, Scaled: u_t = 6 u u_x - D + kappa, with D the
    dispersive terms. ``clamp`` enables |u_x| <- max(|u_x|, clamp) where a
    negative power of i u_x is needed; without it such points raise
    SingularityError.
    """
    u = f.values
    ux = dx_of(u, f.length)
    dispersion = dispersive_terms(f, params, clamp)

    if params.variant is Variant.UNSCALED:
        rhs = -u * ux - dispersion
    else:
        rhs = 6.0 * u * ux - dispersion + params.kappa
    return f.with_values(rhs)


def _scaled(params: DeformationParams) -> DeformationParams:
    return replace(params, variant=Variant.SCALED, kappa=0.0)


def conservation_form_residual(f: Field, params: DeformationParams, clamp: Optional[float] = None) -> float:
    """Max norm of d/dx(3u^2 - eps (i u_x)^(eps-1) u_xx) minus the expanded scaled right side."""
    scaled = _scaled(params)
    conservative = dx_of(variational_gradient(f, scaled, clamp), f.length)
    expanded = eom_rhs(f, scaled, clamp).values
    return float(np.max(np.abs(conservative - expanded)))


def _bump(x: np.ndarray, center: float, length: float, width: float) -> np.ndarray:
    offset = (x - center + 0.5 * length) % length - 0.5 * length
    return np.exp(-0.5 * (offset / width) ** 2)


def variational_check(f: Field, params: DeformationParams, clamp: Optional[float] = None,
                      bumps: int = 8, step: float = 1e-3) -> float:
    """Hamiltonian-to-equation consistency.

    Returns the conservation-form residual plus the largest discrepancy between
    the analytic gradient paired with localized bumps and the directional
    derivative of ``energy`` (fourth-order central difference).
    """
    scaled = _scaled(params)
    residual = conservation_form_residual(f, scaled, clamp)

    gradient = variational_gradient(f, scaled, clamp)
    x = f.x
    width = f.length / 16.0
    discrepancy = 0.0

    for j in range(bumps):
        phi = _bump(x, (j + 0.5) * f.length / bumps, f.length, width)
        analytic = complex(np.sum(gradient * phi) * f.dx)

        def e(eta: float) -> complex:
            return energy(f.with_values(f.values + eta * phi), scaled)

        h = step
        numeric = (8.0 * (e(h) - e(-h)) - (e(2 * h) - e(-2 * h))) / (12.0 * h)
        discrepancy = max(discrepancy, abs(numeric - analytic))

    logger.debug(f"variational check eps={params.epsilon}: form residual {residual:.3e}, "
                 f"gradient discrepancy {discrepancy:.3e}")
    return residual + discrepancy


# ---------------------------------------------------------------------------
# Symmetries
# ---------------------------------------------------------------------------

def galilean_transform(f: Field, c: float, t: float) -> Field:
    """u(x - ct) + c on the same grid, shifted by spectral interpolation."""
    shift = math.fmod(c * t, f.length)
    if shift == 0:
        return f.with_values(f.values + c)

    count = f.count
    k = wavenumbers(f.length, count)
    factor = np.exp(-1j * k * shift)
    if count % 2 == 0:
        factor[count // 2] = math.cos(k[count // 2] * shift)

    shifted = np.fft.ifft(factor * np.fft.fft(f.values))
    return f.with_values(shifted + c)


def resample(f: Field, count: int) -> Field:
    """Trigonometric interpolant of f on a finer grid of count points."""
    if count < f.count:
        raise DomainError(f"resample only refines: {count} < {f.count}")
    if count == f.count:
        return f

    coeffs = np.fft.fft(f.values)
    half = f.count // 2
    padded = np.zeros(count, dtype=complex)
    if f.count % 2:
        padded[:half + 1] = coeffs[:half + 1]
        padded[count - half:] = coeffs[half + 1:]
    else:
        padded[:half] = coeffs[:half]
        padded[count - half + 1:] = coeffs[half + 1:]
        # the Nyquist mode is split between +N/2 and -N/2
        padded[half] = 0.5 * coeffs[half]
        padded[count - half] = 0.5 * coeffs[half]
    return Field(np.fft.ifft(padded) * (count / f.count), f.length)


def pt_reflect(f: Field) -> Field:
    """x -> conj(u(-x)) on the same grid."""
    index = (-np.arange(f.count)) % f.count
    return f.with_values(np.conj(f.values[index]))


def is_pt_symmetric(f: Field, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(pt_reflect(f).values - f.values)) <= tol * (1.0 + np.max(np.abs(f.values))))


def random_pt_field(length: float, count: int, modes: int = 4,
                    rng: Optional[np.random.Generator] = None, scale: float = 0.5) -> Field:
    """Band-limited field sum_k a_k exp(2 pi i k x / L) with real a_k, hence PT-symmetric."""
    if modes >= count // 3:
        raise DomainError(f"{modes} modes are not resolved on {count} points")

    rng = rng if rng is not None else np.random.default_rng()
    x = grid(length, count)
    values = np.zeros(count, dtype=complex)
    for j in range(-modes, modes + 1):
        values += scale * rng.standard_normal() * np.exp(2j * np.pi * j * x / length)
    return Field(values, length)


def random_smooth_field(length: float, count: int, modes: int = 4,
                        rng: Optional[np.random.Generator] = None, scale: float = 0.5) -> Field:
    """Band-limited real field from random Fourier coefficients."""
    rng = rng if rng is not None else np.random.default_rng()
    x = grid(length, count)
    values = np.full(count, scale * rng.standard_normal(), dtype=float)
    for j in range(1, modes + 1):
        a, b = scale * rng.standard_normal(2) / j
        values += a * np.cos(2 * np.pi * j * x / length) + b * np.sin(2 * np.pi * j * x / length)
    return Field(values.astype(complex), length)
