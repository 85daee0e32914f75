# ptkdv/services/specfun.py
"""
Complex special-function kernel.

Everything here is a pure function of its arguments. Complex scalars are plain
Python ``complex`` values; array-valued helpers take and return numpy arrays.
Branch multiplicity is never resolved inside ``branch_power``: all sheets are
selected explicitly through the phase helpers.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import quad

from ..core.config import settings
from ..core.errors import ConvergenceError, DomainError, PoleError

Number = Union[int, float, complex]

_ZERO_TOL = 1e-14

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by the hypergeometric series."""
    rel_tol: float = 1e-12
    max_terms: int = 100_000
    convergence_radius_guard: float = 0.95

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1, got {self.max_terms}")
        if not 0.0 < self.convergence_radius_guard < 1.0:
            raise DomainError(
                f"convergence_radius_guard must lie in (0, 1), got {self.convergence_radius_guard}"
            )

    @classmethod
    def from_settings(cls) -> 'SeriesControl':
        return cls(
            rel_tol=settings.series_rel_tol,
            max_terms=settings.series_max_terms,
            convergence_radius_guard=settings.series_guard,
        )

    def to_dict(self) -> dict:
        return {
            'rel_tol': self.rel_tol,
            'max_terms': self.max_terms,
            'convergence_radius_guard': self.convergence_radius_guard,
        }


DEFAULT_CONTROL = SeriesControl.from_settings()


def is_nonpositive_integer(z: Number) -> bool:
    z = complex(z)
    return abs(z.imag) < _ZERO_TOL and z.real < 0.5 and abs(z.real - round(z.real)) < _ZERO_TOL


def _normalize(z: Number) -> complex:
    # a negative zero imaginary part would put real negatives on the lower lip of the cut
    z = complex(z)
    return complex(z.real, z.imag + 0.0)


# ---------------------------------------------------------------------------
# Elementary pieces
# ---------------------------------------------------------------------------

def pochhammer(a: Number, n: int) -> complex:
    """Rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0:
        raise DomainError(f"pochhammer needs a nonnegative integer order, got {n}")

    result = complex(1.0)
    for k in range(n):
        result *= a + k
    return result


def cpow(z: Number, p: Number) -> complex:
    """exp(p Log z) for complex exponents, principal logarithm."""
    z = _normalize(z)
    p = complex(p)
    if z == 0:
        if p == 0:
            return complex(1.0)
        if p.real > 0:
            return complex(0.0)
        raise PoleError(f"0 raised to the power {p}")
    return cmath.exp(p * cmath.log(z))


def branch_power(z: Number, p: float) -> complex:
    """Principal power exp(p Log z) with Im Log z in (-pi, pi]."""
    return cpow(z, float(p))


def branch_power_array(z: np.ndarray, p: float) -> np.ndarray:
    """Vectorized principal power; zero bases follow ``branch_power``."""
    z = np.asarray(z, dtype=complex)
    z = z.real + 1j * (z.imag + 0.0)

    if p == 0:
        return np.ones_like(z)

    zero = z == 0
    if p < 0 and np.any(zero):
        index = int(np.flatnonzero(zero)[0])
        raise PoleError(f"0 raised to the negative power {p} at index {index}")

    with np.errstate(divide="ignore", invalid="ignore"):
        result = np.exp(p * np.log(np.where(zero, 1.0, z)))
    return np.where(zero, 0.0, result)


def unit_phase(turns_of_pi: float) -> complex:
    """exp(i pi theta), exact at multiples of pi/2."""
    theta = math.fmod(turns_of_pi, 2.0)
    if theta < 0:
        theta += 2.0

    quarter = theta * 2.0
    if abs(quarter - round(quarter)) < 1e-13:
        return (1.0 + 0j, 1j, -1.0 + 0j, -1j)[int(round(quarter)) % 4]
    return cmath.exp(1j * math.pi * theta)


def branch_phase_vx(epsilon: float, n: int) -> complex:
    """Phase of the n-th branch of the travelling-wave first-order ODE."""
    if epsilon == -1:
        raise PoleError("branch phase is singular at epsilon = -1")
    return unit_phase((4 * n + 3 * epsilon + 1) / (2 * (1 + epsilon)))


def branch_phase_xt(epsilon: float, n: int) -> complex:
    """Phase in front of the separated (x - ct)(v) integral for branch n."""
    if epsilon == -1:
        raise PoleError("branch phase is singular at epsilon = -1")
    return unit_phase((4 * n + epsilon - 1) / (2 * (1 + epsilon)))


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

def gamma(z: Number) -> complex:
    """Gamma function by the Lanczos approximation with reflection."""
    z = complex(z)
    if is_nonpositive_integer(z):
        raise PoleError(f"gamma has a pole at {z}")

    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma(1 - z))

    z -= 1
    x = complex(_LANCZOS_COEFFS[0])
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS_COEFFS[i] / (z + i)

    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def rgamma(z: Number) -> complex:
    """Reciprocal gamma, zero at the poles of gamma."""
    if is_nonpositive_integer(z):
        return complex(0.0)
    return 1.0 / gamma(z)


def beta(a: Number, b: Number) -> complex:
    """Complete beta function Gamma(a) Gamma(b) / Gamma(a + b)."""
    return gamma(a) * gamma(b) * rgamma(a + b)


# ---------------------------------------------------------------------------
# Quadrature helper
# ---------------------------------------------------------------------------

def quad_complex(func: Callable[[float], complex], a: float, b: float,
                 epsabs: float = 1e-14, epsrel: float = 1e-12, limit: int = 200,
                 **kwargs) -> complex:
    """Adaptive Gauss-Kronrod quadrature of a complex integrand on a real interval."""
    re, re_err = quad(lambda t: func(t).real, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, **kwargs)
    im, im_err = quad(lambda t: func(t).imag, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, **kwargs)

    value = complex(re, im)
    error = math.hypot(re_err, im_err)
    if not math.isfinite(error) or error > max(1e3 * epsabs, 1e-6 * abs(value)):
        raise ConvergenceError(f"quadrature did not converge on [{a}, {b}] (error estimate {error:.3e})")
    return value


# ---------------------------------------------------------------------------
# Gauss 2F1
# ---------------------------------------------------------------------------

def _series_2f1(a: complex, b: complex, c: complex, z: complex, ctl: SeriesControl) -> complex:
    term = complex(1.0)
    total = complex(1.0)
    small = 0

    for n in range(ctl.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term

        if term == 0:
            return total
        if abs(term) <= ctl.rel_tol * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0

    raise ConvergenceError(f"2F1({a}, {b}; {c}; {z}) series did not converge in {ctl.max_terms} terms")


def gauss_2f1(a: Number, b: Number, c: Number, z: Number,
              ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Gauss hypergeometric function with the standard linear transformations.

    Direct series inside the guard radius; the Pfaff transformation
    z -> z/(z-1) or the 1-z connection formula beyond it.
    """
    a, b, c, z = complex(a), complex(b), complex(c), _normalize(z)
    if is_nonpositive_integer(c):
        raise PoleError(f"2F1 has a pole at c = {c}")

    if z == 0:
        return complex(1.0)

    guard = ctl.convergence_radius_guard

    # terminating series are polynomials in z
    if is_nonpositive_integer(a) or is_nonpositive_integer(b):
        return _series_2f1(a, b, c, z, ctl)

    if abs(z) < guard:
        return _series_2f1(a, b, c, z, ctl)

    if z == 1:
        if (c - a - b).real > 0:
            return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
        raise ConvergenceError(f"2F1({a}, {b}; {c}; 1) diverges (Re(c-a-b) <= 0)")

    w = z / (z - 1)
    if abs(w) < guard:
        logger.debug(f"2F1 at |z|={abs(z):.3f}: Pfaff transformation")
        return cpow(1 - z, -a) * _series_2f1(a, c - b, c, w, ctl)

    if abs(1 - z) < guard:
        s = c - a - b
        if abs(s.imag) < _ZERO_TOL and abs(s.real - round(s.real)) < _ZERO_TOL:
            raise ConvergenceError(f"2F1 connection formula degenerate for integer c-a-b = {s}")

        logger.debug(f"2F1 at |z|={abs(z):.3f}: 1-z connection formula")
        first = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b) * _series_2f1(a, b, 1 - s, 1 - z, ctl)
        second = (cpow(1 - z, s) * gamma(c) * gamma(-s) * rgamma(a) * rgamma(b)
                  * _series_2f1(c - a, c - b, 1 + s, 1 - z, ctl))
        return first + second

    raise ConvergenceError(f"no transformation brings 2F1 argument z={z} inside the guard radius {guard}")


# ---------------------------------------------------------------------------
# Appell F1
# ---------------------------------------------------------------------------

def _terms_needed(r: float, ctl: SeriesControl) -> int:
    if r == 0:
        return 2
    if r >= 1:
        return ctl.max_terms
    estimate = math.ceil(math.log(ctl.rel_tol * 1e-3) / math.log(r)) + 32
    return int(min(ctl.max_terms, max(estimate, 8)))


def _f1_series(alpha: complex, beta_: complex, beta_p: complex, gamma_: complex,
               x: complex, y: complex, ctl: SeriesControl) -> complex:
    n_x = _terms_needed(abs(x), ctl)
    n_y = _terms_needed(abs(y), ctl)

    while True:
        if n_x * n_y > 8_000_000:
            raise ConvergenceError(f"F1 double series too large ({n_x} x {n_y} terms) at x={x}, y={y}")

        n = np.arange(n_x)[:, None]
        m = np.arange(n_y)[None, :]

        # t(0, m): leading term of each column
        mm = np.arange(n_y - 1)
        lead = np.ones(n_y, dtype=complex)
        lead[1:] = np.cumprod((alpha + mm) * (beta_p + mm) / ((gamma_ + mm) * (mm + 1)) * y)

        # t(n+1, m) / t(n, m)
        ratio = (alpha + n[:-1] + m) * (beta_ + n[:-1]) / ((gamma_ + n[:-1] + m) * (n[:-1] + 1)) * x
        terms = np.ones((n_x, n_y), dtype=complex)
        terms[1:, :] = np.cumprod(ratio, axis=0)
        terms *= lead[None, :]

        total = complex(terms.sum())
        bound = ctl.rel_tol * max(abs(total), 1e-300)
        tail_n = np.max(np.abs(terms[-2:, :]))
        tail_m = np.max(np.abs(terms[:, -2:]))
        converged_n = tail_n <= bound or abs(x) == 0
        converged_m = tail_m <= bound or abs(y) == 0

        if converged_n and converged_m:
            return total
        if (not converged_n and n_x >= ctl.max_terms) or (not converged_m and n_y >= ctl.max_terms):
            raise ConvergenceError(f"F1 double series did not converge at x={x}, y={y}")

        if not converged_n:
            n_x = min(ctl.max_terms, 2 * n_x)
        if not converged_m:
            n_y = min(ctl.max_terms, 2 * n_y)


def _f1_quadrature(alpha: complex, beta_: complex, beta_p: complex, gamma_: complex,
                   x: complex, y: complex) -> complex:
    # Euler representation, needs Re(gamma) > Re(alpha) > 0 with real alpha, gamma
    if abs(alpha.imag) > _ZERO_TOL or abs(gamma_.imag) > _ZERO_TOL:
        raise ConvergenceError("F1 quadrature needs real alpha and gamma")
    a, g = alpha.real, gamma_.real
    if not (g > a > 0):
        raise ConvergenceError(f"F1 quadrature needs gamma > alpha > 0 (alpha={a}, gamma={g})")

    for name, arg in (("x", x), ("y", y)):
        if abs(arg.imag) < _ZERO_TOL and arg.real >= 1:
            raise ConvergenceError(f"F1 quadrature: {name}={arg} lies on the branch cut [1, inf)")

    def integrand(t: float) -> complex:
        return cpow(1 - x * t, -beta_) * cpow(1 - y * t, -beta_p)

    integral = quad_complex(integrand, 0.0, 1.0, weight="alg", wvar=(a - 1.0, g - a - 1.0))
    return gamma(gamma_) * rgamma(alpha) * rgamma(gamma_ - alpha) * integral


def appell_f1(alpha: Number, beta_: Number, beta_p: Number, gamma_: Number,
              x: Number, y: Number, ctl: SeriesControl = DEFAULT_CONTROL,
              method: str = "auto") -> complex:
    """Appell F1 by double series inside the guard radius, Euler quadrature outside.

    ``method`` is ``auto``, ``series`` or ``quadrature``.
    """
    alpha, beta_, beta_p, gamma_ = complex(alpha), complex(beta_), complex(beta_p), complex(gamma_)
    x, y = _normalize(x), _normalize(y)

    if is_nonpositive_integer(gamma_):
        raise PoleError(f"F1 has a pole at gamma = {gamma_}")
    if method not in ("auto", "series", "quadrature"):
        raise DomainError(f"unknown F1 method: {method}")

    if x == 0 and y == 0:
        return complex(1.0)

    radius = max(abs(x), abs(y))
    if method == "series" or (method == "auto" and radius < ctl.convergence_radius_guard):
        return _f1_series(alpha, beta_, beta_p, gamma_, x, y, ctl)

    logger.debug(f"F1 at max(|x|,|y|)={radius:.3f}: quadrature")
    return _f1_quadrature(alpha, beta_, beta_p, gamma_, x, y)


# ---------------------------------------------------------------------------
# Incomplete beta
# ---------------------------------------------------------------------------

def incomplete_beta(z: Number, a: Number, b: Number,
                    ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """B_z(a, b), continued to complex z by (z^a / a) 2F1(a, 1-b; a+1; z)."""
    a, b = complex(a), complex(b)
    if is_nonpositive_integer(a):
        raise DomainError(f"incomplete beta undefined for a = {a}")

    z = _normalize(z)
    if z == 0:
        if a.real > 0:
            return complex(0.0)
        raise PoleError(f"B_0(a, b) diverges for Re(a) = {a.real} <= 0")

    return cpow(z, a) / a * gauss_2f1(a, 1 - b, a + 1, z, ctl)


# ---------------------------------------------------------------------------
# Jacobi elliptic functions
# ---------------------------------------------------------------------------

def _agm_sequence(m: float) -> Tuple[list, list]:
    a = [1.0]
    c = [math.sqrt(m)]
    b = math.sqrt(1.0 - m)

    for _ in range(64):
        if abs(c[-1]) <= 1e-16:
            break
        a_next = 0.5 * (a[-1] + b)
        c.append(0.5 * (a[-1] - b))
        b = math.sqrt(a[-1] * b)
        a.append(a_next)

    return a, c


def jacobi_sncndn(u, m: float):
    """sn, cn, dn by the descending Landen (AGM) method; vectorized in u."""
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"elliptic parameter m must lie in [0, 1], got {m}")

    scalar = np.isscalar(u)
    u = np.asarray(u, dtype=float)

    if m == 0.0:
        sn, cn, dn = np.sin(u), np.cos(u), np.ones_like(u)
    elif m == 1.0:
        sn, cn = np.tanh(u), 1.0 / np.cosh(u)
        dn = cn.copy()
    else:
        a, c = _agm_sequence(m)
        steps = len(a) - 1
        phi = (2.0 ** steps) * a[-1] * u
        for n in range(steps, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c[n] / a[n] * np.sin(phi)))
        sn, cn = np.sin(phi), np.cos(phi)
        # dn > 0 on the real axis for m <= 1
        dn = np.sqrt(np.maximum(1.0 - m * sn ** 2, 0.0))

    if scalar:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_dn(u, m: float):
    """Jacobi dn(u | m)."""
    return jacobi_sncndn(u, m)[2]


def elliptic_k(m: float) -> float:
    """Complete elliptic integral of the first kind K(m) = pi / (2 AGM(1, sqrt(1-m)))."""
    if not 0.0 <= m < 1.0:
        raise PoleError(f"K(m) needs 0 <= m < 1, got {m}")

    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)
