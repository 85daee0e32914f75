# ptkdv/services/waves.py
"""
Travelling-wave machinery.

For u(x, t) = v(x - ct) the deformed equation reduces to the first-order
branch ODE

    v_x = Phi_n [((eps+1)/eps) P(v)]^(1/(eps+1)),
    P(v) = v^3 + (c/2) v^2 + kappa v + kappa_hat,

whose separated form gives (x - ct)(v) as an integral of P^(-1/(1+eps)).
The closed forms (Appell F1, incomplete beta, the eps = 1 elementary
functions) are evaluated on the principal branch and aligned with the
principal integrand; when the alignment cannot be established the integral
is computed directly by quadrature along the real v-axis.
"""

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import partial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..core.config import settings
from ..core.errors import ConvergenceError, DomainError, PoleError
from ..core.logging import log_performance
from .model import Field, grid
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    appell_f1,
    branch_phase_vx,
    branch_phase_xt,
    branch_power,
    cpow,
    elliptic_k,
    gamma,
    incomplete_beta,
    jacobi_dn,
    quad_complex,
    rgamma,
)

Interval = Tuple[float, float]

_ROOT_TOL = 1e-12
_ALIGN_POINTS = (0.1, 0.4, 0.7, 0.95)
_ALIGN_TOL = 1e-9
_EXCLUSION_SPACINGS = 24


class SolutionKind(str, Enum):
    CNOIDAL = "cnoidal"
    TAN2 = "tan2"
    SECH2 = "sech2"


@dataclass(frozen=True)
class TravelingWaveParams:
    """Wavenumber k and elliptic parameter m; speed and constants follow from them."""
    k: complex
    m: float

    def __post_init__(self):
        object.__setattr__(self, 'k', complex(self.k))
        if self.k == 0:
            raise DomainError("wavenumber k must be nonzero")
        if not 0.0 <= self.m <= 1.0:
            raise DomainError(f"m must lie in [0, 1], got {self.m}")

    @property
    def c(self) -> complex:
        return 4.0 * self.k ** 2 * (2.0 - self.m)

    @property
    def omega(self) -> complex:
        return self.c * self.k

    @property
    def kappa(self) -> complex:
        return 4.0 * self.k ** 4 * (1.0 - self.m)

    @property
    def kappa_hat(self) -> complex:
        return 0j

    def cubic(self, v):
        """P(v) = v^3 + (c/2) v^2 + kappa v + kappa_hat."""
        return ((v + 0.5 * self.c) * v + self.kappa) * v + self.kappa_hat

    def roots(self) -> List[Tuple[complex, int]]:
        """Roots of P with multiplicities: 0, -2k^2 and -2k^2(1-m), merged when they coincide."""
        merged: List[Tuple[complex, int]] = []
        for root in (0j, -2.0 * self.k ** 2, -2.0 * self.k ** 2 * (1.0 - self.m)):
            for i, (existing, mult) in enumerate(merged):
                if abs(root - existing) <= _ROOT_TOL * (1.0 + abs(existing)):
                    merged[i] = (existing, mult + 1)
                    break
            else:
                merged.append((root, 1))
        return merged

    def real_roots(self) -> List[Tuple[float, int]]:
        return [(r.real, mult) for r, mult in self.roots() if abs(r.imag) <= _ROOT_TOL * (1.0 + abs(r))]

    def to_dict(self) -> dict:
        return {
            'k_re': self.k.real,
            'k_im': self.k.imag,
            'm': self.m,
            'c_re': self.c.real,
            'c_im': self.c.imag,
        }


@dataclass(frozen=True, eq=False)
class Curve:
    """Sampled map v -> (x - ct) for one (eps, n, k, m)."""
    epsilon: float
    branch_n: int
    wave: TravelingWaveParams
    v: np.ndarray
    xct: np.ndarray
    real_intervals: Tuple[Interval, ...] = ()
    form: str = "general"
    prefactor: str = "derived"
    failed: int = 0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        xct = np.asarray(self.xct, dtype=complex)
        if v.ndim != 1 or v.shape != xct.shape or v.size == 0:
            raise DomainError("curve needs matching nonempty v and xct arrays")
        if v.size > 1 and np.any(np.diff(v) <= 0):
            raise DomainError("curve samples must be strictly ordered in v")
        object.__setattr__(self, 'v', v)
        object.__setattr__(self, 'xct', xct)
        object.__setattr__(self, 'real_intervals', tuple(tuple(map(float, iv)) for iv in self.real_intervals))

    @property
    def samples(self) -> List[Tuple[float, complex]]:
        return list(zip(self.v.tolist(), self.xct.tolist()))

    def with_intervals(self, intervals: Sequence[Interval]) -> 'Curve':
        return replace(self, real_intervals=tuple(intervals))


# ---------------------------------------------------------------------------
# Branch ODE
# ---------------------------------------------------------------------------

def check_epsilon(epsilon: float):
    if epsilon == 0:
        raise PoleError("the travelling-wave reduction is singular at epsilon = 0")
    if epsilon == -1:
        raise PoleError("the travelling-wave reduction is singular at epsilon = -1")


def ode_rhs_vx(v: complex, params: TravelingWaveParams, epsilon: float, n: int) -> complex:
    """v_x on branch n."""
    check_epsilon(epsilon)
    base = (epsilon + 1) / epsilon * params.cubic(complex(v))
    return branch_phase_vx(epsilon, n) * branch_power(base, 1.0 / (epsilon + 1))


def ode_branch_for_curve(n: int) -> int:
    """ODE label whose v_x phase is the reciprocal of curve label n's (x - ct) phase."""
    return 1 - n


# ---------------------------------------------------------------------------
# Separated integral
# ---------------------------------------------------------------------------

def _multiplicity_at(point: float, wave: TravelingWaveParams) -> int:
    return sum(mult for r, mult in wave.real_roots() if abs(r - point) <= _ROOT_TOL * (1.0 + abs(r)))


def _roots_between(a: float, b: float, wave: TravelingWaveParams) -> List[float]:
    lo, hi = min(a, b), max(a, b)
    tol = _ROOT_TOL * (1.0 + max(abs(lo), abs(hi)))
    return sorted({r for r, _ in wave.real_roots() if lo + tol < r < hi - tol})


def _endpoint_map(a: float, b: float, sigma: float):
    """t = a + (b - a) tau^q absorbs |t - a|^(-sigma) at tau = 0."""
    if sigma >= 1.0:
        raise ConvergenceError(f"separated integral diverges at the root v = {a} (exponent {sigma:.3f} >= 1)")
    q = 1.0 / (1.0 - sigma)
    h = b - a
    return q, h


def _segment_integral(integrand: Callable[[float, float], complex], a: float, b: float,
                      sigma_a: float, sigma_b: float) -> complex:
    """integrand(anchor, d) is evaluated at t = anchor + d with d kept exact."""
    mid = 0.5 * (a + b)
    total = 0j

    q, h = _endpoint_map(a, mid, sigma_a)
    total += quad_complex(lambda tau: integrand(a, h * tau ** q) * h * q * tau ** (q - 1.0), 0.0, 1.0)

    q, h = _endpoint_map(b, mid, sigma_b)
    total -= quad_complex(lambda tau: integrand(b, h * tau ** q) * h * q * tau ** (q - 1.0), 0.0, 1.0)
    return total


def factored_cubic(anchor: float, d: float, wave: TravelingWaveParams) -> complex:
    """P(anchor + d) from its roots; a root at the anchor contributes d itself."""
    tol = _ROOT_TOL * (1.0 + abs(anchor))
    value = 1 + 0j
    for root, mult in wave.roots():
        factor = d if abs(root - anchor) <= tol else anchor + d - root
        value *= factor ** mult
    return value


def separated_integral(v: float, wave: TravelingWaveParams, epsilon: float) -> complex:
    """Principal primitive integral_0^v P(t)^(-1/(1+eps)) dt along the real axis.

    The path is split at real roots of P; each piece absorbs the endpoint
    singularity |t - r|^(-mult/(1+eps)) by a power substitution.
    """
    check_epsilon(epsilon)
    v = float(v)
    if v == 0:
        return 0j

    s = 1.0 / (1.0 + epsilon)

    def integrand(anchor: float, d: float) -> complex:
        return cpow(factored_cubic(anchor, d, wave), -s)

    # roots ordered along the path from 0 to v
    points = [0.0] + sorted(_roots_between(0.0, v, wave), reverse=v < 0) + [v]

    total = 0j
    for a, b in zip(points[:-1], points[1:]):
        total += _segment_integral(integrand, a, b,
                                   s * _multiplicity_at(a, wave), s * _multiplicity_at(b, wave))
    return total


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _xct_prefactor(epsilon: float, n: int) -> complex:
    s = 1.0 / (1.0 + epsilon)
    return branch_phase_xt(epsilon, n) * cpow(epsilon / (epsilon + 1.0), s)


def _alignment(ratio: Callable[[float], complex]) -> Optional[complex]:
    """Constant ratio of the principal integrand to a closed form's integrand, if there is one."""
    values = [ratio(tau) for tau in _ALIGN_POINTS]
    first = values[0]
    if not all(math.isfinite(abs(value)) for value in values):
        return None
    if any(abs(value - first) > _ALIGN_TOL * abs(first) for value in values[1:]):
        return None
    return first


def _crosses_root(v: float, wave: TravelingWaveParams) -> bool:
    return bool(_roots_between(0.0, v, wave)) or _multiplicity_at(v, wave) > 0


def _general_closed_form(v: float, wave: TravelingWaveParams, epsilon: float,
                         ctl: SeriesControl) -> Optional[complex]:
    s = 1.0 / (1.0 + epsilon)
    alpha = 1.0 - s
    gamma_ = 2.0 - s
    two_k2 = 2.0 * wave.k ** 2
    x_arg = -v / (two_k2 * (1.0 - wave.m))
    y_arg = -v / two_k2

    def ratio(tau: float) -> complex:
        principal = cpow(wave.cubic(v * tau), -s)
        product = cpow(tau, -s) * cpow(1 - x_arg * tau, -s) * cpow(1 - y_arg * tau, -s)
        return principal / product

    rho = _alignment(ratio)
    if rho is None:
        return None

    return v * rho * appell_f1(alpha, s, s, gamma_, x_arg, y_arg, ctl) / alpha


def curve_general(v: float, wave: TravelingWaveParams, epsilon: float, n: int,
                  ctl: SeriesControl = DEFAULT_CONTROL, method: str = "auto") -> complex:
    """(x - ct)(v) for m < 1 through the Appell F1 closed form.

    ``method`` is ``auto`` (closed form, quadrature when the closed form does
    not apply), ``closed`` or ``quadrature``.
    """
    check_epsilon(epsilon)
    if wave.m >= 1.0:
        raise PoleError("curve_general needs m < 1; use curve_m1")

    v = float(v)
    if v == 0:
        return 0j

    integral = None
    if method in ("auto", "closed") and not _crosses_root(v, wave):
        try:
            integral = _general_closed_form(v, wave, epsilon, ctl)
        except ConvergenceError as exc:
            if method == "closed":
                raise
            logger.debug(f"F1 closed form unavailable at v={v}: {exc}")

    if integral is None:
        if method == "closed":
            raise ConvergenceError(f"F1 closed form does not apply at v={v}")
        integral = separated_integral(v, wave, epsilon)

    return _xct_prefactor(epsilon, n) * integral


M0_WAVE = TravelingWaveParams(1.0 / math.sqrt(2.0), 0.0)


def curve_m0(v: float, epsilon: float, n: int, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """(x - 4t)(v) for m = 0, k = 1/sqrt2, through the incomplete beta function."""
    check_epsilon(epsilon)
    v = float(v)
    if v == 0:
        return 0j

    if epsilon == 1:
        root = np.sqrt(complex(v))
        return branch_phase_xt(epsilon, n) * math.sqrt(2.0) * complex(np.arctan(root))

    s = 1.0 / (1.0 + epsilon)
    a = epsilon / (epsilon + 1.0)
    b = (epsilon - 1.0) / (epsilon + 1.0)
    z = -v

    integral = None
    if not _crosses_root(v, M0_WAVE):
        def ratio(tau: float) -> complex:
            zt = z * tau
            return -cpow(M0_WAVE.cubic(-zt), -s) / (cpow(zt, a - 1) * cpow(1 - zt, b - 1))

        rho = _alignment(ratio)
        if rho is not None:
            try:
                integral = rho * incomplete_beta(z, a, b, ctl)
            except ConvergenceError as exc:
                logger.debug(f"incomplete beta unavailable at z={z}: {exc}")

    if integral is None:
        integral = separated_integral(v, M0_WAVE, epsilon)

    return _xct_prefactor(epsilon, n) * integral


def m1_prefactor_exponent(epsilon: float, prefactor: str) -> float:
    """Exponent of 2k^2 in the m = 1 curve: displayed (1+eps)/(2-eps) or derived (eps-2)/(eps+1)."""
    if prefactor == "displayed":
        if epsilon == 2:
            raise PoleError("the displayed m = 1 prefactor exponent (1+eps)/(2-eps) has a pole at epsilon = 2")
        return (1.0 + epsilon) / (2.0 - epsilon)
    if prefactor == "derived":
        return (epsilon - 2.0) / (epsilon + 1.0)
    raise DomainError(f"unknown m = 1 prefactor convention: {prefactor}")


def curve_m1(v: float, wave: TravelingWaveParams, epsilon: float, n: int,
             ctl: SeriesControl = DEFAULT_CONTROL, prefactor: str = "displayed") -> complex:
    """(x - ct)(v) for m = 1 through the incomplete beta function.

    At eps = 1 the primitive from v = 0 diverges; the elementary form
    (1/k) artanh(sqrt(1 + v/2k^2)) is anchored at the crest v = -2k^2.
    """
    check_epsilon(epsilon)
    exponent = m1_prefactor_exponent(epsilon, prefactor)
    wave = TravelingWaveParams(wave.k, 1.0) if wave.m != 1.0 else wave
    two_k2 = 2.0 * wave.k ** 2
    v = float(v)

    if epsilon == 1:
        root = np.sqrt(1.0 + complex(v) / two_k2)
        return branch_phase_xt(epsilon, n) * complex(np.arctanh(root)) / wave.k

    if epsilon < 1:
        raise ConvergenceError(f"the m = 1 primitive from v = 0 diverges for epsilon = {epsilon} <= 1")
    if v == 0:
        return 0j

    s = 1.0 / (1.0 + epsilon)
    a = (epsilon - 1.0) / (epsilon + 1.0)
    b = epsilon / (epsilon + 1.0)
    z = -v / two_k2

    integral = None
    if not _crosses_root(v, wave):
        def ratio(tau: float) -> complex:
            zt = z * tau
            return -two_k2 * cpow(wave.cubic(-two_k2 * zt), -s) / (cpow(zt, a - 1) * cpow(1 - zt, b - 1))

        rho = _alignment(ratio)
        if rho is not None:
            try:
                integral = rho * incomplete_beta(z, a, b, ctl)
            except ConvergenceError as exc:
                logger.debug(f"incomplete beta unavailable at z={z}: {exc}")

    if integral is None:
        integral = separated_integral(v, wave, epsilon)

    value = _xct_prefactor(epsilon, n) * integral
    if prefactor == "displayed":
        derived = m1_prefactor_exponent(epsilon, "derived")
        value *= cpow(two_k2, exponent) / cpow(two_k2, derived)
    return value


# ---------------------------------------------------------------------------
# Exact eps = 1 solutions
# ---------------------------------------------------------------------------

def exact_solution(kind: SolutionKind, x, t: float, wave: TravelingWaveParams):
    """Closed-form eps = 1 solutions: cnoidal, tan^2 and sech^2 waves."""
    kind = SolutionKind(kind)
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)

    if kind is SolutionKind.TAN2:
        theta = (x - 4.0 * t) / math.sqrt(2.0)
        cos = np.cos(theta)
        if np.any(np.abs(cos) < 1e-12):
            raise PoleError("tan^2 solution evaluated at a pole")
        result = np.tan(theta).astype(complex) ** 2
    else:
        phase = wave.k * x - wave.omega * t
        if kind is SolutionKind.SECH2:
            result = -2.0 * wave.k ** 2 / np.cosh(phase) ** 2
        else:
            if np.any(np.abs(np.imag(phase)) > 1e-12 * (1.0 + np.abs(phase))):
                raise DomainError("cnoidal solution needs a real phase k x - omega t")
            result = -2.0 * wave.k ** 2 * jacobi_dn(np.real(phase), wave.m) ** 2

    result = np.asarray(result, dtype=complex)
    return complex(result) if scalar else result


def cnoidal_period(wave: TravelingWaveParams) -> Tuple[float, float]:
    """Spatial period 2K(m)/k and temporal period L/c of the cnoidal wave."""
    if abs(wave.k.imag) > 0 or wave.k.real <= 0:
        raise DomainError("cnoidal periods need a real positive k")
    k = wave.k.real
    length = 2.0 * elliptic_k(wave.m) / k
    return length, length / wave.c.real


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

def scan_real_branches(c: Curve, tol_abs: Optional[float] = None, tol_rel: Optional[float] = None,
                       reference: Optional[float] = None) -> List[Interval]:
    """Maximal v-intervals where |Im xct| <= tol_abs + tol_rel |Re xct|.

    ``reference`` measures the imaginary part relative to the sample nearest
    that v, for curves whose real stretch sits at a constant imaginary offset.
    """
    tol_abs = settings.real_tol_abs if tol_abs is None else tol_abs
    tol_rel = settings.real_tol_rel if tol_rel is None else tol_rel

    xct = c.xct
    if reference is not None:
        xct = xct - xct[int(np.argmin(np.abs(c.v - reference)))]

    finite = np.isfinite(xct)
    mask = finite & (np.abs(np.imag(xct)) <= tol_abs + tol_rel * np.abs(np.real(xct)))

    intervals: List[Interval] = []
    start = None
    for i, real in enumerate(mask):
        if real and start is None:
            start = i
        elif not real and start is not None:
            intervals.append((float(c.v[start]), float(c.v[i - 1])))
            start = None
    if start is not None:
        intervals.append((float(c.v[start]), float(c.v[-1])))
    return intervals


def real_coverage(intervals: Sequence[Interval], target: Interval) -> float:
    """Fraction of the target range covered by the union of the intervals."""
    lo, hi = min(target), max(target)
    if hi <= lo:
        return 1.0 if any(a <= lo <= b for a, b in intervals) else 0.0

    covered = 0.0
    cursor = lo
    for a, b in sorted(intervals):
        a, b = max(a, cursor), min(b, hi)
        if b > a:
            covered += b - a
            cursor = b
    return covered / (hi - lo)


@dataclass(frozen=True)
class OdeResidual:
    residual: float
    checked: int
    excluded: int


def ode_residual_details(c: Curve, wave: TravelingWaveParams) -> OdeResidual:
    """Fourth-order centred d(xct)/dv against 1/v_x on the reciprocal branch.

    Samples near real roots of P, or with non-finite values, are excluded.
    """
    if c.v.size < 5:
        raise DomainError(f"ode residual needs at least 5 samples, got {c.v.size}")

    spacing = np.diff(c.v)
    h = float(spacing[0])
    if np.max(np.abs(spacing - h)) > 1e-9 * abs(h):
        raise DomainError("ode residual needs uniformly spaced samples")

    n_ode = ode_branch_for_curve(c.branch_n)
    roots = [r for r, _ in wave.real_roots()]
    xct = c.xct

    residual = 0.0
    checked = excluded = 0
    for j in range(2, c.v.size - 2):
        v = c.v[j]
        window = xct[j - 2:j + 3]
        near_root = any(abs(v - r) <= _EXCLUSION_SPACINGS * h for r in roots)
        if near_root or not np.all(np.isfinite(window)) or abs(wave.cubic(v)) < 1e-8:
            excluded += 1
            continue

        derivative = (-window[4] + 8.0 * window[3] - 8.0 * window[1] + window[0]) / (12.0 * h)
        expected = 1.0 / ode_rhs_vx(v, wave, c.epsilon, n_ode)
        residual = max(residual, abs(derivative - expected) / abs(expected))
        checked += 1

    if excluded:
        logger.debug(f"ode residual: {excluded} samples near roots excluded, {checked} checked")
    return OdeResidual(float(residual), checked, excluded)


def ode_residual(c: Curve, wave: TravelingWaveParams) -> float:
    """Max relative deviation of the curve's slope from the branch ODE."""
    return ode_residual_details(c, wave).residual


def select_form(wave: TravelingWaveParams) -> str:
    if wave.m == 1.0:
        return "m1"
    if wave.m == 0.0 and abs(2.0 * wave.k ** 2 - 1.0) < 1e-14:
        return "m0"
    return "general"


@log_performance("build_curve", slow_seconds=60.0)
def build_curve(wave: TravelingWaveParams, epsilon: float, n: int, v_range: Interval,
                samples: Optional[int] = None, form: str = "auto", prefactor: str = "derived",
                ctl: SeriesControl = DEFAULT_CONTROL) -> Curve:
    """Sample (x - ct)(v) on a uniform v-grid and classify its real stretches.

    Samples that fail to converge are stored as NaN and counted in ``failed``.
    """
    check_epsilon(epsilon)
    samples = samples or settings.curve_samples
    if samples < 2:
        raise DomainError(f"a curve needs at least 2 samples, got {samples}")
    lo, hi = float(v_range[0]), float(v_range[1])
    if not hi > lo:
        raise DomainError(f"empty v-range [{lo}, {hi}]")

    form = select_form(wave) if form == "auto" else form
    if form == "m0":
        evaluate = partial(curve_m0, epsilon=epsilon, n=n, ctl=ctl)
    elif form == "m1":
        evaluate = partial(curve_m1, wave=wave, epsilon=epsilon, n=n, ctl=ctl, prefactor=prefactor)
    elif form == "general":
        evaluate = partial(curve_general, wave=wave, epsilon=epsilon, n=n, ctl=ctl)
    else:
        raise DomainError(f"unknown curve form: {form}")

    v = np.linspace(lo, hi, samples)
    xct = np.empty(samples, dtype=complex)
    failed = 0
    for i, vi in enumerate(v):
        try:
            xct[i] = evaluate(vi)
        except (ConvergenceError, PoleError) as exc:
            xct[i] = complex(np.nan, np.nan)
            failed += 1
            logger.debug(f"curve sample v={vi} failed: {exc}")

    if failed:
        logger.warning(f"{failed} of {samples} samples failed for eps={epsilon}, n={n}, k={wave.k}, m={wave.m}")

    curve = Curve(epsilon, n, wave, v, xct, form=form, prefactor=prefactor if form == "m1" else "derived",
                  failed=failed)
    return curve.with_intervals(scan_real_branches(curve))


# ---------------------------------------------------------------------------
# Tail of the m = 0 curves
# ---------------------------------------------------------------------------

def tail_limit(epsilon: float, n: int) -> complex:
    """Limiting value of the m = 0 curve at the double root."""
    if epsilon == 1:
        raise ConvergenceError("the tail limit diverges at epsilon = 1")
    if epsilon < 1:
        raise DomainError(f"tail limit defined for epsilon > 1, got {epsilon}")

    a = epsilon / (epsilon + 1.0)
    b = (epsilon - 1.0) / (epsilon + 1.0)
    return _xct_prefactor(epsilon, n) * gamma(a) * gamma(b) * rgamma(a + b)


def oriented_tail_limit(epsilon: float, n: int) -> complex:
    """Value approached by curve_m0 as v -> -1 from above."""
    s = 1.0 / (1.0 + epsilon)
    return -cmath.exp(-1j * math.pi * s) * tail_limit(epsilon, n)


def extrapolate(f1: complex, f2: complex, h1: float, h2: float, order: float) -> complex:
    """Richardson extrapolation for f(h) = L + C h^order."""
    w1, w2 = h1 ** order, h2 ** order
    return (f2 * w1 - f1 * w2) / (w1 - w2)


def tail_probe(epsilon: float, n: int, ctl: SeriesControl = DEFAULT_CONTROL,
               steps: Tuple[float, float] = (1e-4, 1e-5)) -> dict:
    """Compare tail_limit with curve_m0 extrapolated towards v = -1 and v = 1."""
    limit = tail_limit(epsilon, n)
    order = (epsilon - 1.0) / (epsilon + 1.0)
    h1, h2 = steps

    minus = extrapolate(curve_m0(-1.0 + h1, epsilon, n, ctl), curve_m0(-1.0 + h2, epsilon, n, ctl),
                        h1, h2, order)
    plus = extrapolate(curve_m0(1.0 - h1, epsilon, n, ctl), curve_m0(1.0 - h2, epsilon, n, ctl),
                       h1, h2, 1.0)
    oriented = oriented_tail_limit(epsilon, n)

    minus_error = abs(minus - oriented) / (1.0 + abs(oriented))
    plus_error = abs(plus - limit) / (1.0 + abs(limit))
    return {
        'epsilon': epsilon,
        'branch_n': n,
        'tail_limit': limit,
        'probe_minus': minus,
        'probe_plus': plus,
        'minus_error': float(minus_error),
        'plus_error': float(plus_error),
        'matching_side': 'minus' if minus_error <= plus_error else 'plus',
    }


def exact_field(kind: SolutionKind, wave: TravelingWaveParams, count: int,
                length: Optional[float] = None, t: float = 0.0) -> Field:
    """Exact solution sampled on a periodic grid.

    The cnoidal wave defaults to one spatial period; the soliton needs an
    explicit domain long enough for its tails to vanish and is centred in it.
    """
    kind = SolutionKind(kind)
    if kind is SolutionKind.TAN2:
        raise PoleError("the tan^2 solution has poles on every period and cannot be sampled on a grid")
    if length is None:
        if kind is not SolutionKind.CNOIDAL:
            raise DomainError("the soliton field needs an explicit domain length")
        length = cnoidal_period(wave)[0]
    x = grid(length, count)
    if kind is SolutionKind.SECH2:
        x = x - 0.5 * length
    return Field(exact_solution(kind, x, t, wave), length)
