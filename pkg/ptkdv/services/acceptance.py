# ptkdv/services/acceptance.py
"""
Acceptance checks run by the verify command, with a JUnit-style report.
"""

import math
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from loguru import logger

from ..core.config import get_figure_preset, list_figure_presets
from ..core.errors import PtkdvError
from ..utils.helpers import atomic_write_text, parse_complex
from . import charges, evolve, model, specfun, waves

SEED = 20240611


@dataclass
class CheckOptions:
    """Knobs shared by all checks."""
    curve_samples: int = 401
    flip_flux3: bool = False


@dataclass
class CheckResult:
    name: str
    group: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    metrics: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None


@dataclass(frozen=True)
class AcceptanceCheck:
    name: str
    group: str
    func: Callable[[CheckOptions], CheckResult]


_REGISTRY: List[AcceptanceCheck] = []


def acceptance_check(group: str, name: str):
    """Register a check; the function returns (passed, detail, metrics)."""

    def decorator(func):
        def run(options: CheckOptions) -> CheckResult:
            passed, detail, metrics = func(options)
            return CheckResult(name, group, bool(passed), detail, metrics=metrics)

        _REGISTRY.append(AcceptanceCheck(name, group, run))
        return func

    return decorator


def registered_checks() -> List[AcceptanceCheck]:
    return list(_REGISTRY)


# ---------------------------------------------------------------------------
# specfun
# ---------------------------------------------------------------------------

@acceptance_check("specfun", "f1_reduces_to_2f1")
def _f1_reduction(options):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(0.2, 1.5)
        b = rng.uniform(0.1, 1.5)
        c = a + rng.uniform(0.2, 1.5)
        x = rng.uniform(-0.8, 0.8)
        expected = specfun.gauss_2f1(a, b, c, x)
        value = specfun.appell_f1(a, b / 2, b / 2, c, x, x)
        worst = max(worst, abs(value - expected) / (1.0 + abs(expected)))
    return worst < 1e-10, f"max relative deviation {worst:.2e}", {'max_rel': worst}


@acceptance_check("specfun", "beta_2f1_identity")
def _beta_identity(options):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(100):
        alpha = rng.uniform(0.1, 0.9)
        beta = 1.0 - alpha
        x = rng.uniform(0.01, 0.9)
        lhs = specfun.gauss_2f1(alpha, 2 * beta, 2 * alpha + beta, x)
        rhs = alpha * x ** (-alpha) * specfun.incomplete_beta(x, alpha, 1 - 2 * beta)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst < 1e-10, f"max relative deviation {worst:.2e}", {'max_rel': worst}


@acceptance_check("specfun", "b1_closure")
def _b1_closure(options):
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(100):
        a, b = rng.uniform(0.1, 3.0, size=2)
        lhs = specfun.incomplete_beta(1.0, a, b) * specfun.gamma(a + b)
        rhs = specfun.gamma(a) * specfun.gamma(b)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst < 1e-10, f"max relative deviation {worst:.2e}", {'max_rel': worst}


@acceptance_check("specfun", "dn_identity")
def _dn_identity(options):
    u = np.linspace(-5.0, 5.0, 201)
    worst = 0.0
    for m in (0.0, 0.1, 0.5, 0.9, 0.99, 1.0):
        sn, cn, dn = specfun.jacobi_sncndn(u, m)
        worst = max(worst, float(np.max(np.abs(1 - dn ** 2 - m * (1 - cn ** 2)))))
    return worst < 1e-12, f"max deviation {worst:.2e}", {'max_abs': worst}


@acceptance_check("specfun", "f1_series_vs_quadrature")
def _f1_agreement(options):
    cases = [
        (0.75, 0.25, 0.25, 1.75, -0.6, 0.7),
        (0.5, 0.5, 0.3, 1.5, 0.55, -0.9),
        (0.8, 1.2, 0.4, 2.1, 0.9, 0.2),
        (0.6, 0.3, 0.3, 1.6, -0.94, -0.5),
    ]
    worst = 0.0
    for alpha, beta, beta_p, gamma_, x, y in cases:
        series = specfun.appell_f1(alpha, beta, beta_p, gamma_, x, y, method="series")
        quadrature = specfun.appell_f1(alpha, beta, beta_p, gamma_, x, y, method="quadrature")
        worst = max(worst, abs(series - quadrature) / abs(series))
    return worst < 1e-8, f"max relative deviation {worst:.2e}", {'max_rel': worst}


@acceptance_check("specfun", "eps1_branch_signs")
def _eps1_signs(options):
    phases = [specfun.branch_phase_vx(1.0, n) for n in range(8)]
    expected = [(-1.0) ** (n + 1) for n in range(8)]
    passed = all(p == e for p, e in zip(phases, expected))
    return passed, f"phases {phases}", {}


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@acceptance_check("model", "eps1_recovers_kdv")
def _eps1_kdv(options):
    rng = np.random.default_rng(SEED + 3)
    params = model.DeformationParams(1.0, variant=model.Variant.UNSCALED)
    worst = 0.0
    for _ in range(20):
        f = model.random_smooth_field(2 * math.pi, 128, modes=8, rng=rng)
        ux = model.spectral_derivative(f, 1).values
        uxxx = model.spectral_derivative(f, 3).values
        kdv = -f.values * ux - uxxx
        worst = max(worst, float(np.max(np.abs(model.eom_rhs(f, params).values - kdv))))
    return worst < 1e-10, f"max deviation {worst:.2e}", {'max_abs': worst}


@acceptance_check("model", "variational_consistency")
def _variational(options):
    rng = np.random.default_rng(SEED + 4)
    eps1 = model.variational_check(model.random_smooth_field(2 * math.pi, 64, rng=rng),
                                   model.DeformationParams(1.0))
    field3 = model.Field.from_function(lambda x: 2.0 + np.sin(x), 2 * math.pi, 64)
    eps3 = model.variational_check(field3, model.DeformationParams(3.0))
    passed = eps1 < 1e-8 and eps3 < 1e-6
    return passed, f"eps=1: {eps1:.2e}, eps=3: {eps3:.2e}", {'eps1': eps1, 'eps3': eps3}


@acceptance_check("model", "pt_energy_reality")
def _pt_reality(options):
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for eps in (1.0, 2.0, 3.0):
        params = model.DeformationParams(eps)
        for _ in range(50):
            f = model.random_pt_field(2 * math.pi, 64, rng=rng)
            energy = model.energy(f, params)
            worst = max(worst, abs(energy.imag) / (1.0 + abs(energy)))
    return worst < 1e-10, f"max Im(E)/(1+|E|) {worst:.2e}", {'max_rel_imag': worst}


@acceptance_check("model", "galilean_covariance")
def _galilean(options):
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for eps in (1.0, 3.0):
        params = model.DeformationParams(eps, variant=model.Variant.UNSCALED)
        f = model.random_smooth_field(2 * math.pi, 64, rng=rng)
        if eps == 3.0:
            f = f.with_values(f.values + 2.0)
        c, t = 0.7, 0.9
        boosted = model.eom_rhs(model.galilean_transform(f, c, t), params).values
        transported = model.galilean_transform(model.eom_rhs(f, params), 1.0, c * t).values - 1.0
        advective = model.galilean_transform(model.spectral_derivative(f, 1), 1.0, c * t).values - 1.0
        worst = max(worst, float(np.max(np.abs(boosted - (transported - c * advective)))))
    return worst < 1e-8, f"max deviation {worst:.2e}", {'max_abs': worst}


# ---------------------------------------------------------------------------
# charges and evolution
# ---------------------------------------------------------------------------

def _cnoidal_run(dt: float, t_final: float, count: int = 64, stride: int = 1) -> evolve.Trajectory:
    wave = waves.TravelingWaveParams(parse_complex("1/sqrt2"), 0.9)
    f0 = waves.exact_field(waves.SolutionKind.CNOIDAL, wave, count)
    cfg = evolve.EvolveConfig(count, f0.length, dt, t_final, snapshot_stride=stride)
    return evolve.evolve(f0, cfg, model.DeformationParams(1.0))


def _eps3_run(dt: float, t_final: float, stride: int = 1) -> evolve.Trajectory:
    f0 = model.Field.from_function(lambda x: 2.0 + 0.1 * np.sin(x), 2 * math.pi, 64)
    cfg = evolve.EvolveConfig(64, 2 * math.pi, dt, t_final, snapshot_stride=stride)
    return evolve.evolve(f0, cfg, model.DeformationParams(3.0))


@acceptance_check("charges", "flux_consistency")
def _flux_consistency(options):
    metrics = {}
    passed = True
    runs = {
        'eps1': (_cnoidal_run, model.DeformationParams(1.0), 2e-4, 1e-5),
        'eps3': (_eps3_run, model.DeformationParams(3.0), 1e-4, 1e-5),
    }
    for label, (runner, params, dt, bound) in runs.items():
        coarse = runner(dt, 20 * dt)
        fine = runner(dt / 2, 20 * dt)
        for n in charges.CHARGE_INDICES:
            flip = options.flip_flux3 and n == 3
            r_coarse = charges.conservation_residual(n, coarse, params, sign_flip=flip)
            r_fine = charges.conservation_residual(n, fine, params, sign_flip=flip)
            ratio = r_coarse / r_fine if r_fine > 0 else math.inf
            metrics[f"{label}_n{n}"] = r_fine
            metrics[f"{label}_n{n}_ratio"] = ratio
            # at the round-off floor the ratio carries no information
            converging = r_coarse < 1e-10 or 2.5 < ratio < 6.5
            passed = passed and r_fine < bound and converging
    detail = ", ".join(f"{k}={v:.2e}" for k, v in metrics.items())
    return passed, detail, metrics


@acceptance_check("charges", "cnoidal_charge_drift")
def _cnoidal_drift(options):
    wave = waves.TravelingWaveParams(parse_complex("1/sqrt2"), 0.9)
    _, period = waves.cnoidal_period(wave)
    dt = period / 13240
    traj = _cnoidal_run(dt, period, stride=1324)
    drifts = {f"I{r.charge_index}": r.drift for r in traj.charge_reports}
    shift_error = float(np.max(np.abs(traj.final.field.values - traj.snapshots[0].field.values)))
    passed = (not traj.aborted and len(drifts) == 3 and all(d < 1e-8 for d in drifts.values())
              and shift_error < 1e-5)
    metrics = dict(drifts, period_shift_error=shift_error)
    return passed, ", ".join(f"{k}={v:.2e}" for k, v in metrics.items()), metrics


@acceptance_check("charges", "eps3_charge_drift")
def _eps3_drift(options):
    traj = _eps3_run(1e-3, 0.1, stride=10)
    drifts = {f"I{r.charge_index}": r.drift for r in traj.charge_reports}
    passed = not traj.aborted and len(drifts) == 3 and all(d < 1e-6 for d in drifts.values())
    return passed, ", ".join(f"{k}={v:.2e}" for k, v in drifts.items()), drifts


@acceptance_check("evolve", "spectral_accuracy")
def _spectral(options):
    count = 64
    worst = 0.0
    for j in range(-count // 3 + 1, count // 3):
        f = model.Field.from_function(lambda x: np.exp(1j * j * x), 2 * math.pi, count)
        derivative = model.spectral_derivative(f, 1).values
        worst = max(worst, float(np.max(np.abs(derivative - 1j * j * f.values))) / max(abs(j), 1))
    return worst < 1e-12, f"max relative deviation {worst:.2e}", {'max_rel': worst}


@acceptance_check("evolve", "rk4_order")
def _rk4_order(options):
    t_final = 0.4
    steps = (2e-3, 1e-3, 5e-4)
    reference = _cnoidal_run(steps[-1] / 8, t_final, count=32, stride=10 ** 9)
    ref_values = reference.last_good.field.values
    errors = []
    for dt in steps:
        run = _cnoidal_run(dt, t_final, count=32, stride=10 ** 9)
        errors.append(float(np.max(np.abs(run.last_good.field.values - ref_values))))
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    passed = all(8.0 < r < 32.0 for r in ratios)
    metrics = {f"error_{dt:g}": e for dt, e in zip(steps, errors)}
    metrics.update({f"ratio_{i}": r for i, r in enumerate(ratios)})
    return passed, ", ".join(f"{k}={v:.3g}" for k, v in metrics.items()), metrics


@acceptance_check("evolve", "galilean_shadowing")
def _shadowing(options):
    metrics = {}
    passed = True
    c, t_final = 0.5, 0.02
    for eps, offset in ((1.0, 0.0), (3.0, 2.0)):
        params = model.DeformationParams(eps, variant=model.Variant.UNSCALED)
        f0 = model.Field.from_function(lambda x: offset + 0.3 * np.sin(x) + 0.1 * np.cos(2 * x), 2 * math.pi, 64)
        cfg = evolve.EvolveConfig(64, 2 * math.pi, t_final, t_final, snapshot_stride=10 ** 9)
        cfg = cfg.with_stable_dt(f0, params)

        plain = evolve.evolve(f0, cfg, params).last_good.field
        single_error = evolve.resolution_error(f0, cfg, params)
        boosted = evolve.evolve(model.galilean_transform(f0, c, 0.0), cfg, params).last_good.field
        expected = model.galilean_transform(plain, c, t_final)
        deviation = float(np.max(np.abs(boosted.values - expected.values)))
        metrics[f"eps{eps:g}_deviation"] = deviation
        metrics[f"eps{eps:g}_single_error"] = single_error
        metrics[f"eps{eps:g}_dt"] = cfg.dt
        passed = passed and deviation <= 10.0 * single_error + 1e-10
    return passed, ", ".join(f"{k}={v:.2e}" for k, v in metrics.items()), metrics


@acceptance_check("evolve", "pt_orbit_energy")
def _pt_orbit(options):
    rng = np.random.default_rng(SEED + 7)
    f0 = model.random_pt_field(2 * math.pi, 64, modes=3, rng=rng, scale=0.2)
    params = model.DeformationParams(1.0)
    cfg = evolve.EvolveConfig(64, 2 * math.pi, 2e-4, 0.02, snapshot_stride=10)
    traj = evolve.evolve(f0, cfg, params)
    worst = max(abs(e.imag) / (1.0 + abs(e)) for e in (model.energy(s.field, params) for s in traj.snapshots))
    return worst < 1e-8, f"max Im(E)/(1+|E|) {worst:.2e}", {'max_rel_imag': worst}


# ---------------------------------------------------------------------------
# waves
# ---------------------------------------------------------------------------

@acceptance_check("waves", "cnoidal_inversion")
def _cnoidal_inversion(options):
    wave_k = parse_complex("1/sqrt2")
    worst = 0.0
    for m in (0.5, 0.9):
        wave = waves.TravelingWaveParams(wave_k, m)
        anchor = waves.curve_general(-1.0, wave, 1.0, 1)
        quarter = specfun.elliptic_k(m)
        for s in np.linspace(0.05, quarter - 0.05, 12):
            v = -specfun.jacobi_dn(s, m) ** 2
            difference = waves.curve_general(v, wave, 1.0, 1) - anchor
            worst = max(worst, abs(abs(difference) - math.sqrt(2.0) * s), abs(difference.imag))
    return worst < 1e-6, f"max deviation {worst:.2e}", {'max_abs': worst}


def _fd_residual_tan2(x: float, t: float) -> float:
    wave = waves.TravelingWaveParams(parse_complex("1/sqrt2"), 0.0)
    h, tau = 2e-3, 1e-4

    def u(xx, tt):
        return waves.exact_solution(waves.SolutionKind.TAN2, xx, tt, wave)

    ux = (u(x - 2 * h, t) - 8 * u(x - h, t) + 8 * u(x + h, t) - u(x + 2 * h, t)) / (12 * h)
    uxxx = (u(x - 3 * h, t) - 8 * u(x - 2 * h, t) + 13 * u(x - h, t)
            - 13 * u(x + h, t) + 8 * u(x + 2 * h, t) - u(x + 3 * h, t)) / (8 * h ** 3)
    ut = (u(x, t - 2 * tau) - 8 * u(x, t - tau) + 8 * u(x, t + tau) - u(x, t + 2 * tau)) / (12 * tau)
    return abs(ut - (6 * u(x, t) * ux - uxxx))


@acceptance_check("waves", "m0_closed_form")
def _m0_closed_form(options):
    worst_curve = 0.0
    for v in np.linspace(0.0, 10.0, 41):
        expected = math.sqrt(2.0) * math.atan(math.sqrt(v))
        general = waves.curve_general(v, waves.M0_WAVE, 1.0, 0)
        worst_curve = max(worst_curve, abs(waves.curve_m0(v, 1.0, 0) - expected), abs(general - expected))
    worst_eom = max(_fd_residual_tan2(x, 0.1) for x in np.linspace(-0.8, 0.8, 9))
    passed = worst_curve < 1e-8 and worst_eom < 1e-6
    return passed, f"curve {worst_curve:.2e}, tan^2 residual {worst_eom:.2e}", {
        'curve': worst_curve, 'eom': worst_eom}


@acceptance_check("waves", "m1_closed_form")
def _m1_closed_form(options):
    wave = waves.TravelingWaveParams(parse_complex("1/sqrt2"), 1.0)
    f = waves.exact_field(waves.SolutionKind.SECH2, wave, 256, length=40.0)
    ux = model.spectral_derivative(f, 1).values
    rhs = model.eom_rhs(f, model.DeformationParams(1.0)).values
    worst_eom = float(np.max(np.abs(-wave.c * ux - rhs)))

    worst_curve = 0.0
    for s in np.linspace(0.1, 6.0, 25):
        v = -1.0 / math.cosh(s / math.sqrt(2.0)) ** 2
        worst_curve = max(worst_curve, abs(abs(waves.curve_m1(v, wave, 1.0, 0)) - s))
    passed = worst_eom < 1e-6 and worst_curve < 1e-6
    return passed, f"sech^2 residual {worst_eom:.2e}, curve {worst_curve:.2e}", {
        'eom': worst_eom, 'curve': worst_curve}


def preset_curves(name: str, samples: int) -> List[tuple]:
    """(branch set, curve) pairs of one figure preset."""
    result = []
    for branch_set in get_figure_preset(name):
        wave = waves.TravelingWaveParams(parse_complex(branch_set.k), branch_set.m)
        for n in branch_set.branches:
            curve = waves.build_curve(wave, branch_set.epsilon, n, branch_set.v_range, samples)
            result.append((branch_set, curve))
    return result


@acceptance_check("waves", "figure_presets")
def _figure_presets(options):
    metrics = {}
    passed = True
    for name in list_figure_presets():
        for branch_set, curve in preset_curves(name, options.curve_samples):
            label = f"{name}_eps{branch_set.epsilon:g}_n{curve.branch_n}_k{branch_set.k}"
            coverage = waves.real_coverage(curve.real_intervals, branch_set.real_range)
            residual = waves.ode_residual(curve, curve.wave)
            metrics[f"{label}_coverage"] = coverage
            metrics[f"{label}_ode"] = residual
            ok = coverage >= 0.9 and residual < 1e-5 and curve.failed == 0
            if not ok:
                logger.warning(f"{label}: coverage {coverage:.3f}, ode residual {residual:.2e}, "
                               f"failed {curve.failed}")
            passed = passed and ok
    worst = min(v for k, v in metrics.items() if k.endswith("coverage"))
    return passed, f"{len(metrics) // 2} curves, lowest coverage {worst:.3f}", metrics


@acceptance_check("waves", "tail_limit")
def _tail(options):
    metrics = {}
    passed = True
    for eps, n in ((3.0, 2), (11.0, 4)):
        probe = waves.tail_probe(eps, n)
        metrics[f"eps{eps:g}_minus_error"] = probe['minus_error']
        metrics[f"eps{eps:g}_plus_error"] = probe['plus_error']
        passed = passed and probe['minus_error'] < 1e-4
    return passed, ", ".join(f"{k}={v:.2e}" for k, v in metrics.items()), metrics


@acceptance_check("waves", "branch_periodicity")
def _branch_periodicity(options):
    worst = 0.0
    for eps, n in ((3.0, 2), (5.0, 1), (11.0, 4)):
        period = int(eps + 1)
        worst = max(worst, abs(waves.curve_m0(0.5, eps, n) - waves.curve_m0(0.5, eps, n + period)))
        for phase in (specfun.branch_phase_xt(eps, n), specfun.branch_phase_vx(eps, n)):
            worst = max(worst, abs(abs(phase) - 1.0))
    return worst < 1e-12, f"max deviation {worst:.2e}", {'max_abs': worst}


# ---------------------------------------------------------------------------
# Runner and report
# ---------------------------------------------------------------------------

def run_checks(filter_text: Optional[str] = None, options: Optional[CheckOptions] = None) -> List[CheckResult]:
    """Run every check whose group or name contains ``filter_text``."""
    options = options or CheckOptions()
    selected = [c for c in _REGISTRY
                if not filter_text or filter_text in c.group or filter_text in c.name]
    logger.info(f"Running {len(selected)} acceptance checks")

    results = []
    for check in selected:
        start = time.perf_counter()
        try:
            result = check.func(options)
        except (PtkdvError, ArithmeticError, ValueError) as exc:
            result = CheckResult(check.name, check.group, False, error=f"{type(exc).__name__}: {exc}")
        result.seconds = time.perf_counter() - start

        status = "PASS" if result.passed else "FAIL"
        logger.info(f"[{status}] {check.group}.{check.name} ({result.seconds:.2f}s) {result.detail or result.error}")
        results.append(result)
    return results


def junit_xml(results: List[CheckResult], suite_name: str = "ptkdv.verify") -> str:
    suite = ET.Element("testsuite", {
        'name': suite_name,
        'tests': str(len(results)),
        'failures': str(sum(1 for r in results if not r.passed and r.error is None)),
        'errors': str(sum(1 for r in results if r.error is not None)),
        'time': f"{sum(r.seconds for r in results):.3f}",
    })
    for result in results:
        case = ET.SubElement(suite, "testcase", {
            'classname': f"ptkdv.{result.group}",
            'name': result.name,
            'time': f"{result.seconds:.3f}",
        })
        if result.error is not None:
            ET.SubElement(case, "error", {'message': result.error})
        elif not result.passed:
            ET.SubElement(case, "failure", {'message': result.detail})
        elif result.detail:
            ET.SubElement(case, "system-out").text = result.detail
    return ET.tostring(suite, encoding="unicode")


def write_junit(results: List[CheckResult], path: Path) -> Path:
    return atomic_write_text(path, '<?xml version="1.0" encoding="UTF-8"?>\n' + junit_xml(results) + "\n")
