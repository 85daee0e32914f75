# tests/test_waves.py

import cmath
import math

import numpy as np
import pytest
from scipy import special

from ptkdv.core.config import list_figure_presets
from ptkdv.core.errors import ConvergenceError, DomainError, PoleError
from ptkdv.services import model, specfun, waves
from ptkdv.services.acceptance import preset_curves
from ptkdv.services.model import DeformationParams
from ptkdv.services.waves import Curve, SolutionKind, TravelingWaveParams

SQRT2 = math.sqrt(2.0)


class TestTravelingWaveParams:
    def test_speed_and_constants(self, cnoidal_wave):
        assert cnoidal_wave.c == pytest.approx(2.2)
        assert cnoidal_wave.kappa == pytest.approx(0.1)
        assert cnoidal_wave.omega == pytest.approx(2.2 / SQRT2)

    def test_roots(self, cnoidal_wave):
        roots = sorted((r.real, mult) for r, mult in cnoidal_wave.roots())
        assert [mult for _, mult in roots] == [1, 1, 1]
        np.testing.assert_allclose([r for r, _ in roots], [-1.0, -0.1, 0.0], atol=1e-14)

    def test_double_root_at_m0(self):
        roots = sorted(waves.M0_WAVE.real_roots())
        assert [mult for _, mult in roots] == [2, 1]
        assert roots[0][0] == pytest.approx(-1.0)

    def test_validation(self):
        with pytest.raises(DomainError):
            TravelingWaveParams(0.0, 0.5)
        with pytest.raises(DomainError):
            TravelingWaveParams(1.0, 1.2)

    def test_cubic_vanishes_at_roots(self, cnoidal_wave):
        for root, _ in cnoidal_wave.roots():
            assert cnoidal_wave.cubic(root) == pytest.approx(0.0, abs=1e-14)


class TestBranchOde:
    @pytest.mark.parametrize("eps", [0.0, -1.0])
    def test_singular_epsilon(self, eps):
        with pytest.raises(PoleError):
            waves.curve_m0(0.5, eps, 0)
        with pytest.raises(PoleError):
            waves.ode_rhs_vx(0.5, waves.M0_WAVE, eps, 0)

    def test_separated_integral(self):
        # integral_0^v dt / (sqrt(t) (t + 1)) = 2 arctan(sqrt(v))
        assert waves.separated_integral(1.0, waves.M0_WAVE, 1.0) == pytest.approx(math.pi / 2, rel=1e-10)
        assert waves.separated_integral(0.0, waves.M0_WAVE, 1.0) == 0

    def test_factored_cubic_keeps_the_offset(self, cnoidal_wave):
        root = -2.0 * cnoidal_wave.k.real ** 2 * (1.0 - cnoidal_wave.m)
        assert waves.factored_cubic(root, 0.0, cnoidal_wave) == 0
        assert waves.factored_cubic(root, 1e-300, cnoidal_wave) != 0
        assert waves.factored_cubic(0.3, 0.2, cnoidal_wave) == pytest.approx(cnoidal_wave.cubic(0.5), rel=1e-13)

    def test_integral_ending_on_a_double_root(self):
        at_root = waves.curve_m0(-1.0, 3.0, 2)
        assert cmath.isfinite(at_root)
        assert at_root == pytest.approx(waves.curve_m0(-1.0 + 1e-10, 3.0, 2), abs=1e-4)

    @pytest.mark.parametrize("m", [0.5, 0.9])
    def test_integral_next_to_a_simple_root(self, m):
        wave = TravelingWaveParams(1.0 / SQRT2, m)
        root = -(1.0 - m)
        for v in (root, root - 5e-4, root + 5e-4):
            assert cmath.isfinite(waves.curve_general(v, wave, 3.0, 0))
        assert waves.curve_general(root, wave, 3.0, 0) == pytest.approx(
            waves.curve_general(root - 1e-9, wave, 3.0, 0), abs=1e-5)

    def test_eps1_slope(self):
        # 2 P(v) = 2 v (v + 1)^2 on the m = 0 wave
        assert waves.ode_rhs_vx(1.0, waves.M0_WAVE, 1.0, 1) == pytest.approx(2.0 * SQRT2)

    def test_reciprocal_branch(self):
        assert waves.ode_branch_for_curve(0) == 1
        assert waves.ode_branch_for_curve(3) == -2


class TestClosedForms:
    def test_m0_eps1_is_arctan(self):
        for v in np.linspace(0.0, 10.0, 21):
            expected = SQRT2 * math.atan(math.sqrt(v))
            assert waves.curve_m0(v, 1.0, 0) == pytest.approx(expected, abs=1e-12)

    def test_general_form_at_m0(self):
        for v in (0.25, 1.0, 4.0):
            expected = SQRT2 * math.atan(math.sqrt(v))
            assert waves.curve_general(v, waves.M0_WAVE, 1.0, 0) == pytest.approx(expected, abs=1e-8)

    def test_m0_beta_form_matches_general(self):
        for v in (0.2, 0.5):
            assert waves.curve_m0(v, 3.0, 2) == pytest.approx(waves.curve_general(v, waves.M0_WAVE, 3.0, 2),
                                                              rel=1e-8)

    def test_closed_form_matches_quadrature(self):
        wave = TravelingWaveParams(1.0 / SQRT2, 0.5)
        closed = waves.curve_general(0.5, wave, 3.0, 1, method="closed")
        quadrature = waves.curve_general(0.5, wave, 3.0, 1, method="quadrature")
        assert closed == pytest.approx(quadrature, rel=1e-8)

    def test_closed_form_refuses_root_crossing(self, cnoidal_wave):
        with pytest.raises(ConvergenceError):
            waves.curve_general(-0.5, cnoidal_wave, 3.0, 1, method="closed")

    @pytest.mark.parametrize("m", [0.5, 0.9])
    def test_cnoidal_inversion(self, m):
        wave = TravelingWaveParams(1.0 / SQRT2, m)
        anchor = waves.curve_general(-1.0, wave, 1.0, 1)
        for s in np.linspace(0.1, specfun.elliptic_k(m) - 0.1, 6):
            v = -specfun.jacobi_dn(s, m) ** 2
            difference = waves.curve_general(v, wave, 1.0, 1) - anchor
            assert abs(difference) == pytest.approx(SQRT2 * s, abs=1e-6)
            assert abs(difference.imag) < 1e-6

    def test_m1_eps1_inverts_sech2(self, soliton_wave):
        for s in np.linspace(0.2, 5.0, 9):
            v = -1.0 / math.cosh(s / SQRT2) ** 2
            assert abs(waves.curve_m1(v, soliton_wave, 1.0, 0)) == pytest.approx(s, abs=1e-6)

    def test_general_form_needs_m_below_one(self, soliton_wave):
        with pytest.raises(PoleError):
            waves.curve_general(-0.5, soliton_wave, 3.0, 0)

    def test_m1_diverges_below_eps1(self, soliton_wave):
        with pytest.raises(ConvergenceError):
            waves.curve_m1(-0.5, soliton_wave, 0.5, 0)

    def test_m1_prefactor_exponents(self):
        assert waves.m1_prefactor_exponent(3.0, "derived") == pytest.approx(0.25)
        assert waves.m1_prefactor_exponent(3.0, "displayed") == pytest.approx(-4.0)
        with pytest.raises(PoleError):
            waves.m1_prefactor_exponent(2.0, "displayed")
        with pytest.raises(DomainError):
            waves.m1_prefactor_exponent(3.0, "other")

    def test_prefactors_agree_when_2k2_is_one(self, soliton_wave):
        derived = waves.curve_m1(-0.5, soliton_wave, 3.0, 1, prefactor="derived")
        displayed = waves.curve_m1(-0.5, soliton_wave, 3.0, 1, prefactor="displayed")
        assert displayed == pytest.approx(derived, rel=1e-12)

    @pytest.mark.parametrize("eps,n", [(3.0, 2), (5.0, 1)])
    def test_branch_label_is_periodic(self, eps, n):
        period = int(eps + 1)
        assert waves.curve_m0(0.5, eps, n) == pytest.approx(waves.curve_m0(0.5, eps, n + period), abs=1e-12)


class TestExactSolutions:
    def test_cnoidal_period(self, cnoidal_wave):
        length, period = waves.cnoidal_period(cnoidal_wave)
        assert length == pytest.approx(2.0 * special.ellipk(0.9) * SQRT2, rel=1e-12)
        assert period == pytest.approx(length / 2.2)

    def test_cnoidal_field_is_periodic(self, cnoidal_wave):
        f = waves.exact_field(SolutionKind.CNOIDAL, cnoidal_wave, 64)
        assert f.values[0] == pytest.approx(-1.0)
        assert f.values[32] == pytest.approx(-0.1)

    def test_tan2_pole(self):
        with pytest.raises(PoleError):
            waves.exact_solution(SolutionKind.TAN2, SQRT2 * math.pi / 2, 0.0, waves.M0_WAVE)
        with pytest.raises(PoleError):
            waves.exact_field(SolutionKind.TAN2, waves.M0_WAVE, 32)

    def test_tan2_solves_the_equation(self):
        wave = waves.M0_WAVE
        h, tau, t = 2e-3, 1e-4, 0.1

        def u(x, tt):
            return waves.exact_solution(SolutionKind.TAN2, x, tt, wave)

        for x in (-0.5, 0.0, 0.6):
            ux = (u(x - 2 * h, t) - 8 * u(x - h, t) + 8 * u(x + h, t) - u(x + 2 * h, t)) / (12 * h)
            uxxx = (u(x - 3 * h, t) - 8 * u(x - 2 * h, t) + 13 * u(x - h, t)
                    - 13 * u(x + h, t) + 8 * u(x + 2 * h, t) - u(x + 3 * h, t)) / (8 * h ** 3)
            ut = (u(x, t - 2 * tau) - 8 * u(x, t - tau) + 8 * u(x, t + tau) - u(x, t + 2 * tau)) / (12 * tau)
            assert abs(ut - (6 * u(x, t) * ux - uxxx)) < 1e-6

    def test_soliton_solves_the_equation(self, soliton_wave):
        f = waves.exact_field(SolutionKind.SECH2, soliton_wave, 256, length=40.0)
        ux = model.spectral_derivative(f, 1).values
        rhs = model.eom_rhs(f, DeformationParams(1.0)).values
        np.testing.assert_allclose(rhs, -soliton_wave.c * ux, atol=1e-6)

    def test_soliton_is_centred_in_the_cell(self, soliton_wave):
        f = waves.exact_field(SolutionKind.SECH2, soliton_wave, 256, length=40.0)
        assert f.values[128] == pytest.approx(-1.0)
        assert abs(f.values[0]) < 1e-10 and abs(f.values[-1]) < 1e-10
        np.testing.assert_allclose(f.values[1:128], f.values[255:128:-1], atol=1e-14)

    def test_soliton_needs_length(self, soliton_wave):
        with pytest.raises(DomainError):
            waves.exact_field(SolutionKind.SECH2, soliton_wave, 64)

    def test_complex_phase_rejected(self):
        wave = TravelingWaveParams(0.5 + 0.5j, 0.5)
        with pytest.raises(DomainError):
            waves.exact_solution(SolutionKind.CNOIDAL, np.linspace(0.0, 1.0, 4), 0.0, wave)


class TestCurves:
    def _curve(self, xct):
        v = np.arange(len(xct), dtype=float)
        return Curve(1.0, 0, waves.M0_WAVE, v, np.asarray(xct, dtype=complex))

    def test_scan_real_branches(self):
        curve = self._curve([1.0, 1.0 + 1j, 2.0, 3.0, 4.0 + 5j])
        assert waves.scan_real_branches(curve, tol_abs=1e-9, tol_rel=0.0) == [(0.0, 0.0), (2.0, 3.0)]

    def test_scan_with_reference_offset(self):
        curve = self._curve([1.0 + 2j, 2.0 + 2j, 3.0 + 2j])
        assert waves.scan_real_branches(curve, tol_abs=1e-9, tol_rel=0.0) == []
        assert waves.scan_real_branches(curve, tol_abs=1e-9, tol_rel=0.0, reference=1.0) == [(0.0, 2.0)]

    def test_real_coverage(self):
        assert waves.real_coverage([(0.0, 0.5), (0.25, 1.0)], (0.0, 2.0)) == pytest.approx(0.5)
        assert waves.real_coverage([], (0.0, 1.0)) == 0.0
        assert waves.real_coverage([(-1.0, 3.0)], (0.0, 1.0)) == pytest.approx(1.0)

    def test_curve_validation(self):
        with pytest.raises(DomainError):
            Curve(1.0, 0, waves.M0_WAVE, np.array([1.0, 0.0]), np.zeros(2))

    def test_eps1_curve_satisfies_the_ode(self):
        curve = waves.build_curve(waves.M0_WAVE, 1.0, 0, (0.1, 4.1), samples=401)
        assert curve.form == "m0"
        assert curve.failed == 0
        details = waves.ode_residual_details(curve, waves.M0_WAVE)
        assert details.checked > 300
        assert details.residual < 1e-5
        assert waves.real_coverage(curve.real_intervals, (0.1, 4.1)) == pytest.approx(1.0)

    def test_form_selection(self, cnoidal_wave, soliton_wave):
        assert waves.select_form(waves.M0_WAVE) == "m0"
        assert waves.select_form(cnoidal_wave) == "general"
        assert waves.select_form(soliton_wave) == "m1"
        assert waves.select_form(TravelingWaveParams(1.0, 0.0)) == "general"

    def test_build_curve_arguments(self):
        with pytest.raises(DomainError):
            waves.build_curve(waves.M0_WAVE, 1.0, 0, (0.0, 1.0), samples=1)
        with pytest.raises(DomainError):
            waves.build_curve(waves.M0_WAVE, 1.0, 0, (1.0, 0.0), samples=10)
        with pytest.raises(DomainError):
            waves.build_curve(waves.M0_WAVE, 1.0, 0, (0.0, 1.0), samples=10, form="spline")

    def test_ode_residual_needs_five_samples(self):
        curve = self._curve([0.0, 1.0, 2.0])
        with pytest.raises(DomainError):
            waves.ode_residual(curve, waves.M0_WAVE)


class TestTail:
    def test_limit_domain(self):
        with pytest.raises(ConvergenceError):
            waves.tail_limit(1.0, 0)
        with pytest.raises(DomainError):
            waves.tail_limit(0.5, 0)

    def test_limit_magnitude(self):
        eps = 3.0
        a, b = eps / (eps + 1), (eps - 1) / (eps + 1)
        expected = special.beta(a, b) * (eps / (eps + 1)) ** (1 / (eps + 1))
        assert abs(waves.tail_limit(eps, 2)) == pytest.approx(expected, rel=1e-12)

    def test_extrapolate(self):
        f = lambda h: 2.0 + 3.0 * h ** 0.5  # noqa: E731
        assert waves.extrapolate(f(1e-2), f(1e-3), 1e-2, 1e-3, 0.5) == pytest.approx(2.0, abs=1e-12)

    def test_probe_approaches_the_limit_from_below(self):
        probe = waves.tail_probe(3.0, 2)
        assert probe['minus_error'] < 1e-4


@pytest.mark.slow
@pytest.mark.parametrize("name", list_figure_presets())
def test_figure_preset_curves(name):
    for branch_set, curve in preset_curves(name, 401):
        assert curve.failed == 0
        assert waves.real_coverage(curve.real_intervals, branch_set.real_range) >= 0.9
        assert waves.ode_residual(curve, curve.wave) < 1e-5
