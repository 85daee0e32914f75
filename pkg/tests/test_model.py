# tests/test_model.py

import math

import numpy as np
import pytest

from ptkdv.core.errors import DomainError, PoleError, SingularityError
from ptkdv.services import model
from ptkdv.services.model import DeformationParams, Field, Variant

TWO_PI = 2.0 * math.pi


def _sine(count=64, offset=0.0, amplitude=0.5):
    return Field.from_function(lambda x: offset + amplitude * np.sin(x), TWO_PI, count)


class TestTypes:
    def test_pole_at_minus_one(self):
        with pytest.raises(PoleError):
            DeformationParams(-1.0)

    def test_params_round_trip(self):
        params = DeformationParams(3.0, branch_n=2, kappa=0.5, variant=Variant.UNSCALED)
        assert DeformationParams.from_dict(params.to_dict()) == params

    def test_variant_from_string(self):
        assert DeformationParams(1.0, variant="unscaled").variant is Variant.UNSCALED

    def test_field_is_read_only(self):
        f = _sine()
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_field_validation(self):
        with pytest.raises(DomainError):
            Field(np.zeros(0), 1.0)
        with pytest.raises(DomainError):
            Field(np.zeros(4), 0.0)

    def test_grid(self):
        f = Field.constant(1.0, TWO_PI, 8)
        assert f.dx == pytest.approx(TWO_PI / 8)
        assert f.x[-1] == pytest.approx(TWO_PI * 7 / 8)
        assert f.same_grid(_sine(8))
        assert not f.same_grid(_sine(16))


class TestSpectral:
    def test_derivatives_of_band_limited_modes(self):
        f = Field.from_function(lambda x: np.exp(3j * x) + np.cos(5 * x), TWO_PI, 64)
        x = f.x
        np.testing.assert_allclose(model.spectral_derivative(f, 1).values,
                                   3j * np.exp(3j * x) - 5 * np.sin(5 * x), atol=1e-12)
        np.testing.assert_allclose(model.spectral_derivative(f, 2).values,
                                   -9 * np.exp(3j * x) - 25 * np.cos(5 * x), atol=1e-10)
        ux, uxx, uxxx = model.derivatives(f)
        np.testing.assert_allclose(uxxx, -27j * np.exp(3j * x) + 125 * np.sin(5 * x), atol=1e-9)

    def test_order_range(self):
        with pytest.raises(DomainError):
            model.spectral_derivative(_sine(), 4)

    def test_nyquist_mode_dropped_for_odd_orders(self):
        count = 16
        f = Field.from_function(lambda x: np.cos(count / 2 * x), TWO_PI, count)
        np.testing.assert_allclose(model.spectral_derivative(f, 1).values, 0.0, atol=1e-12)

    @pytest.mark.parametrize("count", [16, 15])
    def test_resample_is_the_interpolant(self, count):
        def u(x):
            return 1.0 + np.exp(3j * x) + np.cos(5 * x) + (np.cos(8 * x) if count % 2 == 0 else 0.0)

        f = Field.from_function(u, TWO_PI, count)
        fine = model.resample(f, 4 * count)
        np.testing.assert_allclose(fine.values, u(fine.x), atol=1e-12)
        np.testing.assert_allclose(fine.values[::4], f.values, atol=1e-12)
        assert model.resample(f, count) is f
        with pytest.raises(DomainError):
            model.resample(f, count - 1)


class TestDeformedPower:
    def test_integer_powers_are_exact(self):
        w = np.array([1j, -2.0, 0.5 - 0.5j])
        np.testing.assert_array_equal(model.deformed_power(w, 2.0, branch_n=3), w ** 2)

    def test_branch_phase(self):
        value = model.deformed_power(-1.0 + 0j, 0.5, branch_n=1)
        assert value == pytest.approx(1j * np.exp(1j * np.pi), abs=1e-14)

    def test_zero_base_negative_integer_power(self):
        with pytest.raises(PoleError):
            model.deformed_power(np.array([0.0, 1.0]), -1.0)


class TestEquationOfMotion:
    def test_eps1_unscaled_is_kdv(self, rng):
        params = DeformationParams(1.0, variant=Variant.UNSCALED)
        for _ in range(5):
            f = model.random_smooth_field(TWO_PI, 128, modes=8, rng=rng)
            ux, _, uxxx = model.derivatives(f)
            np.testing.assert_allclose(model.eom_rhs(f, params).values, -f.values * ux - uxxx, atol=1e-10)

    def test_eps1_scaled(self):
        f = _sine()
        ux, _, uxxx = model.derivatives(f)
        params = DeformationParams(1.0, kappa=0.25)
        np.testing.assert_allclose(model.eom_rhs(f, params).values, 6 * f.values * ux - uxxx + 0.25, atol=1e-10)

    def test_conservation_form(self):
        f = _sine(offset=2.0, amplitude=0.3)
        assert model.conservation_form_residual(f, DeformationParams(3.0)) < 1e-9

    @pytest.mark.parametrize("eps,offset", [(1.0, 0.0), (3.0, 2.0)])
    def test_variational_check(self, eps, offset, rng):
        f = model.random_smooth_field(TWO_PI, 64, rng=rng)
        f = f.with_values(f.values + offset)
        assert model.variational_check(f, DeformationParams(eps)) < 1e-6

    def test_singular_slope(self):
        # eps = 1.5 needs (i u_x)^(-1/2), and sin has u_x = 0 at pi/2
        f = _sine(count=64)
        with pytest.raises(SingularityError) as info:
            model.eom_rhs(f, DeformationParams(1.5))
        assert info.value.grid_index == 16

    def test_clamp_keeps_the_evaluation_finite(self):
        f = _sine(count=64)
        rhs = model.eom_rhs(f, DeformationParams(1.5), clamp=1e-3)
        assert np.all(np.isfinite(rhs.values))


class TestSymmetries:
    def test_pt_field(self, rng):
        f = model.random_pt_field(TWO_PI, 64, rng=rng)
        assert model.is_pt_symmetric(f)
        assert not model.is_pt_symmetric(_sine().with_values(_sine().values + 0.3j))

    @pytest.mark.parametrize("eps", [1.0, 2.0, 3.0])
    def test_pt_energy_is_real(self, eps, rng):
        params = DeformationParams(eps)
        for _ in range(10):
            energy = model.energy(model.random_pt_field(TWO_PI, 64, rng=rng), params)
            assert abs(energy.imag) / (1.0 + abs(energy)) < 1e-10

    def test_galilean_shift(self):
        f = _sine()
        shifted = model.galilean_transform(f, 0.5, 1.0)
        np.testing.assert_allclose(shifted.values, 0.5 * np.sin(f.x - 0.5) + 0.5, atol=1e-12)

    def test_galilean_covariance(self, rng):
        params = DeformationParams(1.0, variant=Variant.UNSCALED)
        f = model.random_smooth_field(TWO_PI, 64, rng=rng)
        c, t = 0.7, 0.9
        boosted = model.eom_rhs(model.galilean_transform(f, c, t), params).values
        rhs = model.galilean_transform(model.eom_rhs(f, params), 1.0, c * t).values - 1.0
        slope = model.galilean_transform(model.spectral_derivative(f, 1), 1.0, c * t).values - 1.0
        np.testing.assert_allclose(boosted, rhs - c * slope, atol=1e-9)

    def test_random_pt_field_resolution(self):
        with pytest.raises(DomainError):
            model.random_pt_field(TWO_PI, 16, modes=6)

    def test_pt_reflection(self):
        f = Field.from_function(lambda x: 1j * np.sin(x) + np.cos(2 * x), TWO_PI, 32)
        np.testing.assert_allclose(model.pt_reflect(f).values, f.values, atol=1e-14)
        g = _sine(32).with_values(_sine(32).values + 0.2j)
        np.testing.assert_array_equal(model.pt_reflect(model.pt_reflect(g)).values, g.values)


def test_hamiltonian_density_at_a_point():
    # 2^3 - (0.5 i)^2 / 2
    assert model.hamiltonian_density(2.0, 0.5, DeformationParams(1.0)) == pytest.approx(8.125)
