"""
Tests for the truncated operators: direct and representation routes,
non-convolution kernels and commutators, checked against closed forms.
"""
import math

import numpy as np
import pytest

from rough_sio.config.catalogue import build_field, build_kernel, build_radial, build_test_function
from rough_sio.errors import ConfigurationError, DomainError, UnsupportedHypothesisError
from rough_sio.models.analytic import combine
from rough_sio.models.kernel import AngularKernel, KernelSpec
from rough_sio.services.operators import (
    a_eps_t,
    absolute_bound,
    as_point,
    commutator,
    modulus_dini,
    moment_defect,
    t_eps_direct,
    t_eps_grid,
    t_eps_nonconv,
    t_eps_rep,
    truncation_bound,
)

UNIT = build_radial("constant")
DISC_SPEC = KernelSpec(omega=build_kernel("constant"), radial=UNIT)
COS2 = AngularKernel.from_callable(lambda u: 2.0 * u[..., 0] ** 2 - 1.0, label="cos2")


def bump_at_center(eps: float) -> float:
    """2 pi int_eps^1 (1 - r^2)^2 dr / r."""
    return 2.0 * math.pi * (-math.log(eps) - (1.0 - eps**2) + (1.0 - eps**4) / 4.0)


def poly_radial(eps: float) -> float:
    """int_eps^1 (1 - r^2)^2 dr."""
    return (1.0 - eps) - 2.0 * (1.0 - eps**3) / 3.0 + (1.0 - eps**5) / 5.0


class TestDirect:
    @pytest.mark.parametrize("eps", [0.5, 0.25, 0.01])
    def test_bump_under_the_unit_kernel(self, bump, eps):
        assert t_eps_direct(bump, DISC_SPEC, eps, [0.0, 0.0]).real == pytest.approx(bump_at_center(eps), rel=1e-5)

    @pytest.mark.parametrize("eps", [0.5, 0.1])
    def test_poly_bump_under_cos(self, cos_spec, eps):
        f = build_test_function("poly_bump")
        # cos theta * (-r cos theta) integrated over the circle
        assert t_eps_direct(f, cos_spec, eps, [0.0, 0.0]).real == pytest.approx(-math.pi * poly_radial(eps), rel=1e-5)

    def test_cancelling_kernel_annihilates_radial_functions(self, bump, cos_spec):
        assert abs(t_eps_direct(bump, cos_spec, 0.1, [0.0, 0.0])) < 1e-9
        two_arc = KernelSpec(omega=build_kernel("two_arc"), radial=UNIT)
        assert abs(t_eps_direct(bump, two_arc, 0.1, [0.0, 0.0])) < 1e-9

    def test_linearity(self, bump, cos_spec):
        shifted = bump.shifted([0.3, 0.0])
        x = [0.2, -0.1]
        mixed = combine([(2.0, bump), (-1.0, shifted)])
        expected = 2.0 * t_eps_direct(bump, cos_spec, 0.2, x) - t_eps_direct(shifted, cos_spec, 0.2, x)
        assert t_eps_direct(mixed, cos_spec, 0.2, x) == pytest.approx(expected, rel=1e-5, abs=1e-8)

    @pytest.mark.parametrize("kernel_id", ["cos", "two_arc"])
    def test_translation_covariance(self, kernel_id):
        spec = KernelSpec(omega=build_kernel(kernel_id), radial=UNIT)
        f = build_test_function("bump", center=[0.2, 0.1], width=0.6)
        x = np.array([0.1, -0.2])
        v = np.array([0.37, -0.21])
        value = t_eps_direct(f, spec, 0.1, x)
        assert abs(value) > 1e-3
        assert t_eps_direct(f.shifted(v), spec, 0.1, x + v) == pytest.approx(value, abs=1e-8)

    @pytest.mark.parametrize("kernel_id", ["cos", "two_arc"])
    @pytest.mark.parametrize("factor", [0.5, 2.0, 3.0])
    def test_dilation_covariance(self, kernel_id, factor):
        # T_eps f_lambda(lambda x) = T_{eps / lambda} f(x) with f_lambda = f(. / lambda)
        spec = KernelSpec(omega=build_kernel(kernel_id), radial=UNIT)
        f = build_test_function("bump", center=[0.2, 0.1], width=0.6)
        x = np.array([0.1, -0.2])
        eps = 0.2
        expected = t_eps_direct(f, spec, eps / factor, x)
        assert abs(expected) > 1e-3
        value = t_eps_direct(f.dilated(factor), spec, eps, factor * x)
        assert value == pytest.approx(expected, rel=1e-8, abs=1e-10)

    def test_truncation_beyond_the_support_is_zero(self, bump, cos_spec):
        assert t_eps_direct(bump, cos_spec, 2.0, [0.0, 0.0]) == 0j

    def test_absolute_bound_dominates(self, cos_spec):
        f = build_test_function("gaussian", center=[0.3, 0.1], width=0.4)
        x = [0.0, 0.2]
        assert abs(t_eps_direct(f, cos_spec, 0.1, x)) <= absolute_bound(f, cos_spec, 0.1, x) * (1 + 1e-12)

    def test_argument_errors(self, bump, cos_spec):
        with pytest.raises(DomainError):
            t_eps_direct(bump, cos_spec, 0.0, [0.0, 0.0])
        with pytest.raises(DomainError):
            as_point([0.0, 0.0, 0.0])


class TestRepresentation:
    @pytest.mark.parametrize("eps", [0.5, 0.1])
    @pytest.mark.parametrize("x", [[0.0, 0.0], [0.3, -0.2]])
    def test_routes_agree(self, cos_spec, eps, x):
        f = build_test_function("gaussian", center=[0.2, 0.1], width=0.3)
        direct = t_eps_direct(f, cos_spec, eps, x)
        rep = t_eps_rep(f, cos_spec, eps, x)
        assert rep.value == pytest.approx(direct, rel=1e-4, abs=1e-5)

    def test_unit_kernel_saturates_every_ray(self, bump):
        rep = t_eps_rep(bump, DISC_SPEC, 0.25, [0.0, 0.0])
        assert rep.tail_bound == 0.0
        assert rep.value.real == pytest.approx(bump_at_center(0.25), rel=1e-5)

    def test_more_tail_blocks_shrink_the_tail_bound(self, bump, cos_spec):
        short = t_eps_rep(bump, cos_spec, 0.25, [0.1, 0.0], tail_blocks=2, strict=False)
        long = t_eps_rep(bump, cos_spec, 0.25, [0.1, 0.0], tail_blocks=12, strict=False)
        assert long.tail_bound <= short.tail_bound
        assert long.to_dict()["t_range"][1] > short.to_dict()["t_range"][1]

    def test_average_over_a_dilate(self, bump):
        t = 0.5
        expected = 2.0 * math.pi / t**2 * (t**2 / 2 - t**4 / 2 + t**6 / 6)
        assert a_eps_t(bump, DISC_SPEC, 0.0, t, [0.0, 0.0]).real == pytest.approx(expected, rel=1e-5)
        assert a_eps_t(bump, DISC_SPEC, 0.75, t, [0.0, 0.0]) == 0j
        with pytest.raises(DomainError):
            a_eps_t(bump, DISC_SPEC, 0.0, 0.0, [0.0, 0.0])
        with pytest.raises(DomainError):
            a_eps_t(bump, DISC_SPEC, -1.0, 1.0, [0.0, 0.0])

    def test_eps_must_be_positive(self, bump, cos_spec):
        with pytest.raises(DomainError):
            t_eps_rep(bump, cos_spec, 0.0, [0.0, 0.0])


class TestNonConvolution:
    def test_constant_factor_scales_the_convolution(self, cos_kernel):
        f = build_test_function("gaussian", center=[0.2, 0.0], width=0.3)
        spec = KernelSpec(omega=cos_kernel, radial=UNIT, k=lambda x, y: np.full(np.shape(y)[:-1], 2.0), k_bound=2.0)
        plain = t_eps_direct(f, KernelSpec(omega=cos_kernel, radial=UNIT), 0.1, [0.0, 0.0])
        direct, rep = t_eps_nonconv(f, spec, 0.1, [0.0, 0.0])
        assert direct == pytest.approx(2.0 * plain, rel=1e-10)
        assert rep.value == pytest.approx(direct, rel=1e-4, abs=1e-5)

    def test_position_dependent_factor(self, cos_kernel, bump):
        k = lambda x, y: 1.0 + 0.5 * np.cos(y[..., 0])
        spec = KernelSpec(omega=cos_kernel, radial=UNIT, k=k, k_bound=1.5)
        direct, rep = t_eps_nonconv(bump, spec, 0.2, [0.1, 0.2])
        assert rep.value == pytest.approx(direct, rel=1e-4, abs=1e-5)
        assert spec.check_k_bound(np.zeros((5, 2)), np.ones((5, 2)))

    def test_missing_factor_or_bound(self, cos_kernel, bump):
        with pytest.raises(ConfigurationError):
            t_eps_nonconv(bump, KernelSpec(omega=cos_kernel, radial=UNIT), 0.1, [0.0, 0.0])
        with pytest.raises(ConfigurationError):
            t_eps_nonconv(bump, KernelSpec(omega=cos_kernel, radial=UNIT, k=lambda x, y: 1.0), 0.1, [0.0, 0.0])


class TestCommutators:
    def test_linear_field_multiplies_the_kernel(self, bump, cos_spec):
        a = build_field("linear", vector=[1.0, 0.0])
        # cos theta * cos theta integrates to pi
        value = commutator(bump, cos_spec, a, 1, 0.25, [0.0, 0.0])
        expected = bump_at_center(0.25) / 2.0
        assert value.direct.real == pytest.approx(expected, rel=1e-5)
        assert value.value.real == pytest.approx(expected, rel=1e-4)

    def test_constant_field_gives_zero(self, bump, cos_spec):
        value = commutator(bump, cos_spec, build_field("constant", offset=3.0), 2, 0.25, [0.1, 0.0])
        assert value.direct == 0j
        assert abs(value.value) < 1e-12

    def test_principal_value_needs_vanishing_moments(self, bump, cos_spec):
        with pytest.raises(UnsupportedHypothesisError):
            commutator(bump, cos_spec, build_field("linear"), 1, 0.0, [0.0, 0.0])

    def test_principal_value_of_first_order_commutator(self):
        spec = KernelSpec(omega=COS2, radial=UNIT)
        f = build_test_function("poly_bump")
        a = build_field("linear", vector=[1.0, 0.0])
        # cos 2theta cos theta * (-r cos theta): int cos 2theta cos^2 theta = pi / 2
        value = commutator(f, spec, a, 1, 0.0, [0.0, 0.0])
        assert value.direct is None
        assert value.value.real == pytest.approx(-0.5 * math.pi * poly_radial(0.0), rel=1e-3)
        truncated = commutator(f, spec, a, 1, 0.1, [0.0, 0.0])
        assert truncated.direct.real == pytest.approx(-0.5 * math.pi * poly_radial(0.1), rel=1e-5)

    def test_order_must_be_positive(self, bump, cos_spec):
        with pytest.raises(DomainError):
            commutator(bump, cos_spec, build_field("linear"), 0, 0.1, [0.0, 0.0])

    def test_moments_and_modulus(self, cos_kernel):
        assert moment_defect(cos_kernel, 1) == pytest.approx(math.pi, rel=1e-9)
        assert moment_defect(cos_kernel, 0) < 1e-12
        assert moment_defect(COS2, 1) < 1e-12
        assert modulus_dini(build_field("linear"), [0.3, 0.4]) == 0.0
        assert 0.0 < modulus_dini(build_field("sinusoid"), [0.3, 0.4]) < math.inf
        with pytest.raises(DomainError):
            moment_defect(cos_kernel, -1)


def test_truncation_bound(bump, cos_spec):
    expected = 4.0 * bump.grad_bound * 0.25
    assert truncation_bound(cos_spec, bump, 0.25, 0.5) == pytest.approx(expected, rel=1e-6)
    with pytest.raises(DomainError):
        truncation_bound(cos_spec, bump, 0.5, 0.25)
    with pytest.raises(DomainError):
        truncation_bound(cos_spec, bump.on_grid(1.0, 8), 0.25, 0.5)


class TestGridOperator:
    def test_odd_kernel_vanishes_at_the_centre(self, bump, cos_spec):
        image = t_eps_grid(bump.on_grid(1.5, 25), cos_spec, 0.2)
        centre = image.nearest_index([0.0, 0.0])
        assert abs(image.values[centre]) < 1e-10
        assert np.abs(image.values).max() > 0.1

    def test_arguments(self, bump, cos_spec):
        with pytest.raises(DomainError):
            t_eps_grid(bump.on_grid(1.5, 9), cos_spec, 0.0)
        three = KernelSpec(omega=build_kernel("cos", dimension=3, resolution=8), radial=UNIT)
        with pytest.raises(DomainError):
            t_eps_grid(bump.on_grid(1.5, 9), three, 0.2)
