"""
Tests for the kernel models: cell representation of Omega, radial factors
and the combined kernel spec.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rough_sio.config.catalogue import build_kernel, build_radial
from rough_sio.errors import ConfigurationError, DomainError
from rough_sio.models.kernel import TWO_PI, AngularKernel, KernelSpec, eval_omega, rho


def test_from_arcs_fills_gaps_with_zero():
    kernel = AngularKernel.from_arcs([(0.0, math.pi, 1.0)])
    assert kernel.cell_count == 2
    assert kernel.values[1] == 0
    assert kernel.integral() == pytest.approx(math.pi)
    assert kernel.sphere_measure() == pytest.approx(TWO_PI)


def test_from_arcs_rejects_overlap():
    with pytest.raises(ConfigurationError, match="overlap"):
        AngularKernel.from_arcs([(0.0, 2.0, 1.0), (1.0, 3.0, 1.0)])


def test_from_arcs_rejects_reversed_arc():
    with pytest.raises(ConfigurationError) as excinfo:
        AngularKernel.from_arcs([(2.0, 1.0, 1.0)])
    assert excinfo.value.field == "cells[0]"


def test_evaluate_at_origin_is_a_domain_error(cos_kernel):
    with pytest.raises(DomainError):
        cos_kernel.evaluate(np.zeros(2))


@settings(max_examples=50, deadline=None)
@given(
    angle=st.floats(min_value=0.0, max_value=TWO_PI, allow_nan=False),
    radius=st.floats(min_value=1e-6, max_value=1e6, allow_nan=False),
)
def test_evaluation_is_homogeneous_of_degree_zero(angle, radius):
    kernel = build_kernel("cos")
    u = np.array([math.cos(angle), math.sin(angle)])
    assert eval_omega(kernel, radius * u) == pytest.approx(eval_omega(kernel, u), abs=1e-12)


def test_cos_kernel_cancels_and_has_l1_norm_four(cos_kernel):
    assert abs(cos_kernel.integral()) < 1e-9
    assert cos_kernel.norm_l1() == pytest.approx(4.0, rel=1e-5)


def test_rho_is_nth_root_of_magnitude(two_arc_kernel):
    assert rho(two_arc_kernel, [1.0, 1.0]) == pytest.approx(math.sqrt(2.0))
    assert rho(two_arc_kernel, [-1.0, 0.0]) == pytest.approx(math.sqrt(2.0 / 3.0))
    np.testing.assert_allclose(two_arc_kernel.rho_values, np.sqrt(np.abs(two_arc_kernel.values)))


def test_sign_values_are_unit_or_zero():
    kernel = AngularKernel.from_arcs([(0.0, 1.0, -3.0), (2.0, 3.0, 2.0)])
    signs = kernel.sign_values
    assert set(np.round(signs.real, 12)) == {-1.0, 0.0, 1.0}


def test_scaled_multiplies_integral(two_arc_kernel):
    scaled = two_arc_kernel.scaled(3.0)
    assert scaled.norm_l1() == pytest.approx(3.0 * two_arc_kernel.norm_l1())
    assert scaled.catalogue_id is None


def test_multiplied_product_with_direction_function(cos_kernel):
    squared = cos_kernel.multiplied(lambda u: u[..., 0])
    # int cos^2 = pi
    assert squared.integral().real == pytest.approx(math.pi, rel=1e-5)
    assert eval_omega(squared, [0.0, 2.0]) == pytest.approx(0.0, abs=1e-12)


def test_resampled_keeps_callable_and_changes_cells(cos_kernel):
    coarse = cos_kernel.resampled(256)
    assert coarse.cell_count == 256
    assert eval_omega(coarse, [1.0, 0.0]) == pytest.approx(1.0)


def test_llogl_sum_of_constant_below_one_is_l1_norm():
    kernel = AngularKernel.from_arcs([(0.0, TWO_PI, 0.5)])
    assert kernel.llogl_sum() == pytest.approx(kernel.norm_l1())


def test_llogl_sum_adds_log_of_large_values():
    value = math.e
    kernel = AngularKernel.from_arcs([(0.0, TWO_PI, value)])
    assert kernel.llogl_sum() == pytest.approx(2.0 * value * TWO_PI)


def test_l_sigma_norm_of_two_valued_kernel():
    kernel = AngularKernel.from_arcs([(0.0, math.pi, 2.0), (math.pi, TWO_PI, -1.0)])
    assert kernel.l_sigma_norm(1.0) == pytest.approx(kernel.norm_l1())
    assert kernel.l_sigma_norm(2.0) == pytest.approx(math.sqrt(5.0 * math.pi))


def test_catalogue_kernel_document_form(cos_kernel):
    data = cos_kernel.to_dict()
    assert data["callable_id"] == "cos"
    assert data["dimension"] == 2


def test_cell_kernel_document_form_skips_zero_cells():
    kernel = AngularKernel.from_arcs([(1.0, 2.0, 1.0 + 2.0j)])
    cells = kernel.to_dict()["cells"]
    assert len(cells) == 1
    assert cells[0]["value"] == {"re": 1.0, "im": 2.0}


def test_three_dimensional_cells_cover_the_sphere():
    kernel = build_kernel("constant", dimension=3, resolution=16)
    assert kernel.sphere_measure() == pytest.approx(4.0 * math.pi)


class TestRadialFactor:
    def test_truncation_vanishes_inside_radius(self):
        h = build_radial("constant", {"value": 2.0}).truncated(0.5)
        np.testing.assert_array_equal(h(np.array([0.1, 0.5, 0.6])), [0.0, 0.0, 2.0])
        assert h.breakpoints == [0.5]
        assert not h.is_constant

    def test_negative_truncation_is_rejected(self):
        with pytest.raises(DomainError):
            build_radial("constant").truncated(-1.0)

    def test_truncation_keeps_the_larger_radius(self):
        h = build_radial("gaussian").truncated(0.5).truncated(0.25)
        assert h.epsilon == 0.5

    def test_document_form_carries_h0(self):
        data = build_radial("gaussian", {"scale": 2.0}).to_dict()
        assert data["kind"] == "gaussian"
        assert data["h0"] == 1.0


class TestKernelSpec:
    def test_k_bound_holds_for_bounded_factor(self, cos_kernel, unit_radial):
        spec = KernelSpec(omega=cos_kernel, radial=unit_radial, k=lambda x, y: np.cos(x[..., 0] - y[..., 1]),
                          k_bound=1.0)
        x = np.random.default_rng(0).normal(size=(50, 2))
        y = np.random.default_rng(1).normal(size=(50, 2))
        assert spec.check_k_bound(x, y)

    def test_k_without_bound_is_a_configuration_error(self, cos_kernel, unit_radial):
        spec = KernelSpec(omega=cos_kernel, radial=unit_radial, k=lambda x, y: np.ones(x.shape[:-1]))
        with pytest.raises(ConfigurationError):
            spec.check_k_bound(np.ones((1, 2)), np.zeros((1, 2)))

    def test_truncated_spec_truncates_radial(self, cos_spec):
        assert cos_spec.truncated(0.25).radial.epsilon == 0.25
        assert cos_spec.dimension == 2
