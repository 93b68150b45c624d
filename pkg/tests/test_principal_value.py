"""
Tests for c_Omega and the two principal-value routes.
"""
import math

import pytest

from rough_sio.config.catalogue import build_kernel, build_radial, build_test_function
from rough_sio.errors import DomainError, UnsupportedHypothesisError
from rough_sio.models.kernel import KernelSpec
from rough_sio.services.principal_value import c_omega, pv_limit, pv_rep

UNIT = build_radial("constant")
POLY_PV = -8.0 * math.pi / 15.0


def test_c_omega_of_two_arc():
    assert c_omega(build_kernel("two_arc")).real == pytest.approx(0.5 * math.pi * math.log(3.0))


def test_c_omega_of_constant_kernels():
    assert abs(c_omega(build_kernel("constant"))) == 0.0
    assert c_omega(build_kernel("constant", {"value": math.e})).real == pytest.approx(math.pi * math.e)


def test_limit_of_truncations(cos_spec):
    f = build_test_function("poly_bump")
    limit = pv_limit(f, cos_spec, [0.0, 0.0])
    assert limit.cauchy and limit.has_limit
    assert limit.bound_ok
    assert limit.value.real == pytest.approx(POLY_PV, rel=1e-5)
    assert len(limit.epsilons) == len(limit.values) == len(limit.differences) + 1
    assert limit.to_dict()["cauchy"]


def test_limit_needs_levels(cos_spec, bump):
    with pytest.raises(DomainError):
        pv_limit(bump, cos_spec, [0.0, 0.0], levels=1)


def test_representation_matches_the_limit(cos_spec):
    f = build_test_function("poly_bump")
    rep = pv_rep(f, cos_spec, [0.0, 0.0])
    assert rep.correction == 0j
    assert rep.value.real == pytest.approx(POLY_PV, rel=1e-3)


@pytest.mark.parametrize("x", [[0.2, 0.1], [-0.4, 0.3]])
def test_routes_agree_off_centre(cos_spec, x):
    f = build_test_function("gaussian", center=[0.1, 0.0], width=0.3)
    limit = pv_limit(f, cos_spec, x)
    rep = pv_rep(f, cos_spec, x)
    assert rep.value == pytest.approx(limit.value, rel=1e-3, abs=1e-4)


def test_log_correction_restores_the_two_arc_value(bump):
    # T_eps of a radial bump at its centre is zero for every cancelling kernel
    spec = KernelSpec(omega=build_kernel("two_arc"), radial=UNIT)
    rep = pv_rep(bump, spec, [0.0, 0.0])
    assert rep.correction.real == pytest.approx(0.5 * math.pi * math.log(3.0), rel=1e-9)
    assert abs(rep.value) < 1e-3
    assert abs(pv_limit(bump, spec, [0.0, 0.0]).value) < 1e-9


def test_representation_rejects_unsupported_hypotheses(bump):
    not_dini = KernelSpec(omega=build_kernel("cos"), radial=build_radial("log_oscillating", h0=2.0))
    with pytest.raises(UnsupportedHypothesisError):
        pv_rep(bump, not_dini, [0.0, 0.0])
    not_cancelling = KernelSpec(omega=build_kernel("constant"), radial=UNIT)
    with pytest.raises(UnsupportedHypothesisError):
        pv_rep(bump, not_cancelling, [0.0, 0.0])
