"""
Shared fixtures: a reduced suite configuration and a few catalogue objects.
"""
import numpy as np
import pytest

from rough_sio.config.catalogue import build_kernel, build_radial, build_test_function
from rough_sio.config.suite_config import SuiteConfig
from rough_sio.models.kernel import KernelSpec
from rough_sio.models.starset import StarSet


@pytest.fixture
def small_cfg() -> SuiteConfig:
    """Two kernels, two radial factors and a coarse grid; enough to run every task family quickly."""
    return SuiteConfig(
        kernels=[{"id": "cos"}, {"id": "two_arc"}],
        radial_factors=[{"kind": "constant", "params": {"value": 1.0}},
                        {"kind": "gaussian", "params": {"scale": 1.0}}],
        weights=[{"family": "constant", "params": {"value": 1.0}},
                 {"family": "power", "params": {"alpha": 0.5}}],
        eps_list=[1.0, 0.25],
        probe_points=[[0.0, 0.0], [0.5, 0.0]],
        grid_resolution=24,
        monte_carlo_samples=2000,
        identity_points=10,
        vector_families=4,
        family_size=3,
        test_function_count=3,
        arm_count=3,
        seed=7,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def cos_kernel():
    return build_kernel("cos")


@pytest.fixture
def two_arc_kernel():
    return build_kernel("two_arc")


@pytest.fixture
def unit_radial():
    return build_radial("constant", {"value": 1.0})


@pytest.fixture
def cos_spec(cos_kernel, unit_radial) -> KernelSpec:
    return KernelSpec(omega=cos_kernel, radial=unit_radial)


@pytest.fixture
def disc() -> StarSet:
    """Star set of Omega = 1: the unit disc."""
    return StarSet.from_kernel(build_kernel("constant", {"value": 1.0}))


@pytest.fixture
def bump():
    return build_test_function("bump", center=[0.0, 0.0], width=1.0)
