"""
Built-in catalogues of kernels, radial factors, weights, test functions and
Lipschitz fields.

Each registry is an OrderedDict keyed by id; entries carry a description,
the supported dimensions, default parameters and the builder used by the
JSON document loaders and the verification suite.
"""

import math
from collections import OrderedDict
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from rough_sio.config.settings import numeric
from rough_sio.errors import ConfigurationError
from rough_sio.models.analytic import LipschitzField, TestFunction
from rough_sio.models.kernel import TWO_PI, AngularKernel, RadialFactor
from rough_sio.models.weight import Weight, constant_weight, exp_weight, power_weight


# kernels

def _constant_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    value = complex(params.get("value", 1.0))
    if dimension == 2:
        return AngularKernel.from_arcs([(0.0, TWO_PI, value)], label=f"{value.real:g}", catalogue_id="constant",
                                       params=params)
    return AngularKernel.from_callable(lambda u: np.full(u.shape[:-1], value), dimension=dimension,
                                       resolution=resolution, label="constant", catalogue_id="constant",
                                       params=params)


def _cos_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    return AngularKernel.from_callable(lambda u: u[..., 0], dimension=dimension, resolution=resolution,
                                       label="cos", catalogue_id="cos", params=params)


def _sin_power_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    alpha = float(params.get("alpha", 0.5))
    if not (0 <= alpha < 1):
        raise ConfigurationError("alpha must lie in [0, 1) for an integrable kernel", field="params.alpha")
    return AngularKernel.from_callable(lambda u: np.abs(u[..., -1]) ** (-alpha), dimension=dimension,
                                       resolution=resolution, label=f"|sin|^-{alpha:g}", catalogue_id="sin_power",
                                       params=params)


def _sign_split_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    alpha = float(params.get("alpha", 0.5))
    if not (0 <= alpha < 1):
        raise ConfigurationError("alpha must lie in [0, 1) for an integrable kernel", field="params.alpha")
    return AngularKernel.from_callable(lambda u: np.sign(u[..., 0]) * np.abs(u[..., -1]) ** (-alpha),
                                       dimension=dimension, resolution=resolution,
                                       label=f"sgn(cos)|sin|^-{alpha:g}", catalogue_id="sign_split", params=params)


def _arcs_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    cells = params.get("cells")
    if not cells:
        raise ConfigurationError("arc kernel needs a nonempty cell list", field="params.cells")
    return AngularKernel.from_arcs([tuple(c) for c in cells], label="arcs", catalogue_id="arcs", params=params)


def _two_arc_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    return AngularKernel.from_arcs(
        [(0.0, math.pi / 2, 2.0), (math.pi / 2, TWO_PI, -2.0 / 3.0)],
        label="two-arc",
        catalogue_id="two_arc",
        params=params,
    )


def dyadic_arm_arcs(arms: int) -> List[tuple]:
    """(from, to, value) arcs of sum_{k=1}^{K} 2^{2k} chi_{I_k}, I_k = [2^{-3k} - 2^{-5k}, 2^{-3k}]."""
    return [(2.0 ** (-3 * k) - 2.0 ** (-5 * k), 2.0 ** (-3 * k), 2.0 ** (2 * k)) for k in range(1, arms + 1)]


def _dyadic_arms_kernel(params: Dict[str, Any], dimension: int, resolution: Optional[int]) -> AngularKernel:
    arms = int(params.get("arms", 6))
    if not (1 <= arms <= 20):
        raise ConfigurationError("arm count must lie in [1, 20]", field="params.arms")
    return AngularKernel.from_arcs(dyadic_arm_arcs(arms), label=f"dyadic-arms-{arms}", catalogue_id="dyadic_arms",
                                   params=params)


KERNEL_CATALOGUE = OrderedDict([
    ("constant", {
        "description": "Omega identically equal to params.value (default 1); S is a ball",
        "dimensions": (2, 3),
        "params": {"value": 1.0},
        "cancels": False,
        "builder": _constant_kernel,
    }),
    ("cos", {
        "description": "Omega(theta) = theta_1 (cos theta for n = 2); odd, cancels",
        "dimensions": (2, 3),
        "params": {},
        "cancels": True,
        "builder": _cos_kernel,
    }),
    ("sin_power", {
        "description": "Omega(theta) = |theta_n|^-alpha (|sin theta|^-alpha for n = 2); unbounded, even",
        "dimensions": (2, 3),
        "params": {"alpha": 0.5},
        "cancels": False,
        "builder": _sin_power_kernel,
    }),
    ("sign_split", {
        "description": "Omega(theta) = sgn(theta_1) |theta_n|^-alpha; unbounded, cancels",
        "dimensions": (2, 3),
        "params": {"alpha": 0.5},
        "cancels": True,
        "builder": _sign_split_kernel,
    }),
    ("arcs", {
        "description": "User arcs params.cells = [[from, to, value], ...] (n = 2)",
        "dimensions": (2,),
        "params": {},
        "cancels": False,
        "builder": _arcs_kernel,
    }),
    ("two_arc", {
        "description": "2 on [0, pi/2], -2/3 on [pi/2, 2 pi] (n = 2); cancels, c_Omega = (pi/2) log 3",
        "dimensions": (2,),
        "params": {},
        "cancels": True,
        "builder": _two_arc_kernel,
    }),
    ("dyadic_arms", {
        "description": "sum_{k<=K} 2^{2k} on I_k = [2^{-3k} - 2^{-5k}, 2^{-3k}] (n = 2); unbounded arms",
        "dimensions": (2,),
        "params": {"arms": 6},
        "cancels": False,
        "builder": _dyadic_arms_kernel,
    }),
])


def get_kernel_ids() -> List[str]:
    return list(KERNEL_CATALOGUE.keys())


def get_kernel_entry(kernel_id: str) -> Dict[str, Any]:
    """Look up a kernel entry, raising ConfigurationError for unknown ids"""
    entry = KERNEL_CATALOGUE.get(kernel_id)
    if entry is None:
        raise ConfigurationError(f"unknown kernel {kernel_id!r}; known: {', '.join(KERNEL_CATALOGUE)}",
                                 field="callable_id")
    return entry


def build_kernel(kernel_id: str, params: Optional[Dict[str, Any]] = None, dimension: int = 2,
                 resolution: Optional[int] = None) -> AngularKernel:
    """
    Build a catalogue kernel.

    Args:
        kernel_id: Catalogue key
        params: Overrides of the entry's default parameters
        dimension: 2 or 3
        resolution: Cell count (n = 2) or polar bands (n = 3) for callables

    Returns:
        AngularKernel tagged with its catalogue id
    """
    entry = get_kernel_entry(kernel_id)
    if dimension not in entry["dimensions"]:
        raise ConfigurationError(f"kernel {kernel_id!r} is not available for n = {dimension}", field="dimension")
    merged = {**entry["params"], **(params or {})}
    if resolution is None:
        resolution = numeric("cells_2d") if dimension == 2 else numeric("polar_cells_3d")
    return entry["builder"](merged, dimension, resolution)


# radial factors

def _power(beta: float) -> Callable[[np.ndarray], np.ndarray]:
    def func(r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.asarray(r, dtype=float) ** beta

    return func


def _radial_constant(params: Dict[str, Any]) -> RadialFactor:
    value = float(params.get("value", 1.0))
    return RadialFactor(func=lambda r: np.full(np.shape(r), value), h0=value, label=f"{value:g}",
                        kind="constant", params=params, constant_value=value)


def _radial_power(params: Dict[str, Any]) -> RadialFactor:
    beta = float(params["beta"])
    return RadialFactor(func=_power(beta), h0=None, label=f"r^{beta:g}", kind="power", params=params)


def _radial_one_plus_power(params: Dict[str, Any]) -> RadialFactor:
    beta = float(params.get("beta", 1.0))
    if beta <= 0:
        raise ConfigurationError("beta must be positive", field="params.beta")
    inner = _power(beta)
    return RadialFactor(func=lambda r: 1.0 + inner(r), h0=1.0, label=f"1+r^{beta:g}", kind="one_plus_power",
                        params=params)


def _radial_log_oscillating(params: Dict[str, Any]) -> RadialFactor:
    return RadialFactor(func=lambda r: 2.0 + np.sin(np.log(r)), h0=None, label="2+sin(log r)",
                        kind="log_oscillating", params=params)


def _radial_abs_log_power(params: Dict[str, Any]) -> RadialFactor:
    gamma = float(params.get("gamma", 0.5))
    return RadialFactor(func=lambda r: np.abs(np.log(r)) ** gamma, h0=None, label=f"|log r|^{gamma:g}",
                        kind="abs_log_power", params=params)


def _radial_gaussian(params: Dict[str, Any]) -> RadialFactor:
    scale = float(params.get("scale", 1.0))
    return RadialFactor(func=lambda r: np.exp(-(np.asarray(r) / scale) ** 2), h0=1.0, label=f"exp(-(r/{scale:g})^2)",
                        kind="gaussian", params=params)


RADIAL_CATALOGUE = OrderedDict([
    ("constant", {"description": "h = params.value", "params": {"value": 1.0}, "builder": _radial_constant}),
    ("power", {"description": "h = r^beta (in H(sigma) only for beta = 0)", "params": {"beta": -0.5},
               "builder": _radial_power}),
    ("one_plus_power", {"description": "h = 1 + r^beta, h(0) = 1 (Dini for beta > 0; unbounded at infinity)",
                        "params": {"beta": 1.0}, "builder": _radial_one_plus_power}),
    ("log_oscillating", {"description": "h = 2 + sin(log r), bounded, no limit at 0", "params": {},
                         "builder": _radial_log_oscillating}),
    ("abs_log_power", {"description": "h = |log r|^gamma, unbounded at 0 and infinity",
                       "params": {"gamma": 0.5}, "builder": _radial_abs_log_power}),
    ("gaussian", {"description": "h = exp(-(r/scale)^2), h(0) = 1", "params": {"scale": 1.0},
                  "builder": _radial_gaussian}),
])


def get_radial_entry(kind: str) -> Dict[str, Any]:
    entry = RADIAL_CATALOGUE.get(kind)
    if entry is None:
        raise ConfigurationError(f"unknown radial factor {kind!r}; known: {', '.join(RADIAL_CATALOGUE)}",
                                 field="radial.kind")
    return entry


def build_radial(kind: str, params: Optional[Dict[str, Any]] = None, sigma: float = 1.0, epsilon: float = 0.0,
                 h0: Optional[float] = None) -> RadialFactor:
    """Build a catalogue radial factor; an explicit ``h0`` overrides the entry's value"""
    entry = get_radial_entry(kind)
    if sigma < 1:
        raise ConfigurationError("class exponent sigma must be >= 1", field="radial.sigma")
    factor = entry["builder"]({**entry["params"], **(params or {})})
    factor = RadialFactor(
        func=factor.func,
        sigma=float(sigma),
        h0=factor.h0 if h0 is None else h0,
        label=factor.label,
        kind=factor.kind,
        params=factor.params,
        constant_value=factor.constant_value,
    )
    if epsilon:
        factor = factor.truncated(epsilon)
    return factor


# weights

WEIGHT_CATALOGUE = OrderedDict([
    ("constant", {"description": "w = params.value", "params": {"value": 1.0},
                  "builder": lambda p: constant_weight(float(p["value"]))}),
    ("power", {"description": "w = |x|^alpha", "params": {"alpha": 0.0},
               "builder": lambda p: power_weight(float(p["alpha"]))}),
    ("exp_x1", {"description": "w = exp(beta x_1); fails rectangle conditions on long x_1 rectangles",
                "params": {"beta": 1.0}, "builder": lambda p: exp_weight(float(p["beta"]))}),
])


def build_weight(family: str, params: Optional[Dict[str, Any]] = None) -> Weight:
    entry = WEIGHT_CATALOGUE.get(family)
    if entry is None:
        raise ConfigurationError(f"unknown weight family {family!r}; known: {', '.join(WEIGHT_CATALOGUE)}",
                                 field="family")
    return entry["builder"]({**entry["params"], **(params or {})})


# test functions and fields

TEST_FUNCTION_CATALOGUE = OrderedDict([
    ("gaussian", {"description": "exp(-|y-c|^2 / (2 s^2)), effective support 8.5 s", "width": 1.0}),
    ("bump", {"description": "(1 - |y-c|^2/w^2)^2 on |y-c| < w, C^1", "width": 1.0}),
    ("poly_bump", {"description": "((y-c)_1 / w) (1 - |y-c|^2/w^2)^2, odd in the first coordinate", "width": 1.0}),
    ("plateau", {"description": "1 on |y-c| <= inner, smoothstep to 0 at width", "width": 4.0, "inner": 2.0}),
])


def build_test_function(family: str, center=None, width: Optional[float] = None, amplitude: float = 1.0,
                        inner: Optional[float] = None, dimension: int = 2) -> TestFunction:
    entry = TEST_FUNCTION_CATALOGUE.get(family)
    if entry is None:
        raise ConfigurationError(f"unknown test function {family!r}; known: {', '.join(TEST_FUNCTION_CATALOGUE)}",
                                 field="family")
    center = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)
    return TestFunction(
        family=family,
        center=center,
        width=float(entry["width"] if width is None else width),
        amplitude=float(amplitude),
        inner=float(entry.get("inner", 0.0) if inner is None else inner),
        label=family,
    )


FIELD_CATALOGUE = OrderedDict([
    ("constant", {"description": "a = offset", "vector": (0.0, 0.0)}),
    ("linear", {"description": "a = v . x", "vector": (1.0, 0.5)}),
    ("sinusoid", {"description": "a = sin(v . x)", "vector": (1.0, 0.5)}),
])


def build_field(kind: str, vector=None, amplitude: float = 1.0, offset: float = 0.0) -> LipschitzField:
    entry = FIELD_CATALOGUE.get(kind)
    if entry is None:
        raise ConfigurationError(f"unknown field {kind!r}; known: {', '.join(FIELD_CATALOGUE)}", field="kind")
    v = np.asarray(entry["vector"] if vector is None else vector, dtype=float)
    return LipschitzField(kind=kind, vector=v, amplitude=float(amplitude), offset=float(offset), label=kind)
