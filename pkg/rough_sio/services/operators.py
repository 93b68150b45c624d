"""
Pointwise evaluation of truncated rough singular integrals (n = 2).

Two independent routes are implemented for every operator:

direct          sum_theta w Omega(theta) int_eps^R h(r) F(r, theta) dr/r
representation  n int A_{eps,t} dt/t, A_{eps,t} = t^{-n} int_{tS minus B(0,eps)} F h sgn Omega dy

where F(r, theta) = f(x - r theta) times an optional multiplier (k(x, x - y)
for non-convolution kernels, ((a(x) - a(x - y)) / |y|)^k for commutators).
Both routes share the direction quadrature; the radial and t integrals are
done on geometric grids. R = |x - c_f| + R_f is the reach of the support of f.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy import integrate, signal

from rough_sio.config.settings import numeric, tolerance
from rough_sio.errors import ConfigurationError, DomainError, RefinementRequestError, UnsupportedHypothesisError
from rough_sio.models.analytic import FunctionSum, LipschitzField, TestFunction
from rough_sio.models.grid import GridFunction
from rough_sio.models.kernel import TWO_PI, AngularKernel, KernelSpec
from rough_sio.utils.polar import AngularQuadrature
from rough_sio.utils.quadrature import geometric_grid, gl_interval, piecewise_simpson, radial_quad

logger = logging.getLogger(__name__)

Evaluable = Union[TestFunction, FunctionSum, GridFunction]
Multiplier = Callable[[np.ndarray, np.ndarray], np.ndarray]

# dyadic blocks of t appended above R / rho_max before the closed-form tail
TAIL_BLOCKS = 12
MODULUS_LEVELS = 40
MODULUS_TAIL_LEVELS = 8


@dataclass(frozen=True, eq=False)
class Directions:
    """Direction nodes, weights and Omega at each node."""

    directions: np.ndarray
    weights: np.ndarray
    omega: np.ndarray

    @classmethod
    def for_kernel(cls, kernel: AngularKernel, max_width: Optional[float] = None) -> "Directions":
        if kernel.dimension != 2:
            raise DomainError("pointwise operators are evaluated for n = 2")
        width = max_width or numeric("angular_max_width")
        if kernel.source is not None:
            # multiple of 4 so the axes are piece edges
            count = 4 * int(math.ceil(TWO_PI / width / 4.0))
            quad = AngularQuadrature.uniform(count=count, order=2)
            omega = np.asarray(kernel.source(quad.directions), dtype=complex)
        else:
            quad = AngularQuadrature.from_kernel(kernel, max_width=width, order=2)
            omega = quad.omega
        return cls(directions=quad.directions, weights=quad.weights, omega=omega)

    def __len__(self) -> int:
        return int(self.weights.size)

    @property
    def dimension(self) -> int:
        return 2

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.omega)

    @property
    def rho(self) -> np.ndarray:
        return self.magnitude ** (1.0 / self.dimension)

    @property
    def sign(self) -> np.ndarray:
        magnitude = self.magnitude
        out = np.zeros_like(self.omega)
        nonzero = magnitude > 0
        out[nonzero] = self.omega[nonzero] / magnitude[nonzero]
        return out

    def log_rho(self) -> np.ndarray:
        rho = self.rho
        return np.where(rho > 0, np.log(np.where(rho > 0, rho, 1.0)), 0.0)


class RayTable:
    """Cumulative integrals G(s) = int_lo^s g dr along every direction.

    ``derivative`` holds dG/du on the log grid ``u`` (one row per direction,
    or a single shared row). Lookups use cubic Hermite interpolation in log s,
    return 0 below the grid and the full integral above it.
    """

    def __init__(self, u: np.ndarray, derivative: np.ndarray):
        self.u = np.asarray(u, dtype=float)
        self.derivative = np.atleast_2d(np.asarray(derivative, dtype=complex))
        self.cumulative = _cumulative(self.derivative, self.u)

    @property
    def total(self) -> np.ndarray:
        return self.cumulative[:, -1]

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        shared = self.cumulative.shape[0] == 1
        query = s.reshape(1, -1) if shared else s.reshape(s.shape[0], -1)
        q = np.log(np.maximum(query, 1e-300))
        idx = np.clip(np.searchsorted(self.u, q, side="right") - 1, 0, self.u.size - 2)
        u0 = self.u[idx]
        step = self.u[idx + 1] - u0
        tau = np.clip((q - u0) / step, 0.0, 1.0)
        g0 = np.take_along_axis(self.cumulative, idx, axis=1)
        g1 = np.take_along_axis(self.cumulative, idx + 1, axis=1)
        d0 = np.take_along_axis(self.derivative, idx, axis=1) * step
        d1 = np.take_along_axis(self.derivative, idx + 1, axis=1) * step
        tau2 = tau * tau
        tau3 = tau2 * tau
        out = ((2 * tau3 - 3 * tau2 + 1) * g0 + (tau3 - 2 * tau2 + tau) * d0
               + (3 * tau2 - 2 * tau3) * g1 + (tau3 - tau2) * d1)
        out = np.where(q < self.u[0], 0.0, out)
        out = np.where(q >= self.u[-1], self.cumulative[:, -1:], out)
        return out.reshape(s.shape)


def _cumulative(values: np.ndarray, u: np.ndarray) -> np.ndarray:
    real = integrate.cumulative_simpson(values.real, x=u, axis=-1, initial=0.0)
    if np.all(values.imag == 0):
        return real.astype(complex)
    return real + 1j * integrate.cumulative_simpson(values.imag, x=u, axis=-1, initial=0.0)


def _log_grid(lo: float, hi: float, per_block: int, breaks=()) -> np.ndarray:
    pieces = geometric_grid(lo, hi, per_block, breaks)
    return np.concatenate([pieces[0]] + [p[1:] for p in pieces[1:]])


def as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DomainError(f"evaluation point must be a point of R^2, got shape {x.shape}")
    return x


def _reach(f: Evaluable, x: np.ndarray) -> float:
    return float(np.linalg.norm(x - np.asarray(f.support_center, dtype=float)) + f.support_radius)


def value_at(f: Evaluable, x: np.ndarray) -> complex:
    return complex(np.asarray(f(x[None, :]), dtype=complex)[0])


def _radial(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    return np.asarray(spec.radial(r), dtype=complex)


def _ray_values(f: Evaluable, x: np.ndarray, r: np.ndarray, dirs: Directions,
                multiplier: Optional[Multiplier]) -> np.ndarray:
    """F(r, theta) on the (direction, radius) grid."""
    points = x[None, None, :] - r[None, :, None] * dirs.directions[:, None, :]
    values = np.asarray(f(points), dtype=complex)
    if multiplier is not None:
        values = values * multiplier(points, r[None, :])
    return values


def _direct(f: Evaluable, spec: KernelSpec, eps: float, x: np.ndarray, multiplier: Optional[Multiplier] = None,
            absolute: bool = False, per_block: Optional[int] = None) -> complex:
    dirs = Directions.for_kernel(spec.omega)
    reach = _reach(f, x)
    if eps >= reach:
        return 0j
    per_block = per_block or numeric("radial_nodes_per_block")
    pieces = geometric_grid(eps, reach, per_block, spec.radial.breakpoints)
    values = []
    for u in pieces:
        r = np.exp(u)
        ray = _ray_values(f, x, r, dirs, multiplier) * _radial(spec, r)[None, :]
        values.append(np.abs(ray) if absolute else ray)
    sums = piecewise_simpson(pieces, values)
    omega = dirs.magnitude if absolute else dirs.omega
    return complex(np.sum(dirs.weights * omega * sums))


def t_eps_direct(f: Evaluable, spec: KernelSpec, eps: float, x) -> complex:
    """T_eps f(x) by polar quadrature of the truncated kernel.

    The radial integral stops at the reach of the support of f.
    """
    if eps <= 0:
        raise DomainError(f"truncation radius must be positive, got {eps}; use the principal value operations")
    return _direct(f, spec, float(eps), as_point(x))


def absolute_bound(f: Evaluable, spec: KernelSpec, eps: float, x) -> float:
    """int_{|y| > eps} |Omega| |h| |f(x - y)| / |y|^n dy, the triangle-inequality majorant of T_eps f(x)."""
    if eps <= 0:
        raise DomainError(f"truncation radius must be positive, got {eps}")
    return float(_direct(f, spec, float(eps), as_point(x), absolute=True).real)


@dataclass(frozen=True)
class RepresentationValue:
    """n int A_{eps,t} f(x) dt/t evaluated on a geometric t-grid."""

    value: complex
    integral: complex
    tail: complex
    tail_bound: float
    error: float
    t_range: Tuple[float, float]
    correction: complex = 0j
    head_estimate: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Convert value for JSON serialization"""
        return {
            "value": [self.value.real, self.value.imag],
            "integral": [self.integral.real, self.integral.imag],
            "tail": [self.tail.real, self.tail.imag],
            "correction": [self.correction.real, self.correction.imag],
            "tail_bound": self.tail_bound,
            "error_estimate": self.error,
            "head_estimate": self.head_estimate,
            "t_range": list(self.t_range),
        }


def _zero_representation() -> RepresentationValue:
    return RepresentationValue(value=0j, integral=0j, tail=0j, tail_bound=0.0, error=0.0, t_range=(0.0, 0.0))


def representation_integral(f: Evaluable, spec: KernelSpec, eps: float, x: np.ndarray,
                    multiplier: Optional[Multiplier] = None, multiplier_bound: float = 1.0,
                    base: Optional[np.ndarray] = None, tail_blocks: Optional[int] = None,
                    per_block: Optional[int] = None, strict: bool = True) -> RepresentationValue:
    """Representation-formula evaluation shared by every operator.

    For eps = 0, ``base`` holds the value of F at r -> 0 along each
    direction; the ray integrals are then accumulated for F - base and
    (h - h(0)), and the base part is added back in closed form.
    """
    n = 2
    dirs = Directions.for_kernel(spec.omega)
    h = spec.radial
    reach = _reach(f, x)
    rho = dirs.rho
    rho_max = float(rho.max())
    if rho_max == 0 or (eps > 0 and eps >= reach):
        return _zero_representation()
    per_block = per_block or numeric("t_nodes_per_block")
    tail_blocks = TAIL_BLOCKS if tail_blocks is None else tail_blocks
    coeff = dirs.weights * dirs.sign

    if eps > 0:
        t_min = eps / rho_max
        lo = eps
    else:
        if base is None or h.h0 is None:
            raise ConfigurationError("principal value evaluation needs h(0) and the r -> 0 ray values",
                                     field="radial.h0")
        t_min = 2.0 ** (-numeric("pv_levels")) / rho_max
        lo = min(0.5 * t_min * rho_max, 0.25 * reach)
    u = _log_grid(lo, reach, per_block, h.breakpoints)
    r = np.exp(u)
    hv = _radial(spec, r)
    rn = r**n
    rays = _ray_values(f, x, r, dirs, multiplier)

    if eps > 0:
        table = RayTable(u, hv[None, :] * rays * rn[None, :])

        def moment(s: np.ndarray) -> np.ndarray:
            return table(np.minimum(s, reach))
    else:
        h0 = complex(h.h0)
        base = np.asarray(base, dtype=complex)
        table = RayTable(u, hv[None, :] * (rays - base[:, None]) * rn[None, :])
        shared = RayTable(u, ((hv - h0) * rn)[None, :])

        def moment(s: np.ndarray) -> np.ndarray:
            s = np.minimum(s, reach)
            return table(s) + base[:, None] * (shared(s) + h0 * s**n / n)

    t_max = reach / rho_max * 2.0**tail_blocks
    tu = _log_grid(t_min, t_max, per_block)
    t = np.exp(tu)
    values = moment(rho[:, None] * t[None, :])
    averages = t ** (-n) * np.sum(coeff[:, None] * values, axis=0)
    integral = complex(n * integrate.simpson(averages, x=tu))
    coarse = complex(n * integrate.simpson(averages[::2], x=tu[::2]))
    error = abs(integral - coarse)

    # every ray with t rho >= R has saturated; the rest is bounded by |F| int |h| r^{n-1}
    saturated = complex(np.sum(coeff * moment(np.full((len(dirs), 1), reach))[:, 0]))
    tail = saturated * t_max ** (-n)
    magnitude = RayTable(u, (np.abs(hv) * rn)[None, :])
    short = (rho > 0) & (rho * t_max < reach)
    remaining = magnitude(np.full(int(short.sum()), reach)) - magnitude(rho[short] * t_max)
    sup_f = float(f.sup_norm) * multiplier_bound
    tail_bound = float(sup_f * np.sum(dirs.weights[short] * np.abs(remaining)) * t_max ** (-n))
    head = float(n * abs(averages[0])) if eps == 0 else 0.0

    value = integral + tail
    logger.debug("representation at x=%s eps=%g: value=%s tail_bound=%.3e error=%.3e", x, eps, value,
                 tail_bound, error)
    result = RepresentationValue(value=value, integral=integral, tail=tail, tail_bound=tail_bound,
                                 error=error + head, t_range=(float(t_min), float(t_max)), head_estimate=head)
    scale = abs(value) + sup_f
    if strict and tail_bound + error + head > tolerance("representation_error") * max(scale, 1e-300):
        raise RefinementRequestError(
            f"representation at x={x.tolist()} eps={eps:g}: tail bound {tail_bound:.2e} and quadrature "
            f"estimate {error + head:.2e} exceed {tolerance('representation_error'):g} of scale {scale:.3e}"
        )
    return result


def t_eps_rep(f: Evaluable, spec: KernelSpec, eps: float, x, tail_blocks: Optional[int] = None,
              strict: bool = True) -> RepresentationValue:
    """T_eps f(x) through n int_0^inf A_{eps,t} f(x) dt/t.

    A_{eps,t} vanishes for t <= eps / rho_max, so the grid starts there. Above
    t_max the saturated part is added exactly; ``tail_bound`` covers the rays
    that have not reached the support boundary yet.
    """
    if eps <= 0:
        raise DomainError(f"truncation radius must be positive, got {eps}; use pv_rep")
    return representation_integral(f, spec, float(eps), as_point(x), tail_blocks=tail_blocks, strict=strict)


def a_eps_t(f: Evaluable, spec: KernelSpec, eps: float, t: float, x) -> complex:
    """A_{eps,t} f(x) = t^{-n} int_{tS minus B(0,eps)} f(x - y) h(|y|) sgn Omega(y) dy."""
    if t <= 0:
        raise DomainError(f"dilation must be positive, got {t}")
    if eps < 0:
        raise DomainError(f"truncation radius must be nonnegative, got {eps}")
    n = 2
    x = as_point(x)
    dirs = Directions.for_kernel(spec.omega)
    rho = dirs.rho
    top = float(t * rho.max())
    if top <= eps:
        return 0j
    reach = _reach(f, x)
    hi = min(top, reach)
    lo = eps if eps > 0 else 1e-12 * hi
    if lo >= hi:
        return 0j
    u = _log_grid(lo, hi, numeric("t_nodes_per_block"), spec.radial.breakpoints)
    r = np.exp(u)
    rays = _ray_values(f, x, r, dirs, None)
    table = RayTable(u, _radial(spec, r)[None, :] * rays * (r**n)[None, :])
    values = table(np.minimum(t * rho, hi)[:, None])[:, 0]
    return complex(t ** (-n) * np.sum(dirs.weights * dirs.sign * values))


def _k_multiplier(spec: KernelSpec, x: np.ndarray) -> Multiplier:
    k = spec.k

    def multiplier(points: np.ndarray, r: np.ndarray) -> np.ndarray:
        return np.asarray(k(np.broadcast_to(x, points.shape), points), dtype=complex)

    return multiplier


def t_eps_nonconv(f: Evaluable, spec: KernelSpec, eps: float, x,
                  strict: bool = True) -> Tuple[complex, RepresentationValue]:
    """(direct, representation) for the kernel Omega(x - y) h(|x - y|) k(x, y) / |x - y|^n."""
    if eps <= 0:
        raise DomainError(f"truncation radius must be positive, got {eps}")
    if spec.k is None:
        raise ConfigurationError("non-convolution evaluation needs a factor k(x, y)", field="k")
    if spec.k_bound is None:
        raise ConfigurationError("a non-convolution factor needs a declared sup bound", field="k_bound")
    x = as_point(x)
    multiplier = _k_multiplier(spec, x)
    direct = _direct(f, spec, float(eps), x, multiplier)
    rep = representation_integral(f, spec, float(eps), x, multiplier, multiplier_bound=float(spec.k_bound), strict=strict)
    return direct, rep


def moment_defect(kernel: AngularKernel, order: int) -> float:
    """max over |alpha| = order of |int theta^alpha Omega(theta) dtheta|."""
    if order < 0:
        raise DomainError("moment order must be nonnegative")
    dirs = Directions.for_kernel(kernel)
    c, s = dirs.directions[:, 0], dirs.directions[:, 1]
    moments = [abs(np.sum(dirs.weights * dirs.omega * c**j * s ** (order - j))) for j in range(order + 1)]
    return float(max(moments))


def modulus_dini(a: LipschitzField, x, order: int = 8) -> float:
    """int_0^1 w_x(t) dt/t from dyadic Gauss-Legendre pieces; +inf when the pieces do not decay."""
    x = np.asarray(x, dtype=float)
    pieces = []
    for k in range(MODULUS_LEVELS + 1):
        nodes, weights = gl_interval(math.log(2.0 ** (-k - 1)), math.log(2.0 ** (-k)), order)
        pieces.append(float(np.sum(weights * a.modulus(x, np.exp(nodes)))))
    pieces = np.asarray(pieces)
    total = float(pieces.sum())
    if total == 0:
        return 0.0
    if pieces[-MODULUS_TAIL_LEVELS:].sum() > 0.01 * total:
        logger.info("modulus pieces of %s at x=%s do not decay near 0", a.label, x.tolist())
        return math.inf
    return total


@dataclass(frozen=True)
class CommutatorValue:
    """Truncated or principal-value commutator at one point."""

    order: int
    epsilon: float
    direct: Optional[complex]
    representation: RepresentationValue
    multiplier_term: complex = 0j

    @property
    def value(self) -> complex:
        return self.representation.value + self.multiplier_term

    def to_dict(self) -> Dict[str, Any]:
        """Convert value for JSON serialization"""
        data: Dict[str, Any] = {
            "order": self.order,
            "epsilon": self.epsilon,
            "value": [self.value.real, self.value.imag],
            "representation": self.representation.to_dict(),
            "multiplier_term": [self.multiplier_term.real, self.multiplier_term.imag],
        }
        if self.direct is not None:
            data["direct"] = [self.direct.real, self.direct.imag]
        return data


def commutator_multiplier(a: LipschitzField, x: np.ndarray, order: int) -> Multiplier:
    """((a(x) - a(x - y)) / |y|)^order at the points x - y."""
    ax = float(a(x[None, :])[0])

    def multiplier(points: np.ndarray, r: np.ndarray) -> np.ndarray:
        return ((ax - a(points)) / r) ** order

    return multiplier


def commutator(f: Evaluable, spec: KernelSpec, a: LipschitzField, order: int, eps: float, x,
               strict: bool = True) -> CommutatorValue:
    """The order-k Calderon commutator of the kernel of ``spec`` at x.

    eps > 0 evaluates the truncated operator both ways. eps = 0 is the
    principal value: it needs the order-k moments of Omega to vanish and a
    Dini modulus of a at x, and adds
    h(0) f(x) int Omega(theta) (grad a(x) . theta)^k log rho(theta) dtheta.
    """
    if order < 1:
        raise DomainError(f"commutator order must be >= 1, got {order}")
    if eps < 0:
        raise DomainError(f"truncation radius must be nonnegative, got {eps}")
    x = as_point(x)
    multiplier = commutator_multiplier(a, x, order)
    bound = a.lipschitz_bound**order
    if eps > 0:
        direct = _direct(f, spec, float(eps), x, multiplier)
        rep = representation_integral(f, spec, float(eps), x, multiplier, multiplier_bound=bound, strict=strict)
        return CommutatorValue(order=order, epsilon=float(eps), direct=direct, representation=rep)

    kernel = spec.omega
    defect = moment_defect(kernel, order)
    if defect > tolerance("moment") * max(1.0, kernel.norm_l1()):
        raise UnsupportedHypothesisError(
            f"order-{order} moments of {kernel.label} do not vanish (defect {defect:.3e})"
        )
    if not math.isfinite(modulus_dini(a, x)):
        raise UnsupportedHypothesisError(f"the modulus of {a.label} at x={x.tolist()} is not Dini")
    if spec.radial.h0 is None:
        raise ConfigurationError("principal value evaluation needs a declared h(0)", field="radial.h0")
    dirs = Directions.for_kernel(kernel)
    slope = (dirs.directions @ a.gradient(x[None, :])[0]) ** order
    fx = value_at(f, x)
    base = fx * slope
    rep = representation_integral(f, spec, 0.0, x, multiplier, multiplier_bound=bound, base=base, strict=strict)
    term = complex(spec.radial.h0) * complex(np.sum(dirs.weights * dirs.omega * base * dirs.log_rho()))
    return CommutatorValue(order=order, epsilon=0.0, direct=None, representation=rep, multiplier_term=term)


def truncation_bound(spec: KernelSpec, f: Evaluable, eta: float, eps: float) -> float:
    """||Omega||_1 ||grad f||_inf int_eta^eps |h(r)| dr, the bound on |T_eta f - T_eps f|."""
    if not (0 <= eta <= eps):
        raise DomainError(f"truncation bound needs 0 <= eta <= eps, got {eta}, {eps}")
    grad = getattr(f, "grad_bound", None)
    if grad is None:
        raise DomainError("truncation bound needs a declared gradient bound")
    h = spec.radial
    radial = radial_quad(lambda r: np.abs(np.asarray(h(r))), eta, eps, "dr", h.breakpoints)
    return float(spec.omega.norm_l1() * grad * radial)


def t_eps_grid(f: GridFunction, spec: KernelSpec, eps: float) -> GridFunction:
    """T_eps on a grid function: discrete convolution with the truncated kernel sampled at lattice offsets."""
    if eps <= 0:
        raise DomainError(f"truncation radius must be positive, got {eps}")
    n = f.dimension
    if n != spec.dimension:
        raise DomainError(f"grid dimension {n} does not match kernel dimension {spec.dimension}")
    spacing = f.spacing
    axes = [np.arange(-(size - 1), size) * spacing[i] for i, size in enumerate(f.resolution)]
    offsets = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    dist = np.linalg.norm(offsets, axis=-1)
    kernel = np.zeros(dist.shape, dtype=complex)
    outside = dist > eps
    kernel[outside] = (spec.omega.evaluate(offsets[outside]) * _radial(spec, dist[outside])
                       / dist[outside] ** n)
    values = signal.fftconvolve(np.asarray(f.values, dtype=complex), kernel * f.cell_volume, mode="same")
    return f.with_values(values, label=f"T_{eps:g} {f.label}")
