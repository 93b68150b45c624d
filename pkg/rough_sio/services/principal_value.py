"""
Principal values: the c_Omega constant, the epsilon -> 0 limit of the
truncations and the representation n int A_t f dt/t + h(0) c_Omega f(x).
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from rough_sio.config.settings import numeric, tolerance
from rough_sio.errors import DomainError, UnsupportedHypothesisError
from rough_sio.models.kernel import AngularKernel, KernelSpec
from rough_sio.services.invariants import cancels, dini_check
from rough_sio.services.operators import (
    Directions,
    Evaluable,
    RepresentationValue,
    as_point,
    representation_integral,
    t_eps_direct,
    truncation_bound,
    value_at,
)
from rough_sio.utils.quadrature import richardson

logger = logging.getLogger(__name__)


def c_omega(kernel: AngularKernel) -> complex:
    """(1/n) int Omega log|Omega| over the sphere; cells with Omega = 0 contribute 0."""
    if not cancels(kernel):
        logger.warning("c_Omega requested for %s, which does not cancel", kernel.label)
    magnitude = kernel.abs_values
    logs = np.where(magnitude > 0, np.log(np.where(magnitude > 0, magnitude, 1.0)), 0.0)
    return complex(np.sum(kernel.values * logs * kernel.measures) / kernel.dimension)


@dataclass(frozen=True)
class PVLimit:
    """T_eps f(x) for eps = 2^{-j} with the extrapolated limit."""

    value: complex
    epsilons: List[float]
    values: List[complex]
    differences: List[float]
    bounds: List[float]
    bound_ok: bool
    cauchy: bool

    @property
    def has_limit(self) -> bool:
        return self.cauchy

    def to_dict(self) -> Dict[str, Any]:
        """Convert limit record for JSON serialization"""
        return {
            "value": [self.value.real, self.value.imag],
            "epsilons": self.epsilons,
            "values": [[v.real, v.imag] for v in self.values],
            "differences": self.differences,
            "bounds": self.bounds,
            "bound_ok": self.bound_ok,
            "cauchy": self.cauchy,
        }


def pv_limit(f: Evaluable, spec: KernelSpec, x, levels: Optional[int] = None) -> PVLimit:
    """Extrapolated lim T_eps f(x) with the sequence of consecutive differences.

    Each difference is compared with ||Omega||_1 ||grad f||_inf int |h| over
    the dyadic step. The sequence is flagged non-Cauchy when its differences
    stop decreasing over the second half of the levels.
    """
    levels = numeric("pv_levels") if levels is None else int(levels)
    if levels < 2:
        raise DomainError("the limit needs at least three truncation levels")
    x = as_point(x)
    epsilons = [2.0**-j for j in range(levels + 1)]
    values = [t_eps_direct(f, spec, eps, x) for eps in epsilons]
    differences = [abs(b - a) for a, b in zip(values[:-1], values[1:])]
    bounds = [truncation_bound(spec, f, epsilons[j + 1], epsilons[j]) for j in range(levels)]
    slack = 1.0 + tolerance("cross_method")
    floor = 1e-12 * max(1.0, float(f.sup_norm))
    bound_ok = all(d <= b * slack + floor for d, b in zip(differences, bounds))
    late = differences[levels // 2:]
    cauchy = all(later <= earlier * 1.05 + floor for earlier, later in zip(late[:-1], late[1:]))
    if cauchy:
        value = complex(richardson(values[-2], values[-1], order=1.0))
    else:
        value = values[-1]
        logger.warning("truncations at x=%s do not settle (last differences %s)", x.tolist(), late[-3:])
    return PVLimit(
        value=value,
        epsilons=epsilons,
        values=values,
        differences=differences,
        bounds=bounds,
        bound_ok=bound_ok,
        cauchy=cauchy,
    )


def pv_rep(f: Evaluable, spec: KernelSpec, x, tail_blocks: Optional[int] = None,
           strict: bool = True) -> RepresentationValue:
    """Tf(x) = n int_0^inf A_t f(x) dt/t + h(0) c_Omega f(x).

    For small t the rays integrate h (f(x - y) - f(x)) and f(x) (h - h(0)),
    which is where the Dini condition enters.
    """
    kernel = spec.omega
    h = spec.radial
    dini = dini_check(h)
    if not math.isfinite(dini):
        raise UnsupportedHypothesisError(f"h = {h.label} fails the Dini condition at the origin")
    if not cancels(kernel):
        raise UnsupportedHypothesisError(f"{kernel.label} does not cancel over the sphere")
    x = as_point(x)
    fx = value_at(f, x)
    dirs = Directions.for_kernel(kernel)
    base = np.full(len(dirs), fx, dtype=complex)
    rep = representation_integral(f, spec, 0.0, x, base=base, tail_blocks=tail_blocks, strict=strict)
    constant = complex(np.sum(dirs.weights * dirs.omega * dirs.log_rho()))
    correction = complex(h.h0) * constant * fx
    return RepresentationValue(
        value=rep.value + correction,
        integral=rep.integral,
        tail=rep.tail,
        tail_bound=rep.tail_bound,
        error=rep.error,
        t_range=rep.t_range,
        correction=correction,
        head_estimate=rep.head_estimate,
    )
