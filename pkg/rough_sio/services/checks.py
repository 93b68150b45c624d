"""
Check groups for covers, weights, maximal operators and the operator
cross-method matrix. Each builder returns (name, task) pairs in the same
shape as the identity suite so run_all can schedule them together.
"""
import logging
import math
from typing import Dict, List

import numpy as np

from rough_sio.config.catalogue import build_field, build_kernel, build_radial, build_test_function, build_weight
from rough_sio.config.suite_config import SuiteConfig
from rough_sio.errors import UnsupportedHypothesisError
from rough_sio.models.analytic import TestFunction
from rough_sio.models.cover import StratifiedCover
from rough_sio.models.factor import KernelFactor
from rough_sio.models.grid import GridFunction, MaximalConfig
from rough_sio.models.kernel import KernelSpec
from rough_sio.models.report import CheckRecord
from rough_sio.models.starset import StarSet
from rough_sio.services.covering import build_cover, hrect_check, arm_rectangle_cover, verify_cover
from rough_sio.services.maximal import UNIT, cover_domination, domination_bound, hcube_check, hl_max, m_h
from rough_sio.services.operators import TAIL_BLOCKS, commutator, t_eps_direct, t_eps_nonconv, t_eps_rep
from rough_sio.services.principal_value import c_omega, pv_limit, pv_rep
from rough_sio.services.verification import Task, build_choice_kernel, kernel_tag
from rough_sio.services.weight_check import apr_constant, rect_condition, sigma_threshold
from rough_sio.utils.trends import summability

logger = logging.getLogger(__name__)

ARM_COVER_LEVELS = 16
OPERATOR_KERNELS = ("cos", "two_arc", "sign_split")
OPERATOR_RADIALS = (("constant", {"value": 1.0}), ("gaussian", {"scale": 1.0}))


def _record(family: str, check_id: str, anchor: str, passed: bool, tol: float, computed=None, bound=None,
            probe: bool = False, message: str = "") -> CheckRecord:
    return CheckRecord(check_id=check_id, anchor=anchor, passed=bool(passed), tolerance=float(tol),
                       computed=dict(computed or {}), bound=dict(bound or {}), family=family, probe=probe,
                       message=message)


def operator_test_function() -> TestFunction:
    """Smooth compactly supported f shared by the operator checks and probes."""
    return build_test_function("bump", center=[0.25, -0.1], width=1.5)


# covers

def _cover_checks(tag: str, star: StarSet, cfg: SuiteConfig) -> List[CheckRecord]:
    cover = build_cover(star)
    result = verify_cover(cover, star, samples=10000, rng=np.random.default_rng(cfg.seed))
    miss_tol = cfg.tolerance("coverage_miss")
    out = [
        _record("cover", f"cover.coverage.{tag}", "strata are covered up to a set of measure zero",
                result.miss_rate <= miss_tol, miss_tol, computed=result.to_dict()),
        _record("cover", f"cover.constant.{tag}", "sum_k |R_{m,k}| <= c_n |S_m|",
                math.isfinite(cover.global_constant), 0.0,
                computed={"c_n": cover.global_constant, "cap_ratio": cover.cap_ratio}),
    ]
    if star.dimension == 2:
        out.append(_record("cover", f"cover.comparability.{tag}", "longest side of R_{m,k} is comparable to 2^m",
                           cover.comparability <= 4.0, 0.0, computed={"gamma": cover.comparability},
                           bound={"gamma_max": 4.0}))
    if star.kernel.catalogue_id == "sin_power" and star.dimension == 2:
        out.append(_arm_structure_check(tag, cover))
    return out


def _arm_structure_check(tag: str, cover: StratifiedCover) -> CheckRecord:
    """At most two rectangles per stratum; the two-arm strata tilt toward the x_1 axis as m grows.

    Strata whose arcs fill the circle modulo pi get one bounding square, and
    the top stratum can close up across the axis into a single rectangle.
    """
    counts = {m: len(rects) for m, rects in cover.rectangles.items() if m >= 1}
    angles = {m: max(abs(math.remainder(rect.angle, math.pi)) for rect in rects)
              for m, rects in cover.rectangles.items() if m >= 1 and len(rects) == 2}
    levels = sorted(angles)
    decreasing = all(angles[b] < angles[a] for a, b in zip(levels[:-1], levels[1:]))
    return _record("cover", f"cover.arm_structure.{tag}", "two unbounded arms along the x_1 axis",
                   all(c <= 2 for c in counts.values()) and bool(angles) and decreasing, 0.0,
                   computed={"rectangles_per_stratum": counts, "tilt": angles})


def cover_tasks(cfg: SuiteConfig) -> List[Task]:
    tasks: List[Task] = []
    for index, choice in enumerate(cfg.kernels):
        tag = kernel_tag(index, choice)
        tasks.append((f"cover:{tag}", lambda choice=choice, tag=tag: _cover_checks(
            tag, StarSet.from_kernel(build_choice_kernel(choice)), cfg)))
    tasks.append(("cover:arm_family", lambda: arm_family_checks(cfg)))
    tasks.append(("cover:dropped_rectangle", lambda: dropped_rectangle_check(cfg)))
    return tasks


def arm_family_checks(cfg: SuiteConfig) -> List[CheckRecord]:
    arms = build_kernel("dyadic_arms", {"arms": cfg.arm_count})
    star = StarSet.from_kernel(arms)
    cover = arm_rectangle_cover(ARM_COVER_LEVELS, star=star)
    membership = verify_cover(cover, star, samples=10000, rng=np.random.default_rng(cfg.seed))
    volumes = {m: sum(r.volume for r in rects) for m, rects in cover.rectangles.items()}
    sums = summability(volumes, block_ratio=cfg.tolerance("cauchy_block"), decay_fit=cfg.tolerance("decay_fit"))
    estimate = hrect_check(KernelFactor.from_angular(arms), cover)
    sin_star = StarSet.from_kernel(build_kernel("sin_power", {"alpha": 0.5}))
    negative = hrect_check(KernelFactor.from_angular(sin_star.kernel), build_cover(sin_star))
    miss_tol = cfg.tolerance("coverage_miss")
    return [
        _record("cover", "cover.arm_family.membership", "the sets R_j cover S", membership.miss_rate <= miss_tol,
                miss_tol, computed={"miss_rate": membership.miss_rate}),
        _record("cover", "cover.arm_family.summable", "sum_j |R_j| < infinity", sums.certified, 0.0,
                computed=sums.to_dict()),
        _record("cover", "cover.arm_family.hrect", "int_{tR_j} H^sigma <= C |tR_j| for all t > 0 and all j",
                not estimate.failed, cfg.tolerance("growth_exponent"),
                computed={"C": estimate.constant, "growth_exponent": estimate.growth}),
        _record("cover", "cover.canonical_sin.hrect_fails", "the rectangle condition forces bounded Omega",
                negative.failed, cfg.tolerance("growth_exponent"),
                computed={"C": negative.constant, "growth_exponent": negative.growth}),
    ]


def dropped_rectangle_check(cfg: SuiteConfig) -> List[CheckRecord]:
    star = StarSet.from_kernel(build_kernel("two_arc"))
    cover = build_cover(star)
    m = min(cover.rectangles)
    broken = cover.drop_rectangle(m, cover.rectangles[m][0].k)
    result = verify_cover(broken, star, samples=10000, rng=np.random.default_rng(cfg.seed))
    return [_record("cover", "cover.dropped_rectangle.detected", "strata are covered up to a set of measure zero",
                    result.miss_rate > cfg.tolerance("coverage_miss"), cfg.tolerance("coverage_miss"),
                    computed={"miss_rate": result.miss_rate})]


# weights

def _weight_checks(tag: str, choice, cfg: SuiteConfig) -> List[CheckRecord]:
    w = build_weight(choice.family, choice.params)
    cover = arm_rectangle_cover(ARM_COVER_LEVELS)
    out = []
    for p in cfg.p_values:
        mode = "ca" if p <= 2 else "cb"
        result = rect_condition(w, p, cfg.r, cover, mode=mode)
        out.append(_record("weights", f"weights.rect_condition.{tag}.p{p:g}",
                           "sum_{m,k} (m+1) K_{m,k} < infinity", result.certified, cfg.tolerance("cauchy_block"),
                           computed={"summability": result.summability.to_dict() if result.summability else None,
                                     "failed": [list(key) for key in result.failed_entries]},
                           bound={"mode": mode, "r": cfg.r, "sigma_threshold": sigma_threshold(p, cfg.r)}))
        apr = apr_constant(w, p, cfg.r)
        out.append(_record("weights", f"weights.apr.{tag}.p{p:g}",
                           "(avg w)^{1/p} (avg w^{-rp'/p})^{1/rp'} <= K",
                           apr.finite and apr.constant >= 1 - 1e-9, 1e-9, computed=apr.to_dict()))
    return out


def exp_weight_check(cfg: SuiteConfig) -> List[CheckRecord]:
    """exp(x_1) on the long x_1 rectangles of the arm family must not be certified."""
    result = rect_condition(build_weight("exp_x1", {"beta": 1.0}), 2.0, cfg.r, arm_rectangle_cover(6), mode="ca")
    return [_record("weights", "weights.rect_condition.exp_x1.fails", "K_{m,k} grows on long x_1 rectangles",
                    not result.certified, cfg.tolerance("cauchy_block"),
                    computed={"summability": result.summability.to_dict() if result.summability else None})]


def weight_tasks(cfg: SuiteConfig) -> List[Task]:
    tasks: List[Task] = [("weights:exp_x1", lambda: exp_weight_check(cfg))]
    for index, choice in enumerate(cfg.weights):
        tag = f"w{index:02d}_{choice.family}"
        tasks.append((f"weights:{tag}", lambda choice=choice, tag=tag: _weight_checks(tag, choice, cfg)))
    return tasks


# maximal operators

def maximal_grid(cfg: SuiteConfig) -> GridFunction:
    f = build_test_function("plateau", center=[0.3, -0.2], width=2.0, inner=1.0)
    return f.on_grid(cfg.grid_half_width, cfg.grid_resolution)


def _oscillating_factor(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 1.0 + 0.5 * np.sin(x[..., 0]) * np.cos(y[..., 1])


def maximal_factors() -> Dict[str, KernelFactor]:
    return {
        "radial_log_oscillating": KernelFactor.from_radial(build_radial("log_oscillating")),
        "angular_two_arc": KernelFactor.from_angular(build_kernel("two_arc")),
        "x_dependent": KernelFactor.custom(_oscillating_factor, label="1+sin(x1)cos(y2)/2"),
    }


def maximal_checks(cfg: SuiteConfig) -> List[CheckRecord]:
    f = maximal_grid(cfg)
    mcfg = MaximalConfig.for_grid(f)
    plain = hl_max(f, mcfg)
    same = m_h(f, UNIT, mcfg)
    out = [_record("maximal", "maximal.unit_factor.identity", "M_H with H = 1 is the Hardy-Littlewood operator",
                   np.array_equal(np.asarray(plain.values), np.asarray(same.values)), 0.0,
                   computed={"max": float(np.max(plain.values))})]
    for name, H in maximal_factors().items():
        result = domination_bound(f, H, cfg.sigma, mcfg)
        out.append(_record("maximal", f"maximal.domination.{name}",
                           "M_H f <= C_H^{1/sigma} (M |f|^{sigma'})^{1/sigma'}", result.holds, 1e-9,
                           computed=result.to_dict()))
        if H.translation_invariant:
            cube = hcube_check(H, cfg.sigma)
            out.append(_record("maximal", f"maximal.hcube.{name}", "r^{-n} int_{|y|<r} H^sigma dy <= C_H",
                               not cube.rejected, cfg.tolerance("growth_exponent"),
                               computed={"C_H": cube.constant, "growth": cube.growth}))
    return out


def star_domination_checks(cfg: SuiteConfig) -> List[CheckRecord]:
    f = maximal_grid(cfg)
    mcfg = MaximalConfig.for_grid(f)
    out = []
    for kernel_id in ("cos", "two_arc"):
        star = StarSet.from_kernel(build_kernel(kernel_id))
        result = cover_domination(f, star, build_cover(star), UNIT, mcfg)
        out.append(_record("maximal", f"maximal.cover_domination.{kernel_id}", "the sets R_j cover S",
                           result["holds"], 1e-9, computed=result))
    return out


def maximal_tasks(cfg: SuiteConfig) -> List[Task]:
    return [("maximal:domination", lambda: maximal_checks(cfg)),
            ("maximal:starlike", lambda: star_domination_checks(cfg))]


# operator matrix

def operator_spec(kernel_id: str, radial: str, params: Dict) -> KernelSpec:
    return KernelSpec(omega=build_kernel(kernel_id), radial=build_radial(radial, params))


def _cross_method_checks(kernel_id: str, radial: str, params: Dict, cfg: SuiteConfig) -> List[CheckRecord]:
    spec = operator_spec(kernel_id, radial, params)
    f = operator_test_function()
    tol = cfg.tolerance("cross_method")
    tag = f"{kernel_id}.{radial}"
    worst = 0.0
    rows = []
    for x in cfg.probe_points:
        for eps in cfg.eps_list:
            direct = t_eps_direct(f, spec, eps, x)
            rep = t_eps_rep(f, spec, eps, x, strict=False)
            gap = abs(rep.value - direct) / (abs(direct) + f.sup_norm)
            worst = max(worst, gap)
            rows.append({"x": x, "eps": eps, "direct": direct, "rep": rep.value, "tail_bound": rep.tail_bound,
                         "error_estimate": rep.error})
    out = [_record("operators", f"operators.cross_method.{tag}", "T_eps f = n int A_{eps,t} f dt/t",
                   worst <= tol, tol, computed={"max_scaled_gap": worst, "rows": rows})]

    x, eps = cfg.probe_points[0], cfg.eps_list[-1]
    coarse = t_eps_rep(f, spec, eps, x, tail_blocks=TAIL_BLOCKS, strict=False)
    fine = t_eps_rep(f, spec, eps, x, tail_blocks=TAIL_BLOCKS + 1, strict=False)
    out.append(_record("operators", f"operators.tail_refinement.{tag}", "the t-integral converges at infinity",
                       fine.tail_bound <= 0.5 * coarse.tail_bound + 1e-300, 0.5,
                       computed={"tail_bound": fine.tail_bound}, bound={"previous": coarse.tail_bound}))

    worst_pv = 0.0
    settled = True
    pv_rows = []
    for x in cfg.probe_points:
        limit = pv_limit(f, spec, x)
        rep = pv_rep(f, spec, x, strict=False)
        gap = abs(rep.value - limit.value) / (abs(limit.value) + f.sup_norm)
        worst_pv = max(worst_pv, gap)
        settled = settled and limit.has_limit and limit.bound_ok
        pv_rows.append({"x": x, "limit": limit.value, "rep": rep.value, "correction": rep.correction})
    out.append(_record("operators", f"operators.principal_value.{tag}",
                       "Tf = n int_0^inf A_t f dt/t + h(0) c_Omega f", worst_pv <= tol, tol,
                       computed={"max_scaled_gap": worst_pv, "rows": pv_rows}))
    out.append(_record("operators", f"operators.truncation_limit.{tag}", "the convergence is uniform",
                       settled, tol, computed={"cauchy_and_bounded": settled}))
    return out


def c_omega_checks() -> List[CheckRecord]:
    two_arc = c_omega(build_kernel("two_arc"))
    expected = 0.5 * math.pi * math.log(3.0)
    odd = c_omega(build_kernel("cos"))
    sign = c_omega(build_kernel("arcs", {"cells": [[-0.5 * math.pi, 0.5 * math.pi, 1.0],
                                                   [0.5 * math.pi, 1.5 * math.pi, -1.0]]}))
    anchor = "c_Omega = (1/n) int Omega log|Omega|"
    return [
        _record("operators", "operators.c_omega.two_arc", anchor, abs(two_arc - expected) <= 1e-8 * expected, 1e-8,
                computed={"c_omega": two_arc}, bound={"closed_form": expected}),
        _record("operators", "operators.c_omega.odd", anchor, abs(odd) < 1e-10, 1e-10, computed={"c_omega": odd}),
        _record("operators", "operators.c_omega.unimodular", anchor, abs(sign) < 1e-10, 1e-10,
                computed={"c_omega": sign}),
    ]


def commutator_checks(cfg: SuiteConfig) -> List[CheckRecord]:
    f = operator_test_function()
    tol = cfg.tolerance("cross_method")
    x = cfg.probe_points[1]
    eps = cfg.eps_list[1]
    spec = operator_spec("cos", "constant", {"value": 1.0})

    linear = build_field("linear")
    v = np.asarray(linear.vector, dtype=float)
    value = commutator(f, spec, linear, 1, eps, x, strict=False)
    reduced_kernel = spec.omega.multiplied(lambda u: u @ v, label="cos*(v.theta)")
    reduced = t_eps_direct(f, KernelSpec(omega=reduced_kernel, radial=spec.radial), eps, x)
    scale = abs(reduced) + f.sup_norm

    wave = build_field("sinusoid")
    sinusoid = commutator(f, spec, wave, 1, eps, x, strict=False)
    wave_gap = abs(sinusoid.representation.value - sinusoid.direct) / (abs(sinusoid.direct) + f.sup_norm * wave.lipschitz_bound)

    try:
        commutator(f, spec, linear, 1, 0.0, x, strict=False)
        refused = False
    except UnsupportedHypothesisError:
        refused = True

    nonconv = KernelSpec(omega=build_kernel("two_arc"), radial=spec.radial,
                         k=lambda a, b: 1.0 + 0.5 * np.cos(a[..., 0] - b[..., 1]), k_bound=1.5)
    direct, rep = t_eps_nonconv(f, nonconv, eps, x, strict=False)
    nonconv_gap = abs(rep.value - direct) / (abs(direct) + 1.5 * f.sup_norm)
    return [
        _record("operators", "operators.commutator.linear_reduction",
                "a linear: the commutator is the operator with kernel Omega(theta)(v . theta)",
                abs(value.direct - reduced) <= 1e-9 * scale, 1e-9,
                computed={"commutator": value.direct}, bound={"reduced": reduced}),
        _record("operators", "operators.commutator.cross_method", "commutators have the A_t representation",
                wave_gap <= tol, tol, computed={"max_scaled_gap": wave_gap, "value": sinusoid.to_dict()}),
        _record("operators", "operators.commutator.moment_refusal",
                "the principal value needs vanishing moments of order k", refused, 0.0,
                computed={"refused": refused}),
        _record("operators", "operators.nonconv.cross_method", "bounded k(x, y) leaves the representation intact",
                nonconv_gap <= tol, tol, computed={"max_scaled_gap": nonconv_gap, "direct": direct,
                                                  "representation": rep.value}),
    ]


def operator_tasks(cfg: SuiteConfig) -> List[Task]:
    tasks: List[Task] = [("operators:c_omega", c_omega_checks),
                         ("operators:commutator", lambda: commutator_checks(cfg))]
    for kernel_id in OPERATOR_KERNELS:
        for radial, params in OPERATOR_RADIALS:
            tasks.append((f"operators:{kernel_id}.{radial}",
                          lambda k=kernel_id, h=radial, p=params: _cross_method_checks(k, h, p, cfg)))
    return tasks
