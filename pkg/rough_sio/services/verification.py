"""
Identity suite: the integral identities and bounds the operator theory rests on.

Checks are grouped into independent tasks (one per kernel, per radial
factor, ...) so that run_all can execute them concurrently; identity_suite
runs them in order and collects a Report.
"""
import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from rough_sio.config.catalogue import build_kernel, build_radial
from rough_sio.config.suite_config import KernelChoice, RadialChoice, SuiteConfig
from rough_sio.models.cover import Rectangle
from rough_sio.models.kernel import AngularKernel, RadialFactor
from rough_sio.models.report import CheckRecord, Report
from rough_sio.models.starset import StarSet, dilation_identity, set_integrals
from rough_sio.services.invariants import (
    dini_check,
    hclass_constant,
    hclass_inclusion,
    llogl_norm,
    log_integral_bound,
    radial_log_integral,
    vanishing_log_bound,
)
from rough_sio.services.star_geometry import star_log_bound, star_power_integral, starlike_constant

logger = logging.getLogger(__name__)

Task = Tuple[str, Callable[[], List[CheckRecord]]]

FAMILY = "identities"
# identities are seed-independent; the suite seed only drives probes and sampling checks
IDENTITY_SEED = 1729
VANISHING_RADIUS = 0.125
LOG_BOUND_RADII = (0.5, 1.0, 4.0, 64.0)
POWER_SCALES = (0.25, 1.0, 4.0)

ANCHORS = {
    "dilation": "int_0^inf t^{-n} chi_{tS minus B(0,eps)}(y) dt/t = chi_{|y|>eps} |Omega(y)| / (n |y|^n)",
    "measure": "|S| = (1/n) int |Omega|",
    "sgn": "int_S sgn Omega dy = (1/n) int Omega",
    "logp": "int_S log^+|y| dy <= (1/n^2) ||Omega||_{L log L}",
    "log": "int_S |log|y|| dy <= (1/n^2) (||Omega||_{L log L} + |S^{n-1}|)",
    "strata": "sum_m (m+1) |S_m| <= c_n ||Omega||_{L log L}",
    "strata_constant": "a single c_n serves every kernel of the catalogue",
    "partition":"strata S_m are disjoint and exhaust S",
    "monte_carlo": "|S| from uniform samples of a bounding ball",
    "llogl": "||Omega||_{L log L} >= ||Omega||_1",
    "dyadic_log": "int_a^b |h|^sigma dr/r <= C_h ceil(log2(b/a))",
    "forms": "dyadic, initial-segment and log-average forms of C_h are equivalent",
    "inclusion": "H(sigma_high) is contained in H(sigma_low) by Holder",
    "truncation": "h_eps has a class constant no larger than h",
    "dini": "int_0^1 |h(t) - h(0)| dt/t",
    "vanishing": "int_0^R |h| dr/r <= C1 + C2 log^+ R for h vanishing near 0",
    "star_log": "int_0^1 int_S |h(t|y|)| dy dt/t <= (C1/n + C2/n^2) ||Omega||_{L log L}",
    "starlike": "int_E |h(t|y|)|^sigma dy <= c_n C_h |E| on sets star-shaped about 0",
    "rejection": "h = r^{-1/2} is not of class H(1)",
}


def _record(check_id: str, anchor: str, passed: bool, tol: float, computed=None, bound=None,
            message: str = "") -> CheckRecord:
    return CheckRecord(check_id=check_id, anchor=ANCHORS[anchor], passed=bool(passed), tolerance=float(tol),
                       computed=dict(computed or {}), bound=dict(bound or {}), family=FAMILY, message=message)


def kernel_tag(index: int, choice: KernelChoice) -> str:
    return f"k{index:02d}_{choice.id}_n{choice.dimension}"


def radial_tag(index: int, choice: RadialChoice) -> str:
    return f"h{index:02d}_{choice.kind}"


def build_choice_kernel(choice: KernelChoice) -> AngularKernel:
    return build_kernel(choice.id, choice.params, dimension=choice.dimension)


def build_choice_radial(choice: RadialChoice) -> RadialFactor:
    return build_radial(choice.kind, choice.params, sigma=choice.sigma, h0=choice.h0)


# kernel and star-set identities

def _random_points(dimension: int, count: int, rng: np.random.Generator) -> np.ndarray:
    directions = rng.normal(size=(count, dimension))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return directions * rng.uniform(0.1, 3.0, size=count)[:, None]


def dilation_checks(tag: str, star: StarSet, cfg: SuiteConfig) -> List[CheckRecord]:
    """Numeric against closed form at random points, half of them truncated."""
    tol = cfg.tolerance("identity")
    rng = np.random.default_rng(IDENTITY_SEED)
    points = _random_points(star.dimension, cfg.identity_points, rng)
    worst = 0.0
    evaluated = 0
    for i, y in enumerate(points):
        eps = 0.0 if i % 2 == 0 else 0.25
        if abs(np.linalg.norm(y) - eps) < 1e-3:
            continue
        numeric, closed = dilation_identity(star, y, eps)
        evaluated += 1
        if closed == 0:
            worst = max(worst, abs(numeric))
        else:
            worst = max(worst, abs(numeric - closed) / closed)
    return [_record(f"identity.dilation.{tag}", "dilation", worst <= tol, tol,
                    computed={"max_relative_error": worst, "points": evaluated})]


def set_identity_checks(tag: str, star: StarSet, cfg: SuiteConfig) -> List[CheckRecord]:
    kernel = star.kernel
    n = star.dimension
    equality = cfg.tolerance("equality")
    record = set_integrals(star)
    scale = max(kernel.norm_l1(), 1e-300)
    out = [
        _record(f"identity.measure.{tag}", "measure",
                abs(record.measure - kernel.norm_l1() / n) <= equality * scale, equality,
                computed={"measure": record.measure}, bound={"closed_form": kernel.norm_l1() / n}),
        _record(f"identity.sgn.{tag}", "sgn",
                abs(record.sgn_integral - record.omega_integral_over_n) <= equality * scale, equality,
                computed={"sgn_integral": record.sgn_integral},
                bound={"omega_integral_over_n": record.omega_integral_over_n}),
        _record(f"identity.logp.{tag}", "logp", record.logp_ok, 0.0,
                computed={"integral": record.logp_integral}, bound={"bound": record.logp_bound}),
        _record(f"identity.log.{tag}", "log", record.log_ok, 0.0,
                computed={"integral": record.log_integral}, bound={"bound": record.log_bound}),
        _record(f"identity.strata.{tag}", "strata", record.strata_ok, 0.0,
                computed={"weighted_strata_sum": record.weighted_strata_sum, "c_n": record.strata_constant},
                bound={"c_n_bound": record.strata_constant_bound}),
        _record(f"identity.partition.{tag}", "partition",
                abs(record.strata_total + star.residual_mass - record.measure) <= 1e-10 * max(record.measure, 1.0),
                1e-10, computed={"strata_total": record.strata_total, "residual": star.residual_mass},
                bound={"measure": record.measure}),
    ]
    norm = llogl_norm(kernel)
    out.append(_record(f"identity.llogl.{tag}", "llogl", norm >= kernel.norm_l1() * (1 - 1e-12), 0.0,
                       computed={"llogl_norm": norm}, bound={"l1_norm": kernel.norm_l1()}))
    estimate, error = star.monte_carlo_measure(cfg.monte_carlo_samples, np.random.default_rng(IDENTITY_SEED + 1))
    # standard error implied by the exact measure; sparse sets may see no hits at all
    ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * star.rho_max**n
    p = min(record.measure / ball, 1.0) if ball > 0 else 0.0
    expected_error = ball * math.sqrt(p * (1 - p) / cfg.monte_carlo_samples)
    out.append(_record(f"identity.monte_carlo.{tag}", "monte_carlo",
                       abs(estimate - record.measure) <= 4.0 * expected_error + 1e-12, 4.0,
                       computed={"estimate": estimate, "standard_error": error, "expected_error": expected_error},
                       bound={"measure": record.measure}))
    return out


def kernel_tasks(cfg: SuiteConfig) -> List[Task]:
    tasks: List[Task] = []
    for index, choice in enumerate(cfg.kernels):
        tag = kernel_tag(index, choice)

        def run(choice=choice, tag=tag) -> List[CheckRecord]:
            star = StarSet.from_kernel(build_choice_kernel(choice))
            return set_identity_checks(tag, star, cfg) + dilation_checks(tag, star, cfg)

        tasks.append((f"kernel:{tag}", run))
    tasks.append(("kernel:strata_constant", lambda: strata_constant_checks(cfg)))
    return tasks


def strata_constant_checks(cfg: SuiteConfig) -> List[CheckRecord]:
    """One c_n per dimension covers the whole catalogue; the achieved ratios and their spread are reported.

    The achieved ratio depends on how |Omega| sits between dyadic levels
    (1/n for |Omega| <= 1, tending to 2/n as |Omega| decreases to 1 from
    above), so only the common bound is asserted.
    """
    ratios = {}
    by_dimension = {}
    for index, choice in enumerate(cfg.kernels):
        record = set_integrals(StarSet.from_kernel(build_choice_kernel(choice)))
        if record.llogl <= 0:
            continue
        tag = kernel_tag(index, choice)
        ratios[tag] = record.strata_constant
        by_dimension.setdefault(choice.dimension, []).append(record.strata_constant)
    bounds = {str(n): 2.0 / n for n in sorted(by_dimension)}
    spread = {str(n): max(values) / min(values) - 1.0 if min(values) > 0 else math.inf
              for n, values in sorted(by_dimension.items())}
    passed = bool(ratios) and all(max(values) <= 2.0 / n * (1 + 1e-9) for n, values in by_dimension.items())
    return [_record("identity.strata_constant.catalogue", "strata_constant", passed, 0.0,
                    computed={"c_n": ratios, "spread": spread}, bound={"c_n_bound": bounds})]


# radial-factor identities

def radial_checks(tag: str, h: RadialFactor, cfg: SuiteConfig) -> List[CheckRecord]:
    out: List[CheckRecord] = []
    estimate = hclass_constant(h, h.sigma)
    out.append(_record(f"hclass.forms.{tag}", "forms", estimate.consistent, 0.0, computed=estimate.to_dict(),
                       message="rejected on the probe range" if estimate.rejected else ""))
    if estimate.rejected:
        return out
    c_h = estimate.constant
    for a, b in ((1.0, 8.0), (2.0**-10, 2.0**10)):
        bound = log_integral_bound(h, h.sigma, a, b, c_h)
        out.append(_record(f"hclass.dyadic_log.{tag}.{a:g}-{b:g}", "dyadic_log", bound["holds"], 1e-9,
                           computed={"integral": bound["integral"], "blocks": bound["blocks"]},
                           bound={"bound": bound["bound"]}))
    inclusion = hclass_inclusion(h, 2.0 * h.sigma, h.sigma)
    out.append(_record(f"hclass.inclusion.{tag}", "inclusion", inclusion["holds"], 1e-9, computed=inclusion))
    truncated = hclass_constant(h.truncated(VANISHING_RADIUS), h.sigma)
    out.append(_record(f"hclass.truncation.{tag}", "truncation",
                       truncated.constant <= c_h * (1 + 1e-6), 1e-6,
                       computed={"C_h_eps": truncated.constant}, bound={"C_h": c_h}))
    vanishing = hclass_constant(h.truncated(VANISHING_RADIUS), 1.0)
    if not vanishing.rejected:
        out.extend(vanishing_checks(tag, h.truncated(VANISHING_RADIUS), vanishing.constant))
    if h.h0 is not None:
        dini = dini_check(h)
        out.append(_record(f"hclass.dini.{tag}", "dini", math.isfinite(dini), 0.0, computed={"dini": dini}))
    return out


def vanishing_checks(tag: str, h: RadialFactor, c_h: float) -> List[CheckRecord]:
    constants = vanishing_log_bound(h, c_h)
    worst = -math.inf
    values = {}
    for radius in LOG_BOUND_RADII:
        value = radial_log_integral(h, radius)
        bound = constants["C1"] + constants["C2"] * max(0.0, math.log(radius))
        values[f"R={radius:g}"] = value
        worst = max(worst, value - bound * (1 + 1e-9))
    return [_record(f"hclass.vanishing.{tag}", "vanishing", worst <= 0, 1e-9, computed=values, bound=constants)]


def dini_closed_form_checks(cfg: SuiteConfig) -> List[CheckRecord]:
    tol = cfg.tolerance("identity")
    out = []
    for beta, expected in ((1.0, 1.0), (0.5, 2.0)):
        value = dini_check(build_radial("one_plus_power", {"beta": beta}))
        out.append(_record(f"hclass.dini.one_plus_r^{beta:g}", "dini", abs(value - expected) <= tol * expected,
                           tol, computed={"dini": value}, bound={"closed_form": expected}))
    h = build_radial("constant")
    value = log_integral_bound(h, 1.0, 1.0, 8.0, hclass_constant(h).constant)
    out.append(_record("hclass.dyadic_log.constant_example", "dyadic_log",
                       value["holds"] and abs(value["integral"] - math.log(8.0)) <= tol, tol,
                       computed={"integral": value["integral"]}, bound={"bound": value["bound"]}))
    return out


def radial_tasks(cfg: SuiteConfig) -> List[Task]:
    tasks: List[Task] = [("radial:closed_forms", lambda: dini_closed_form_checks(cfg))]
    for index, choice in enumerate(cfg.radial_factors):
        tag = radial_tag(index, choice)
        tasks.append((f"radial:{tag}", lambda choice=choice, tag=tag: radial_checks(
            tag, build_choice_radial(choice), cfg)))
    return tasks


# star-shaped region bounds

def starlike_regions() -> List[Tuple[str, object]]:
    """Five regions star-shaped about the origin: a ball, two rectangles and two kernel sets."""
    return [
        ("ball", 1.0),
        ("rect_long", Rectangle.planar(0.3, 8.0, 0.125)),
        ("rect_square", Rectangle.planar(0.0, 1.0, 1.0)),
        ("S_cos", StarSet.from_kernel(build_kernel("cos"))),
        ("S_two_arc", StarSet.from_kernel(build_kernel("two_arc"))),
    ]


def starlike_checks(tag: str, h: RadialFactor) -> List[CheckRecord]:
    estimate = hclass_constant(h, h.sigma)
    if estimate.rejected:
        return []
    c_n = starlike_constant(2)
    out = []
    for name, region in starlike_regions():
        worst = 0.0
        values = {}
        for t in POWER_SCALES:
            result = star_power_integral(region, h, h.sigma, t)
            ratio = result["integral"] / (estimate.constant * result["measure"])
            values[f"t={t:g}"] = ratio
            worst = max(worst, ratio)
        out.append(_record(f"starlike.{tag}.{name}", "starlike", worst <= c_n * (1 + 1e-6), 1e-6,
                           computed=values, bound={"c_n": c_n, "C_h": estimate.constant}))
    return out


def star_log_checks(tag: str, h: RadialFactor) -> List[CheckRecord]:
    truncated = h.truncated(VANISHING_RADIUS)
    estimate = hclass_constant(truncated, 1.0)
    if estimate.rejected:
        return []
    out = []
    for name, region in starlike_regions():
        if not isinstance(region, StarSet):
            continue
        result = star_log_bound(region, truncated, estimate.constant)
        out.append(_record(f"star_log.{tag}.{name}", "star_log", result["holds"], 1e-9,
                           computed={"integral": result["integral"]},
                           bound={"bound": result["bound"], "C1": result["C1"], "C2": result["C2"]}))
    return out


def rejection_check() -> List[CheckRecord]:
    h = build_radial("power", {"beta": -0.5})
    estimate = hclass_constant(h, 1.0)
    return [_record("starlike.negative_control.r^-1/2", "rejection", estimate.rejected, 0.0,
                    computed={"rejected": estimate.rejected, "growth": estimate.growth})]


def starlike_tasks(cfg: SuiteConfig) -> List[Task]:
    tasks: List[Task] = [("starlike:negative_control", rejection_check)]
    for index, choice in enumerate(cfg.radial_factors):
        tag = radial_tag(index, choice)

        def run(choice=choice, tag=tag) -> List[CheckRecord]:
            h = build_choice_radial(choice)
            return starlike_checks(tag, h) + star_log_checks(tag, h)

        tasks.append((f"starlike:{tag}", run))
    return tasks


def identity_tasks(cfg: SuiteConfig) -> List[Task]:
    return kernel_tasks(cfg) + radial_tasks(cfg) + starlike_tasks(cfg)


def identity_suite(cfg: SuiteConfig) -> Report:
    """Run every identity check sequentially; failures are report entries, never exceptions."""
    report = Report(title="identity suite", strict=cfg.strict)
    for name, task in identity_tasks(cfg):
        report.extend(run_task(name, task))
    return report


def run_task(name: str, task: Callable[[], List[CheckRecord]]) -> List[CheckRecord]:
    """Run one task, turning an exception into a failing record named after the task."""
    try:
        return task()
    except Exception as e:  # noqa: BLE001 - any failure becomes a report entry
        logger.exception("Check task %s failed", name)
        return [CheckRecord(check_id=f"error.{name.replace(':', '.')}", anchor="task execution", passed=False,
                            tolerance=0.0, family="errors", message=f"{type(e).__name__}: {e}")]
