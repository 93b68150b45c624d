"""
Command line interface: ``rough-sio <command> ...``.

Every command reads JSON documents, prints a JSON result (or writes it with
--out) and optionally writes plot-ready CSV. Library errors exit with status
2 and a one-line message; a failing verification run exits with status 1.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from rough_sio.config.documents import load_field, load_function, load_kernel, load_points, load_weight, write_json
from rough_sio.config.settings import default_log_level
from rough_sio.config.suite_config import load_suite_config
from rough_sio.errors import RoughSIOError
from rough_sio.models.factor import KernelFactor
from rough_sio.models.grid import GridFunction, MaximalConfig
from rough_sio.models.report import jsonable, write_rows
from rough_sio.models.starset import StarSet, set_integrals, strata as star_strata
from rough_sio.services.covering import build_cover, verify_cover
from rough_sio.services.maximal import empirical_norm, hl_max, m_fractional, m_h, m_sh
from rough_sio.services.operators import commutator, t_eps_direct, t_eps_rep
from rough_sio.services.principal_value import c_omega, pv_limit, pv_rep
from rough_sio.services.runner import run_all
from rough_sio.services.star_geometry import outline
from rough_sio.services.weight_check import MODES, rect_condition

logger = logging.getLogger(__name__)

GRID_HALF_WIDTH = 4.0
GRID_RESOLUTION = 48


def _emit(data: Dict[str, Any], out: Optional[str]) -> None:
    data = jsonable(data)
    if out:
        write_json(out, data)
        logger.info("Wrote %s", out)
    else:
        print(json.dumps(data, indent=2, sort_keys=True))


def _pair(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


def _as_grid(f, half_width: float, resolution: int) -> GridFunction:
    if isinstance(f, GridFunction):
        return f
    return f.on_grid(half_width, resolution)


# commands

def cmd_set_info(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    star = StarSet.from_kernel(spec.omega)
    record = set_integrals(star)
    strata = [s.to_dict() for s in star_strata(star)]
    _emit({"kernel": spec.omega.label, "integrals": record.to_dict(), "strata": strata,
           "residual_mass": star.residual_mass}, args.out)
    if args.csv:
        write_rows(os.path.join(args.csv, "strata.csv"), [{"m": s["m"], "measure": s["measure"]} for s in strata])
        if star.dimension == 2:
            write_rows(os.path.join(args.csv, "outline.csv"), [{"x": x, "y": y} for x, y in outline(star)])
    return 0


def cmd_cover(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    star = StarSet.from_kernel(spec.omega)
    cover = build_cover(star, m_max=args.m_max)
    verification = verify_cover(cover, star, samples=args.samples)
    _emit({"cover": cover.to_dict(), "verification": verification.to_dict()}, args.out)
    if args.csv:
        rows = []
        for rect in cover.all_rectangles():
            for i, (x, y) in enumerate(rect.corners()):
                rows.append({"m": rect.m, "k": rect.k, "vertex": i, "x": float(x), "y": float(y)})
        write_rows(os.path.join(args.csv, "cover.csv"), rows)
    return 0


def cmd_weight_check(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    w = load_weight(args.weight)
    cover = build_cover(StarSet.from_kernel(spec.omega))
    result = rect_condition(w, args.p, args.r, cover, mode=args.mode)
    _emit({"weight": w.to_dict(), "cover": cover.label, **result.to_dict()}, args.out)
    if args.csv:
        write_rows(os.path.join(args.csv, "weight_constants.csv"), result.rows())
    return 0 if result.certified else 1


def cmd_maximal(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    f = _as_grid(load_function(args.function), args.half_width, args.resolution)
    cfg = MaximalConfig.for_grid(f, mu=args.mu)
    H = KernelFactor.from_radial(spec.radial)
    if args.op == "hl":
        op = lambda g: hl_max(g, cfg)  # noqa: E731
    elif args.op == "mh":
        op = lambda g: m_h(g, H, cfg)  # noqa: E731
    elif args.op == "msh":
        star = StarSet.from_kernel(spec.omega)
        op = lambda g: m_sh(g, star, H, cfg)  # noqa: E731
    else:
        op = lambda g: m_fractional(g, H, args.mu, cfg)  # noqa: E731
    image = op(f)
    data: Dict[str, Any] = {"op": args.op, "config": cfg.to_dict(), "result": image.to_dict()}
    if args.weight:
        probe = empirical_norm(op, args.p, load_weight(args.weight), [f])
        data["norm_ratio"] = probe.to_dict()
    _emit(data, args.out)
    if args.csv:
        values = np.asarray(image.values)
        middle = values.shape[1] // 2
        x_axis = image.axes()[0]
        rows = [{"x": float(x), "value": float(np.abs(v))} for x, v in zip(x_axis, values[:, middle])]
        write_rows(os.path.join(args.csv, "maximal_slice.csv"), rows)
    return 0


def cmd_apply(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    f = load_function(args.function)
    rows = []
    for x in load_points(args.points):
        row: Dict[str, Any] = {"point": x.tolist()}
        if args.mode in ("direct", "both"):
            row["value_direct"] = _pair(t_eps_direct(f, spec, args.eps, x))
        if args.mode in ("rep", "both"):
            rep = t_eps_rep(f, spec, args.eps, x, strict=not args.lenient)
            row["value_rep"] = _pair(rep.value)
            row["tail_bound"] = rep.tail_bound
            row["error_estimate"] = rep.error
        rows.append(row)
    _emit({"kernel": spec.omega.label, "radial": spec.radial.label, "epsilon": args.eps, "values": rows}, args.out)
    if args.csv:
        write_rows(os.path.join(args.csv, "apply.csv"), rows)
    return 0


def cmd_pv(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    f = load_function(args.function)
    rows = []
    for x in load_points(args.points):
        limit = pv_limit(f, spec, x, levels=args.levels)
        rep = pv_rep(f, spec, x, strict=not args.lenient)
        rows.append({"point": x.tolist(), "value_limit": _pair(limit.value), "value_rep": _pair(rep.value),
                     "tail_bound": rep.tail_bound, "cauchy": limit.cauchy, "bound_ok": limit.bound_ok})
    _emit({"kernel": spec.omega.label, "c_omega": _pair(c_omega(spec.omega)), "values": rows}, args.out)
    if args.csv:
        write_rows(os.path.join(args.csv, "pv.csv"), rows)
    return 0


def cmd_commutator(args: argparse.Namespace) -> int:
    spec = load_kernel(args.kernel)
    a = load_field(args.field)
    f = load_function(args.function)
    rows = []
    for x in load_points(args.points):
        value = commutator(f, spec, a, args.order, args.eps, x, strict=not args.lenient)
        row = {"point": x.tolist(), "value_rep": _pair(value.value),
               "tail_bound": value.representation.tail_bound}
        if value.direct is not None:
            row["value_direct"] = _pair(value.direct)
        rows.append(row)
    _emit({"kernel": spec.omega.label, "field": a.to_dict(), "order": args.order, "epsilon": args.eps,
           "values": rows}, args.out)
    if args.csv:
        write_rows(os.path.join(args.csv, "commutator.csv"), rows)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = load_suite_config(args.config)
    if args.strict:
        cfg = cfg.model_copy(update={"strict": True})
    report = run_all(cfg, out=args.out, csv_dir=args.csv_dir, progress=not args.quiet)
    summary = {"verdict": "pass" if report.passed else "fail", "check_count": len(report.records),
               "failed": report.failures}
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if report.passed else 1


# parser

def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="Write the JSON result to this path instead of stdout.")
    parser.add_argument("--csv", metavar="DIR", help="Also write plot-ready CSV files into DIR.")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--half-width", type=float, default=GRID_HALF_WIDTH,
                        help=f"Half width of the sampling box for analytic functions (default: {GRID_HALF_WIDTH}).")
    parser.add_argument("--resolution", type=int, default=GRID_RESOLUTION,
                        help=f"Grid nodes per axis for analytic functions (default: {GRID_RESOLUTION}).")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rough-sio",
                                     description="Rough singular integrals: star sets, covers, weights and operators.")
    parser.add_argument("--log-level", default=default_log_level(),
                        help="Logging level (default: WARNING or ROUGH_SIO_LOG_LEVEL).")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("set-info", help="Set integrals and strata of S_Omega.")
    p.add_argument("kernel")
    _add_output(p)
    p.set_defaults(handler=cmd_set_info)

    p = commands.add_parser("cover", help="Build and verify a stratified starlike cover.")
    p.add_argument("kernel")
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--samples", type=int, default=10000)
    _add_output(p)
    p.set_defaults(handler=cmd_cover)

    p = commands.add_parser("weight-check", help="Rectangle weight condition on the kernel's cover.")
    p.add_argument("kernel")
    p.add_argument("weight")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--r", type=float, default=1.25)
    p.add_argument("--mode", choices=MODES, default="ca")
    _add_output(p)
    p.set_defaults(handler=cmd_weight_check)

    p = commands.add_parser("maximal", help="Maximal operators on a grid function.")
    p.add_argument("kernel")
    p.add_argument("function")
    p.add_argument("--op", choices=("hl", "mh", "msh", "frac"), default="mh")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--weight")
    p.add_argument("--p", type=float, default=2.0)
    _add_grid(p)
    _add_output(p)
    p.set_defaults(handler=cmd_maximal)

    p = commands.add_parser("apply", help="Truncated operator T_eps f at points.")
    p.add_argument("kernel")
    p.add_argument("function")
    p.add_argument("--mode", choices=("direct", "rep", "both"), default="both")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--lenient", action="store_true", help="Report large tail bounds instead of failing.")
    _add_output(p)
    p.set_defaults(handler=cmd_apply)

    p = commands.add_parser("pv", help="Principal value T f at points, by limit and by representation.")
    p.add_argument("kernel")
    p.add_argument("function")
    p.add_argument("--points", required=True)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--lenient", action="store_true")
    _add_output(p)
    p.set_defaults(handler=cmd_pv)

    p = commands.add_parser("commutator", help="Calderon commutator of order k at points.")
    p.add_argument("kernel")
    p.add_argument("field")
    p.add_argument("function")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--eps", type=float, default=0.0, help="Truncation radius; 0 is the principal value.")
    p.add_argument("--points", required=True)
    p.add_argument("--lenient", action="store_true")
    _add_output(p)
    p.set_defaults(handler=cmd_commutator)

    p = commands.add_parser("verify", help="Run the full verification suite.")
    p.add_argument("--config", default=None, help="Suite config JSON (default: packaged default_suite.json).")
    p.add_argument("--strict", action="store_true", help="Let probe records gate the verdict.")
    p.add_argument("--out", default=None, help="Report JSON path.")
    p.add_argument("--csv-dir", default=None, help="Directory for the per-family CSV bundle.")
    p.add_argument("--quiet", action="store_true", help="Hide the progress bar.")
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=str(args.log_level).upper(),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except RoughSIOError as e:
        print(f"rough-sio: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
