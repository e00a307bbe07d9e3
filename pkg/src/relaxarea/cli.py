"""Command-line front end: one subcommand per experiment.

Subcommands: ``area``, ``energy``, ``jacobian``, ``recover``, ``relax``,
``counterexample``, ``subadd``, ``sweep``.  A JSON config file may supply
any flag value (flags win).  Exit codes: 0 success, 2 invalid arguments,
3 quadrature/extraction non-convergence, 4 I/O failure.

Outputs are UTF-8 CSV with LF line endings and 17 significant digits, so
identical configurations reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from . import relaxation as rx
from .chains import chain_csv_text, chain_mass
from .domains import Ball, Cone, make_domain
from .errors import (
    AmbiguousWinding,
    InvalidGeometry,
    InvalidParams,
    IoFailure,
    NoConvergence,
    RelaxAreaError,
)
from .fields import make_example_field, minors2
from .quadrature import area_functional, integrate, sobolev_energy
from .recovery import (
    cone_defect_field_4d,
    cone_defect_filler,
    cone_dipole,
    cone_extension_report,
    counterexample_sequence,
    disk_defect_field_3d,
    graph_mass,
    homogeneous_cone_extension,
    linear_disk_filler,
    point_removal_report,
    remove_point_singularity,
    vortex_smoothing_2d,
)
from .topology import GridSpec, extract_lines_3d, extract_vortices_2d

TOL_MIN, TOL_MAX = 1e-10, 1e-2


@dataclass
class RunConfig:
    """Validated run parameters shared by the subcommands."""

    subcommand: str
    tol: float
    out: str | None
    threads: int | None
    seed: int

    def __post_init__(self):
        if not TOL_MIN <= self.tol <= TOL_MAX:
            raise InvalidParams(f"tolerance must lie in [{TOL_MIN:g}, {TOL_MAX:g}]")


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _build_field(args):
    kind = args.field
    if kind == "vortex":
        return make_example_field("vortex", d=args.d)
    if kind == "planar_vortex":
        return make_example_field("planar_vortex")
    if kind == "vortex_chain":
        return make_example_field("vortex_chain", m=args.m)
    if kind == "sphere_vortex":
        return make_example_field("sphere_vortex")
    if kind == "constant":
        return make_example_field("constant", value=(1.0, 0.0))
    raise InvalidParams(f"unknown field {kind!r}")


def _build_domain(args):
    name = args.domain
    table = {
        "ball2": ("ball", 2), "ball3": ("ball", 3),
        "cube2": ("cube", 2), "cube3": ("cube", 3),
    }
    if name not in table:
        raise InvalidGeometry(f"unknown domain {name!r}")
    kind, n = table[name]
    if kind == "ball":
        return make_domain("ball", n=n, radius=args.radius)
    return make_domain("cube", n=n, half_side=args.radius)


def _write(text, path):
    rx.write_text(text, path)


def _scalar_csv(pairs):
    lines = ["quantity,value,error_estimate,nodes"]
    for name, res in pairs:
        lines.append(f"{name},{res.value:.17g},{res.error_estimate:.17g},"
                     f"{res.nodes_used}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommand runners
# ---------------------------------------------------------------------------


def _run_area(args, cfg):
    field = _build_field(args)
    dom = _build_domain(args)
    res = area_functional(field, dom, cfg.tol, mc_seed=cfg.seed)
    print(f"area={res.value:.12g} err={res.error_estimate:.3g} "
          f"nodes={res.nodes_used}")
    if cfg.out:
        _write(_scalar_csv([("area", res)]), cfg.out)
    return 0


def _run_energy(args, cfg):
    field = _build_field(args)
    dom = _build_domain(args)
    grad, tva, minor = sobolev_energy(field, dom, cfg.tol, mc_seed=cfg.seed)
    line = (f"tv={grad.value:.12g} tv_area={tva.value:.12g} "
            f"m2={minor.value:.12g}")
    if field.singular_set is not None:
        rhs = tva.value + math.pi * chain_mass(field.singular_set)
        line += f" relaxed_rhs={rhs:.12g}"
    print(line)
    if cfg.out:
        _write(_scalar_csv([("tv", grad), ("tv_area", tva), ("m2", minor)]),
               cfg.out)
    return 0


def _run_jacobian(args, cfg):
    field = _build_field(args)
    grid = GridSpec(field.n, args.grid, half_side=args.radius)
    if field.n == 2:
        chain = extract_vortices_2d(field, grid)
    else:
        chain = extract_lines_3d(field, grid)
    print(f"cells={len(chain)} mass={chain_mass(chain):.12g}")
    if cfg.out:
        _write(chain_csv_text(chain), cfg.out)
    return 0


def _run_recover(args, cfg):
    name = args.construction
    if name == "smoothing":
        base = make_example_field("vortex", d=args.d)
        f = vortex_smoothing_2d(base, (0.0, 0.0), args.d, args.eps)
        rep = graph_mass(f, Ball(2, 1.0), cfg.tol)
        print(f"area={rep.mass.value:.12g} tv={rep.grad.value:.12g} "
              f"m2={rep.minor.value:.12g}")
    elif name == "dipole":
        base = make_example_field("planar_vortex")
        f = cone_dipole(base, (-1.0, 1.0), args.d, args.eps)
        rep = graph_mass(f, Cone(3, (-1.0, 1.0), args.eps), cfg.tol)
        print(f"cone_mass={rep.mass.value:.12g} cone_tv={rep.grad.value:.12g} "
              f"cone_m2={rep.minor.value:.12g}")
    elif name == "point":
        base = disk_defect_field_3d()
        delta = args.delta if args.delta else args.eps**2
        f = remove_point_singularity(base, (0, 0, 0), args.eps, delta,
                                     linear_disk_filler(args.eps))
        ring, core = point_removal_report(f, (0, 0, 0), args.eps, delta, cfg.tol)
        print(f"ring_mass={ring.mass.value:.12g} core_mass={core.mass.value:.12g}")
    elif name == "cone4":
        base = cone_defect_field_4d()
        delta = args.delta if args.delta else args.eps**2
        f = homogeneous_cone_extension(base, (-1.0, 1.0), args.eps, delta,
                                       cone_defect_filler((-1.0, 1.0), args.eps))
        shell, core = cone_extension_report(f, (-1.0, 1.0), args.eps, delta,
                                            cfg.tol)
        print(f"shell_tv={shell.grad.value:.12g} shell_m2={shell.minor.value:.12g} "
              f"core_mass={core.mass.value:.12g}")
    else:
        raise InvalidParams(f"unknown construction {name!r}")
    return 0


_STUDIES = ("smoothing", "dipole", "dipole-grad", "chain", "cyl2d")


def _run_relax(args, cfg):
    name = args.study
    verdicts = {}
    if name == "smoothing":
        report = rx.study_vortex_smoothing(_float_list(args.eps), cfg.tol,
                                           threads=cfg.threads)
        verdicts["tv_vs_2pi"] = rx.strict_bv_check(report, 2 * math.pi)
    elif name == "dipole":
        report = rx.study_cone_dipole(_float_list(args.eps), cfg.tol,
                                      threads=cfg.threads)
    elif name == "dipole-grad":
        report = rx.study_dipole_gradient(_float_list(args.eps), cfg.tol,
                                          threads=cfg.threads)
    elif name == "chain":
        chain = make_example_field("vortex_chain", m=args.m)
        report, ref = rx.study_chain_disk(chain, args.disk, tol=cfg.tol,
                                          threads=cfg.threads)
        verdicts["disk_gap"] = f"{report.limits['area'] - ref:.6g}"
    elif name == "cyl2d":
        report = rx.study_cylinder_analogue_2d(_int_list(args.k), cfg.tol,
                                               threads=cfg.threads)
        verdicts["tv_vs_2pi"] = rx.strict_bv_check(report, 2 * math.pi)
    else:
        raise InvalidParams(f"unknown study {name!r}; choose from {_STUDIES}")
    lim = report.limits
    print(f"study={name} limit_A={lim.get('area', float('nan')):.10g} "
          f"limit_TV={lim.get('tv', float('nan')):.10g} "
          f"limit_M2={lim.get('minor', float('nan')):.10g} "
          + " ".join(f"{k}={v}" for k, v in verdicts.items()))
    if cfg.out:
        _write(rx.report_csv_text(report), cfg.out)
        rx.write_json(rx.report_json_dict(report, verdicts),
                      _json_sibling(cfg.out))
    return 0


def _json_sibling(path):
    return (path[:-4] if path.endswith(".csv") else path) + ".json"


def _run_counterexample(args, cfg):
    ks = _int_list(args.k)
    report = rx.study_counterexample(args.variant, ks, cfg.tol,
                                     radius=args.radius, threads=cfg.threads)
    line = f"variant={args.variant} limit_A={report.limits['area']:.10g}"
    if args.variant == "ball":
        dets = []
        for k in ks:
            f = counterexample_sequence("ball", k)
            res = integrate(
                lambda X: minors2(f.jacobian_many(X))[:, -1],
                Ball(3, 1.0 / k), max(cfg.tol, 1e-9), breaks=f.chart_breaks,
            )
            dets.append(res.value)
        worst = max(abs(v - 4 * math.pi / 3) for v in dets)
        line += f" det_ball_max_dev={worst:.3g}"
    print(line)
    if cfg.out:
        _write(rx.report_csv_text(report), cfg.out)
        rx.write_json(rx.report_json_dict(report), _json_sibling(cfg.out))
    return 0


def _run_subadd(args, cfg):
    report = rx.subadditivity_experiment(
        _float_list(args.radii), _int_list(args.k), cfg.tol, threads=cfg.threads
    )
    print(f"violation={report.violation_witnessed} witness={report.witness} "
          + " ".join(f"min[{r:g}]={report.chosen_min[r]:.6g}"
                     for r in report.radii))
    if cfg.out:
        _write(rx.subadd_csv_text(report), cfg.out)
        rx.write_json(rx.subadd_json_dict(report), _json_sibling(cfg.out))
    return 0


def _run_sweep(args, cfg):
    field_of = {
        "smoothing": lambda eps: vortex_smoothing_2d(
            make_example_field("vortex", d=args.d), (0.0, 0.0), args.d, eps),
        "ball": lambda invk: counterexample_sequence("ball", int(round(1 / invk))),
        "cylinder": lambda invk: counterexample_sequence(
            "cylinder", int(round(1 / invk))),
    }
    if args.family not in field_of:
        raise InvalidParams(f"unknown sweep family {args.family!r}")
    values = _float_list(args.values)
    dom = _build_domain(args)
    lines = ["param,value,error_estimate"]
    for v in values:
        f = field_of[args.family](v)
        if args.quantity == "area":
            res = area_functional(f, dom, cfg.tol)
        else:
            grad, tva, minor = sobolev_energy(f, dom, cfg.tol)
            res = {"tv": grad, "m2": minor}[args.quantity]
        lines.append(f"{v:.17g},{res.value:.17g},{res.error_estimate:.17g}")
    text = "\n".join(lines) + "\n"
    print(f"sweep family={args.family} quantity={args.quantity} "
          f"rows={len(values)}")
    if cfg.out:
        _write(text, cfg.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="relaxarea",
        description="Graph-area functionals and singularity experiments "
                    "for circle-valued maps",
    )
    parser.add_argument("--config", help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    parser._subcommands = sub  # config defaults must reach the subparsers

    def common(p):
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=0x5EED)

    def field_flags(p):
        p.add_argument("--field", default="vortex",
                       choices=["vortex", "planar_vortex", "vortex_chain",
                                "sphere_vortex", "constant"])
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--m", type=int, default=3)

    def domain_flags(p):
        p.add_argument("--domain", default="ball2",
                       choices=["ball2", "ball3", "cube2", "cube3"])
        p.add_argument("--radius", type=float, default=1.0)

    p = sub.add_parser("area", help="graph area of a field over a domain")
    common(p); field_flags(p); domain_flags(p)

    p = sub.add_parser("energy", help="Sobolev energy triple and relaxed RHS")
    common(p); field_flags(p); domain_flags(p)

    p = sub.add_parser("jacobian", help="lattice extraction of the "
                                        "singularity chain")
    common(p); field_flags(p)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--radius", type=float, default=1.0,
                   help="half side of the sampling cube")

    p = sub.add_parser("recover", help="build one recovery map and report "
                                       "its masses")
    common(p)
    p.add_argument("--construction", required=True,
                   choices=["smoothing", "dipole", "point", "cone4"])
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--d", type=int, default=1)

    p = sub.add_parser("relax", help="convergence study along a schedule")
    common(p)
    p.add_argument("--study", required=True, choices=list(_STUDIES))
    p.add_argument("--eps", default="0.2,0.1,0.05,0.025")
    p.add_argument("--k", default="4,8,16,32")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--disk", type=int, default=1)

    p = sub.add_parser("counterexample", help="filling sequences of the 3d "
                                              "vortex")
    common(p)
    p.add_argument("--variant", required=True, choices=["ball", "cylinder"])
    p.add_argument("--k", default="4,8,16,32")
    p.add_argument("--radius", type=float, default=1.0)

    p = sub.add_parser("subadd", help="localized gap bounds and the "
                                      "subadditivity witness")
    common(p)
    p.add_argument("--radii", default="0.2,0.9")
    p.add_argument("--k", default="8,16,32")

    p = sub.add_parser("sweep", help="plot-ready sweep of one quantity")
    common(p); domain_flags(p)
    p.add_argument("--family", default="smoothing",
                   choices=["smoothing", "ball", "cylinder"])
    p.add_argument("--quantity", default="area", choices=["area", "tv", "m2"])
    p.add_argument("--values", default="0.2,0.1,0.05,0.025")
    p.add_argument("--d", type=int, default=1)

    return parser


_RUNNERS = {
    "area": _run_area,
    "energy": _run_energy,
    "jacobian": _run_jacobian,
    "recover": _run_recover,
    "relax": _run_relax,
    "counterexample": _run_counterexample,
    "subadd": _run_subadd,
    "sweep": _run_sweep,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {path}: {exc}", file=sys.stderr)
            return 2
        parser.set_defaults(**defaults)
        for sub in parser._subcommands.choices.values():
            known = {a.dest for a in sub._actions}
            sub.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.subcommand, args.tol, args.out,
                        args.threads, args.seed)
        return _RUNNERS[args.subcommand](args, cfg)
    except (NoConvergence, AmbiguousWinding) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (IoFailure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except RelaxAreaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
