"""Command-line front end.

Each command parses its inputs, runs the corresponding workflow, prints a
short human summary to stdout, and (with --out) writes a machine report as
deterministic JSON: same configuration, byte-identical file.  Exit codes:
0 success, 1 a reproduction check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .classify import classify_metric
from .expressions import builtin, builtin_names, parse
from .families import (
    GridSpec,
    SurfaceBerwaldFamily,
    build_landsberg_family,
    compatibility_residuals,
    surface_berwald_spray,
    zhou_class_spray,
)
from .geodesics import integrate
from .geometry import berwald_curvature, curvature_packet, embed_point, spray_pq
from .report import build_report, classification_csv, render_json, trajectory_csv
from .sources import as_source, source_for

__all__ = ["main"]

_REPRO_SEED = 1168


def _source_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--phi", metavar="expr",
                       help="metric profile phi(r, s) in closed form")
    group.add_argument("--builtin", metavar="name",
                       help="registry metric: " + ", ".join(builtin_names()))
    p.add_argument("--param", action="append", default=[], metavar="k=expr",
                   help="builtin parameter (repeatable)")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="finslerlab",
        description="spherically symmetric Finsler metrics: sprays, "
                    "curvatures, families, geodesics")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    cls = sub.add_parser("classify",
                         help="sweep a grid and classify the metric")
    _source_flags(cls)
    cls.add_argument("--dim", type=int, required=True, metavar="n")
    cls.add_argument("--grid", metavar="r0,r1,nr,ns")
    cls.add_argument("--tol", type=float, metavar="t")
    cls.add_argument("--out", metavar="path")
    cls.add_argument("--csv", metavar="path", help="per-point dump")

    cur = sub.add_parser("curvature",
                         help="curvature tensors and scalars at one point")
    _source_flags(cur)
    cur.add_argument("--at", required=True, metavar="r,s,u")
    cur.add_argument("--dim", type=int, required=True, metavar="n")
    cur.add_argument("--out", metavar="path")

    fam = sub.add_parser("family", help="build and validate metric families")
    fsub = fam.add_subparsers(dest="variant", required=True, metavar="variant")

    fl = fsub.add_parser("landsberg",
                         help="close (c1, c3, c) into a Landsberg spray family")
    fl.add_argument("--c1", required=True, metavar="expr")
    fl.add_argument("--c3", required=True, metavar="expr")
    fl.add_argument("--c", required=True, type=float)
    fl.add_argument("--interval", required=True, metavar="lo,hi")
    fl.add_argument("--out", metavar="path")

    fs = fsub.add_parser("surface-berwald",
                         help="n = 2 Berwald-flat spray from radial coefficients")
    for flag in ("--a", "--b0", "--b1", "--b2", "--b3"):
        fs.add_argument(flag, required=True, metavar="expr")
    fs.add_argument("--out", metavar="path")

    fz = fsub.add_parser("zhou", help="two-dimensional Berwald class spray")
    fz.add_argument("--c", required=True, type=float)
    fz.add_argument("--c0", required=True, metavar="expr")
    fz.add_argument("--out", metavar="path")

    geo = sub.add_parser("geodesic", help="integrate the geodesic flow (RK4)")
    _source_flags(geo)
    geo.add_argument("--x", required=True, metavar="csv", help="start position")
    geo.add_argument("--y", required=True, metavar="csv", help="start velocity")
    geo.add_argument("--step", required=True, type=float, metavar="h")
    geo.add_argument("--steps", required=True, type=int, metavar="N")
    geo.add_argument("--out", metavar="path")
    geo.add_argument("--csv", metavar="path", help="per-step dump")

    rep = sub.add_parser("reproduce", help="rerun a frozen worked example")
    rep.add_argument("target",
                     choices=["example1", "example2", "zhou-discrepancy"])
    rep.add_argument("--out", metavar="path")
    return p


# -- shared input parsing ----------------------------------------------------


def _resolve_source(args):
    if args.phi is not None:
        if args.param:
            raise ValueError("--param is only meaningful with --builtin")
        return as_source(parse(args.phi)), {"phi": args.phi}
    params = {}
    for item in args.param:
        key, sep, val = item.partition("=")
        if not sep or not key or not val:
            raise ValueError(f"--param expects name=expression, got {item!r}")
        params[key] = val
    if args.builtin not in builtin_names():
        raise ValueError(f"unknown builtin {args.builtin!r}; choose from "
                         + ", ".join(builtin_names()))
    metric = builtin(args.builtin, params or None)
    return source_for(metric), {"builtin": args.builtin, "params": params}


def _floats(text: str, count: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise ValueError(
            f"{what} expects {count} comma-separated values, got {text!r}")
    return [float(v) for v in parts]


def _vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValueError(f"{what} expects comma-separated numbers, "
                         f"got {text!r}") from None


def _cone(src) -> tuple[float, float]:
    return getattr(src, "tau_lo", -1.0), getattr(src, "tau_hi", 1.0)


# -- command handlers ----------------------------------------------------------
# each returns (payload, summary lines, checks or None, csv text or None)


def _cmd_classify(args):
    src, srcconf = _resolve_source(args)
    grid = None
    if args.grid is not None:
        r0, r1, nr, ns = _floats(args.grid, 4, "--grid")
        lo, hi = _cone(src)
        grid = GridSpec(r0, r1, int(nr), int(ns), tau_lo=lo, tau_hi=hi,
                        eps=0.05)
    rep = classify_metric(src, args.dim, grid=grid, tol=args.tol)
    config = {"source": srcconf, "dim": args.dim, "grid": rep.grid,
              "tol": rep.tolerance, "bounded_tol": rep.bounded_tol}
    results = {
        "verdict": rep.verdict,
        "is_riemannian": rep.is_riemannian,
        "is_berwald": rep.is_berwald,
        "is_landsberg": rep.is_landsberg,
        "regular": rep.regular,
        "spray_defined": rep.spray_defined,
        "points": len(rep.points),
        "notes": list(rep.notes),
    }
    maxima = {"riemannian": rep.riemann, "berwald": rep.berwald,
              "landsberg": rep.landsberg}
    summary = [f"verdict: {rep.verdict}"]
    for label, worst in maxima.items():
        summary.append(f"  {label} residual max {worst.max_value:.3e} "
                       f"at (r, s) = ({worst.at_r:.6g}, {worst.at_s:.6g})")
    summary.append(f"  regular: {rep.regular}   "
                   f"spray defined: {rep.spray_defined}")
    summary.extend(f"  note: {note}" for note in rep.notes)
    payload = build_report("classify", config, results, maxima,
                           verdict=rep.verdict)
    csv_text = classification_csv(rep.points) if args.csv else None
    return payload, summary, None, csv_text


def _cmd_curvature(args):
    src, srcconf = _resolve_source(args)
    r, s, u = _floats(args.at, 3, "--at")
    frame = embed_point(r, s, u, args.dim)
    jet = src.phi_jet(r, s)
    pk = curvature_packet(jet, frame)
    config = {"source": srcconf, "dim": args.dim,
              "at": {"r": r, "s": s, "u": u}}
    results = {
        "phi": jet.value,
        "P": pk.pq.P, "P_s": pk.pq.P_s, "P_ss": pk.pq.P_ss,
        "P_sss": pk.pq.P_sss,
        "Q": pk.pq.Q, "Q_s": pk.pq.Q_s, "Q_ss": pk.pq.Q_ss,
        "Q_sss": pk.pq.Q_sss,
        "sigma": [pk.sigma0, pk.sigma1, pk.sigma2, pk.sigma3],
        "rho": [pk.rho0, pk.rho1, pk.rho2, pk.rho3],
        "x": frame.x, "y": frame.y,
        "metric": pk.g, "metric_inverse": pk.g_inv,
        "spray_matrix": pk.Gmat,
        "berwald": pk.B, "mean_berwald": pk.E, "landsberg": pk.L,
        "H": pk.H, "H_s": pk.H_s,
        "K": pk.K, "lambda1": pk.lambda1, "lambda2": pk.lambda2,
        "L1": pk.L1, "L2": pk.L2, "E_scalar": pk.Escalar,
    }
    maxima = {
        "berwald": {"max_value": float(np.abs(pk.B).max())},
        "mean_berwald": {"max_value": float(np.abs(pk.E).max())},
        "landsberg": {"max_value": float(np.abs(pk.L).max())},
    }
    summary = [
        f"phi = {jet.value:.12g}   P = {pk.pq.P:.12g}   Q = {pk.pq.Q:.12g}",
        f"H = {pk.H:.12g}   L1 = {pk.L1:.12g}   L2 = {pk.L2:.12g}",
        "max |berwald| = {:.3e}   max |landsberg| = {:.3e}".format(
            maxima["berwald"]["max_value"], maxima["landsberg"]["max_value"]),
    ]
    return build_report("curvature", config, results, maxima), summary, None, None


def _cmd_family_landsberg(args):
    lo, hi = _floats(args.interval, 2, "--interval")
    fam = build_landsberg_family(args.c1, args.c3, args.c, (lo, hi))
    radii = fam.grid_r
    config = {"c1": args.c1, "c3": args.c3, "c": args.c,
              "interval": [lo, hi], "grid_points": len(radii),
              "tol": fam.tol}
    results = {
        "r": radii,
        "c0": [fam.c0(float(r)) for r in radii],
        "c2": [fam.c2(float(r)) for r in radii],
        "closure_A_residuals": fam.a_values,
        "closure_B_residuals": fam.b_values,
    }
    maxima = {"closure_A": {"max_value": fam.a_residual},
              "closure_B": {"max_value": fam.b_residual}}
    mid = float(radii[len(radii) // 2])
    summary = [
        f"family closed on [{lo:g}, {hi:g}] with {len(radii)} radii",
        f"  c0({mid:g}) = {fam.c0(mid):.12g}   c2({mid:g}) = {fam.c2(mid):.12g}",
        f"  closure residuals: A {fam.a_residual:.3e}   B {fam.b_residual:.3e}",
    ]
    payload = build_report("family landsberg", config, results, maxima)
    return payload, summary, None, None


def _berwald_sweep(spray_at, grid: GridSpec):
    worst, at = -1.0, (math.nan, math.nan)
    for r in grid.r_values():
        for tau in grid.tau_values():
            s = float(r * tau)
            pq = spray_at(float(r), s)
            b = berwald_curvature(pq, embed_point(float(r), s, 1.0, 2))
            size = float(np.abs(b).max())
            if size > worst:
                worst, at = size, (float(r), s)
    return worst, at


def _cmd_family_surface(args):
    fam = SurfaceBerwaldFamily(a=args.a, b0=args.b0, b1=args.b1,
                               b2=args.b2, b3=args.b3)
    grid = GridSpec(0.5, 2.0, 8, 9, tau_lo=-1.0, tau_hi=1.0, eps=0.05)
    worst, at = _berwald_sweep(lambda r, s: surface_berwald_spray(fam, r, s),
                               grid)
    config = {"a": args.a, "b0": args.b0, "b1": args.b1, "b2": args.b2,
              "b3": args.b3, "grid": grid}
    results = {"berwald_max": worst, "at_r": at[0], "at_s": at[1]}
    maxima = {"berwald": {"max_value": worst, "at_r": at[0], "at_s": at[1]}}
    summary = [f"max |berwald curvature| = {worst:.3e} "
               f"at (r, s) = ({at[0]:.6g}, {at[1]:.6g})"]
    payload = build_report("family surface-berwald", config, results, maxima)
    return payload, summary, None, None


def _cmd_family_zhou(args):
    grid = GridSpec(0.5, 2.0, 8, 9, tau_lo=-1.0, tau_hi=1.0, eps=0.05)
    worst, at = _berwald_sweep(
        lambda r, s: zhou_class_spray(args.c, args.c0, r, s), grid)
    rows_p, rows_q = [], []
    for r in grid.r_values():
        row_p, row_q = [], []
        for tau in grid.tau_values():
            pq = zhou_class_spray(args.c, args.c0, float(r), float(r * tau))
            row_p.append(pq.P)
            row_q.append(pq.Q)
        rows_p.append(row_p)
        rows_q.append(row_q)
    config = {"c": args.c, "c0": args.c0, "grid": grid}
    results = {"r": grid.r_values(), "tau": grid.tau_values(),
               "P": rows_p, "Q": rows_q,
               "berwald_max": worst, "at_r": at[0], "at_s": at[1]}
    maxima = {"berwald": {"max_value": worst, "at_r": at[0], "at_s": at[1]}}
    summary = [f"class spray sampled on {grid.nr} x {grid.ns} grid",
               f"  max |berwald curvature| = {worst:.3e}"]
    payload = build_report("family zhou", config, results, maxima)
    return payload, summary, None, None


def _cmd_geodesic(args):
    src, srcconf = _resolve_source(args)
    x0 = _vector(args.x, "--x")
    y0 = _vector(args.y, "--y")
    tr = integrate(src, x0, y0, step=args.step, n_steps=args.steps)
    config = {"source": srcconf, "x": x0, "y": y0,
              "step": args.step, "steps": args.steps}
    results = {
        "t": tr.t, "x": tr.x, "y": tr.y, "F": tr.F,
        "F0": float(tr.F[0]),
        "max_drift": tr.max_drift,
        "completed": tr.completed,
        "exit_reason": tr.exit_reason,
        "points": len(tr.t),
    }
    maxima = {"F_drift": {"max_value": tr.max_drift}}
    summary = [f"{len(tr.t) - 1} steps of {args.step:g}, "
               f"relative F-drift {tr.max_drift:.3e}"]
    if not tr.completed:
        summary.append(f"  stopped early: {tr.exit_reason}")
    payload = build_report("geodesic", config, results, maxima)
    csv_text = trajectory_csv(tr) if args.csv else None
    return payload, summary, None, csv_text


# -- reproduction workflows ------------------------------------------------------


def _summary_for_checks(checks: dict) -> list[str]:
    return [f"  [{'PASS' if ok else 'FAIL'}] {name}"
            for name, ok in checks.items()]


def _reproduce_family_example(name, c1, c3, c, c0_coeff):
    fam = build_landsberg_family(c1, c3, c, (0.4, 2.2))
    rng = np.random.default_rng(_REPRO_SEED)
    radii = rng.uniform(0.5, 2.0, size=10)
    c0_err = max(abs(fam.c0(float(r)) + c0_coeff / r ** 4) for r in radii)
    c2_err = max(abs(fam.c2(float(r)) - 0.5) for r in radii)
    src = source_for(builtin(name))
    rep = classify_metric(src, 3)
    witness = abs(spray_pq(src.phi_jet(1.0, 0.0)).P_ss)
    ell0 = src.ell_value(1.0, 0.0)
    em0 = src.em_value(1.0, 0.0)
    checks = {
        "coefficient_closed_forms": c0_err <= 1e-12 and c2_err <= 1e-12,
        "landsberg_residual": rep.landsberg.max_value < 1e-7,
        "berwald_witness": abs(witness - 0.5) <= 1e-9,
        "verdict": rep.verdict == "landsberg_nonberwald",
    }
    if name == "example2":
        checks["log_derivatives_at_(1,0)"] = (
            abs(ell0 + 1.0) <= 1e-12 and abs(em0) <= 1e-12)
    config = {"target": name, "dim": 3, "family": {"c1": c1, "c3": c3, "c": c},
              "grid": rep.grid, "seed": _REPRO_SEED}
    results = {
        "c0_max_error": c0_err,
        "c2_max_error": c2_err,
        "berwald_witness_P_ss": witness,
        "log_derivatives_at_(1,0)": [ell0, em0],
        "classification": rep.verdict,
        "regular": rep.regular,
        "spray_defined": rep.spray_defined,
        "checks": checks,
    }
    maxima = {"riemannian": rep.riemann, "berwald": rep.berwald,
              "landsberg": rep.landsberg}
    summary = [f"{name}: verdict {rep.verdict}, "
               f"|P_ss|(1, 0) = {witness:.12g}"]
    summary += _summary_for_checks(checks)
    payload = build_report(f"reproduce {name}", config, results, maxima,
                           verdict=rep.verdict)
    return payload, summary, checks, None


def _reproduce_zhou():
    grid = GridSpec(0.5, 2.0, 12, 21, tau_lo=-1.0, tau_hi=1.0, eps=0.05)
    src5 = source_for(builtin("zhou2d_r5"))
    src6 = source_for(builtin("zhou2d_r6"))
    worst_c1_r5 = worst_c2_scaled = worst_c2_r6 = -1.0
    for r in grid.r_values():
        r = float(r)
        for tau in grid.tau_values():
            s = float(r * tau)
            pq = zhou_class_spray(-1.0, "1/r^2", r, s)
            for src, is_r5 in ((src5, True), (src6, False)):
                jet = src.phi_jet(r, s, 1, 1)
                unit = jet * (1.0 / jet.value)
                c1v, c2v = compatibility_residuals(unit, pq)
                if is_r5:
                    worst_c1_r5 = max(worst_c1_r5, abs(c1v))
                    worst_c2_scaled = max(worst_c2_scaled,
                                          abs(c2v * r * r - 1.0))
                else:
                    worst_c2_r6 = max(worst_c2_r6, abs(c2v))

    rng = np.random.default_rng(_REPRO_SEED)
    spray_gap = -1.0
    for _ in range(20):
        r = float(rng.uniform(0.6, 1.9))
        s = float(r * rng.uniform(-0.8, 0.8))
        w = math.sqrt(r * r - s * s)
        pq = spray_pq(src6.phi_jet(r, s))
        p_ref = -s / r ** 2 - w / r ** 2
        q_ref = 1.0 / r ** 2 - s ** 2 / (2.0 * r ** 4) - s * w / r ** 4
        spray_gap = max(spray_gap, abs(pq.P - p_ref), abs(pq.Q - q_ref))

    checks = {
        "r5_C1_vanishes": worst_c1_r5 < 1e-8,
        "r5_C2_r2_over_phi_is_one": worst_c2_scaled < 1e-8,
        "r6_C2_vanishes": worst_c2_r6 < 1e-8,
        "r6_spray_closed_form": spray_gap < 1e-9,
    }
    verdict = ("discrepancy_confirmed" if all(checks.values())
               else "discrepancy_not_confirmed")
    config = {"target": "zhou-discrepancy", "class_spray": {"c": -1.0,
              "c0": "1/r^2"}, "grid": grid, "seed": _REPRO_SEED}
    results = {
        "r5_C1_max": worst_c1_r5,
        "r5_C2_r2_over_phi_minus_1_max": worst_c2_scaled,
        "r6_C2_max": worst_c2_r6,
        "r6_spray_gap": spray_gap,
        "checks": checks,
    }
    maxima = {
        "r5_C1": {"max_value": worst_c1_r5},
        "r5_C2_scaled": {"max_value": worst_c2_scaled},
        "r6_C2": {"max_value": worst_c2_r6},
        "r6_spray_gap": {"max_value": spray_gap},
    }
    summary = [
        "zhou discrepancy: same class spray (c = -1, c0 = 1/r^2)",
        f"  1/r^5 profile: max |C1| = {worst_c1_r5:.3e}, "
        f"max |C2 r^2/phi - 1| = {worst_c2_scaled:.3e}",
        f"  1/r^6 profile: max |C2| = {worst_c2_r6:.3e}, "
        f"spray gap {spray_gap:.3e}",
    ]
    summary += _summary_for_checks(checks)
    payload = build_report("reproduce zhou-discrepancy", config, results,
                           maxima, verdict=verdict)
    return payload, summary, checks, None


def _cmd_reproduce(args):
    if args.target == "example1":
        return _reproduce_family_example(
            "example1", "1/r^2", "1/r^2", 1.0 / (2.0 * math.sqrt(2.0)), 3.0)
    if args.target == "example2":
        return _reproduce_family_example("example2", "0", "1/r^2", 0.5, 2.0)
    return _reproduce_zhou()


# -- entry point -----------------------------------------------------------------


def _dispatch(args):
    if args.command == "classify":
        return _cmd_classify(args)
    if args.command == "curvature":
        return _cmd_curvature(args)
    if args.command == "family":
        if args.variant == "landsberg":
            return _cmd_family_landsberg(args)
        if args.variant == "surface-berwald":
            return _cmd_family_surface(args)
        return _cmd_family_zhou(args)
    if args.command == "geodesic":
        return _cmd_geodesic(args)
    return _cmd_reproduce(args)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        payload, summary, checks, csv_text = _dispatch(args)
    except (ValueError, KeyError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in summary:
        print(line)
    if getattr(args, "out", None):
        Path(args.out).write_text(render_json(payload) + "\n")
        print(f"report written to {args.out}")
    if csv_text is not None and getattr(args, "csv", None):
        Path(args.csv).write_text(csv_text)
        print(f"points written to {args.csv}")
    if checks is not None and not all(checks.values()):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
