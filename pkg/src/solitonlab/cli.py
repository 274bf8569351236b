"""Command-line surface for the soliton laboratory.

Commands::

    lab bryant       integrate the 3-d soliton profile and save it as JSON
    lab levels       per-level geometry table as CSV
    lab verify       run all or selected checks, one pass/fail line each
    lab asymptotics  growth-law fit reports as JSON
    lab pick         point-picking sequence as CSV
    lab report       full suite: JSON report, CSV tables, PNG figures

Exit codes: 0 all checks pass (or command succeeded), 1 any check failed,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import asymptotics as asy
from . import bryant, levelsets, models, report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _load_config(args) -> report.SuiteConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
    for key in ("rmax", "tol"):
        val = getattr(args, key, None)
        if val is not None:
            data["r_max" if key == "rmax" else key] = val
    return report.SuiteConfig.from_json(data)


def _integrate(cfg: report.SuiteConfig):
    return bryant.integrate(bryant.seed(eps=cfg.eps), r_max=cfg.r_max,
                            tol=cfg.tol)


def _cmd_bryant(args) -> int:
    cfg = _load_config(args)
    eps = args.eps_seed if args.eps_seed is not None else cfg.eps
    prof = bryant.integrate(bryant.seed(eps=eps), r_max=cfg.r_max,
                            tol=cfg.tol)
    prof.save(args.out)
    print(f"profile: r_max={prof.r_max} f_max={prof.f_max:.6g} "
          f"drift={prof.drift:.3e} -> {args.out}")
    return EXIT_OK


def _cmd_levels(args) -> int:
    cfg = _load_config(args)
    if args.profile:
        prof = bryant.SolitonProfile.load(args.profile)
    else:
        prof = _integrate(cfg)
    top = min(args.max, prof.f_max * 0.999)
    if args.spacing == "log":
        grid = np.geomspace(args.min, top, args.count)
    else:
        grid = np.linspace(args.min, top, args.count)
    tab = levelsets.growth_tables(prof, grid)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "r", "area", "diameter", "grad_norm",
                         "detII_int", "km_int", "volume", "R",
                         "R_times_lambda"])
        writer.writerows(zip(tab["lambda"], tab["r"], tab["area"],
                             tab["diameter"], tab["grad_norm"],
                             tab["detII_int"], tab["km_int"], tab["volume"],
                             tab["R"], tab["R_times_lambda"]))
    print(f"{len(grid)} levels -> {args.out}")
    return EXIT_OK


def _print_result(res):
    mark = {"pass": "PASS", "fail": "FAIL", "measured-only": "MEAS"}[res.status]
    print(f"[{mark}] {res.check_id}: measured={res.measured} "
          f"expected={res.expected}")


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    only = None if args.checks in ([], ["all"]) else args.checks
    results, _ = report.run_suite(cfg, only=only, progress=_print_result)
    failed = sum(r.status == "fail" for r in results)
    print(f"{len(results)} checks: "
          f"{sum(r.status == 'pass' for r in results)} passed, "
          f"{failed} failed, "
          f"{sum(r.status == 'measured-only' for r in results)} measured-only")
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_asymptotics(args) -> int:
    cfg = _load_config(args)
    lo, hi = (float(x) for x in args.window.split(":"))
    prof = _integrate(cfg)
    reports = asy.asymptotic_constants(prof, (lo, hi))
    payload = {name: asdict(rep) for name, rep in sorted(reports.items())}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"growth reports -> {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_pick(args) -> int:
    cfg = _load_config(args)
    if args.model != "cigar-line":
        print(f"unsupported pick model: {args.model}", file=sys.stderr)
        return EXIT_CONFIG
    model = models.CigarLine.from_limit_curvature(args.rhat)
    seq = asy.pick_points(model, j_max=args.jmax,
                          n_sigma=cfg.mesh_sigma, n_theta=cfg.mesh_theta)
    rows = [(p.j, p.q[0], p.q[1], p.r, p.eps, p.A, p.delta, p.lam_level,
             p.lam_ratio, p.r2R) for p in seq.points]
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "s", "sigma", "r", "eps", "A", "delta",
                         "lam_level", "lam_ratio", "r2R"])
        writer.writerows(rows)
    print(f"{len(rows)} points -> {args.out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    cfg = _load_config(args)
    results, ctx = report.run_suite(cfg, progress=_print_result)
    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, "report.json")
    with open(report_path, "w") as fh:
        fh.write(report.report_to_json(cfg, results))
    written = report.emit_plots(ctx, args.out)
    print(f"report -> {report_path}")
    for path in written:
        print(f"  {path}")
    failed = sum(r.status == "fail" for r in results)
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="numerical laboratory for steady soliton geometry")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--tol", type=float, help="integrator tolerance")
        p.add_argument("--rmax", type=float, help="integration range")

    p = sub.add_parser("bryant", help="integrate and save the 3-d profile")
    common(p)
    p.add_argument("--eps-seed", type=float, default=None,
                   help="series seed radius")
    p.add_argument("--out", default="profile.json")
    p.set_defaults(fn=_cmd_bryant)

    p = sub.add_parser("levels", help="per-level geometry table")
    common(p)
    p.add_argument("--profile", help="saved profile JSON (else re-integrate)")
    p.add_argument("--min", type=float, default=1.0)
    p.add_argument("--max", type=float, default=200.0)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--out", default="levels.csv")
    p.set_defaults(fn=_cmd_levels)

    p = sub.add_parser("verify", help="run all or selected checks")
    common(p)
    p.add_argument("checks", nargs="*", default=[],
                   help="check ids (default: all); see --list")
    p.add_argument("--list", action="store_true", help="list check ids")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("asymptotics", help="growth-law fit reports")
    common(p)
    p.add_argument("--window", default="50:200", help="level window lo:hi")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_asymptotics)

    p = sub.add_parser("pick", help="point-picking sequence")
    common(p)
    p.add_argument("--model", default="cigar-line")
    p.add_argument("--rhat", type=float, default=0.5)
    p.add_argument("--jmax", type=int, default=6)
    p.add_argument("--out", default="pick.csv")
    p.set_defaults(fn=_cmd_pick)

    p = sub.add_parser("report", help="full suite with CSVs and figures")
    common(p)
    p.add_argument("--out", default="report")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "list", False):
        for cid in report.check_ids():
            print(cid)
        return EXIT_OK
    try:
        return args.fn(args)
    except report.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
