"""Command-line front end: verification suites, family solves, curve tracing,
reference-table reproduction, and plot emission.

Exit codes: 0 success, 2 solver failure, 3 invalid configuration. Any solver
failure prints a machine-readable JSON error record to stderr. Configuration
precedence is flags > config file > defaults; the config file is a flat
"key = value" text format (keys match the long option names).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import exact, geometry, shoot
from .emit import (CURVE_HEADER, RECORD_HEADER, SERIES_HEADER,
                   TRAJECTORY_HEADER, SvgFigure, curve_rows, record_row,
                   series_rows, trajectory_rows, write_csv, write_json,
                   write_svg)
from .errors import NKError
from .integrate import MAX_VOLUME_EVENT, integrate
from .series import family_series
from .state import State, apply_symmetry, constraints, rhs

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3

_CONFIG_KEYS = ("rtol", "atol", "order", "n", "format")


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad usage; the contract here is 3."""

    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _read_config(path: str) -> dict[str, str]:
    cfg = {}
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def _resolve(args, key: str, cast, default):
    """flags > config file > defaults."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if getattr(args, "_config", None) and key in args._config:
        return cast(args._config[key])
    return default


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nkshoot",
                description="Numerical reconstruction of cohomogeneity-one "
                            "nearly Kahler structures by shooting")
    p.add_argument("--config", help="flat key=value config file")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--rtol", type=float, default=None)
        sp.add_argument("--atol", type=float, default=None)
        sp.add_argument("--order", type=int, default=None,
                        help="series truncation order")
        sp.add_argument("--out", default=None, help="output file path")

    sp = sub.add_parser("verify", help="closed-form residual and invariant suites")
    common(sp)

    sp = sub.add_parser("series", help="coefficient dump of one series family")
    common(sp)
    sp.add_argument("--family", required=True,
                    choices=["psi-a", "psi-b", "bubble-a", "bubble-b"])
    sp.add_argument("--param", type=float, required=True)

    sp = sub.add_parser("traj", help="single trajectory CSV up to the "
                                     "maximal-volume event")
    common(sp)
    sp.add_argument("--family", required=True, choices=["alpha", "beta"])
    sp.add_argument("--param", type=float, required=True)
    sp.add_argument("--horizon", type=float, default=None,
                    help="integrate to this time instead of the event")

    sp = sub.add_parser("trace", help="maximal-volume curve CSV")
    common(sp)
    sp.add_argument("--family", required=True, choices=["alpha", "beta"])
    sp.add_argument("--lo", type=float, required=True)
    sp.add_argument("--hi", type=float, required=True)
    sp.add_argument("--n", type=int, default=None, help="grid samples")

    sp = sub.add_parser("solve", help="one complete solution as JSON")
    common(sp)
    sp.add_argument("--target", required=True,
                    choices=["s3xs3-exotic", "s6-exotic", "cp3",
                             "s3s3-homog", "s6-homog"])

    sp = sub.add_parser("table2", help="all six reference rows as JSON")
    common(sp)

    sp = sub.add_parser("fig2", help="curve plot (alpha_H, beta_H, "
                                     "reflections, roots) as SVG")
    common(sp)
    sp.add_argument("--svg", default=None, help="output SVG path (alias of --out)")
    sp.add_argument("--markers", choices=["none", "known", "solve"],
                    default="solve")
    sp.add_argument("--alo", type=float, default=0.12)
    sp.add_argument("--ahi", type=float, default=4.0)
    sp.add_argument("--blo", type=float, default=0.12)
    sp.add_argument("--bhi", type=float, default=1.6)

    sp = sub.add_parser("scan-s2s4", help="negative scan for a lambda=1 "
                                          "boundary crossing of alpha")
    common(sp)
    sp.add_argument("--lo", type=float, default=0.1)
    sp.add_argument("--hi", type=float, default=10.0)
    sp.add_argument("--n", type=int, default=None)
    return p


# ---------------------------------------------------------------------------
# verify suite

def _check(name: str, value: float, tol: float, lines: list[str]) -> bool:
    ok = value < tol
    lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} "
                 f"(tol {tol:.1e})")
    return ok


def run_verify(rtol: float, atol: float) -> tuple[bool, list[str]]:
    lines: list[str] = []
    ok = True
    ts = {name: np.linspace(sol.domain[0], sol.domain[1], 1002)[1:-1]
          for name, sol in exact.NAMED_SOLUTIONS.items()}
    # closed forms satisfy the system: rhs at t must equal the centered
    # finite difference of the evaluator to FD accuracy, and the first
    # integrals must vanish at roundoff
    for name, sol in exact.NAMED_SOLUTIONS.items():
        worst_c = 0.0
        for t in ts[name]:
            worst_c = max(worst_c, constraints(sol.eval(t)).max_abs)
        ok &= _check(f"{name}: first integrals", worst_c, 1e-12, lines)
        h = 1e-5
        worst_r = 0.0
        for t in ts[name][::10]:
            if t - 2 * h <= sol.domain[0] or t + 2 * h >= sol.domain[1]:
                continue
            fd = (sol.eval(t - 2 * h).vec - 8 * sol.eval(t - h).vec
                  + 8 * sol.eval(t + h).vec - sol.eval(t + 2 * h).vec) / (12 * h)
            worst_r = max(worst_r, float(np.max(np.abs(rhs(sol.eval(t)) - fd))))
        ok &= _check(f"{name}: evolution residual (FD)", worst_r, 1e-8, lines)
    # Calabi-Yau forms satisfy their evolution systems
    for name, xs in (("small-resolution", (1.2, 1.7, 2.5)),
                     ("smoothing", (0.2, 0.6, 1.0))):
        worst = max(exact.eval_calabi_yau(name, x)[1] for x in xs)
        ok &= _check(f"{name}: hypo evolution residual (FD)", worst, 1e-7, lines)
    # Legendre solutions solve the linearized equation (FD residual)
    h = 1e-5
    worst = 0.0
    for c1, c2 in ((1.0, 0.0), (0.0, 1.0), (0.05, 1.0)):
        for t in (0.6, 1.0, 2.2):
            def sxp(tt):
                return math.sin(tt) * exact.legendre_xi(c1, c2, tt)[1]
            d = (sxp(t - 2 * h) - 8 * sxp(t - h) + 8 * sxp(t + h)
                 - sxp(t + 2 * h)) / (12 * h)
            worst = max(worst, abs(d + 12 * math.sin(t)
                                   * exact.legendre_xi(c1, c2, t)[0]))
    ok &= _check("legendre: equation residual (FD)", worst, 1e-8, lines)
    # symmetries are involutions and preserve the constraints
    worst = 0.0
    for name, sol in exact.NAMED_SOLUTIONS.items():
        st = sol.eval(0.4 * sum(sol.domain))
        for word in ("tau1", "tau2", "tau3", "tau4"):
            twice = apply_symmetry(word, apply_symmetry(word, st))
            worst = max(worst, float(np.max(np.abs(twice.vec - st.vec))))
            worst = max(worst, constraints(apply_symmetry(word, st)).max_abs)
    ok &= _check("symmetries: involution + constraint preservation",
                 worst, 1e-12, lines)
    # first-integral drift along the four closed forms
    for name, sol in exact.NAMED_SOLUTIONS.items():
        lo, hi = sol.domain
        span = hi - lo
        start = sol.eval(lo + 0.05 * span)
        traj = integrate(start, hi - 0.05 * span, rtol=rtol, atol=atol)
        ok &= _check(f"{name}: integrated drift", float(np.max(traj.drift)),
                     1e-9, lines)
    return ok, lines


# ---------------------------------------------------------------------------
# solve targets and the reference table

def _solve_target(target: str, order: int, rtol: float, atol: float):
    if target == "s3xs3-exotic":
        return shoot.find_doubling("beta", (0.2, 0.6), "v0", order, rtol, atol)
    if target == "cp3":
        return shoot.find_doubling("alpha", (0.7, 1.0), "v0", order, rtol, atol)
    if target == "s3s3-homog":
        return shoot.find_doubling("beta", (0.9, 1.1), "u0", order, rtol, atol)
    if target == "s6-exotic":
        return shoot.find_matching((0.35, 0.95), (0.35, 0.95),
                                   order=order, rtol=rtol, atol=atol)
    if target == "s6-homog":
        return shoot.find_matching((1.2, 2.4), (1.05, 1.9),
                                   order=order, rtol=rtol, atol=atol)
    raise ValueError(f"unknown target {target!r}")


def _sine_cone_row() -> dict:
    from scipy.integrate import quad
    total, _ = quad(lambda t: math.sin(t) ** 5, 0.0, math.pi,
                    epsabs=1e-13, epsrel=1e-13)
    return {
        "manifold": "sine-cone",
        "type": "singular",
        "family_left": None, "param_left": 0.0,
        "family_right": None, "param_right": 0.0,
        "symmetry": None,
        "T_total": math.pi,
        "Vmax": 1.0,
        "vol": total / shoot.S6_STD_TOTAL_VOLUME,
    }


def run_table2(order: int, rtol: float, atol: float) -> dict:
    rows = [_sine_cone_row()]
    for target in ("s3xs3-exotic", "s6-exotic", "cp3", "s3s3-homog",
                   "s6-homog"):
        sol = _solve_target(target, order, rtol, atol)
        row = sol.as_dict()
        row["manifold"] = {"s3xs3-exotic": "S3xS3-new", "s6-exotic": "S6-new",
                           "cp3": "CP3", "s3s3-homog": "S3xS3-std",
                           "s6-homog": "S6-std"}[target]
        rows.append(row)
    return {"normalization": "vol(S6-std) = 1", "rows": rows}


# ---------------------------------------------------------------------------
# figure

_KNOWN_MARKERS = (
    ("CP3", 0.0, 1.0 / (2.0 * math.sqrt(2.0))),
    ("S3xS3-std", 1.0 / math.sqrt(3.0), 0.0),
    ("S6-std", math.sqrt(2.0 / 3.0), math.sqrt(3.0 / 8.0)),
)


def run_fig2(args, order: int, rtol: float, atol: float) -> SvgFigure:
    alpha = shoot.trace_curve("alpha", args.alo, args.ahi, n_samples=18,
                              order=order, rtol=rtol, atol=atol)
    beta = shoot.trace_curve("beta", args.blo, args.bhi, n_samples=18,
                             order=order, rtol=rtol, atol=atol)
    fig = SvgFigure(title="maximal-volume orbit curves in the hyperboloid chart")
    fig.add_polyline("alpha_H", "#c0392b", alpha.h_points)
    fig.add_polyline("beta_H", "#2471a3", beta.h_points)
    fig.add_polyline("beta_H reflected in w1", "#7fb3d5",
                     beta.h_points * np.array([-1.0, 1.0]), dash="6,3")
    fig.add_polyline("beta_H reflected in w2", "#a9cce3",
                     beta.h_points * np.array([1.0, -1.0]), dash="6,3")
    if args.markers != "none":
        for label, w1, w2 in _KNOWN_MARKERS:
            fig.add_marker(label, "#1e8449", w1, w2)
        if args.markers == "solve":
            dbl = shoot.find_doubling("beta", (0.2, 0.6), "v0",
                                      order, rtol, atol)
            fig.add_marker("S3xS3-new", "#b7950b",
                           *dbl.left.record.h_point)
            mat = shoot.find_matching((0.35, 0.95), (0.35, 0.95),
                                      order=order, rtol=rtol, atol=atol,
                                      curves=(alpha, beta))
            fig.add_marker("S6-new", "#b7950b", *mat.left.record.h_point)
    return fig


# ---------------------------------------------------------------------------
# entry point

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _read_config(args.config) if args.config else {}
    except (OSError, ValueError) as e:
        print(f"nkshoot: invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG

    rtol = _resolve(args, "rtol", float, 1e-12)
    atol = _resolve(args, "atol", float, 1e-12)
    order = _resolve(args, "order", int, 40)
    out = _resolve(args, "out", str, None)

    try:
        if args.command == "verify":
            ok, lines = run_verify(rtol, atol)
            print("\n".join(lines))
            print("verify:", "all checks passed" if ok else "FAILURES above")
            return EXIT_OK if ok else EXIT_SOLVER

        if args.command == "series":
            sol = family_series(args.family.replace("psi-", ""), args.param,
                                order)
            path = out or f"series-{args.family}-{args.param}.csv"
            write_csv(path, SERIES_HEADER, series_rows(sol))
            print(f"wrote {path} ({sol.family} family, variable {sol.var}, "
                  f"order {sol.order})")
            return EXIT_OK

        if args.command == "traj":
            if args.horizon is not None:
                sol = family_series(args.family, args.param, order)
                from .series import handoff
                t_star, start = handoff(sol)
                traj = integrate(start, args.horizon, rtol=rtol, atol=atol)
            else:
                fs = shoot.solve_family(args.family, args.param, order,
                                        rtol, atol)
                traj = fs.traj
            path = out or f"traj-{args.family}-{args.param}.csv"
            write_csv(path, TRAJECTORY_HEADER, trajectory_rows(traj))
            print(f"wrote {path} ({len(traj.times)} nodes, "
                  f"termination {traj.termination})")
            return EXIT_OK

        if args.command == "trace":
            n = _resolve(args, "n", int, 15)
            curve = shoot.trace_curve(args.family, args.lo, args.hi,
                                      n_samples=n, order=order,
                                      rtol=rtol, atol=atol)
            path = out or f"curve-{args.family}.csv"
            write_csv(path, CURVE_HEADER, curve_rows(curve))
            print(f"wrote {path} ({len(curve.params)} samples)")
            return EXIT_OK

        if args.command == "solve":
            sol = _solve_target(args.target, order, rtol, atol)
            path = out or f"solution-{args.target}.json"
            write_json(path, sol.as_dict())
            print(f"wrote {path} ({sol.manifold}, Vmax = {sol.Vmax:.6f}, "
                  f"vol = {sol.vol:.6f})")
            return EXIT_OK

        if args.command == "table2":
            table = run_table2(order, rtol, atol)
            path = out or "table2.json"
            write_json(path, table)
            print(f"wrote {path} ({len(table['rows'])} rows)")
            return EXIT_OK

        if args.command == "fig2":
            fig = run_fig2(args, order, rtol, atol)
            path = args.svg or out or "fig2.svg"
            write_svg(path, fig)
            print(f"wrote {path}")
            return EXIT_OK

        if args.command == "scan-s2s4":
            n = _resolve(args, "n", int, 40)
            report = shoot.scan_s2s4_boundary(args.lo, args.hi, n,
                                              order, rtol, atol)
            path = out or "scan-s2s4.json"
            write_json(path, report.as_dict())
            status = ("CROSSING FOUND - inspect brackets"
                      if report.found_root else "no boundary crossing")
            print(f"wrote {path}: {status}")
            return EXIT_OK
    except NKError as e:
        record = {"error": type(e).__name__, "message": str(e),
                  "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
