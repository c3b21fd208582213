"""Batch front door: parse measure specs, dispatch computations, emit CSV/JSON.

All outputs are plain CSV (plot-tool agnostic) or JSON dumps; nothing is
rendered.  Every table carries a header naming the emitted quantities, and
identical configuration plus seed produces byte-identical files.

Exit codes: 0 on success, 1 on parameter errors (bad flags, malformed or
invalid measure files), 2 on failed internal assertions.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import measures
from .kreinfeller import discretize, order_fit, solve_eigen, split_counting_check
from .measures import InvalidMeasureError, MeasureSpec, load_spec
from .partition import (
    adaptive_partition,
    budget_partition,
    entropy_estimate,
    gamma_adaptive_profile,
)
from .polyapprox import FunctionHandle, error_Lq, kappa, piecewise_project
from .spectrum import (
    OrderParams,
    s_b_estimate,
    selfsimilar_beta,
    selfsimilar_s_rho,
    spectrum_curve,
)


class ParameterError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise ParameterError(message)


# ---------------------------------------------------------------------------
# Small parsing helpers
# ---------------------------------------------------------------------------

def _parse_levels(text: str) -> list[int]:
    """'4..8' or '4,6,8' -> list of ints."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x]


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _parse_grid(text: str) -> np.ndarray:
    """Geometric grid 'start,factor,count'."""
    parts = text.split(",")
    if len(parts) != 3:
        raise ParameterError("geometric grids are written start,factor,count")
    start, factor, count = float(parts[0]), float(parts[1]), int(parts[2])
    if start <= 0 or factor <= 1 or count < 2:
        raise ParameterError("need start > 0, factor > 1, count >= 2")
    return start * factor ** np.arange(count)


def _parse_sgrid(text: str) -> np.ndarray:
    """Uniform grid 'start:stop:count'."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError("s grids are written start:stop:count")
    return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))


def _resolve_measure(name: str) -> MeasureSpec:
    path = Path(name)
    if path.exists():
        spec = load_spec(path)
    else:
        res = resources.files("lqspectra").joinpath(f"data/{name}.json")
        if not res.is_file():
            raise ParameterError(
                f"measure {name!r}: no such file, and no shipped spec of that name"
            )
        spec = measures.parse_spec(json.loads(res.read_text()))
    bad = measures.validate(spec)
    if bad:
        raise ParameterError("invalid measure spec: " + "; ".join(bad))
    return spec


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def _pool_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_spectrum(args) -> None:
    spec = _resolve_measure(args.measure)
    levels = _parse_levels(args.levels)
    sgrid = _parse_sgrid(args.s_grid)
    curves = _pool_map(lambda n: spectrum_curve(spec, n, sgrid), levels, args.workers)
    rows = []
    for curve in curves:
        for s, beta in zip(curve.s_grid, curve.values):
            rows.append((curve.level, s, beta))
    _write_csv(Path(args.out) / "spectrum.csv", ["level", "s", "beta_n"], rows)


def _cmd_fixedpoint(args) -> None:
    spec = _resolve_measure(args.measure)
    levels = _parse_levels(args.levels)
    bs = _parse_floats(args.b)
    rows = []
    for b in bs:
        fp = s_b_estimate(spec, b, levels)
        for lvl, root, res in zip(fp.levels, fp.roots, fp.residuals):
            rows.append((lvl, b, root, res))
        print(f"b={b}: s_hat = {fp.s_hat!r} (tail max of {len(fp.levels)} levels)")
    _write_csv(Path(args.out) / "fixedpoint.csv",
               ["level", "b", "s_nb", "residual"], rows)


def _cmd_partition(args) -> None:
    spec = _resolve_measure(args.measure)
    if args.t is None and args.t_grid is None:
        raise ParameterError("give --t or --t-grid")
    thresholds = [args.t] if args.t is not None else list(_parse_grid(args.t_grid))
    rows = []
    for t in thresholds:
        part = adaptive_partition(spec, args.a, t, max_depth=args.max_depth)
        rows.append((t, part.cardinality, part.max_j, part.max_level))
    _write_csv(Path(args.out) / "partition_stats.csv",
               ["t", "cardinality", "max_J_a", "depth_max"], rows)
    if args.dump:
        part = adaptive_partition(spec, args.a, thresholds[-1], max_depth=args.max_depth)
        out = Path(args.out) / "partition.json"
        out.write_text(json.dumps(part.to_records(), indent=1) + "\n", encoding="utf-8")


def _cmd_entropy(args) -> None:
    spec = _resolve_measure(args.measure)
    t_grid = _parse_grid(args.t_grid)
    levels = _parse_levels(args.levels)
    a_values = _parse_floats(args.a)
    samples = []
    summary = []
    for a in a_values:
        fit = entropy_estimate(spec, a, t_grid, max_depth=args.max_depth)
        s_am = s_b_estimate(spec, a * spec.dim, levels).s_hat
        for t, card in zip(fit.t_grid, fit.cards):
            samples.append((a, t, int(card)))
        summary.append((a, fit.slope, s_am, fit.r_squared, fit.slope - s_am))
        print(f"a={a}: h_hat = {fit.slope:.4f}  s_am_hat = {s_am:.4f}  "
              f"(h_hat - s_am_hat = {fit.slope - s_am:+.4f})")
    _write_csv(Path(args.out) / "entropy_samples.csv", ["a", "t", "cardinality"], samples)
    _write_csv(Path(args.out) / "entropy_summary.csv",
               ["a", "h_a_hat", "s_am_hat", "r_squared", "excess_over_s_am"], summary)


_TEST_FUNCTIONS = {
    "expsum": lambda pts: np.exp(pts.sum(axis=1)),
    "sinpi": lambda pts: np.sin(np.pi * pts.sum(axis=1)),
    "sqrtnorm": lambda pts: np.sqrt(pts.sum(axis=1)),
}


def _cmd_project(args) -> None:
    spec = _resolve_measure(args.measure)
    params = OrderParams(p=args.p, q=args.q, ell=args.ell, m=spec.dim)
    budgets = _parse_levels(args.n_list)
    if args.function not in _TEST_FUNCTIONS:
        raise ParameterError(f"unknown test function {args.function!r}")
    u = FunctionHandle(_TEST_FUNCTIONS[args.function])
    a = params.rho / params.m
    kap = kappa(params.m, params.ell)
    rows = []
    for n in budgets:
        part = budget_partition(spec, a, n, max_depth=args.max_depth)
        approx = piecewise_project(u, part, args.ell)
        err, se = error_Lq(u, approx, spec, args.q, n_samples=args.samples,
                           seed=args.seed)
        bound = part.max_j ** (1.0 / args.q)
        rows.append((kap * n, part.max_j, bound, err, se))
    _write_csv(Path(args.out) / "projection_errors.csv",
               ["n", "max_J_a", "bound", "measured_error", "stderr"], rows)


def _cmd_eigen(args) -> None:
    spec = _resolve_measure(args.measure)
    atoms = discretize(spec, args.level)
    eigs = solve_eigen(atoms)
    rows = [(i + 1, lam, math.sqrt(lam)) for i, lam in enumerate(eigs.eigenvalues)]
    _write_csv(Path(args.out) / "eigen.csv", ["n", "lambda_n", "sqrt_lambda"], rows)
    if args.cuts:
        cuts = _parse_floats(args.cuts)
        lam = eigs.eigenvalues
        xs = np.geomspace(lam[-1] * 0.9, lam[0] * 1.1, args.x_count)
        report = split_counting_check(spec, args.level, cuts, xs)
        _write_csv(Path(args.out) / "sandwich.csv",
                   ["x", "N_full", "N_split_sum", "gap"],
                   zip(report.x_grid, report.n_full, report.n_split_sum, report.gaps))
        if not report.passed:
            raise RuntimeError("counting-function sandwich violated")
        print(f"sandwich ok at {len(xs)} grid points (cuts {cuts})")


def _cmd_order(args) -> None:
    spec = _resolve_measure(args.measure)
    levels = _parse_levels(args.levels)
    window = None
    if args.window:
        lo, hi = (int(x) for x in args.window.split(","))
        window = (lo, hi)
    fit = order_fit(spec, levels, index_window=window)
    rows = []
    for lvl, slope in fit.per_level:
        err = fit.stderr if lvl == fit.level else ""
        rows.append((lvl, slope, err, fit.reference_slope))
    _write_csv(Path(args.out) / "order.csv",
               ["level", "slope", "stderr", "target_slope"], rows)
    print(f"slope at level {fit.level}: {fit.slope:.4f} +- {fit.stderr:.4f} "
          f"(target -1/s_1 = {fit.reference_slope:.4f}, drift {fit.drift:.4f})")


def _cmd_demo(args) -> None:
    if args.name != "fig1":
        raise ParameterError(f"unknown demo {args.name!r} (available: fig1)")
    spec = _resolve_measure("fig1_tetraeder")
    weights = list(spec.weights)
    ratios = [0.5] * 4
    rho = 2.0
    m = 3
    sgrid = np.linspace(0.0, 1.4, 57)
    curve = spectrum_curve(spec, 6, sgrid)
    _write_csv(Path(args.out) / "fig1_curve.csv", ["s", "beta_n"],
               zip(curve.s_grid, curve.values))
    beta0 = float(curve.values[0])
    s_rho = selfsimilar_s_rho(weights, ratios, rho)
    s_n2 = s_b_estimate(spec, rho, [4, 6, 8, 10]).s_hat
    rows = [
        ("beta_n(0)", beta0, 2.0, abs(beta0 - 2.0) < 1e-12),
        ("s_rho", s_rho, 0.425, abs(s_rho - 0.425) <= 0.01),
        ("s_n_rho_level10", s_n2, s_rho, abs(s_n2 - s_rho) <= 0.01),
        ("lebesgue_intersection m/(m+rho)", m / (m + rho), 0.6,
         m / (m + rho) == 0.6),
    ]
    _write_csv(Path(args.out) / "fig1_markers.csv",
               ["quantity", "computed", "reference", "matches_figure"], rows)
    for name, computed, ref, ok in rows:
        print(f"{name}: computed {computed!r} vs reference {ref!r} -> "
              f"{'match' if ok else 'MISMATCH'}")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="lqspectra", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, measure=True):
        if measure:
            p.add_argument("--measure", required=True,
                           help="measure spec JSON path, or a shipped name like lebesgue_1d")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int,
                       default=int(os.environ.get("LQSPECTRA_WORKERS", "1")))
        p.add_argument("--max-depth", type=int, default=60)

    p = sub.add_parser("spectrum", help="level spectra beta_n over an s grid")
    common(p)
    p.add_argument("--levels", default="1..6", help="'a..b' or comma list")
    p.add_argument("--s-grid", default="0:2:9", help="start:stop:count")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("fixedpoint", help="roots s_nb of beta_n(s) = b s")
    common(p)
    p.add_argument("--levels", default="1..8")
    p.add_argument("--b", default="1", help="comma list of slopes b > 0")
    p.set_defaults(func=_cmd_fixedpoint)

    p = sub.add_parser("partition", help="adaptive threshold partitions")
    common(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--t-grid", default=None, help="start,factor,count of thresholds")
    p.add_argument("--dump", action="store_true", help="write partition.json")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("entropy", help="partition-entropy fits vs fixed points")
    common(p)
    p.add_argument("--a", default="1", help="comma list of exponents")
    p.add_argument("--t-grid", default="100,10,7")
    p.add_argument("--levels", default="1..8", help="levels for the s_am estimate")
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("project", help="piecewise-polynomial error vs width bound")
    common(p)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--n-list", default="2,4,8,16,32,64", help="cube budgets")
    p.add_argument("--function", default="expsum",
                   help=f"test oracle, one of {sorted(_TEST_FUNCTIONS)}")
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("eigen", help="atomic eigenvalues; optional counting sandwich")
    common(p)
    p.add_argument("--level", type=int, default=8)
    p.add_argument("--cuts", default=None, help="comma list of cut points in (0,1)")
    p.add_argument("--x-count", type=int, default=50)
    p.set_defaults(func=_cmd_eigen)

    p = sub.add_parser("order", help="eigenvalue decay order vs -1/s_1")
    common(p)
    p.add_argument("--levels", default="8..11")
    p.add_argument("--window", default=None, help="lo,hi eigenvalue index window")
    p.set_defaults(func=_cmd_order)

    p = sub.add_parser("demo", help="reproduce shipped reference computations")
    p.add_argument("name", help="demo name (fig1)")
    common(p, measure=False)
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except (ParameterError, InvalidMeasureError, ValueError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AssertionError, RuntimeError) as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
