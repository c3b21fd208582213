"""Moment-matching polynomial projections on cubes and piecewise variants.

On every cube Q the operator P_Q is the L^2(Q)-orthogonal projection onto
the polynomials of total degree <= ell-1; it is characterised by matching
all moments of x^k for |k| <= ell-1.  Coefficients are stored in a per-cube
orthonormal basis (affinely rescaled tensor Legendre polynomials restricted
to total degree <= ell-1) rather than raw monomials: the monomial Gram
matrix is badly conditioned already at moderate degree, while the
orthonormal basis turns the moment system into the identity at no modeling
cost.

Moments are evaluated by tensor Gauss-Legendre quadrature with ell+q_extra
nodes per axis (default q_extra = 4): exact for the polynomial factors and
accurate for smooth evaluation oracles.  Independent verification passes use
doubled node counts.

Errors in L^q of a measure nu use exact atom sums when nu is atomic and
otherwise seeded Monte Carlo draws from nu (map compositions for IFS
measures, cell selection for densities); singular measures admit no faithful
grid quadrature, so a standard error accompanies every sampled value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander

from .measures import (
    Atomic,
    DyadicCube,
    DyadicDensity,
    DyadicIFS,
    GeneralIFS1D,
    Lebesgue,
    MeasureSpec,
    Mixture,
    ensure_valid,
)
from .partition import Partition, gamma_adaptive_profile, DEFAULT_MAX_DEPTH
from .spectrum import OrderParams

__all__ = [
    "kappa",
    "multi_indices",
    "FunctionHandle",
    "project_poly",
    "polynomial_values",
    "moment_residuals",
    "projection_l2_error",
    "PiecewisePoly",
    "piecewise_project",
    "error_Lq",
    "sample_measure",
    "WidthBounds",
    "width_upper_sequence",
]

BASIS_TAG = "shifted-legendre-orthonormal-v1"


def kappa(m: int, ell: int) -> int:
    """Dimension of the m-variate polynomials of total degree <= ell-1."""
    if m < 1 or ell < 1:
        raise ValueError("m and ell must be >= 1")
    return math.comb(m + ell - 1, m)


def multi_indices(m: int, ell: int) -> list[tuple[int, ...]]:
    """All exponent vectors k with |k| <= ell-1, graded lexicographically."""
    idx = [k for k in product(range(ell), repeat=m) if sum(k) <= ell - 1]
    idx.sort(key=lambda k: (sum(k), k))
    return idx


@dataclass(frozen=True)
class FunctionHandle:
    """Evaluation oracle u: points array of shape (npts, m) -> values (npts,).

    ``smoothness`` is free-form metadata (e.g. a Sobolev order the caller
    believes in); nothing here verifies it.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    smoothness: float | None = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.fn(points)


def _eval_u(u, points: np.ndarray) -> np.ndarray:
    vals = np.asarray(u(points), dtype=float)
    if vals.shape != (points.shape[0],):
        raise ValueError(
            f"function returned shape {vals.shape}, expected ({points.shape[0]},); "
            "oracles must map an (npts, m) array to an (npts,) array"
        )
    if not np.all(np.isfinite(vals)):
        raise ValueError("function returned non-finite values on the quadrature grid")
    return vals


# ---------------------------------------------------------------------------
# Per-cube orthonormal basis and quadrature
# ---------------------------------------------------------------------------

def _cube_corner_side(cube: DyadicCube) -> tuple[np.ndarray, float]:
    h = math.ldexp(1.0, -cube.level)
    corner = np.array([l * h for l in cube.index])
    return corner, h


def _cube_quadrature(cube: DyadicCube, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre points (npts, m) and weights (npts,) on the cube."""
    t, w = leggauss(n_nodes)
    xi = 0.5 * (t + 1.0)
    wu = 0.5 * w
    corner, h = _cube_corner_side(cube)
    m = cube.dim
    axes = [corner[j] + h * xi for j in range(m)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    wmesh = np.meshgrid(*([h * wu] * m), indexing="ij")
    weights = np.ones(pts.shape[0])
    for g in wmesh:
        weights = weights * g.ravel()
    return pts, weights


def _basis_values(cube: DyadicCube, ell: int, points: np.ndarray) -> np.ndarray:
    """Orthonormal basis values, shape (npts, kappa)."""
    corner, h = _cube_corner_side(cube)
    m = cube.dim
    xi = (points - corner) / h
    scale = np.sqrt(2.0 * np.arange(ell) + 1.0)
    vander = [legvander(2.0 * xi[:, j] - 1.0, ell - 1) * scale for j in range(m)]
    cols = []
    for k in multi_indices(m, ell):
        col = np.ones(points.shape[0])
        for j, kj in enumerate(k):
            col = col * vander[j][:, kj]
        cols.append(col)
    return np.stack(cols, axis=-1) * h ** (-0.5 * m)


def project_poly(u, cube: DyadicCube, ell: int, q_extra: int = 4) -> np.ndarray:
    """Coefficients of the moment-matching projection of u on the cube, in
    the cube's orthonormal basis (length kappa(m, ell))."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    pts, w = _cube_quadrature(cube, ell + q_extra)
    vals = _eval_u(u, pts)
    basis = _basis_values(cube, ell, pts)
    return basis.T @ (vals * w)


def polynomial_values(cube: DyadicCube, ell: int, coeffs: np.ndarray,
                      points: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient vector in the cube's basis at given points."""
    return _basis_values(cube, ell, points) @ np.asarray(coeffs)


def moment_residuals(u, cube: DyadicCube, ell: int, coeffs: np.ndarray,
                     n_nodes: int | None = None) -> np.ndarray:
    """Residuals int x^k (u - r) dLambda over the cube for all |k| <= ell-1,
    evaluated with an independent (by default doubled-order) quadrature."""
    if n_nodes is None:
        n_nodes = 2 * (ell + 4)
    pts, w = _cube_quadrature(cube, n_nodes)
    diff = _eval_u(u, pts) - polynomial_values(cube, ell, coeffs, pts)
    out = []
    for k in multi_indices(cube.dim, ell):
        mono = np.ones(pts.shape[0])
        for j, kj in enumerate(k):
            if kj:
                mono = mono * pts[:, j] ** kj
        out.append(float(np.sum(mono * diff * w)))
    return np.asarray(out)


def projection_l2_error(u, cube: DyadicCube, ell: int,
                        coeffs: np.ndarray | None = None,
                        n_nodes: int | None = None) -> float:
    """L^2(cube) error of the projection (or of a supplied coefficient vector)."""
    if coeffs is None:
        coeffs = project_poly(u, cube, ell)
    if n_nodes is None:
        n_nodes = 2 * (ell + 4)
    pts, w = _cube_quadrature(cube, n_nodes)
    diff = _eval_u(u, pts) - polynomial_values(cube, ell, coeffs, pts)
    return float(np.sqrt(np.sum(diff * diff * w)))


# ---------------------------------------------------------------------------
# Piecewise projection
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PiecewisePoly:
    """Piecewise polynomial subordinate to a dyadic partition.

    ``coeffs[i]`` is the coefficient vector (length kappa) of the polynomial
    on ``cubes[i]`` in that cube's orthonormal basis.
    """

    order: int
    cubes: list[DyadicCube]
    coeffs: np.ndarray

    @property
    def dim(self) -> int:
        return self.cubes[0].dim

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points in (0,1]^m; each point is resolved to the unique
        half-open cube containing it (cube bounds are exact dyadic floats).
        Linear scan over cubes: fine at the partition sizes used here."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(points.shape[0], np.nan)
        claimed = np.zeros(points.shape[0], dtype=bool)
        for cube, coef in zip(self.cubes, self.coeffs):
            corner, h = _cube_corner_side(cube)
            inside = np.all((points > corner) & (points <= corner + h), axis=1)
            inside &= ~claimed
            if np.any(inside):
                out[inside] = polynomial_values(cube, self.order, coef, points[inside])
                claimed |= inside
        if not np.all(claimed):
            raise ValueError("some points lie outside the partition (expected (0,1]^m)")
        return out

    def to_json_dict(self) -> dict:
        return {
            "basis": BASIS_TAG,
            "order": self.order,
            "pieces": [
                {"level": c.level, "index": list(c.index), "coefficients": list(map(float, co))}
                for c, co in zip(self.cubes, self.coeffs)
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PiecewisePoly":
        if doc.get("basis") != BASIS_TAG:
            raise ValueError(f"unknown basis tag {doc.get('basis')!r}")
        cubes = [DyadicCube(p["level"], tuple(p["index"])) for p in doc["pieces"]]
        coeffs = np.asarray([p["coefficients"] for p in doc["pieces"]], dtype=float)
        return cls(order=int(doc["order"]), cubes=cubes, coeffs=coeffs)


def piecewise_project(u, partition: Union[Partition, Sequence[DyadicCube]],
                      ell: int, q_extra: int = 4) -> PiecewisePoly:
    """Project u cube by cube over a partition."""
    cubes = list(partition.cubes) if isinstance(partition, Partition) else list(partition)
    if not cubes:
        raise ValueError("empty partition")
    coeffs = np.stack([project_poly(u, c, ell, q_extra) for c in cubes])
    return PiecewisePoly(order=ell, cubes=cubes, coeffs=coeffs)


# ---------------------------------------------------------------------------
# Sampling from a measure and empirical L^q errors
# ---------------------------------------------------------------------------

def sample_measure(spec: MeasureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points distributed by the measure, shape (n, m).

    IFS measures are sampled by composing ~55 independent weight-distributed
    maps (position error below 2^-50); atomic and density measures are
    sampled exactly up to floating point.
    """
    ensure_valid(spec)
    m = spec.dim
    if isinstance(spec, Lebesgue):
        return 1.0 - rng.random((n, m))
    if isinstance(spec, (DyadicIFS, GeneralIFS1D)):
        if isinstance(spec, DyadicIFS):
            ratios = np.array([math.ldexp(1.0, -mp.ratio_log2) for mp in spec.maps])
            offsets = np.array([[float(c) for c in mp.offset] for mp in spec.maps])
        else:
            ratios = np.array([float(mp.ratio) for mp in spec.maps])
            offsets = np.array([[float(mp.offset)] for mp in spec.maps])
        probs = np.asarray(spec.weights) / math.fsum(spec.weights)
        r_max = float(ratios.max())
        steps = int(math.ceil(52.0 * math.log(2.0) / -math.log(r_max))) + 3
        x = 1.0 - rng.random((n, m))
        for _ in range(steps):
            pick = rng.choice(len(probs), size=n, p=probs)
            x = x * ratios[pick, None] + offsets[pick]
        return x
    if isinstance(spec, Atomic):
        pts = np.array([[float(c) for c in p] for p in spec.points])
        probs = np.asarray(spec.weights) / math.fsum(spec.weights)
        pick = rng.choice(len(probs), size=n, p=probs)
        return pts[pick]
    if isinstance(spec, DyadicDensity):
        side = 1 << spec.depth
        cellmass = spec.values.ravel() * math.ldexp(1.0, -spec.depth * m)
        probs = cellmass / cellmass.sum()
        flat = rng.choice(len(probs), size=n, p=probs)
        idx = np.stack(np.unravel_index(flat, spec.values.shape), axis=-1)
        return (idx + (1.0 - rng.random((n, m)))) / side
    if isinstance(spec, Mixture):
        coefs = np.array([c for c, _ in spec.components])
        pick = rng.choice(len(coefs), size=n, p=coefs / coefs.sum())
        out = np.empty((n, m))
        for i, (_, sub) in enumerate(spec.components):
            take = pick == i
            if np.any(take):
                out[take] = sample_measure(sub, int(take.sum()), rng)
        return out
    raise ValueError(f"no sampler for measure spec {type(spec).__name__}")


def error_Lq(u, approx: PiecewisePoly, spec: MeasureSpec, q: float,
             n_samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """|| u - approx ||_{L^q_nu} with an error bar.

    Atomic measures are summed exactly (standard error 0); all other specs
    are integrated by seeded Monte Carlo, returning the delta-method standard
    error of the q-th root.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    ensure_valid(spec)
    if isinstance(spec, Atomic):
        pts = np.array([[float(c) for c in p] for p in spec.points])
        w = np.asarray(spec.weights)
        diff = np.abs(_eval_u(u, pts) - approx.evaluate(pts))
        return float(np.sum(w * diff ** q) ** (1.0 / q)), 0.0
    rng = np.random.default_rng(seed)
    pts = sample_measure(spec, n_samples, rng)
    diff = np.abs(_eval_u(u, pts) - approx.evaluate(pts))
    powers = diff ** q
    mean = float(powers.mean())
    if mean == 0.0:
        return 0.0, 0.0
    se_mean = float(powers.std(ddof=1)) / math.sqrt(n_samples)
    value = mean ** (1.0 / q)
    return value, se_mean * value / (q * mean)


# ---------------------------------------------------------------------------
# Width upper bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WidthBounds:
    """Upper-bound sequence for Kolmogorov widths from partition weights.

    ``dimensions[i] = kappa * n_list[i]`` is the subspace dimension of the
    piecewise-polynomial space on an optimal-cardinality partition, and
    ``bounds[i] = gamma_hat^(1/q)`` its width bound up to an unestimated
    constant; only ``slope`` (log-log least squares over all entries) is
    meaningful, not the levels themselves.
    """

    dimensions: np.ndarray
    gammas: np.ndarray
    bounds: np.ndarray
    slope: float
    a: float
    kappa: int


def width_upper_sequence(spec: MeasureSpec, params: OrderParams,
                         n_list: Sequence[int],
                         max_depth: int = DEFAULT_MAX_DEPTH) -> WidthBounds:
    """Width bound pairs (kappa*n, gamma_hat_{rho/m, kappa*n}^(1/q)) plus the
    fitted decay order of the bound sequence."""
    if spec.dim != params.m:
        raise ValueError(f"measure dimension {spec.dim} != params.m {params.m}")
    ns = [int(n) for n in n_list]
    if not ns or any(n < 1 for n in ns) or any(x >= y for x, y in zip(ns, ns[1:])):
        raise ValueError("n_list must be nonempty, strictly increasing, >= 1")
    a = params.rho / params.m
    kap = kappa(params.m, params.ell)
    dims = np.array([kap * n for n in ns])
    gammas = gamma_adaptive_profile(spec, a, dims, max_depth=max_depth)
    bounds = gammas ** (1.0 / params.q)
    if len(ns) >= 2:
        slope = float(np.polyfit(np.log(dims), np.log(bounds), 1)[0])
    else:
        slope = float("nan")
    return WidthBounds(dimensions=dims, gammas=gammas, bounds=bounds,
                       slope=slope, a=a, kappa=kap)
