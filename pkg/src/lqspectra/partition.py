"""Adaptive dyadic partitions, the exact small-budget oracle, and partition entropy.

Every cube Q carries the weight J_a(Q) = vol(Q)^a * nu(Q).  The adaptive
algorithm calls a cube *bad* when J_a >= t and *good* otherwise; bad cubes
are split into their 2^m children until only good cubes remain, which
yields the coarsest dyadic partition whose cubes all satisfy J_a < t.
Zero-mass cubes have J_a = 0 and are emitted immediately, so partitions
always cover the whole unit cube while positive-mass enumeration stays
pruned.

Two independent routes to the same optimisation are provided:

* :func:`refinement_profile` runs the adaptive family greedily (always
  splitting the cubes of largest J_a) and records every (cardinality,
  max J_a) state, giving upper bounds gamma_hat(n) for all budgets at once;
* :func:`gamma_dyadic_oracle` computes the exact minimum of max J_a over
  all partitions into at most n dyadic cubes of bounded depth by dynamic
  programming over the subdivision tree.  It is the test oracle for the
  minimality of the adaptive partitions.

The partition entropy h_a is estimated as the log-log slope of the
cardinality of the threshold-1/t partition against t over the tail half of
a geometric t-grid; no extrapolation beyond the sampled range is attempted.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measures import (
    DyadicCube,
    MeasureSpec,
    cube_mass,
    ensure_valid,
    _root_cursor,
)

__all__ = [
    "Partition",
    "EntropyFit",
    "MaxDepthExceeded",
    "j_weight",
    "adaptive_partition",
    "counting_N",
    "refinement_profile",
    "gamma_adaptive_profile",
    "gamma_dyadic_vector",
    "gamma_dyadic_oracle",
    "minimal_dyadic_cardinality",
    "entropy_estimate",
    "partition_violations",
]

DEFAULT_MAX_DEPTH = 60


class MaxDepthExceeded(RuntimeError):
    """A bad cube reached the depth guard; carries the offending cube."""

    def __init__(self, cube: DyadicCube, j_value: float, threshold: float):
        self.cube = cube
        self.j_value = j_value
        self.threshold = threshold
        super().__init__(
            f"bad cube at depth {cube.level} (J_a = {j_value!r} >= t = {threshold!r}); "
            "raise max_depth or loosen the threshold"
        )


def j_weight(spec: MeasureSpec, cube: DyadicCube, a: float) -> float:
    """J_a(cube) = vol(cube)^a * nu(cube)."""
    if a <= 0:
        raise ValueError("a must be > 0")
    return 2.0 ** (-cube.level * cube.dim * a) * cube_mass(spec, cube)


@dataclass(eq=False)
class Partition:
    """Finite set of disjoint dyadic cubes covering the unit cube.

    Attributes
    ----------
    cubes : list[DyadicCube]
    masses, j_values : np.ndarray
        Per-cube nu-mass and J_a weight, aligned with ``cubes``.
    a : float
        Weight exponent used.
    threshold : float or None
        The t the adaptive algorithm was run with, if any.
    """

    cubes: list[DyadicCube]
    masses: np.ndarray
    j_values: np.ndarray
    a: float
    threshold: float | None = None

    @property
    def cardinality(self) -> int:
        return len(self.cubes)

    @property
    def max_j(self) -> float:
        return float(self.j_values.max()) if len(self.cubes) else 0.0

    @property
    def max_level(self) -> int:
        return max(c.level for c in self.cubes)

    def level_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for c in self.cubes:
            hist[c.level] = hist.get(c.level, 0) + 1
        return dict(sorted(hist.items()))

    def to_records(self) -> list[dict]:
        """JSON-ready dump: one {level, index, mass, J} object per cube."""
        return [
            {"level": c.level, "index": list(c.index), "mass": float(m), "J": float(j)}
            for c, m, j in zip(self.cubes, self.masses, self.j_values)
        ]


def partition_violations(part: Partition, spec: MeasureSpec | None = None,
                         atol: float = 1e-9) -> list[str]:
    """Check the partition invariants: pairwise disjointness, exact cover of
    the unit cube, and (when ``spec`` is given) stored J values matching
    recomputation."""
    out = []
    if not part.cubes:
        return ["empty partition"]
    m = part.cubes[0].dim
    paths = sorted(tuple(c.selector_path()) for c in part.cubes)
    for p1, p2 in zip(paths, paths[1:]):
        if p2[: len(p1)] == p1:
            out.append(f"cubes overlap (path {p1} is an ancestor of {p2})")
            break
    total = sum(c.volume_fraction() for c in part.cubes)
    if total != 1:
        out.append(f"volumes sum to {total}, not 1: the cubes do not tile the unit cube")
    if spec is not None:
        for c, j in zip(part.cubes, part.j_values):
            again = j_weight(spec, c, part.a)
            if abs(again - j) > atol * max(1.0, abs(again)):
                out.append(f"stored J for cube {c} is {j!r}, recomputed {again!r}")
                break
    return out


# ---------------------------------------------------------------------------
# Adaptive threshold partitions
# ---------------------------------------------------------------------------

def _scan(spec: MeasureSpec, a: float, t: float, max_depth: int, collect: bool):
    """Shared traversal: emit good cubes (J_a < t), split bad ones."""
    ensure_valid(spec)
    if a <= 0:
        raise ValueError("a must be > 0")
    if not (t > 0):
        raise ValueError("threshold t must be > 0")
    m = spec.dim
    cubes: list[DyadicCube] = []
    masses: list[float] = []
    jvals: list[float] = []
    card = 0
    max_j = 0.0
    depth_max = 0
    # (level, index, cursor); cursor None encodes zero mass
    stack = [(0, (0,) * m, _root_cursor(spec))]
    while stack:
        level, index, cur = stack.pop()
        mass = cur.mass() if cur is not None else 0.0
        j = 2.0 ** (-level * m * a) * mass
        if j < t:
            card += 1
            if j > max_j:
                max_j = j
            if level > depth_max:
                depth_max = level
            if collect:
                cubes.append(DyadicCube(level, index))
                masses.append(mass)
                jvals.append(j)
            continue
        if level >= max_depth:
            raise MaxDepthExceeded(DyadicCube(level, index), j, t)
        kids = cur.split()
        for sel in range(len(kids) - 1, -1, -1):
            idx = tuple(2 * l + ((sel >> k) & 1) for k, l in enumerate(index))
            stack.append((level + 1, idx, kids[sel]))
    return cubes, masses, jvals, card, max_j, depth_max


def adaptive_partition(spec: MeasureSpec, a: float, t: float,
                       max_depth: int = DEFAULT_MAX_DEPTH) -> Partition:
    """Coarsest dyadic partition with J_a < t on every cube.

    Every emitted cube is good, and every emitted cube other than the unit
    cube has a bad parent; by that characterisation the result has minimal
    cardinality among dyadic partitions meeting the threshold.  Terminates
    because J_a(cube) <= 2^(-level*m*a) -> 0; ``max_depth`` only guards
    against inconsistent inputs.
    """
    cubes, masses, jvals, *_ = _scan(spec, a, t, max_depth, collect=True)
    return Partition(
        cubes=cubes,
        masses=np.asarray(masses),
        j_values=np.asarray(jvals),
        a=float(a),
        threshold=float(t),
    )


def counting_N(spec: MeasureSpec, a: float, t: float,
               max_depth: int = DEFAULT_MAX_DEPTH) -> int:
    """Minimal cardinality of a dyadic partition with max J_a < 1/t (the
    cardinality of the adaptive partition at threshold 1/t); an upper bound
    for the unconstrained partition problem over arbitrary subcubes."""
    if not (t > 0):
        raise ValueError("t must be > 0")
    *_, card, _, _ = _scan(spec, a, 1.0 / t, max_depth, collect=False)
    return card


# ---------------------------------------------------------------------------
# Greedy refinement profile (all adaptive partitions in one sweep)
# ---------------------------------------------------------------------------

def refinement_profile(spec: MeasureSpec, a: float, budget_cap: int,
                       max_depth: int = DEFAULT_MAX_DEPTH) -> np.ndarray:
    """States (cardinality, max J_a) of the adaptive family, coarse to fine.

    Repeatedly splits every cube tied at the current largest J_a; each
    recorded state equals the adaptive partition for thresholds t in
    (next max, current max].  Stops once the cardinality exceeds
    ``budget_cap`` or everything remaining is zero-weight.
    """
    ensure_valid(spec)
    if a <= 0:
        raise ValueError("a must be > 0")
    if budget_cap < 1:
        raise ValueError("budget_cap must be >= 1")
    m = spec.dim
    counter = itertools.count()
    root = _root_cursor(spec)
    heap = [(-root.mass(), next(counter), 0, (0,) * m, root)]
    states = []
    while heap:
        j_top = -heap[0][0]
        card = len(heap)
        states.append((card, j_top))
        if card > budget_cap or j_top <= 0.0:
            break
        batch = []
        while heap and -heap[0][0] == j_top:
            batch.append(heapq.heappop(heap))
        for _, _, level, index, cur in batch:
            if level >= max_depth:
                raise MaxDepthExceeded(DyadicCube(level, index), j_top, 0.0)
            for sel, child in enumerate(cur.split()):
                idx = tuple(2 * l + ((sel >> k) & 1) for k, l in enumerate(index))
                if child is None:
                    heapq.heappush(heap, (0.0, next(counter), level + 1, idx, None))
                else:
                    j = 2.0 ** (-(level + 1) * m * a) * child.mass()
                    heapq.heappush(heap, (-j, next(counter), level + 1, idx, child))
    return np.asarray(states, dtype=float)


def budget_partition(spec: MeasureSpec, a: float, budget: int,
                     max_depth: int = DEFAULT_MAX_DEPTH) -> Partition:
    """The adaptive-family partition of largest cardinality <= budget (the
    one whose max J_a realises gamma_hat(budget))."""
    states = refinement_profile(spec, a, int(budget), max_depth=max_depth)
    cards = states[:, 0]
    k = int(np.searchsorted(cards, budget, side="right")) - 1
    if k < 0:
        raise ValueError(f"budget {budget} below the coarsest state")
    j_top = states[k, 1]
    # every cube of that state has J_a <= j_top, so the threshold just above
    # j_top reproduces it exactly
    return adaptive_partition(spec, a, float(np.nextafter(j_top, np.inf)),
                              max_depth=max_depth)


def gamma_adaptive_profile(spec: MeasureSpec, a: float, budgets: Sequence[int],
                           max_depth: int = DEFAULT_MAX_DEPTH) -> np.ndarray:
    """Upper bounds gamma_hat(n) on the optimal max J_a for each cube budget
    n, from the adaptive family (the best adaptive state of cardinality <= n)."""
    budgets = [int(n) for n in budgets]
    if any(n < 1 for n in budgets):
        raise ValueError("budgets must be >= 1")
    states = refinement_profile(spec, a, max(budgets), max_depth=max_depth)
    cards = states[:, 0]
    out = []
    for n in budgets:
        k = int(np.searchsorted(cards, n, side="right")) - 1
        if k < 0:
            raise ValueError(f"budget {n} below the coarsest state")
        out.append(states[k, 1])
    return np.asarray(out)


# ---------------------------------------------------------------------------
# Exact dyadic oracle (dynamic programming over the subdivision tree)
# ---------------------------------------------------------------------------

def _minmax_fold(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """out[k] = min over i+j=k (i, j >= 1) of max(A[i], B[j]); index 0 is inf."""
    L = len(A)
    out = np.full(L, np.inf)
    for i in range(1, L - 1):
        hi = L - i
        cand = np.maximum(A[i], B[1:hi])
        out[i + 1:] = np.minimum(out[i + 1:], cand)
    return out


def _selfsimilar_gamma_vector(weights: Sequence[float], m: int, a: float,
                              k_max: int) -> np.ndarray:
    """Exact oracle vector for measures whose every positive cube carries a
    full rescaled copy of the measure (ratio-1/2 dyadic IFS, Lebesgue):
    v(subtree)[k] = mass * vol^a * V[k] with one budget-indexed recursion
    V[k] = min(1, best split of k-zeros among the child copies scaled by
    p_i 2^(-ma)).  No depth cap is needed; the recursion is well founded in k."""
    size = k_max + 1
    nz = len(weights)
    zeros = (1 << m) - nz
    scale = np.asarray(weights, dtype=float) * 2.0 ** (-m * a)
    V = np.full(size, np.inf)
    if size > 1:
        V[1] = 1.0
    for k in range(2, size):
        F = scale[0] * V
        for i in range(1, nz):
            F = _minmax_fold(F, scale[i] * V)
        idx = k - zeros
        if 1 <= idx < size and np.isfinite(F[idx]):
            V[k] = min(1.0, F[idx])
        else:
            V[k] = 1.0
    return V


def gamma_dyadic_vector(spec: MeasureSpec, a: float, k_max: int,
                        max_depth: int = DEFAULT_MAX_DEPTH) -> np.ndarray:
    """vector v with v[k] = exact min over partitions of the unit cube into at
    most k dyadic cubes of depth <= max_depth of the max J_a, for k = 1..k_max
    (v[0] = inf).  Budgets prune the recursion: a subtree handed k cubes can
    split at most (k-1)/(2^m-1) more times, so the walk stays near-linear in
    k_max for thin supports.  Full-support self-similar measures (Lebesgue,
    dyadic IFS with all ratios 1/2) dispatch to an exact budget-indexed
    recursion instead, for which max_depth never binds."""
    ensure_valid(spec)
    if a <= 0:
        raise ValueError("a must be > 0")
    if k_max < 1:
        raise ValueError("infeasible budget: k_max must be >= 1")
    m = spec.dim
    from .measures import DyadicIFS, Lebesgue  # local to avoid cycle clutter

    if isinstance(spec, Lebesgue):
        return _selfsimilar_gamma_vector([2.0 ** (-m)] * (1 << m), m, a, k_max)
    if isinstance(spec, DyadicIFS) and all(mp.ratio_log2 == 1 for mp in spec.maps):
        return _selfsimilar_gamma_vector(list(spec.weights), m, a, k_max)
    nkids = 1 << m
    size = k_max + 1

    def vec(cur, level, usable):
        j_here = 2.0 ** (-level * m * a) * cur.mass()
        out = np.full(size, j_here)
        out[0] = np.inf
        if usable >= nkids and level < max_depth:
            kids = cur.split()
            nz = [c for c in kids if c is not None]
            zeros = nkids - len(nz)
            child_usable = usable - (nkids - 1)
            if nz:
                acc = vec(nz[0], level + 1, child_usable)
                for c in nz[1:]:
                    acc = _minmax_fold(acc, vec(c, level + 1, child_usable))
            else:
                acc = np.full(size, np.inf)
                acc[0] = 0.0  # zero-mass interior: resolved below by the shift
            if zeros:
                shifted = np.full(size, np.inf)
                shifted[zeros:] = acc[: size - zeros]
                acc = shifted
            out = np.minimum(out, acc)
        return out

    return vec(_root_cursor(spec), 0, k_max)


def gamma_dyadic_oracle(spec: MeasureSpec, a: float, n_cells: int,
                        max_depth: int = DEFAULT_MAX_DEPTH) -> float:
    """Exact minimum of max J_a over partitions into <= n_cells dyadic cubes
    of depth <= max_depth.  Serves as the independent oracle for the
    adaptive partitions and as an upper bound for the optimisation over
    arbitrary axis-aligned subcubes."""
    return float(gamma_dyadic_vector(spec, a, n_cells, max_depth)[n_cells])


def minimal_dyadic_cardinality(spec: MeasureSpec, a: float, t: float,
                               k_cap: int, max_depth: int = DEFAULT_MAX_DEPTH) -> int:
    """Smallest k with an exact dyadic partition of max J_a < t, searched up
    to k_cap; raises if no budget up to k_cap is feasible."""
    v = gamma_dyadic_vector(spec, a, k_cap, max_depth)
    feasible = np.nonzero(v < t)[0]
    if len(feasible) == 0:
        raise ValueError(f"no dyadic partition with max J_a < {t} within {k_cap} cubes")
    return int(feasible[0])


# ---------------------------------------------------------------------------
# Partition entropy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyFit:
    """Least-squares growth exponent of the minimal partition cardinality.

    ``cards[i]`` is the cardinality of the adaptive partition at threshold
    1/t_grid[i]; ``slope`` fits log(card) against log(t) over the tail half
    of the grid (index >= tail_start).  r_squared and the residual spread
    qualify the fit; there is no convergence guarantee to quote.
    """

    a: float
    t_grid: np.ndarray
    cards: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    tail_start: int


def entropy_estimate(spec: MeasureSpec, a: float, t_grid: Sequence[float],
                     max_depth: int = DEFAULT_MAX_DEPTH) -> EntropyFit:
    """Fit the partition-entropy exponent over a geometric grid of t values
    (increasing t means shrinking threshold 1/t)."""
    t = np.asarray(list(t_grid), dtype=float)
    if len(t) < 4 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("degenerate grid: need >= 4 strictly increasing positive t values")
    cards = np.array([counting_N(spec, a, float(ti), max_depth) for ti in t], dtype=float)
    tail = len(t) // 2
    x = np.log(t[tail:])
    y = np.log(cards[tail:])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return EntropyFit(
        a=float(a),
        t_grid=t,
        cards=cards,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        tail_start=tail,
    )
