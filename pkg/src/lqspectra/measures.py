"""Borel probability measures on the half-open unit cube and their dyadic-cube masses.

Geometry is exact: cube coordinates, IFS offsets and atom positions are
rational numbers (dyadic integers or :class:`fractions.Fraction`), so
containment and disjointness predicates never suffer rounding.  Masses are
ordinary floats; they are exact products/sums of the input weights for
every measure family except ``GeneralIFS1D``, whose recursive evaluation is
truncated at the spec's mass tolerance.

Conventions
-----------
* The unit cube is the half-open product Q = (0, 1]^m, and a level-n dyadic
  cube with index vector l is prod_k (l_k 2^-n, (l_k+1) 2^-n].  An atom
  sitting on a dyadic boundary therefore belongs to exactly one cube: the
  one whose closed right face contains it.
* IFS maps are positive homotheties x -> r*x + c (no rotations or
  reflections), so preimages of boxes are boxes.
* All measures are probability measures; ``validate`` reports normalization
  defects beyond 1e-12.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "DyadicCube",
    "unit_cube",
    "children",
    "Lebesgue",
    "DyadicMap",
    "DyadicIFS",
    "Homothety1D",
    "GeneralIFS1D",
    "Atomic",
    "DyadicDensity",
    "Mixture",
    "MeasureSpec",
    "InvalidMeasureError",
    "validate",
    "ensure_valid",
    "cube_mass",
    "support_cubes",
    "support_masses",
    "support_with_masses",
    "parse_spec",
    "spec_to_dict",
    "load_spec",
    "save_spec",
    "dirac",
    "binomial_ifs",
    "sierpinski_tetrahedron",
    "cantor_measure",
    "exp_decay_atoms",
]

NORMALIZATION_TOL = 1e-12

Rational = Union[int, float, Fraction]


def _as_fraction(x) -> Fraction:
    """Coerce ints, floats (exact binary rationals), Fractions or JSON rational
    objects ({"num", "den"} or {"num", "log2_den"}) to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a coordinate")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # floats are exact dyadic rationals
    if isinstance(x, dict):
        if "log2_den" in x:
            return Fraction(int(x["num"]), 2 ** int(x["log2_den"]))
        return Fraction(int(x["num"]), int(x["den"]))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


# ---------------------------------------------------------------------------
# Dyadic cubes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicCube:
    """Half-open dyadic cube prod_k (l_k 2^-n, (l_k+1) 2^-n].

    Parameters
    ----------
    level : int
        Subdivision depth n >= 0.
    index : tuple[int, ...]
        Integer corner vector l with 0 <= l_k < 2^n; its length is the
        ambient dimension.
    """

    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("cube level must be >= 0")
        top = 1 << self.level
        if not self.index or any(l < 0 or l >= top for l in self.index):
            raise ValueError(
                f"cube index {self.index} out of range for level {self.level}"
            )

    @property
    def dim(self) -> int:
        return len(self.index)

    def volume(self) -> float:
        return math.ldexp(1.0, -self.level * self.dim)

    def volume_fraction(self) -> Fraction:
        return Fraction(1, 1 << (self.level * self.dim))

    def bounds(self) -> list[tuple[Fraction, Fraction]]:
        """Per-coordinate half-open intervals (lo, hi], as exact Fractions."""
        den = 1 << self.level
        return [(Fraction(l, den), Fraction(l + 1, den)) for l in self.index]

    def child(self, selector: int) -> "DyadicCube":
        """Child cube number ``selector`` in {0, ..., 2^m - 1}; bit k of the
        selector picks the upper half along coordinate k."""
        idx = tuple(2 * l + ((selector >> k) & 1) for k, l in enumerate(self.index))
        return DyadicCube(self.level + 1, idx)

    def children(self) -> list["DyadicCube"]:
        return [self.child(j) for j in range(1 << self.dim)]

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("the unit cube has no parent")
        return DyadicCube(self.level - 1, tuple(l >> 1 for l in self.index))

    def selector_path(self) -> list[int]:
        """Child selectors leading from the unit cube to this cube."""
        path = []
        for d in range(1, self.level + 1):
            sel = 0
            for k, l in enumerate(self.index):
                sel |= ((l >> (self.level - d)) & 1) << k
            path.append(sel)
        return path

    def contains_point(self, point: Sequence[Rational]) -> bool:
        """Exact half-open membership test."""
        if len(point) != self.dim:
            raise ValueError("point dimension mismatch")
        den = 1 << self.level
        for l, x in zip(self.index, point):
            xf = _as_fraction(x)
            if not (Fraction(l, den) < xf <= Fraction(l + 1, den)):
                return False
        return True


def unit_cube(dim: int) -> DyadicCube:
    return DyadicCube(0, (0,) * dim)


def children(cube: DyadicCube) -> list[DyadicCube]:
    """The 2^m disjoint level-(n+1) cubes whose union is ``cube``."""
    return cube.children()


def cube_containing(point: Sequence[Rational], level: int) -> DyadicCube:
    """The unique level-n cube whose half-open body contains ``point``."""
    idx = []
    scale = 1 << level
    for x in point:
        xf = _as_fraction(x)
        if not (0 < xf <= 1):
            raise ValueError(f"point coordinate {x} outside (0, 1]")
        l = -((-xf.numerator * scale) // xf.denominator) - 1  # ceil(x*2^n) - 1
        idx.append(int(l))
    return DyadicCube(level, tuple(idx))


# ---------------------------------------------------------------------------
# Measure specifications
# ---------------------------------------------------------------------------

class MeasureSpec:
    """Base class for declarative measure descriptions.

    Instances are immutable after construction; every operation in the
    package treats them as pure values, so they may be shared freely across
    threads.
    """

    @property
    def dim(self) -> int:  # pragma: no cover - overridden
        raise NotImplementedError

    def violations(self) -> list[str]:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Lebesgue(MeasureSpec):
    """Lebesgue measure restricted to the unit cube (0, 1]^m."""

    dimension: int = 1

    @property
    def dim(self) -> int:
        return self.dimension

    def violations(self) -> list[str]:
        return [] if self.dimension >= 1 else ["dimension must be >= 1"]


@dataclass(frozen=True)
class DyadicMap:
    """Homothety T(x) = 2^-e x + offset with a dyadic offset on the 2^-e grid."""

    ratio_log2: int
    offset: tuple[Fraction, ...]

    def image_cube(self) -> DyadicCube:
        """T((0,1]^m) as a dyadic cube; requires the offset to be e-dyadic."""
        e = self.ratio_log2
        idx = []
        for c in self.offset:
            scaled = c * (1 << e)
            if scaled.denominator != 1:
                raise ValueError(
                    f"offset {c} is not a multiple of 2^-{e}; image is not a dyadic cube"
                )
            idx.append(int(scaled))
        return DyadicCube(e, tuple(idx))


def _make_dyadic_map(ratio_log2: int, offset) -> DyadicMap:
    off = tuple(_as_fraction(c) for c in offset)
    return DyadicMap(int(ratio_log2), off)


@dataclass(frozen=True)
class DyadicIFS(MeasureSpec):
    """Self-similar measure for homotheties with ratios 2^-e_i and dyadic
    offsets, so every image of a dyadic cube is again a dyadic cube and all
    cube masses are exact products of the weights."""

    dimension: int
    maps: tuple[DyadicMap, ...]
    weights: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.dimension

    def violations(self) -> list[str]:
        out = []
        if self.dimension < 1:
            out.append("dimension must be >= 1")
        if len(self.maps) != len(self.weights):
            out.append("maps and weights must have equal length")
            return out
        if not self.maps:
            out.append("at least one map is required")
            return out
        out.extend(_check_weights(self.weights, "weights"))
        images = []
        for i, mp in enumerate(self.maps):
            if mp.ratio_log2 < 1:
                out.append(f"map {i}: ratio exponent must be >= 1")
                continue
            if len(mp.offset) != self.dimension:
                out.append(f"map {i}: offset dimension mismatch")
                continue
            try:
                img = mp.image_cube()
            except ValueError as exc:
                out.append(f"map {i}: {exc}")
                continue
            images.append((i, img))
        for ai in range(len(images)):
            for bi in range(ai + 1, len(images)):
                i, a = images[ai]
                j, b = images[bi]
                if _cubes_overlap(a, b):
                    out.append(f"images of maps {i} and {j} overlap")
        return out

    def map_cube(self, i: int, cube: DyadicCube) -> DyadicCube:
        """Image T_i(cube), again a dyadic cube."""
        img = self.maps[i].image_cube()
        e = self.maps[i].ratio_log2
        idx = tuple(l + (k << cube.level) for l, k in zip(cube.index, img.index))
        return DyadicCube(cube.level + e, idx)

    def preimage_cube(self, i: int, cube: DyadicCube) -> DyadicCube:
        """T_i^-1(cube) for a cube contained in the image of T_i."""
        img = self.maps[i].image_cube()
        e = self.maps[i].ratio_log2
        if cube.level < e:
            raise ValueError("cube is coarser than the image of the map")
        idx = []
        for l, k in zip(cube.index, img.index):
            shifted = l - (k << (cube.level - e))
            if shifted < 0 or shifted >= (1 << (cube.level - e)):
                raise ValueError("cube is not contained in the image of the map")
            idx.append(shifted)
        return DyadicCube(cube.level - e, tuple(idx))


def _cubes_overlap(a: DyadicCube, b: DyadicCube) -> bool:
    if a.level > b.level:
        a, b = b, a
    shift = b.level - a.level
    return all((lb >> shift) == la for la, lb in zip(a.index, b.index))


@dataclass(frozen=True)
class Homothety1D:
    """T(x) = ratio * x + offset on [0, 1], with exact rational parameters."""

    ratio: Fraction
    offset: Fraction


@dataclass(frozen=True)
class GeneralIFS1D(MeasureSpec):
    """Self-similar measure on [0, 1] for arbitrary rational contraction
    ratios (e.g. the ratio-1/3 Cantor measure).

    Interval masses are evaluated by the self-similarity recursion
    nu(I) = sum_i p_i nu(T_i^-1(I cap T_i([0,1]))); branches whose weight
    drops below an internal cut derived from ``mass_tol`` are resolved
    proportionally, so each returned mass is within ``mass_tol`` of the
    true value and parent/child additivity holds within 2*mass_tol.
    """

    maps: tuple[Homothety1D, ...]
    weights: tuple[float, ...]
    mass_tol: float = 1e-12

    @property
    def dim(self) -> int:
        return 1

    def violations(self) -> list[str]:
        out = []
        if len(self.maps) != len(self.weights):
            return ["maps and weights must have equal length"]
        if len(self.maps) < 2:
            out.append("at least two maps are required (one map degenerates to a point mass)")
        out.extend(_check_weights(self.weights, "weights"))
        if not (0 < self.mass_tol <= 1e-3):
            out.append("mass_tol must lie in (0, 1e-3]")
        for i, mp in enumerate(self.maps):
            if not (0 < mp.ratio < 1):
                out.append(f"map {i}: ratio must lie in (0, 1)")
            if mp.offset < 0 or mp.offset + mp.ratio > 1:
                out.append(f"map {i}: image [{mp.offset}, {mp.offset + mp.ratio}] leaves [0, 1]")
        ordered = sorted(range(len(self.maps)), key=lambda i: self.maps[i].offset)
        for a, b in zip(ordered, ordered[1:]):
            end_a = self.maps[a].offset + self.maps[a].ratio
            if self.maps[b].offset < end_a:
                out.append(f"images of maps {a} and {b} overlap beyond an endpoint")
        return out


@dataclass(frozen=True)
class Atomic(MeasureSpec):
    """Purely atomic measure: finitely many point masses in the open cube."""

    points: tuple[tuple[Fraction, ...], ...]
    weights: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.points[0]) if self.points else 1

    def violations(self) -> list[str]:
        out = []
        if not self.points:
            return ["at least one atom is required"]
        if len(self.points) != len(self.weights):
            return ["points and weights must have equal length"]
        m = len(self.points[0])
        for i, pt in enumerate(self.points):
            if len(pt) != m:
                out.append(f"atom {i}: dimension mismatch")
                continue
            if any(not (0 < x < 1) for x in pt):
                out.append(f"atom {i}: point must lie in the open cube (0,1)^m")
        if len(set(self.points)) != len(self.points):
            out.append("duplicate atom positions")
        out.extend(_check_weights(self.weights, "weights"))
        return out


@dataclass(frozen=True, eq=False)
class DyadicDensity(MeasureSpec):
    """Piecewise-constant density on the level-D dyadic grid.

    ``values[l_1, ..., l_m]`` is the density on the level-D cube with index
    (l_1, ..., l_m); the cell mass is the density times the cell volume.
    """

    depth: int
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.ndim

    def violations(self) -> list[str]:
        out = []
        if self.depth < 0:
            out.append("depth must be >= 0")
        side = 1 << self.depth
        if any(s != side for s in self.values.shape):
            out.append(f"values must have shape ({side},)*m for depth {self.depth}")
            return out
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            out.append("density values must be finite and >= 0")
        total = float(self.values.sum()) * math.ldexp(1.0, -self.depth * self.dim)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            out.append(f"total mass is {total!r}, not 1")
        return out


@dataclass(frozen=True)
class Mixture(MeasureSpec):
    """Convex combination of measure specs of a common dimension."""

    components: tuple[tuple[float, MeasureSpec], ...]

    @property
    def dim(self) -> int:
        return self.components[0][1].dim

    def violations(self) -> list[str]:
        if not self.components:
            return ["at least one component is required"]
        out = []
        coefs = [c for c, _ in self.components]
        if any(c < 0 for c in coefs):
            out.append("mixture coefficients must be >= 0")
        if abs(sum(coefs) - 1.0) > NORMALIZATION_TOL:
            out.append(f"coefficients sum to {sum(coefs)!r}, not 1")
        dims = {spec.dim for _, spec in self.components}
        if len(dims) > 1:
            out.append(f"components have mixed dimensions {sorted(dims)}")
        for i, (_, spec) in enumerate(self.components):
            out.extend(f"component {i}: {v}" for v in spec.violations())
        return out


def _check_weights(weights: Sequence[float], label: str) -> list[str]:
    out = []
    if any((not math.isfinite(w)) or w <= 0 for w in weights):
        out.append(f"{label} must be finite and > 0")
    total = math.fsum(weights)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        out.append(f"{label} sum to {total!r}, not 1")
    return out


class InvalidMeasureError(ValueError):
    """Raised when an operation receives a spec that fails validation."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid measure spec: " + "; ".join(violations))


def validate(spec: MeasureSpec) -> list[str]:
    """Return the list of constraint violations (empty when the spec is valid)."""
    return spec.violations()


def ensure_valid(spec: MeasureSpec) -> None:
    bad = spec.violations()
    if bad:
        raise InvalidMeasureError(bad)


# ---------------------------------------------------------------------------
# Mass cursors
#
# A cursor represents one dyadic cube together with just enough state to
# give its nu-mass and to produce the cursors of its 2^m children.  All
# traversals (support enumeration, adaptive partitioning, discretization)
# run on this shared machinery, so exactness properties are uniform.
# ---------------------------------------------------------------------------

class _Cursor:
    __slots__ = ()

    def mass(self) -> float:  # pragma: no cover - overridden
        raise NotImplementedError

    def split(self) -> list["_Cursor | None"]:
        """Children in selector order; ``None`` marks a zero-mass child."""
        raise NotImplementedError  # pragma: no cover


class _LebCursor(_Cursor):
    __slots__ = ("m", "level")

    def __init__(self, m, level=0):
        self.m = m
        self.level = level

    def mass(self):
        return math.ldexp(1.0, -self.level * self.m)

    def split(self):
        child = _LebCursor(self.m, self.level + 1)
        return [child] * (1 << self.m)


class _IfsTables:
    """Precomputed selector paths of the image cubes of a DyadicIFS."""

    __slots__ = ("spec", "paths", "weights", "nmaps")

    def __init__(self, spec: DyadicIFS):
        self.spec = spec
        self.weights = spec.weights
        self.nmaps = len(spec.maps)
        self.paths = [mp.image_cube().selector_path() for mp in spec.maps]


class _IfsCursor(_Cursor):
    """Branch list semantics: ("copy", w) puts a full rescaled copy of the
    measure inside this cube with total mass w; ("img", w, i, d) records
    that the image of map i lies strictly inside this cube (this cube is
    its depth-d ancestor), contributing mass w."""

    __slots__ = ("tab", "branches")

    def __init__(self, tab: _IfsTables, branches):
        self.tab = tab
        self.branches = branches

    def mass(self):
        return math.fsum(br[1] for br in self.branches)

    def split(self):
        tab = self.tab
        buckets: dict[int, list] = {}
        for br in self.branches:
            if br[0] == "copy":
                w = br[1]
                for i in range(tab.nmaps):
                    path = tab.paths[i]
                    wi = w * tab.weights[i]
                    if len(path) == 1:
                        entry = ("copy", wi)
                    else:
                        entry = ("img", wi, i, 1)
                    buckets.setdefault(path[0], []).append(entry)
            else:
                _, w, i, d = br
                path = tab.paths[i]
                if d + 1 == len(path):
                    entry = ("copy", w)
                else:
                    entry = ("img", w, i, d + 1)
                buckets.setdefault(path[d], []).append(entry)
        return [
            _IfsCursor(self.tab, buckets[j]) if j in buckets else None
            for j in range(1 << self.tab.spec.dimension)
        ]


class _Ifs1DCursor(_Cursor):
    __slots__ = ("spec", "lo", "hi", "_mass")

    def __init__(self, spec: GeneralIFS1D, lo: Fraction, hi: Fraction):
        self.spec = spec
        self.lo = lo
        self.hi = hi
        self._mass = None

    def mass(self):
        if self._mass is None:
            self._mass = _ifs1d_interval_mass(self.spec, self.lo, self.hi)
        return self._mass

    def split(self):
        mid = (self.lo + self.hi) / 2
        left = _Ifs1DCursor(self.spec, self.lo, mid)
        right = _Ifs1DCursor(self.spec, mid, self.hi)
        return [c if c.mass() > 0.0 else None for c in (left, right)]


def _ifs1d_interval_mass(spec: GeneralIFS1D, lo: Fraction, hi: Fraction) -> float:
    """nu((lo, hi]) within mass_tol.  Only branches whose image straddles an
    endpoint recurse; each endpoint owns at most one straddling chain, so the
    proportional cut at weight < mass_tol/4 keeps the total error < mass_tol/2."""
    cut = spec.mass_tol / 4.0
    params = [(mp.ratio, mp.offset, p) for mp, p in zip(spec.maps, spec.weights)]

    def rec(a: Fraction, b: Fraction, w: float) -> float:
        if a < 0:
            a = Fraction(0)
        if b > 1:
            b = Fraction(1)
        if b <= a:
            return 0.0
        if a == 0 and b == 1:
            return w
        if w < cut:
            return w * float(b - a)
        total = 0.0
        for r, c, p in params:
            total += rec((a - c) / r, (b - c) / r, w * p)
        return total

    return rec(lo, hi, 1.0)


class _AtomicCursor(_Cursor):
    __slots__ = ("spec", "level", "index", "ids", "_mass")

    def __init__(self, spec: Atomic, level, index, ids):
        self.spec = spec
        self.level = level
        self.index = index
        self.ids = ids
        self._mass = None

    def mass(self):
        if self._mass is None:
            w = self.spec.weights
            self._mass = math.fsum(w[i] for i in self.ids)
        return self._mass

    def split(self):
        m = self.spec.dim
        nxt = self.level + 1
        buckets: dict[int, list] = {}
        for i in self.ids:
            pt = self.spec.points[i]
            sel = 0
            for k in range(m):
                # child bit 0 iff x_k <= (2 l_k + 1) / 2^(n+1), exactly
                x = pt[k]
                if x.numerator * (1 << nxt) > (2 * self.index[k] + 1) * x.denominator:
                    sel |= 1 << k
            buckets.setdefault(sel, []).append(i)
        out = []
        for j in range(1 << m):
            if j in buckets:
                idx = tuple(2 * l + ((j >> k) & 1) for k, l in enumerate(self.index))
                out.append(_AtomicCursor(self.spec, nxt, idx, buckets[j]))
            else:
                out.append(None)
        return out


class _DensityCursor(_Cursor):
    __slots__ = ("spec", "pyramid", "level", "index", "density")

    def __init__(self, spec, pyramid, level, index, density=None):
        self.spec = spec
        self.pyramid = pyramid
        self.level = level
        self.index = index
        self.density = density  # set once level >= depth

    def mass(self):
        if self.level <= self.spec.depth:
            block = self.pyramid[self.level][self.index]
            return float(block) * math.ldexp(1.0, -self.spec.depth * self.spec.dim)
        return self.density * math.ldexp(1.0, -self.level * self.spec.dim)

    def split(self):
        m = self.spec.dim
        out = []
        for j in range(1 << m):
            idx = tuple(2 * l + ((j >> k) & 1) for k, l in enumerate(self.index))
            if self.level + 1 <= self.spec.depth:
                child = _DensityCursor(self.spec, self.pyramid, self.level + 1, idx)
            else:
                dens = self.density
                if dens is None:
                    dens = float(self.spec.values[self.index])
                child = _DensityCursor(self.spec, self.pyramid, self.level + 1, idx, dens)
            out.append(child if child.mass() > 0.0 else None)
        return out


def _density_pyramid(spec: DyadicDensity) -> list[np.ndarray]:
    """pyramid[l][idx] = sum of level-D density values inside the level-l cube."""
    m = spec.dim
    levels = [np.asarray(spec.values, dtype=float)]
    for _ in range(spec.depth):
        arr = levels[-1]
        for axis in range(m):
            n = arr.shape[axis]
            arr = arr.reshape(arr.shape[:axis] + (n // 2, 2) + arr.shape[axis + 1:]).sum(axis + 1)
        levels.append(arr)
    levels.reverse()
    return levels


class _MixCursor(_Cursor):
    __slots__ = ("dim", "parts")

    def __init__(self, dim, parts):
        self.dim = dim
        self.parts = parts  # list of (coef, cursor)

    def mass(self):
        return math.fsum(c * cur.mass() for c, cur in self.parts)

    def split(self):
        split_parts = [(c, cur.split()) for c, cur in self.parts]
        out = []
        for j in range(1 << self.dim):
            sub = [(c, ch[j]) for c, ch in split_parts if ch[j] is not None]
            out.append(_MixCursor(self.dim, sub) if sub else None)
        return out


def _root_cursor(spec: MeasureSpec) -> _Cursor:
    if isinstance(spec, Lebesgue):
        return _LebCursor(spec.dimension)
    if isinstance(spec, DyadicIFS):
        return _IfsCursor(_IfsTables(spec), [("copy", 1.0)])
    if isinstance(spec, GeneralIFS1D):
        return _Ifs1DCursor(spec, Fraction(0), Fraction(1))
    if isinstance(spec, Atomic):
        return _AtomicCursor(spec, 0, (0,) * spec.dim, list(range(len(spec.points))))
    if isinstance(spec, DyadicDensity):
        return _DensityCursor(spec, _density_pyramid(spec), 0, (0,) * spec.dim)
    if isinstance(spec, Mixture):
        return _MixCursor(spec.dim, [(c, _root_cursor(s)) for c, s in spec.components if c > 0.0])
    raise TypeError(f"unknown measure spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Mass queries
# ---------------------------------------------------------------------------

def cube_mass(spec: MeasureSpec, cube: DyadicCube) -> float:
    """nu(cube).

    Exact (a finite sum of weight products) for Lebesgue, DyadicIFS, Atomic,
    DyadicDensity and mixtures thereof; within ``mass_tol`` for GeneralIFS1D.
    """
    ensure_valid(spec)
    if cube.dim != spec.dim:
        raise ValueError(f"cube dimension {cube.dim} != measure dimension {spec.dim}")
    cur: _Cursor | None = _root_cursor(spec)
    for sel in cube.selector_path():
        cur = cur.split()[sel]
        if cur is None:
            return 0.0
    return cur.mass()


def support_with_masses(spec: MeasureSpec, n: int) -> tuple[list[DyadicCube], np.ndarray]:
    """All level-n cubes of positive mass (depth-first selector order) with
    their masses.  The descent prunes zero-mass subtrees, so thin supports
    never cost 2^(nm) work."""
    ensure_valid(spec)
    if n < 0:
        raise ValueError("level must be >= 0")
    m = spec.dim
    cubes: list[DyadicCube] = []
    masses: list[float] = []
    # stack of (level, index, cursor); selectors pushed in reverse for
    # ascending depth-first order
    stack = [(0, (0,) * m, _root_cursor(spec))]
    while stack:
        level, index, cur = stack.pop()
        if level == n:
            mass = cur.mass()
            if mass > 0.0:
                cubes.append(DyadicCube(level, index))
                masses.append(mass)
            continue
        kids = cur.split()
        for j in range(len(kids) - 1, -1, -1):
            if kids[j] is not None:
                idx = tuple(2 * l + ((j >> k) & 1) for k, l in enumerate(index))
                stack.append((level + 1, idx, kids[j]))
    return cubes, np.asarray(masses, dtype=float)


def support_cubes(spec: MeasureSpec, n: int) -> list[DyadicCube]:
    """Exactly the level-n dyadic cubes with nu(cube) > 0."""
    return support_with_masses(spec, n)[0]


def support_masses(spec: MeasureSpec, n: int) -> np.ndarray:
    """Masses of the positive level-n cubes (order not meaningful).

    Fast closed-form paths cover Lebesgue and DyadicIFS with all ratios 1/2;
    they return the same multiset as the generic descent.
    """
    ensure_valid(spec)
    if n < 0:
        raise ValueError("level must be >= 0")
    if isinstance(spec, Lebesgue):
        return np.full(1 << (n * spec.dimension), math.ldexp(1.0, -n * spec.dimension))
    if isinstance(spec, DyadicIFS) and all(mp.ratio_log2 == 1 for mp in spec.maps):
        out = np.array([1.0])
        w = np.asarray(spec.weights)
        for _ in range(n):
            out = (out[:, None] * w[None, :]).ravel()
        return out
    return support_with_masses(spec, n)[1]


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def _fraction_to_json(x: Fraction):
    num, den = x.numerator, x.denominator
    if den & (den - 1) == 0:  # power of two
        return {"num": num, "log2_den": den.bit_length() - 1}
    return {"num": num, "den": den}


def spec_to_dict(spec: MeasureSpec) -> dict:
    if isinstance(spec, Lebesgue):
        return {"type": "lebesgue", "dimension": spec.dimension}
    if isinstance(spec, DyadicIFS):
        return {
            "type": "dyadic_ifs",
            "dimension": spec.dimension,
            "maps": [
                {"ratio_log2": mp.ratio_log2, "offset": [_fraction_to_json(c) for c in mp.offset]}
                for mp in spec.maps
            ],
            "weights": list(spec.weights),
        }
    if isinstance(spec, GeneralIFS1D):
        return {
            "type": "ifs_1d",
            "maps": [
                {"ratio": _fraction_to_json(mp.ratio), "offset": _fraction_to_json(mp.offset)}
                for mp in spec.maps
            ],
            "weights": list(spec.weights),
            "mass_tol": spec.mass_tol,
        }
    if isinstance(spec, Atomic):
        return {
            "type": "atomic",
            "atoms": [
                {"point": [_fraction_to_json(x) for x in pt], "weight": w}
                for pt, w in zip(spec.points, spec.weights)
            ],
        }
    if isinstance(spec, DyadicDensity):
        return {"type": "dyadic_density", "depth": spec.depth, "values": spec.values.tolist()}
    if isinstance(spec, Mixture):
        return {
            "type": "mixture",
            "components": [
                {"coefficient": c, "spec": spec_to_dict(s)} for c, s in spec.components
            ],
        }
    raise TypeError(f"unknown measure spec {type(spec).__name__}")


def parse_spec(doc: dict) -> MeasureSpec:
    """Build a MeasureSpec from its JSON document (see README for the schema).

    Raises ValueError with a descriptive message on malformed input; call
    :func:`validate` afterwards for semantic constraints.
    """
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValueError("measure spec document must be an object with a 'type' tag")
    kind = doc["type"]
    try:
        if kind == "lebesgue":
            return Lebesgue(int(doc["dimension"]))
        if kind == "dyadic_ifs":
            maps = tuple(
                _make_dyadic_map(mp["ratio_log2"], mp["offset"]) for mp in doc["maps"]
            )
            return DyadicIFS(int(doc["dimension"]), maps, tuple(float(w) for w in doc["weights"]))
        if kind == "ifs_1d":
            maps = tuple(
                Homothety1D(_as_fraction(mp["ratio"]), _as_fraction(mp["offset"]))
                for mp in doc["maps"]
            )
            return GeneralIFS1D(
                maps,
                tuple(float(w) for w in doc["weights"]),
                float(doc.get("mass_tol", 1e-12)),
            )
        if kind == "atomic":
            pts = tuple(tuple(_as_fraction(x) for x in atom["point"]) for atom in doc["atoms"])
            ws = tuple(float(atom["weight"]) for atom in doc["atoms"])
            return Atomic(pts, ws)
        if kind == "dyadic_density":
            values = np.asarray(doc["values"], dtype=float)
            return DyadicDensity(int(doc["depth"]), values)
        if kind == "mixture":
            comps = tuple(
                (float(c["coefficient"]), parse_spec(c["spec"])) for c in doc["components"]
            )
            return Mixture(comps)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed '{kind}' measure spec: {exc!r}") from exc
    raise ValueError(f"unknown measure type {kind!r}")


def load_spec(path: str | Path) -> MeasureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_spec(doc)


def save_spec(spec: MeasureSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Builders for frequently used measures
# ---------------------------------------------------------------------------

def dirac(point: Sequence[Rational]) -> Atomic:
    """Unit point mass."""
    return Atomic((tuple(_as_fraction(x) for x in point),), (1.0,))


def binomial_ifs(p_left: float) -> DyadicIFS:
    """Binomial measure on (0,1]: mass splits (p_left, 1-p_left) between the
    two half intervals at every scale."""
    maps = (
        _make_dyadic_map(1, (Fraction(0),)),
        _make_dyadic_map(1, (Fraction(1, 2),)),
    )
    return DyadicIFS(1, maps, (float(p_left), 1.0 - float(p_left)))


def sierpinski_tetrahedron(weights: Sequence[float]) -> DyadicIFS:
    """Self-similar measure on the Sierpinski tetrahedron: the four ratio-1/2
    corner maps of the unit cube in R^3 at corners 0, e1/2, e2/2, e3/2."""
    if len(weights) != 4:
        raise ValueError("exactly four weights are required")
    half = Fraction(1, 2)
    zero = Fraction(0)
    corners = [(zero, zero, zero), (half, zero, zero), (zero, half, zero), (zero, zero, half)]
    maps = tuple(_make_dyadic_map(1, c) for c in corners)
    return DyadicIFS(3, maps, tuple(float(w) for w in weights))


def cantor_measure(ratio: Rational = Fraction(1, 3), weights: Sequence[float] = (0.5, 0.5),
                   mass_tol: float = 1e-12) -> GeneralIFS1D:
    """Two-map Cantor-type measure with images anchored at 0 and 1."""
    r = _as_fraction(ratio)
    maps = (Homothety1D(r, Fraction(0)), Homothety1D(r, 1 - r))
    return GeneralIFS1D(maps, tuple(float(w) for w in weights), float(mass_tol))


def exp_decay_atoms(cutoff: int = 30) -> Atomic:
    """Atoms at 1/k with weights proportional to exp(-k), k = 2..cutoff+1.

    A pathological test measure: the atoms accumulate at 0 so slowly that the
    box-counting dimension of the support is 1/2 while every positive-order
    moment sum collapses, which makes all fixed points of the level spectra
    degenerate to 0.  (Points start at k=2 to stay inside the open cube.)
    """
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    ks = range(2, cutoff + 2)
    raw = [math.exp(-k) for k in ks]
    total = math.fsum(raw)
    points = tuple((Fraction(1, k),) for k in ks)
    return Atomic(points, tuple(w / total for w in raw))
