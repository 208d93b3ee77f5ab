"""Implicit subsets of R^{2d} = C^d built from primitives and set operations.

Sets are small immutable expression trees.  Every node answers two questions:
point membership (with explicit open/closed boundary semantics) and a
three-valued classification of axis-aligned boxes (inside, outside, unknown)
computed from exact distance bounds.  Box classification drives both the
conservative rasterization used by the capacity solver and the adaptive
search that locates tiny components of a set.

All predicates take coordinates relative to an ``origin`` so that sets can be
probed at scales far below the magnitude of their absolute coordinates.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .grid import Grid

OUTSIDE, INSIDE, MIXED = 0, 1, 2


@dataclass(frozen=True)
class PointCd:
    """A point of C^d stored as real coordinates (x_1, y_1, ..., x_d, y_d)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) == 0 or len(c) % 2:
            raise ValueError(f"need an even, positive number of real coordinates, got {len(c)}")
        if not all(math.isfinite(v) for v in c):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_complex(cls, zs: Iterable[complex]) -> "PointCd":
        out = []
        for z in zs:
            out += [complex(z).real, complex(z).imag]
        return cls(tuple(out))

    @classmethod
    def origin(cls, d: int) -> "PointCd":
        return cls((0.0,) * (2 * d))

    @property
    def d(self) -> int:
        return len(self.coords) // 2

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_complex(self) -> np.ndarray:
        c = np.asarray(self.coords)
        return c[0::2] + 1j * c[1::2]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def as_coords(x) -> np.ndarray:
    """Real coordinate vector of a ``PointCd`` or array-like."""
    return np.asarray(x.coords if isinstance(x, PointCd) else x, dtype=float).ravel()


def _fmt(v: float) -> str:
    return repr(float(v))


def _vec(v) -> tuple[float, ...]:
    return tuple(float(t) for t in np.asarray(v, dtype=float).ravel())


def _box_dist(lo, hi, c):
    """Min and max distance from point ``c`` to boxes ``[lo, hi]`` (rows)."""
    near = np.clip(c, lo, hi) - c
    far = np.maximum(np.abs(lo - c), np.abs(hi - c))
    return np.sqrt(np.sum(near * near, axis=1)), np.sqrt(np.sum(far * far, axis=1))


class ImplicitSet:
    """Base class of the set expression tree."""

    dim: int

    # -- implemented by subclasses -------------------------------------
    def _contains(self, p: np.ndarray, origin: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _classify(self, lo: np.ndarray, hi: np.ndarray, origin: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bbox(self):
        """``(lo, hi)`` arrays of an axis-aligned bounding box, or None if unbounded."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- public helpers -------------------------------------------------
    def contains_points(self, points, origin=None) -> np.ndarray:
        """Membership of the rows of ``points`` (given relative to ``origin``)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if p.shape[1] != self.dim:
            raise ValueError(f"point dimension {p.shape[1]} != set dimension {self.dim}")
        o = np.zeros(self.dim) if origin is None else np.asarray(origin, dtype=float)
        return self._contains(p, o)

    def classify_boxes(self, lo, hi, origin=None) -> np.ndarray:
        """OUTSIDE / INSIDE / MIXED for each box ``[lo_i, hi_i]`` (relative to ``origin``).

        INSIDE means the closed box is certainly a subset of the set, OUTSIDE
        that it is certainly disjoint from it.
        """
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        o = np.zeros(self.dim) if origin is None else np.asarray(origin, dtype=float)
        return self._classify(lo, hi, o)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @property
    def bounded(self) -> bool:
        return self.bbox() is not None

    def __or__(self, other):
        return Union((self, other))

    def __and__(self, other):
        return Intersection((self, other))

    def __sub__(self, other):
        return Difference(self, other)


@dataclass(frozen=True, eq=True)
class Ball(ImplicitSet):
    center: tuple[float, ...]
    radius: float
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(as_coords(self.center)))
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def dim(self):
        return len(self.center)

    def _contains(self, p, origin):
        c = np.asarray(self.center) - origin
        r2 = np.sum((p - c) ** 2, axis=1)
        return r2 <= self.radius**2 if self.closed else r2 < self.radius**2

    def _classify(self, lo, hi, origin):
        c = np.asarray(self.center) - origin
        dmin, dmax = _box_dist(lo, hi, c)
        r = self.radius
        if self.closed:
            inside, outside = dmax <= r, dmin > r
        else:
            inside, outside = dmax < r, dmin >= r
        return np.where(inside, INSIDE, np.where(outside, OUTSIDE, MIXED)).astype(np.int8)

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def to_dict(self):
        return {"type": "ball", "center": [_fmt(v) for v in self.center],
                "radius": _fmt(self.radius), "closed": self.closed}


@dataclass(frozen=True, eq=True)
class Shell(ImplicitSet):
    """Open spherical shell ``inner < |z - center| < outer``."""

    center: tuple[float, ...]
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(as_coords(self.center)))
        if not 0 <= self.inner < self.outer:
            raise ValueError(f"need 0 <= inner < outer, got {self.inner}, {self.outer}")

    @property
    def dim(self):
        return len(self.center)

    def _contains(self, p, origin):
        c = np.asarray(self.center) - origin
        r2 = np.sum((p - c) ** 2, axis=1)
        return (r2 > self.inner**2) & (r2 < self.outer**2)

    def _classify(self, lo, hi, origin):
        c = np.asarray(self.center) - origin
        dmin, dmax = _box_dist(lo, hi, c)
        inside = (dmin > self.inner) & (dmax < self.outer)
        outside = (dmax <= self.inner) | (dmin >= self.outer)
        return np.where(inside, INSIDE, np.where(outside, OUTSIDE, MIXED)).astype(np.int8)

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.outer, c + self.outer

    def to_dict(self):
        return {"type": "shell", "center": [_fmt(v) for v in self.center],
                "inner": _fmt(self.inner), "outer": _fmt(self.outer)}


@dataclass(frozen=True, eq=True)
class Box(ImplicitSet):
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec(self.lo))
        object.__setattr__(self, "hi", _vec(self.hi))
        if len(self.lo) != len(self.hi) or not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi on every axis")

    @property
    def dim(self):
        return len(self.lo)

    def _contains(self, p, origin):
        a = np.asarray(self.lo) - origin
        b = np.asarray(self.hi) - origin
        if self.closed:
            return np.all((p >= a) & (p <= b), axis=1)
        return np.all((p > a) & (p < b), axis=1)

    def _classify(self, lo, hi, origin):
        a = np.asarray(self.lo) - origin
        b = np.asarray(self.hi) - origin
        if self.closed:
            inside = np.all((lo >= a) & (hi <= b), axis=1)
            outside = np.any((hi < a) | (lo > b), axis=1)
        else:
            inside = np.all((lo > a) & (hi < b), axis=1)
            outside = np.any((hi <= a) | (lo >= b), axis=1)
        return np.where(inside, INSIDE, np.where(outside, OUTSIDE, MIXED)).astype(np.int8)

    def bbox(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def to_dict(self):
        return {"type": "box", "lo": [_fmt(v) for v in self.lo],
                "hi": [_fmt(v) for v in self.hi], "closed": self.closed}


@dataclass(frozen=True, eq=True)
class HalfSpace(ImplicitSet):
    """``{z : <normal, z> < offset}`` (``<=`` when closed)."""

    normal: tuple[float, ...]
    offset: float
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "normal", _vec(self.normal))
        if not any(self.normal):
            raise ValueError("normal must be nonzero")

    @property
    def dim(self):
        return len(self.normal)

    def _contains(self, p, origin):
        n = np.asarray(self.normal)
        v = p @ n
        b = self.offset - origin @ n
        return v <= b if self.closed else v < b

    def _classify(self, lo, hi, origin):
        n = np.asarray(self.normal)
        b = self.offset - origin @ n
        vmin = np.where(n > 0, lo, hi) @ n
        vmax = np.where(n > 0, hi, lo) @ n
        if self.closed:
            inside, outside = vmax <= b, vmin > b
        else:
            inside, outside = vmax < b, vmin >= b
        return np.where(inside, INSIDE, np.where(outside, OUTSIDE, MIXED)).astype(np.int8)

    def bbox(self):
        return None

    def to_dict(self):
        return {"type": "halfspace", "normal": [_fmt(v) for v in self.normal],
                "offset": _fmt(self.offset), "closed": self.closed}


def _combine_or(codes):
    codes = np.stack(codes)
    inside = np.any(codes == INSIDE, axis=0)
    outside = np.all(codes == OUTSIDE, axis=0)
    return np.where(inside, INSIDE, np.where(outside, OUTSIDE, MIXED)).astype(np.int8)


def _combine_and(codes):
    codes = np.stack(codes)
    inside = np.all(codes == INSIDE, axis=0)
    outside = np.any(codes == OUTSIDE, axis=0)
    return np.where(inside, INSIDE, np.where(outside, OUTSIDE, MIXED)).astype(np.int8)


def _negate(code):
    return np.where(code == INSIDE, OUTSIDE, np.where(code == OUTSIDE, INSIDE, MIXED)).astype(np.int8)


def _check_dims(parts):
    dims = {p.dim for p in parts}
    if len(dims) != 1:
        raise ValueError(f"operands have mixed dimensions {sorted(dims)}")
    return dims.pop()


@dataclass(frozen=True, eq=True)
class Union(ImplicitSet):
    parts: tuple[ImplicitSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("empty union")
        _check_dims(self.parts)

    @property
    def dim(self):
        return self.parts[0].dim

    def _contains(self, p, origin):
        return np.any([s._contains(p, origin) for s in self.parts], axis=0)

    def _classify(self, lo, hi, origin):
        return _combine_or([s._classify(lo, hi, origin) for s in self.parts])

    def bbox(self):
        boxes = [s.bbox() for s in self.parts]
        if any(b is None for b in boxes):
            return None
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def to_dict(self):
        return {"type": "union", "parts": [s.to_dict() for s in self.parts]}


@dataclass(frozen=True, eq=True)
class Intersection(ImplicitSet):
    parts: tuple[ImplicitSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("empty intersection")
        _check_dims(self.parts)

    @property
    def dim(self):
        return self.parts[0].dim

    def _contains(self, p, origin):
        return np.all([s._contains(p, origin) for s in self.parts], axis=0)

    def _classify(self, lo, hi, origin):
        return _combine_and([s._classify(lo, hi, origin) for s in self.parts])

    def bbox(self):
        boxes = [b for b in (s.bbox() for s in self.parts) if b is not None]
        if not boxes:
            return None
        lo = np.max([b[0] for b in boxes], axis=0)
        hi = np.min([b[1] for b in boxes], axis=0)
        return lo, np.maximum(hi, lo)

    def to_dict(self):
        return {"type": "intersection", "parts": [s.to_dict() for s in self.parts]}


@dataclass(frozen=True, eq=True)
class Difference(ImplicitSet):
    base: ImplicitSet
    removed: ImplicitSet

    def __post_init__(self):
        _check_dims((self.base, self.removed))

    @property
    def dim(self):
        return self.base.dim

    def _contains(self, p, origin):
        return self.base._contains(p, origin) & ~self.removed._contains(p, origin)

    def _classify(self, lo, hi, origin):
        return _combine_and([self.base._classify(lo, hi, origin),
                             _negate(self.removed._classify(lo, hi, origin))])

    def bbox(self):
        return self.base.bbox()

    def to_dict(self):
        return {"type": "difference", "base": self.base.to_dict(), "removed": self.removed.to_dict()}


@dataclass(frozen=True, eq=True)
class Complement(ImplicitSet):
    """Complement of ``inner`` within the closed box ``[lo, hi]``."""

    inner: ImplicitSet
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec(self.lo))
        object.__setattr__(self, "hi", _vec(self.hi))
        _check_dims((self.inner, Box(self.lo, self.hi)))

    @property
    def dim(self):
        return self.inner.dim

    @property
    def _frame(self):
        return Box(self.lo, self.hi, closed=True)

    def _contains(self, p, origin):
        return self._frame._contains(p, origin) & ~self.inner._contains(p, origin)

    def _classify(self, lo, hi, origin):
        return _combine_and([self._frame._classify(lo, hi, origin),
                             _negate(self.inner._classify(lo, hi, origin))])

    def bbox(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def to_dict(self):
        return {"type": "complement", "inner": self.inner.to_dict(),
                "lo": [_fmt(v) for v in self.lo], "hi": [_fmt(v) for v in self.hi]}


@dataclass(frozen=True, eq=True)
class Translate(ImplicitSet):
    inner: ImplicitSet
    shift: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "shift", _vec(self.shift))
        if len(self.shift) != self.inner.dim:
            raise ValueError("shift dimension mismatch")

    @property
    def dim(self):
        return self.inner.dim

    def _contains(self, p, origin):
        return self.inner._contains(p, origin - np.asarray(self.shift))

    def _classify(self, lo, hi, origin):
        return self.inner._classify(lo, hi, origin - np.asarray(self.shift))

    def bbox(self):
        b = self.inner.bbox()
        if b is None:
            return None
        s = np.asarray(self.shift)
        return b[0] + s, b[1] + s

    def to_dict(self):
        return {"type": "translate", "inner": self.inner.to_dict(),
                "shift": [_fmt(v) for v in self.shift]}


@dataclass(frozen=True, eq=True)
class Scale(ImplicitSet):
    """Image of ``inner`` under ``z -> factor * z``."""

    inner: ImplicitSet
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError(f"scale factor must be positive, got {self.factor}")

    @property
    def dim(self):
        return self.inner.dim

    def _contains(self, p, origin):
        return self.inner._contains(p / self.factor, origin / self.factor)

    def _classify(self, lo, hi, origin):
        f = self.factor
        return self.inner._classify(lo / f, hi / f, origin / f)

    def bbox(self):
        b = self.inner.bbox()
        if b is None:
            return None
        return b[0] * self.factor, b[1] * self.factor

    def to_dict(self):
        return {"type": "scale", "inner": self.inner.to_dict(), "factor": _fmt(self.factor)}


@dataclass(frozen=True, eq=True)
class EmptySet(ImplicitSet):
    dimension: int

    @property
    def dim(self):
        return self.dimension

    def _contains(self, p, origin):
        return np.zeros(len(p), dtype=bool)

    def _classify(self, lo, hi, origin):
        return np.full(len(lo), OUTSIDE, dtype=np.int8)

    def bbox(self):
        z = np.zeros(self.dimension)
        return z, z

    def to_dict(self):
        return {"type": "empty", "dim": self.dimension}


def from_dict(data: dict) -> ImplicitSet:
    """Inverse of ``ImplicitSet.to_dict``."""
    t = data["type"]
    f = lambda xs: [float(v) for v in xs]  # noqa: E731
    if t == "ball":
        return Ball(f(data["center"]), float(data["radius"]), bool(data.get("closed", False)))
    if t == "shell":
        return Shell(f(data["center"]), float(data["inner"]), float(data["outer"]))
    if t == "box":
        return Box(f(data["lo"]), f(data["hi"]), bool(data.get("closed", True)))
    if t == "halfspace":
        return HalfSpace(f(data["normal"]), float(data["offset"]), bool(data.get("closed", False)))
    if t == "union":
        return Union(tuple(from_dict(p) for p in data["parts"]))
    if t == "intersection":
        return Intersection(tuple(from_dict(p) for p in data["parts"]))
    if t == "difference":
        return Difference(from_dict(data["base"]), from_dict(data["removed"]))
    if t == "complement":
        return Complement(from_dict(data["inner"]), f(data["lo"]), f(data["hi"]))
    if t == "translate":
        return Translate(from_dict(data["inner"]), f(data["shift"]))
    if t == "scale":
        return Scale(from_dict(data["inner"]), float(data["factor"]))
    if t == "empty":
        return EmptySet(int(data["dim"]))
    raise ValueError(f"unknown set type {t!r}")


# ---------------------------------------------------------------------------


def contains(s: ImplicitSet, point) -> bool:
    """Membership of a single point."""
    p = as_coords(point)
    if p.size != s.dim:
        raise ValueError(f"point dimension {p.size} != set dimension {s.dim}")
    return bool(s.contains_points(p[None, :])[0])


def annulus_shell(x, n: int) -> Shell:
    """The open dyadic shell ``2^-(n+1) < |z - x| < 2^-n``."""
    if n < 1:
        raise ValueError(f"shell index must be >= 1, got {n}")
    return Shell(as_coords(x), math.ldexp(1.0, -(n + 1)), math.ldexp(1.0, -n))


def triple_shell(x, n: int) -> Shell:
    """Open shell ``2^-(n+2) < |z - x| < 2^-(n-1)`` covering shells n-1, n, n+1."""
    return Shell(as_coords(x), math.ldexp(1.0, -(n + 2)), math.ldexp(1.0, -(n - 1)))


def shell_minus_domain(x, n: int, domain: ImplicitSet) -> Difference:
    """``annulus_shell(x, n)`` with ``domain`` removed."""
    if not domain.bounded:
        raise ValueError("domain must be bounded")
    return Difference(annulus_shell(x, n), domain)


@dataclass
class NodeMask:
    """Membership bit per grid node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=bool)
        if self.values.shape != self.grid.shape:
            raise ValueError("mask shape does not match grid")

    @property
    def count(self) -> int:
        return int(self.values.sum())

    @property
    def is_empty(self) -> bool:
        return not self.values.any()


def cell_boxes(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Closed cells ``node +- h/2`` of every node, relative to the grid origin."""
    p = np.stack([np.broadcast_to(c, grid.shape).ravel() for c in grid.relative_coords()], axis=1)
    return p - 0.5 * grid.h, p + 0.5 * grid.h


def rasterize(s: ImplicitSet, grid: Grid) -> NodeMask:
    """Conservative inner rasterization.

    A node is marked iff the closed cell of side ``h`` centred on it is
    certainly contained in the set, so the marked region is a compact subset
    of the set and the rule is monotone under inclusion.
    """
    if s.dim != grid.ndim:
        raise ValueError(f"set dimension {s.dim} != grid dimension {grid.ndim}")
    lo, hi = cell_boxes(grid)
    code = s.classify_boxes(lo, hi, origin=grid.origin)
    return NodeMask(grid, (code == INSIDE).reshape(grid.shape))


def point_mask(s: ImplicitSet, grid: Grid) -> NodeMask:
    """Plain node membership (no cell test)."""
    p = np.stack([np.broadcast_to(c, grid.shape).ravel() for c in grid.relative_coords()], axis=1)
    return NodeMask(grid, s.contains_points(p, origin=grid.origin).reshape(grid.shape))


@dataclass(frozen=True)
class Extent:
    """Result of :func:`locate`: a box known to contain the set."""

    lo: np.ndarray
    hi: np.ndarray
    empty: bool
    depth: int
    has_interior: bool

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_diagonal(self) -> float:
        return 0.5 * float(np.linalg.norm(self.hi - self.lo))


def locate(s: ImplicitSet, lo=None, hi=None, rel_resolution: int = 32,
           max_depth: int = 80, max_boxes: int = 200_000) -> Extent:
    """Find a tight bounding box of ``s`` by adaptive box subdivision.

    Boxes classified OUTSIDE are discarded and MIXED boxes are bisected along
    every axis.  The search stops once the box size is at most
    ``1/rel_resolution`` of the surviving extent, so components far smaller
    than the starting box (tiny removed balls) are found after a number of
    levels logarithmic in the scale ratio.  ``empty=True`` is a certificate:
    every part of the starting box was proven disjoint from the set.
    """
    if lo is None or hi is None:
        b = s.bbox()
        if b is None:
            raise ValueError("set is unbounded; pass an explicit search box")
        lo, hi = b
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    origin = 0.5 * (lo + hi)
    blo = (lo - origin)[None, :]
    bhi = (hi - origin)[None, :]
    n = s.dim
    corners = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T
    has_inside = False
    depth = 0
    while True:
        code = s.classify_boxes(blo, bhi, origin=origin)
        keep = code != OUTSIDE
        if not keep.any():
            return Extent(lo, lo.copy(), True, depth, False)
        blo, bhi, code = blo[keep], bhi[keep], code[keep]
        has_inside = has_inside or bool((code == INSIDE).any())
        ext_lo, ext_hi = blo.min(axis=0), bhi.max(axis=0)
        size = float(np.min(np.max(bhi - blo, axis=1)))
        span = float(np.max(ext_hi - ext_lo))
        mixed = code == MIXED
        done = (size * rel_resolution <= span or depth >= max_depth
                or not mixed.any() or mixed.sum() * 2**n > max_boxes)
        if done:
            return Extent(ext_lo + origin, ext_hi + origin, False, depth, has_inside)
        # keep INSIDE boxes as they are, bisect MIXED ones
        mlo, mhi = blo[mixed], bhi[mixed]
        half = 0.5 * (mhi - mlo)
        new_lo = (mlo[:, None, :] + corners[None, :, :] * half[:, None, :]).reshape(-1, n)
        new_hi = new_lo + np.repeat(half, len(corners), axis=0)
        blo = np.concatenate([blo[~mixed], new_lo])
        bhi = np.concatenate([bhi[~mixed], new_hi])
        depth += 1


def make_swiss_cheese(x, radii: Callable[[int], float] | Sequence[float],
                      n_range: Iterable[int]) -> ImplicitSet:
    """Unit ball about ``x`` with one closed ball removed inside each shell.

    The ball removed from shell ``n`` has radius ``radii(n)`` and centre at
    distance ``1.5 * 2^-(n+1)`` from ``x`` along the first real axis.  A zero
    radius removes nothing.
    """
    xc = as_coords(x)
    ns = list(n_range)
    if callable(radii):
        rs = [float(radii(n)) for n in ns]
    else:
        rs = [float(r) for r in radii]
        if len(rs) != len(ns):
            raise ValueError("radii and n_range differ in length")
    holes = []
    for n, r in zip(ns, rs):
        if r < 0:
            raise ValueError(f"negative radius for n={n}")
        if r == 0:
            continue
        if not r < math.ldexp(1.0, -(n + 2)):
            raise ValueError(f"radius {r} for n={n} does not fit inside shell {n} "
                             f"(need < 2^-{n + 2})")
        c = xc.copy()
        c[0] += 1.5 * math.ldexp(1.0, -(n + 1))
        holes.append(Ball(c, r, closed=True))
    unit = Ball(xc, 1.0)
    if not holes:
        return unit
    return Difference(unit, holes[0] if len(holes) == 1 else Union(tuple(holes)))


def swiss_cheese_centers(x, n_range: Iterable[int]) -> list[np.ndarray]:
    xc = as_coords(x)
    out = []
    for n in n_range:
        c = xc.copy()
        c[0] += 1.5 * math.ldexp(1.0, -(n + 1))
        out.append(c)
    return out
