"""Uniform Cartesian lattices over boxes in R^n and node-valued fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform lattice with nodes at ``origin + (index + offset) * h``.

    Node coordinates are stored relative to ``origin`` so that grids at tiny
    scales far from the coordinate origin keep full relative precision.
    """

    origin: tuple[float, ...]
    h: float
    shape: tuple[int, ...]
    offset: tuple[int, ...]

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if len(self.origin) != len(self.shape) or len(self.offset) != len(self.shape):
            raise ValueError("origin, shape and offset must have one entry per axis")
        if min(self.shape) < 3:
            raise ValueError(f"need at least 3 nodes per axis, got {self.shape}")

    @classmethod
    def covering(cls, lo, hi, h: float, origin=None, pad: int = 1) -> "Grid":
        """Smallest lattice of spacing ``h`` aligned to ``origin`` covering ``[lo, hi]``.

        ``pad`` extra node layers are added on every side.
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        origin = 0.5 * (lo + hi) if origin is None else np.asarray(origin, dtype=float)
        k_lo = np.floor((lo - origin) / h).astype(int) - pad
        k_hi = np.ceil((hi - origin) / h).astype(int) + pad
        shape = tuple(int(s) for s in np.maximum(k_hi - k_lo + 1, 3))
        return cls(tuple(float(o) for o in origin), float(h), shape, tuple(int(k) for k in k_lo))

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(self.offset) * self.h

    @property
    def hi(self) -> np.ndarray:
        return self.lo + (np.asarray(self.shape) - 1) * self.h

    @property
    def cell_volume(self) -> float:
        return self.h ** self.ndim

    def axis_offsets(self, k: int) -> np.ndarray:
        """Coordinates along axis ``k`` relative to ``origin``."""
        return (np.arange(self.shape[k]) + self.offset[k]) * self.h

    def relative_coords(self) -> list[np.ndarray]:
        """Broadcastable per-axis coordinates relative to ``origin``."""
        out = []
        for k in range(self.ndim):
            shp = [1] * self.ndim
            shp[k] = self.shape[k]
            out.append(self.axis_offsets(k).reshape(shp))
        return out

    def coords(self) -> list[np.ndarray]:
        """Broadcastable per-axis absolute coordinates."""
        return [o + c for o, c in zip(self.origin, self.relative_coords())]

    def points(self) -> np.ndarray:
        """All node coordinates as an ``(size, ndim)`` array."""
        return np.stack([np.broadcast_to(c, self.shape).ravel() for c in self.coords()], axis=1)

    def boundary_layer(self) -> np.ndarray:
        """Boolean array marking the outermost node layer."""
        b = np.zeros(self.shape, dtype=bool)
        for k in range(self.ndim):
            idx = [slice(None)] * self.ndim
            idx[k] = 0
            b[tuple(idx)] = True
            idx[k] = -1
            b[tuple(idx)] = True
        return b

    def radius_from(self, center) -> np.ndarray:
        """Euclidean distance of every node from ``center``."""
        center = np.asarray(center, dtype=float) - np.asarray(self.origin)
        r2 = 0.0
        for c, x in zip(center, self.relative_coords()):
            r2 = r2 + (x - c) ** 2
        return np.sqrt(np.broadcast_to(r2, self.shape))

    def same_as(self, other: "Grid") -> bool:
        return (
            self.shape == other.shape
            and self.h == other.h
            and np.allclose(self.lo, other.lo, rtol=0, atol=1e-9 * self.h)
        )


@dataclass
class ScalarField:
    """Real values on the nodes of a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            _check_same_grid(self, other)
            return ScalarField(self.grid, self.values * other.values)
        return ScalarField(self.grid, self.values * float(other))

    __rmul__ = __mul__


def _check_same_grid(*fields: ScalarField) -> None:
    g0 = fields[0].grid
    for f in fields[1:]:
        if not g0.same_as(f.grid):
            raise ValueError("fields live on different grids")
