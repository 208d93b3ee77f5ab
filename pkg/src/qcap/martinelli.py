"""Bochner–Martinelli kernel and its integration over parameterised hypersurfaces.

Points of C^d are handled as complex arrays of shape ``(..., d)``.  A
hypersurface is a list of :class:`SurfacePatch` objects, each a chart from a
parameter box in R^(2d-1) into C^d together with a tensor Gauss–Legendre rule.
The kernel form is pulled back through the chart: the coefficient of each
term is the determinant of the complex Jacobian of the coordinate functions
``(conj z_1, z_1, ..., conj z_d, z_d)`` with ``conj z_j`` left out.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import PointCd


def _as_complex(z) -> np.ndarray:
    if isinstance(z, PointCd):
        return z.as_complex()
    return np.atleast_1d(np.asarray(z, dtype=complex))


class SingularInputError(ValueError):
    """Raised when the kernel is evaluated at its pole."""


def _flux(zeta: np.ndarray, z: np.ndarray) -> np.ndarray:
    diff = zeta - z
    r2 = np.sum(np.abs(diff) ** 2, axis=-1, keepdims=True)
    d = zeta.shape[-1]
    return np.conj(diff) / r2**d


def bm_flux_components(zeta, z) -> np.ndarray:
    """Kernel coefficients ``conj(zeta_j - z_j) / |zeta - z|^(2d)`` for ``j = 1..d``.

    The factorial prefactor is left to the integrator.
    """
    zeta, z = _as_complex(zeta), _as_complex(z)
    if zeta.shape != z.shape:
        raise ValueError("points must have the same dimension")
    if np.all(zeta == z):
        raise SingularInputError("kernel is singular at zeta = z")
    return _flux(zeta, z)


def bm_prefactor(d: int) -> complex:
    """``(d-1)! / (2 pi i)^d``."""
    return math.factorial(d - 1) / (2j * math.pi) ** d


@dataclass(frozen=True)
class TestFunction:
    """Complex function on C^d with a note on where it is holomorphic.

    ``evaluator`` maps an ``(N, d)`` complex array to ``N`` complex values.
    """

    __test__ = False  # not a pytest class

    evaluator: Callable[[np.ndarray], np.ndarray]
    region: str = "entire"
    poles: tuple = ()

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        out = np.asarray(self.evaluator(np.atleast_2d(z)), dtype=complex)
        return out[0] if single else out

    @classmethod
    def constant(cls, c: complex = 1.0) -> "TestFunction":
        return cls(lambda z: np.full(z.shape[0], complex(c)), "entire")

    @classmethod
    def monomial(cls, powers: Sequence[int], coef: complex = 1.0) -> "TestFunction":
        p = np.asarray(powers, dtype=int)
        return cls(lambda z: coef * np.prod(z ** p, axis=1), "entire")


@dataclass(frozen=True)
class SurfacePatch:
    """Chart ``t -> zeta(t)`` on the box ``[lo, hi]`` in R^(2d-1).

    ``jacobian(t)`` returns ``d zeta_k / d t_m`` with shape ``(N, d, 2d-1)``.
    ``orientation`` (+1 or -1) multiplies every contribution.
    """

    chart: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    orders: tuple[int, ...]
    orientation: int = 1
    label: str = ""

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or len(self.lo) != len(self.orders):
            raise ValueError("parameter box and orders must have equal length")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if min(self.orders) < 1:
            raise ValueError("quadrature orders must be positive")

    @property
    def d(self) -> int:
        return (len(self.lo) + 1) // 2

    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss–Legendre nodes ``(N, 2d-1)`` and positive weights ``(N,)``."""
        axes, wts = [], []
        for a, b, m in zip(self.lo, self.hi, self.orders):
            x, w = leggauss(m)
            axes.append(0.5 * (b - a) * x + 0.5 * (a + b))
            wts.append(0.5 * (b - a) * w)
        nodes = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        weights = np.ones(1)
        for w in wts:
            weights = np.multiply.outer(weights, w).ravel()
        return nodes, weights

    def area(self) -> float:
        """Surface measure of the patch from the Gram determinant of the chart."""
        t, w = self.rule()
        jac = self.jacobian(t)
        real = np.concatenate([jac.real, jac.imag], axis=1)
        gram = np.einsum("nim,nik->nmk", real, real)
        return float(np.sum(w * np.sqrt(np.abs(np.linalg.det(gram)))))

    def spacing(self) -> float:
        """Mean distance between neighbouring quadrature nodes."""
        return (self.area() / int(np.prod(self.orders))) ** (1.0 / len(self.orders))

    def with_orders(self, orders: Sequence[int]) -> "SurfacePatch":
        return replace(self, orders=tuple(int(o) for o in orders))

    def flipped(self, sign: int = -1) -> "SurfacePatch":
        return replace(self, orientation=self.orientation * int(sign))


def _pullback_minors(jac: np.ndarray) -> np.ndarray:
    """Determinants ``M_j`` for each omitted ``conj zeta_j``; shape ``(N, d)``."""
    n_nodes, d, _ = jac.shape
    rows = np.empty((n_nodes, 2 * d, 2 * d - 1), dtype=complex)
    rows[:, 0::2] = np.conj(jac)
    rows[:, 1::2] = jac
    out = np.empty((n_nodes, d), dtype=complex)
    for j in range(d):
        keep = [r for r in range(2 * d) if r != 2 * j]
        out[:, j] = np.linalg.det(rows[:, keep])
    return out


def integrate_bm(f: TestFunction, surface, z, near_factor: float = 4.0) -> complex:
    """Integral of ``f(zeta) w(zeta, z)`` over the patches of ``surface``.

    Warns when a quadrature node lies within ``near_factor`` node spacings of
    ``z``; the kernel is never regularised.
    """
    patches = [surface] if isinstance(surface, SurfacePatch) else list(surface)
    z = _as_complex(z)
    d = z.size
    total = 0.0 + 0.0j
    for patch in patches:
        if patch.d != d:
            raise ValueError(f"patch is a hypersurface of C^{patch.d}, point is in C^{d}")
        t, w = patch.rule()
        zeta = np.asarray(patch.chart(t), dtype=complex)
        dist = float(np.min(np.sqrt(np.sum(np.abs(zeta - z) ** 2, axis=1))))
        if dist == 0:
            raise SingularInputError("z lies on a quadrature node")
        h = patch.spacing()
        if dist < near_factor * h:
            warnings.warn(f"z is {dist:.3g} from the surface (node spacing {h:.3g}); "
                          "quadrature is near-singular", RuntimeWarning, stacklevel=2)
        jac = np.asarray(patch.jacobian(t), dtype=complex)
        integrand = f(zeta) * np.sum(_flux(zeta, z) * _pullback_minors(jac), axis=1)
        total += patch.orientation * np.sum(w * integrand)
    return complex(bm_prefactor(d) * total)


def calibrate_orientation(surface, z_inside, tol: float = 1e-6) -> tuple[int, list[SurfacePatch]]:
    """Fix the global sign so that ``f = 1`` integrates to +1 about ``z_inside``.

    Returns the sign applied and the re-oriented patches.  Raises if the raw
    value is not close to +1 or -1 (surface not closed or point outside).
    """
    patches = [surface] if isinstance(surface, SurfacePatch) else list(surface)
    raw = integrate_bm(TestFunction.constant(1.0), patches, z_inside)
    sign = 1 if raw.real >= 0 else -1
    if abs(raw - sign) > tol:
        raise ValueError(f"calibration integral {raw:.6g} is not +-1; "
                         "surface not closed or point not enclosed")
    return sign, [p.flipped(sign) for p in patches]


def _hypersphere(angles: np.ndarray, m: int):
    """Unit vectors in R^m and their derivatives from ``m-1`` angles.

    The first ``m-2`` angles run over [0, pi] and the last over [0, 2 pi].
    """
    n = angles.shape[0]
    c, s = np.cos(angles), np.sin(angles)
    x = np.empty((n, m))
    dx = np.zeros((n, m, m - 1))
    prod = np.ones(n)
    for i in range(m - 1):
        x[:, i] = prod * c[:, i]
        for j in range(i):
            # swap sin(theta_j) for cos(theta_j) in the leading product
            dx[:, i, j] = _partial_prod(s, c, j, i) * c[:, i]
        dx[:, i, i] = -prod * s[:, i]
        prod = prod * s[:, i]
    x[:, m - 1] = prod
    for j in range(m - 1):
        dx[:, m - 1, j] = _partial_prod(s, c, j, m - 1)
    return x, dx


def _partial_prod(s, c, j, upto):
    out = np.ones(s.shape[0])
    for k in range(upto):
        out = out * (c[:, k] if k == j else s[:, k])
    return out


def sphere_patch(center, radius: float, d: int | None = None, order: int = 48) -> SurfacePatch:
    """The sphere ``|zeta - center| = radius`` in C^d as one hyperspherical chart.

    ``zeta_k = x_(2k-1) + i x_(2k)`` with the real unit vector built from
    hyperspherical angles.  For ``d = 1`` this is the counter-clockwise circle.
    """
    c = _as_complex(center) if d is None else (
        np.zeros(d, dtype=complex) if center is None else _as_complex(center))
    d = c.size
    m = 2 * d
    r = float(radius)
    if not r > 0:
        raise ValueError("radius must be positive")

    def chart(t):
        x, _ = _hypersphere(t, m)
        return c + r * (x[:, 0::2] + 1j * x[:, 1::2])

    def jacobian(t):
        _, dx = _hypersphere(t, m)
        return r * (dx[:, 0::2, :] + 1j * dx[:, 1::2, :])

    lo = (0.0,) * (m - 2) + (0.0,)
    hi = (math.pi,) * (m - 2) + (2 * math.pi,)
    return SurfacePatch(chart, jacobian, lo, hi, (int(order),) * (m - 1), 1, f"sphere r={r!r}")


def circle_patch(center: complex, radius: float, order: int = 64) -> SurfacePatch:
    """Counter-clockwise circle in C."""
    return sphere_patch([complex(center)], radius, order=order)


def box_patches(lo, hi, order: int = 16) -> list[SurfacePatch]:
    """The 2 * 2d faces of the box ``[lo, hi]`` in R^(2d) = C^d.

    Face ``x_k = lo_k`` or ``hi_k`` is parameterised by the other coordinates
    in increasing order, with orientation ``s * (-1)^k`` for outward normal
    ``s e_k``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m = lo.size
    if m % 2 or np.any(hi <= lo):
        raise ValueError("box needs an even number of axes and hi > lo")
    patches = []
    for k in range(m):
        others = [a for a in range(m) if a != k]
        for s, val in ((-1, lo[k]), (1, hi[k])):
            def chart(t, k=k, val=val, others=others):
                x = np.empty((t.shape[0], m))
                x[:, k] = val
                x[:, others] = t
                return x[:, 0::2] + 1j * x[:, 1::2]

            def jacobian(t, k=k, others=others):
                dx = np.zeros((t.shape[0], m, m - 1))
                for col, a in enumerate(others):
                    dx[:, a, col] = 1.0
                return dx[:, 0::2, :] + 1j * dx[:, 1::2, :]

            patches.append(SurfacePatch(chart, jacobian, tuple(lo[others]), tuple(hi[others]),
                                        (int(order),) * (m - 1), s * (-1) ** k,
                                        f"face x{k}={'hi' if s > 0 else 'lo'}"))
    return patches


def cauchy_integral(f: Callable[[np.ndarray], np.ndarray], center: complex, radius: float,
                    z: complex, nodes: int = 256) -> complex:
    """Cauchy integral ``(2 pi i)^-1 \\oint f(w)/(w - z) dw`` on a circle (trapezoid rule)."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    w = center + radius * np.exp(1j * theta)
    vals = np.asarray(f(w), dtype=complex)
    return complex(np.mean(vals * (w - center) / (w - z)))


def divergence_residual(zeta, h: float, z=None) -> float:
    """``|sum_j d/d conj(zeta_j) [conj(zeta_j - z_j) / |zeta - z|^(2d)]|`` by central differences.

    Each Wirtinger derivative is ``(d/dx_j + i d/dy_j) / 2`` with second-order
    central differences of step ``h``.  The exact value is 0 away from ``z``.
    """
    zeta = _as_complex(zeta)
    z = np.zeros_like(zeta) if z is None else _as_complex(z)
    d = zeta.size
    dist = float(np.linalg.norm(zeta - z))
    if not h > 0 or dist <= 10 * h:
        raise ValueError(f"step {h!r} too large for |zeta - z| = {dist:.3g}")

    def comp(p, j):
        diff = p - z
        return np.conj(diff[j]) / np.sum(np.abs(diff) ** 2) ** d

    total = 0.0 + 0.0j
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1.0
        dx = (comp(zeta + h * e, j) - comp(zeta - h * e, j)) / (2 * h)
        dy = (comp(zeta + 1j * h * e, j) - comp(zeta - 1j * h * e, j)) / (2 * h)
        total += 0.5 * (dx + 1j * dy)
    return float(abs(total))
