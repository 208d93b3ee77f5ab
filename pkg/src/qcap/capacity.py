"""Sobolev q-capacity by minimizing a discrete q-Dirichlet energy.

The energy of a node field ``u`` on a uniform grid of spacing ``h`` in R^n is

    E_q(u) = h^n * sum over cells |G u|^q

where ``G u`` is the gradient of the multilinear interpolant at the cell
centre (one-sided differences along each axis, averaged over the parallel
cell edges).  Capacities are estimated by minimizing ``E_q`` over fields that
equal 1 on a rasterized target and 0 outside a support region.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
import pyamg
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import LinearOperator, cg

from .geometry import Ball, ImplicitSet, NodeMask, locate, point_mask, rasterize
from .grid import Grid, ScalarField

log = logging.getLogger(__name__)

SOLVER_VERSION = "qcap-newton-1"


# ---------------------------------------------------------------------------
# discrete gradient


def _sl(ndim, axis, s):
    idx = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


def _avg(a, k):
    return 0.5 * (a[_sl(a.ndim, k, slice(None, -1))] + a[_sl(a.ndim, k, slice(1, None))])


def _avg_t(c, k):
    shape = list(c.shape)
    shape[k] += 1
    r = np.zeros(shape)
    r[_sl(c.ndim, k, slice(None, -1))] += 0.5 * c
    r[_sl(c.ndim, k, slice(1, None))] += 0.5 * c
    return r


def _diff_t(c, k):
    shape = list(c.shape)
    shape[k] += 1
    r = np.zeros(shape)
    r[_sl(c.ndim, k, slice(None, -1))] -= c
    r[_sl(c.ndim, k, slice(1, None))] += c
    return r


def cell_gradient(u: np.ndarray, h: float) -> np.ndarray:
    """Cell-centred gradient, shape ``(ndim, *(s - 1 for s in u.shape))``."""
    n = u.ndim
    out = np.empty((n,) + tuple(s - 1 for s in u.shape))
    for a in range(n):
        v = u
        for k in range(n):
            v = np.diff(v, axis=k) if k == a else _avg(v, k)
        out[a] = v / h
    return out


def cell_gradient_t(g: np.ndarray, h: float) -> np.ndarray:
    """Adjoint of :func:`cell_gradient`."""
    n = g.shape[0]
    r = 0.0
    for a in range(n):
        v = g[a] / h
        for k in reversed(range(n)):
            v = _diff_t(v, k) if k == a else _avg_t(v, k)
        r = r + v
    return r


def _energy_sum(u: np.ndarray, h: float, q: float) -> float:
    g = cell_gradient(u, h)
    return float(h**u.ndim * np.sum(np.sum(g * g, axis=0) ** (q / 2)))


def q_energy(u, q: float, h: float | None = None) -> float:
    """Discrete q-Dirichlet energy ``h^n * sum |G u|^q``.

    ``u`` is a :class:`ScalarField` or a plain array together with ``h``.
    Requires ``1 < q < n`` and ``u = 0`` on the outermost node layer.
    """
    if isinstance(u, ScalarField):
        arr, h = u.values, u.grid.h
    else:
        arr = np.asarray(u, dtype=float)
        if h is None:
            raise ValueError("h is required for raw arrays")
    n = arr.ndim
    if not 1 < q < n:
        raise ValueError(f"q must satisfy 1 < q < {n}, got {q}")
    edge = np.zeros(arr.shape, dtype=bool)
    for k in range(n):
        edge[_sl(n, k, 0)] = True
        edge[_sl(n, k, -1)] = True
    if np.any(arr[edge] != 0):
        raise ValueError("field must vanish on the outermost node layer")
    return _energy_sum(arr, h, q)


# ---------------------------------------------------------------------------
# closed-form oracle


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def radial_capacity_oracle(r: float, R: float, q: float, n: int) -> float:
    """q-capacity of the ball of radius ``r`` relative to the ball of radius ``R``.

    Closed form of the radial extremal problem in R^n; ``R = inf`` gives the
    whole-space capacity ``omega_{n-1} beta^{q-1} r^{n-q}``.
    """
    if not 0 < r < R:
        raise ValueError(f"need 0 < r < R, got r={r}, R={R}")
    if not 1 < q < n:
        raise ValueError(f"need 1 < q < n, got q={q}, n={n}")
    beta = (n - q) / (q - 1)
    omega = sphere_area(n)
    if math.isinf(R):
        return omega * beta ** (q - 1) * r ** (n - q)
    return omega * beta ** (q - 1) * (r**-beta - R**-beta) ** (1 - q)


# ---------------------------------------------------------------------------
# solver


class SupportTooSmallError(ValueError):
    """The support region cannot hold a test function equal to 1 on the target."""


@dataclass
class SolverSettings:
    """Tunables of :func:`minimize_q_energy`.

    ``deltas`` are the smoothing levels of the continuation, in units of the
    reciprocal target size.  ``rel_tol`` and ``window`` are the stopping rule
    (relative energy decrease over ``window`` iterations for the first-order
    method, per step for Newton).
    """

    method: str = "newton"
    deltas: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    rel_tol: float = 1e-6
    abs_tol: float = 1e-10
    window: int = 25
    max_iter: int | None = None
    newton_max_iter: int = 60
    cg_rtol: float = 1e-1
    cg_maxiter: int = 60
    jacobi_sweeps: int = 50
    amg_min_size: int = 2000

    def to_dict(self) -> dict:
        d = asdict(self)
        d["deltas"] = list(self.deltas)
        return d


@dataclass
class SolveInfo:
    iterations: int = 0
    stage_energies: list = field(default_factory=list)
    stage_deltas: list = field(default_factory=list)
    rel_decrease: float = float("nan")
    converged: bool = False
    seconds: float = 0.0


class _Problem:
    """Smoothed energy restricted to the free nodes of a grid."""

    def __init__(self, grid: Grid, fixed_values: np.ndarray, free: np.ndarray, q: float):
        self.grid = grid
        self.h = grid.h
        self.n = grid.ndim
        self.q = q
        self.free = free
        self.free_idx = np.flatnonzero(free.ravel())
        self.base = np.where(free, 0.0, fixed_values)
        self.delta = 0.0

    def full(self, x):
        u = self.base.copy()
        u.ravel()[self.free_idx] = x
        return u

    def restrict(self, u):
        return u.ravel()[self.free_idx].copy()

    def _cells(self, u):
        g = cell_gradient(u, self.h)
        return g, np.sum(g * g, axis=0) + self.delta**2

    def energy(self, x):
        _, s = self._cells(self.full(x))
        q, d = self.q, self.delta
        return float(self.h**self.n * np.sum(s ** (q / 2) - d**q))

    def true_energy(self, x):
        return _energy_sum(self.full(x), self.h, self.q)

    def gradient(self, x):
        g, s = self._cells(self.full(x))
        w = self.q * s ** (self.q / 2 - 1)
        return self.h**self.n * cell_gradient_t(w * g, self.h).ravel()[self.free_idx]

    def hessian(self, x):
        g, s = self._cells(self.full(x))
        q = self.q
        w1 = q * s ** (q / 2 - 1)
        w2 = 0.0 if q == 2 else q * (q - 2) * s ** (q / 2 - 2)
        scale = self.h**self.n
        shape = self.grid.shape
        idx = self.free_idx

        def matvec(v):
            full = np.zeros(shape)
            full.ravel()[idx] = np.ravel(v)
            gv = cell_gradient(full, self.h)
            proj = np.sum(g * gv, axis=0)
            return scale * cell_gradient_t(w1 * gv + w2 * proj * g, self.h).ravel()[idx]

        op = LinearOperator((idx.size, idx.size), matvec=matvec, dtype=float)
        return op, w1

    def edge_laplacian(self, w):
        """Weighted 2n+1 point Laplacian on free nodes (preconditioner)."""
        shape = self.grid.shape
        n = self.n
        N = int(np.prod(shape))
        ids = np.arange(N).reshape(shape)
        rows, cols, vals = [], [], []
        for a in range(n):
            e = w
            for k in range(n):
                if k != a:
                    e = _avg_t(e, k)
            e = e * self.h ** (n - 2)
            i0 = ids[_sl(n, a, slice(None, -1))].ravel()
            i1 = ids[_sl(n, a, slice(1, None))].ravel()
            ev = e.ravel()
            rows += [i0, i1, i0, i1]
            cols += [i0, i1, i1, i0]
            vals += [ev, ev, -ev, -ev]
        A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(N, N))
        return A[self.free_idx][:, self.free_idx].tocsr()


def _jacobi_init(u: np.ndarray, free: np.ndarray, sweeps: int) -> np.ndarray:
    u = u.copy()
    n = u.ndim
    for _ in range(sweeps):
        acc = np.zeros_like(u)
        for k in range(n):
            acc[_sl(n, k, slice(1, None))] += u[_sl(n, k, slice(None, -1))]
            acc[_sl(n, k, slice(None, -1))] += u[_sl(n, k, slice(1, None))]
        u = np.where(free, acc / (2 * n), u)
    return u


def _preconditioner(prob: _Problem, w1, settings: SolverSettings):
    P = prob.edge_laplacian(w1)
    if P.shape[0] < settings.amg_min_size:
        lu = sp.linalg.splu(P.tocsc())
        return LinearOperator(P.shape, matvec=lu.solve, dtype=float)
    ml = pyamg.smoothed_aggregation_solver(P, symmetry="symmetric")
    return ml.aspreconditioner(cycle="V")


def _newton_stage(prob: _Problem, x, settings: SolverSettings, info: SolveInfo):
    E = prob.energy(x)
    for it in range(settings.newton_max_iter):
        g = prob.gradient(x)
        H, w1 = prob.hessian(x)
        M = _preconditioner(prob, w1, settings)
        p, _ = cg(H, -g, rtol=settings.cg_rtol, maxiter=settings.cg_maxiter, M=M)
        slope = float(g @ p)
        if not slope < 0:
            p, slope = -g, -float(g @ g)
        step = 1.0
        while True:
            x_new = x + step * p
            E_new = prob.energy(x_new)
            if E_new <= E + 1e-4 * step * slope or step < 1e-10:
                break
            step *= 0.5
        info.iterations += 1
        dec = E - E_new
        if E_new < E:
            x = x_new
        rel = dec / max(abs(E_new), settings.abs_tol)
        info.rel_decrease = rel
        E = min(E, E_new)
        log.debug("newton it=%d delta=%.3g E=%.10g rel=%.3g step=%.3g", it, prob.delta, E, rel, step)
        if -0.5 * slope <= settings.rel_tol * abs(E) + settings.abs_tol or rel < settings.rel_tol:
            return x, True
    return x, False


def _spg_stage(prob: _Problem, x, settings: SolverSettings, info: SolveInfo, max_iter: int,
               lower: np.ndarray):
    """Projected gradient with two-point (Barzilai-Borwein) steps."""

    def project(v):
        return np.maximum(v, lower)

    x = project(x)
    E = prob.energy(x)
    g = prob.gradient(x)
    alpha = 1.0 / max(np.max(np.abs(g)), 1e-300) * prob.h
    history = [E]
    memory = 10
    for it in range(max_iter):
        d = project(x - alpha * g) - x
        if not np.any(d):
            return x, True
        ref = max(history[-memory:])
        slope = float(g @ d)
        lam = 1.0
        while True:
            x_new = x + lam * d
            E_new = prob.energy(x_new)
            if E_new <= ref + 1e-4 * lam * slope or lam < 1e-12:
                break
            lam *= 0.5
        g_new = prob.gradient(x_new)
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        alpha = float(s @ s) / sy if sy > 0 else 1e3 * alpha
        x, g, E = x_new, g_new, E_new
        history.append(E)
        info.iterations += 1
        if len(history) > settings.window:
            old = history[-settings.window - 1]
            rel = (old - E) / max(abs(E), settings.abs_tol)
            info.rel_decrease = rel
            if rel < settings.rel_tol:
                return x, True
    return x, False


def minimize_q_energy(mask: NodeMask, q: float, settings: SolverSettings | None = None,
                      support: np.ndarray | None = None, u0: np.ndarray | None = None,
                      deltas: Sequence[float] | None = None):
    """Minimize the q-energy over fields with ``u >= 1`` on ``mask``.

    Nodes outside ``support`` (default: everything but the outermost layer)
    are held at zero.  Minimization runs on the smoothed energy
    ``sum (|G u|^2 + delta^2)^(q/2)`` for a decreasing sequence of ``delta``;
    the returned energy is the unsmoothed energy of the returned field, the
    best over all continuation stages.

    Returns ``(field, energy, info)``.
    """
    settings = settings or SolverSettings()
    grid = mask.grid
    n = grid.ndim
    if not 1 < q < n:
        raise ValueError(f"q must satisfy 1 < q < {n}, got {q}")
    t0 = time.perf_counter()
    info = SolveInfo()
    m = mask.values
    inner = ~grid.boundary_layer()
    if support is not None:
        inner &= np.asarray(support, dtype=bool)
    if np.any(m & ~inner):
        raise ValueError("mask meets the zero region (outer node layer or outside support)")
    if not m.any():
        info.converged = True
        return ScalarField.zeros(grid), 0.0, info

    free = inner & ~m
    fixed = m.astype(float)
    prob = _Problem(grid, fixed, free, q)

    if u0 is None:
        u = _jacobi_init(fixed, free, settings.jacobi_sweeps)
    else:
        u = np.where(free, np.asarray(u0, dtype=float), fixed)
    x = prob.restrict(u)

    # characteristic gradient scale of the target
    pts = np.argwhere(m)
    span = (pts.max(axis=0) - pts.min(axis=0) + 1) * grid.h
    g_ref = 1.0 / (0.5 * float(np.linalg.norm(span)))
    schedule = list(settings.deltas if deltas is None else deltas)
    if q == 2:
        # exactly quadratic: no smoothing, a few accurate linear solves
        schedule = [0.0]
        settings = replace(settings, cg_rtol=min(settings.cg_rtol, 1e-3),
                           cg_maxiter=max(settings.cg_maxiter, 200))

    best_x, best_E = x.copy(), prob.true_energy(x)
    converged = False
    n_free = x.size
    max_iter = settings.max_iter or int(50 * math.sqrt(grid.size))
    if n_free == 0:
        schedule = []
        converged = True
    for dl in schedule:
        prob.delta = dl * g_ref
        if settings.method == "newton":
            x, converged = _newton_stage(prob, x, settings, info)
        elif settings.method == "spg":
            lower = np.zeros_like(x)
            x, converged = _spg_stage(prob, x, settings, info, max_iter, lower)
        else:
            raise ValueError(f"unknown method {settings.method!r}")
        E_true = prob.true_energy(x)
        if E_true <= best_E:
            best_x, best_E = x.copy(), E_true
        info.stage_energies.append(best_E)
        info.stage_deltas.append(prob.delta)
    info.converged = converged
    info.seconds = time.perf_counter() - t0
    u = prob.full(best_x)
    return ScalarField(grid, u), _energy_sum(u, grid.h, q), info


# ---------------------------------------------------------------------------
# estimates


@dataclass
class CapacityEstimate:
    """A capacity value together with how it was obtained.

    ``value`` is the energy of ``field`` (when kept), a feasible discrete test
    function, at the finest resolution of the ladder.
    """

    value: float
    q: float
    h: float
    support_radius: float
    delta: float
    iterations: int
    rel_decrease: float
    converged: bool
    feasible: bool
    mask_nodes: int
    trend: list = field(default_factory=list)
    resolutions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    seconds: float = 0.0
    solver_version: str = SOLVER_VERSION
    field: ScalarField | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "field"}
        d.pop("field", None)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "CapacityEstimate":
        data = {k: v for k, v in data.items() if k in cls.__dataclass_fields__ and k != "field"}
        return cls(**data)


def _prolong(prev: ScalarField, grid: Grid) -> np.ndarray:
    pg = prev.grid
    shift = np.asarray(pg.origin) - np.asarray(grid.origin)
    axes = [pg.axis_offsets(k) + shift[k] for k in range(pg.ndim)]
    interp = RegularGridInterpolator(axes, prev.values, bounds_error=False, fill_value=0.0)
    pts = np.stack([np.broadcast_to(c, grid.shape).ravel() for c in grid.relative_coords()], axis=1)
    return interp(pts).reshape(grid.shape)


def _support_set(support, center, dim) -> tuple[ImplicitSet, float]:
    if isinstance(support, ImplicitSet):
        lo, hi = support.bbox()
        return support, 0.5 * float(np.max(hi - lo))
    R = float(support)
    if not R > 0:
        raise ValueError("support radius must be positive")
    return Ball(center, R), R


def estimate_capacity(target: ImplicitSet, q: float, ladder: Sequence[float], support,
                      center=None, settings: SolverSettings | None = None,
                      keep_field: bool = True) -> CapacityEstimate:
    """Estimate the q-capacity of ``target`` on a ladder of grid spacings.

    ``support`` is either a radius (open ball about ``center``, default the
    centre of the target's bounding box) or an :class:`ImplicitSet`; test
    functions vanish at nodes outside it.  Each level is warm-started from the
    previous one.  The estimate of the finest level is returned, with the
    per-level values in ``trend``.
    """
    settings = settings or SolverSettings()
    if not target.bounded:
        raise ValueError("target set is unbounded")
    t0 = time.perf_counter()
    tlo, thi = target.bbox()
    if center is None:
        center = 0.5 * (tlo + thi)
    center = np.asarray(center, dtype=float)
    sup, sup_radius = _support_set(support, center, target.dim)
    if sup.bbox() is None:
        raise ValueError("support region is unbounded")
    slo, shi = sup.bbox()
    if np.any(tlo <= slo) or np.any(thi >= shi):
        # the target may be much smaller than its bounding box suggests
        ext = locate(target, tlo, thi)
        if not ext.empty and (np.any(ext.lo <= slo) or np.any(ext.hi >= shi)):
            raise SupportTooSmallError("support region does not strictly contain the target")

    ladder = sorted((float(h) for h in ladder), reverse=True)
    trend, notes = [], []
    prev = None
    info = SolveInfo(converged=True)
    est_field = None
    value = 0.0
    count = 0
    feasible = True
    for i, h in enumerate(ladder):
        grid = Grid.covering(slo, shi, h, origin=center, pad=1)
        mask = rasterize(target, grid)
        allowed = point_mask(sup, grid).values & ~grid.boundary_layer()
        if np.any(mask.values & ~allowed):
            raise SupportTooSmallError("support region too small: target reaches the zero region")
        if mask.is_empty:
            trend.append(0.0)
            prev, est_field, value, count = None, ScalarField.zeros(grid), 0.0, 0
            info = SolveInfo(converged=True)
            continue
        u0 = _prolong(prev, grid) if prev is not None else None
        deltas = None if u0 is None else settings.deltas[-1:]
        est_field, value, info = minimize_q_energy(mask, q, settings, support=allowed, u0=u0,
                                                   deltas=deltas)
        count = mask.count
        u = est_field.values
        feasible = bool(np.all(u[mask.values] >= 1) and np.all(u[~allowed] == 0))
        trend.append(value)
        prev = est_field
        log.info("capacity level h=%.4g nodes=%d mask=%d value=%.8g its=%d (%.1fs)",
                 h, grid.size, count, value, info.iterations, info.seconds)
        if not info.converged:
            notes.append(f"unconverged at h={h!r}")

    if all(v == 0 for v in trend):
        ext = locate(target)
        if not ext.empty:
            notes.append("possibly-positive-capacity-missed: target not proven empty "
                         "but no grid node cell fits inside it")
    delta_final = info.stage_deltas[-1] if info.stage_deltas else 0.0
    return CapacityEstimate(
        value=float(value), q=float(q), h=ladder[-1], support_radius=sup_radius,
        delta=float(delta_final), iterations=info.iterations,
        rel_decrease=float(info.rel_decrease), converged=info.converged, feasible=feasible,
        mask_nodes=count, trend=[float(v) for v in trend], resolutions=ladder,
        warnings=notes, seconds=time.perf_counter() - t0,
        field=est_field if keep_field else None,
    )
