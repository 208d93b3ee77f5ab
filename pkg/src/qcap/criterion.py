"""Capacity series over dyadic shells and a heuristic convergence verdict.

For a point ``x`` of the closure of a bounded domain ``U`` in C^d the series

    sum_n 2^(n (2d-1) q) * cap_q(A_n(x) minus U),    q = p / (p - 1),

is evaluated shell by shell.  Its convergence is a sufficient condition for
``x`` to be a bounded point evaluation of the Bergman-type space L^p_a(U).
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .cache import cache_get_or_compute, clean_json
from .capacity import SOLVER_VERSION, CapacityEstimate, SolverSettings, estimate_capacity
from .geometry import (Ball, ImplicitSet, Intersection, annulus_shell, as_coords, locate,
                       point_mask, shell_minus_domain, triple_shell)
from .grid import Grid
from .martinelli import TestFunction

log = logging.getLogger(__name__)

CONVERGES = "series-converges"
DIVERGES = "series-diverges"
INCONCLUSIVE = "inconclusive"

HEURISTIC_NOTE = ("heuristic verdict: finitely many terms cannot decide convergence of a series, "
                  "and no unconditional tail certificate exists (the trivial capacity bound "
                  "makes individual weighted terms grow)")
MESSAGES = {
    CONVERGES: "sufficient condition met: x is a bounded point evaluation",
    DIVERGES: ("sufficient condition fails: no conclusion for d > 1; "
               "for d = 1 with p >= 2 the point is not a bounded point evaluation"),
    INCONCLUSIVE: "inconclusive: the computed terms fit neither verdict rule",
}


def holder_conjugate(p: float) -> float:
    """``p / (p - 1)``."""
    if not p > 1:
        raise ValueError(f"need p > 1, got {p}")
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def weight_log2(n: int, q: float, d: int) -> float:
    """``log2`` of the shell weight ``2^(n (2d-1) q)``."""
    return n * (2 * d - 1) * q


def weighted_term(n: int, gamma: float, q: float, d: int) -> float:
    """``2^(n (2d-1) q) * gamma`` evaluated through logarithms."""
    if gamma < 0:
        raise ValueError("capacity must be nonnegative")
    if gamma == 0:
        return 0.0
    return float(np.exp2(weight_log2(n, q, d) + math.log2(gamma)))


@dataclass
class CriterionConfig:
    """Parameters of a criterion run.

    ``resolutions`` are nodes per half-diagonal of the located extent of each
    shell target, coarse to fine.  ``support_factor`` scales that
    half-diagonal to the radius of the ball (intersected with the triple
    shell) outside which test functions vanish.
    """

    d: int
    x: tuple[float, ...]
    p: float
    n_min: int = 1
    n_max: int = 6
    resolutions: tuple[int, ...] = (16, 32)
    support_factor: float = 4.0
    k: int = 5
    rho_max: float = 0.7
    growth_factor: float = 10.0
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        self.x = tuple(float(v) for v in as_coords(self.x))
        self.resolutions = tuple(int(m) for m in self.resolutions)
        if isinstance(self.settings, dict):
            self.settings = SolverSettings(**{k: tuple(v) if k == "deltas" else v
                                              for k, v in self.settings.items()})
        self.validate()

    @property
    def q(self) -> float:
        return holder_conjugate(self.p)

    def validate(self) -> None:
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2 for capacity computations, got {self.d}")
        if len(self.x) != 2 * self.d:
            raise ValueError(f"x needs {2 * self.d} real coordinates, got {len(self.x)}")
        if not self.p > 1:
            raise ValueError(f"need p > 1, got {self.p}")
        if not self.q < 2 * self.d:
            raise ValueError(f"need p > {2 * self.d}/{2 * self.d - 1} (q < 2d); "
                             f"p={self.p} gives q={self.q}")
        if self.n_min < 1 or self.n_max > 40 or self.n_min > self.n_max:
            raise ValueError(f"need 1 <= n_min <= n_max <= 40, got {self.n_min}..{self.n_max}")
        if not self.resolutions or min(self.resolutions) < 2:
            raise ValueError("resolutions must be integers >= 2")
        if not self.support_factor > 1:
            raise ValueError("support_factor must exceed 1")
        if self.k < 2:
            raise ValueError("k must be at least 2")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x"] = list(self.x)
        d["resolutions"] = list(self.resolutions)
        d["settings"] = self.settings.to_dict()
        d["q"] = self.q
        return d


@dataclass
class ShellRecord:
    n: int
    capacity: float
    weight_log2: float
    term: float
    partial_sum: float
    h: float | None
    resolved: bool
    converged: bool
    status: str
    mask_nodes: int = 0
    trend: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    cache_hit: bool = False


@dataclass
class CriterionReport:
    config: dict
    shells: list
    verdict: str
    message: str
    fitted_ratio: float | None
    tail_estimate: float | None
    notes: list
    solver_version: str = SOLVER_VERSION

    def to_dict(self, include_cache_flags: bool = False) -> dict:
        shells = []
        for s in self.shells:
            d = asdict(s)
            if not include_cache_flags:
                d.pop("cache_hit")
            shells.append(d)
        return clean_json({
            "config": self.config, "shells": shells, "verdict": self.verdict,
            "message": self.message, "fitted_ratio": self.fitted_ratio,
            "tail_estimate": self.tail_estimate, "notes": list(self.notes),
            "solver_version": self.solver_version,
            "verdict_rules": {"k": self.config.get("k"), "rho_max": self.config.get("rho_max"),
                              "growth_factor": self.config.get("growth_factor")},
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @property
    def partial_sums(self) -> list[float]:
        return [s.partial_sum for s in self.shells]


def shell_problem(U: ImplicitSet, config: CriterionConfig, n: int):
    """Target set, located extent and support set for shell ``n``.

    Returns ``(target, extent, support)``; ``support`` is ``None`` when the
    target is certified empty.
    """
    target = shell_minus_domain(config.x, n, U)
    lo, hi = annulus_shell(config.x, n).bbox()
    ext = locate(target, lo, hi)
    if ext.empty:
        return target, ext, None
    radius = config.support_factor * max(ext.half_diagonal, 1e-300)
    support = Intersection((triple_shell(config.x, n), Ball(ext.center, radius)))
    return target, ext, support


def _shell_capacity(U, config: CriterionConfig, n: int, cache_dir) -> tuple[CapacityEstimate | None, dict]:
    target, ext, support = shell_problem(U, config, n)
    if support is None:
        return None, {"status": "empty"}
    hd = ext.half_diagonal
    ladder = [hd / m for m in config.resolutions]
    key = {"target": target.digest(), "support": support.digest(), "q": repr(config.q),
           "ladder": [repr(h) for h in ladder], "center": [repr(c) for c in ext.center],
           "settings": config.settings.to_dict()}

    def compute():
        return estimate_capacity(target, config.q, ladder, support, center=ext.center,
                                 settings=config.settings, keep_field=False)

    est, hit = cache_get_or_compute(cache_dir, key, compute)
    return est, {"status": "computed", "cache_hit": hit}


def fit_ratio(ns: Sequence[int], terms: Sequence[float]) -> float:
    """Least-squares geometric ratio ``rho`` with ``term_n ~ c rho^n``."""
    slope = np.polyfit(np.asarray(ns, dtype=float), np.log2(np.asarray(terms, dtype=float)), 1)[0]
    return float(2.0**slope)


def decide(records: Sequence[ShellRecord], k: int = 5, rho_max: float = 0.7,
           growth_factor: float = 10.0) -> tuple[str, float | None, float | None]:
    """Verdict, fitted ratio and heuristic tail from shell records.

    Rules, in order: every shell certified empty gives convergence; a
    geometric fit with ratio at most ``rho_max`` over the last ``k`` resolved
    terms gives convergence; nondecreasing last ``k`` terms that end above
    ``growth_factor`` times the first resolved term give divergence.
    """
    if records and all(r.status == "empty" for r in records):
        return CONVERGES, None, 0.0
    res = [r for r in records if r.resolved]
    if len(res) < k:
        return INCONCLUSIVE, None, None
    last = res[-k:]
    terms = [r.term for r in last]
    rho = fit_ratio([r.n for r in last], terms) if all(t > 0 for t in terms) else None
    if rho is not None and rho <= rho_max:
        return CONVERGES, rho, terms[-1] * rho / (1 - rho)
    if all(b >= a for a, b in zip(terms, terms[1:])) and terms[-1] > growth_factor * res[0].term:
        return DIVERGES, rho, None
    return INCONCLUSIVE, rho, None


def closure_check(U: ImplicitSet, x, levels: int = 20) -> bool:
    """False if some ball ``B(x, 2^-j)``, ``j = 1..levels``, is certified disjoint from ``U``."""
    xc = as_coords(x)
    for j in range(1, levels + 1):
        r = math.ldexp(1.0, -j)
        ball = Ball(xc, r)
        if locate(Intersection((U, ball)), xc - r, xc + r, rel_resolution=4).empty:
            return False
    return True


def evaluate_criterion(U: ImplicitSet, config: CriterionConfig, cache_dir=None,
                       jobs: int = 1) -> CriterionReport:
    """Evaluate the weighted capacity series of ``U`` at ``config.x``."""
    if not U.bounded:
        raise ValueError("domain must be bounded")
    if U.dim != 2 * config.d:
        raise ValueError(f"domain lives in R^{U.dim}, config expects R^{2 * config.d}")
    notes = [HEURISTIC_NOTE]
    if not closure_check(U, config.x):
        log.warning("x does not appear to lie in the closure of U")
        notes.append("warning: x does not appear to lie in the closure of U")
    ns = list(range(config.n_min, config.n_max + 1))

    def work(n):
        return _shell_capacity(U, config, n, cache_dir)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, ns))
    else:
        results = [work(n) for n in ns]

    records, total = [], 0.0
    for n, (est, meta) in zip(ns, results):
        w = weight_log2(n, config.q, config.d)
        if est is None:
            rec = ShellRecord(n, 0.0, w, 0.0, total, None, True, True, "empty")
        else:
            unresolved = est.mask_nodes == 0
            status = "unresolved" if unresolved else "resolved"
            term = 0.0 if unresolved else weighted_term(n, est.value, config.q, config.d)
            total += term
            rec = ShellRecord(n, float(est.value), w, term, total, float(est.h), not unresolved,
                              bool(est.converged), status, int(est.mask_nodes),
                              [float(v) for v in est.trend], list(est.warnings),
                              meta.get("cache_hit", False))
            if not est.converged:
                notes.append(f"shell {n}: solver did not meet its tolerance")
            if unresolved:
                notes.append(f"shell {n}: target not resolved by the grid; excluded from the fit")
        records.append(rec)
    verdict, rho, tail = decide(records, config.k, config.rho_max, config.growth_factor)
    return CriterionReport(config.to_dict(), records, verdict, MESSAGES[verdict], rho, tail, notes)


def _grid_points_complex(grid: Grid, mask: np.ndarray) -> np.ndarray:
    rel = np.stack([np.broadcast_to(c, grid.shape)[mask] for c in grid.relative_coords()], axis=1)
    pts = rel + np.asarray(grid.origin)
    return pts[:, 0::2] + 1j * pts[:, 1::2]


def evaluation_norm_probe(U: ImplicitSet, x, p: float, family: Sequence[TestFunction],
                          grid: Grid, chunk: int = 1 << 20) -> float:
    """``max_f |f(x)| / (sum_{nodes in U} |f|^p h^n)^(1/p)`` over ``family``.

    A lower bound for the norm of evaluation at ``x`` on L^p_a(U), up to
    quadrature error, when ``grid`` covers ``U``.
    """
    if not family:
        raise ValueError("empty family")
    inside = point_mask(U, grid).values
    if not inside.any():
        raise ValueError("no grid node lies in U")
    pts = _grid_points_complex(grid, inside)
    xc = as_coords(x)
    xz = xc[0::2] + 1j * xc[1::2]
    vol = grid.cell_volume
    best = 0.0
    for i, f in enumerate(family):
        acc = 0.0
        for s in range(0, len(pts), chunk):
            vals = f(pts[s:s + chunk])
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"family member {i} is singular inside U")
            acc += float(np.sum(np.abs(vals) ** p))
        fx = f(xz)
        if not np.isfinite(fx):
            raise ValueError(f"family member {i} is singular at x")
        norm = (acc * vol) ** (1.0 / p)
        if norm > 0:
            best = max(best, abs(fx) / norm)
    return float(best)


def polynomial_family(d: int, max_degree: int, cap: int = 64) -> list[TestFunction]:
    """Monomials ``zeta^alpha`` with ``|alpha| <= max_degree`` (at most ``cap``)."""
    out = []
    for deg in range(max_degree + 1):
        for alpha in _compositions(deg, d):
            out.append(TestFunction.monomial(alpha))
            if len(out) == cap:
                return out
    return out


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def pole_family(centers, powers: Sequence[int], cap: int = 64) -> list[TestFunction]:
    """``1 / (zeta - c)^k`` in one variable for poles ``c`` and powers ``k``.

    Poles are placed at the centres of removed balls, so each member is
    holomorphic on the closure of the domain.
    """
    out = []
    for c in centers:
        cz = complex(*as_coords(c)[:2]) if not isinstance(c, complex) else c
        for k in powers:
            out.append(TestFunction(lambda z, cz=cz, k=k: 1.0 / (z[:, 0] - cz) ** k,
                                    "C minus pole", (cz,)))
            if len(out) == cap:
                return out
    return out


def boundary_pole_family(x, normal, eps: float, powers: Sequence[int]) -> list[TestFunction]:
    """``1 / (zeta - (x + eps * normal))^k`` in one variable, pole just outside ``U``."""
    xc, nc = as_coords(x), as_coords(normal)
    pole = complex(xc[0] + eps * nc[0], xc[1] + eps * nc[1])
    return [TestFunction(lambda z, k=k: 1.0 / (z[:, 0] - pole) ** k, "C minus pole", (pole,))
            for k in powers]


def affine_pole_family(center, radius: float, d: int, count: int, seed: int = 0,
                       margin: float = 1.1) -> list[TestFunction]:
    """``1 / (<a, zeta> - b)`` with zero sets missing the ball ``B(center, radius)``.

    Directions ``a`` are random unit vectors of C^d drawn from ``seed``;
    ``b = <a, c> + margin * radius`` keeps the hyperplane outside the ball.
    """
    rng = np.random.default_rng(seed)
    cc = as_coords(center)
    cz = cc[0::2] + 1j * cc[1::2]
    out = []
    for _ in range(count):
        a = rng.normal(size=d) + 1j * rng.normal(size=d)
        a /= np.linalg.norm(a)
        b = complex(np.dot(a, cz)) + margin * radius
        out.append(TestFunction(lambda z, a=a, b=b: 1.0 / (z @ a - b), "complement of hyperplane"))
    return out
