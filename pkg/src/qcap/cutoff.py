"""Radial bump functions, cutoff products and their energy inequalities.

For a centre ``x`` and shell index ``n`` the bump ``psi_n`` is the piecewise
linear function of ``r = |z - x|`` with

    0                      for r <= 2^-(n+2)
    rising with slope 2^(n+2) on [2^-(n+2), 2^-(n+1)]
    1                      on [2^-(n+1), 2^-n]
    falling with slope 2^n  on [2^-n, 2^-(n-1)]
    0                      for r >= 2^-(n-1)

Products ``phi_n = g_n * psi_n`` localise a capacity test function to the
three shells around shell ``n``; their pointwise supremum combines them.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .capacity import _energy_sum, cell_gradient
from .geometry import as_coords
from .grid import Grid, ScalarField, _check_same_grid


def bump_radii(n: int) -> tuple[float, float, float, float]:
    """Kink radii ``(2^-(n+2), 2^-(n+1), 2^-n, 2^-(n-1))`` of ``psi_n``."""
    if n < 1:
        raise ValueError(f"bump index must be >= 1, got {n}")
    return tuple(math.ldexp(1.0, -k) for k in (n + 2, n + 1, n, n - 1))


def bump_profile(n: int, r):
    """Value and radial slope of ``psi_n`` at radii ``r``.

    At a kink the slope is the one-sided value of larger magnitude.
    """
    a, b, c, e = bump_radii(n)
    r = np.asarray(r, dtype=float)
    up = 1.0 / (b - a)
    down = -1.0 / (e - c)
    value = np.select([r <= a, r < b, r <= c, r < e], [0.0, (r - a) * up, 1.0, (e - r) * (-down)],
                      default=0.0)
    slope = np.select([r < a, r <= b, r < c, r <= e], [0.0, up, 0.0, down], default=0.0)
    return value, slope


def psi(n: int, x, z) -> tuple[float, float]:
    """``(psi_n(z), d psi_n / dr)`` for a bump centred at ``x``."""
    xc, zc = as_coords(x), as_coords(z)
    if xc.size != zc.size:
        raise ValueError("point dimension mismatch")
    v, s = bump_profile(n, float(np.linalg.norm(zc - xc)))
    return float(v), float(s)


def psi_field(n: int, x, grid: Grid) -> ScalarField:
    """``psi_n`` sampled on the nodes of ``grid``."""
    v, _ = bump_profile(n, grid.radius_from(as_coords(x)))
    return ScalarField(grid, v)


def _covers_triple_shell(grid: Grid, n: int, x) -> bool:
    e = bump_radii(n)[3]
    xc = as_coords(x)
    return bool(np.all(grid.lo <= xc - e) and np.all(grid.hi >= xc + e))


def build_phi(g: ScalarField, n: int, x) -> ScalarField:
    """Nodewise product ``g * psi_n``."""
    if not _covers_triple_shell(g.grid, n, x):
        raise ValueError(f"grid does not cover the triple shell around shell {n}")
    return g * psi_field(n, x, g.grid)


def sup_combine(fields: Sequence[ScalarField]) -> ScalarField:
    """Nodewise maximum of fields on one grid."""
    if not fields:
        raise ValueError("need at least one field")
    _check_same_grid(*fields)
    return ScalarField(fields[0].grid, np.max([f.values for f in fields], axis=0))


def _cell_mean(u: np.ndarray) -> np.ndarray:
    for k in range(u.ndim):
        u = 0.5 * (u[(slice(None),) * k + (slice(None, -1),)] + u[(slice(None),) * k + (slice(1, None),)])
    return u


def gns_ratio(g: ScalarField, q: float) -> float:
    """Sobolev-embedding quotient ``||g||_{q*} / ||grad g||_q^q`` with ``q* = nq/(n-q)``.

    Both sides scale as ``lambda^(q-n)`` under ``z -> lambda z``, so the ratio
    is dilation invariant; a bounded ratio over samples is the discrete form of
    the Sobolev inequality without its constant.
    """
    n = g.grid.ndim
    if not 1 < q < n:
        raise ValueError(f"need 1 < q < {n}, got {q}")
    vol = g.grid.cell_volume
    energy = _energy_sum(g.values, g.grid.h, q)
    if energy == 0:
        raise ValueError("field has zero gradient energy; ratio undefined")
    qs = n * q / (n - q)
    lhs = (np.sum(np.abs(g.values) ** qs) * vol) ** ((n - q) / n)
    return float(lhs / energy)


def product_rule_terms(g: ScalarField, bump: ScalarField, q: float) -> dict:
    """Both sides of the product-rule bound for ``phi = g * bump``.

    Returns the energy of the product and the two integrals
    ``sum g^q |G bump|^q h^n`` and ``sum bump^q |G g|^q h^n`` (cell means of
    ``g`` and ``bump``), with the convexity factor ``2^(q-1)`` applied in
    ``bound``.
    """
    _check_same_grid(g, bump)
    h = g.grid.h
    vol = g.grid.cell_volume
    phi = g.values * bump.values
    lhs = _energy_sum(phi, h, q)
    gb = cell_gradient(bump.values, h)
    gg = cell_gradient(g.values, h)
    t1 = float(np.sum(np.abs(_cell_mean(g.values)) ** q * np.sum(gb * gb, axis=0) ** (q / 2)) * vol)
    t2 = float(np.sum(np.abs(_cell_mean(bump.values)) ** q * np.sum(gg * gg, axis=0) ** (q / 2)) * vol)
    return {"energy": lhs, "g_times_grad_bump": t1, "bump_times_grad_g": t2,
            "bound": 2 ** (q - 1) * (t1 + t2), "literal_bound": t1 + t2}


def holder_terms(g: ScalarField, bump: ScalarField, q: float) -> tuple[float, float]:
    """``sum g^q |G bump|^q`` and its Hölder bound with exponents ``n/(n-q)``, ``n/q``."""
    _check_same_grid(g, bump)
    n = g.grid.ndim
    vol = g.grid.cell_volume
    gm = np.abs(_cell_mean(g.values))
    gb = cell_gradient(bump.values, g.grid.h)
    grad = np.sqrt(np.sum(gb * gb, axis=0))
    lhs = float(np.sum(gm**q * grad**q) * vol)
    a = (np.sum(gm ** (n * q / (n - q))) * vol) ** ((n - q) / n)
    b = (np.sum(grad**n) * vol) ** (q / n)
    return lhs, float(a * b)


def bump_energy(n: int, d: int) -> float:
    """Exact ``integral |grad psi_n|^(2d) dV`` over C^d (independent of ``n``)."""
    a, b, c, e = bump_radii(n)
    m = 2 * d
    omega = 2 * math.pi ** (m / 2) / math.gamma(m / 2)
    inner = (1 / (b - a)) ** m * (b**m - a**m) / m
    outer = (1 / (e - c)) ** m * (e**m - c**m) / m
    return omega * (inner + outer)


def bump_grid_energy(n: int, x, grid: Grid, exponent: float | None = None) -> float:
    """``sum |G psi_n|^exponent h^n`` on ``grid`` (default exponent: dimension)."""
    p = float(grid.ndim if exponent is None else exponent)
    return _energy_sum(psi_field(n, x, grid).values, grid.h, p)
