from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from qcap.capacity import estimate_capacity
from qcap.cutoff import (build_phi, bump_energy, bump_grid_energy, bump_profile, bump_radii,
                         gns_ratio, holder_terms, product_rule_terms, psi, psi_field, sup_combine)
from qcap.geometry import Ball
from qcap.grid import Grid, ScalarField


def test_profile_reference_points():
    n = 5
    a, b, c, e = bump_radii(n)
    assert (a, b, c, e) == (2**-7, 2**-6, 2**-5, 2**-4)
    v, s = psi(n, (0, 0), (1.5 * 2 ** -(n + 1), 0))
    assert (v, s) == (1.0, 0.0)
    assert psi(n, (0, 0), (e, 0))[0] == 0.0
    assert psi(n, (0, 0), (2 * e, 0))[0] == 0.0
    assert abs(psi(n, (0, 0), (0.5 * (a + b), 0))[1]) == 2.0 ** (n + 2) == 128


def test_profile_exact_properties():
    for n in (1, 3, 7, 20):
        a, b, c, e = bump_radii(n)
        r = np.concatenate([np.linspace(0, 2 * e, 20001), [a, b, c, e]])
        v, s = bump_profile(n, r)
        assert v.min() >= 0 and v.max() <= 1
        assert np.all(v[(r >= b) & (r <= c)] == 1)
        assert np.all(v[(r <= a) | (r >= e)] == 0)
        assert np.abs(s).max() == 2.0 ** (n + 2)
        # kinks take the larger one-sided slope
        assert bump_profile(n, b)[1] == 2.0 ** (n + 2)
        assert bump_profile(n, c)[1] == -(2.0**n)
    with pytest.raises(ValueError):
        bump_radii(0)


def test_bump_energy_against_quadrature_and_independent_of_n():
    for d in (1, 2):
        for n in (2, 6):
            a, b, c, e = bump_radii(n)
            omega = 2 * math.pi**d / math.gamma(d)
            m = 2 * d
            inner = quad(lambda r: (1 / (b - a)) ** m * r ** (m - 1), a, b)[0]
            outer = quad(lambda r: (1 / (e - c)) ** m * r ** (m - 1), c, e)[0]
            assert bump_energy(n, d) == pytest.approx(omega * (inner + outer), rel=1e-12)
        assert bump_energy(3, d) == pytest.approx(bump_energy(4, d), rel=1e-12)


def test_bump_grid_energy_scales_with_n():
    vals = []
    for n in (2, 3):
        e = bump_radii(n)[3]
        grid = Grid.covering((-e, -e), (e, e), e / 128, origin=(0, 0))
        vals.append(bump_grid_energy(n, (0, 0), grid))
    assert vals[0] == pytest.approx(vals[1], rel=0.1)
    assert vals[0] == pytest.approx(bump_energy(2, 1), rel=0.05)


def test_build_phi_trivial_cases_and_cover_check():
    n = 3
    e = bump_radii(n)[3]
    grid = Grid.covering((-e, -e), (e, e), e / 32, origin=(0, 0))
    ones = ScalarField(grid, np.ones(grid.shape))
    np.testing.assert_array_equal(build_phi(ones, n, (0, 0)).values,
                                  psi_field(n, (0, 0), grid).values)
    assert not build_phi(ScalarField.zeros(grid), n, (0, 0)).values.any()
    small = Grid.covering((-e / 2, -e / 2), (e / 2, e / 2), e / 32, origin=(0, 0))
    with pytest.raises(ValueError, match="triple shell"):
        build_phi(ScalarField.zeros(small), n, (0, 0))


def test_phi_equals_one_on_target_for_a_minimizer():
    n = 2
    a, b, c, e = bump_radii(n)
    target = Ball((1.5 * b, 0), 0.2 * b)
    est = estimate_capacity(target, 1.5, [b / 16], 1.0 * b, center=(1.5 * b, 0))
    g = est.field
    big = Grid.covering((-e, -e), (e, e), g.grid.h, origin=g.grid.origin)
    # embed the minimizer in a grid covering the triple shell
    vals = np.zeros(big.shape)
    off = tuple(np.asarray(g.grid.offset) - np.asarray(big.offset))
    vals[tuple(slice(o, o + s) for o, s in zip(off, g.grid.shape))] = g.values
    phi = build_phi(ScalarField(big, vals), n, (0, 0))
    from qcap.geometry import rasterize
    mask = rasterize(target, big).values
    assert mask.any() and np.all(phi.values[mask] == 1)


def test_sup_combine():
    grid = Grid.covering((-1, -1), (1, 1), 0.1)
    rng = np.random.default_rng(4)
    f = ScalarField(grid, rng.uniform(size=grid.shape))
    assert np.array_equal(sup_combine([f]).values, f.values)
    a = np.zeros(grid.shape)
    b = np.zeros(grid.shape)
    a[:5] = rng.uniform(size=a[:5].shape)
    b[-5:] = rng.uniform(size=b[-5:].shape)
    fa, fb = ScalarField(grid, a), ScalarField(grid, b)
    np.testing.assert_array_equal(sup_combine([fa, fb]).values, a + b)
    other = Grid.covering((-1, -1), (1, 1), 0.2)
    with pytest.raises(ValueError):
        sup_combine([f, ScalarField.zeros(other)])
    with pytest.raises(ValueError):
        sup_combine([])


def _hat(grid, scale):
    u = np.ones(grid.shape)
    for c in grid.relative_coords():
        u = u * np.clip(1 - np.abs(c) / scale, 0, None)
    return ScalarField(grid, u)


def test_gns_ratio_dilation_invariant():
    r1 = gns_ratio(_hat(Grid.covering((-1, -1), (1, 1), 1 / 64, origin=(0, 0)), 1.0), 1.5)
    r2 = gns_ratio(_hat(Grid.covering((-3, -3), (3, 3), 3 / 64, origin=(0, 0)), 3.0), 1.5)
    assert r1 > 0 and math.isfinite(r1)
    assert r2 == pytest.approx(r1, rel=0.05)
    with pytest.raises(ValueError, match="zero gradient"):
        gns_ratio(ScalarField.zeros(Grid.covering((-1, -1), (1, 1), 0.1)), 1.5)


def test_product_rule_and_holder_bounds():
    n = 2
    e = bump_radii(n)[3]
    h = 2.0 ** -(n + 5)
    grid = Grid.covering((-e, -e), (e, e), h, origin=(0, 0))
    x, y = grid.coords()
    g = ScalarField(grid, np.broadcast_to(np.exp(-((x - 0.2) ** 2 + y**2) * 20), grid.shape))
    bump = psi_field(n, (0, 0), grid)
    t = product_rule_terms(g, bump, 1.5)
    assert t["energy"] <= 1.1 * t["bound"]
    lhs, rhs = holder_terms(g, bump, 1.5)
    assert lhs <= rhs * (1 + 1e-12)
