from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize

from qcap.capacity import (CapacityEstimate, SolverSettings, SupportTooSmallError,
                           _energy_sum, cell_gradient, cell_gradient_t, estimate_capacity,
                           minimize_q_energy, q_energy, radial_capacity_oracle, sphere_area)
from qcap.geometry import Ball, Box, EmptySet, NodeMask, Union, rasterize
from qcap.grid import Grid, ScalarField


def radial_quadrature(r, R, q, n):
    # Euler-Lagrange reduction: cap = omega * (int_r^R t^{-(n-1)/(q-1)} dt)^{1-q}
    integral, _ = quad(lambda t: t ** (-(n - 1) / (q - 1)), r, R)
    return sphere_area(n) * integral ** (1 - q)


@pytest.mark.parametrize("r,R,q,n", [(1, 8, 1.5, 2), (1, 2, 2.0, 4), (0.3, 5.0, 1.2, 2),
                                     (1, 3, 3.0, 4), (0.5, 1.0, 1.7, 3)])
def test_radial_oracle_matches_quadrature(r, R, q, n):
    assert radial_capacity_oracle(r, R, q, n) == pytest.approx(radial_quadrature(r, R, q, n),
                                                               rel=1e-9)


def test_radial_oracle_reference_values():
    assert radial_capacity_oracle(1, math.inf, 2, 4) == pytest.approx(4 * math.pi**2)
    assert radial_capacity_oracle(1, 2, 2, 4) == pytest.approx(16 * math.pi**2 / 3)
    assert radial_capacity_oracle(1, 8, 1.5, 2) == pytest.approx(6.7167, abs=5e-4)
    with pytest.raises(ValueError):
        radial_capacity_oracle(1, 2, 4.0, 4)
    with pytest.raises(ValueError):
        radial_capacity_oracle(2, 1, 1.5, 2)


def test_gradient_adjoint():
    rng = np.random.default_rng(0)
    for shape in [(5, 6), (4, 3, 5), (3, 4, 3, 3)]:
        u = rng.normal(size=shape)
        g = rng.normal(size=(len(shape),) + tuple(s - 1 for s in shape))
        lhs = np.sum(cell_gradient(u, 0.3) * g)
        rhs = np.sum(u * cell_gradient_t(g, 0.3))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gradient_exact_on_linear_fields():
    grid = Grid.covering((-1, -1, -1), (1, 1, 1), 0.25)
    x, y, z = grid.coords()
    u = np.broadcast_to(2 * x - 3 * y + 0.5 * z, grid.shape)
    g = cell_gradient(np.array(u), grid.h)
    np.testing.assert_allclose(g[0], 2.0)
    np.testing.assert_allclose(g[1], -3.0)
    np.testing.assert_allclose(g[2], 0.5)


def test_profile_energy_matches_hand_integral():
    # u = max(0, 1 - |x1|), constant in x2 over [-1, 1]: integral of |u'|^1.5 is 2 * 2
    h = 1 / 64
    grid = Grid.covering((-1.5, -1), (1.5, 1), h, origin=(0, 0), pad=0)
    x, _ = grid.coords()
    u = np.broadcast_to(np.maximum(0, 1 - np.abs(x)), grid.shape)
    energy = _energy_sum(np.array(u), h, 1.5)
    assert energy == pytest.approx(4.0, rel=3 * h)


def test_q_energy_contract():
    grid = Grid.covering((-1, -1), (1, 1), 0.1)
    rng = np.random.default_rng(1)
    u = rng.uniform(size=grid.shape)
    u[grid.boundary_layer()] = 0
    f = ScalarField(grid, u)
    assert q_energy(ScalarField.zeros(grid), 1.5) == 0
    assert q_energy(2 * f, 1.5) == pytest.approx(2**1.5 * q_energy(f, 1.5), rel=1e-12)
    with pytest.raises(ValueError):
        q_energy(f, 2.0)
    bad = u.copy()
    bad[0, 0] = 1.0
    with pytest.raises(ValueError):
        q_energy(ScalarField(grid, bad), 1.5)


def _tiny_problem():
    grid = Grid.covering((-1, -1), (1, 1), 0.25, origin=(0, 0), pad=0)
    mask = rasterize(Box((-0.3, -0.3), (0.3, 0.3)), grid)
    return grid, mask


def test_newton_matches_brute_force_minimizer():
    grid, mask = _tiny_problem()
    q = 1.5
    field, energy, info = minimize_q_energy(mask, q)
    free = ~grid.boundary_layer() & ~mask.values
    base = mask.values.astype(float)

    def f(x):
        u = base.copy()
        u[free] = x
        return _energy_sum(u, grid.h, q)

    res = minimize(f, np.full(free.sum(), 0.5), method="L-BFGS-B",
                   options={"maxiter": 20000, "ftol": 1e-15, "gtol": 1e-12})
    assert energy == pytest.approx(res.fun, rel=1e-4)
    assert energy <= res.fun * (1 + 1e-5)
    assert np.all(field.values[mask.values] == 1)
    assert np.all(field.values[grid.boundary_layer()] == 0)


def test_spg_agrees_with_newton():
    grid = Grid.covering((-1, -1), (1, 1), 1 / 16)
    mask = rasterize(Ball((0, 0), 0.3), grid)
    _, e_newton, _ = minimize_q_energy(mask, 1.5)
    _, e_spg, info = minimize_q_energy(mask, 1.5, SolverSettings(method="spg", max_iter=20000))
    assert e_spg == pytest.approx(e_newton, rel=2e-3)


def test_reported_energy_is_stored_field_energy():
    grid = Grid.covering((-1, -1), (1, 1), 1 / 16)
    mask = rasterize(Ball((0.1, 0), 0.3), grid)
    field, energy, info = minimize_q_energy(mask, 1.7)
    assert q_energy(field, 1.7) == pytest.approx(energy, rel=1e-13)
    # continuation never reports a worse energy than an earlier stage
    assert all(b <= a for a, b in zip(info.stage_energies, info.stage_energies[1:]))


def test_empty_mask_and_zero_region_errors():
    grid = Grid.covering((-1, -1), (1, 1), 0.25)
    field, energy, _ = minimize_q_energy(NodeMask(grid, np.zeros(grid.shape, bool)), 1.5)
    assert energy == 0 and not field.values.any()
    bad = np.zeros(grid.shape, bool)
    bad[0, 3] = True
    with pytest.raises(ValueError):
        minimize_q_energy(NodeMask(grid, bad), 1.5)


def test_single_node_capacity_decreases_with_h():
    # points have zero q-capacity for q < n
    values = []
    for h in (1 / 4, 1 / 8, 1 / 16):
        grid = Grid.covering((-1, -1), (1, 1), h, origin=(0, 0), pad=0)
        m = np.zeros(grid.shape, bool)
        m[tuple(s // 2 for s in grid.shape)] = True
        values.append(minimize_q_energy(NodeMask(grid, m), 1.5)[1])
    assert values[0] > values[1] > values[2] > 0


def test_fixed_grid_monotonicity_and_subadditivity():
    grid = Grid.covering((-1, -1), (1, 1), 1 / 16)
    s = SolverSettings()
    a = rasterize(Ball((-0.2, 0), 0.2), grid)
    b = rasterize(Ball((0.25, 0.1), 0.15), grid)
    big = rasterize(Ball((-0.2, 0), 0.3), grid)
    ab = NodeMask(grid, a.values | b.values)
    ea = minimize_q_energy(a, 1.5, s)[1]
    eb = minimize_q_energy(b, 1.5, s)[1]
    ebig = minimize_q_energy(big, 1.5, s)[1]
    eab = minimize_q_energy(ab, 1.5, s)[1]
    tol = lambda e: s.abs_tol + s.rel_tol * e  # noqa: E731
    assert ea <= ebig + 2 * tol(ebig)
    assert eab <= ea + eb + 2 * tol(ea + eb)
    assert ea <= eab + 2 * tol(eab)


def test_estimate_capacity_small_disk_against_oracle():
    est = estimate_capacity(Ball((0, 0), 0.5), 1.5, [1 / 16, 1 / 32], 2.0)
    ref = radial_capacity_oracle(0.5, 2.0, 1.5, 2)
    assert abs(est.value - ref) / ref < 0.06
    assert est.feasible and est.converged
    assert len(est.trend) == 2 and est.mask_nodes > 0
    assert q_energy(est.field, 1.5) == pytest.approx(est.value, rel=1e-13)
    back = CapacityEstimate.from_dict(est.to_dict())
    assert back.value == est.value and back.field is None


def test_estimate_capacity_empty_and_errors():
    est = estimate_capacity(EmptySet(2), 1.5, [0.25], Ball((0, 0), 1.0))
    assert est.value == 0 and est.warnings == []
    tiny = Ball((0, 0), 1e-3)
    est = estimate_capacity(tiny, 1.5, [0.1], 1.0)
    assert est.value == 0
    assert any("possibly-positive-capacity-missed" in w for w in est.warnings)
    with pytest.raises(SupportTooSmallError):
        estimate_capacity(Ball((0, 0), 1.0), 1.5, [0.25], 1.0)
    with pytest.raises(ValueError):
        from qcap.geometry import HalfSpace
        estimate_capacity(HalfSpace((1, 0), 0.0), 1.5, [0.25], 1.0)


def test_capacity_of_union_is_at_most_sum_across_estimates():
    u = Union((Ball((-0.4, 0), 0.2), Ball((0.4, 0), 0.2)))
    e_u = estimate_capacity(u, 1.5, [1 / 16], 2.0, center=(0, 0)).value
    e_1 = estimate_capacity(Ball((-0.4, 0), 0.2), 1.5, [1 / 16], 2.0, center=(0, 0)).value
    assert e_1 < e_u < 2 * e_1 * (1 + 1e-6)
