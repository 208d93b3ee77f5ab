from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from qcap.geometry import PointCd
from qcap.martinelli import (SingularInputError, TestFunction, bm_flux_components, bm_prefactor,
                             box_patches, calibrate_orientation, cauchy_integral, circle_patch,
                             divergence_residual, integrate_bm, sphere_patch)

pytestmark = pytest.mark.filterwarnings("ignore:z is .* from the surface")


def poly2(z):
    return z[:, 0] ** 2 + 3 * z[:, 1]


def test_flux_components_reference_values():
    np.testing.assert_allclose(bm_flux_components([1.0], [0.0]), [1.0])
    np.testing.assert_allclose(bm_flux_components([1.0, 0.0], [0.0, 0.0]), [1.0, 0.0])
    z = PointCd.from_complex([0.3 + 0.1j, -0.2j])
    zeta = np.array([1 + 1j, 0.5])
    lam = 2.5
    np.testing.assert_allclose(bm_flux_components(lam * zeta, [0, 0]),
                               lam ** (1 - 4) * bm_flux_components(zeta, [0, 0]))
    assert bm_flux_components(zeta, z).shape == (2,)
    with pytest.raises(SingularInputError):
        bm_flux_components([1j, 2.0], [1j, 2.0])


def test_prefactor():
    assert bm_prefactor(1) == pytest.approx(1 / (2j * math.pi))
    assert bm_prefactor(2) == pytest.approx(1 / (2j * math.pi) ** 2)
    assert bm_prefactor(3) == pytest.approx(2 / (2j * math.pi) ** 3)


def test_sphere_area_from_chart():
    assert sphere_patch([0, 0], 1.0, order=24).area() == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert sphere_patch([0, 0, 0], 0.5, order=12).area() == pytest.approx(math.pi**3 / 32, rel=1e-10)
    assert circle_patch(1j, 2.0).area() == pytest.approx(4 * math.pi, rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_calibration_gives_plus_one(d):
    order = {1: 64, 2: 24, 3: 12}[d]
    rng = np.random.default_rng(d)
    for radius in (0.5, 2.0):
        c = rng.normal(size=d) + 1j * rng.normal(size=d)
        sign, surf = calibrate_orientation(sphere_patch(c, radius, order=order), c)
        assert sign in (1, -1)
        val = integrate_bm(TestFunction.constant(), surf, c + 0.1 * radius)
        assert val == pytest.approx(1.0, abs=1e-6)


def test_reproduction_inside_and_vanishing_outside():
    f = TestFunction(poly2)
    _, surf = calibrate_orientation(sphere_patch([0, 0], 1.0, order=48), [0, 0])
    z = np.array([0.3, 0.2])
    assert abs(integrate_bm(f, surf, z) - f(z)) <= 1e-4
    assert abs(integrate_bm(f, surf, [1.5, 0])) <= 1e-4


def test_box_surface_reproduction():
    f = TestFunction(poly2)
    sign, surf = calibrate_orientation(box_patches([-1, -1, -1, -1], [1, 1, 1, 1], order=20),
                                       [0, 0])
    z = np.array([0.2 + 0.1j, -0.3j])
    assert integrate_bm(f, surf, z) == pytest.approx(complex(f(z)), abs=1e-6)
    assert abs(integrate_bm(f, surf, [2.0, 0.5])) < 1e-6


def test_one_variable_reduces_to_cauchy():
    rng = np.random.default_rng(0)
    coef = rng.normal(size=6) + 1j * rng.normal(size=6)
    p = np.polynomial.Polynomial(coef)
    f = TestFunction(lambda z: p(z[:, 0]))
    for z in (0.5, 0.2 - 0.4j, 1.7):
        a = integrate_bm(f, circle_patch(0, 1.0, order=64), [z])
        b = cauchy_integral(p, 0.0, 1.0, z)
        assert abs(a - b) <= 1e-10
    assert cauchy_integral(lambda w: w**2, 0, 1, 0.5) == pytest.approx(0.25)


def test_quadrature_error_decreases_with_order():
    f = TestFunction(lambda z: np.exp(z[:, 0]) * (1 + z[:, 1]) ** 3)
    z = np.array([0.4 + 0.2j, 0.3])
    errs = []
    for order in (6, 12, 24):
        _, surf = calibrate_orientation(sphere_patch([0, 0], 1.0, order=order), [0, 0], tol=1e-2)
        errs.append(abs(integrate_bm(f, surf, z) - f(z)))
    assert errs[0] > errs[1] > errs[2]


def test_near_singular_warning():
    surf = sphere_patch([0, 0], 1.0, order=16)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        integrate_bm(TestFunction.constant(), surf, [0.99, 0])
    assert any("near-singular" in str(w.message) for w in rec)


def test_calibration_rejects_exterior_point():
    with pytest.raises(ValueError, match="not"):
        calibrate_orientation(sphere_patch([0, 0], 1.0, order=16), [3.0, 0])


def test_divergence_residual_examples_and_order():
    assert divergence_residual([2 + 1j], 1e-3) <= 1e-6
    rng = np.random.default_rng(7)
    for d in (1, 2, 3):
        for _ in range(5):
            v = rng.normal(size=d) + 1j * rng.normal(size=d)
            v *= rng.uniform(0.5, 2.0) / np.linalg.norm(v)
            ratio = divergence_residual(v, 2e-3) / divergence_residual(v, 1e-3)
            assert 3.4 <= ratio <= 4.6
    with pytest.raises(ValueError):
        divergence_residual([0.01], 1e-3)
