import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hessquot import symcalc
from hessquot.hypersurface import (GraphJet, admissible, gamma_down, omega, principal_curvatures,
                                   shape_matrix, surface_data, unit_normal)
from hessquot.expressions import SphericalCap


def sym(n):
    return arrays(np.float64, (n, n), elements=st.floats(-3, 3)).map(lambda a: 0.5 * (a + a.T))


jets = st.integers(2, 4).flatmap(
    lambda n: st.tuples(arrays(np.float64, n, elements=st.floats(-3, 3)), sym(n)))


@given(jets)
@settings(max_examples=150, deadline=None)
def test_geometry_identities(j):
    du, d2u = j
    sd = surface_data(GraphJet(np.zeros(len(du)), 0.0, du, d2u))
    n = len(du)
    np.testing.assert_allclose(sd.gamma_down @ sd.gamma_down, sd.g, atol=1e-10 * (1 + du @ du))
    np.testing.assert_allclose(sd.gamma_up @ sd.gamma_down, np.eye(n), atol=1e-10)
    assert np.linalg.norm(sd.nu) == pytest.approx(1.0, abs=1e-12)
    tangents = np.hstack([np.eye(n), du[:, None]])
    np.testing.assert_allclose(tangents @ sd.nu, 0, atol=1e-10)
    np.testing.assert_allclose(sd.eta_eigs, np.sort(symcalc.eta_map(sd.kappa)), atol=1e-12)


def test_sphere_curvatures_are_inverse_radius():
    cap = SphericalCap(2.0, 1.0)
    rng = np.random.default_rng(1)
    for x in rng.uniform(-0.6, 0.6, (20, 3)):
        k = principal_curvatures(cap.gradient(x), cap.hessian(x))
        np.testing.assert_allclose(k, 0.5, rtol=1e-12)


def test_rotation_invariance():
    rng = np.random.default_rng(2)
    du = rng.normal(size=3)
    A = rng.normal(size=(3, 3))
    d2u = A + A.T
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    np.testing.assert_allclose(principal_curvatures(du, d2u),
                               principal_curvatures(q @ du, q @ d2u @ q.T), atol=1e-12)


def test_scaling():
    # u -> u(x / s) * s scales curvatures by 1/s
    du = np.array([0.4, -0.2])
    d2u = np.array([[1.0, 0.3], [0.3, 2.0]])
    s = 3.0
    np.testing.assert_allclose(principal_curvatures(du, d2u / s), principal_curvatures(du, d2u) / s)


def test_flat_gradient_reduces_to_hessian():
    d2u = np.diag([1.0, 2.0])
    a, gam, w = shape_matrix(np.zeros(2), d2u)
    np.testing.assert_allclose(a, d2u)
    assert w == 1.0
    assert omega([3.0, 4.0]) == pytest.approx(np.sqrt(26))
    np.testing.assert_allclose(unit_normal([0.0, 0.0]), [0, 0, 1])
    np.testing.assert_allclose(gamma_down([0.0, 0.0]), np.eye(2))


def test_jet_validation():
    with pytest.raises(ValueError):
        GraphJet(np.zeros(2), 0.0, np.zeros(3), np.eye(2))
    with pytest.raises(ValueError):
        GraphJet(np.zeros(2), 0.0, np.zeros(2), np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        GraphJet(np.zeros(2), np.nan, np.zeros(2), np.eye(2))


def test_admissible():
    ok, m = admissible(GraphJet(np.zeros(3), 0.0, np.zeros(3), np.eye(3)), 3)
    assert ok and m == pytest.approx(6.0)
    ok, _ = admissible(GraphJet(np.zeros(3), 0.0, np.zeros(3), -np.eye(3)), 1)
    assert not ok
