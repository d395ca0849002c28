import numpy as np
import pytest

from hessquot.errors import ConeViolationError, ConfigError
from hessquot.hypersurface import GraphJet
from hessquot.pde_operator import (OperatorSpec, linearize, operator_gs_fd, operator_linearization,
                                   operator_values, residual)
from hessquot.psi import PsiModel
from hessquot.expressions import SphericalCap
from oracles import admissible_jets, fd_gij, fd_gs, rel_err


def test_spec_validation():
    with pytest.raises(ConfigError):
        OperatorSpec(3, 3, 1)
    with pytest.raises(ConfigError):
        OperatorSpec(1, 1, 0)
    with pytest.raises(ConfigError):
        OperatorSpec(3, 1, 1)
    assert OperatorSpec(4, 3, 1).power == 2


def test_mean_curvature_of_sphere():
    # k = 1, l = 0 on a radius-R sphere: sigma_1(eta) = (n - 1) H = (n-1) n / R
    cap = SphericalCap(1.0, 0.8)
    x = np.array([[0.1, 0.2], [0.0, 0.0], [0.5, -0.3]])
    G, margin = operator_values(cap.gradient(x), cap.hessian(x), OperatorSpec(2, 1, 0))
    np.testing.assert_allclose(G, 2.0, rtol=1e-12)
    assert np.all(margin > 0)


def test_linearization_against_differences():
    rng = np.random.default_rng(11)
    for du, d2u, spec, _ in admissible_jets(rng, count=60, repeated=20):
        lin = operator_linearization(du, d2u, spec)
        assert rel_err(lin.Gij, fd_gij(du, d2u, spec)) < 1e-6
        assert rel_err(lin.Gs, fd_gs(du, d2u, spec)) < 1e-6
        assert np.linalg.eigvalsh(lin.Gij)[0] >= -1e-10


def test_cone_violation():
    with pytest.raises(ConeViolationError):
        operator_linearization(np.zeros(3), -np.eye(3), OperatorSpec(3, 2, 1))
    G, margin = operator_values(np.zeros(3), -np.eye(3), OperatorSpec(3, 2, 1))
    assert margin < 0


def test_linearize_and_residual():
    jet = GraphJet(np.zeros(3), -0.1, np.array([0.2, 0.0, -0.1]), np.diag([1.0, 1.5, 2.0]))
    spec = OperatorSpec(3, 2, 1)
    psi = PsiModel("normal_dependent", (1.0, 0.5, 0.3), power=1)
    data = linearize(jet, spec, psi)
    np.testing.assert_allclose(data.Gs, data.Gs_fd, rtol=1e-6)
    assert residual(jet, spec, psi) == pytest.approx(data.G - data.psi)
    assert data.psi_z == pytest.approx(0.3 * data.psi, rel=1e-6)
    bad = GraphJet(np.zeros(3), 0.0, np.zeros(3), -np.eye(3))
    with pytest.raises(ConeViolationError):
        residual(bad, spec, psi)


def test_gs_fd_helper():
    du = np.array([0.3, -0.4])
    d2u = np.array([[1.0, 0.2], [0.2, 0.7]])
    spec = OperatorSpec(2, 1, 0)
    np.testing.assert_allclose(operator_gs_fd(du, d2u, spec), operator_linearization(du, d2u, spec).Gs,
                               rtol=1e-7)
