import numpy as np
import pytest

from hessquot.errors import ConfigError
from hessquot.grid import DomainSpec
from hessquot.harness.barrier import (BarrierParams, barrier_check, barrier_phi, barrier_v,
                                      barrier_v_hessian, boundary_height, collar_nodes,
                                      distance_to_boundary, search_barrier_params, tangential_function,
                                      w_tilde)
from hessquot.pde_operator import OperatorSpec
from oracles import fd_jacobian


@pytest.mark.parametrize("n,k,l", [(2, 1, 0), (3, 2, 1), (3, 2, 0)])
def test_search_finds_feasible(n, k, l):
    params, rep = search_barrier_params(DomainSpec("disc", 1.0, n), OperatorSpec(n, k, l))
    assert rep.passed, rep.violations
    assert params.delta <= 2 * params.t / params.N


def test_hand_picked_parameters():
    dom = DomainSpec("disc", 1.0, 2)
    rep = barrier_check(dom, OperatorSpec(2, 1, 0), BarrierParams(0.1, 1.0, 0.04, 0.1))
    assert rep.passed
    assert set(rep.families) >= {"collar_bound_lower", "collar_bound_upper", "collar_bound_side",
                                 "shifted_hessian_cone", "projected_cone", "projected_quotient"}


def test_theta_too_large_is_config_error():
    with pytest.raises(ConfigError, match="Gamma"):
        barrier_check(DomainSpec("disc", 1.0, 2), OperatorSpec(2, 1, 0), BarrierParams(1.0, 0.1, 0.1, 0.1))
    with pytest.raises(ConfigError):
        barrier_check(DomainSpec("square", 1.0, 2), OperatorSpec(2, 1, 0), BarrierParams(0.1, 1, 0.1, 0.1))
    with pytest.raises(ConfigError):
        BarrierParams(0.1, -1.0, 0.1, 0.1)


def test_wide_collar_reports_violation():
    dom = DomainSpec("disc", 1.0, 2)
    spec = OperatorSpec(2, 1, 0)
    seen = False
    for delta in (0.1, 0.3, 0.6, 0.9):
        rep = barrier_check(dom, spec, BarrierParams(0.1, 5.0, 0.04, delta))
        if not rep.passed:
            seen = True
            assert rep.violations and rep.violations[0]["slack"] < 0
    assert seen
    assert not barrier_check(dom, spec, BarrierParams(0.1, 5.0, 0.04, 0.9)).to_dict()["passed"]


def test_v_hessian_and_geometry():
    x = np.array([0.1, -0.05, 0.02])
    H = barrier_v_hessian(x, 0.1, 2.0, 1.0)
    fd = fd_jacobian(lambda y: fd_jacobian(lambda z: barrier_v(z, 0.1, 2.0, 1.0), y, 1e-4), x, 1e-4)
    np.testing.assert_allclose(H, fd, atol=1e-5)
    xp = np.array([0.3, 0.4])
    on_b = np.append(xp, boundary_height(xp, 1.0))
    assert distance_to_boundary(on_b, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_collar_parts():
    X, p1, p2, p3 = collar_nodes(2, 1.0, 0.2, m=5)
    assert X.shape == (25, 2) and p1.sum() == 5 and p2.sum() == 5 and p3.sum() == 10
    X, p1, p2, p3 = collar_nodes(3, 1.0, 0.2, m=5, m_phi=8)
    assert p3.sum() == 8 * 5


def test_phi_pieces():
    # a function vanishing on the boundary has zero tangential derivative there
    xp = np.array([0.2])
    du = np.array([-xp[0], 1.0 - boundary_height(xp, 1.0)])  # gradient of (1 - |x - e_n|^2) / 2
    W = tangential_function(du, xp, 1.0, 0)
    assert W == pytest.approx(-0.5 * du[0] ** 2, abs=1e-12)
    assert w_tilde(0.0, 2.0) == 0.0
    p = BarrierParams(0.1, 1.0, 0.04, 0.1)
    x = np.append(xp, boundary_height(xp, 1.0))
    assert np.isfinite(barrier_phi(x, du, p, 1.0))
