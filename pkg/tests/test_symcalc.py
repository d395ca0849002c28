import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hessquot import symcalc
from hessquot.errors import ConeViolationError, DomainError
from oracles import fd_grad, fd_jacobian, rel_err, sigma_brute

vectors = st.integers(1, 6).flatmap(
    lambda n: arrays(np.float64, n, elements=st.floats(-3, 3, allow_nan=False)))


@given(vectors, st.data())
@settings(max_examples=200, deadline=None)
def test_sigma_matches_subset_sum(lam, data):
    k = data.draw(st.integers(0, len(lam)))
    assert symcalc.sigma(k, lam) == pytest.approx(sigma_brute(k, lam), rel=1e-12, abs=1e-12)


@given(vectors, st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_sigma_permutation_invariant(lam, rnd):
    perm = list(range(len(lam)))
    rnd.shuffle(perm)
    a = symcalc.sigma_table(lam)
    b = symcalc.sigma_table(lam[perm])
    np.testing.assert_array_equal(a, b)


def test_known_values():
    assert symcalc.sigma(2, [1, 2, 3]) == 11
    assert symcalc.sigma(0, [1, 2, 3]) == 1
    assert symcalc.sigma_partial(2, [1, 2, 3], 0) == 5
    assert symcalc.sigma_partial2(3, [1, 2, 3, 4], 0, 1) == 7
    assert symcalc.sigma_partial2(2, [1, 2, 3], 1, 1) == 0
    np.testing.assert_allclose(symcalc.eta_map([3, 1, -0.5]), [0.5, 2.5, 4.0])


def test_order_out_of_range():
    with pytest.raises(DomainError):
        symcalc.sigma(4, [1, 2, 3])
    with pytest.raises(DomainError):
        symcalc.sigma(-1, [1, 2, 3])
    with pytest.raises(DomainError):
        symcalc.sigma_partial(1, [1, 2], 2)
    with pytest.raises(DomainError):
        symcalc.sigma(1, [1.0, np.nan])


def test_batched_sigma():
    rng = np.random.default_rng(0)
    lam = rng.normal(size=(7, 4))
    out = symcalc.sigma(2, lam)
    assert out.shape == (7,)
    for row, v in zip(lam, out):
        assert v == pytest.approx(sigma_brute(2, row))


def test_deleted_tables_against_brute():
    lam = np.array([0.3, -1.2, 2.0, 0.7, 1.1])
    d1 = symcalc.sigma_deleted(lam)
    d2 = symcalc.sigma_deleted2(lam)
    for i in range(5):
        rest = np.delete(lam, i)
        for j in range(5):
            assert d1[i, j] == pytest.approx(sigma_brute(j, rest), abs=1e-12)
        for j in range(5):
            if i != j:
                rest2 = np.delete(lam, [i, j])
                for m in range(4):
                    assert d2[i, j, m] == pytest.approx(sigma_brute(m, rest2), abs=1e-12)


def test_partials_against_differences():
    lam = np.array([0.4, 1.3, 2.2, 0.9])
    for k in range(1, 5):
        g = fd_grad(lambda x: symcalc.sigma(k, x), lam)
        for i in range(4):
            assert symcalc.sigma_partial(k, lam, i) == pytest.approx(g[i], rel=1e-8)


def test_in_cone_kinds():
    assert symcalc.in_cone([1, 1, 1], 3)[0]
    inside, margin = symcalc.in_cone([1, -0.4, 1], 2)
    assert inside and margin == pytest.approx(0.2)
    assert not symcalc.in_cone([1, -2, 1], 1)[0]
    # curvatures (2, 2, -1) have eta image (1, 1, 4)
    assert symcalc.in_cone([2, 2, -1], 3, "gamma_tilde")[0]
    assert not symcalc.in_cone([2, 2, -1], 3)[0]
    with pytest.raises(DomainError):
        symcalc.in_cone([1, 2], 1, "other")
    # boundary of the cone counts as outside
    assert not symcalc.in_cone([0, 0, 1], 2)[0]


def test_eta_matrix_is_the_map():
    kap = np.array([0.1, -0.4, 2.0, 1.5])
    np.testing.assert_allclose(symcalc.eta_matrix(4) @ kap, symcalc.eta_map(kap))


@pytest.mark.parametrize("n,k,l", [(3, 1, 0), (3, 2, 0), (3, 2, 1), (4, 3, 1), (5, 3, 2), (4, 4, 2)])
def test_quotient_jet_against_differences(n, k, l):
    rng = np.random.default_rng(n * 100 + k * 10 + l)
    done = 0
    while done < 20:
        lam = rng.uniform(-1, 3, n)
        if symcalc.cone_margin(lam, k) < 1e-2:
            continue
        jet = symcalc.quotient_jet(lam, k, l, want_hess=True)
        fg = fd_grad(lambda x: float(symcalc.quotient_jet(x, k, l).value), lam)
        fh = fd_jacobian(lambda x: symcalc.quotient_jet(x, k, l).grad, lam)
        assert rel_err(jet.grad, fg) < 1e-6
        assert rel_err(jet.hess, fh) < 1e-6
        np.testing.assert_allclose(jet.hess, jet.hess.T, atol=1e-12)
        done += 1


def test_quotient_jet_example_and_errors():
    jet = symcalc.quotient_jet([1, 2, 3], 2, 0)
    assert jet.value == 11
    np.testing.assert_allclose(jet.grad, [5, 4, 3])
    with pytest.raises(ConeViolationError):
        symcalc.quotient_jet([-1, -2, -3], 2, 1)
    with pytest.raises(DomainError):
        symcalc.quotient_jet([1, 2], 2, 2)


def test_newton_maclaurin_equality_at_ones():
    lam = np.ones(4)
    assert symcalc.check_newton_maclaurin(lam, 3, 1, 2, 0) == pytest.approx(0, abs=1e-14)
    with pytest.raises(DomainError):
        symcalc.check_newton_maclaurin(np.array([1.0, -5.0, 1.0, 1.0]), 3, 1, 2, 0)


def test_newton_maclaurin_holds_on_cone():
    rng = np.random.default_rng(3)
    lam = rng.uniform(-1, 3, (4000, 4))
    lam = lam[symcalc.in_cone(lam, 3)[0]]
    for r, s in [(1, 0), (2, 0), (2, 1), (3, 1)]:
        assert symcalc.check_newton_maclaurin(lam, 3, 1, r, s).min() >= -1e-12


def test_cone_inequalities_at_ones():
    out = symcalc.check_cone_inequalities(np.ones(4), 3, 1)
    for name, v in out.items():
        assert v >= -1e-12, name


def test_projection_identity_case():
    cone, quot = symcalc.check_projection_inequality(np.eye(3), np.zeros(3), 2, 1)
    assert cone > 0
    assert quot == pytest.approx(0, abs=1e-14)
    with pytest.raises(DomainError):
        symcalc.check_projection_inequality(-np.eye(3), np.zeros(3), 2, 1)


def test_gamma_matrix_squares_to_projection():
    p = np.array([0.3, -1.2, 0.5])
    gam = symcalc.gamma_matrix(p)
    P = np.eye(3) - np.outer(p, p) / (1 + p @ p)
    np.testing.assert_allclose(gam @ gam, P, atol=1e-14)
