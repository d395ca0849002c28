import numpy as np
import pytest

from hessquot.errors import ConfigError
from hessquot.expressions import SphericalCap
from hessquot.grid import (DomainSpec, Field, build_grid, discrete_norms, jet_at, read_field_csv,
                           write_field_csv)


@pytest.fixture(scope="module")
def disc2():
    return build_grid(DomainSpec("disc", 1.0, 2), 17)


def test_counts():
    assert build_grid(DomainSpec("square", 1.0, 2), 5).size == 9
    assert build_grid(DomainSpec("square", 1.0, 3), 5).size == 27
    assert build_grid(DomainSpec("disc", 1.0, 2), 5).size == 9
    g = build_grid(DomainSpec("disc", 2.0, 2), 9)
    assert g.h == pytest.approx(0.5)
    assert np.all(np.linalg.norm(g.points, axis=1) < 2.0)


def test_bad_inputs():
    for m in (3, 6):
        with pytest.raises(ConfigError):
            build_grid(DomainSpec("disc", 1.0, 2), m)
    with pytest.raises(ConfigError):
        DomainSpec("annulus", 1.0, 2)
    with pytest.raises(ConfigError):
        DomainSpec("disc", 1.0, 4)
    with pytest.raises(ConfigError):
        Field(build_grid(DomainSpec("disc", 1.0, 2), 5), np.zeros(3))


def test_quadratics_exact(disc2):
    # fields carry an implicit zero boundary, so only stencils that stay
    # clear of it see a plain quadratic
    x = disc2.points
    far = disc2.distance > 2.5 * disc2.h
    du, d2u = disc2.jets(x[:, 0] ** 2)
    du, d2u, x = du[far], d2u[far], x[far]
    np.testing.assert_allclose(d2u[:, 0, 0], 2.0, atol=1e-9)
    np.testing.assert_allclose(d2u[:, 0, 1], 0.0, atol=1e-9)
    np.testing.assert_allclose(du[:, 0], 2 * x[:, 0], atol=1e-9)
    du, d2u = disc2.jets(disc2.points[:, 0] * disc2.points[:, 1])
    du, d2u = du[far], d2u[far]
    np.testing.assert_allclose(d2u[:, 0, 1], 1.0, atol=1e-9)
    np.testing.assert_allclose(d2u[:, 1, 1], 0.0, atol=1e-9)


def test_exact_on_zero_boundary_quadratic():
    # the Dirichlet value 0 is exact for |x|^2 - 1 on the unit ball
    g = build_grid(DomainSpec("disc", 1.0, 3), 9)
    v = (g.points**2).sum(axis=1) - 1.0
    du, d2u = g.jets(v)
    np.testing.assert_allclose(d2u, np.broadcast_to(2 * np.eye(3), d2u.shape), atol=1e-9)
    np.testing.assert_allclose(du, 2 * g.points, atol=1e-9)
    assert g.shortley_weller.any()


def test_second_order_refinement():
    errs = []
    for m in (17, 33, 65):
        g = build_grid(DomainSpec("square", 1.0, 2), m)
        _, d2u = g.jets(np.sin(g.points[:, 0]))
        far = g.distance > 0.25
        errs.append(np.abs(d2u[:, 0, 0] + np.sin(g.points[:, 0]))[far].max())
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    assert 3.5 < r1 < 4.5 and 3.5 < r2 < 4.5


def test_cap_refinement_with_curved_boundary():
    cap = SphericalCap(1.0, 0.8)
    errs = []
    for m in (33, 65):
        g = build_grid(DomainSpec("disc", 0.8, 2), m)
        _, d2u = g.jets(cap.value(g.points))
        far = g.distance > 0.2
        errs.append(np.abs(d2u - cap.hessian(g.points))[far].max())
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_reflection_symmetry(disc2):
    pts = {tuple(np.round(p, 12)) for p in disc2.points}
    assert pts == {tuple(np.round(p * [-1, 1], 12)) for p in disc2.points}
    assert pts == {tuple(np.round(p[::-1], 12)) for p in disc2.points}


def test_jet_at_matches_batched(disc2):
    f = Field.from_function(disc2, lambda x: np.cos(x[:, 0]) * x[:, 1])
    du, d2u = disc2.jets(f.values)
    j = jet_at(f, 7)
    np.testing.assert_allclose(j.du, du[7])
    np.testing.assert_allclose(j.d2u, d2u[7])
    assert disc2.points[disc2.center_node] == pytest.approx([0, 0])


def test_norms(disc2):
    assert discrete_norms(Field(disc2, np.zeros(disc2.size))) == (0.0, 0.0, 0.0)
    bump = 1 - (disc2.points**2).sum(axis=1)
    a = np.array(discrete_norms(Field(disc2, bump)))
    b = np.array(discrete_norms(Field(disc2, 3 * bump)))
    assert np.all(a > 0)
    np.testing.assert_allclose(b, 3 * a)
    # Frobenius norm of 2I in 2D
    assert a[2] == pytest.approx(2 * np.sqrt(2), rel=1e-9)
    assert discrete_norms(Field(disc2, bump), np.zeros(disc2.size, bool)) == (0.0, 0.0, 0.0)


def test_band(disc2):
    band = disc2.band_mask()
    assert band.any() and not band.all()
    assert np.all(disc2.distance[band] < 3 * disc2.h)


def test_csv_round_trip(tmp_path, disc2):
    f = Field.from_function(disc2, lambda x: (x**2).sum(axis=1) - 1)
    path = tmp_path / "u.csv"
    write_field_csv(path, f, 1, 0)
    meta, idx, pts, vals = read_field_csv(path)
    assert meta["n"] == "2" and meta["m"] == "17" and meta["shape"] == "disc"
    assert float(meta["h"]) == disc2.h
    nb = len(disc2.boundary_lattice_points()[0])
    assert len(vals) == disc2.size + nb
    assert np.all(np.diff(idx[:, 0]) >= 0)
    lookup = {tuple(i): v for i, v in zip(idx, vals)}
    for i, v in zip(disc2.index, f.values):
        assert lookup[tuple(i)] == v
    on_b = np.isclose(np.linalg.norm(pts, axis=1), 1.0)
    np.testing.assert_array_equal(vals[on_b], 0.0)
