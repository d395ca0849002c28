"""Estimator-shaped wrapper around :func:`hessquot.solver.solve`.

``fit`` takes no data: the problem is fully described by the constructor
parameters.  ``predict`` evaluates the discrete solution at arbitrary points
by interpolation over the full lattice (boundary value 0 outside the domain).
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_odd_at_least, check_points, check_schedule
from .grid import DomainSpec, build_grid
from .pde_operator import OperatorSpec
from .psi import PsiModel, parse_psi
from .solver import DEFAULT_EPS_SCHEDULE, SolverConfig, solve


class HessianQuotientSolver(BaseEstimator):
    """Solve sigma_k/sigma_l(lambda(eta[M_u])) = psi with u = 0 on the boundary."""

    def __init__(self, n=2, k=1, l=0, shape="disc", size=1.0, m=33, psi="constant:1.0",
                 newton_tol=1e-8, max_iters=50, eps_schedule=DEFAULT_EPS_SCHEDULE,
                 cone_margin_floor=1e-12):
        self.n = n
        self.k = k
        self.l = l
        self.shape = shape
        self.size = size
        self.m = m
        self.psi = psi
        self.newton_tol = newton_tol
        self.max_iters = max_iters
        self.eps_schedule = eps_schedule
        self.cone_margin_floor = cone_margin_floor

    def _psi_model(self, spec):
        if isinstance(self.psi, PsiModel):
            return self.psi
        return parse_psi(self.psi, spec.power)

    def fit(self, X=None, y=None):
        spec = OperatorSpec(self.n, self.k, self.l)
        grid = build_grid(DomainSpec(self.shape, float(self.size), self.n), check_odd_at_least(self.m))
        cfg = SolverConfig(newton_tol=self.newton_tol, max_iters=self.max_iters,
                           eps_schedule=check_schedule(self.eps_schedule),
                           cone_margin_floor=self.cone_margin_floor)
        self.report_ = solve(grid, spec, self._psi_model(spec), cfg)
        self.grid_ = grid
        self.field_ = self.report_.field
        self.converged_ = self.report_.status == "ok"
        if self.field_ is not None:
            full = np.zeros(grid.m**grid.n)
            full[np.flatnonzero(grid.interior_mask_full())] = self.field_.values
            self._interp = RegularGridInterpolator(
                (grid.axis,) * grid.n, full.reshape((grid.m,) * grid.n), method="linear",
                bounds_error=False, fill_value=0.0)
        return self

    def predict(self, X):
        check_is_fitted(self, "report_")
        if self.field_ is None:
            raise RuntimeError("solve failed before any stage converged")
        X = check_points(X, self.n)
        out = self._interp(X)
        out[self.grid_.dom.distance(X) <= 0] = 0.0
        return out

    def score(self, X, y):
        """Negative sup-norm error against reference values ``y``."""
        return -float(np.abs(self.predict(X) - np.asarray(y, float)).max())
