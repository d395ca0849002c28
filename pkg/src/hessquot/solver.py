"""Damped Newton with an admissibility-preserving line search and eps-continuation."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, StageFailure, SubsolutionError
from .grid import Field, Grid, discrete_norms
from .hypersurface import unit_normal
from .pde_operator import OperatorSpec, operator_linearization, operator_values
from .psi import PsiModel, regularize

log = logging.getLogger(__name__)

DEFAULT_EPS_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 0.0)


@dataclass
class SolverConfig:
    newton_tol: float = 1e-8
    max_iters: int = 50
    damping: float = 0.5
    max_halvings: int = 30
    eps_schedule: tuple = DEFAULT_EPS_SCHEDULE
    cone_margin_floor: float = 1e-12
    uniqueness_probe: bool = False

    def __post_init__(self):
        self.eps_schedule = tuple(float(e) for e in self.eps_schedule)
        eps = np.asarray(self.eps_schedule)
        if eps.size == 0 or np.any(eps < 0) or np.any(np.diff(eps) >= 0):
            raise ConfigError("eps_schedule must be nonnegative and strictly decreasing")
        if not 0 < self.damping < 1:
            raise ConfigError("damping must lie in (0, 1)")
        if self.newton_tol <= 0 or self.max_iters < 1:
            raise ConfigError("newton_tol must be positive and max_iters >= 1")


def discrete_residual(grid: Grid, values, spec: OperatorSpec, psi: PsiModel):
    """Nodal residual ``G_h(u) - psi_eps`` and the cone margin per node."""
    du, d2u = grid.jets(values)
    G, margin = operator_values(du, d2u, spec)
    rhs = psi.value(grid.points, values, unit_normal(du))
    return G - rhs, margin


def jacobian(grid: Grid, values, spec: OperatorSpec, psi: PsiModel):
    """Sparse Jacobian of the discrete residual (first-order linearization)."""
    du, d2u = grid.jets(values)
    lin = operator_linearization(du, d2u, spec)
    n = grid.n
    J = sp.csr_matrix((grid.size, grid.size))
    for (i, j), D in grid.D2.items():
        coef = lin.Gij[:, i, j] if i == j else 2.0 * lin.Gij[:, i, j]
        J = J + sp.diags(coef) @ D
    psi_p = psi.d_p(grid.points, values, du)
    for s in range(n):
        J = J + sp.diags(lin.Gs[:, s] - psi_p[:, s]) @ grid.D1[s]
    psi_z = psi.d_z(grid.points, values, unit_normal(du))
    if np.any(psi_z != 0):
        J = J - sp.diags(psi_z)
    return J.tocsc()


@dataclass
class SubsolutionField:
    field: Field
    scale: float
    family: str
    min_residual: float
    min_margin: float


def _subsolution_family(grid: Grid):
    dom = grid.dom
    x = grid.points
    # ball through the corners for squares; interior values then sit below
    # the zero boundary, which only adds convexity at the edge stencils
    rho = dom.size if dom.shape == "disc" else dom.size * np.sqrt(grid.n)
    family = "cap" if dom.shape == "disc" else "circumscribed_cap"

    def make(t):
        # spherical cap of curvature t / rho; t -> 0 recovers a paraboloid
        c = t / rho
        return (np.sqrt(1.0 - (c * rho) ** 2) - np.sqrt(1.0 - c * c * (x**2).sum(axis=1))) / c

    return family, make, 1e-9, 0.999


def builtin_subsolution(grid: Grid, spec: OperatorSpec, psi: PsiModel, floor: float = 1e-12,
                        bisection_steps: int = 60, scan_points: int = 40) -> SubsolutionField:
    """Smallest member of a one-parameter convex family that is a discrete subsolution.

    The family is a spherical cap (a paraboloid in the small-curvature limit)
    cut at the disc boundary, or at the ball through the corners of a square.  ``psi`` should be the most regularized model of the run.
    """
    family, make, t_lo, t_hi = _subsolution_family(grid)

    def feasible(t):
        u = make(t)
        r, margin = discrete_residual(grid, u, spec, psi)
        return bool(np.all(margin > floor) and np.all(r >= 0.0)), u, r, margin

    ok_lo, u_lo, r_lo, m_lo = feasible(t_lo)
    if ok_lo:
        return SubsolutionField(Field(grid, u_lo), t_lo, family, float(r_lo.min()), float(m_lo.min()))
    # steep members can fail on the grid, so feasibility is not monotone up to
    # t_hi: scan coarsely for the first feasible scale, then bisect below it
    scan = np.linspace(t_hi / scan_points, t_hi, scan_points)
    lo, hi = t_lo, None
    best = -np.inf
    for t in scan:
        ok, _, r, margin = feasible(t)
        if ok:
            hi = t
            break
        best = max(best, float(np.nanmin(np.where(margin > floor, r, -np.inf))))
        lo = t
    if hi is None:
        raise SubsolutionError(
            f"no admissible subsolution in the {family} family up to scale {t_hi} "
            f"(best min residual {best:.3g}); try a smaller domain or a smaller psi"
        )
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        if feasible(mid)[0]:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    ok, u, r, margin = feasible(hi)
    return SubsolutionField(Field(grid, u), hi, family, float(r.min()), float(margin.min()))


def newton_stage(u0: Field, spec: OperatorSpec, psi_eps: PsiModel, cfg: SolverConfig):
    """Run damped Newton from ``u0``; returns ``(Field, residual_history, steps)``.

    Raises :class:`StageFailure` on a line-search stall, a singular linear
    system, or when ``max_iters`` is reached.
    """
    grid = u0.grid
    u = u0.values.copy()
    r, margin = discrete_residual(grid, u, spec, psi_eps)
    if not np.all(margin >= cfg.cone_margin_floor):
        raise StageFailure("starting field is not admissible", {"min_margin": float(np.min(margin))})
    rn = float(np.abs(r).max())
    history = [rn]
    steps = []
    for it in range(cfg.max_iters + 1):
        if rn < cfg.newton_tol:
            return Field(grid, u), history, steps
        if it == cfg.max_iters:
            break
        J = jacobian(grid, u, spec, psi_eps)
        try:
            delta = spla.spsolve(J, -r)
        except RuntimeError as exc:  # singular factor
            raise StageFailure(f"linear solve failed: {exc}", {"history": history}) from exc
        if not np.all(np.isfinite(delta)):
            raise StageFailure("linear solve produced non-finite update", {"history": history})
        s = 1.0
        for _ in range(cfg.max_halvings + 1):
            trial = u + s * delta
            r_t, m_t = discrete_residual(grid, trial, spec, psi_eps)
            # admissibility first, then decrease
            if np.all(m_t >= cfg.cone_margin_floor):
                rn_t = float(np.abs(r_t).max())
                if rn_t < rn:
                    break
            s *= cfg.damping
        else:
            raise StageFailure(
                "line search stalled",
                {"history": history, "min_margin": float(np.min(margin)), "field": u},
            )
        u, r, margin, rn = trial, r_t, m_t, rn_t
        history.append(rn)
        steps.append(s)
    raise StageFailure(f"no convergence in {cfg.max_iters} iterations",
                       {"history": history, "field": u})


def monitor_triples(f: Field, band_width: float | None = None) -> dict:
    g = f.grid
    near = g.band_mask(band_width)
    return {
        "all": discrete_norms(f),
        "interior": discrete_norms(f, ~near),
        "near_boundary": discrete_norms(f, near),
    }


@dataclass
class StageRecord:
    eps: float
    converged: bool
    iterations: int
    residual_history: list
    step_sizes: list
    monitors: dict | None = None
    min_margin: float | None = None
    ordering_lower: float | None = None
    ordering_upper: float | None = None
    message: str = ""


@dataclass
class SolveReport:
    field: Field | None
    subsolution: SubsolutionField
    stages: list = field(default_factory=list)
    status: str = "ok"
    final_eps: float | None = None
    final_residual: float | None = None
    wall_time: float = 0.0
    uniqueness: dict | None = None

    @property
    def u(self):
        return None if self.field is None else self.field.values

    def to_dict(self) -> dict:
        g = self.subsolution.field.grid
        stages = []
        for st in self.stages:
            stages.append({
                "eps": st.eps,
                "converged": st.converged,
                "iterations": st.iterations,
                "residual_history": [float(v) for v in st.residual_history],
                "step_sizes": [float(v) for v in st.step_sizes],
                "monitors": None if st.monitors is None else {k: list(v) for k, v in st.monitors.items()},
                "min_margin": st.min_margin,
                "ordering_lower_violation": st.ordering_lower,
                "ordering_upper_violation": st.ordering_upper,
                "message": st.message,
            })
        return {
            "status": self.status,
            "grid": {"shape": g.dom.shape, "size": g.dom.size, "n": g.n, "m": g.m, "h": g.h, "nodes": g.size},
            "subsolution": {"family": self.subsolution.family, "scale": self.subsolution.scale,
                            "min_residual": self.subsolution.min_residual,
                            "min_margin": self.subsolution.min_margin},
            "final_eps": self.final_eps,
            "final_residual": self.final_residual,
            "stages": stages,
            "uniqueness": self.uniqueness,
            "wall_time": self.wall_time,
        }


def _run_schedule(start: Field, spec, psi, cfg, sub: Field | None):
    stages = []
    current = start
    last_ok = None
    last_eps = None
    status = "ok"
    for eps in cfg.eps_schedule:
        psi_eps = regularize(psi, eps)
        try:
            f, hist, steps = newton_stage(current, spec, psi_eps, cfg)
        except StageFailure as exc:
            hist = exc.diagnostics.get("history", [])
            stages.append(StageRecord(eps, False, max(len(hist) - 1, 0), hist, [], message=str(exc)))
            log.info("stage eps=%g failed: %s", eps, exc)
            if eps != 0.0:
                status = "failed"
            break
        r, margin = discrete_residual(f.grid, f.values, spec, psi_eps)
        rec = StageRecord(eps, True, len(hist) - 1, hist, steps,
                          monitors=monitor_triples(f), min_margin=float(margin.min()))
        if sub is not None:
            rec.ordering_lower = float(max(np.max(sub.values - f.values), 0.0))
        rec.ordering_upper = float(max(np.max(f.values), 0.0))
        stages.append(rec)
        current = f
        last_ok = f
        last_eps = eps
    return last_ok, last_eps, stages, status


def solve(grid: Grid, spec: OperatorSpec, psi: PsiModel, cfg: SolverConfig | None = None,
          subsolution: SubsolutionField | None = None) -> SolveReport:
    """Continuation over ``cfg.eps_schedule`` starting from an admissible subsolution.

    A failing ``eps = 0`` stage is tolerated: the last positive-eps field is
    then reported.  Any earlier failure yields ``status == "failed"`` with the
    last converged stage as the field.
    """
    cfg = cfg or SolverConfig()
    if psi.power != spec.power:
        raise ConfigError(f"psi power {psi.power} does not match k - l = {spec.power}")
    t0 = time.perf_counter()
    if subsolution is None:
        subsolution = builtin_subsolution(grid, spec, regularize(psi, cfg.eps_schedule[0]),
                                          floor=cfg.cone_margin_floor)
    final, final_eps, stages, status = _run_schedule(subsolution.field, spec, psi, cfg, subsolution.field)
    if final is None:
        status = "failed"
    report = SolveReport(final, subsolution, stages, status, final_eps)
    if final is not None:
        r, _ = discrete_residual(grid, final.values, spec, regularize(psi, final_eps))
        report.final_residual = float(np.abs(r).max())
    if cfg.uniqueness_probe and final is not None:
        report.uniqueness = uniqueness_probe(subsolution, spec, psi, cfg, final, final_eps)
    report.wall_time = time.perf_counter() - t0
    return report


def uniqueness_probe(sub: SubsolutionField, spec, psi, cfg, reference: Field, ref_eps) -> dict:
    """Re-solve from the 0.5-blend of the subsolution toward 0 and compare."""
    grid = sub.field.grid
    start = Field(grid, 0.5 * sub.field.values)
    _, margin = discrete_residual(grid, start.values, spec, regularize(psi, cfg.eps_schedule[0]))
    if not np.all(margin >= cfg.cone_margin_floor):
        return {"performed": False, "reason": "blended start not admissible"}
    other, eps, _, status = _run_schedule(start, spec, psi, cfg, None)
    if other is None or eps != ref_eps:
        return {"performed": True, "agreed": False, "reason": f"second run ended at eps={eps} ({status})"}
    diff = float(np.abs(other.values - reference.values).max())
    return {"performed": True, "sup_difference": diff, "agreed": diff <= 10 * cfg.newton_tol}
