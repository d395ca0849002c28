"""Boundary barrier construction on a disc/ball, checked node by node.

Coordinates are boundary-adapted: the chosen boundary point is the origin and
the positive last axis points along the interior normal, so the domain is the
ball of radius ``rho`` centred at ``rho * e_n`` and the boundary near the
origin is the graph ``x_n = rho(x') = rho - sqrt(rho^2 - |x'|^2)``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import symcalc
from ..errors import ConfigError
from ..grid import DomainSpec
from ..pde_operator import OperatorSpec

TOL = 1e-10


@dataclass
class BarrierParams:
    theta: float
    K: float
    eta0: float
    delta: float
    t: float = 0.0
    N: float = 1.0
    b: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        for name in ("theta", "K", "eta0", "delta"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"barrier parameter {name} must be positive")
        if self.t <= 0:
            # smallest t compatible with delta <= 2 t / N
            self.t = 0.5 * self.N * self.delta


def boundary_height(xp, rho: float):
    r2 = np.einsum("...i,...i->...", xp, xp)
    return rho - np.sqrt(rho**2 - r2)


def boundary_height_hessian(xp, rho: float):
    xp = np.asarray(xp, float)
    s = rho**2 - np.einsum("...i,...i->...", xp, xp)
    m = xp.shape[-1]
    return (np.eye(m) / np.sqrt(s)[..., None, None]
            + xp[..., :, None] * xp[..., None, :] / (s**1.5)[..., None, None])


def barrier_v(x, theta: float, K: float, rho: float):
    """v = rho(x') - x_n - theta |x'|^2 + K x_n^2."""
    x = np.asarray(x, float)
    xp, xn = x[..., :-1], x[..., -1]
    return boundary_height(xp, rho) - xn - theta * np.einsum("...i,...i->...", xp, xp) + K * xn**2


def barrier_v_hessian(x, theta: float, K: float, rho: float):
    x = np.asarray(x, float)
    n = x.shape[-1]
    H = np.zeros(x.shape[:-1] + (n, n))
    H[..., :-1, :-1] = boundary_height_hessian(x[..., :-1], rho) - 2.0 * theta * np.eye(n - 1)
    H[..., -1, -1] = 2.0 * K
    return H


def distance_to_boundary(x, rho: float):
    x = np.asarray(x, float)
    c = np.zeros(x.shape[-1])
    c[-1] = rho
    return rho - np.linalg.norm(x - c, axis=-1)


def barrier_psi(x, p: BarrierParams, rho: float):
    """Psi = v - t d + (N/2) d^2."""
    d = distance_to_boundary(x, rho)
    return barrier_v(x, p.theta, p.K, rho) - p.t * d + 0.5 * p.N * d**2


def tangential_function(du, xp, rho: float, alpha: int):
    """W = u_alpha + rho_alpha u_n - (1/2) sum_{beta < n} u_beta^2."""
    du = np.asarray(du, float)
    xp = np.asarray(xp, float)
    rho_alpha = xp[..., alpha] / np.sqrt(rho**2 - np.einsum("...i,...i->...", xp, xp))
    return du[..., alpha] + rho_alpha * du[..., -1] - 0.5 * (du[..., :-1] ** 2).sum(axis=-1)


def w_tilde(W, b: float):
    return 1.0 - np.exp(-b * np.asarray(W, float))


def barrier_phi(x, du, p: BarrierParams, rho: float, alpha: int = 0):
    """Phi = R Psi - (1 - exp(-b W))."""
    x = np.asarray(x, float)
    W = tangential_function(du, x[..., :-1], rho, alpha)
    return p.R * barrier_psi(x, p, rho) - w_tilde(W, p.b)


def domain_condition(n: int, k: int, kappa_b: float, theta: float, K: float):
    """(kappa_b - 3 theta, ..., kappa_b - 3 theta, 2K) and its Gamma_{k+1} margin."""
    vec = np.array([kappa_b - 3.0 * theta] * (n - 1) + [2.0 * K])
    ok, margin = symcalc.in_cone(vec, k + 1)
    return ok, margin


def collar_nodes(n: int, rho: float, delta: float, m: int = 21, m_phi: int = 24):
    """Nodes of the closed collar and boolean masks of its three boundary parts."""
    s = np.linspace(0.0, 1.0, m)
    if n == 2:
        xp = np.linspace(-delta, delta, m)[:, None]
    else:
        r = np.linspace(0.0, delta, m)
        phi = np.linspace(0.0, 2 * np.pi, m_phi, endpoint=False)
        pts = [np.zeros(2)] + [ri * np.array([np.cos(f), np.sin(f)]) for ri in r[1:] for f in phi]
        xp = np.array(pts)
    base = boundary_height(xp, rho)
    X = []
    part1, part2, part3 = [], [], []
    on_rim = np.isclose(np.linalg.norm(xp, axis=1), delta, rtol=0, atol=1e-14 + 1e-12 * delta)
    for j, xpj in enumerate(xp):
        for si in s:
            X.append(np.concatenate([xpj, [base[j] + si * delta**2]]))
            part1.append(si == 0.0)
            part2.append(si == 1.0)
            part3.append(bool(on_rim[j]))
    return np.array(X), np.array(part1), np.array(part2), np.array(part3)


@dataclass
class BarrierReport:
    params: dict
    rho: float
    n: int
    k: int
    l: int
    families: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(f["passed"] for f in self.families.values())

    def to_dict(self) -> dict:
        return {"params": self.params, "rho": self.rho, "n": self.n, "k": self.k, "l": self.l,
                "passed": self.passed, "families": self.families, "violations": self.violations[:20]}


def _family(report, name, slack, X, strict=False):
    slack = np.asarray(slack, float)
    worst = float(slack.min()) if slack.size else np.inf
    ok = worst > 0 if strict else worst >= -TOL
    report.families[name] = {"passed": bool(ok), "worst_slack": worst, "nodes": int(slack.size)}
    if not ok:
        bad = np.flatnonzero(slack < (0 if strict else -TOL))
        for i in bad[:5]:
            report.violations.append({"family": name, "node": X[i].tolist(), "slack": float(slack[i])})


def barrier_check(dom: DomainSpec, spec: OperatorSpec, params: BarrierParams, m: int = 21,
                  p_samples: int = 16, seed: int = 0) -> BarrierReport:
    """Check the collar bounds, the shifted-Hessian cone condition and the projected cone condition."""
    if dom.shape != "disc":
        raise ConfigError("barrier_check needs a disc/ball domain")
    n, k, l = dom.n, spec.k, spec.l
    rho = dom.size
    kappa_b = 1.0 / rho
    ok, margin = domain_condition(n, k, kappa_b, params.theta, params.K)
    if not ok:
        raise ConfigError(
            f"(kappa_b - 3 theta, ..., 2K) not in Gamma_{k + 1} (margin {margin:.3g}); "
            f"need theta < kappa_b / 3 = {kappa_b / 3:.4g} or a larger K")
    if not params.delta < rho:
        raise ConfigError("collar width delta must be smaller than the radius")
    X, p1, p2, p3 = collar_nodes(n, rho, params.delta, m)
    report = BarrierReport(asdict(params), rho, n, k, l)
    th, d = params.theta, params.delta
    v = barrier_v(X, th, params.K, rho)
    xp2 = (X[:, :-1] ** 2).sum(axis=1)
    _family(report, "collar_bound_lower", (-0.5 * th * xp2 - v)[p1], X[p1])
    _family(report, "collar_bound_upper", (-0.5 * d * d - v)[p2], X[p2])
    _family(report, "collar_bound_side", (-0.5 * th * d * d - v)[p3], X[p3])

    r = barrier_v_hessian(X, th, params.K, rho) - 2.0 * params.eta0 * np.eye(n)
    lam = np.linalg.eigvalsh(r)
    scale = np.maximum(np.abs(lam).max(axis=1), 1.0)
    shifted = np.min([symcalc.sigma(i, lam) / scale**i for i in range(1, k + 2)], axis=0)
    _family(report, "shifted_hessian_cone", shifted, X, strict=True)

    if np.all(shifted > 0):
        rng = np.random.default_rng(seed)
        ps = rng.standard_normal((p_samples, n)) * rng.uniform(0.0, 3.0, size=(p_samples, 1))
        ps[0] = 0.0
        rr = np.repeat(r, p_samples, axis=0)
        pp = np.tile(ps, (len(X), 1))
        cone, quot = symcalc.check_projection_inequality(rr, pp, k, l)
        XX = np.repeat(X, p_samples, axis=0)
        _family(report, "projected_cone", cone, XX, strict=True)
        _family(report, "projected_quotient", quot, XX)
    else:
        report.families["projected_cone"] = {"passed": False, "worst_slack": None, "nodes": 0}

    dist = distance_to_boundary(X, rho)
    _family(report, "distance_term", -(-params.t * dist + 0.5 * params.N * dist**2), X)
    bd = p1 | p2 | p3
    _family(report, "barrier_nonpositive_on_boundary", -barrier_psi(X[bd], params, rho), X[bd])
    return report


def search_barrier_params(dom: DomainSpec, spec: OperatorSpec, m: int = 21, max_halvings: int = 40,
                          N: float = 1.0, b: float = 1.0, R: float = 1.0) -> tuple[BarrierParams, BarrierReport]:
    """Find (theta, K, eta0, delta) passing :func:`barrier_check` by halving/doubling."""
    if dom.shape != "disc":
        raise ConfigError("barrier search needs a disc/ball domain")
    n, k = dom.n, spec.k
    kappa_b = 1.0 / dom.size
    theta = kappa_b / 6.0
    for _ in range(max_halvings):
        K = 0.5
        for _ in range(60):
            if domain_condition(n, k, kappa_b, theta, K)[0]:
                break
            K *= 2.0
        if domain_condition(n, k, kappa_b, theta, K)[0]:
            break
        theta *= 0.5
    else:
        raise ConfigError("no (theta, K) satisfies the domain condition")
    delta = 0.5 * dom.size
    last = None
    for _ in range(max_halvings):
        eta0 = theta / 2.0
        for _ in range(max_halvings):
            params = BarrierParams(theta, K, eta0, delta, N=N, b=b, R=R)
            report = barrier_check(dom, spec, params, m)
            last = (params, report)
            if report.families["shifted_hessian_cone"]["passed"]:
                break
            eta0 *= 0.5
        if report.passed:
            return params, report
        delta *= 0.5
    return last
