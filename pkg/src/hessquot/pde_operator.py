"""The curvature operator G(D^2u, Du) = sigma_k/sigma_l(lambda(T(A))) and its linearization.

Here ``A = gamma D^2u gamma / w`` is the shape matrix and ``T(A) = tr(A) I - A``,
so the eigenvalues of ``T(A)`` are ``eta_map`` of the principal curvatures.
All ``operator_*`` functions are batched over leading axes of ``du``/``d2u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import symcalc
from .errors import ConeViolationError, ConfigError
from .hypersurface import GraphJet, shape_matrix, unit_normal


@dataclass(frozen=True)
class OperatorSpec:
    n: int
    k: int
    l: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("dimension n must be >= 2")
        if not 0 <= self.l < self.k < self.n:
            raise ConfigError(f"need 0 <= l < k < n, got n={self.n}, k={self.k}, l={self.l}")

    @property
    def power(self) -> int:
        return self.k - self.l


def operator_values(du, d2u, spec: OperatorSpec):
    """Return ``(G, margin)``; G is NaN where sigma_l(eta) <= 0."""
    a, _, _ = shape_matrix(du, d2u)
    kappa = np.linalg.eigvalsh(a)
    eta = symcalc.eta_map(kappa)
    tab = symcalc.sigma_table(eta, spec.k)
    margin = tab[..., 1:].min(axis=-1)
    sl = tab[..., spec.l]
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(sl > 0, tab[..., spec.k] / np.where(sl > 0, sl, 1.0), np.nan)
    return G, margin


class OperatorLinearization(NamedTuple):
    value: np.ndarray
    Gij: np.ndarray
    Gs: np.ndarray
    margin: np.ndarray
    kappa: np.ndarray
    f_kappa: np.ndarray


def operator_linearization(du, d2u, spec: OperatorSpec) -> OperatorLinearization:
    """G together with dG/dr_ij and dG/dp_s.

    ``Gij`` is the symmetric gradient with respect to the Hessian slot: for a
    symmetric perturbation E, dG = sum_ij Gij E_ij.  ``Gs`` uses the closed form
    ``-(p_s/w^2) sum f_i kappa_i - 2/(w(w+1)) [w gamma F a p + gamma a F p]_s``
    with ``F`` the spectral derivative of f(kappa) in the shape matrix.
    """
    du = np.asarray(du, float)
    a, gam, w = shape_matrix(du, d2u)
    kappa, Q = np.linalg.eigh(a)
    eta = symcalc.eta_map(kappa)
    n = kappa.shape[-1]
    margin = symcalc.cone_margin(eta, spec.k)
    if np.any(margin <= 0):
        raise ConeViolationError("jet outside the admissible cone", margin=float(np.min(margin)))
    jet = symcalc.quotient_jet(eta, spec.k, spec.l)
    f_kappa = jet.grad @ symcalc.eta_matrix(n)
    # spectral derivative: valid across repeated eigenvalues for symmetric f
    F_a = (Q * f_kappa[..., None, :]) @ np.swapaxes(Q, -1, -2)
    wx = w[..., None, None]
    Gij = gam @ F_a @ gam / wx
    Gij = 0.5 * (Gij + np.swapaxes(Gij, -1, -2))
    p = du
    fk = np.einsum("...i,...i->...", f_kappa, kappa)
    Fap = np.einsum("...ij,...jk,...k->...i", F_a, a, p)
    aFp = np.einsum("...ij,...jk,...k->...i", a, F_a, p)
    inner = w[..., None] * Fap + aFp
    Gs = (-p * (fk / w**2)[..., None]
          - (2.0 / (w * (w + 1.0)))[..., None] * np.einsum("...sj,...j->...s", gam, inner))
    return OperatorLinearization(jet.value, Gij, Gs, margin, kappa, f_kappa)


def operator_gs_fd(du, d2u, spec: OperatorSpec, step: float = 1e-5):
    """dG/dp_s by central differences (cross-check for the closed form)."""
    du = np.asarray(du, float)
    out = np.empty(du.shape)
    for s in range(du.shape[-1]):
        e = np.zeros(du.shape[-1])
        e[s] = step
        gp, _ = operator_values(du + e, d2u, spec)
        gm, _ = operator_values(du - e, d2u, spec)
        out[..., s] = (gp - gm) / (2 * step)
    return out


class LinearizationData(NamedTuple):
    G: float
    Gij: np.ndarray
    Gs: np.ndarray
    Gs_fd: np.ndarray
    psi: float
    psi_z: float
    psi_p: np.ndarray
    margin: float


def _check_admissible(jet: GraphJet, spec: OperatorSpec):
    G, margin = operator_values(jet.du, jet.d2u, spec)
    if not margin > symcalc.TOL_CONE:
        raise ConeViolationError("jet is not admissible", margin=float(margin))
    return float(G), float(margin)


def residual(jet: GraphJet, spec: OperatorSpec, psi) -> float:
    """G(D^2u, Du) - psi_eps(x, u, nu) at one point."""
    G, _ = _check_admissible(jet, spec)
    return G - float(psi.value(jet.x, jet.u, unit_normal(jet.du)))


def linearize(jet: GraphJet, spec: OperatorSpec, psi) -> LinearizationData:
    G, margin = _check_admissible(jet, spec)
    lin = operator_linearization(jet.du, jet.d2u, spec)
    nu = unit_normal(jet.du)
    return LinearizationData(
        G=G,
        Gij=lin.Gij,
        Gs=lin.Gs,
        Gs_fd=operator_gs_fd(jet.du, jet.d2u, spec),
        psi=float(psi.value(jet.x, jet.u, nu)),
        psi_z=float(psi.d_z(jet.x, jet.u, nu)),
        psi_p=psi.d_p(jet.x, jet.u, jet.du),
        margin=margin,
    )
