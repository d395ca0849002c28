"""Pointwise geometry of a graph hypersurface ``x -> (x, u(x))``.

The upward unit normal ``(-Du, 1) / sqrt(1 + |Du|^2)`` is used throughout, so
the graph of a lower hemisphere of radius R has all principal curvatures equal
to ``+1/R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import symcalc
from .errors import DomainError


@dataclass(frozen=True)
class GraphJet:
    """Second-order jet ``(x, u, Du, D^2u)`` of the height function at a point."""

    x: np.ndarray
    u: float
    du: np.ndarray
    d2u: np.ndarray

    def __post_init__(self):
        du = np.asarray(self.du, float)
        d2u = np.asarray(self.d2u, float)
        x = np.zeros_like(du) if self.x is None else np.asarray(self.x, float)
        n = du.shape[-1]
        if d2u.shape != (n, n) or x.shape != (n,):
            raise DomainError(f"inconsistent jet shapes: x{x.shape}, du{du.shape}, d2u{d2u.shape}")
        if not (np.all(np.isfinite(du)) and np.all(np.isfinite(d2u)) and np.isfinite(self.u)):
            raise DomainError("non-finite entry in jet")
        if not np.allclose(d2u, d2u.T, rtol=0, atol=1e-12 * max(1.0, np.abs(d2u).max())):
            raise DomainError("d2u is not symmetric")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "du", du)
        object.__setattr__(self, "d2u", 0.5 * (d2u + d2u.T))
        object.__setattr__(self, "u", float(self.u))

    @property
    def n(self) -> int:
        return self.du.shape[0]


@dataclass(frozen=True)
class SurfaceData:
    omega: float
    nu: np.ndarray
    g: np.ndarray
    gamma_up: np.ndarray
    gamma_down: np.ndarray
    shape: np.ndarray
    kappa: np.ndarray
    H: float
    eta_eigs: np.ndarray
    frame: np.ndarray = field(repr=False)


def omega(du) -> np.ndarray:
    du = np.asarray(du, float)
    return np.sqrt(1.0 + np.einsum("...i,...i->...", du, du))


def unit_normal(du) -> np.ndarray:
    du = np.asarray(du, float)
    w = omega(du)[..., None]
    return np.concatenate([-du, np.ones(du.shape[:-1] + (1,))], axis=-1) / w


def gamma_down(du) -> np.ndarray:
    """gamma_{ij} = delta_ij + u_i u_j / (1 + w), the square root of g."""
    du = np.asarray(du, float)
    w = omega(du)
    n = du.shape[-1]
    return np.eye(n) + du[..., :, None] * du[..., None, :] / (1.0 + w)[..., None, None]


def shape_matrix(du, d2u):
    """a_ij = gamma^{ik} u_kl gamma^{lj} / w.  Returns ``(a, gamma_up, w)``."""
    du = np.asarray(du, float)
    d2u = np.asarray(d2u, float)
    w = omega(du)
    gam = symcalc.gamma_matrix(du)
    a = gam @ d2u @ gam / w[..., None, None]
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    return a, gam, w


def principal_curvatures(du, d2u, with_frame: bool = False):
    """Ascending principal curvatures (batched); optionally the eigenframe."""
    a, _, _ = shape_matrix(du, d2u)
    if with_frame:
        return np.linalg.eigh(a)
    return np.linalg.eigvalsh(a)


def surface_data(jet: GraphJet) -> SurfaceData:
    du, d2u = jet.du, jet.d2u
    n = jet.n
    a, gam, w = shape_matrix(du, d2u)
    kappa, frame = np.linalg.eigh(a)
    return SurfaceData(
        omega=float(w),
        nu=unit_normal(du),
        g=np.eye(n) + np.outer(du, du),
        gamma_up=gam,
        gamma_down=gamma_down(du),
        shape=a,
        kappa=kappa,
        H=float(np.sort(kappa).sum()),
        eta_eigs=np.sort(symcalc.eta_map(kappa)),
        frame=frame,
    )


def admissible(jet: GraphJet, k: int):
    """``(is_admissible, margin)`` for the eta-cone of order ``k``."""
    sd = surface_data(jet)
    return symcalc.in_cone(sd.kappa, k, "gamma_tilde")
