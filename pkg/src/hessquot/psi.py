"""Right-hand side models psi(x, z, nu) and their regularization.

A model is described by its root ``psi ** (1 / power)`` with ``power = k - l``;
the regularized value is ``(root + epsilon) ** power``.  Derivatives in ``z``
and along the unit sphere are taken numerically with step ``1e-6``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

KINDS = ("constant", "radial_bump", "normal_dependent", "manufactured")
FD_STEP = 1e-6


@dataclass(frozen=True)
class PsiModel:
    """Nonnegative right-hand side with regularization level ``epsilon``.

    kinds and params:

    - ``constant``: ``(c,)``, psi = c
    - ``radial_bump``: ``(amp, r0)``, root = amp * max(|x|^2 - r0^2, 0)^2,
      which is C^{1,1} and vanishes on the ball ``|x| <= r0``
    - ``normal_dependent``: ``(a, b, beta)``, psi = (a + b nu_{n+1}) exp(beta z)
    - ``manufactured``: tabulated values on a lattice (see :func:`manufactured_rhs`)
    """

    kind: str
    params: tuple = ()
    power: int = 1
    epsilon: float = 0.0
    table: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown psi kind {self.kind!r}; expected one of {KINDS}")
        if self.power < 1:
            raise ConfigError("power = k - l must be >= 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        p = self.params
        if self.kind == "constant":
            if len(p) != 1 or p[0] < 0:
                raise ConfigError("constant psi takes one nonnegative parameter")
        elif self.kind == "radial_bump":
            if len(p) != 2 or p[0] < 0 or p[1] < 0:
                raise ConfigError("radial_bump takes (amp >= 0, r0 >= 0)")
        elif self.kind == "normal_dependent":
            if len(p) == 2:
                p = p + (0.0,)
                object.__setattr__(self, "params", p)
            if len(p) != 3 or p[0] < 0 or p[0] + min(p[1], 0.0) < 0 or p[2] < 0:
                raise ConfigError("normal_dependent takes (a >= 0, b, beta >= 0) with a + min(b, 0) >= 0")
        elif self.table is None:
            raise ConfigError("manufactured psi needs a table; use manufactured_rhs")

    @property
    def depends_on_z(self) -> bool:
        return self.kind == "normal_dependent" and self.params[2] != 0.0

    @property
    def depends_on_nu(self) -> bool:
        return self.kind == "normal_dependent" and self.params[1] != 0.0

    def root(self, x, z, nu):
        """psi ** (1 / power) before regularization."""
        x = np.asarray(x, float)
        shape = x.shape[:-1]
        if self.kind == "constant":
            return np.full(shape, self.params[0] ** (1.0 / self.power))
        if self.kind == "radial_bump":
            amp, r0 = self.params
            s = np.maximum(np.einsum("...i,...i->...", x, x) - r0**2, 0.0)
            return amp * s**2
        if self.kind == "normal_dependent":
            a, b, beta = self.params
            nu = np.asarray(nu, float)
            val = (a + b * nu[..., -1]) * np.exp(beta * np.asarray(z, float))
            return np.maximum(val, 0.0) ** (1.0 / self.power)
        return _table_lookup(self.table, x) ** (1.0 / self.power)

    def value(self, x, z, nu):
        """Regularized psi_eps = (root + eps) ** power."""
        return (self.root(x, z, nu) + self.epsilon) ** self.power

    __call__ = value

    def d_z(self, x, z, nu):
        x = np.asarray(x, float)
        if not self.depends_on_z:
            return np.zeros(x.shape[:-1])
        z = np.asarray(z, float)
        return (self.value(x, z + FD_STEP, nu) - self.value(x, z - FD_STEP, nu)) / (2 * FD_STEP)

    def d_x(self, x, z, nu):
        x = np.asarray(x, float)
        out = np.empty(x.shape)
        for i in range(x.shape[-1]):
            e = np.zeros(x.shape[-1])
            e[i] = FD_STEP
            out[..., i] = (self.value(x + e, z, nu) - self.value(x - e, z, nu)) / (2 * FD_STEP)
        return out

    def d_nu(self, x, z, nu, direction):
        """Derivative along a tangent direction of the unit sphere at ``nu``."""
        x = np.asarray(x, float)
        if not self.depends_on_nu:
            return np.zeros(x.shape[:-1])
        nu = np.asarray(nu, float)
        plus = nu + FD_STEP * direction
        minus = nu - FD_STEP * direction
        plus /= np.linalg.norm(plus, axis=-1, keepdims=True)
        minus /= np.linalg.norm(minus, axis=-1, keepdims=True)
        return (self.value(x, z, plus) - self.value(x, z, minus)) / (2 * FD_STEP)

    def d_p(self, x, z, p):
        """Gradient of psi_eps(x, z, nu(p)) in the gradient slot ``p = Du``."""
        p = np.asarray(p, float)
        out = np.zeros(p.shape)
        if not self.depends_on_nu:
            return out
        n = p.shape[-1]
        w = np.sqrt(1.0 + np.einsum("...i,...i->...", p, p))[..., None]
        nu = np.concatenate([-p, np.ones(p.shape[:-1] + (1,))], axis=-1) / w
        for s in range(n):
            # d nu / d p_s, tangent to the sphere at nu
            e = np.zeros(n + 1)
            e[s] = -1.0
            tangent = e / w - nu * (p[..., s:s + 1] / w**2)
            out[..., s] = self.d_nu(x, z, nu, tangent)
        return out

    def to_text(self) -> str:
        return f"{self.kind}:" + ",".join(repr(p) for p in self.params)


def regularize(psi: PsiModel, eps: float) -> PsiModel:
    """Return the model with psi_eps = (psi^(1/(k-l)) + eps)^(k-l)."""
    if eps < 0:
        raise ConfigError("eps must be >= 0")
    return dataclasses.replace(psi, epsilon=float(eps))


def parse_psi(text: str, power: int) -> PsiModel:
    """Parse ``KIND:p1,p2,...`` as used by config files and the CLI."""
    kind, _, rest = text.strip().partition(":")
    params = tuple(float(v) for v in rest.split(",") if v.strip()) if rest else ()
    if kind == "manufactured":
        raise ConfigError("manufactured psi is built from an exact solution, not parsed")
    return PsiModel(kind, params, power=power)


def _table_lookup(table, x):
    axes, values = table
    x = np.asarray(x, float)
    h = axes[0][1] - axes[0][0]
    frac = (x - np.array([a[0] for a in axes])) / h
    idx = np.rint(frac)
    if np.all(np.abs(frac - idx) < 1e-9):
        idx = idx.astype(int)
        m = values.shape[0]
        if np.all((idx >= 0) & (idx < m)):
            return values[tuple(np.moveaxis(idx, -1, 0))]
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator(axes, values, method="cubic", bounds_error=False, fill_value=None)
    return np.maximum(interp(x), 0.0)


def manufactured_rhs(u_exact, spec, grid) -> PsiModel:
    """psi := G(D^2 u_exact, Du_exact) tabulated on the lattice of ``grid``.

    Raises ``ConfigError`` listing interior nodes where the exact jet is not
    admissible.
    """
    from .pde_operator import operator_values

    pts = grid.lattice_points()
    du = u_exact.gradient(pts)
    d2u = u_exact.hessian(pts)
    G, margin = operator_values(du, d2u, spec)
    ok = margin > 1e-12
    interior = grid.interior_mask_full()
    bad = interior & ~ok
    if np.any(bad):
        where = pts[bad][:5]
        raise ConfigError(f"exact solution not admissible at {int(bad.sum())} interior nodes, e.g. {where.tolist()}")
    values = np.where(ok, G, 0.0)
    shape = (grid.m,) * grid.n
    table = (tuple(grid.axis.copy() for _ in range(grid.n)), values.reshape(shape))
    return PsiModel("manufactured", (), power=spec.k - spec.l, table=table)
