"""Elementary symmetric functions, Hessian quotients and Garding cones.

Every function accepts either a single vector of shape ``(n,)`` or a batch of
shape ``(..., n)`` and broadcasts over the leading axes.  Entries are sorted
ascending before any reduction so results are bit-identical under
permutations of the input.
"""
from __future__ import annotations

from math import comb
from typing import NamedTuple

import numpy as np

from .errors import ConeViolationError, DomainError

TOL_CONE = 1e-12


def _as_lambda(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0 or lam.shape[-1] < 1:
        raise DomainError("expected a vector (or batch of vectors) of reals")
    if not np.all(np.isfinite(lam)):
        raise DomainError("non-finite entry in eigenvalue vector")
    return lam


def _sigma_dp(lam_sorted: np.ndarray, kmax: int) -> np.ndarray:
    """sigma_0..sigma_kmax by the one-entry-at-a-time recurrence."""
    shape = lam_sorted.shape[:-1]
    n = lam_sorted.shape[-1]
    e = np.zeros(shape + (kmax + 1,))
    e[..., 0] = 1.0
    for m in range(n):
        x = lam_sorted[..., m]
        for j in range(min(m + 1, kmax), 0, -1):
            e[..., j] = e[..., j] + x * e[..., j - 1]
    return e


def sigma_table(lam, kmax: int | None = None) -> np.ndarray:
    """Return ``[sigma_0, ..., sigma_kmax]`` along a new last axis."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    kmax = n if kmax is None else kmax
    if kmax < 0 or kmax > n:
        raise DomainError(f"order {kmax} outside [0, {n}]")
    return _sigma_dp(np.sort(lam, axis=-1), kmax)


def sigma(k: int, lam) -> np.ndarray | float:
    """k-th elementary symmetric function; ``sigma(0, lam) == 1``."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if k < 0 or k > n:
        raise DomainError(f"order k={k} outside [0, {n}]")
    out = _sigma_dp(np.sort(lam, axis=-1), k)[..., k]
    return float(out) if out.ndim == 0 else out


def sigma_deleted(lam, kmax: int | None = None) -> np.ndarray:
    """``out[..., i, j] = sigma_j(lam | i)``, lam with entry ``i`` removed."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    kmax = n - 1 if kmax is None else min(kmax, n - 1)
    out = np.zeros(lam.shape[:-1] + (n, max(kmax, 0) + 1))
    for i in range(n):
        rest = np.sort(np.delete(lam, i, axis=-1), axis=-1)
        out[..., i, :] = _sigma_dp(rest, max(kmax, 0))
    return out


def sigma_deleted2(lam, kmax: int | None = None) -> np.ndarray:
    """``out[..., i, j, m] = sigma_m(lam | ij)`` for i != j, zero on i == j."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    kmax = n - 2 if kmax is None else min(kmax, n - 2)
    width = max(kmax, 0) + 1
    out = np.zeros(lam.shape[:-1] + (n, n, width))
    if n < 2:
        return out
    for i in range(n):
        for j in range(i + 1, n):
            rest = np.sort(np.delete(lam, [i, j], axis=-1), axis=-1)
            tab = _sigma_dp(rest, max(kmax, 0))
            out[..., i, j, :] = tab
            out[..., j, i, :] = tab
    return out


def _check_index(i: int, n: int):
    if not 0 <= i < n:
        raise DomainError(f"index {i} outside [0, {n})")


def sigma_partial(k: int, lam, i: int):
    """d sigma_k / d lam_i, i.e. sigma_{k-1}(lam | i).  ``i`` is 0-based."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if k < 1 or k > n:
        raise DomainError(f"order k={k} outside [1, {n}]")
    _check_index(i, n)
    rest = np.sort(np.delete(lam, i, axis=-1), axis=-1)
    out = _sigma_dp(rest, k - 1)[..., k - 1]
    return float(out) if out.ndim == 0 else out


def sigma_partial2(k: int, lam, i: int, j: int):
    """d^2 sigma_k / d lam_i d lam_j = sigma_{k-2}(lam | ij); zero when i == j."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if k < 2 or k > n:
        raise DomainError(f"order k={k} outside [2, {n}]")
    _check_index(i, n)
    _check_index(j, n)
    if i == j:
        out = np.zeros(lam.shape[:-1])
    else:
        rest = np.sort(np.delete(lam, [i, j], axis=-1), axis=-1)
        out = _sigma_dp(rest, k - 2)[..., k - 2]
    return float(out) if out.ndim == 0 else out


def eta_map(kappa) -> np.ndarray:
    """lambda_i = sum_{j != i} kappa_j."""
    kappa = _as_lambda(kappa)
    total = np.sort(kappa, axis=-1).sum(axis=-1, keepdims=True)
    return total - kappa


def eta_matrix(n: int) -> np.ndarray:
    """Matrix of the linear map ``eta_map`` (ones minus identity)."""
    return np.ones((n, n)) - np.eye(n)


def cone_margin(lam, k: int) -> np.ndarray:
    """min_{1<=i<=k} sigma_i(lam)."""
    tab = sigma_table(lam, k)
    return tab[..., 1:].min(axis=-1)


def in_cone(lam, k: int, kind: str = "gamma", tol: float = TOL_CONE):
    """Test membership in Gamma_k (``kind="gamma"``) or the eta-cone.

    For ``kind="gamma_tilde"`` the input is read as a curvature vector and
    mapped through :func:`eta_map` first.  Returns ``(inside, margin)`` where
    ``margin`` is the smallest of sigma_1..sigma_k; points with margin at or
    below ``tol`` count as outside.
    """
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if not 1 <= k <= n:
        raise DomainError(f"cone order k={k} outside [1, {n}]")
    if kind == "gamma_tilde":
        lam = eta_map(lam)
    elif kind != "gamma":
        raise DomainError(f"unknown cone kind {kind!r}")
    margin = cone_margin(lam, k)
    inside = margin > tol
    if np.ndim(margin) == 0:
        return bool(inside), float(margin)
    return inside, margin


class QuotientJet(NamedTuple):
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray | None = None


def quotient_jet(lam, k: int, l: int, want_hess: bool = False) -> QuotientJet:
    """Value, gradient and optionally Hessian of sigma_k / sigma_l."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if not 0 <= l < k <= n:
        raise DomainError(f"need 0 <= l < k <= n, got k={k}, l={l}, n={n}")
    tab = sigma_table(lam, k)
    sk = tab[..., k]
    dtab = sigma_deleted(lam, k - 1)
    dk = dtab[..., k - 1]
    if l == 0:
        sl = np.ones_like(sk)
        dl = np.zeros_like(dk)
    else:
        sl = tab[..., l]
        if np.any(sl <= 0):
            raise ConeViolationError(
                f"sigma_{l} <= 0; point outside Gamma_{l}", margin=float(np.min(sl))
            )
        dl = dtab[..., l - 1]
    value = sk / sl
    slx = sl[..., None]
    grad = (dk * slx - sk[..., None] * dl) / slx**2
    hess = None
    if want_hess:
        d2 = sigma_deleted2(lam, k - 2) if k >= 2 else None
        hk = d2[..., k - 2] if k >= 2 else np.zeros(lam.shape + (n,))
        eye = np.eye(n, dtype=bool)
        if k >= 2:
            hk = np.where(eye, 0.0, hk)
        if l >= 2:
            hl = np.where(eye, 0.0, d2[..., l - 2])
        else:
            hl = np.zeros_like(hk)
        s = slx[..., None]
        outer_kl = dk[..., :, None] * dl[..., None, :]
        hess = (
            hk / s
            - (outer_kl + np.swapaxes(outer_kl, -1, -2)) / s**2
            - sk[..., None, None] * hl / s**2
            + 2.0 * sk[..., None, None] * dl[..., :, None] * dl[..., None, :] / s**3
        )
    return QuotientJet(value, grad, hess)


def normalized_quotient(lam, k: int, l: int):
    """(sigma_k / C(n,k)) / (sigma_l / C(n,l))."""
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    tab = sigma_table(lam, max(k, l))
    return (tab[..., k] / comb(n, k)) / (tab[..., l] / comb(n, l))


def check_newton_maclaurin(lam, k: int, l: int, r: int, s: int):
    """Slack of the generalized Newton-Maclaurin inequality.

    Returns ``Q_{r,s}^{1/(r-s)} - Q_{k,l}^{1/(k-l)}`` for the normalized
    quotients ``Q``; it is nonnegative on Gamma_k.
    """
    lam = _as_lambda(lam)
    n = lam.shape[-1]
    if not (n >= k > l >= 0 and n >= r > s >= 0 and k >= r and l >= s):
        raise DomainError(f"invalid orders (k, l, r, s) = ({k}, {l}, {r}, {s}) for n={n}")
    inside, _ = in_cone(lam, k)
    if not np.all(inside):
        raise DomainError(f"lambda outside Gamma_{k}")
    lhs = normalized_quotient(lam, k, l) ** (1.0 / (k - l))
    rhs = normalized_quotient(lam, r, s) ** (1.0 / (r - s))
    return rhs - lhs


def _rel(lhs, rhs):
    """Signed gap ``lhs - rhs`` scaled by ``max(|lhs|, |rhs|, 1)``."""
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
    return (lhs - rhs) / scale


def check_cone_inequalities(kappa, k: int, l: int, xi=None, rng=None) -> dict:
    """Slacks of the structural inequalities of the eta-cone.

    ``kappa`` is a curvature vector (or batch) in the eta-cone of order ``k``.
    Every entry of the returned dict is an array of signed slacks, one per
    sample, which must be nonnegative up to rounding.  Keys prefixed with
    ``ratio_`` hold quotients whose infimum is an unspecified positive
    constant; their minimum over a sample is the calibrated constant.
    """
    kappa = _as_lambda(kappa)
    single = kappa.ndim == 1
    kappa = np.atleast_2d(kappa)
    n = kappa.shape[-1]
    if not 0 <= l < k <= n:
        raise DomainError(f"need 0 <= l < k <= n, got k={k}, l={l}, n={n}")
    inside, _ = in_cone(kappa, k, "gamma_tilde")
    if not np.all(inside):
        raise ConeViolationError(f"kappa outside the eta-cone of order {k}")
    # kappa descending, hence eta ascending
    kap = -np.sort(-kappa, axis=-1)
    eta = eta_map(kap)
    M = eta_matrix(n)
    jet = quotient_jet(eta, k, l, want_hess=True)
    F, f_eta, h_eta = jet.value, jet.grad, jet.hess
    f_lam = f_eta @ M
    h_lam = M @ h_eta @ M
    out = {}

    # (i) Gamma_1 = tilde Gamma_1 > tilde Gamma_k > ... > tilde Gamma_n > Gamma_2
    s1 = kap.sum(axis=-1)
    scale = np.maximum(np.abs(kap).max(axis=-1), 1.0)
    out["chain_gamma1"] = s1 / scale
    out["chain_gamma1_eq_tilde1"] = -np.abs(_rel(sigma(1, eta), (n - 1) * s1))
    tilde_margins = [cone_margin(eta, j) / scale**j for j in range(1, k + 1)]
    out["chain_tilde_nested"] = np.min(tilde_margins, axis=0)
    in_g2 = in_cone(kap, 2)[0] if n >= 2 else np.zeros(len(kap), bool)
    tn = cone_margin(eta, n) / scale**n
    out["chain_gamma2_in_tilde_n"] = np.where(in_g2, tn, np.inf)

    # (ii) lower bound on d(sigma_k/sigma_l)/d lambda_i
    dtab = sigma_deleted(eta, k - 1)
    sl = sigma(l, eta) if l > 0 else np.ones(len(eta))
    dl = dtab[..., l] if l <= n - 1 else np.zeros_like(eta)
    v = dtab[..., k - 1] * dl / (sl**2)[:, None]
    bound = n * (k - l) / (k * (n - l)) * (v @ M)
    out["eta_grad_lower_bound"] = _rel(f_lam, bound).min(axis=-1)

    # (iii) concavity quadratic form against the rank-one bound
    if xi is None:
        rng = np.random.default_rng(0) if rng is None else rng
        xi = rng.standard_normal(kap.shape)
    xi = np.broadcast_to(np.asarray(xi, float), kap.shape)
    quad = np.einsum("ni,nij,nj->n", xi, h_lam, xi)
    lin = np.einsum("ni,ni->n", f_lam, xi)
    rank1 = (1.0 - 1.0 / (k - l)) * lin**2 / F
    out["eta_concavity"] = _rel(rank1, quad)

    # (iv) eta ordering and positivity of eta_{n-k+1}
    out["eta_ordering"] = (np.diff(eta, axis=-1).min(axis=-1) / scale) if n > 1 else np.zeros(len(eta))
    out["eta_positive_entry"] = eta[:, n - k] / scale

    # (v) sigma_{k-1}(eta | n-k+1) >= c(n,k) sigma_{k-1}(eta)
    out["ratio_sigma_deleted"] = dtab[:, n - k, k - 1] / sigma(k - 1, eta) if k >= 2 else np.ones(len(eta))

    # (vi) monotone ordering of the derivatives
    fscale = np.maximum(np.abs(f_eta).max(axis=-1), 1e-300)
    out["deta_decreasing"] = -np.diff(f_eta, axis=-1).max(axis=-1) / fscale
    lscale = np.maximum(np.abs(f_lam).max(axis=-1), 1e-300)
    out["dlambda_increasing"] = np.diff(f_lam, axis=-1).min(axis=-1) / lscale

    # (vii) lower bounds on each derivative, k < n only
    if k < n:
        unit = kap / np.linalg.norm(kap, axis=-1, keepdims=True)
        ujet = quotient_jet(eta_map(unit), k, l)
        u_lam = ujet.grad @ M
        total = u_lam.sum(axis=-1)
        out["ratio_dlambda_over_sum"] = u_lam.min(axis=-1) / total
        out["ratio_sum_over_power"] = total / ujet.value ** (1.0 - 1.0 / (k - l))

    if single:
        out = {key: val[0] for key, val in out.items()}
    return out


def gamma_matrix(p) -> np.ndarray:
    """gamma^{ij} = delta_ij - p_i p_j / (w (1 + w)), w = sqrt(1 + |p|^2)."""
    p = np.asarray(p, float)
    w = np.sqrt(1.0 + np.einsum("...i,...i->...", p, p))
    n = p.shape[-1]
    return np.eye(n) - p[..., :, None] * p[..., None, :] / (w * (1.0 + w))[..., None, None]


def projected_eigenvalues(r, p) -> np.ndarray:
    """Eigenvalues of (I - p p^T / (1 + |p|^2)) r, computed symmetrically."""
    gam = gamma_matrix(p)
    return np.linalg.eigvalsh(gam @ np.asarray(r, float) @ gam)


def check_projection_inequality(r, p, k: int, l: int):
    """Slacks for the projected-cone inclusion and the quotient bound.

    ``r`` is a symmetric matrix with eigenvalues in Gamma_{k+1}.  Returns
    ``(cone_slack, quotient_slack)``: the Gamma_k margin of lambda(r, p) and
    the scaled gap ``sigma_k/sigma_l(lambda(r,p)) - sigma_k/sigma_l(lambda(r))/(1+|p|^2)``.
    """
    r = np.asarray(r, float)
    p = np.asarray(p, float)
    n = r.shape[-1]
    if not 0 <= l < k < n:
        raise DomainError(f"need 0 <= l < k < n, got k={k}, l={l}, n={n}")
    lam_r = np.linalg.eigvalsh(r)
    ok, _ = in_cone(lam_r, k + 1)
    if not np.all(ok):
        raise DomainError(f"lambda(r) outside Gamma_{k + 1}")
    lam_rp = projected_eigenvalues(r, p)
    scale = np.maximum(np.abs(lam_r).max(axis=-1), 1.0)
    cone_slack = np.min([sigma(i, lam_rp) / scale**i for i in range(1, k + 1)], axis=0)
    q_rp = quotient_jet(lam_rp, k, l).value if l == 0 or np.all(sigma(l, lam_rp) > 0) else None
    if q_rp is None:
        raise ConeViolationError("projected eigenvalues left Gamma_l")
    q_r = quotient_jet(lam_r, k, l).value
    p2 = np.einsum("...i,...i->...", p, p)
    quot_slack = _rel(q_rp, q_r / (1.0 + p2))
    if np.ndim(cone_slack) == 0:
        return float(cone_slack), float(quot_slack)
    return cone_slack, quot_slack
