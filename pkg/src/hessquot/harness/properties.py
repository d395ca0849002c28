"""Randomized verification of the symmetric-function inequality corpus.

Cone points are drawn by rejection: entries i.i.d. uniform on [-1, 3], kept
when inside the requested cone.  Samples are split into a fixed number of
shards with sub-seeds spawned from the run seed, so the outcome does not
depend on how many worker threads execute the shards.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .. import symcalc
from ..errors import SamplingError

LOW, HIGH = -1.0, 3.0
MIN_ACCEPTANCE = 1e-3
N_SHARDS = 8
SLACK_TOL = 1e-9


def sample_cone(rng, n: int, k: int, count: int, kind: str = "gamma", batch: int = 4096) -> np.ndarray:
    """Rejection-sample ``count`` points of the cone of order ``k``."""
    out = []
    have = drawn = 0
    while have < count:
        cand = rng.uniform(LOW, HIGH, size=(batch, n))
        drawn += batch
        ok, _ = symcalc.in_cone(cand, k, kind)
        acc = cand[ok]
        out.append(acc)
        have += len(acc)
        if drawn >= 10 * batch and have / drawn < MIN_ACCEPTANCE:
            raise SamplingError(
                f"acceptance {have / drawn:.2e} below {MIN_ACCEPTANCE} for {kind} cone "
                f"n={n} k={k} on [{LOW}, {HIGH}]^n"
            )
    return np.concatenate(out)[:count]


def random_rotations(rng, count: int, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((count, n, n)))
    return q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]


# ---------------------------------------------------------------------------
# check families; each returns {name: slack array}


def gamma_checks(lam, k: int, l: int) -> dict:
    """Identities and inequalities on Gamma_k."""
    n = lam.shape[-1]
    out = {}
    scale = np.maximum(np.abs(lam).max(axis=-1), 1.0)
    tab = symcalc.sigma_table(lam, k)
    dtab = symcalc.sigma_deleted(lam, k)
    part = dtab[..., k - 1]

    out["sum_of_partials_identity"] = -np.abs(
        symcalc._rel(part.sum(axis=-1), (n - k + 1) * tab[..., k - 1]))
    out["euler_identity"] = -np.abs(symcalc._rel((lam * part).sum(axis=-1), k * tab[..., k]))
    sk_del = dtab[..., k] if k <= n - 1 else np.zeros_like(lam)
    out["deletion_recursion"] = -np.abs(
        symcalc._rel(tab[..., k][:, None], sk_del + lam * part)).max(axis=-1)
    if k >= 2:
        out["cone_nesting"] = np.min(
            [tab[..., j] / scale**j for j in range(1, k)], axis=0)
    out["partial_positivity"] = part.min(axis=-1) / scale ** (k - 1)

    jet = symcalc.quotient_jet(lam, k, l, want_hess=True)
    F, g, H = jet.value, jet.grad, jet.hess
    alpha = 1.0 / (k - l)
    root_grad = alpha * F[:, None] ** (alpha - 1.0) * g
    bound = (comb(n, k) / comb(n, l)) ** alpha
    out["root_gradient_sum_bound"] = symcalc._rel(root_grad.sum(axis=-1), bound)
    # Hessian of F^alpha is a positive multiple of H - (1 - alpha) g g^T / F
    rank1 = (1.0 - alpha) * g[:, :, None] * g[:, None, :] / F[:, None, None]
    top = np.linalg.eigvalsh(H - rank1)[:, -1]
    norm = np.maximum(np.maximum(np.abs(H).max(axis=(1, 2)), np.abs(rank1).max(axis=(1, 2))), 1.0)
    out["root_concavity"] = -top / norm

    desc = -np.sort(-lam, axis=-1)
    dpart = symcalc.sigma_deleted(desc, k - 1)[..., k - 1]
    pscale = np.maximum(np.abs(dpart).max(axis=-1), 1e-300)
    out["partial_ordering"] = np.diff(dpart, axis=-1).min(axis=-1) / pscale

    if k >= 2:
        s1 = tab[..., 1]
        out["ratio_sigma_km1_lower_bound"] = tab[..., k - 1] / (
            tab[..., k] ** (1.0 - 1.0 / (k - 1)) * s1 ** (1.0 / (k - 1)))
    out["ratio_sigma1_over_root_sigmak"] = tab[..., 1] / tab[..., k] ** (1.0 / k)

    for r, s in itertools.product(range(1, k + 1), range(0, l + 1)):
        if r > s:
            out[f"newton_maclaurin_r{r}_s{s}"] = symcalc.check_newton_maclaurin(lam, k, l, r, s)
    return out


def tilde_checks(kappa, k: int, l: int, rng) -> dict:
    return symcalc.check_cone_inequalities(kappa, k, l, rng=rng)


def projection_checks(rng, n: int, k: int, l: int, count: int) -> tuple[dict, np.ndarray]:
    lam = sample_cone(rng, n, k + 1, count)
    lam[0] = 1.0
    Q = random_rotations(rng, count, n)
    r = Q @ (lam[:, :, None] * np.swapaxes(Q, -1, -2))
    r = 0.5 * (r + np.swapaxes(r, -1, -2))
    p = rng.standard_normal((count, n)) * rng.uniform(0.0, 3.0, size=(count, 1))
    p[0] = 0.0
    cone, quot = symcalc.check_projection_inequality(r, p, k, l)
    return {"projection_cone": cone, "projection_quotient": quot}, np.concatenate(
        [r.reshape(count, -1), p], axis=1)


# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    worst_slack: float
    sample: list
    shard: int
    index: int
    count: int
    calibrated: bool = False

    @property
    def passed(self) -> bool:
        if self.count == 0:
            return True
        if self.calibrated:
            return self.worst_slack > 0.0
        return self.worst_slack >= -SLACK_TOL

    def describe(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        kind = "calibrated constant" if self.calibrated else "worst slack"
        return f"{state} {self.name}: {kind} {self.worst_slack:.3e} at shard {self.shard} sample {self.index} {self.sample}"


@dataclass
class SuiteReport:
    n: int
    k: int
    l: int
    seed: int
    sample_count: int
    results: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def failures(self):
        return [r for r in self.results.values() if not r.passed]

    def to_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "l": self.l, "seed": self.seed,
            "sample_count": self.sample_count, "passed": self.passed,
            "checks": {
                name: {
                    "passed": r.passed,
                    "worst_slack": _finite_or_none(r.worst_slack),
                    "calibrated_constant": _finite_or_none(r.worst_slack) if r.calibrated else None,
                    "sample": r.sample, "shard": r.shard, "index": r.index, "count": r.count,
                }
                for name, r in sorted(self.results.items())
            },
        }


def _finite_or_none(x):
    return float(x) if np.isfinite(x) else None


def _shard(n, k, l, seq, count, inject):
    rng = np.random.default_rng(seq)
    out = []
    lam = sample_cone(rng, n, k, count, "gamma")
    kap = sample_cone(rng, n, k, count, "gamma_tilde")
    if inject:
        lam[0] = 1.0
        kap[0] = 1.0
    for name, val in gamma_checks(lam, k, l).items():
        out.append((name, val, lam))
    for name, val in tilde_checks(kap, k, l, rng).items():
        out.append((name, val, kap))
    if k < n:
        checks, samples = projection_checks(rng, n, k, l, count)
        for name, val in checks.items():
            out.append((name, val, samples))
    return out


def run_property_suite(n: int, k: int, l: int, seed: int = 42, sample_count: int = 10_000,
                       threads: int = 1) -> SuiteReport:
    """Run every registered check on ``sample_count`` cone samples per family."""
    if not 0 <= l < k <= n:
        raise ValueError(f"need 0 <= l < k <= n, got n={n}, k={k}, l={l}")
    t0 = time.perf_counter()
    seqs = np.random.SeedSequence(seed).spawn(N_SHARDS)
    sizes = [sample_count // N_SHARDS + (1 if i < sample_count % N_SHARDS else 0) for i in range(N_SHARDS)]
    jobs = [(n, k, l, seqs[i], sizes[i], i == 0) for i in range(N_SHARDS) if sizes[i] > 0]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shard_out = list(pool.map(lambda a: _shard(*a), jobs))
    else:
        shard_out = [_shard(*a) for a in jobs]
    report = SuiteReport(n, k, l, seed, sample_count)
    for shard_id, items in enumerate(shard_out):
        for name, val, samples in items:
            val = np.asarray(val, float)
            idx = int(np.argmin(val)) if val.size else -1
            worst = float(val[idx]) if val.size else np.inf
            prev = report.results.get(name)
            count = int(np.isfinite(val).sum())
            if prev is None or worst < prev.worst_slack:
                res = CheckResult(name, worst, samples[idx].tolist() if idx >= 0 else [],
                                  shard_id, idx, count + (prev.count if prev else 0),
                                  calibrated=name.startswith("ratio_"))
                report.results[name] = res
            else:
                prev.count += count
    report.runtime = time.perf_counter() - t0
    return report
