"""Argument checks shared by the estimator and the CLI."""
from __future__ import annotations

import numpy as np

from .errors import ConfigError


def check_points(X, n: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape[0] == n:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise ValueError(f"expected points of shape (count, {n}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    return X


def check_odd_at_least(m, low: int = 5) -> int:
    if int(m) != m or m < low or m % 2 == 0:
        raise ConfigError(f"m={m} must be an odd integer >= {low}")
    return int(m)


def check_schedule(eps) -> tuple:
    eps = tuple(float(e) for e in eps)
    if not eps or any(e < 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps_schedule must be nonempty, nonnegative and strictly decreasing")
    return eps
