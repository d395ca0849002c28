"""Closed-form height functions used as exact solutions and subsolutions.

Each expression vanishes on the sphere ``|x| = radius`` and exposes
vectorized ``value``, ``gradient`` and ``hessian`` over points of shape
``(..., n)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _r2(x):
    return np.einsum("...i,...i->...", x, x)


@dataclass(frozen=True)
class SphericalCap:
    """Lower spherical cap of curvature radius ``R`` cut at ``|x| = radius``."""

    R: float
    radius: float

    def __post_init__(self):
        if not self.R > self.radius > 0:
            raise ValueError("need R > radius > 0")

    def value(self, x):
        x = np.asarray(x, float)
        return np.sqrt(self.R**2 - self.radius**2) - np.sqrt(self.R**2 - _r2(x))

    def gradient(self, x):
        x = np.asarray(x, float)
        return x / np.sqrt(self.R**2 - _r2(x))[..., None]

    def hessian(self, x):
        x = np.asarray(x, float)
        s = self.R**2 - _r2(x)
        n = x.shape[-1]
        return (np.eye(n) / np.sqrt(s)[..., None, None]
                + x[..., :, None] * x[..., None, :] / (s**1.5)[..., None, None])


@dataclass(frozen=True)
class Paraboloid:
    a: float
    radius: float

    def value(self, x):
        return 0.5 * self.a * (_r2(np.asarray(x, float)) - self.radius**2)

    def gradient(self, x):
        return self.a * np.asarray(x, float)

    def hessian(self, x):
        x = np.asarray(x, float)
        return np.broadcast_to(self.a * np.eye(x.shape[-1]), x.shape + (x.shape[-1],)).copy()


@dataclass(frozen=True)
class ExpBowl:
    """``A (exp(beta (|x|^2 - radius^2)) - 1)``, convex for A, beta > 0."""

    A: float
    beta: float
    radius: float

    def _e(self, x):
        return np.exp(self.beta * (_r2(x) - self.radius**2))

    def value(self, x):
        x = np.asarray(x, float)
        return self.A * (self._e(x) - 1.0)

    def gradient(self, x):
        x = np.asarray(x, float)
        return (2.0 * self.A * self.beta * self._e(x))[..., None] * x

    def hessian(self, x):
        x = np.asarray(x, float)
        n = x.shape[-1]
        c = 2.0 * self.A * self.beta * self._e(x)
        return c[..., None, None] * (np.eye(n) + 2.0 * self.beta * x[..., :, None] * x[..., None, :])


class NumericExpression:
    """Wrap a plain callable; derivatives by central differences."""

    def __init__(self, fn, step: float = 1e-4):
        self.fn = fn
        self.step = step

    def value(self, x):
        return np.asarray(self.fn(np.asarray(x, float)), float)

    def gradient(self, x):
        x = np.asarray(x, float)
        h = self.step
        out = np.empty(x.shape)
        for i in range(x.shape[-1]):
            e = np.zeros(x.shape[-1])
            e[i] = h
            out[..., i] = (self.value(x + e) - self.value(x - e)) / (2 * h)
        return out

    def hessian(self, x):
        x = np.asarray(x, float)
        n = x.shape[-1]
        h = self.step
        out = np.empty(x.shape + (n,))
        f0 = self.value(x)
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h
            out[..., i, i] = (self.value(x + ei) - 2 * f0 + self.value(x - ei)) / h**2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h
                v = (self.value(x + ei + ej) - self.value(x + ei - ej)
                     - self.value(x - ei + ej) + self.value(x - ei - ej)) / (4 * h**2)
                out[..., i, j] = out[..., j, i] = v
        return out


def parse_expression(text: str, radius: float):
    """``cap:R`` | ``paraboloid:a`` | ``expbowl:A:beta``."""
    kind, *args = text.split(":")
    vals = [float(a) for a in args]
    if kind == "cap":
        return SphericalCap(*vals, radius=radius)
    if kind == "paraboloid":
        return Paraboloid(*vals, radius=radius)
    if kind == "expbowl":
        return ExpBowl(*vals, radius=radius)
    raise ValueError(f"unknown expression kind {kind!r}")
