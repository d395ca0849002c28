"""Uniform lattices on a square/cube or a disc/ball with finite-difference jets.

Derivatives at interior nodes are linear functionals of the nodal values and
are stored as sparse matrices, one per first- and second-derivative
component.  Next to a curved boundary the axis arms are cut at the exact
boundary intersection (Shortley-Weller), where the Dirichlet value 0 is used.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .hypersurface import GraphJet

SHAPES = ("square", "disc")


@dataclass(frozen=True)
class DomainSpec:
    """``square`` = [-size, size]^n, ``disc`` = ball of radius ``size``."""

    shape: str
    size: float
    n: int

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown domain shape {self.shape!r}; expected one of {SHAPES}")
        if not self.size > 0:
            raise ConfigError("domain size must be positive")
        if self.n not in (2, 3):
            raise ConfigError("spatial dimension must be 2 or 3")

    def distance(self, x):
        """Distance to the boundary for points inside the closed domain."""
        x = np.asarray(x, float)
        if self.shape == "disc":
            return self.size - np.linalg.norm(x, axis=-1)
        return self.size - np.abs(x).max(axis=-1)

    @property
    def boundary_curvature(self) -> float | None:
        return 1.0 / self.size if self.shape == "disc" else None

    def _ray_exit(self, x, direction):
        """Smallest t > 0 with x + t d on the boundary (d a unit vector)."""
        if self.shape == "disc":
            b = float(x @ direction)
            c = float(x @ x) - self.size**2
            return -b + np.sqrt(b * b - c)
        ts = [(np.sign(di) * self.size - xi) / di for xi, di in zip(x, direction) if di != 0]
        return min(ts)


class Grid:
    """Lattice with spacing ``h = 2 size / (m - 1)`` centred at the origin."""

    def __init__(self, dom: DomainSpec, m: int):
        if m < 5 or m % 2 == 0:
            raise ConfigError(f"nodes per axis m={m} must be odd and >= 5")
        self.dom = dom
        self.n = dom.n
        self.m = m
        self.half = (m - 1) // 2
        self.h = 2.0 * dom.size / (m - 1)
        self.axis = (np.arange(m) - self.half) * self.h
        idx = np.array(list(itertools.product(range(m), repeat=self.n)), dtype=int)
        off = idx - self.half
        if dom.shape == "disc":
            r2 = (off**2).sum(axis=1)
            inside = r2 < self.half**2
            on_bdry = r2 == self.half**2
        else:
            mx = np.abs(off).max(axis=1)
            inside = mx < self.half
            on_bdry = mx == self.half
        self._lattice_index = idx
        self._inside_full = inside
        self._bdry_full = on_bdry
        self.index = idx[inside]
        self.points = off[inside] * self.h
        self.size = int(inside.sum())
        self._id = -np.ones((m,) * self.n, dtype=int)
        self._id[tuple(self.index.T)] = np.arange(self.size)
        self._build_stencils()

    # lattice helpers -------------------------------------------------
    def lattice_points(self) -> np.ndarray:
        return (self._lattice_index - self.half) * self.h

    def interior_mask_full(self) -> np.ndarray:
        return self._inside_full.copy()

    def boundary_lattice_points(self) -> tuple[np.ndarray, np.ndarray]:
        b = self._bdry_full
        return self._lattice_index[b], (self._lattice_index[b] - self.half) * self.h

    @cached_property
    def distance(self) -> np.ndarray:
        return self.dom.distance(self.points)

    @cached_property
    def center_node(self) -> int:
        return int(self._id[(self.half,) * self.n])

    def band_mask(self, width: float | None = None) -> np.ndarray:
        """Interior nodes within ``width`` (default 3h) of the boundary."""
        width = 3.0 * self.h if width is None else width
        return self.distance < width

    # stencils --------------------------------------------------------
    def _neighbor(self, node_idx, offset):
        """Lattice neighbour: (interior id or -1, True if it is inside the closed domain)."""
        j = node_idx + offset
        if np.any(j < 0) or np.any(j >= self.m):
            return -1, False
        jt = tuple(j)
        nid = self._id[jt]
        if nid >= 0:
            return int(nid), True
        flat = np.ravel_multi_index(jt, (self.m,) * self.n)
        return -1, bool(self._bdry_full[flat])

    def _arm(self, c, x, direction_int):
        """(distance factor tau in (0, 1], interior id or -1) along a lattice direction."""
        nid, closed = self._neighbor(self.index[c], direction_int)
        if closed:
            return 1.0, nid
        d = direction_int / np.linalg.norm(direction_int)
        t = self.dom._ray_exit(x, d)
        tau = t / (self.h * np.linalg.norm(direction_int))
        return min(max(tau, 0.0), 1.0), -1

    def _build_stencils(self):
        n, h, N = self.n, self.h, self.size
        first = [dict() for _ in range(n)]
        second = {(i, j): dict() for i in range(n) for j in range(i, n)}
        rows1 = [[] for _ in range(n)]
        cols1 = [[] for _ in range(n)]
        vals1 = [[] for _ in range(n)]
        rows2 = {key: [] for key in second}
        cols2 = {key: [] for key in second}
        vals2 = {key: [] for key in second}
        sw = np.zeros(N, dtype=bool)

        def emit(rows, cols, vals, c, combo):
            for col, wgt in combo.items():
                if col >= 0 and wgt != 0.0:
                    rows.append(c)
                    cols.append(col)
                    vals.append(wgt)

        for c in range(N):
            x = self.points[c]
            a = []   # first-derivative combos per axis
            b = []   # pure second-derivative combos per axis
            for i in range(n):
                e = np.zeros(n, dtype=int)
                e[i] = 1
                tp, ip = self._arm(c, x, e)
                tm, im = self._arm(c, x, -e)
                hp, hm = tp * h, tm * h
                if tp < 1.0 or tm < 1.0:
                    sw[c] = True
                D = hp * hm * (hp + hm)
                ai = {c: (hp**2 - hm**2) / D}
                ai[ip] = ai.get(ip, 0.0) + hm**2 / D
                ai[im] = ai.get(im, 0.0) - hp**2 / D
                bi = {c: -2.0 / (hp * hm)}
                bi[ip] = bi.get(ip, 0.0) + 2.0 / (hp * (hp + hm))
                bi[im] = bi.get(im, 0.0) + 2.0 / (hm * (hp + hm))
                a.append(ai)
                b.append(bi)
                emit(rows1[i], cols1[i], vals1[i], c, ai)
                emit(rows2[(i, i)], cols2[(i, i)], vals2[(i, i)], c, bi)
            for i in range(n):
                for j in range(i + 1, n):
                    combo: dict = {}
                    for si, sj in itertools.product((1, -1), repeat=2):
                        d = np.zeros(n, dtype=int)
                        d[i], d[j] = si, sj
                        tau, nid = self._arm(c, x, d)
                        if tau < 1.0:
                            sw[c] = True
                        xd, yd = si * tau * h, sj * tau * h
                        inv = 1.0 / (4.0 * xd * yd)
                        # u_d - u_0 - a_i xd - a_j yd - b_ii xd^2/2 - b_jj yd^2/2, over xd yd
                        combo[nid] = combo.get(nid, 0.0) + inv
                        combo[c] = combo.get(c, 0.0) - inv
                        for col, wgt in a[i].items():
                            combo[col] = combo.get(col, 0.0) - inv * xd * wgt
                        for col, wgt in a[j].items():
                            combo[col] = combo.get(col, 0.0) - inv * yd * wgt
                        for col, wgt in b[i].items():
                            combo[col] = combo.get(col, 0.0) - inv * 0.5 * xd * xd * wgt
                        for col, wgt in b[j].items():
                            combo[col] = combo.get(col, 0.0) - inv * 0.5 * yd * yd * wgt
                    emit(rows2[(i, j)], cols2[(i, j)], vals2[(i, j)], c, combo)

        def mat(r, cc, v):
            return sp.csr_matrix((v, (r, cc)), shape=(N, N))

        self.D1 = [mat(rows1[i], cols1[i], vals1[i]) for i in range(n)]
        self.D2 = {key: mat(rows2[key], cols2[key], vals2[key]) for key in second}
        self.shortley_weller = sw

    # jets ------------------------------------------------------------
    def gradients(self, values) -> np.ndarray:
        values = np.asarray(values, float)
        return np.stack([D @ values for D in self.D1], axis=-1)

    def hessians(self, values) -> np.ndarray:
        values = np.asarray(values, float)
        out = np.empty((self.size, self.n, self.n))
        for (i, j), D in self.D2.items():
            col = D @ values
            out[:, i, j] = col
            out[:, j, i] = col
        return out

    def jets(self, values):
        return self.gradients(values), self.hessians(values)


def build_grid(dom: DomainSpec, m: int) -> Grid:
    return Grid(dom, m)


@dataclass
class Field:
    """Nodal values on the interior nodes of ``grid``; boundary values are 0."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.shape != (self.grid.size,):
            raise ConfigError(f"field has {self.values.shape} values, grid has {self.grid.size} nodes")

    @classmethod
    def from_function(cls, grid: Grid, fn):
        return cls(grid, np.asarray(fn(grid.points), float))


def jet_at(f: Field, node: int) -> GraphJet:
    g = f.grid
    du = np.array([D[node] @ f.values for D in g.D1]).ravel()
    d2u = np.empty((g.n, g.n))
    for (i, j), D in g.D2.items():
        d2u[i, j] = d2u[j, i] = (D[node] @ f.values).item()
    return GraphJet(g.points[node], f.values[node], du, d2u)


def discrete_norms(f: Field, mask=None) -> tuple[float, float, float]:
    """(sup|u|, sup|Du|, sup|D^2u|_F) over interior nodes (optionally masked)."""
    du, d2u = f.grid.jets(f.values)
    u = f.values
    if mask is not None:
        u, du, d2u = u[mask], du[mask], d2u[mask]
    if u.size == 0:
        return 0.0, 0.0, 0.0
    return (
        float(np.abs(u).max()),
        float(np.linalg.norm(du, axis=-1).max()),
        float(np.sqrt((d2u**2).sum(axis=(-1, -2))).max()),
    )


def write_field_csv(path, f: Field, k: int, l: int) -> None:
    """Dump all lattice nodes of the closed domain, boundary nodes with u = 0."""
    g = f.grid
    bidx, bpts = g.boundary_lattice_points()
    idx = np.vstack([g.index, bidx])
    pts = np.vstack([g.points, bpts])
    vals = np.concatenate([f.values, np.zeros(len(bidx))])
    order = np.lexsort(idx.T[::-1])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n} k={k} l={l} shape={g.dom.shape} size={g.dom.size!r} m={g.m} h={g.h!r}\n")
        for r in order:
            cells = [str(int(v)) for v in idx[r]] + [repr(float(v)) for v in pts[r]] + [repr(float(vals[r]))]
            fh.write(",".join(cells) + "\n")


def read_field_csv(path):
    """Return ``(header dict, index array, points array, values array)``."""
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().lstrip("#").split()
        meta = dict(item.split("=", 1) for item in head)
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    n = int(meta["n"])
    return meta, rows[:, :n].astype(int), rows[:, n:2 * n], rows[:, 2 * n]
