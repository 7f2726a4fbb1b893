"""Probability measures on a domain and elementary functionals on them.

Measure types:

* :class:`Discrete` -- finitely many weighted atoms;
* :class:`GridDensity` -- density ``eta = dmu/dm`` sampled at grid nodes;
* :class:`Empirical` -- an equally weighted point cloud;
* :class:`GraphMeasure` -- 1D only; a measure stored through the completed
  graph of its distribution function, a monotone polyline from ``(0, 0)`` to
  ``(1, 1)``. Vertical pieces are atoms, horizontal pieces are gaps, sloped
  pieces carry uniform density. Conjugation in 1D swaps the two coordinates
  of this graph, which is why it is the working format of the 1D path.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import CIRCLE, POLYGON, Domain, Grid, reference_weights
from .errors import DegenerateMeasureError, DomainError, PreconditionError

WEIGHT_TOL = 1e-10
MERGE_TOL = 1e-12
CLAMP = 1e-300


@dataclass(frozen=True, eq=False)
class Discrete:
    domain: Domain
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        w = np.asarray(self.weights, dtype=float).ravel()
        if self.domain.dim == 1:
            atoms = atoms.ravel()
        else:
            atoms = atoms.reshape(-1, 2)
        if len(atoms) != len(w) or len(w) == 0:
            raise PreconditionError("atoms and weights must be nonempty and of equal length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise PreconditionError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise PreconditionError(f"weights sum to {w.sum():.17g}, not 1")
        self.domain.check_points(atoms)
        if self.domain.kind == CIRCLE:
            atoms = np.mod(atoms, 1.0)
            atoms[atoms > 1.0 - MERGE_TOL] = 0.0
        atoms, w = _merge(atoms, w)
        keep = w > 0
        atoms, w = atoms[keep], w[keep]
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w / w.sum())

    def __len__(self):
        return len(self.weights)

    def to_json(self):
        pts = self.atoms.reshape(len(self), -1)
        return {"type": "discrete",
                "atoms": [{"x": p.tolist(), "w": float(w)} for p, w in zip(pts, self.weights)]}


def _merge(atoms, w):
    if atoms.ndim == 1:
        order = np.argsort(atoms, kind="stable")
        atoms, w = atoms[order], w[order]
        if len(atoms) < 2:
            return atoms, w
        new = np.concatenate([[True], np.diff(atoms) > MERGE_TOL])
        group = np.cumsum(new) - 1
        return atoms[new], np.bincount(group, weights=w)
    # 2D: lexicographic order, merge exact-within-tolerance neighbours
    order = np.lexsort((atoms[:, 1], atoms[:, 0]))
    atoms, w = atoms[order], w[order]
    out_a, out_w = [atoms[0]], [w[0]]
    for a, wi in zip(atoms[1:], w[1:]):
        if np.all(np.abs(a - out_a[-1]) <= MERGE_TOL):
            out_w[-1] += wi
        else:
            out_a.append(a)
            out_w.append(wi)
    return np.array(out_a), np.array(out_w)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density ``eta`` with respect to ``m``, given at the nodes of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.shape != (self.grid.size,):
            raise PreconditionError("one density value per grid node required")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise PreconditionError("density must be finite and nonnegative")
        v[v < CLAMP] = 0.0
        total = float(self.weights @ v)
        if total <= 0:
            raise DegenerateMeasureError("density has zero mass")
        # already normalized input is kept bit-for-bit (stable JSON round trips)
        if abs(total - 1.0) > 4 * np.finfo(float).eps:
            v = v / total
        object.__setattr__(self, "values", v)

    @property
    def domain(self):
        return self.grid.domain

    @property
    def weights(self):
        return reference_weights(self.grid.domain, self.grid)

    @property
    def node_masses(self):
        return self.weights * self.values

    def to_json(self):
        return {"type": "grid", "grid": self.grid.to_json(), "values": self.values.tolist()}


@dataclass(frozen=True, eq=False)
class Empirical:
    domain: Domain
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        pts = pts.ravel() if self.domain.dim == 1 else pts.reshape(-1, 2)
        if len(pts) == 0:
            raise PreconditionError("empty point cloud")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def as_discrete(self):
        return Discrete(self.domain, self.points, np.full(len(self), 1.0 / len(self)))

    def to_json(self):
        return {"type": "empirical", "points": self.points.reshape(len(self), -1).tolist()}


@dataclass(frozen=True, eq=False)
class GraphMeasure:
    """1D measure stored as the completed graph of its distribution function."""

    domain: Domain
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        if self.domain.dim != 1:
            raise DomainError("graph measures are one-dimensional")
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
            raise PreconditionError("graph needs matching vertex arrays")
        if xs[0] != 0 or ys[0] != 0 or xs[-1] != 1 or ys[-1] != 1:
            raise PreconditionError("graph must run from (0, 0) to (1, 1)")
        if np.any(np.diff(xs) < 0) or np.any(np.diff(ys) < 0):
            raise PreconditionError("graph must be monotone in both coordinates")
        # drop repeated vertices and interior vertices on straight runs
        keep = np.ones(len(xs), dtype=bool)
        dup = (np.diff(xs) == 0) & (np.diff(ys) == 0)
        keep[1:][dup] = False
        xs, ys = xs[keep], ys[keep]
        if len(xs) > 2:
            dx1, dy1 = xs[1:-1] - xs[:-2], ys[1:-1] - ys[:-2]
            dx2, dy2 = xs[2:] - xs[1:-1], ys[2:] - ys[1:-1]
            straight = (dx1 * dy2 - dy1 * dx2) == 0
            keep = np.concatenate([[True], ~straight, [True]])
            xs, ys = xs[keep], ys[keep]
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def cdf(self, x):
        """Right-continuous distribution function ``mu([0, x])``."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 2)
        return _interp_piece(self.xs, self.ys, i, x)

    def cdf_left(self, x):
        """Left limit ``mu([0, x))``."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.xs, x, side="left"), 1, len(self.xs) - 1)
        return _interp_piece(self.xs, self.ys, i - 1, x, anchor_right=True)

    def quantile(self, u):
        """Right inverse ``inf{x >= 0 : F(x) >= u}``."""
        u = np.asarray(u, dtype=float)
        j = np.clip(np.searchsorted(self.ys, u, side="left"), 0, len(self.ys) - 1)
        prev = np.maximum(j - 1, 0)
        dy = self.ys[j] - self.ys[prev]
        hit = (self.ys[j] == u) | (dy == 0)
        t = np.where(hit, 1.0, (u - self.ys[prev]) / np.where(dy == 0, 1.0, dy))
        return np.where(hit, self.xs[j], self.xs[prev] + t * (self.xs[j] - self.xs[prev]))

    def mass(self, a, b, closed_right=False):
        """``mu([a, b))`` (or ``mu([a, b])``)."""
        hi = self.cdf(b) if closed_right else self.cdf_left(b)
        return hi - self.cdf_left(a)

    def pieces(self):
        """Arrays ``(x0, x1, y0, y1)`` of the graph's segments."""
        return self.xs[:-1], self.xs[1:], self.ys[:-1], self.ys[1:]

    def atoms(self):
        """Positions and masses of atoms (vertical graph pieces)."""
        x0, x1, y0, y1 = self.pieces()
        vert = (x0 == x1) & (y1 > y0)
        pos, mass = x0[vert], (y1 - y0)[vert]
        if self.domain.kind == CIRCLE and len(pos) and pos[-1] == 1.0:
            if pos[0] == 0.0:
                mass = mass.copy()
                mass[0] += mass[-1]
                pos, mass = pos[:-1], mass[:-1]
            else:
                pos = pos.copy()
                pos[-1] = 0.0
        return pos, mass

    @property
    def is_atomic(self):
        x0, x1, y0, y1 = self.pieces()
        return bool(np.all((x0 == x1) | (y0 == y1)))

    def density(self, x):
        """Density with respect to Lebesgue measure of the continuous part."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 2)
        dx = self.xs[i + 1] - self.xs[i]
        return np.where(dx > 0, (self.ys[i + 1] - self.ys[i]) / np.where(dx > 0, dx, 1.0), 0.0)

    def swapped(self):
        return GraphMeasure(self.domain, self.ys.copy(), self.xs.copy())

    def components(self):
        """Split into atoms ``(pos, mass)`` and uniform segments ``(a, b, mass)``."""
        x0, x1, y0, y1 = self.pieces()
        atom = (x0 == x1) & (y1 > y0)
        seg = (x1 > x0) & (y1 > y0)
        atoms = np.stack([x0[atom], (y1 - y0)[atom]], axis=1)
        segs = np.stack([x0[seg], x1[seg], (y1 - y0)[seg]], axis=1)
        return atoms, segs

    @classmethod
    def from_components(cls, domain, atoms, segments):
        """Inverse of :meth:`components`; pieces must not overlap."""
        atoms = np.asarray(atoms, dtype=float).reshape(-1, 2)
        segments = np.asarray(segments, dtype=float).reshape(-1, 3)
        items = [(a, a, m) for a, m in atoms if m > 0] + [(a, b, m) for a, b, m in segments if m > 0]
        # atoms sort before a segment starting at the same place
        items.sort(key=lambda t: (t[0], t[1] > t[0], t[1]))
        xs, ys = [0.0], [0.0]
        y = 0.0
        for a, b, m in items:
            xs += [a, b]
            ys += [y, y + m]
            y += m
        total = y
        if total <= 0:
            raise DegenerateMeasureError("no mass in components")
        ys = np.array(ys) / total
        xs = np.array(xs + [1.0])
        ys = np.append(ys, 1.0)
        ys[-2] = 1.0
        return cls(domain, np.clip(xs, 0.0, 1.0), ys)

    def to_json(self):
        return {"type": "graph", "xs": self.xs.tolist(), "ys": self.ys.tolist()}


def _interp_piece(xs, ys, i, x, anchor_right=False):
    dx = xs[i + 1] - xs[i]
    safe = np.where(dx > 0, dx, 1.0)
    t = np.clip((x - xs[i]) / safe, 0.0, 1.0)
    val = ys[i] + t * (ys[i + 1] - ys[i])
    flat = np.where(anchor_right, ys[i], ys[i + 1])
    return np.where(dx > 0, val, flat)


def measure_from_json(obj, domain, grid=None):
    kind = obj["type"]
    if kind == "discrete":
        pts = [a["x"] for a in obj["atoms"]]
        atoms = np.array([p[0] if isinstance(p, list) and domain.dim == 1 else p for p in pts], dtype=float)
        return Discrete(domain, atoms, [a["w"] for a in obj["atoms"]])
    if kind == "empirical":
        return Empirical(domain, np.asarray(obj["points"], dtype=float))
    if kind == "grid":
        if grid is None:
            grid = Grid.from_json(obj["grid"]) if "grid" in obj else None
        if grid is None:
            raise PreconditionError("grid density needs a grid")
        return GridDensity(grid, np.asarray(obj["values"], dtype=float))
    if kind == "graph":
        return GraphMeasure(domain, np.asarray(obj["xs"]), np.asarray(obj["ys"]))
    raise PreconditionError(f"unknown measure type {kind!r}")


# ---------------------------------------------------------------------------
# partitions

@dataclass(frozen=True, eq=False)
class Partition:
    """Measurable partition of a domain into ``N`` blocks.

    In 1D each block is a list of half-open intervals ``[a, b)`` (the block
    reaching ``1`` on the interval also holds the point ``1``). In 2D blocks
    are unions of grid cells given by ``labels`` over ``grid``.
    """

    domain: Domain
    intervals: Optional[list] = None
    grid: Optional[Grid] = None
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.domain.dim == 1:
            if not self.intervals:
                raise PreconditionError("1D partitions are given by intervals")
            segs = sorted((a, b) for block in self.intervals for a, b in block)
            if segs[0][0] != 0 or segs[-1][1] != 1:
                raise PreconditionError("intervals must cover [0, 1]")
            for (a0, b0), (a1, b1) in zip(segs, segs[1:]):
                if abs(b0 - a1) > 1e-15:
                    raise PreconditionError("intervals must be disjoint and cover [0, 1]")
        else:
            if self.grid is None or self.labels is None or len(self.labels) != self.grid.size:
                raise PreconditionError("2D partitions need one label per grid cell")
            if self.grid.domain != self.domain:
                raise DomainError("partition grid belongs to another domain")

    @classmethod
    def from_breaks(cls, domain, breaks):
        """Blocks ``[b_i, b_{i+1})`` from increasing breakpoints in ``(0, 1)``."""
        b = [0.0, *map(float, breaks), 1.0]
        return cls(domain, intervals=[[(b[i], b[i + 1])] for i in range(len(b) - 1)])

    @property
    def n_blocks(self):
        return len(self.intervals) if self.domain.dim == 1 else int(self.labels.max()) + 1

    def masses(self):
        """Reference masses ``m(M_i)``."""
        if self.domain.dim == 1:
            xs, fs = self.domain.cdf_breaks()
            return np.array([sum(np.interp(b, xs, fs) - np.interp(a, xs, fs) for a, b in block)
                             for block in self.intervals])
        w = reference_weights(self.domain, self.grid)
        return np.bincount(self.labels, weights=w, minlength=self.n_blocks)

    def labels_of(self, points):
        if self.domain.dim == 1:
            x = np.atleast_1d(np.asarray(points, dtype=float))
            if self.domain.kind == CIRCLE:
                x = np.mod(x, 1.0)
            out = -np.ones(len(x), dtype=int)
            for k, block in enumerate(self.intervals):
                for a, b in block:
                    sel = (x >= a) & ((x < b) | ((b == 1.0) & (x <= 1.0)))
                    out[sel] = k
            return out
        return self.labels[self.grid.locate(points)]


def coarse_grain(mu, partition):
    """Vector ``(mu(M_1), ..., mu(M_N))``."""
    if mu.domain != partition.domain:
        raise DomainError("measure and partition live on different domains")
    n = partition.n_blocks
    if isinstance(mu, Empirical):
        mu = mu.as_discrete()
    if isinstance(mu, Discrete):
        return np.bincount(partition.labels_of(mu.atoms), weights=mu.weights, minlength=n)
    if isinstance(mu, GridDensity):
        if mu.domain.dim == 1:
            from .transport import as_graph
            return coarse_grain(as_graph(mu), partition)
        if mu.grid is not partition.grid and mu.grid.resolution != partition.grid.resolution:
            raise DomainError("grid density and partition use different grids")
        return np.bincount(partition.labels, weights=mu.node_masses, minlength=n)
    if isinstance(mu, GraphMeasure):
        out = np.zeros(n)
        for k, block in enumerate(partition.intervals):
            out[k] = sum(mu.mass(a, b, closed_right=(b == 1.0)) for a, b in block)
        if mu.domain.kind == CIRCLE:
            # an atom drawn at 1 is the atom at the base point 0
            tail = mu.ys[-1] - mu.cdf_left(1.0)
            if tail > 0:
                last = next(k for k, block in enumerate(partition.intervals)
                            if any(b == 1.0 for _, b in block))
                out[last] -= tail
                out[partition.labels_of([0.0])[0]] += tail
        return out
    raise PreconditionError(f"unsupported measure type {type(mu).__name__}")


def min_entropy_given_marginals(partition_or_masses, x):
    """Minimum of ``Ent(m | nu)`` over ``nu`` with ``nu(M_i) = x_i``.

    Attained at the piecewise-constant density ``x_i / m(M_i)`` on ``M_i``;
    the value is ``-sum_i m(M_i) log(x_i / m(M_i))`` and ``+inf`` when some
    block with positive reference mass gets ``x_i = 0``.
    """
    if isinstance(partition_or_masses, Partition):
        masses = partition_or_masses.masses()
    else:
        masses = np.asarray(partition_or_masses, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != masses.shape:
        raise PreconditionError("one marginal per block")
    if np.any(x < 0) or abs(x.sum() - 1) > WEIGHT_TOL:
        raise PreconditionError("marginals must lie in the simplex")
    pos = masses > 0
    if np.any(x[pos] == 0):
        return float("inf")
    return float(-np.sum(masses[pos] * np.log(x[pos] / masses[pos])))
