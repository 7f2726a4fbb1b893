"""Exact conjugation on the interval and the circle.

On ``[0, 1]`` the Brenier map pushing ``m`` to ``mu`` is the right inverse of
the distribution function (after the change of variable ``F_m``), and the
conjugate measure is the one whose distribution function is that map.
Everything runs on completed graphs of monotone functions, so discrete and
piecewise-uniform inputs are handled exactly.

On the circle the monotone maps pushing uniform ``m`` to ``mu`` are the
lifted quantile functions shifted by a rotation ``theta``; the transport cost
``int (G(y + theta) - y)^2 dy`` is a strictly convex quadratic in ``theta``
minimized at ``theta = 1/2 - mean(mu)`` (mean taken in the lift ``[0, 1)``).
The conjugate measure is the interval conjugate rotated by ``-theta``.
"""

from dataclasses import dataclass

import numpy as np

from ..domain import CIRCLE, INTERVAL, Grid
from ..errors import PreconditionError, UnsupportedDomainError
from ..measures import Discrete, Empirical, GraphMeasure, GridDensity, _interp_piece


# ---------------------------------------------------------------------------
# monotone functions on [0, 1]

@dataclass(frozen=True, eq=False)
class MonotoneGraph:
    """Completed graph of a nondecreasing ``[0, 1] -> [0, 1]`` function.

    ``side='right'`` evaluates the right-continuous version (distribution
    functions), ``side='left'`` the left-continuous one (right inverses).
    """

    xs: np.ndarray
    ys: np.ndarray
    side: str = "right"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs, ys = self.xs, self.ys
        if self.side == "right":
            i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
            return _interp_piece(xs, ys, i, x)
        i = np.clip(np.searchsorted(xs, x, side="left"), 1, len(xs) - 1)
        return _interp_piece(xs, ys, i - 1, x, anchor_right=True)


def cdf_1d(mu):
    """Distribution function ``x -> mu([0, x])`` (base point 0 on the circle)."""
    g = as_graph(mu)
    return MonotoneGraph(g.xs, g.ys, "right")


def right_inverse_1d(f, resolution=None):
    """Right inverse ``y -> inf{x >= 0 : f(x) >= y}``.

    ``f`` is either a :class:`MonotoneGraph` (inverted exactly by swapping the
    graph) or any vectorized nondecreasing callable with ``f(1) = 1``, which
    is inverted by bisection to machine precision.
    """
    if isinstance(f, MonotoneGraph):
        return MonotoneGraph(f.ys, f.xs, "left" if f.side == "right" else "right")

    def g(y):
        y = np.asarray(y, dtype=float)
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            ok = np.asarray(f(mid)) >= y
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        return np.where(np.asarray(f(np.zeros_like(y))) >= y, 0.0, hi)

    return g


# ---------------------------------------------------------------------------
# conversion of 1D measures to graphs

def as_graph(mu):
    """Completed distribution-function graph of a 1D measure."""
    if isinstance(mu, GraphMeasure):
        return mu
    if mu.domain.dim != 1:
        raise UnsupportedDomainError("distribution functions only exist in 1D")
    if isinstance(mu, Empirical):
        mu = mu.as_discrete()
    if isinstance(mu, Discrete):
        x = mu.atoms
        c = np.cumsum(mu.weights)
        c[-1] = 1.0
        xs = np.concatenate([[0.0], np.repeat(x, 2), [1.0]])
        ys = np.concatenate([[0.0], np.column_stack([np.concatenate([[0.0], c[:-1]]), c]).ravel(), [1.0]])
        return GraphMeasure(mu.domain, xs, ys)
    if isinstance(mu, GridDensity):
        return _grid_density_graph(mu)
    raise PreconditionError(f"unsupported measure type {type(mu).__name__}")


def _grid_density_graph(mu):
    """Each node's mass spread uniformly over its dual cell."""
    grid = mu.grid
    h = grid.spacing
    mass = mu.node_masses
    if grid.domain.kind == INTERVAL:
        edges = np.concatenate([[0.0], grid.nodes[:-1] + h / 2, [1.0]])
        cell_mass = mass
    else:
        edges = np.concatenate([[0.0], grid.nodes + h / 2, [1.0]])
        cell_mass = np.concatenate([[mass[0] / 2], mass[1:], [mass[0] / 2]])
    ys = np.concatenate([[0.0], np.cumsum(cell_mass)])
    ys /= ys[-1]
    ys[-1] = 1.0
    return GraphMeasure(grid.domain, edges, ys)


def simplify(graph):
    """Return a :class:`Discrete` when the graph is purely atomic."""
    if graph.is_atomic:
        pos, mass = graph.atoms()
        return Discrete(graph.domain, pos, mass / mass.sum())
    return graph


def mean_position(graph):
    atoms, segs = graph.components()
    return float(np.sum(atoms[:, 0] * atoms[:, 1]) + np.sum(0.5 * (segs[:, 0] + segs[:, 1]) * segs[:, 2]))


def _canonical_circle(graph):
    """Move an atom drawn at ``x = 1`` to the base point ``0``."""
    atoms, segs = graph.components()
    if len(atoms) and atoms[-1, 0] == 1.0:
        atoms = atoms.copy()
        atoms[-1, 0] = 0.0
        return GraphMeasure.from_components(graph.domain, atoms, segs)
    return graph


def rotate(graph, shift):
    """Push a circle measure forward under ``x -> x + shift (mod 1)``."""
    atoms, segs = graph.components()
    a = atoms.copy()
    a[:, 0] = np.mod(a[:, 0] + shift, 1.0)
    a[a[:, 0] >= 1.0, 0] = 0.0
    out = []
    for lo, hi, m in segs:
        lo2 = lo + shift
        k = np.floor(lo2)
        lo2 -= k
        hi2 = hi + shift - k
        if hi2 <= 1.0:
            out.append((lo2, hi2, m))
        else:
            frac = (1.0 - lo2) / (hi2 - lo2)
            out.append((lo2, 1.0, m * frac))
            out.append((0.0, hi2 - 1.0, m * (1 - frac)))
    return _canonical_circle(GraphMeasure.from_components(graph.domain, a, out))


def _refine_segments(segs, breaks):
    """Split uniform segments at the given breakpoints (mass by length)."""
    out = []
    for lo, hi, m in segs:
        inner = breaks[(breaks > lo) & (breaks < hi)]
        pts = np.concatenate([[lo], inner, [hi]])
        for a, b in zip(pts[:-1], pts[1:]):
            out.append((a, b, m * (b - a) / (hi - lo)))
    return np.array(out).reshape(-1, 3)


def _change_variable(graph, xs_from, xs_to):
    """Push a graph measure through the piecewise-linear map ``xs_from -> xs_to``."""
    atoms, segs = graph.components()
    segs = _refine_segments(segs, xs_from)
    a = atoms.copy()
    a[:, 0] = np.interp(a[:, 0], xs_from, xs_to)
    s = segs.copy()
    s[:, 0] = np.interp(s[:, 0], xs_from, xs_to)
    s[:, 1] = np.interp(s[:, 1], xs_from, xs_to)
    return GraphMeasure.from_components(graph.domain, a, s)


def circle_shift(mu):
    """Optimal rotation ``theta`` of the lifted quantile map on the circle."""
    return 0.5 - mean_position(_canonical_circle(as_graph(mu)))


# ---------------------------------------------------------------------------
# conjugation

def conjugate_measure_1d(mu, keep_graph=False):
    """Conjugate measure of a 1D measure.

    Returns a :class:`Discrete` when the result is purely atomic, otherwise a
    :class:`GraphMeasure` (``keep_graph=True`` always returns the graph).
    """
    domain = mu.domain
    if domain.dim != 1:
        raise UnsupportedDomainError("use the semi-discrete path for planar domains")
    graph = as_graph(mu)
    if domain.kind == INTERVAL:
        if domain.is_uniform:
            out = graph.swapped()
        else:
            xs, fs = domain.cdf_breaks()
            flat = _change_variable(graph, xs, fs)
            out = _change_variable(flat.swapped(), fs, xs)
    else:
        if not domain.is_uniform:
            raise UnsupportedDomainError("circle conjugation is implemented for uniform m only")
        graph = _canonical_circle(graph)
        theta = 0.5 - mean_position(graph)
        out = rotate(_canonical_circle(graph.swapped()), -theta)
    return out if keep_graph else simplify(out)


@dataclass(frozen=True, eq=False)
class Grid1DMap:
    """Monotone map sampled at the nodes of a 1D grid.

    On the circle ``values`` are the lifted (unreduced) images, so
    ``values - nodes`` is the signed displacement.
    """

    grid: Grid
    values: np.ndarray

    def images(self):
        v = np.asarray(self.values, dtype=float)
        return np.mod(v, 1.0) if self.grid.domain.kind == CIRCLE else v

    def evaluate(self, points=None):
        if points is None:
            return self.images()
        return np.interp(points, self.grid.nodes, self.images())

    def to_csv_rows(self):
        return [(float(x), float(y)) for x, y in zip(self.grid.nodes, self.images())]


def brenier_map_1d(mu, grid):
    """Monotone map pushing ``m`` to ``mu``, evaluated at the grid nodes."""
    domain = mu.domain
    graph = as_graph(mu)
    y = grid.nodes
    if domain.kind == INTERVAL:
        xs, fs = domain.cdf_breaks()
        u = np.interp(y, xs, fs)
        q = MonotoneGraph(graph.ys, graph.xs, "left")
        return Grid1DMap(grid, q(u))
    if not domain.is_uniform:
        raise UnsupportedDomainError("circle transport is implemented for uniform m only")
    graph = _canonical_circle(graph)
    theta = 0.5 - mean_position(graph)
    u = y + theta
    k = np.floor(u)
    q = MonotoneGraph(graph.ys, graph.xs, "left")
    return Grid1DMap(grid, q(u - k) + k)


def pushforward_1d(values, domain):
    """Pushforward of uniform ``m`` under the piecewise-linear monotone map
    through ``(linspace(0, 1, n), values)`` on the interval."""
    v = np.asarray(values, dtype=float)
    if domain.kind != INTERVAL or not domain.is_uniform:
        raise UnsupportedDomainError("piecewise-linear pushforward needs the uniform interval")
    if np.any(np.diff(v) < 0) or v[0] < 0 or v[-1] > 1:
        raise PreconditionError("map must be nondecreasing into [0, 1]")
    nodes = np.linspace(0.0, 1.0, len(v))
    # completed graph of the map, swapped, is the distribution function
    xs = np.concatenate([[0.0], v, [1.0]])
    ys = np.concatenate([[0.0], nodes, [1.0]])
    return GraphMeasure(domain, xs, ys)


def conjugate_map_graph(values):
    """Completed graph of the generalized inverse of a grid monotone map."""
    v = np.asarray(values, dtype=float)
    nodes = np.linspace(0.0, 1.0, len(v))
    return MonotoneGraph(np.concatenate([[0.0], v, [1.0]]), np.concatenate([[0.0], nodes, [1.0]]), "left")


def density_reciprocity_check(mu):
    """Residual of ``eta(x) rho(f(x)) = rho(x) eta(g(x)) = 1`` on interior nodes.

    ``mu`` is a :class:`GridDensity` on the uniform interval with positive
    density. ``rho`` is the conjugate's density averaged over each node's
    dual cell; off-node evaluations interpolate linearly between nodes.
    """
    if not isinstance(mu, GridDensity) or mu.domain.kind != INTERVAL:
        raise UnsupportedDomainError("reciprocity check runs on interval grid densities")
    if not mu.domain.is_uniform:
        raise UnsupportedDomainError("reciprocity check assumes uniform m")
    eta = mu.values
    if np.min(eta) <= 0:
        raise PreconditionError("density must be bounded away from 0")
    grid = mu.grid
    nodes = grid.nodes
    graph = as_graph(mu)
    nu = graph.swapped()
    rho = cell_average_density(nu, grid)
    g = MonotoneGraph(graph.ys, graph.xs, "left")     # Brenier map of mu
    f = MonotoneGraph(graph.xs, graph.ys, "right")    # its conjugate
    inner = slice(1, -1)
    x = nodes[inner]
    r1 = np.abs(eta[inner] * np.interp(f(x), nodes, rho) - 1.0)
    r2 = np.abs(rho[inner] * np.interp(g(x), nodes, eta) - 1.0)
    return float(max(r1.max(), r2.max()))


def cell_average_density(graph, grid):
    """Density of a graph measure w.r.t. ``m`` averaged over dual cells."""
    from ..domain import reference_weights

    h = grid.spacing
    if grid.domain.kind == INTERVAL:
        lo = np.maximum(grid.nodes - h / 2, 0.0)
        hi = np.minimum(grid.nodes + h / 2, 1.0)
        mass = graph.cdf(hi) - graph.cdf(lo)
        mass[0] = graph.cdf(hi[0])
    else:
        lo = grid.nodes - h / 2
        hi = grid.nodes + h / 2
        mass = graph.cdf(np.minimum(hi, 1.0)) - graph.cdf(np.maximum(lo, 0.0))
        mass[0] = graph.cdf(h / 2) + 1.0 - graph.cdf(1.0 - h / 2)
    w = reference_weights(grid.domain, grid)
    return mass / w
