"""Relative entropies, the conjugation duality identity and Wasserstein distances."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog, minimize_scalar

from . import geometry

from .domain import CIRCLE, INTERVAL, reference_weights
from .errors import DomainError, PreconditionError, UnsupportedDomainError
from .measures import Discrete, Empirical, GraphMeasure, GridDensity
from .transport.one_dim import as_graph, cell_average_density


@dataclass(frozen=True)
class EntropyValue:
    value: float

    @property
    def finite(self):
        return bool(np.isfinite(self.value))

    def __float__(self):
        return float(self.value)


INF = EntropyValue(float("inf"))


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def relative_entropy(mu):
    """``Ent(mu | m) = int eta log eta dm`` (``+inf`` without a density)."""
    if isinstance(mu, GridDensity):
        return EntropyValue(float(mu.weights @ _xlogx(mu.values)))
    if isinstance(mu, GraphMeasure):
        if not mu.domain.is_uniform:
            raise UnsupportedDomainError("exact graph entropies assume uniform m")
        atoms, segs = mu.components()
        if len(atoms):
            return INF
        dx = segs[:, 1] - segs[:, 0]
        return EntropyValue(float(np.sum(segs[:, 2] * np.log(segs[:, 2] / dx))))
    if isinstance(mu, (Discrete, Empirical)):
        return INF
    raise PreconditionError(f"unsupported measure type {type(mu).__name__}")


def reverse_entropy(nu):
    """``Ent(m | nu) = -int log rho dm`` (``+inf`` if ``rho = 0`` on an ``m``-positive set)."""
    if isinstance(nu, GridDensity):
        w = nu.weights
        rho = nu.values
        if np.any((rho == 0) & (w > 0)):
            return INF
        pos = w > 0
        return EntropyValue(float(-np.sum(w[pos] * np.log(rho[pos]))))
    if isinstance(nu, GraphMeasure):
        if not nu.domain.is_uniform:
            raise UnsupportedDomainError("exact graph entropies assume uniform m")
        x0, x1, y0, y1 = nu.pieces()
        flat = (x1 > x0) & (y1 == y0)
        if np.any(flat):
            return INF
        seg = (x1 > x0)
        dx, dy = (x1 - x0)[seg], (y1 - y0)[seg]
        return EntropyValue(float(-np.sum(dx * np.log(dy / dx))))
    if isinstance(nu, (Discrete, Empirical)):
        return INF
    raise PreconditionError(f"unsupported measure type {type(nu).__name__}")


def conjugate_grid_density(mu):
    """Density of the conjugate of a 1D grid density, averaged on the same grid."""
    from .transport.one_dim import conjugate_measure_1d

    nu = conjugate_measure_1d(mu, keep_graph=True)
    return GridDensity(mu.grid, cell_average_density(nu, mu.grid))


def entropy_duality_gap(mu, eta_min=0.0):
    """``|Ent(mu^c | m) - Ent(m | mu)|`` with both sides by grid quadrature."""
    if not isinstance(mu, GridDensity) or mu.domain.dim != 1:
        raise UnsupportedDomainError("duality gap is computed for 1D grid densities")
    if np.min(mu.values) <= max(eta_min, 0.0):
        raise PreconditionError("density must be bounded away from zero")
    rho = conjugate_grid_density(mu)
    return abs(float(relative_entropy(rho)) - float(reverse_entropy(mu)))


# ---------------------------------------------------------------------------
# exact integrals of piecewise-linear functions

def _piece_values(ys, xs, a, b):
    """Values at ``a`` and ``b`` of the linear piece of ``u -> x`` covering ``(a, b)``."""
    mid = 0.5 * (a + b)
    i = np.clip(np.searchsorted(ys, mid, side="right") - 1, 0, len(ys) - 2)
    dy = ys[i + 1] - ys[i]
    slope = (xs[i + 1] - xs[i]) / np.where(dy > 0, dy, 1.0)
    return xs[i] + (a - ys[i]) * slope, xs[i] + (b - ys[i]) * slope


def _polyline_integrals(pa, pb, lo=0.0, hi=1.0):
    """``(int |f - g|^2, int |f - g|)`` over ``[lo, hi]`` for two monotone polylines.

    Each polyline is ``(u, x)`` with nondecreasing ``u``; repeated ``u`` are jumps.
    """
    ua, xa = pa
    ub, xb = pb
    u = np.unique(np.concatenate([ua, ub, [lo, hi]]))
    u = u[(u >= lo) & (u <= hi)]
    a, b = u[:-1], u[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    fa, fb = _piece_values(ua, xa, a, b)
    ga, gb = _piece_values(ub, xb, a, b)
    da, db = fa - ga, fb - gb
    h = b - a
    l2 = float(np.sum(h * (da * da + da * db + db * db) / 3.0))
    same = da * db >= 0
    denom = np.abs(da) + np.abs(db)
    l1 = np.where(same, h * (np.abs(da) + np.abs(db)) / 2.0,
                  h * (da * da + db * db) / (2.0 * np.where(denom > 0, denom, 1.0)))
    return l2, float(np.sum(l1))


def _quantile_polyline(mu):
    g = as_graph(mu)
    return g.ys, g.xs


def _periodic_quantile(g, shift=0.0):
    us = np.concatenate([g.ys + k for k in (-1, 0, 1)]) - shift
    xs = np.concatenate([g.xs + k for k in (-1, 0, 1)])
    return us, xs


def wasserstein_1d(mu, nu):
    """Quadratic Wasserstein distance on the interval or the circle.

    Interval: ``L^2`` distance of the quantile functions, exact for atomic and
    piecewise-uniform inputs. Circle: minimum over rotations ``theta`` of the
    ``L^2`` distance between ``F_mu^{-1}`` and ``(F_nu - theta)^{-1}``.
    """
    if mu.domain != nu.domain:
        raise DomainError("measures on different domains")
    if mu.domain.dim != 1:
        raise UnsupportedDomainError("wasserstein_1d needs a 1D domain")
    if mu.domain.kind == INTERVAL:
        l2, _ = _polyline_integrals(_quantile_polyline(mu), _quantile_polyline(nu))
        return float(np.sqrt(max(l2, 0.0)))
    ga, gb = as_graph(mu), as_graph(nu)
    pa = _periodic_quantile(ga)

    def cost(theta):
        return _polyline_integrals(pa, _periodic_quantile(gb, theta))[0]

    best = minimize_scalar(cost, bounds=(-1.0, 1.0), method="bounded", options={"xatol": 1e-12})
    grid = np.linspace(-1, 1, 41)
    vals = [cost(t) for t in grid]
    start = grid[int(np.argmin(vals))]
    local = minimize_scalar(cost, bounds=(start - 0.05, start + 0.05), method="bounded",
                            options={"xatol": 1e-13})
    return float(np.sqrt(max(min(best.fun, local.fun, min(vals)), 0.0)))


def map_distances_1d(g1, g2):
    """``(int |g1 - g2|^2 dm, int |g1 - g2| dm)`` for completed monotone graphs."""
    return _polyline_integrals((g1.xs, g1.ys), (g2.xs, g2.ys))


# ---------------------------------------------------------------------------
# 2D

def wasserstein_2d_upper(g1, g2, grid):
    """Coupling bound ``(int |g1 - g2|^2 dm)^(1/2)`` on the nodes of ``grid``.

    An upper bound on the Wasserstein distance between the pushforwards,
    not the distance itself (equality only holds in 1D).
    """
    a = g1.evaluate(grid.nodes)
    b = g2.evaluate(grid.nodes)
    if a.shape != b.shape:
        raise DomainError("maps evaluated on mismatched grids")
    w = reference_weights(grid.domain, grid)
    d2 = np.sum((a - b) ** 2, axis=1) if a.ndim == 2 else (a - b) ** 2
    return float(np.sqrt(w @ d2))


def wasserstein_empirical(a, b):
    """Exact quadratic distance between two equal-size uniform point clouds."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise PreconditionError("clouds must have the same size")
    a2 = a.reshape(len(a), -1)
    b2 = b.reshape(len(b), -1)
    cost = np.sum((a2[:, None, :] - b2[None, :, :]) ** 2, axis=2)
    r, c = linear_sum_assignment(cost)
    return float(np.sqrt(cost[r, c].mean()))


def wasserstein_2d_estimate(mu, nu, rng, max_points=512):
    """Assignment distance between subsamples of two empirical clouds (test utility)."""
    pa = mu.points if isinstance(mu, Empirical) else mu
    pb = nu.points if isinstance(nu, Empirical) else nu
    k = min(max_points, len(pa), len(pb))
    ia = rng.choice(len(pa), size=k, replace=False)
    ib = rng.choice(len(pb), size=k, replace=False)
    return wasserstein_empirical(pa[ia], pb[ib])


def laguerre_coupling_cost(t1, t2):
    """Exact ``int |g1 - g2|^2 dm`` for the cell-constant maps of two tessellations."""
    from .transport.semidiscrete import cell_mass

    total = 0.0
    for a, za in zip(t1.cells, t1.sites):
        if len(a) == 0:
            continue
        for b, zb in zip(t2.cells, t2.sites):
            if len(b) == 0:
                continue
            piece = geometry.clip_convex(a, b)
            if len(piece):
                total += cell_mass(t1.domain, piece) * float(np.sum((za - zb) ** 2))
    return total


def discrete_wasserstein(mu, nu):
    """Quadratic distance between two small discrete measures by linear programming."""
    x = mu.atoms.reshape(len(mu), -1)
    y = nu.atoms.reshape(len(nu), -1)
    cost = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=2)
    n, k = cost.shape
    rows = np.kron(np.eye(n), np.ones(k))
    cols = np.kron(np.ones(n), np.eye(k))
    res = linprog(cost.ravel(), A_eq=np.vstack([rows, cols]),
                  b_eq=np.concatenate([mu.weights, nu.weights]), bounds=(0, None), method="highs")
    if not res.success:
        raise PreconditionError(f"transport LP failed: {res.message}")
    return float(np.sqrt(max(res.fun, 0.0)))


def conjugation_continuity_probe(mu_seq, mu_limit):
    """``d_W(mu_n^c, mu^c)`` along a 1D sequence."""
    from .transport.one_dim import conjugate_measure_1d

    lim = conjugate_measure_1d(mu_limit, keep_graph=True)
    return np.array([wasserstein_1d(conjugate_measure_1d(m, keep_graph=True), lim) for m in mu_seq])


def is_circle(mu):
    return mu.domain.kind == CIRCLE
