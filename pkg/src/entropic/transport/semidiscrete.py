"""Semi-discrete transport on convex polygons.

For a discrete target ``mu = sum_i lambda_i delta_{z_i}`` the Brenier
potential is ``phi_1(x) = max_i [<z_i, x> + alpha_i]`` and the map sends the
Laguerre cell ``A_i = {x : <z_i, x> + alpha_i maximal}`` to ``z_i``. The
offsets ``alpha`` maximize the concave dual

    F(alpha) = sum_i lambda_i alpha_i - int max_i [<z_i, x> + alpha_i] dm(x),

whose gradient is ``lambda_i - m(A_i)``. The Hessian is minus a weighted graph
Laplacian over adjacent cells, with edge weight ``int_{A_i cap A_j} sigma ds /
|z_i - z_j|``; we run damped Newton on it and fall back to gradient ascent
with Armijo backtracking when the Newton system is unusable.

``alpha`` is the offset of the affine pieces; the equivalent power-diagram
weights ``w_i = 2 alpha_i + |z_i|^2`` (cells ``|x - z_i|^2 - w_i`` minimal)
are also reported. Both are gauge-fixed so that the first entry is 0.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .. import geometry
from ..domain import POLYGON
from ..errors import DomainError, PreconditionError, SolverError, UnsupportedDomainError
from ..measures import Discrete, Empirical

ALL_PAIRS_MAX = 64


@dataclass(frozen=True, eq=False)
class Tessellation:
    domain: object
    sites: np.ndarray
    alpha: np.ndarray
    cells: list
    masses: np.ndarray
    residual: float = float("nan")
    iterations: int = 0
    history: list = field(default_factory=list, repr=False)

    @property
    def weights(self):
        """Power-diagram weights, gauge ``w_0 = 0``."""
        w = 2 * self.alpha + np.sum(self.sites ** 2, axis=1)
        return w - w[0]

    def assign(self, points):
        """Index of the cell containing each point (lowest index on ties)."""
        pts = np.atleast_2d(points)
        out = np.empty(len(pts), dtype=int)
        step = max(1, 4_000_000 // len(self.sites))
        for s in range(0, len(pts), step):
            out[s:s + step] = np.argmax(pts[s:s + step] @ self.sites.T + self.alpha, axis=1)
        return out

    def potential(self, points):
        """``phi_1(x) = max_i [<z_i, x> + alpha_i]``."""
        pts = np.atleast_2d(points)
        return np.max(pts @ self.sites.T + self.alpha, axis=1)

    def skeleton(self):
        """Segments ``(a, b)`` of all cell edges (including the domain boundary)."""
        a, b = [], []
        for c in self.cells:
            if len(c):
                a.append(c)
                b.append(np.roll(c, -1, axis=0))
        return np.concatenate(a), np.concatenate(b)

    def vertices(self):
        """Distinct vertices of all nonempty cells."""
        pts = np.concatenate([c for c in self.cells if len(c)])
        key = np.round(pts, 12)
        _, idx = np.unique(key, axis=0, return_index=True)
        return pts[np.sort(idx)]

    def to_json(self):
        return {
            "sites": self.sites.tolist(),
            "alpha": self.alpha.tolist(),
            "weights": self.weights.tolist(),
            "cells": [np.asarray(c).tolist() for c in self.cells],
            "masses": self.masses.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _check_inputs(domain, sites):
    if domain.kind != POLYGON:
        raise UnsupportedDomainError("Laguerre tessellations are built on polygon domains")
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(sites) == 0:
        raise PreconditionError("no sites")
    if not np.all(domain.contains(sites)):
        raise DomainError("sites must lie in the domain")
    if len(np.unique(np.round(sites, 14), axis=0)) != len(sites):
        raise PreconditionError("duplicate sites")
    return sites


def _candidates(sites, alpha):
    """Possible neighbours of each cell.

    All pairs for small problems; otherwise the edges of the lower convex
    hull of the lifted points ``(z_i, -alpha_i)``.
    """
    n = len(sites)
    if n <= ALL_PAIRS_MAX:
        return [np.delete(np.arange(n), i) for i in range(n)]
    lifted = np.column_stack([sites, -alpha])
    try:
        hull = ConvexHull(lifted)
    except QhullError:
        return [np.delete(np.arange(n), i) for i in range(n)]
    nb = [set() for _ in range(n)]
    for simplex, eq in zip(hull.simplices, hull.equations):
        if eq[2] < 0:
            for a in simplex:
                nb[a].update(int(b) for b in simplex if b != a)
    # sites off the lower hull have empty cells; clip them against everything
    return [np.array(sorted(s), dtype=int) if s else np.delete(np.arange(n), i)
            for i, s in enumerate(nb)]


def cell_mass(domain, cell):
    """Reference mass ``m(cell)`` by exact clipping against sigma cells."""
    if len(cell) == 0:
        return 0.0
    if domain.sigma is None:
        return geometry.area(cell) / domain.volume
    s = domain.sigma
    k = s.shape[0]
    lo, hi = domain.bbox
    h = (hi - lo) / k
    cmin, cmax = cell.min(axis=0), cell.max(axis=0)
    i0, j0 = np.clip(np.floor((cmin - lo) / h).astype(int), 0, k - 1)
    i1, j1 = np.clip(np.floor((cmax - lo) / h).astype(int), 0, k - 1)
    total = 0.0
    for iy in range(j0, j1 + 1):
        for ix in range(i0, i1 + 1):
            if s[iy, ix] == 0:
                continue
            x0, y0 = lo + h * np.array([ix, iy])
            sq = np.array([[x0, y0], [x0 + h[0], y0], [x0 + h[0], y0 + h[1]], [x0, y0 + h[1]]])
            total += s[iy, ix] * geometry.area(geometry.clip_convex(sq, cell))
    return total


def laguerre_cells(domain, sites, alpha, masses=True):
    """Cells ``M cap {x : <z_i - z_j, x> >= alpha_j - alpha_i for all j}``.

    Returns a :class:`Tessellation` (without solver metadata). Empty cells
    are legal and come back as ``(0, 2)`` arrays with mass 0.
    """
    sites = _check_inputs(domain, sites)
    alpha = np.asarray(alpha, dtype=float)
    cand = _candidates(sites, alpha)
    cells = []
    for i in range(len(sites)):
        poly = domain.vertices
        for j in cand[i]:
            poly = geometry.clip_halfplane(poly, sites[i] - sites[j], alpha[j] - alpha[i])
            if len(poly) == 0:
                break
        cells.append(poly)
    m = np.array([cell_mass(domain, c) for c in cells]) if masses else np.full(len(cells), np.nan)
    return Tessellation(domain, sites, alpha, cells, m)


def _edge_weights(domain, tess, cand):
    """Hessian weights ``int_{edge ij} sigma ds / |z_i - z_j|`` as triplets."""
    rows, cols, vals = [], [], []
    sites, alpha = tess.sites, tess.alpha
    scale = max(1.0, float(np.max(np.abs(sites))))
    for i, cell in enumerate(tess.cells):
        if len(cell) < 3:
            continue
        nxt = np.roll(cell, -1, axis=0)
        for j in cand[i]:
            if j <= i or len(tess.cells[j]) < 3:
                continue
            dz = sites[i] - sites[j]
            off = alpha[j] - alpha[i]
            tol = 1e-10 * scale * (1 + np.linalg.norm(dz))
            on_a = np.abs(cell @ dz - off) <= tol
            on_b = np.abs(nxt @ dz - off) <= tol
            both = on_a & on_b
            if not np.any(both):
                continue
            a, b = cell[both], nxt[both]
            seg = b - a
            length = np.linalg.norm(seg, axis=1)
            if domain.sigma is None:
                w = length.sum() / domain.volume
            else:
                t = (np.arange(8) + 0.5) / 8
                pts = (a[:, None, :] + t[None, :, None] * seg[:, None, :]).reshape(-1, 2)
                sig = domain.sigma_at(pts).reshape(len(a), 8).mean(axis=1)
                w = float(np.sum(sig * length))
            if w <= 0:
                continue
            c = w / np.linalg.norm(dz)
            rows += [i, j]
            cols += [j, i]
            vals += [c, c]
    return rows, cols, vals


def _dual_objective(domain, tess, lam):
    """``F(alpha)``; the integral of ``phi_1`` is exact for uniform sigma."""
    total = 0.0
    for i, cell in enumerate(tess.cells):
        if len(cell) < 3:
            continue
        if domain.sigma is None:
            m = geometry.area(cell) / domain.volume
            total += m * (tess.sites[i] @ geometry.centroid(cell) + tess.alpha[i])
        else:
            m = tess.masses[i]
            total += m * (tess.sites[i] @ geometry.centroid(cell) + tess.alpha[i])
    return float(lam @ tess.alpha - total)


def semidiscrete_weights(domain, sites, masses, tol=1e-9, max_iter=100, replay=None):
    """Offsets ``alpha`` such that ``m(A_i) = lambda_i`` within ``tol``.

    Damped Newton (step halved until every cell keeps at least half of the
    smallest initial mass and the residual decreases), gradient ascent with
    Armijo backtracking as fallback. Raises :class:`SolverError` with the
    last residual if the cap is reached.
    """
    sites = _check_inputs(domain, sites)
    lam = np.asarray(masses, dtype=float).ravel()
    if len(lam) != len(sites):
        raise PreconditionError("one mass per site")
    if np.any(lam <= 0) or abs(lam.sum() - 1) > 1e-10:
        raise PreconditionError("masses must be positive and sum to 1")
    n = len(sites)
    if n == 1:
        t = laguerre_cells(domain, sites, np.zeros(1))
        return Tessellation(domain, sites, np.zeros(1), t.cells, t.masses, abs(1 - t.masses[0]), 0)

    alpha = -0.5 * np.sum(sites ** 2, axis=1)
    alpha -= alpha[0]
    tess = laguerre_cells(domain, sites, alpha)
    grad = lam - tess.masses
    res = float(np.max(np.abs(grad)))
    floor = 0.5 * min(lam.min(), tess.masses.min())
    history = [res]
    it = 0
    while res > tol and it < max_iter:
        it += 1
        step = _newton_direction(domain, tess, grad)
        accepted = False
        if step is not None:
            tau = 1.0
            norm0 = np.linalg.norm(grad)
            while tau > 1e-12:
                trial = laguerre_cells(domain, sites, alpha + tau * step)
                g_t = lam - trial.masses
                if trial.masses.min() >= floor and np.linalg.norm(g_t) <= (1 - tau / 2) * norm0:
                    accepted = True
                    break
                tau *= 0.5
        if not accepted:
            trial, g_t = _armijo_step(domain, tess, lam, grad)
            if trial is None:
                break
        alpha = trial.alpha - trial.alpha[0]
        tess = Tessellation(domain, sites, alpha, trial.cells, trial.masses)
        grad = g_t
        res = float(np.max(np.abs(grad)))
        history.append(res)
    if res > tol:
        raise SolverError(f"semi-discrete solve stopped at residual {res:.3e} after {it} iterations",
                          residual=res, replay=replay or {"sites": sites.tolist(), "masses": lam.tolist()})
    return Tessellation(domain, sites, alpha, tess.cells, tess.masses, res, it, history)


def _newton_direction(domain, tess, grad):
    cand = _candidates(tess.sites, tess.alpha)
    rows, cols, vals = _edge_weights(domain, tess, cand)
    n = len(tess.sites)
    L = np.zeros((n, n))
    np.add.at(L, (rows, cols), -np.asarray(vals))
    L[np.diag_indices(n)] = -L.sum(axis=1)
    red = L[1:, 1:]
    try:
        cond = np.linalg.cond(red)
        if not np.isfinite(cond) or cond > 1e13:
            return None
        d = np.linalg.solve(red, grad[1:])
    except np.linalg.LinAlgError:
        return None
    return np.concatenate([[0.0], d])


def _armijo_step(domain, tess, lam, grad):
    f0 = _dual_objective(domain, tess, lam)
    g2 = float(grad @ grad)
    t = 1.0
    while t > 1e-14:
        trial = laguerre_cells(domain, tess.sites, tess.alpha + t * grad)
        if _dual_objective(domain, trial, lam) >= f0 + 1e-4 * t * g2:
            return trial, lam - trial.masses
        t *= 0.5
    return None, grad


# ---------------------------------------------------------------------------
# maps and conjugate measures

@dataclass(frozen=True, eq=False)
class LaguerreMap:
    """Transport map sending each Laguerre cell to its site."""

    tessellation: Tessellation

    def evaluate(self, points):
        t = self.tessellation
        return t.sites[t.assign(points)]


@dataclass(frozen=True, eq=False)
class GridMap:
    """Target point per grid node (e.g. from a Legendre-Fenchel argmax)."""

    grid: object
    targets: np.ndarray

    def evaluate(self, points=None):
        if points is None:
            return self.targets
        return self.targets[self.grid.locate(points)]


def brenier_map_discrete(domain, mu, tol=1e-9, max_iter=100, replay=None):
    """Monotone map ``m -> mu`` for discrete ``mu`` and its affine-max potential.

    Returns ``(LaguerreMap, tessellation)``; the potential is
    ``tessellation.potential``.
    """
    if not isinstance(mu, Discrete):
        raise PreconditionError("semi-discrete transport needs a discrete target")
    tess = semidiscrete_weights(domain, mu.atoms, mu.weights, tol=tol, max_iter=max_iter, replay=replay)
    return LaguerreMap(tess), tess


def legendre_vertices(tess):
    """Vertices of the tessellation with the potential ``phi_1`` on them.

    ``psi_1(y) = max_x [<x, y> - phi_1(x)]`` is attained at one of these,
    since ``<x, y> - phi_1(x)`` is affine on each cell.
    """
    v = tess.vertices()
    return v, tess.potential(v)


def conjugate_map_2d(tess, points):
    """``f(y) = argmax_{x in M} [<x, y> - phi_1(x)]`` for each point ``y``."""
    v, pv = legendre_vertices(tess)
    pts = np.atleast_2d(points)
    out = np.empty_like(pts)
    step = max(1, 4_000_000 // len(v))
    for s in range(0, len(pts), step):
        a = np.argmax(pts[s:s + step] @ v.T - pv, axis=1)
        out[s:s + step] = v[a]
    return out


def conjugate_measure_2d(domain, mu, n_samples, rng, tess=None, **solver):
    """Empirical cloud of ``n_samples`` points approximating the conjugate measure.

    Points ``y ~ m`` are mapped through the gradient of the Legendre
    transform of the Brenier potential; images are tessellation vertices.
    Returns ``(Empirical, Tessellation)``.
    """
    if tess is None:
        _, tess = brenier_map_discrete(domain, mu, **solver)
    y = domain.sample(rng, int(n_samples))
    return Empirical(domain, conjugate_map_2d(tess, y)), tess
