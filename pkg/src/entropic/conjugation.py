"""The c-transform for the cost ``d^2 / 2`` on grid-sampled potentials.

``c_transform(phi)(x_j) = -min_i [d(x_j, y_i)^2 / 2 + phi(y_i)]`` with the
minimum over grid nodes. For a ``D``-Lipschitz ``phi`` and a grid that is an
``eps``-covering, this differs from the continuous transform by at most
``2 D eps`` uniformly; :func:`discretization_floor` returns that number.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domain import CIRCLE, INTERVAL, POLYGON, Grid, diameter, pairwise_distance, reference_weights
from .errors import ConfigurationError, PreconditionError, UnsupportedDomainError

_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True, eq=False)
class Potential:
    grid: Grid
    values: np.ndarray
    c_convex_verified: bool = False
    _origin: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise PreconditionError("one potential value per grid node required")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("potential values must be finite")
        object.__setattr__(self, "values", v)

    def __add__(self, c):
        return Potential(self.grid, self.values + c)

    def __neg__(self):
        return Potential(self.grid, -self.values)

    def to_json(self):
        return {"grid": self.grid.to_json(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(Grid.from_json(obj["grid"]), np.asarray(obj["values"], dtype=float))


@dataclass(frozen=True, eq=False)
class PotentialClass(Potential):
    """Representative of a potential modulo constants with zero ``m``-mean."""


def discretization_floor(grid):
    """Sup-norm error bound ``2 D eps`` of one discrete transform."""
    return 2.0 * diameter(grid.domain) * grid.eps


def _min_plus(grid, values, xs=None):
    """``(min_i [d(x_j, y_i)^2/2 + values_i], argmin_i)`` for each target ``x_j``.

    Scans targets in fixed-size chunks; argmin ties resolve to the lowest
    node index.
    """
    ys = grid.nodes
    xs = ys if xs is None else xs
    n_y = len(ys)
    step = max(1, _CHUNK_ENTRIES // n_y)
    best = np.empty(len(xs))
    arg = np.empty(len(xs), dtype=int)
    for s in range(0, len(xs), step):
        x = xs[s:s + step]
        if grid.domain.kind == POLYGON:
            d = pairwise_distance(grid.domain, x[:, None, :], ys[None, :, :])
        else:
            d = pairwise_distance(grid.domain, x[:, None], ys[None, :])
        cost = 0.5 * d * d + values[None, :]
        a = np.argmin(cost, axis=1)
        arg[s:s + step] = a
        best[s:s + step] = cost[np.arange(len(x)), a]
    return best, arg


def c_transform(phi, method="brute"):
    """Discrete conjugate of ``phi`` on its own grid.

    ``method='fast'`` uses the linear-time convex-hull sweep (1D only; the
    circle is handled by lifting nodes to three periods).
    """
    if method == "fast":
        kind = phi.grid.domain.kind
        if kind == POLYGON:
            raise UnsupportedDomainError("the fast transform runs on 1D domains only")
        x = phi.grid.nodes
        y, v = x, phi.values
        if kind == CIRCLE:
            # circle distance is the minimum over the lifts y + k
            y = np.concatenate([x - 1.0, x, x + 1.0])
            v = np.tile(v, 3)
        # phi^c(x) = -x^2/2 + max_y [x y - (phi(y) + y^2/2)]
        lf, _ = _legendre_1d_sorted(y, v + 0.5 * y * y, x)
        return Potential(phi.grid, lf - 0.5 * x * x)
    if method != "brute":
        raise ConfigurationError(f"unknown method {method!r}")
    best, _ = _min_plus(phi.grid, phi.values)
    return Potential(phi.grid, -best)


def c_transform_argmin(phi):
    """Index of the minimizing node for each output node."""
    return _min_plus(phi.grid, phi.values)[1]


def _legendre_1d_sorted(points, values, slopes):
    """``max_i [s_j p_i - v_i]`` for increasing ``points`` and ``slopes``.

    Builds the lower convex hull of ``(p_i, v_i)`` and sweeps a pointer along
    it as the slope grows. Returns values and maximizing point indices.
    """
    hull = []
    for i in range(len(points)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (points[i1] - points[i0]) * (values[i] - values[i0]) - \
                (values[i1] - values[i0]) * (points[i] - points[i0])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    hull = np.array(hull)
    hp, hv = points[hull], values[hull]
    out = np.empty(len(slopes))
    arg = np.empty(len(slopes), dtype=int)
    k = 0
    for j, s in enumerate(slopes):
        while k + 1 < len(hull) and s * hp[k + 1] - hv[k + 1] >= s * hp[k] - hv[k]:
            k += 1
        out[j] = s * hp[k] - hv[k]
        arg[j] = hull[k]
    return out, arg


def is_c_convex(phi, tol):
    """Whether ``||C(C(phi)) - phi||_inf <= tol``.

    ``tol`` must be at least twice the discretization floor, below which the
    test cannot distinguish discretization error from non-convexity.
    """
    floor = 2 * discretization_floor(phi.grid)
    if tol < floor:
        raise ConfigurationError(f"tol {tol:g} below the discretization floor {floor:g}")
    cc = c_transform(c_transform(phi))
    return bool(np.max(np.abs(cc.values - phi.values)) <= tol)


def normalize_class(phi):
    """Representative of ``phi`` modulo constants with zero ``m``-mean."""
    if isinstance(phi, PotentialClass):
        return phi
    w = reference_weights(phi.grid.domain, phi.grid)
    return PotentialClass(phi.grid, phi.values - float(w @ phi.values), phi.c_convex_verified)


def _require_euclidean(grid):
    if grid.domain.kind == CIRCLE:
        raise UnsupportedDomainError("quadratic shifts and Legendre transforms need a Euclidean domain")


def shift_quadratic(phi, sign):
    """``phi + sign * |x|^2 / 2``; shifting back returns the original values."""
    _require_euclidean(phi.grid)
    if sign not in (1, -1):
        raise ConfigurationError("sign must be +1 or -1")
    if phi._origin is not None and phi._origin[1] == -sign:
        return phi._origin[0]
    x = phi.grid.nodes
    q = 0.5 * (x * x if x.ndim == 1 else np.sum(x * x, axis=1))
    return Potential(phi.grid, phi.values + sign * q, _origin=(phi, sign))


def legendre_fenchel(phi1):
    """``psi_1(y) = max_x [<x, y> - phi_1(x)]`` over grid nodes, at grid nodes.

    Returns ``(psi_1, argmax)``; ``argmax[j]`` is the node index attaining the
    maximum for output node ``j`` (lowest index on ties).
    """
    grid = phi1.grid
    _require_euclidean(grid)
    x = grid.nodes
    if x.ndim == 1:
        # brute scan keeps the lowest-index tie rule
        step = max(1, _CHUNK_ENTRIES // len(x))
        out = np.empty(len(x))
        arg = np.empty(len(x), dtype=int)
        for s in range(0, len(x), step):
            score = x[s:s + step, None] * x[None, :] - phi1.values[None, :]
            a = np.argmax(score, axis=1)
            arg[s:s + step] = a
            out[s:s + step] = score[np.arange(len(a)), a]
        return Potential(grid, out), arg
    step = max(1, _CHUNK_ENTRIES // len(x))
    out = np.empty(len(x))
    arg = np.empty(len(x), dtype=int)
    for s in range(0, len(x), step):
        score = x[s:s + step] @ x.T - phi1.values[None, :]
        a = np.argmax(score, axis=1)
        arg[s:s + step] = a
        out[s:s + step] = score[np.arange(len(a)), a]
    return Potential(grid, out), arg


def lipschitz_violation(phi):
    """Largest ``|phi(x) - phi(y)| - D d(x, y)`` over adjacent node pairs."""
    grid = phi.grid
    D = diameter(grid.domain)
    v = phi.values
    if grid.domain.kind == INTERVAL:
        return float(np.max(np.abs(np.diff(v)) - D * np.diff(grid.nodes)))
    if grid.domain.kind == CIRCLE:
        dv = np.abs(v - np.roll(v, -1))
        return float(np.max(dv - D * grid.spacing))
    idx = grid.lattice_index
    worst = -np.inf
    for a, b in ((idx[:, :-1], idx[:, 1:]), (idx[:-1, :], idx[1:, :])):
        ok = (a >= 0) & (b >= 0)
        i, j = a[ok], b[ok]
        d = np.linalg.norm(grid.nodes[i] - grid.nodes[j], axis=1)
        worst = max(worst, float(np.max(np.abs(v[i] - v[j]) - D * d)))
    return worst
