"""Samples of the entropic measure: conjugates of Dirichlet-Ferguson draws.

A draw ``nu = sum_k lambda_k delta_{x_k}`` is pushed through conjugation.
The Brenier map of ``nu`` is constant on one open region per atom (an
interval or arc in 1D, a Laguerre cell in 2D); these are the holes of the
conjugate ``mu``, which charges only their complement.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import geometry
from .dirichlet import DEFAULT_REMAINDER, draw_dirichlet_ferguson, to_measure
from .domain import CIRCLE, INTERVAL
from .errors import PreconditionError, SolverError
from .measures import Discrete, Empirical
from .transport.one_dim import circle_shift, conjugate_measure_1d
from .transport.semidiscrete import brenier_map_discrete, conjugate_measure_2d

DEFAULT_CLOUD = 100_000
DEFAULT_BUFFER = 1e-3


@dataclass(frozen=True)
class Hole:
    """Open region mapped onto one atom of ``nu``.

    1D: ``region = (a, b)``; on the circle ``a > b`` marks an arc through 0.
    2D: ``region`` is the convex cell polygon (counterclockwise).
    """

    stick: int
    site: object
    region: object
    size: float


@dataclass(frozen=True, eq=False)
class EntropicSample:
    nu: Discrete
    mu: object
    sticks: object
    holes: list
    beta: float
    seed: Optional[int] = None
    truncation: dict = field(default_factory=dict)
    tessellation: object = None

    def hole_sizes(self):
        return np.array([h.size for h in self.holes])

    def holes_json(self):
        out = []
        for h in self.holes:
            region = np.asarray(h.region, dtype=float).tolist()
            site = np.asarray(h.site, dtype=float).tolist()
            out.append({"stick": h.stick, "site": site, "region": region, "size": h.size})
        return out


def _holes_1d(nu, order):
    """Gaps of the conjugate, one per atom of ``nu``, labelled by stick index."""
    domain = nu.domain
    w = nu.weights
    cum = np.concatenate([[0.0], np.cumsum(w)])
    cum[-1] = 1.0
    shift = circle_shift(nu) if domain.kind == CIRCLE else 0.0
    if domain.kind == INTERVAL and not domain.is_uniform:
        xs, fs = domain.cdf_breaks()
        pull = lambda u: float(np.interp(u, fs, xs))  # noqa: E731
    else:
        pull = float
    holes = []
    for k in range(len(w)):
        a, b = cum[k], cum[k + 1]
        if domain.kind == CIRCLE:
            a, b = np.mod(a - shift, 1.0), np.mod(b - shift, 1.0)
            if b == 0.0:
                b = 1.0
        holes.append(Hole(int(order[k]), float(nu.atoms[k]), (pull(a), pull(b)), float(w[k])))
    return holes


def _stick_order(sample, nu):
    """Stick index of each atom of ``nu`` (atoms are stored sorted)."""
    if nu.domain.dim == 1:
        src = np.asarray(sample.atoms).ravel()
        return np.array([int(np.argmin(np.abs(src - a))) for a in nu.atoms])
    src = np.asarray(sample.atoms)
    return np.array([int(np.argmin(np.sum((src - a) ** 2, axis=1))) for a in nu.atoms])


def sample_entropic(beta, domain, rng=None, *, seed=None, remainder_below=DEFAULT_REMAINDER,
                    max_terms=None, n_samples=DEFAULT_CLOUD, tol=1e-9, max_iter=100):
    """Draw ``nu`` from the Dirichlet-Ferguson process and conjugate it.

    1D uses the exact graph path, so ``mu`` is :class:`Discrete`. In 2D the
    semi-discrete solver builds the Laguerre tessellation of ``nu`` and
    ``mu`` is an :class:`Empirical` cloud of ``n_samples`` points. A failed
    solve raises :class:`SolverError` whose ``replay`` holds ``(seed, beta,
    nu)``.
    """
    if rng is None:
        if seed is None:
            raise PreconditionError("a seed or a generator is required")
        rng = np.random.default_rng(seed)
    draw = draw_dirichlet_ferguson(beta, domain, rng, remainder_below, max_terms)
    nu = to_measure(draw, domain)
    order = _stick_order(draw, nu)
    trunc = {"remainder_below": remainder_below, "max_terms": max_terms,
             "terms": len(draw), "remainder": draw.remainder}
    if domain.dim == 1:
        mu = conjugate_measure_1d(nu)
        return EntropicSample(nu, mu, draw, _holes_1d(nu, order), float(beta), seed, trunc)
    replay = {"seed": seed, "beta": float(beta), "nu": nu.to_json(), "domain": domain.to_json()}
    try:
        _, tess = brenier_map_discrete(domain, nu, tol=tol, max_iter=max_iter, replay=replay)
    except SolverError as exc:
        if exc.replay is None:
            raise SolverError(str(exc), exc.residual, replay) from exc
        raise
    mu, _ = conjugate_measure_2d(domain, nu, n_samples, rng, tess=tess)
    holes = [Hole(int(order[i]), nu.atoms[i], tess.cells[i], float(tess.masses[i]))
             for i in range(len(nu))]
    return EntropicSample(nu, mu, draw, holes, float(beta), seed, trunc, tess)


def _in_arc(x, a, b):
    if a < b:
        return (x > a) & (x < b)
    return (x > a) | (x < b)


def hole_report(s, n_probe=None, rng=None, buffer=DEFAULT_BUFFER):
    """Mass of ``mu`` strictly inside each hole.

    1D: exact mass of the discrete conjugate in every open gap. 2D: fraction
    of cloud points inside each cell shrunk by ``buffer``; with ``n_probe``
    a fresh cloud of that size is drawn from ``rng``.
    """
    if s.nu.domain.dim == 1:
        x, w = s.mu.atoms, s.mu.weights
        out = []
        for h in s.holes:
            a, b = h.region
            inside = _in_arc(x, a, b) if s.nu.domain.kind == CIRCLE else (x > a) & (x < b)
            out.append(float(w[inside].sum()))
        return np.array(out)
    if s.tessellation is None:
        raise PreconditionError("2D hole probes need the tessellation")
    pts = s.mu.points
    if n_probe is not None:
        if rng is None:
            raise PreconditionError("n_probe needs a generator")
        cloud, _ = conjugate_measure_2d(s.nu.domain, s.nu, n_probe, rng, tess=s.tessellation)
        pts = cloud.points
    return np.array([float(np.mean(geometry.contains(h.region, pts, buffer)))
                     if len(h.region) else 0.0 for h in s.holes])


def cluster_masses(points, radius):
    """Masses of the single-linkage clusters of an equally weighted cloud."""
    pts = np.asarray(points, dtype=float)
    uniq, inv, counts = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    pairs = cKDTree(uniq).query_pairs(radius, output_type="ndarray")
    n = len(uniq)
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    return np.bincount(labels, weights=counts) / len(pts)


def atom_report(s, tol=DEFAULT_BUFFER):
    """Largest atom of ``mu``.

    1D: the largest exact atom, which equals the largest gap between
    consecutive atoms of ``nu``. 2D: the largest cluster of the cloud at
    linkage radius ``tol``.
    """
    if isinstance(s.mu, Discrete):
        return float(s.mu.weights.max())
    if not isinstance(s.mu, Empirical):
        raise PreconditionError("atom report needs a discrete or empirical conjugate")
    return float(cluster_masses(s.mu.points, tol).max())


def nu_gaps(nu):
    """Gaps between consecutive atoms of a 1D discrete ``nu`` (cyclic on the circle)."""
    x = np.sort(nu.atoms)
    if nu.domain.kind == CIRCLE:
        return np.diff(np.concatenate([x, [x[0] + 1.0]]))
    return np.diff(np.concatenate([[0.0], x, [1.0]]))
