"""Compact domains, their metric, reference measure and discretization grids.

Three kinds of domain are supported: the unit interval ``[0, 1]``, the circle
of length 1 (coordinates in ``[0, 1)`` with base point 0) and convex polygons
in the plane. The reference measure ``m`` has a density ``sigma`` with respect
to length/area; ``sigma`` is piecewise constant on ``k`` equal cells in 1D and
on a ``k x k`` lattice over the bounding box in 2D. ``sigma=None`` means
uniform.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .errors import ConfigurationError, DegenerateMeasureError, DomainError

INTERVAL = "interval"
CIRCLE = "circle"
POLYGON = "polygon"

MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Domain:
    kind: str
    vertices: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in (INTERVAL, CIRCLE, POLYGON):
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        if self.kind == POLYGON:
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
                raise ConfigurationError("polygon needs at least 3 planar vertices")
            if not geometry.is_convex_ccw(v):
                raise ConfigurationError("polygon must be convex, counterclockwise, positive area")
            object.__setattr__(self, "vertices", v)
        elif self.vertices is not None:
            raise ConfigurationError("vertices only apply to polygon domains")
        if self.sigma is not None:
            s = np.array(self.sigma, dtype=float)
            if self.kind == POLYGON and (s.ndim != 2 or s.shape[0] != s.shape[1]):
                raise ConfigurationError("2D sigma must be a square k x k array")
            if self.kind != POLYGON and s.ndim != 1:
                raise ConfigurationError("1D sigma must be a vector")
            if not np.all(np.isfinite(s)) or np.any(s < 0):
                raise ConfigurationError("sigma must be finite and nonnegative")
            total = self._sigma_mass(s).sum()
            if total <= 0:
                raise DegenerateMeasureError("sigma has zero total mass")
            object.__setattr__(self, "sigma", s / total)

    # -- constructors -----------------------------------------------------
    @classmethod
    def interval(cls, sigma=None):
        return cls(INTERVAL, sigma=sigma)

    @classmethod
    def circle(cls, sigma=None):
        return cls(CIRCLE, sigma=sigma)

    @classmethod
    def polygon(cls, vertices, sigma=None):
        return cls(POLYGON, vertices=np.asarray(vertices, dtype=float), sigma=sigma)

    @classmethod
    def unit_square(cls, sigma=None):
        return cls.polygon([[0, 0], [1, 0], [1, 1], [0, 1]], sigma=sigma)

    # -- basic properties -------------------------------------------------
    @property
    def dim(self):
        return 2 if self.kind == POLYGON else 1

    @property
    def is_uniform(self):
        return self.sigma is None

    @property
    def volume(self):
        return geometry.area(self.vertices) if self.kind == POLYGON else 1.0

    @property
    def bbox(self):
        if self.kind != POLYGON:
            return np.array([0.0]), np.array([1.0])
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def _sigma_mass(self, s):
        """Raw mass carried by each sigma cell (sigma value times cell volume)."""
        if self.kind != POLYGON:
            return s / len(s)
        k = s.shape[0]
        lo, hi = self.bbox
        h = (hi - lo) / k
        out = np.zeros_like(s)
        for iy in range(k):
            for ix in range(k):
                if s[iy, ix] == 0:
                    continue
                sq = _square(lo + h * np.array([ix, iy]), h)
                out[iy, ix] = s[iy, ix] * geometry.area(geometry.clip_convex(sq, self.vertices))
        return out

    def sigma_at(self, points):
        """Density of ``m`` with respect to length/area at the given points."""
        points = np.asarray(points, dtype=float)
        if self.kind != POLYGON:
            x = np.atleast_1d(points)
            if self.sigma is None:
                return np.ones_like(x)
            k = len(self.sigma)
            x = np.mod(x, 1.0) if self.kind == CIRCLE else x
            idx = np.clip(np.floor(x * k).astype(int), 0, k - 1)
            return self.sigma[idx]
        pts = np.atleast_2d(points)
        if self.sigma is None:
            return np.full(len(pts), 1.0 / self.volume)
        k = self.sigma.shape[0]
        lo, hi = self.bbox
        ij = np.clip(np.floor((pts - lo) / (hi - lo) * k).astype(int), 0, k - 1)
        return self.sigma[ij[:, 1], ij[:, 0]]

    def contains(self, points, tol=MEMBERSHIP_TOL):
        if self.kind == POLYGON:
            return geometry.contains(self.vertices, np.atleast_2d(points), buffer=-tol)
        x = np.atleast_1d(np.asarray(points, dtype=float))
        return (x >= -tol) & (x <= 1 + tol)

    def check_points(self, points):
        if not np.all(self.contains(points)):
            raise DomainError(f"point(s) outside the {self.kind} domain")

    # -- reference measure in 1D ------------------------------------------
    def cdf_breaks(self):
        """Breakpoints ``(x, F_m(x))`` of the piecewise-linear reference CDF."""
        if self.dim != 1:
            raise DomainError("reference CDF only exists in 1D")
        if self.sigma is None:
            return np.array([0.0, 1.0]), np.array([0.0, 1.0])
        k = len(self.sigma)
        xs = np.linspace(0.0, 1.0, k + 1)
        fs = np.concatenate([[0.0], np.cumsum(self.sigma / k)])
        fs[-1] = 1.0
        return xs, fs

    def sample(self, rng, n):
        """Draw ``n`` iid points from ``m``."""
        if self.kind != POLYGON:
            if self.sigma is None:
                return rng.random(n)
            k = len(self.sigma)
            cell = rng.choice(k, size=n, p=self.sigma / self.sigma.sum())
            return (cell + rng.random(n)) / k
        lo, hi = self.bbox
        if self.sigma is None:
            return _rejection(rng, n, lo, hi - lo, self.vertices)
        k = self.sigma.shape[0]
        mass = self._sigma_mass(self.sigma).ravel()
        cell = rng.choice(k * k, size=n, p=mass / mass.sum())
        h = (hi - lo) / k
        out = np.empty((n, 2))
        for c in np.unique(cell):
            sel = np.flatnonzero(cell == c)
            corner = lo + h * np.array([c % k, c // k])
            out[sel] = _rejection(rng, len(sel), corner, h, self.vertices)
        return out

    # -- serialization ----------------------------------------------------
    def to_json(self):
        out = {"kind": self.kind}
        if self.kind == POLYGON:
            out["vertices"] = self.vertices.tolist()
        if self.sigma is None:
            out["sigma"] = {"type": "uniform"}
        else:
            out["sigma"] = {"type": "grid", "values": self.sigma.tolist()}
        return out

    @classmethod
    def from_json(cls, obj):
        sig = obj.get("sigma", {"type": "uniform"})
        sigma = None if sig.get("type", "uniform") == "uniform" else np.asarray(sig["values"], dtype=float)
        verts = obj.get("vertices") if obj["kind"] == POLYGON else None
        return cls(obj["kind"], vertices=None if verts is None else np.asarray(verts, float), sigma=sigma)

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return self.to_json() == other.to_json()

    def __hash__(self):
        return hash(repr(self.to_json()))


def _square(corner, h):
    x0, y0 = corner
    hx, hy = (h, h) if np.isscalar(h) else h
    return np.array([[x0, y0], [x0 + hx, y0], [x0 + hx, y0 + hy], [x0, y0 + hy]])


def _rejection(rng, n, lo, size, poly):
    out = np.empty((0, 2))
    while len(out) < n:
        m = max(16, int(1.5 * (n - len(out))) + 8)
        cand = lo + rng.random((m, 2)) * size
        cand = cand[geometry.contains(poly, cand)]
        out = np.concatenate([out, cand])
    return out[:n]


def distance(domain, x, y):
    """Geodesic distance; vectorized over matching leading shapes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    domain.check_points(x)
    domain.check_points(y)
    return pairwise_distance(domain, x, y)


def pairwise_distance(domain, x, y):
    """Distance without membership checks (broadcasting)."""
    if domain.kind == POLYGON:
        return np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)
    d = np.abs(np.asarray(x) - np.asarray(y))
    if domain.kind == CIRCLE:
        d = np.mod(d, 1.0)
        d = np.minimum(d, 1.0 - d)
    return d


def diameter(domain):
    if domain.kind == INTERVAL:
        return 1.0
    if domain.kind == CIRCLE:
        return 0.5
    v = domain.vertices
    return float(np.max(np.linalg.norm(v[:, None] - v[None], axis=2)))


@dataclass(frozen=True, eq=False)
class Grid:
    """Discretization of a domain.

    ``nodes`` are the covering points; ``volumes`` the Lebesgue length/area
    attached to each node (trapezoid in 1D, clipped lattice cells in 2D);
    ``eps`` the covering radius bound.
    """

    domain: Domain
    resolution: int
    nodes: np.ndarray
    volumes: np.ndarray
    spacing: float
    eps: float
    cells: list = field(default_factory=list)
    lattice_index: Optional[np.ndarray] = None

    @property
    def size(self):
        return len(self.nodes)

    def locate(self, points):
        """Index of the grid cell containing each point (2D) or nearest node (1D)."""
        if self.domain.dim == 1:
            x = np.atleast_1d(np.asarray(points, dtype=float))
            if self.domain.kind == CIRCLE:
                return np.mod(np.rint(np.mod(x, 1.0) * self.resolution).astype(int), self.resolution)
            return np.clip(np.rint(x / self.spacing).astype(int), 0, self.size - 1)
        pts = np.atleast_2d(points)
        lo, _ = self.domain.bbox
        k = self.resolution
        ij = np.clip(np.floor((pts - lo) / self.spacing).astype(int), 0, k - 1)
        return self.lattice_index[ij[:, 1], ij[:, 0]]

    def to_json(self):
        return {"domain": self.domain.to_json(), "resolution": self.resolution}

    @classmethod
    def from_json(cls, obj):
        return build_grid(Domain.from_json(obj["domain"]), int(obj["resolution"]))


def build_grid(domain, resolution):
    """Grid whose nodes form an ``eps``-covering of the domain.

    Interval: ``resolution`` equally spaced nodes incl. endpoints, ``eps`` is
    the node spacing. Circle: ``resolution`` periodic nodes, ``eps`` is half
    the spacing. Polygon: ``resolution x resolution`` lattice over the
    bounding box with square cells clipped to the polygon; nodes are the
    clipped-cell centroids and ``eps`` the lattice-cell diameter.
    """
    resolution = int(resolution)
    if domain.kind == INTERVAL:
        if resolution < 2:
            raise ConfigurationError("interval grids need at least 2 nodes")
        h = 1.0 / (resolution - 1)
        nodes = np.linspace(0.0, 1.0, resolution)
        vol = np.full(resolution, h)
        vol[[0, -1]] = h / 2
        return Grid(domain, resolution, nodes, vol, h, h)
    if domain.kind == CIRCLE:
        if resolution < 2:
            raise ConfigurationError("circle grids need at least 2 nodes")
        h = 1.0 / resolution
        return Grid(domain, resolution, np.arange(resolution) * h, np.full(resolution, h), h, h / 2)
    if resolution < 4:
        raise ConfigurationError("polygon grids need at least 4 cells per axis")
    lo, hi = domain.bbox
    side = float(np.max(hi - lo))
    h = side / resolution
    index = -np.ones((resolution, resolution), dtype=int)
    nodes, vols, cells = [], [], []
    for iy in range(resolution):
        for ix in range(resolution):
            sq = _square(lo + h * np.array([ix, iy]), h)
            cell = geometry.clip_convex(sq, domain.vertices)
            a = geometry.area(cell)
            if a <= 1e-14 * h * h:
                continue
            index[iy, ix] = len(nodes)
            nodes.append(geometry.centroid(cell))
            vols.append(a)
            cells.append(cell)
    return Grid(domain, resolution, np.array(nodes), np.array(vols), h, h * np.sqrt(2.0),
                cells=cells, lattice_index=index)


def reference_weights(domain, grid):
    """Quadrature weights of ``m`` at the grid nodes, summing to 1."""
    w = domain.sigma_at(grid.nodes) * grid.volumes
    total = w.sum()
    if not total > 0:
        raise DegenerateMeasureError("reference density vanishes on the whole grid")
    return w / total
