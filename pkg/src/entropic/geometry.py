"""Planar convex-polygon utilities.

Polygons are ``(k, 2)`` float arrays of vertices in counterclockwise order,
without repeating the first vertex.
"""

import numpy as np


def signed_area(poly):
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def area(poly):
    return abs(signed_area(poly))


def centroid(poly):
    poly = np.asarray(poly, dtype=float)
    a = signed_area(poly)
    if a == 0.0:
        return poly.mean(axis=0)
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    cx = np.sum((x + xn) * cross) / (6.0 * a)
    cy = np.sum((y + yn) * cross) / (6.0 * a)
    return np.array([cx, cy])


def is_convex_ccw(poly, tol=0.0):
    """True if every turn is a left turn (strictly convex up to ``tol``)."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return False
    e = np.roll(poly, -1, axis=0) - poly
    en = np.roll(e, -1, axis=0)
    cross = e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]
    return bool(np.all(cross > tol)) and signed_area(poly) > 0


def clip_halfplane(poly, normal, offset):
    """Intersect a convex polygon with ``{x : <normal, x> >= offset}``.

    Sutherland-Hodgman against a single edge. Returns an empty ``(0, 2)``
    array when nothing is left.
    """
    poly = np.asarray(poly, dtype=float)
    if len(poly) == 0:
        return poly.reshape(0, 2)
    s = poly @ np.asarray(normal, dtype=float) - offset
    if np.all(s >= 0):
        return poly
    if np.all(s <= 0):
        return np.empty((0, 2))
    out = []
    k = len(poly)
    for i in range(k):
        j = (i + 1) % k
        si, sj = s[i], s[j]
        if si >= 0:
            out.append(poly[i])
        if (si >= 0) != (sj >= 0):
            t = si / (si - sj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    if len(out) < 3:
        return np.empty((0, 2))
    return _dedupe(np.array(out))


def _dedupe(poly, tol=1e-15):
    keep = np.ones(len(poly), dtype=bool)
    nxt = np.roll(poly, -1, axis=0)
    keep &= np.linalg.norm(poly - nxt, axis=1) > tol
    if keep.sum() < 3:
        return np.empty((0, 2))
    return poly[keep]


def clip_convex(poly, clipper):
    """Intersection of two convex polygons (both counterclockwise)."""
    clipper = np.asarray(clipper, dtype=float)
    out = np.asarray(poly, dtype=float)
    k = len(clipper)
    for i in range(k):
        a, b = clipper[i], clipper[(i + 1) % k]
        edge = b - a
        # inward normal of a ccw edge
        normal = np.array([-edge[1], edge[0]])
        out = clip_halfplane(out, normal, float(normal @ a))
        if len(out) == 0:
            break
    return out


def edge_distances(points, poly):
    """Signed distances of points to each edge line, positive inside.

    Returns an ``(n_points, n_edges)`` array.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(poly, dtype=float)
    e = np.roll(poly, -1, axis=0) - poly
    normal = np.stack([-e[:, 1], e[:, 0]], axis=1)
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    return np.einsum("pkd,kd->pk", points[:, None, :] - poly[None, :, :], normal)


def contains(poly, points, buffer=0.0):
    """Membership of points in a convex polygon.

    ``buffer > 0`` shrinks the polygon (strict interior at that margin);
    ``buffer < 0`` inflates it.
    """
    if len(poly) < 3:
        return np.zeros(len(np.atleast_2d(points)), dtype=bool)
    d = edge_distances(points, poly)
    return np.all(d >= buffer, axis=1) if buffer <= 0 else np.all(d > buffer, axis=1)


def segment_distance(points, a, b):
    """Distance from each point to the segments ``a[k] -> b[k]``; min over k."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    ab = b - a
    denom = np.einsum("kd,kd->k", ab, ab)
    denom = np.where(denom > 0, denom, 1.0)
    best = np.full(len(points), np.inf)
    chunk = max(1, 2_000_000 // max(len(a), 1))
    for s in range(0, len(points), chunk):
        p = points[s:s + chunk, None, :]
        t = np.clip(np.einsum("pkd,kd->pk", p - a[None], ab) / denom, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        best[s:s + chunk] = np.min(np.linalg.norm(p - proj, axis=2), axis=1)
    return best


def regular_polygon(k, radius=0.5, center=(0.5, 0.5), phase=0.0):
    ang = phase + 2 * np.pi * np.arange(k) / k
    return np.stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)], axis=1)
