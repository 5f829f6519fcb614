"""Exact polygon geometry: areas, moments, hulls, clipping, triangulation.

All polygons are (n, 2) float arrays.  Functions that consume a
counter-clockwise orientation say so; nothing here mutates its inputs.
"""

from __future__ import annotations

import math

import numpy as np


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace signed area; positive for counter-clockwise orientation."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_moments(vertices: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Area, centroid, and central second-moment matrix of a polygon interior.

    Closed-form edge sums (Green's theorem applied to the uniform density),
    so the result is exact and resolution-independent.  Requires positive
    (counter-clockwise) orientation.

    Returns:
        (area, centroid (2,), covariance (2, 2)) of the uniform distribution
        over the polygon interior.
    """
    v = np.asarray(vertices, dtype=float)
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cross = x0 * y1 - x1 * y0

    area = 0.5 * float(np.sum(cross))
    if area <= 0:
        raise ValueError(f"polygon must be counter-clockwise with positive area, got {area}")

    cx = float(np.sum((x0 + x1) * cross)) / (6.0 * area)
    cy = float(np.sum((y0 + y1) * cross)) / (6.0 * area)

    # Second moments about the origin, then shift to the centroid.
    exx = float(np.sum((x0 * x0 + x0 * x1 + x1 * x1) * cross)) / (12.0 * area)
    eyy = float(np.sum((y0 * y0 + y0 * y1 + y1 * y1) * cross)) / (12.0 * area)
    exy = float(np.sum((x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * cross)) / (
        24.0 * area
    )

    cov = np.array([[exx - cx * cx, exy - cx * cy], [exy - cx * cy, eyy - cy * cy]])
    return area, np.array([cx, cy]), cov


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull by Andrew's monotone chain, counter-clockwise, no duplicates."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def build(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                u = out[-1] - out[-2]
                v = p - out[-2]
                if u[0] * v[1] - u[1] * v[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def min_area_rect(points: np.ndarray) -> tuple[np.ndarray, float, float, float]:
    """Minimum-area enclosing rotated rectangle via rotating calipers.

    One candidate orientation per hull edge; the optimum is aligned with
    some edge, so checking all edges is exact.

    Returns:
        (center (2,), width, height, theta) with width measured along the
        theta direction.
    """
    hull = convex_hull(points)
    if len(hull) < 3:
        raise ValueError("need at least 3 non-collinear points")

    edges = np.roll(hull, -1, axis=0) - hull
    angles = np.arctan2(edges[:, 1], edges[:, 0])

    best = None
    for ang in angles:
        c, s = math.cos(ang), math.sin(ang)
        rot = hull @ np.array([[c, -s], [s, c]])  # rotate by -ang
        xmin, ymin = rot.min(axis=0)
        xmax, ymax = rot.max(axis=0)
        area = (xmax - xmin) * (ymax - ymin)
        if best is None or area < best[0]:
            best = (area, ang, xmin, xmax, ymin, ymax)

    _, ang, xmin, xmax, ymin, ymax = best
    c, s = math.cos(ang), math.sin(ang)
    cx_r, cy_r = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    center = np.array([cx_r * c - cy_r * s, cx_r * s + cy_r * c])
    return center, float(xmax - xmin), float(ymax - ymin), float(ang)


def is_convex(vertices: np.ndarray, rel_tol: float = 1e-12) -> bool:
    """True when every turn of the counter-clockwise boundary is a left turn.

    Collinear vertices are tolerated within rel_tol of the polygon scale.
    """
    v = np.asarray(vertices, dtype=float)
    d = np.roll(v, -1, axis=0) - v
    cross = d[:, 0] * np.roll(d[:, 1], -1) - d[:, 1] * np.roll(d[:, 0], -1)
    scale = float(np.max(np.abs(d))) ** 2 + 1.0
    return bool(np.all(cross >= -rel_tol * scale))


def clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon against a convex CCW clip polygon.

    Returns the clipped polygon (possibly empty).  Area of the result is the
    intersection area whenever the subject is convex too.
    """
    output = [tuple(p) for p in np.asarray(subject, dtype=float)]
    clip_pts = [tuple(p) for p in np.asarray(clip, dtype=float)]

    cx1, cy1 = clip_pts[-1]
    for cx2, cy2 in clip_pts:
        if not output:
            break
        ex, ey = cx2 - cx1, cy2 - cy1

        def inside(p):
            return ex * (p[1] - cy1) - ey * (p[0] - cx1) >= 0.0

        def intersect(p, q):
            # Line through clip edge vs segment pq.
            dpx, dpy = q[0] - p[0], q[1] - p[1]
            denom = ex * dpy - ey * dpx
            t = (ex * (cy1 - p[1]) - ey * (cx1 - p[0])) / denom
            return (p[0] + t * dpx, p[1] + t * dpy)

        result = []
        prev = output[-1]
        prev_in = inside(prev)
        for cur in output:
            cur_in = inside(cur)
            if cur_in:
                if not prev_in:
                    result.append(intersect(prev, cur))
                result.append(cur)
            elif prev_in:
                result.append(intersect(prev, cur))
            prev, prev_in = cur, cur_in
        output = result
        cx1, cy1 = cx2, cy2

    return np.array(output) if output else np.empty((0, 2))


def triangulate(vertices: np.ndarray) -> list[np.ndarray]:
    """Ear-clipping triangulation of a simple CCW polygon into (3, 2) arrays."""
    v = [np.asarray(p, dtype=float) for p in vertices]
    n = len(v)
    if n < 3:
        raise ValueError("need at least 3 vertices")
    idx = list(range(n))
    tris: list[np.ndarray] = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def point_in_tri(p, a, b, c):
        d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
        return d1 >= 0 and d2 >= 0 and d3 >= 0

    guard = 0
    while len(idx) > 3 and guard < 2 * n * n:
        guard += 1
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = v[i0], v[i1], v[i2]
            if cross(a, b, c) <= 0:
                continue  # reflex corner, not an ear
            if any(
                point_in_tri(v[j], a, b, c)
                for j in idx
                if j not in (i0, i1, i2)
            ):
                continue
            tris.append(np.array([a, b, c]))
            idx.pop(k)
            break
        else:
            # Numerically stuck (e.g. collinear run); drop the flattest corner.
            flattest = min(
                range(m),
                key=lambda k: abs(cross(v[idx[(k - 1) % m]], v[idx[k]], v[idx[(k + 1) % m]])),
            )
            idx.pop(flattest)
    tris.append(np.array([v[idx[0]], v[idx[1]], v[idx[2]]]))
    return tris


def intersection_area(poly_a: np.ndarray, poly_b: np.ndarray) -> float:
    """Exact intersection area of two simple CCW polygons.

    Convex pairs use one Sutherland-Hodgman clip; otherwise both polygons are
    triangulated and convex triangle pairs are clipped.
    """
    a = np.asarray(poly_a, dtype=float)
    b = np.asarray(poly_b, dtype=float)
    if is_convex(a) and is_convex(b):
        clipped = clip_convex(a, b)
        return abs(signed_area(clipped)) if len(clipped) >= 3 else 0.0

    total = 0.0
    for ta in triangulate(a):
        for tb in triangulate(b):
            clipped = clip_convex(ta, tb)
            if len(clipped) >= 3:
                total += abs(signed_area(clipped))
    return total


def points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd (crossing-number) point-in-polygon test, vectorized over points.

    Edges are treated half-open in y so points on a scanline through a vertex
    are counted once.
    """
    pts = np.asarray(points, dtype=float)
    v = np.asarray(vertices, dtype=float)
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)

    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    straddles = (y0[None, :] <= py) != (y1[None, :] <= py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x0[None, :] + (py - y0[None, :]) * (x1 - x0)[None, :] / (y1 - y0)[None, :]
    hits = straddles & (px < xcross)
    return np.sum(hits, axis=1) % 2 == 1
