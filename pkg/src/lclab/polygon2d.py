"""Exact convex polygon kernel for the planar volumetric inequalities.

Everything is dimension 2 and double precision with explicit tolerances:
1e-12 for geometric predicates, 1e-9 for the assertions built on top.
Polygons are counter-clockwise vertex lists, canonically rotated so the
bottom-most (then left-most) vertex comes first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import RandomStream

VERTEX_TOL = 1e-12
CONVEX_TOL = 1e-12
EMPTY_AREA = 1e-12


class InvalidPolygonError(ValueError):
    """Vertex list violates the convex-polygon invariants."""


def _cross(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _shoelace(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _canonical_roll(vertices: np.ndarray) -> np.ndarray:
    start = np.lexsort((vertices[:, 0], vertices[:, 1]))[0]
    return np.roll(vertices, -start, axis=0)


@dataclass(frozen=True)
class ConvexPolygon:
    """Counter-clockwise convex polygon with positive area."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidPolygonError("need at least 3 planar vertices")
        edges = np.roll(v, -1, axis=0) - v
        if np.any(np.linalg.norm(edges, axis=1) <= VERTEX_TOL):
            raise InvalidPolygonError("duplicate consecutive vertices")
        cross = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
        if np.any(cross < -CONVEX_TOL):
            raise InvalidPolygonError("vertices are not in convex counter-clockwise position")
        if _shoelace(v) <= 0.0:
            raise InvalidPolygonError("polygon must have positive area")
        v = _canonical_roll(v)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return self.vertices.shape[0]


def _clean(points: np.ndarray) -> np.ndarray:
    """Merge near-duplicate consecutive points and drop numerically flat corners."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] == 0:
        return pts
    scale = max(1.0, float(np.abs(pts).max()))
    keep = [pts[0]]
    for q in pts[1:]:
        if np.linalg.norm(q - keep[-1]) > VERTEX_TOL * scale:
            keep.append(q)
    while len(keep) > 1 and np.linalg.norm(keep[0] - keep[-1]) <= VERTEX_TOL * scale:
        keep.pop()
    pts = np.array(keep)
    if pts.shape[0] < 3:
        return pts
    flat_tol = CONVEX_TOL * scale * scale
    out = []
    m = pts.shape[0]
    for i in range(m):
        a, b, c = pts[(i - 1) % m], pts[i], pts[(i + 1) % m]
        if _cross(b - a, c - b) > flat_tol:
            out.append(b)
    return np.array(out)


def _polygon_from(points: np.ndarray) -> ConvexPolygon | None:
    pts = _clean(points)
    if pts.shape[0] < 3 or abs(_shoelace(pts)) < EMPTY_AREA:
        return None
    return ConvexPolygon(pts)


def area(poly: ConvexPolygon) -> float:
    """Shoelace area."""
    return _shoelace(poly.vertices)


def support(poly: ConvexPolygon, theta) -> float:
    """Support function: max over vertices of <v, theta>."""
    return float((poly.vertices @ np.asarray(theta, dtype=float)).max())


def barycenter(poly: ConvexPolygon) -> np.ndarray:
    """Area centroid via the standard triangulation formula."""
    v = poly.vertices
    w = np.roll(v, -1, axis=0)
    cr = v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]
    a = cr.sum() / 2.0
    return ((v + w) * cr[:, None]).sum(axis=0) / (6.0 * a)


def translate(poly: ConvexPolygon, shift) -> ConvexPolygon:
    return ConvexPolygon(poly.vertices + np.asarray(shift, dtype=float))


def scale(poly: ConvexPolygon, factor: float) -> ConvexPolygon:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return ConvexPolygon(poly.vertices * factor)


def reflect(poly: ConvexPolygon) -> ConvexPolygon:
    """The reflection -P; negation is a half-turn, so orientation is preserved."""
    return ConvexPolygon(-poly.vertices)


def minkowski_sum(poly: ConvexPolygon, other) -> ConvexPolygon:
    """Minkowski sum by merging edges in polar-angle order.

    ``other`` may be a polygon or a single point; a point just translates.
    """
    if not isinstance(other, ConvexPolygon):
        pt = np.asarray(other, dtype=float)
        if pt.shape != (2,):
            raise InvalidPolygonError("second operand must be a polygon or a single 2-D point")
        return translate(poly, pt)
    a = poly.vertices
    b = other.vertices
    na, nb = len(a), len(b)
    ea = np.roll(a, -1, axis=0) - a
    eb = np.roll(b, -1, axis=0) - b
    points = [a[0] + b[0]]
    i = j = 0
    while i < na or j < nb:
        if i >= na:
            step = eb[j]
            j += 1
        elif j >= nb:
            step = ea[i]
            i += 1
        else:
            cr = _cross(ea[i], eb[j])
            if cr > 0.0:
                step = ea[i]
                i += 1
            elif cr < 0.0:
                step = eb[j]
                j += 1
            else:
                step = ea[i] + eb[j]
                i += 1
                j += 1
        points.append(points[-1] + step)
    result = _polygon_from(np.array(points[:-1]))
    if result is None:
        raise InvalidPolygonError("Minkowski sum degenerated")
    return result


def _clip_halfplane(points: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Clip a convex CCW vertex loop by {x : <x, normal> <= offset}."""
    if points.shape[0] == 0:
        return points
    scale_ = max(1.0, float(np.abs(points).max()), abs(offset))
    tol = VERTEX_TOL * scale_
    d = points @ normal - offset
    out = []
    m = points.shape[0]
    for k in range(m):
        cur, nxt = points[k], points[(k + 1) % m]
        dc, dn = d[k], d[(k + 1) % m]
        if dc <= tol:
            out.append(cur)
        if (dc < -tol and dn > tol) or (dc > tol and dn < -tol):
            t = dc / (dc - dn)
            out.append(cur + t * (nxt - cur))
    return np.array(out) if out else np.empty((0, 2))


def intersect(poly: ConvexPolygon, other: ConvexPolygon) -> ConvexPolygon | None:
    """Exact intersection by half-plane clipping; None when (near-)empty."""
    pts = poly.vertices
    b = other.vertices
    eb = np.roll(b, -1, axis=0) - b
    for k in range(len(b)):
        # interior of a CCW polygon is the left side of each directed edge
        normal = np.array([eb[k, 1], -eb[k, 0]])
        offset = float(b[k] @ normal)
        pts = _clip_halfplane(pts, normal, offset)
        if pts.shape[0] == 0:
            return None
    return _polygon_from(pts)


def polar(poly: ConvexPolygon, margin: float = 1e-9) -> ConvexPolygon:
    """Polar body {y : <x, y> <= 1 for all x in P} via edge-to-vertex duality.

    Requires the origin strictly inside, at distance > ``margin`` from
    every edge line.
    """
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    normals = np.stack([e[:, 1], -e[:, 0]], axis=1)
    offsets = np.einsum("ij,ij->i", v, normals)
    lengths = np.linalg.norm(normals, axis=1)
    if np.any(offsets / lengths <= margin):
        raise ValueError("origin is not strictly interior to the polygon")
    dual = normals / offsets[:, None]
    result = _polygon_from(dual)
    if result is None:
        raise InvalidPolygonError("polar polygon degenerated")
    return result


def origin_margin(poly: ConvexPolygon) -> float:
    """Signed distance from the origin to the nearest edge line (negative if outside)."""
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    normals = np.stack([e[:, 1], -e[:, 0]], axis=1)
    offsets = np.einsum("ij,ij->i", v, normals)
    return float((offsets / np.linalg.norm(normals, axis=1)).min())


def volume_radius(poly: ConvexPolygon) -> float:
    """Radius of the disc with the same area."""
    return math.sqrt(area(poly) / math.pi)


def rogers_shephard_ratio(poly: ConvexPolygon) -> float:
    """area(P - P) / area(P); lies in [4, 6] with simplices extremal at 6."""
    return area(minkowski_sum(poly, reflect(poly))) / area(poly)


def milman_pajor_ratio(poly: ConvexPolygon) -> float:
    """area(P ∩ -P) / area(P) for a polygon with barycenter at the origin."""
    if float(np.linalg.norm(barycenter(poly))) > 1e-9:
        raise ValueError("polygon must have its barycenter at the origin")
    inter = intersect(poly, reflect(poly))
    if inter is None:
        raise InvalidPolygonError("central symmetrization degenerated")
    return area(inter) / area(poly)


@dataclass(frozen=True)
class ZpPolygonFit:
    """Outer polygonal model of a planar moment body from sampled support values."""

    polygon: ConvexPolygon
    vr: float
    angles: np.ndarray = field(repr=False)
    support_values: np.ndarray = field(repr=False)


def zp_polygon(batch, p: float, angle_count: int) -> ZpPolygonFit:
    """Intersect the half-planes <x, theta_k> <= h(theta_k) over an angle grid.

    The result contains the true empirical moment body, so its volume
    radius is a one-sided (upper) estimate; refining the grid can only
    shrink it.
    """
    from .centroid import support_zp

    if batch.dimension != 2:
        raise ValueError("zp_polygon needs a 2-D batch")
    if angle_count < 16:
        raise ValueError("need at least 16 angles")
    angles = 2.0 * math.pi * np.arange(angle_count) / angle_count
    normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    h = np.array([support_zp(batch, normals[k], p).value for k in range(angle_count)])
    box = 2.0 * float(h.max())
    pts = np.array([[-box, -box], [box, -box], [box, box], [-box, box]])
    for k in range(angle_count):
        pts = _clip_halfplane(pts, normals[k], float(h[k]))
        if pts.shape[0] == 0:
            raise InvalidPolygonError("support constraints are infeasible")
    result = _polygon_from(pts)
    if result is None:
        raise InvalidPolygonError("moment-body polygon degenerated")
    return ZpPolygonFit(polygon=result, vr=volume_radius(result), angles=angles, support_values=h)


def regular_polygon(sides: int, radius: float = 1.0) -> ConvexPolygon:
    if sides < 3:
        raise ValueError("need at least 3 sides")
    ang = 2.0 * math.pi * np.arange(sides) / sides
    return ConvexPolygon(radius * np.stack([np.cos(ang), np.sin(ang)], axis=1))


def random_convex_polygon(vertex_count: int, stream: RandomStream, centered: bool = False) -> ConvexPolygon:
    """Random convex polygon with the requested vertex count (Valtr's construction)."""
    if vertex_count < 3:
        raise ValueError("need at least 3 vertices")
    rng = stream.generator()
    for _ in range(64):
        vecs = []
        for _axis in range(2):
            coords = np.sort(rng.random(vertex_count))
            lo, hi = coords[0], coords[-1]
            mask = rng.random(vertex_count - 2) < 0.5
            up = np.concatenate([[lo], coords[1:-1][mask], [hi]])
            down = np.concatenate([[lo], coords[1:-1][~mask], [hi]])
            vecs.append(np.concatenate([np.diff(up), -np.diff(down)]))
        vx, vy = vecs
        rng.shuffle(vy)
        order = np.argsort(np.arctan2(vy, vx))
        pts = np.cumsum(np.stack([vx[order], vy[order]], axis=1), axis=0)
        poly = _polygon_from(pts)
        if poly is not None and len(poly) == vertex_count:
            if centered:
                poly = translate(poly, -barycenter(poly))
            return poly
    raise RuntimeError("failed to generate a random convex polygon")


def save_polygon(poly: ConvexPolygon, path: str) -> None:
    """One vertex per line, 'x y' in decimal, counter-clockwise."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in poly.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")


def load_polygon(path: str) -> ConvexPolygon:
    pts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            xs, ys = line.split()
            pts.append((float(xs), float(ys)))
    return ConvexPolygon(np.array(pts))
