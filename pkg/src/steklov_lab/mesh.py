"""Planar domain catalog and deterministic triangle meshing.

Shapes are meshed by a fan triangulation from an interior anchor point
(structured polar grid for the annulus) followed by uniform 1-to-4
refinements with boundary midpoints snapped back onto the exact curve.
Identical (shape, h) inputs produce bit-identical meshes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMesh, InvalidShape, NonSimplePolygon, StepTooCoarse

_CURVE_TABLE_N = 4096  # fixed resolution of the arc-length table, h-independent
_SNAP_TOL = 1e-12


# ---------------------------------------------------------------------------
# shape catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    radius: float = 1.0

    kind = "disk"

    def validate(self):
        if not self.radius > 0:
            raise InvalidShape("disk radius must be positive")

    def boundary_point(self, t):
        return np.stack([self.radius * np.cos(t), self.radius * np.sin(t)], axis=-1)

    def param_of(self, xy):
        return math.atan2(xy[1], xy[0])

    def describe(self):
        return {"kind": "disk", "radius": self.radius}


@dataclass(frozen=True)
class Ellipse:
    a: float
    b: float

    kind = "ellipse"

    def validate(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidShape("ellipse semi-axes must be positive")

    def boundary_point(self, t):
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def param_of(self, xy):
        return math.atan2(xy[1] / self.b, xy[0] / self.a)

    def describe(self):
        return {"kind": "ellipse", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PerturbedDisk:
    """Star-shaped boundary r(theta) = 1 + eps*cos(k theta)."""

    eps: float
    k: int

    kind = "perturbed-disk"

    def validate(self):
        if self.k < 0 or self.k != int(self.k):
            raise InvalidShape("perturbed-disk mode k must be a nonnegative integer")
        if not abs(self.eps) < 1.0 / (1.0 + self.k**2):
            raise InvalidShape("perturbed-disk needs |eps| < 1/(1+k^2)")

    def boundary_point(self, t):
        r = 1.0 + self.eps * np.cos(self.k * np.asarray(t))
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def param_of(self, xy):
        return math.atan2(xy[1], xy[0])

    def describe(self):
        return {"kind": "perturbed-disk", "eps": self.eps, "k": self.k}


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned w-by-h rectangle centered at the origin."""

    w: float
    h: float

    kind = "rectangle"

    def validate(self):
        if not (self.w > 0 and self.h > 0):
            raise InvalidShape("rectangle sides must be positive")

    def corners(self):
        hw, hh = 0.5 * self.w, 0.5 * self.h
        return np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])

    def describe(self):
        return {"kind": "rectangle", "w": self.w, "h": self.h}


@dataclass(frozen=True)
class Polygon:
    vertices: tuple

    kind = "polygon"

    def validate(self):
        pts = np.asarray(self.vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
            raise NonSimplePolygon("polygon needs at least 3 planar vertices")
        if _signed_area(pts) <= 0:
            raise NonSimplePolygon("polygon must be positively oriented")
        if not _is_simple(pts):
            raise NonSimplePolygon("polygon edges intersect")

    def corners(self):
        return np.asarray(self.vertices, dtype=float)

    def describe(self):
        return {"kind": "polygon", "vertices": [list(map(float, v)) for v in self.vertices]}


@dataclass(frozen=True)
class Annulus:
    r_in: float
    r_out: float

    kind = "annulus"

    def validate(self):
        if not (0 < self.r_in < self.r_out):
            raise InvalidShape("annulus needs 0 < r_in < r_out")

    def describe(self):
        return {"kind": "annulus", "r_in": self.r_in, "r_out": self.r_out}


_CURVED = (Disk, Ellipse, PerturbedDisk)
_POLYLINE = (Rectangle, Polygon)


def shape_from_dict(d):
    """Inverse of Shape.describe(); used by the CLI and result readers."""
    kind = d.get("kind")
    if kind == "disk":
        return Disk(float(d["radius"]))
    if kind == "ellipse":
        return Ellipse(float(d["a"]), float(d["b"]))
    if kind == "perturbed-disk":
        return PerturbedDisk(float(d["eps"]), int(d["k"]))
    if kind == "rectangle":
        return Rectangle(float(d["w"]), float(d["h"]))
    if kind == "polygon":
        return Polygon(tuple(tuple(map(float, v)) for v in d["vertices"]))
    if kind == "annulus":
        return Annulus(float(d["r_in"]), float(d["r_out"]))
    raise InvalidShape(f"unknown shape kind {kind!r}")


# ---------------------------------------------------------------------------
# mesh container
# ---------------------------------------------------------------------------

@dataclass
class TriangleMesh:
    """Piecewise-linear triangulation with marked boundary edges.

    vertices         (nv, 2) float64
    triangles        (nt, 3) int64, positively oriented
    boundary_edges   (nb, 2) int64, oriented with the domain on the left
    boundary_markers (nb,)   int64, one marker per boundary loop
    h                target edge length used to build the mesh
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_markers: np.ndarray
    h: float

    @property
    def nv(self):
        return self.vertices.shape[0]

    @property
    def nt(self):
        return self.triangles.shape[0]

    @property
    def nb(self):
        return self.boundary_edges.shape[0]

    def boundary_vertices(self):
        """Sorted ids of vertices lying on the boundary."""
        return np.unique(self.boundary_edges)


def signed_areas(mesh):
    p = mesh.vertices
    t = mesh.triangles
    d1 = p[t[:, 1]] - p[t[:, 0]]
    d2 = p[t[:, 2]] - p[t[:, 0]]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def volumes(mesh):
    """Return (area, boundary length) of the discretized domain."""
    vol = float(np.sum(signed_areas(mesh)))
    e = mesh.vertices[mesh.boundary_edges[:, 1]] - mesh.vertices[mesh.boundary_edges[:, 0]]
    bvol = float(np.sum(np.hypot(e[:, 0], e[:, 1])))
    return vol, bvol


def max_edge_length(mesh):
    p = mesh.vertices
    t = mesh.triangles
    m = 0.0
    for i, j in ((0, 1), (1, 2), (2, 0)):
        d = p[t[:, j]] - p[t[:, i]]
        m = max(m, float(np.max(np.hypot(d[:, 0], d[:, 1]))))
    return m


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def build_mesh(shape, h):
    """Mesh a catalog shape with target edge length h.

    Raises StepTooCoarse when h exceeds the distance from the fan anchor to
    the boundary (annulus: the gap r_out - r_in), and NonSimplePolygon for
    bad polygon input.
    """
    shape.validate()
    if not h > 0:
        raise StepTooCoarse("h must be positive")

    if isinstance(shape, Annulus):
        mesh = _annulus_grid(shape, h)
    else:
        if isinstance(shape, _CURVED):
            anchor = np.zeros(2)
            ring, rho = _curved_initial_ring(shape, anchor)
        else:
            corners = shape.corners()
            anchor = _polygon_centroid(corners)
            rho = _polygon_anchor_distance(corners, anchor)
            ring = _polyline_initial_ring(corners, rho)
        if h > rho:
            raise StepTooCoarse(f"h={h} too coarse: must not exceed {rho}")
        mesh = _fan(anchor, ring, h)

    while max_edge_length(mesh) > 1.5 * h:
        mesh = refine(mesh, shape)
    mesh.h = h
    validate_mesh(mesh, shape)
    return mesh


def _curved_initial_ring(shape, anchor):
    """Boundary polygon sampled at equal arc length, spacing ~ anchor distance."""
    t = np.linspace(0.0, 2.0 * math.pi, _CURVE_TABLE_N + 1)
    pts = shape.boundary_point(t)
    seg = np.hypot(*(pts[1:] - pts[:-1]).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = cum[-1]
    rho = float(np.min(np.hypot(pts[:, 0] - anchor[0], pts[:, 1] - anchor[1])))
    n0 = max(8, int(math.ceil(perimeter / rho)))
    s = np.arange(n0) * (perimeter / n0)
    params = np.interp(s, cum, t)
    return shape.boundary_point(params), rho


def _polyline_initial_ring(corners, rho):
    """Corner-preserving subdivision of each polygon edge to spacing <= rho."""
    ring = []
    n = len(corners)
    for i in range(n):
        p, q = corners[i], corners[(i + 1) % n]
        steps = max(1, int(math.ceil(np.hypot(*(q - p)) / rho)))
        for j in range(steps):
            ring.append(p + (q - p) * (j / steps))
    return np.asarray(ring)


def _fan(anchor, ring, h):
    n = len(ring)
    vertices = np.vstack([anchor[None, :], ring])
    triangles = np.array([[0, 1 + i, 1 + (i + 1) % n] for i in range(n)], dtype=np.int64)
    boundary = np.array([[1 + i, 1 + (i + 1) % n] for i in range(n)], dtype=np.int64)
    markers = np.zeros(n, dtype=np.int64)
    return TriangleMesh(vertices, triangles, boundary, markers, h)


def _annulus_grid(shape, h):
    if h > shape.r_out - shape.r_in:
        raise StepTooCoarse(f"h={h} exceeds annulus gap {shape.r_out - shape.r_in}")
    n_theta = max(8, int(math.ceil(2.0 * math.pi * shape.r_out / h)))
    n_r = max(1, int(math.ceil((shape.r_out - shape.r_in) / h)))
    radii = np.linspace(shape.r_in, shape.r_out, n_r + 1)
    theta = np.arange(n_theta) * (2.0 * math.pi / n_theta)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    vertices = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])

    def vid(j, i):
        return j * n_theta + i % n_theta

    tris = []
    for j in range(n_r):
        for i in range(n_theta):
            tris.append([vid(j, i), vid(j + 1, i), vid(j + 1, i + 1)])
            tris.append([vid(j, i), vid(j + 1, i + 1), vid(j, i + 1)])
    triangles = np.asarray(tris, dtype=np.int64)
    # domain-on-left orientation: inner circle runs clockwise, outer counterclockwise
    inner = [[vid(0, i + 1), vid(0, i)] for i in range(n_theta)]
    outer = [[vid(n_r, i), vid(n_r, i + 1)] for i in range(n_theta)]
    boundary = np.asarray(inner + outer, dtype=np.int64)
    markers = np.concatenate([np.zeros(n_theta, np.int64), np.ones(n_theta, np.int64)])
    return TriangleMesh(vertices, triangles, boundary, markers, h)


def _polygon_centroid(corners):
    x, y = corners[:, 0], corners[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * np.sum(cross)
    cx = np.sum((x + xn) * cross) / (6.0 * a)
    cy = np.sum((y + yn) * cross) / (6.0 * a)
    return np.array([cx, cy])


def _polygon_anchor_distance(corners, anchor):
    d = math.inf
    n = len(corners)
    for i in range(n):
        d = min(d, _point_segment_distance(anchor, corners[i], corners[(i + 1) % n]))
    return d


def _point_segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.hypot(*(a + t * ab - p)))


def _signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def _is_simple(pts):
    n = len(pts)
    segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint
            if _segments_intersect(*segs[i], *segs[j]):
                return False
    return True


def _segments_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-15 else (1 if v > 0 else -1)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return False


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def _edge_keys(pairs, nv):
    lo = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    hi = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    return lo * np.int64(nv + 1) + hi


def refine(mesh, shape):
    """Uniform 1-to-4 split; new boundary midpoints land on the exact curve."""
    p = mesh.vertices
    tris = mesh.triangles
    nv = mesh.nv

    edges = tris[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    keys = _edge_keys(edges, nv)
    uniq, inv = np.unique(keys, return_inverse=True)
    lo = (uniq // (nv + 1)).astype(np.int64)
    hi = (uniq % (nv + 1)).astype(np.int64)
    mids = 0.5 * (p[lo] + p[hi])

    bkeys = _edge_keys(mesh.boundary_edges, nv)
    bpos = np.searchsorted(uniq, bkeys)
    for pos in bpos:  # boundary edge count is O(1/h), loop stays cheap
        mids[pos] = _snap_midpoint(shape, p[lo[pos]], p[hi[pos]])

    mid_ids = (nv + inv).reshape(-1, 3)  # per triangle: (mab, mbc, mca)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    mab, mbc, mca = mid_ids[:, 0], mid_ids[:, 1], mid_ids[:, 2]
    new_tris = np.empty((4 * mesh.nt, 3), dtype=np.int64)
    new_tris[0::4] = np.column_stack([a, mab, mca])
    new_tris[1::4] = np.column_stack([b, mbc, mab])
    new_tris[2::4] = np.column_stack([c, mca, mbc])
    new_tris[3::4] = np.column_stack([mab, mbc, mca])

    bmid = nv + bpos
    new_bedges = np.empty((2 * mesh.nb, 2), dtype=np.int64)
    new_bedges[0::2] = np.column_stack([mesh.boundary_edges[:, 0], bmid])
    new_bedges[1::2] = np.column_stack([bmid, mesh.boundary_edges[:, 1]])
    new_markers = np.repeat(mesh.boundary_markers, 2)

    vertices = np.vstack([p, mids])
    return TriangleMesh(vertices, new_tris, new_bedges, new_markers, mesh.h / 2.0)


def _snap_midpoint(shape, pa, pb):
    if isinstance(shape, _POLYLINE):
        return 0.5 * (pa + pb)  # straight boundary, chord midpoint is exact
    if isinstance(shape, Annulus):
        xm = 0.5 * (pa + pb)
        t = math.atan2(xm[1], xm[0])
        rm = math.hypot(xm[0], xm[1])
        r = shape.r_in if abs(rm - shape.r_in) <= abs(rm - shape.r_out) else shape.r_out
        return np.array([r * math.cos(t), r * math.sin(t)])
    ta = shape.param_of(pa)
    tb = shape.param_of(pb)
    dt = math.remainder(tb - ta, 2.0 * math.pi)
    return np.asarray(shape.boundary_point(ta + 0.5 * dt), dtype=float)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_mesh(mesh, shape=None):
    """Audit all mesh invariants; raises InvalidMesh on the first violation."""
    if np.any(signed_areas(mesh) <= 0):
        raise InvalidMesh("triangle with nonpositive signed area")

    edges = mesh.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    keys = _edge_keys(edges, mesh.nv)
    uniq, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 2):
        raise InvalidMesh("edge shared by more than two triangles")
    single = set(uniq[counts == 1].tolist())
    listed = set(_edge_keys(mesh.boundary_edges, mesh.nv).tolist()) if mesh.nb else set()
    if single != listed:
        raise InvalidMesh("boundary_edges do not match the single-triangle edges")

    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    lo = (uniq // (mesh.nv + 1)).astype(np.int64)
    hi = (uniq % (mesh.nv + 1)).astype(np.int64)
    graph = coo_matrix((np.ones(len(uniq)), (lo, hi)), shape=(mesh.nv, mesh.nv))
    ncomp, _ = connected_components(graph, directed=False)
    if ncomp != 1:
        raise InvalidMesh("mesh is not connected")

    if shape is not None:
        for v in mesh.boundary_vertices():
            if _boundary_distance(shape, mesh.vertices[v]) > _SNAP_TOL:
                raise InvalidMesh(f"boundary vertex {v} is off the exact curve")


def _boundary_distance(shape, xy):
    if isinstance(shape, Annulus):
        r = math.hypot(xy[0], xy[1])
        return min(abs(r - shape.r_in), abs(r - shape.r_out))
    if isinstance(shape, _POLYLINE):
        corners = shape.corners()
        n = len(corners)
        return min(
            _point_segment_distance(xy, corners[i], corners[(i + 1) % n]) for i in range(n)
        )
    t = shape.param_of(xy)
    on_curve = np.asarray(shape.boundary_point(t), dtype=float)
    return float(np.hypot(*(on_curve - xy)))


def boundary_loops(mesh):
    """Boundary edge index lists grouped per marker, in marker order."""
    loops = {}
    for idx, m in enumerate(mesh.boundary_markers):
        loops.setdefault(int(m), []).append(idx)
    return [loops[m] for m in sorted(loops)]


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def write_tmesh(mesh, path):
    with open(path, "w", encoding="ascii") as f:
        f.write(f"{mesh.nv} {mesh.nt} {mesh.nb}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")
        for (i, j), m in zip(mesh.boundary_edges, mesh.boundary_markers):
            f.write(f"{i} {j} {m}\n")


def read_tmesh(path):
    with open(path, "r", encoding="ascii") as f:
        tokens = f.read().split()
    it = iter(tokens)
    try:
        nv, nt, nb = int(next(it)), int(next(it)), int(next(it))
        vertices = np.array([[float(next(it)), float(next(it))] for _ in range(nv)])
        triangles = np.array(
            [[int(next(it)), int(next(it)), int(next(it))] for _ in range(nt)], dtype=np.int64
        )
        rows = [[int(next(it)), int(next(it)), int(next(it))] for _ in range(nb)]
    except StopIteration:
        raise InvalidMesh("truncated .tmesh file") from None
    bedges = np.array([[r[0], r[1]] for r in rows], dtype=np.int64).reshape(nb, 2)
    markers = np.array([r[2] for r in rows], dtype=np.int64)
    mesh = TriangleMesh(vertices, triangles, bedges, markers, h=float("nan"))
    validate_mesh(mesh)
    return mesh
