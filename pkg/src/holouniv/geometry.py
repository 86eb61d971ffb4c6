"""Planar substrate: polylines, faces, compacts, domains, point location, distances.

All values are immutable after construction and every operation is a pure
function, so concurrent read access is safe and results do not depend on
evaluation order.  Curves are discretized polylines; circles and arcs expand
to polylines at a configurable resolution (default 256 vertices per closed
curve).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import GeometryError, PreconditionError

DEFAULT_CURVE_RESOLUTION = 256
DEFAULT_TOL = 1e-9


class Locate(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


# ---------------------------------------------------------------------------
# Polylines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polyline:
    """Ordered vertex chain, open (arc) or closed (loop).

    `simple` declares the no-self-intersection intent; it is verified lazily
    by :func:`validate_simple` and eagerly for face rings.  A closed polyline
    does not repeat its first vertex at the end.
    """

    vertices: tuple
    closed: bool = True
    simple: bool = True
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) >= 2 and self.closed and verts[0] == verts[-1]:
            verts = verts[:-1]
        if len(verts) < 2:
            raise GeometryError("polyline needs at least 2 vertices")
        arr = np.asarray(verts, dtype=complex)
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise GeometryError("polyline has non-finite coordinates")
        if np.any(arr[1:] == arr[:-1]):
            raise GeometryError("consecutive polyline vertices must be distinct")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_arr", arr)

    @property
    def array(self) -> np.ndarray:
        return self._arr

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Segment start/end arrays (closed polylines wrap around)."""
        a = self._arr
        if self.closed:
            return a, np.roll(a, -1)
        return a[:-1], a[1:]

    def signed_area(self) -> float:
        if not self.closed:
            return 0.0
        a, b = self.segments()
        return float(0.5 * np.sum(a.real * b.imag - b.real * a.imag))

    def length(self) -> float:
        a, b = self.segments()
        return float(np.sum(np.abs(b - a)))

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.vertices)), self.closed, self.simple)

    def bbox(self) -> tuple[float, float, float, float]:
        a = self._arr
        return (float(a.real.min()), float(a.imag.min()),
                float(a.real.max()), float(a.imag.max()))

    def is_simple(self) -> bool:
        try:
            validate_simple(self)
            return True
        except GeometryError:
            return False


_CROSS_EPS = 1e-12


def _strict_straddle(d_lo, d_hi, tol):
    """Both sides strictly beyond the roundoff band, on opposite sides."""
    return ((d_lo > tol) & (d_hi < -tol)) | ((d_lo < -tol) & (d_hi > tol))


def validate_simple(line: Polyline) -> None:
    """Raise GeometryError if the polyline properly self-intersects."""
    a, b = line.segments()
    n = len(a)
    if n < 3:
        return
    ia, ib = np.triu_indices(n, k=2)
    if line.closed:
        keep = ~((ia == 0) & (ib == n - 1))
        ia, ib = ia[keep], ib[keep]
    p, q = a[ia], b[ia]
    r, s = a[ib], b[ib]
    d1 = np.imag(np.conj(s - r) * (p - r))
    d2 = np.imag(np.conj(s - r) * (q - r))
    d3 = np.imag(np.conj(q - p) * (r - p))
    d4 = np.imag(np.conj(q - p) * (s - p))
    tol1 = _CROSS_EPS * np.abs(s - r) * np.maximum(np.abs(p - r), np.abs(q - r))
    tol2 = _CROSS_EPS * np.abs(q - p) * np.maximum(np.abs(r - p), np.abs(s - p))
    crossing = _strict_straddle(d1, d2, tol1) & _strict_straddle(d3, d4, tol2)
    if np.any(crossing):
        k = int(np.argmax(crossing))
        raise GeometryError(
            f"self-intersection between segments {ia[k]} and {ib[k]} "
            f"of a polyline declared simple")


def _point_in_ring(z: complex, ring: Polyline) -> bool:
    """Even-odd parity test with a half-open vertical rule (boundary excluded)."""
    a, b = ring.segments()
    x, y = z.real, z.imag
    y1, y2 = a.imag, b.imag
    straddle = (y1 <= y) != (y2 <= y)
    if not np.any(straddle):
        return False
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (y - y1[straddle]) / (y2[straddle] - y1[straddle])
    xc = a.real[straddle] + t * (b.real[straddle] - a.real[straddle])
    return bool(np.count_nonzero(xc > x) % 2)


def _points_in_ring(zs: np.ndarray, ring: Polyline) -> np.ndarray:
    """Vectorized parity test for many points against one ring."""
    a, b = ring.segments()
    x = zs.real[:, None]
    y = zs.imag[:, None]
    y1, y2 = a.imag[None, :], b.imag[None, :]
    straddle = (y1 <= y) != (y2 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(straddle, (y - y1) / (y2 - y1), 0.0)
    xc = a.real[None, :] + t * (b.real[None, :] - a.real[None, :])
    hits = straddle & (xc > x)
    return (np.count_nonzero(hits, axis=1) % 2).astype(bool)


def _dist_point_segments(z: complex, a: np.ndarray, b: np.ndarray) -> float:
    d = b - a
    L2 = (d.real ** 2 + d.imag ** 2)
    w = z - a
    t = np.clip((w.real * d.real + w.imag * d.imag) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a + t * d
    return float(np.min(np.abs(z - proj)))


def _dist_points_segments(zs: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min distance of each point in `zs` to the segment set (a, b)."""
    d = (b - a)[None, :]
    L2 = d.real ** 2 + d.imag ** 2
    w = zs[:, None] - a[None, :]
    t = np.clip((w.real * d.real + w.imag * d.imag) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a[None, :] + t * d
    return np.min(np.abs(zs[:, None] - proj), axis=1)


def _segments_cross(a1, b1, a2, b2) -> bool:
    """True if any segment of set 1 properly crosses any segment of set 2."""
    p = a1[:, None]
    q = b1[:, None]
    r = a2[None, :]
    s = b2[None, :]
    d1 = np.imag(np.conj(s - r) * (p - r))
    d2 = np.imag(np.conj(s - r) * (q - r))
    d3 = np.imag(np.conj(q - p) * (r - p))
    d4 = np.imag(np.conj(q - p) * (s - p))
    tol1 = _CROSS_EPS * np.abs(s - r) * np.maximum(np.abs(p - r), np.abs(q - r))
    tol2 = _CROSS_EPS * np.abs(q - p) * np.maximum(np.abs(r - p), np.abs(s - p))
    return bool(np.any(_strict_straddle(d1, d2, tol1) & _strict_straddle(d3, d4, tol2)))


# ---------------------------------------------------------------------------
# Faces and compacts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Face:
    """Filled region bounded by a ccw outer ring and cw hole rings.

    Orientations are normalized at construction; hole containment and
    pairwise disjointness are validated.
    """

    outer: Polyline
    holes: tuple = ()

    def __post_init__(self):
        if not self.outer.closed:
            raise GeometryError("face outer ring must be closed")
        validate_simple(self.outer)
        outer = self.outer if self.outer.signed_area() > 0 else self.outer.reversed()
        holes = []
        for h in self.holes:
            if not h.closed:
                raise GeometryError("face hole ring must be closed")
            validate_simple(h)
            holes.append(h if h.signed_area() < 0 else h.reversed())
        for h in holes:
            if abs(h.signed_area()) >= abs(outer.signed_area()):
                raise GeometryError("hole area must be smaller than outer area")
            if not _point_in_ring(h.vertices[0], outer):
                raise GeometryError("hole ring must lie inside the outer ring")
        for i in range(len(holes)):
            for j in range(i + 1, len(holes)):
                if _point_in_ring(holes[i].vertices[0], holes[j]) or \
                        _point_in_ring(holes[j].vertices[0], holes[i]):
                    raise GeometryError("face holes must be pairwise disjoint")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", tuple(holes))

    def rings(self) -> tuple:
        return (self.outer,) + self.holes

    def contains_point(self, z: complex) -> bool:
        """Strict interior test (boundary handled separately by callers)."""
        if not _point_in_ring(z, self.outer):
            return False
        return not any(_point_in_ring(z, h) for h in self.holes)


@dataclass(frozen=True)
class PolyCompact:
    """Compact planar set: fat (faces with holes) or thin (polyline pieces)."""

    faces: tuple = ()
    pieces: tuple = ()

    def __post_init__(self):
        if self.faces and self.pieces:
            raise GeometryError("a compact is fat or thin, never both")
        if not self.faces and not self.pieces:
            raise GeometryError("empty compact")
        object.__setattr__(self, "faces", tuple(self.faces))
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @staticmethod
    def fat(faces: Iterable[Face]) -> "PolyCompact":
        return PolyCompact(faces=tuple(faces))

    @staticmethod
    def thin(pieces: Iterable[Polyline]) -> "PolyCompact":
        return PolyCompact(pieces=tuple(pieces))

    @property
    def is_fat(self) -> bool:
        return bool(self.faces)

    @property
    def is_thin(self) -> bool:
        return bool(self.pieces)

    def boundary_polylines(self) -> list:
        if self.is_fat:
            out: list = []
            for f in self.faces:
                out.extend(f.rings())
            return out
        return list(self.pieces)

    def all_segments(self) -> tuple[np.ndarray, np.ndarray]:
        starts, ends = [], []
        for line in self.boundary_polylines():
            a, b = line.segments()
            starts.append(a)
            ends.append(b)
        return np.concatenate(starts), np.concatenate(ends)

    def bbox(self) -> tuple[float, float, float, float]:
        boxes = [p.bbox() for p in self.boundary_polylines()]
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))

    def diameter_hint(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def piece_representatives(self) -> list:
        """One vertex per connected piece (face or polyline)."""
        if self.is_fat:
            return [f.outer.vertices[0] for f in self.faces]
        return [p.vertices[0] for p in self.pieces]


def union_compacts(*compacts: PolyCompact) -> PolyCompact:
    """Union of pairwise disjoint compacts of the same kind."""
    kinds = {c.is_fat for c in compacts}
    if len(kinds) != 1:
        raise GeometryError("cannot union fat and thin compacts into one kind")
    if compacts[0].is_fat:
        return PolyCompact.fat([f for c in compacts for f in c.faces])
    return PolyCompact.thin([p for c in compacts for p in c.pieces])


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FatObstacle:
    face: Face

    def witness_points(self) -> list:
        verts = list(self.face.outer.vertices)
        centroid = complex(np.mean(self.face.outer.array))
        pts = [centroid] if self.face.contains_point(centroid) else []
        return pts + verts

    def boundary_polylines(self) -> list:
        return list(self.face.rings())


@dataclass(frozen=True)
class ThinObstacle:
    piece: Polyline

    def witness_points(self) -> list:
        return list(self.piece.vertices)

    def boundary_polylines(self) -> list:
        return [self.piece]


@dataclass(frozen=True)
class PointObstacle:
    point: complex

    def witness_points(self) -> list:
        return [self.point]

    def boundary_polylines(self) -> list:
        return []


Obstacle = Union[FatObstacle, ThinObstacle, PointObstacle]


@dataclass(frozen=True)
class Truncation:
    """Marks a finite-obstacle model standing in for an infinitely connected domain."""

    generator_id: str
    cutoff: int


@dataclass(frozen=True)
class Domain:
    """Connected open set: optional outer boundary minus a list of obstacles.

    No outer boundary means the unbounded domain (plane minus obstacles).
    Connectivity is validated at scene load via rasterization, not here.
    """

    outer: Optional[Polyline] = None
    obstacles: tuple = ()
    truncation: Optional[Truncation] = None

    def __post_init__(self):
        if self.outer is not None:
            if not self.outer.closed:
                raise GeometryError("domain outer boundary must be closed")
            validate_simple(self.outer)
            out = self.outer if self.outer.signed_area() > 0 else self.outer.reversed()
            object.__setattr__(self, "outer", out)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def is_bounded(self) -> bool:
        return self.outer is not None

    @property
    def hole_count(self) -> int:
        return len(self.obstacles)

    @property
    def simply_connected(self) -> bool:
        return not self.obstacles

    def obstacle_witnesses(self) -> list:
        """Representative points of the complement (one list, order stable)."""
        pts: list = []
        for ob in self.obstacles:
            pts.extend(ob.witness_points())
        return pts

    def boundary_polylines(self) -> list:
        lines = [self.outer] if self.outer is not None else []
        for ob in self.obstacles:
            lines.extend(ob.boundary_polylines())
        return lines

    def boundary_point_obstacles(self) -> list:
        return [ob.point for ob in self.obstacles if isinstance(ob, PointObstacle)]

    def bbox_hint(self) -> tuple[float, float, float, float]:
        """Bounding box of the declared boundary data (may be empty for the plane)."""
        boxes = [ln.bbox() for ln in self.boundary_polylines()]
        pts = self.boundary_point_obstacles()
        if pts:
            xs = [p.real for p in pts]
            ys = [p.imag for p in pts]
            boxes.append((min(xs), min(ys), max(xs), max(ys)))
        if not boxes:
            return (-1.0, -1.0, 1.0, 1.0)
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))


# ---------------------------------------------------------------------------
# Point location
# ---------------------------------------------------------------------------


def _boundary_distance(obj, z: complex) -> float:
    lines = obj.boundary_polylines()
    best = math.inf
    for line in lines:
        a, b = line.segments()
        best = min(best, _dist_point_segments(z, a, b))
    if isinstance(obj, Domain):
        for p in obj.boundary_point_obstacles():
            best = min(best, abs(z - p))
    return best


def point_locate(obj, z: complex, tol: float = DEFAULT_TOL) -> Locate:
    """Classify `z` against a compact or a domain.

    Signed-crossing parity decides inside/outside; a `tol` band around the
    boundary (and around point obstacles of a domain) reports BOUNDARY.
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    z = complex(z)
    if isinstance(obj, PolyCompact):
        if _boundary_distance(obj, z) <= tol:
            return Locate.BOUNDARY
        if obj.is_fat and any(f.contains_point(z) for f in obj.faces):
            return Locate.INSIDE
        return Locate.OUTSIDE
    if isinstance(obj, Domain):
        if _boundary_distance(obj, z) <= tol:
            return Locate.BOUNDARY
        if obj.outer is not None and not _point_in_ring(z, obj.outer):
            return Locate.OUTSIDE
        for ob in obj.obstacles:
            if isinstance(ob, FatObstacle) and ob.face.contains_point(z):
                return Locate.OUTSIDE
        return Locate.INSIDE
    if isinstance(obj, Face):
        return point_locate(PolyCompact.fat([obj]), z, tol)
    if isinstance(obj, Polyline):
        a, b = obj.segments()
        return Locate.BOUNDARY if _dist_point_segments(z, a, b) <= tol else Locate.OUTSIDE
    raise TypeError(f"point_locate does not accept {type(obj)!r}")


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def _min_dist_segment_sets(a1, b1, a2, b2) -> float:
    if _segments_cross(a1, b1, a2, b2):
        return 0.0
    d = np.inf
    d = min(d, float(np.min(_dist_points_segments(a1, a2, b2))))
    d = min(d, float(np.min(_dist_points_segments(b1, a2, b2))))
    d = min(d, float(np.min(_dist_points_segments(a2, a1, b1))))
    d = min(d, float(np.min(_dist_points_segments(b2, a1, b1))))
    return d


def set_distance(A: PolyCompact, B: PolyCompact) -> float:
    """Distance between two compacts as point sets (0 iff they intersect).

    Boundary-to-boundary segment distance, with containment checks so that a
    piece of one set lying inside a fat region of the other reports 0.
    """
    a1, b1 = A.all_segments()
    a2, b2 = B.all_segments()
    d = _min_dist_segment_sets(a1, b1, a2, b2)
    if d == 0.0:
        return 0.0
    if B.is_fat:
        for rep in A.piece_representatives():
            if any(f.contains_point(rep) for f in B.faces):
                return 0.0
    if A.is_fat:
        for rep in B.piece_representatives():
            if any(f.contains_point(rep) for f in A.faces):
                return 0.0
    return d


def compact_in_domain(K: PolyCompact, omega: Domain, tol: float = DEFAULT_TOL):
    """Check K subset of the open set omega; returns (ok, witness)."""
    for rep in (v for line in K.boundary_polylines() for v in line.vertices):
        if point_locate(omega, rep, tol) is not Locate.INSIDE:
            return False, rep
    ka, kb = K.all_segments()
    for line in omega.boundary_polylines():
        oa, ob = line.segments()
        if _segments_cross(ka, kb, oa, ob):
            return False, None
    if K.is_fat:
        for w in omega.obstacle_witnesses():
            if point_locate(K, w, tol) is not Locate.OUTSIDE:
                return False, w
    return True, None


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridTransform:
    """Maps cell indices (row, col) to cell-centre complex coordinates."""

    x0: float
    y0: float
    cell: float
    shape: tuple

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = self.shape
        ys = self.y0 + (np.arange(rows) + 0.5) * self.cell
        xs = self.x0 + (np.arange(cols) + 0.5) * self.cell
        return xs, ys

    def cell_center(self, row: int, col: int) -> complex:
        return complex(self.x0 + (col + 0.5) * self.cell,
                       self.y0 + (row + 0.5) * self.cell)

    def cell_index(self, z: complex):
        col = int((z.real - self.x0) / self.cell)
        row = int((z.imag - self.y0) / self.cell)
        rows, cols = self.shape
        if 0 <= row < rows and 0 <= col < cols:
            return row, col
        return None


def _grid_for_bbox(bbox, resolution: int) -> GridTransform:
    x0, y0, x1, y1 = bbox
    w = max(x1 - x0, 1e-12)
    h = max(y1 - y0, 1e-12)
    cell = max(w, h) / resolution
    cols = max(2, int(math.ceil(w / cell)))
    rows = max(2, int(math.ceil(h / cell)))
    return GridTransform(x0, y0, cell, (rows, cols))


def _fill_rings_parity(grid: np.ndarray, tr: GridTransform, rings: Sequence[Polyline]) -> None:
    """XOR even-odd fill of closed rings into `grid` via scanline crossing deltas."""
    rows, cols = tr.shape
    delta = np.zeros((rows, cols + 1), dtype=np.int64)
    ys = tr.y0 + (np.arange(rows) + 0.5) * tr.cell
    for ring in rings:
        a, b = ring.segments()
        y1 = a.imag[:, None]
        y2 = b.imag[:, None]
        straddle = (y1 <= ys[None, :]) != (y2 <= ys[None, :])
        if not straddle.any():
            continue
        seg_idx, row_idx = np.nonzero(straddle)
        t = (ys[row_idx] - a.imag[seg_idx]) / (b.imag[seg_idx] - a.imag[seg_idx])
        xc = a.real[seg_idx] + t * (b.real[seg_idx] - a.real[seg_idx])
        col = np.ceil((xc - tr.x0) / tr.cell - 0.5).astype(np.int64)
        col = np.clip(col, 0, cols)
        np.add.at(delta, (row_idx, col), 1)
    parity = (np.cumsum(delta[:, :-1], axis=1) % 2).astype(bool)
    grid ^= parity


def _mark_polyline_cells(grid: np.ndarray, tr: GridTransform, line: Polyline) -> None:
    """Mark the cells a polyline passes through (half-cell stepping)."""
    rows, cols = tr.shape
    a, b = line.segments()
    step = tr.cell * 0.5
    for za, zb in zip(a, b):
        n = max(1, int(abs(zb - za) / step))
        t = np.linspace(0.0, 1.0, n + 1)
        pts = za + t * (zb - za)
        ccol = np.floor((pts.real - tr.x0) / tr.cell).astype(int)
        crow = np.floor((pts.imag - tr.y0) / tr.cell).astype(int)
        ok = (crow >= 0) & (crow < rows) & (ccol >= 0) & (ccol < cols)
        grid[crow[ok], ccol[ok]] = True


def rasterize(obj, bbox, resolution: int) -> tuple[np.ndarray, GridTransform]:
    """Bit grid over `bbox`: cell true iff its centre is inside or on `obj`.

    Boundary cells are those the boundary polylines pass through, so thin
    pieces show up as one-cell-wide bands.
    """
    if resolution < 16:
        raise PreconditionError("resolution must be at least 16")
    if resolution > 8192:
        raise PreconditionError("resolution above the 8192 overflow guard")
    tr = _grid_for_bbox(bbox, resolution)
    grid = np.zeros(tr.shape, dtype=bool)
    if isinstance(obj, PolyCompact):
        if obj.is_fat:
            rings = [r for f in obj.faces for r in f.rings()]
            _fill_rings_parity(grid, tr, rings)
        for line in obj.boundary_polylines():
            _mark_polyline_cells(grid, tr, line)
        return grid, tr
    if isinstance(obj, Domain):
        if obj.outer is not None:
            _fill_rings_parity(grid, tr, [obj.outer])
        else:
            grid[:] = True
        blocked = np.zeros(tr.shape, dtype=bool)
        fat_rings = [r for ob in obj.obstacles if isinstance(ob, FatObstacle)
                     for r in ob.face.rings()]
        if fat_rings:
            _fill_rings_parity(blocked, tr, fat_rings)
        for line in obj.boundary_polylines():
            _mark_polyline_cells(blocked, tr, line)
        for p in obj.boundary_point_obstacles():
            idx = tr.cell_index(p)
            if idx is not None:
                blocked[idx] = True
        grid &= ~blocked
        return grid, tr
    raise TypeError(f"rasterize does not accept {type(obj)!r}")


# ---------------------------------------------------------------------------
# Shape constructors and sampling helpers
# ---------------------------------------------------------------------------


def circle_polyline(center: complex, radius: float,
                    n: int = DEFAULT_CURVE_RESOLUTION, ccw: bool = True) -> Polyline:
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    if not ccw:
        theta = theta[::-1]
    pts = center + radius * np.exp(1j * theta)
    return Polyline(tuple(pts), closed=True)

def arc_polyline(center: complex, radius: float, theta0: float, theta1: float,
                 n: int = DEFAULT_CURVE_RESOLUTION) -> Polyline:
    theta = np.linspace(theta0, theta1, max(2, n))
    pts = center + radius * np.exp(1j * theta)
    return Polyline(tuple(pts), closed=False)


def segment_polyline(a: complex, b: complex, n: int = 2) -> Polyline:
    t = np.linspace(0.0, 1.0, max(2, n))
    return Polyline(tuple(a + t * (b - a)), closed=False)


def rect_polyline(x0: float, y0: float, x1: float, y1: float) -> Polyline:
    return Polyline((complex(x0, y0), complex(x1, y0),
                     complex(x1, y1), complex(x0, y1)), closed=True)


def disc_face(center: complex, radius: float, n: int = DEFAULT_CURVE_RESOLUTION) -> Face:
    return Face(circle_polyline(center, radius, n))


def annulus_face(center: complex, inner: float, outer: float,
                 n: int = DEFAULT_CURVE_RESOLUTION) -> Face:
    return Face(circle_polyline(center, outer, n),
                (circle_polyline(center, inner, n, ccw=False),))


def disc_compact(center: complex, radius: float, n: int = DEFAULT_CURVE_RESOLUTION) -> PolyCompact:
    return PolyCompact.fat([disc_face(center, radius, n)])


def annulus_compact(center: complex, inner: float, outer: float,
                    n: int = DEFAULT_CURVE_RESOLUTION) -> PolyCompact:
    return PolyCompact.fat([annulus_face(center, inner, outer, n)])


def sample_polyline(line: Polyline, count: int) -> np.ndarray:
    """`count` points spread by arclength along the polyline."""
    a, b = line.segments()
    seg_len = np.abs(b - a)
    total = float(seg_len.sum())
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    if line.closed:
        s = np.linspace(0.0, total, count, endpoint=False)
    else:
        s = np.linspace(0.0, total, count)
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(a) - 1)
    local = (s - cum[idx]) / np.where(seg_len[idx] > 0, seg_len[idx], 1.0)
    return a[idx] + local * (b[idx] - a[idx])


def sample_compact(K: PolyCompact, count: int) -> np.ndarray:
    """Boundary samples of a compact, roughly `count` in total, split by arclength."""
    lines = K.boundary_polylines()
    lengths = np.array([max(ln.length(), 1e-12) for ln in lines])
    weights = lengths / lengths.sum()
    out = [sample_polyline(line, max(8, int(round(count * w))))
           for line, w in zip(lines, weights)]
    return np.concatenate(out)


def decimate_polyline(points: np.ndarray, tol: float, closed: bool) -> np.ndarray:
    """Drop points whose removal keeps the chain within `tol` (greedy sweep)."""
    pts = np.asarray(points)
    if len(pts) <= 8:
        return pts
    keep = [0]
    anchor = 0
    for i in range(2, len(pts)):
        seg_a, seg_b = pts[anchor], pts[i]
        chord = pts[anchor + 1:i]
        if len(chord) == 0:
            continue
        d = seg_b - seg_a
        L2 = (d.real ** 2 + d.imag ** 2) or 1.0
        w = chord - seg_a
        t = np.clip((w.real * d.real + w.imag * d.imag) / L2, 0.0, 1.0)
        err = np.abs(chord - (seg_a + t * d))
        if err.max() > tol:
            keep.append(i - 1)
            anchor = i - 1
    keep.append(len(pts) - 1)
    out = pts[sorted(set(keep))]
    if closed and len(out) >= 2 and out[0] == out[-1]:
        out = out[:-1]
    return out
