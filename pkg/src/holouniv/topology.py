"""Topological predicates on compacts and domains.

Two backends cooperate here.  Fat compacts (and thin compacts made of simple
closed curves) get an exact census of their complement holes from the nesting
of their boundary rings, which stays correct across widely different length
scales.  A raster flood-fill backend handles everything else and doubles as
the independent oracle the test suite compares against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage
from skimage import measure

from .errors import (ConstructionError, GeometryError, HolounivError,
                     IndeterminateError, PreconditionError)
from .geometry import (Domain, Face, GridTransform, Locate, PolyCompact,
                       Polyline, _point_in_ring, _segments_cross,
                       compact_in_domain, decimate_polyline, point_locate,
                       rasterize, set_distance, union_compacts)

COMPONENT_RESOLUTION_CAP = 4096


# ---------------------------------------------------------------------------
# Raster complement components
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Component:
    """One connected component of the complement of a compact."""

    bounded: bool
    witness_point: complex
    region: np.ndarray
    transform: GridTransform

    def contains(self, z: complex) -> bool:
        idx = self.transform.cell_index(z)
        return idx is not None and bool(self.region[idx])


def _inflated_bbox(K: PolyCompact, factor: float = 0.3):
    x0, y0, x1, y1 = K.bbox()
    w, h = x1 - x0, y1 - y0
    pad = factor * max(w, h, 1e-9)
    return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)


def _components_at(K: PolyCompact, resolution: int) -> list:
    grid, tr = rasterize(K, _inflated_bbox(K), resolution)
    comp = ~grid
    labels, nlab = ndimage.label(comp)
    border = np.unique(np.concatenate([
        labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]))
    border = set(int(b) for b in border if b != 0)
    out = []
    for lab in range(1, nlab + 1):
        mask = labels == lab
        if not mask.any():
            continue
        edt = ndimage.distance_transform_edt(mask)
        r, c = np.unravel_index(int(np.argmax(edt)), mask.shape)
        witness = tr.cell_center(int(r), int(c))
        out.append(Component(bounded=lab not in border, witness_point=witness,
                             region=mask, transform=tr))
    out.sort(key=lambda c: (c.bounded, c.witness_point.real, c.witness_point.imag))
    return out


def complement_components(K: PolyCompact, resolution: int = 256) -> list:
    """Complement components of K by flood fill, re-checked at doubled resolution.

    Raises IndeterminateError with the disagreeing counts if the bounded
    component count keeps changing up to the resolution cap.
    """
    counts = []
    res = max(16, resolution)
    prev = _components_at(K, res)
    counts.append(sum(1 for c in prev if c.bounded))
    while res * 2 <= COMPONENT_RESOLUTION_CAP:
        res *= 2
        cur = _components_at(K, res)
        counts.append(sum(1 for c in cur if c.bounded))
        if counts[-1] == counts[-2]:
            return cur
        prev = cur
    raise IndeterminateError(
        f"component count unstable up to resolution {COMPONENT_RESOLUTION_CAP}",
        counts=counts)


def bounded_components(K: PolyCompact, resolution: int = 256) -> list:
    return [c for c in complement_components(K, resolution) if c.bounded]


# ---------------------------------------------------------------------------
# Exact hole census (nesting of boundary rings)
# ---------------------------------------------------------------------------


class _NeedsRaster(HolounivError):
    """Census input outside the exact backend's scope (non-simple rings)."""


@dataclass(frozen=True)
class HoleRegion:
    """A bounded complement component: interior of `boundary` minus nested fills."""

    boundary: Polyline
    inner_fills: tuple
    witness: complex

    def contains(self, z: complex) -> bool:
        if not _point_in_ring(z, self.boundary):
            return False
        return not any(_point_in_ring(z, f) or _on_ring(z, f) for f in self.inner_fills)


def _on_ring(z: complex, ring: Polyline, tol: float = 1e-12) -> bool:
    from .geometry import _dist_point_segments
    a, b = ring.segments()
    return _dist_point_segments(z, a, b) <= tol * max(1.0, abs(z))


def _census_rings(*parts: PolyCompact):
    """(fill rings, hole-bounding rings, open arcs) for the exact census."""
    fills: list[Polyline] = []
    holes: list[Polyline] = []
    arcs: list[Polyline] = []
    for K in parts:
        if K.is_fat:
            for f in K.faces:
                fills.append(f.outer)
                holes.extend(f.holes)
        else:
            for p in K.pieces:
                if p.closed:
                    if not p.is_simple():
                        raise _NeedsRaster("thin closed piece is not simple")
                    fills.append(p)
                    holes.append(p)
                else:
                    arcs.append(p)
    return fills, holes, arcs


def _region_witness(hole_ring: Polyline, inner_fills: Sequence[Polyline],
                    parts: Sequence[PolyCompact]) -> complex:
    x0, y0, x1, y1 = hole_ring.bbox()
    local = max(min(x1 - x0, y1 - y0), 1e-12)
    a, b = hole_ring.segments()
    order = np.argsort(-np.abs(b - a))[:64]
    for eps in (local / 8, local / 32, local / 128, local / 512, local / 4096):
        for k in order:
            mid = (a[k] + b[k]) / 2
            nrm = 1j * (b[k] - a[k]) / abs(b[k] - a[k])
            for sign in (1.0, -1.0):
                cand = mid + sign * eps * nrm
                if not _point_in_ring(cand, hole_ring):
                    continue
                if any(_point_in_ring(cand, f) or _on_ring(cand, f, 1e-9)
                       for f in inner_fills):
                    continue
                if all(point_locate(K, cand, eps / 8) is Locate.OUTSIDE
                       for K in parts):
                    return cand
    raise GeometryError("could not place a witness point inside a hole region")


def hole_regions(*parts: PolyCompact) -> list:
    """Exact list of holes of the union of disjoint compacts.

    One region per hole-bounding ring.  Works for fat compacts and thin
    compacts whose closed pieces are simple; open arcs never bound or split
    complement components, so they only matter for witness placement.
    Raises _NeedsRaster outside that scope.
    """
    fills, holes, _arcs = _census_rings(*parts)
    regions = []
    for H in holes:
        inner = [F for F in fills
                 if F is not H and _point_in_ring(F.vertices[0], H)]
        witness = _region_witness(H, inner, parts)
        regions.append(HoleRegion(boundary=H, inner_fills=tuple(inner),
                                  witness=witness))
    return regions


def hole_count(K: PolyCompact, resolution: int = 256) -> int:
    """Number of holes, exact backend first, raster fallback."""
    try:
        return len(hole_regions(K))
    except _NeedsRaster:
        return len(bounded_components(K, resolution))


# ---------------------------------------------------------------------------
# Polynomial hull
# ---------------------------------------------------------------------------


def polynomial_hull(K: PolyCompact) -> PolyCompact:
    """Union of K and all of its holes.

    Fat compacts (and thin compacts of simple closed curves) fill exactly by
    keeping the outermost fill rings.  A thin compact made of open arcs is its
    own hull.
    """
    if K.is_thin and all(not p.closed for p in K.pieces):
        return K
    try:
        fills, _holes, arcs = _census_rings(K)
    except _NeedsRaster:
        raise GeometryError("polynomial hull needs simple closed rings; "
                            "use complement_components for irregular curves")
    maximal = []
    for i, F in enumerate(fills):
        inside_other = any(j != i and _point_in_ring(F.vertices[0], G)
                           for j, G in enumerate(fills))
        if not inside_other:
            maximal.append(F)
    for arc in arcs:
        if not any(_point_in_ring(arc.vertices[0], F) for F in maximal):
            raise GeometryError("thin compact mixes open arcs outside closed "
                                "curves; hull is not representable in one kind")
    ccw = [f if f.signed_area() > 0 else f.reversed() for f in maximal]
    return PolyCompact.fat([Face(outer=f) for f in ccw])


def in_polynomial_hull(K: PolyCompact, z: complex, tol: float = 1e-9) -> bool:
    """Membership in K together with its holes, without building the hull."""
    if point_locate(K, z, tol) is not Locate.OUTSIDE:
        return True
    try:
        return any(r.contains(z) for r in hole_regions(K))
    except _NeedsRaster:
        return any(c.contains(z) for c in bounded_components(K))


# ---------------------------------------------------------------------------
# Domain-relative predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityVerdict:
    yes: bool
    offending_hole_witness: Optional[complex] = None

    def __bool__(self) -> bool:
        return self.yes


def _obstacle_points_in_region(region: HoleRegion, omega: Domain) -> bool:
    return any(region.contains(w) for w in omega.obstacle_witnesses())


def is_union_omega_convex(parts: Sequence[PolyCompact], omega: Domain) -> ConvexityVerdict:
    """Convexity test for a union of pairwise disjoint compacts (mixed kinds allowed)."""
    try:
        regions = hole_regions(*parts)
    except _NeedsRaster:
        return _raster_union_omega_convex(parts, omega)
    for region in regions:
        if not _obstacle_points_in_region(region, omega):
            return ConvexityVerdict(False, region.witness)
    return ConvexityVerdict(True)


def is_omega_convex(K: PolyCompact, omega: Domain,
                    check_containment: bool = True) -> ConvexityVerdict:
    """Does every hole of K contain a point of the complement of omega?

    Obstacles are connected, so a single obstacle witness point inside a hole
    certifies the whole obstacle sits in it.
    """
    if check_containment:
        ok, witness = compact_in_domain(K, omega)
        if not ok:
            raise PreconditionError("K is not contained in the domain",
                                    witness=witness)
    return is_union_omega_convex([K], omega)


def _raster_union_omega_convex(parts: Sequence[PolyCompact], omega: Domain,
                               resolution: int = 512) -> ConvexityVerdict:
    comps = [c for c in _components_of_union(parts, resolution) if c.bounded]
    witnesses = omega.obstacle_witnesses()
    for comp in comps:
        if not any(comp.contains(w) for w in witnesses):
            return ConvexityVerdict(False, comp.witness_point)
    return ConvexityVerdict(True)


def _components_of_union(parts: Sequence[PolyCompact], resolution: int) -> list:
    boxes = [K.bbox() for K in parts]
    bbox = (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))
    w, h = bbox[2] - bbox[0], bbox[3] - bbox[1]
    pad = 0.3 * max(w, h, 1e-9)
    bbox = (bbox[0] - pad, bbox[1] - pad, bbox[2] + pad, bbox[3] + pad)
    grid = None
    tr = None
    for K in parts:
        g, tr = rasterize(K, bbox, resolution)
        grid = g if grid is None else (grid | g)
    comp = ~grid
    labels, nlab = ndimage.label(comp)
    border = set(int(b) for b in np.unique(np.concatenate([
        labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])) if b != 0)
    out = []
    for lab in range(1, nlab + 1):
        mask = labels == lab
        edt = ndimage.distance_transform_edt(mask)
        r, c = np.unravel_index(int(np.argmax(edt)), mask.shape)
        out.append(Component(bounded=lab not in border,
                             witness_point=tr.cell_center(int(r), int(c)),
                             region=mask, transform=tr))
    out.sort(key=lambda c: (c.bounded, c.witness_point.real, c.witness_point.imag))
    return out


def is_omega_connected(K: PolyCompact, omega: Domain) -> bool:
    """No hole when omega is simply connected, at least one hole otherwise."""
    if K.is_fat and len(K.faces) != 1 or K.is_thin and len(K.pieces) != 1:
        raise PreconditionError("K must be connected (a single face or piece)")
    holes = hole_count(K)
    return holes == 0 if omega.simply_connected else holes >= 1


@dataclass(frozen=True)
class Admissibility:
    """Membership verdict for the approximation-ready family of compacts."""

    yes: bool
    reasons: tuple = ()

    def __bool__(self) -> bool:
        return self.yes


def is_admissible(K: PolyCompact, omega: Domain) -> Admissibility:
    """Regular, connected, omega-connected and omega-convex.

    Thin compacts skip the omega-connected clause: it only constrains fat
    compacts in this setting.
    """
    ok, witness = compact_in_domain(K, omega)
    if not ok:
        raise PreconditionError("K is not contained in the domain", witness=witness)
    reasons = []
    if K.is_fat:
        regular = True
        connected = len(K.faces) == 1
    else:
        regular = all(p.closed and p.is_simple() for p in K.pieces)
        connected = len(K.pieces) == 1
    if not regular:
        reasons.append("regular")
    if not connected:
        reasons.append("connected")
    if connected and K.is_fat and not is_omega_connected(K, omega):
        reasons.append("omega_connected")
    if not is_omega_convex(K, omega, check_containment=False):
        reasons.append("omega_convex")
    return Admissibility(not reasons, tuple(reasons))


# ---------------------------------------------------------------------------
# Union trichotomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnionClass:
    """Which clause of the two-compact union trichotomy applies."""

    case: str                      # "case1" | "case2" | "case3" | "not_convex"
    hole_witness: Optional[complex] = None


def classify_union(L: PolyCompact, L2: PolyCompact, omega: Domain) -> UnionClass:
    """Classify why (or why not) the union of two disjoint compacts is omega-convex.

    case1: each lies in the unbounded complement component of the other.
    case2: L2 sits in a hole of L whose remainder still holds an obstacle.
    case3: the mirror situation.  The direct convexity test of the union is
    recomputed and must agree with the classification.
    """
    if set_distance(L, L2) <= 0.0:
        raise PreconditionError("compacts must be disjoint")
    for name, C in (("L", L), ("L2", L2)):
        n_pieces = len(C.faces) if C.is_fat else len(C.pieces)
        if n_pieces != 1:
            raise PreconditionError(f"{name} must be connected")
        if not is_omega_convex(C, omega):
            raise PreconditionError(f"{name} must be omega-convex")

    rep_L2 = L2.piece_representatives()[0]
    rep_L = L.piece_representatives()[0]

    def containing_region(big: PolyCompact, rep: complex):
        for region in hole_regions(big):
            if region.contains(rep):
                return region
        return None

    region_of_L2_in_L = containing_region(L, rep_L2)
    region_of_L_in_L2 = containing_region(L2, rep_L)

    direct = is_union_omega_convex([L, L2], omega)

    def check(case: str, region: HoleRegion, inner: PolyCompact) -> UnionClass:
        hull_inner = polynomial_hull(inner)
        found = None
        for w in omega.obstacle_witnesses():
            if region.contains(w) and point_locate(hull_inner, w, 1e-12) is Locate.OUTSIDE:
                found = w
                break
        result = UnionClass(case, found) if found is not None else \
            UnionClass("not_convex", region.witness)
        return result

    if region_of_L2_in_L is not None:
        result = check("case2", region_of_L2_in_L, L2)
    elif region_of_L_in_L2 is not None:
        result = check("case3", region_of_L_in_L2, L)
    else:
        result = UnionClass("case1")

    if direct is not None:
        agree = direct.yes == (result.case != "not_convex")
        if not agree:
            raise HolounivError(
                f"classify_union ({result.case}) disagrees with the direct "
                f"convexity test ({direct.yes}); geometry is degenerate")
    return result


# ---------------------------------------------------------------------------
# Exhaustion by admissible compacts
# ---------------------------------------------------------------------------

DEFAULT_MARGIN_FRACTIONS = [0.5, 0.25, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125]


def _margin_fractions(count: int) -> list:
    out = list(DEFAULT_MARGIN_FRACTIONS)
    while len(out) < count:
        out.append(out[-1] / 2)
    return out[:count]


def _free_space_scale(omega: Domain, window, resolution: int = 256) -> float:
    grid, tr = rasterize(omega, window, resolution)
    if grid.all():
        return max(window[2] - window[0], window[3] - window[1]) / 2
    if not grid.any():
        raise ConstructionError("domain has no free cells in its window")
    edt = ndimage.distance_transform_edt(grid)
    return float(edt.max()) * tr.cell


def _window_for(omega: Domain, probes, level: int):
    x0, y0, x1, y1 = omega.bbox_hint()
    for p in probes:
        px0, py0, px1, py1 = p.bbox()
        x0, y0 = min(x0, px0), min(y0, py0)
        x1, y1 = max(x1, px1), max(y1, py1)
    if omega.is_bounded:
        pad = 0.05 * max(x1 - x0, y1 - y0)
        return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    size = max(x1 - x0, y1 - y0, 2.0)
    pad = size * (1 + level)
    return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)


def _contours_to_face(core: np.ndarray, tr: GridTransform, tol: float) -> Face:
    from shapely.geometry import MultiPolygon, Polygon as ShapelyPolygon

    contours = measure.find_contours(core.astype(float), 0.5)
    rings = []
    for cont in contours:
        if len(cont) < 4 or not np.allclose(cont[0], cont[-1]):
            continue
        xs = tr.x0 + (cont[:, 1] + 0.5) * tr.cell
        ys = tr.y0 + (cont[:, 0] + 0.5) * tr.cell
        poly = ShapelyPolygon(np.column_stack([xs, ys])).buffer(0)
        if isinstance(poly, MultiPolygon):
            poly = max(poly.geoms, key=lambda g: g.area)
        if poly.is_empty or poly.area < (2 * tr.cell) ** 2:
            continue
        poly = poly.simplify(tol, preserve_topology=True)
        coords = np.asarray(poly.exterior.coords)[:-1]
        pts = coords[:, 0] + 1j * coords[:, 1]
        if len(pts) < 3:
            continue
        rings.append(Polyline(tuple(pts), closed=True, simple=True))
    if not rings:
        raise ConstructionError("no boundary contour extracted from the core")
    rings.sort(key=lambda r: -abs(r.signed_area()))
    outer, holes = rings[0], rings[1:]
    return Face(outer, tuple(holes))


def exhaustion(omega: Domain, count: int, margin_schedule=None,
               probes: Sequence[PolyCompact] = (), resolution: int = 0) -> list:
    """Nested admissible compacts filling the domain.

    Grid-offset construction: the free space is rasterized, the Euclidean
    distance transform gives the margin offset, the largest connected core is
    kept and its contours become a regular face.  Margins default to fixed
    fractions of the free-space inradius; unbounded domains additionally grow
    their outer window geometrically.
    """
    if count < 1:
        raise PreconditionError("count must be at least 1")
    base_window = _window_for(omega, probes, 0)
    if margin_schedule is not None:
        margins = list(margin_schedule)
        if len(margins) < count:
            raise PreconditionError("margin schedule shorter than count")
    else:
        if omega.is_bounded:
            scale = _free_space_scale(omega, base_window)
        else:
            x0, y0, x1, y1 = omega.bbox_hint()
            scale = max(1.0, (x1 - x0) / 2, (y1 - y0) / 2)
        margins = [f * scale for f in _margin_fractions(count)]
    out: list[PolyCompact] = []
    for i in range(count):
        m = margins[i]
        window = _window_for(omega, probes, i)
        size = max(window[2] - window[0], window[3] - window[1])
        res = resolution or int(min(2048, max(256, 16 * size / max(m, 1e-12))))
        grid, tr = rasterize(omega, window, res)
        if m < 2.4 * tr.cell:
            raise ConstructionError(
                f"margin {m:.3g} below raster resolution; raise `resolution` "
                f"or use a smaller exhaustion count")
        if grid.all():
            edt_dist = np.full(grid.shape, np.inf)
        else:
            edt_dist = ndimage.distance_transform_edt(grid) * tr.cell
        core = edt_dist >= m
        if not omega.is_bounded:
            rows, cols = tr.shape
            inset = int(math.ceil(m / tr.cell))
            box = np.zeros_like(core)
            box[inset:rows - inset, inset:cols - inset] = True
            core &= box
        labels, nlab = ndimage.label(core)
        if nlab == 0:
            raise ConstructionError(
                f"empty core at margin {m:.3g}; use a smaller margin")
        if nlab > 1:
            sizes = ndimage.sum(core, labels, index=range(1, nlab + 1))
            core = labels == (1 + int(np.argmax(sizes)))
        face = _contours_to_face(core, tr, tol=0.75 * tr.cell)
        K = PolyCompact.fat([face])
        verdict = is_admissible(K, omega)
        if not verdict:
            raise ConstructionError(
                f"exhaustion compact {i} failed {verdict.reasons}; "
                f"use a smaller margin")
        if out and not strictly_nested(out[-1], K):
            raise ConstructionError(
                f"exhaustion compact {i} does not strictly contain its "
                f"predecessor; margins too close for the raster resolution")
        out.append(K)
    return out


def strictly_nested(A: PolyCompact, B: PolyCompact, tol: float = 1e-12) -> bool:
    """A contained in the interior of B (vertex containment + no crossings)."""
    for line in A.boundary_polylines():
        for v in line.vertices:
            if point_locate(B, v, tol) is not Locate.INSIDE:
                return False
    aa, ab = A.all_segments()
    ba, bb = B.all_segments()
    return not _segments_cross(aa, ab, ba, bb)


# ---------------------------------------------------------------------------
# Cofinal families of thin compacts
# ---------------------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _polyline_point_at(line: Polyline, s: float) -> complex:
    a, b = line.segments()
    seg_len = np.abs(b - a)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    s = float(np.clip(s, 0.0, cum[-1]))
    i = int(np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(a) - 1))
    t = (s - cum[i]) / seg_len[i] if seg_len[i] > 0 else 0.0
    return complex(a[i] + t * (b[i] - a[i]))


def thin_compact_family(curves: Sequence[Polyline], n: int) -> list:
    """First `n` members of a cofinal family of connected-complement compacts.

    Open arcs pass through unchanged; each closed curve loses one small arc
    around the j-th point of a dense parameter sequence, with deletion width
    shrinking in j, so every proper compact of the input with connected
    complement eventually fits inside a member.
    """
    if n < 1:
        raise PreconditionError("n must be at least 1")
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            da, db = curves[i].segments()
            ea, eb = curves[j].segments()
            if _segments_cross(da, db, ea, eb):
                raise GeometryError("family curves must be pairwise disjoint")
    members = []
    for j in range(1, n + 1):
        pieces = []
        t_j = (0.5 + j * _GOLDEN) % 1.0
        eta_j = 1.0 / (2.0 * (j + 2.0))
        for curve in curves:
            if not curve.closed:
                pieces.append(curve)
                continue
            total = curve.length()
            s_mid = t_j * total
            half = eta_j * total / 2.0
            sub = _subarc_closed(curve, s_mid + half, s_mid - half + total)
            pieces.append(sub)
        members.append(PolyCompact.thin(pieces))
    return members


def _subarc_closed(line: Polyline, s0: float, s1: float) -> Polyline:
    """Open arc of a closed polyline from arclength s0 to s1 (s1 > s0, wraps)."""
    a, b = line.segments()
    seg_len = np.abs(b - a)
    total = float(seg_len.sum())
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    s0 = s0 % total
    span = (s1 - s0) % total
    if span <= 0:
        span = total
    pts = [_polyline_point_at(line, s0)]
    walked = 0.0
    k = int(np.clip(np.searchsorted(cum, s0, side="right") - 1, 0, len(a) - 1))
    walked_to_next = cum[k + 1] - s0
    while walked + walked_to_next < span:
        walked += walked_to_next
        k = (k + 1) % len(a)
        pts.append(complex(a[k]))
        walked_to_next = seg_len[k]
    end = _polyline_point_at(line, (s0 + span) % total)
    if abs(end - pts[-1]) > 1e-12 * max(total, 1.0):
        pts.append(end)
    return Polyline(tuple(pts), closed=False)
