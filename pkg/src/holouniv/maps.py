"""Indexed map families: evaluation, compact images, inversion on compacts.

Each family is a pure rule n -> map; evaluation is exact closed form.  Image
compacts are built by mapping polyline vertices with adaptive refinement
where the map stretches, so downstream predicates see faithful polylines.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import InjectivityResult, RationalFunction, injectivity_probe
from .errors import (ConstructionError, GeometryError, NotInImageError,
                     PreconditionError)
from .geometry import (Domain, Face, FatObstacle, Locate, PointObstacle,
                       PolyCompact, Polyline, ThinObstacle, Truncation,
                       disc_face, point_locate, sample_polyline)
from .rules import Rule
from .topology import hole_regions

_TWO_PI = 2.0 * math.pi


class MapFamily:
    """Base class: subclasses implement eval_many and describe themselves."""

    kind = "abstract"

    def eval_many(self, n: int, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, n: int, z):
        """Evaluate the n-th map at a point or an array of points."""
        arr = np.atleast_1d(np.asarray(z, dtype=complex))
        self.check_source(arr)
        out = self.eval_many(n, arr)
        return complex(out[0]) if np.asarray(z).ndim == 0 else out

    def check_source(self, z: np.ndarray, tol: float = 1e-6) -> None:
        pass

    def project_source(self, z: np.ndarray) -> np.ndarray:
        """Pull refinement midpoints back onto the declared source set."""
        return z

    def probe_fn(self, n: int):
        """Source-projecting evaluator for probes and searches."""
        def fn(z):
            arr = np.atleast_1d(np.asarray(z, dtype=complex))
            return self.eval_many(n, self.project_source(arr))
        return fn

    def injectivity(self, n: int, K: PolyCompact, samples: int = 256) -> InjectivityResult:
        return injectivity_probe(self.probe_fn(n), K, samples)

    def inverse_closed_form(self, n: int, w: complex) -> Optional[complex]:
        return None

    def describe(self) -> dict:
        return {"kind": self.kind}

    def min_index(self) -> int:
        return 0


@dataclass
class Affine(MapFamily):
    """phi_n(z) = a(n) z + b(n)."""

    a: Rule
    b: Rule
    kind = "affine"

    def eval_many(self, n, z):
        return complex(self.a(n)) * z + complex(self.b(n))

    def injectivity(self, n, K, samples=256):
        a = complex(self.a(n))
        if a == 0:
            reps = K.piece_representatives()
            z0 = reps[0]
            z1 = z0 + max(K.diameter_hint(), 1.0) * 0.1
            return InjectivityResult(False, (z0, z1), exact=True)
        return InjectivityResult(True, None, exact=True)

    def inverse_closed_form(self, n, w):
        a = complex(self.a(n))
        if a == 0:
            return None
        return (w - complex(self.b(n))) / a

    def describe(self):
        return {"kind": self.kind, "a": repr(self.a.spec), "b": repr(self.b.spec)}


@dataclass
class AnnulusScale(MapFamily):
    """phi_n(z) = z * 2^(-2n-1): rings collapsing geometrically toward 0."""

    kind = "annulus_scale"

    def factor(self, n: int) -> float:
        return 2.0 ** (-2 * n - 1)

    def eval_many(self, n, z):
        return z * self.factor(n)

    def injectivity(self, n, K, samples=256):
        return InjectivityResult(True, None, exact=True)

    def inverse_closed_form(self, n, w):
        return w / self.factor(n)


@dataclass
class RadialScale(MapFamily):
    """phi_n(z) = r(n) z on a curve (Abel-style dilations)."""

    r: Rule
    kind = "radial_scale"

    def eval_many(self, n, z):
        return complex(self.r(n)) * z

    def injectivity(self, n, K, samples=256):
        if complex(self.r(n)) == 0:
            reps = K.piece_representatives()
            return InjectivityResult(False, (reps[0], -reps[0]), exact=True)
        return InjectivityResult(True, None, exact=True)

    def inverse_closed_form(self, n, w):
        r = complex(self.r(n))
        return None if r == 0 else w / r

    def project_source(self, z):
        mags = np.abs(z)
        return np.where(mags > 0, z / np.where(mags > 0, mags, 1.0), z)

    def describe(self):
        return {"kind": self.kind, "r": repr(self.r.spec)}


def _circle_angles(K: PolyCompact) -> list:
    """Angle intervals (start, span) covered by the pieces of a circle compact."""
    spans = []
    for p in K.pieces:
        ang = np.unwrap(np.angle(p.array))
        if p.closed:
            spans.append((float(ang[0]), _TWO_PI))
        else:
            spans.append((float(ang.min()), float(ang.max() - ang.min())))
    return spans


@dataclass
class PowerRadial(MapFamily):
    """psi_n(zeta) = r(n) zeta^k on the unit circle; k may be the index itself."""

    r: Rule
    k: object = 2          # int, or the string "n"
    kind = "power_radial"

    def _k(self, n: int) -> int:
        return int(n) if self.k == "n" else int(self.k)

    def eval_many(self, n, z):
        return complex(self.r(n)) * z ** self._k(n)

    def check_source(self, z, tol=1e-6):
        if np.any(np.abs(np.abs(z) - 1.0) > tol):
            raise PreconditionError("power-radial maps act on the unit circle")

    def project_source(self, z):
        mags = np.abs(z)
        return z / np.where(mags > 0, mags, 1.0)

    def injectivity(self, n, K, samples=256):
        k = self._k(n)
        if k <= 1:
            return InjectivityResult(True, None, exact=True)
        if K.is_thin:
            for start, span in _circle_angles(K):
                if span >= _TWO_PI / k:
                    zeta = cmath.exp(1j * start)
                    xi = cmath.exp(1j * (start + _TWO_PI / k))
                    return InjectivityResult(False, (zeta, xi), exact=True)
            return InjectivityResult(True, None, exact=True)
        return injectivity_probe(self.probe_fn(n), K, samples)

    def describe(self):
        return {"kind": self.kind, "r": repr(self.r.spec), "k": self.k}

    def min_index(self) -> int:
        return 2 if self.k == "n" else 0


@dataclass
class TangentCircles(MapFamily):
    """Non-injective circle family whose image is two tangent circles.

    The arc |theta| <= pi/n collapses onto a small circle of radius 1/(2n)
    tangent to the main image circle of radius 1 - 1/n at the point 1 - 1/n;
    the rest of the circle sweeps the main image circle once.
    """

    kind = "tangent_circles"

    def eval_many(self, n, z):
        if n < 2:
            raise PreconditionError("tangent-circles maps need n >= 2")
        theta = np.mod(np.angle(z), _TWO_PI)
        lo = math.pi / n
        hi = _TWO_PI - lo
        first = 1 - 3 / (2 * n) - np.exp(-1j * n * theta) / (2 * n)
        middle = (1 - 1 / n) * np.exp(1j * (n * theta - math.pi) / (n - 1))
        last = 1 - 3 / (2 * n) - np.exp(1j * n * theta) / (2 * n)
        out = np.where(theta <= lo, first, np.where(theta < hi, middle, last))
        return out

    def check_source(self, z, tol=1e-6):
        if np.any(np.abs(np.abs(z) - 1.0) > tol):
            raise PreconditionError("tangent-circles maps act on the unit circle")

    def project_source(self, z):
        mags = np.abs(z)
        return z / np.where(mags > 0, mags, 1.0)

    def collapse_halfwidth(self, n: int) -> float:
        """Angular half width of the non-injective parameter zone around 1."""
        return math.pi / n

    def injectivity(self, n, K, samples=256):
        lo = math.pi / n
        if K.is_thin:
            for start, span in _circle_angles(K):
                a0, a1 = start, start + span
                thetas = np.linspace(a0, a1, 512)
                norm = np.mod(thetas, _TWO_PI)
                pos = norm[(norm > 0) & (norm < lo)]
                neg = norm[(norm > _TWO_PI - lo) & (norm < _TWO_PI)]
                for t in pos:
                    mirror = _TWO_PI - t
                    if np.any(np.abs(norm - mirror) < (a1 - a0) / 511):
                        return InjectivityResult(
                            False, (cmath.exp(1j * t), cmath.exp(-1j * t)),
                            exact=True)
                _ = neg
        return injectivity_probe(self.probe_fn(n), K, samples)

    def min_index(self) -> int:
        return 2


class NormalOffset(MapFamily):
    """phi_n(z) = z + (1 - r(n)) nu_z along inward vertex-bisector normals."""

    kind = "normal_offset"

    def __init__(self, r: Rule, boundary: Sequence[Polyline], domain: Domain):
        self.r = r
        self.boundary = list(boundary)
        self.domain = domain
        self._normals = [self._vertex_normals(line) for line in self.boundary]

    def _vertex_normals(self, line: Polyline) -> np.ndarray:
        a = line.array
        nv = len(a)
        prev = np.roll(a, 1) if line.closed else np.concatenate([[a[0]], a[:-1]])
        nxt = np.roll(a, -1) if line.closed else np.concatenate([a[1:], [a[-1]]])
        d1 = a - prev
        d2 = nxt - a
        d1 = np.where(np.abs(d1) > 0, d1 / np.where(np.abs(d1) > 0, np.abs(d1), 1), 0)
        d2 = np.where(np.abs(d2) > 0, d2 / np.where(np.abs(d2) > 0, np.abs(d2), 1), 0)
        tang = d1 + d2
        tang = np.where(np.abs(tang) > 1e-12, tang, d2)
        nrm = 1j * tang / np.abs(tang)
        eps = max(line.length() / nv, 1e-9) * 0.05
        flips = 0
        for i in range(0, nv, max(1, nv // 16)):
            cand = a[i] + eps * nrm[i]
            if point_locate(self.domain, cand, eps * 1e-3) is not Locate.INSIDE:
                flips += 1
            if point_locate(self.domain, a[i] - eps * nrm[i], eps * 1e-3) is Locate.INSIDE:
                pass
        probes = max(1, len(range(0, nv, max(1, nv // 16))))
        if flips > probes // 2:
            nrm = -nrm
        return nrm

    def _normal_at(self, z: complex) -> complex:
        best = (math.inf, 0, 0, 0.0)
        for li, line in enumerate(self.boundary):
            a, b = line.segments()
            d = b - a
            L2 = d.real ** 2 + d.imag ** 2
            w = z - a
            t = np.clip((w.real * d.real + w.imag * d.imag) /
                        np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
            dist = np.abs(z - (a + t * d))
            k = int(np.argmin(dist))
            if dist[k] < best[0]:
                best = (float(dist[k]), li, k, float(t[k]))
        _, li, k, t = best
        nrm = self._normals[li]
        n1 = nrm[k]
        n2 = nrm[(k + 1) % len(nrm)] if self.boundary[li].closed else \
            nrm[min(k + 1, len(nrm) - 1)]
        v = (1 - t) * n1 + t * n2
        return v / abs(v)

    def eval_many(self, n, z):
        shift = 1.0 - complex(self.r(n))
        return np.asarray([zz + shift * self._normal_at(zz) for zz in z],
                          dtype=complex)

    def describe(self):
        return {"kind": self.kind, "r": repr(self.r.spec)}


class JordanRadial(MapFamily):
    """psi_n(zeta) = omega(r(n) zeta): Abel dilations pushed into a Jordan domain."""

    kind = "jordan_radial"

    def __init__(self, omega_map: RationalFunction, r: Rule):
        self.omega_map = omega_map
        self.r = r
        probe = injectivity_probe(lambda z: omega_map(z),
                                  PolyCompact.thin([_unit_circle(128)]), 128)
        if not probe:
            raise PreconditionError(
                "conformal surrogate is not injective on the unit circle",
                witness=probe.witness)

    def eval_many(self, n, z):
        return self.omega_map(complex(self.r(n)) * z)

    def check_source(self, z, tol=1e-6):
        if np.any(np.abs(np.abs(z) - 1.0) > tol):
            raise PreconditionError("jordan-radial maps act on the unit circle")

    def project_source(self, z):
        mags = np.abs(z)
        return z / np.where(mags > 0, mags, 1.0)

    def describe(self):
        return {"kind": self.kind, "r": repr(self.r.spec),
                "omega": self.omega_map.to_dict()}


@dataclass
class VerticalShift(MapFamily):
    """phi_n(x) = x + i/n on the unit segment."""

    kind = "vertical_shift"

    def eval_many(self, n, z):
        if n < 1:
            raise PreconditionError("vertical shift needs n >= 1")
        return z + 1j / n

    def injectivity(self, n, K, samples=256):
        return InjectivityResult(True, None, exact=True)

    def inverse_closed_form(self, n, w):
        return w - 1j / n

    def min_index(self) -> int:
        return 1


def _unit_circle(n: int = 256) -> Polyline:
    from .geometry import circle_polyline
    return circle_polyline(0, 1.0, n)


# ---------------------------------------------------------------------------
# Image compacts
# ---------------------------------------------------------------------------


def _map_polyline(family: MapFamily, n: int, line: Polyline,
                  simple_hint: bool, max_depth: int = 8) -> Polyline:
    pts = list(line.array)
    if line.closed:
        pts.append(pts[0])
    src = np.asarray(pts, dtype=complex)
    img = np.atleast_1d(family.eval_many(n, src))
    for _ in range(max_depth):
        chord = np.abs(np.diff(img))
        scale = max(float(chord.sum()), 1e-12)
        mids_src = family.project_source((src[:-1] + src[1:]) / 2.0)
        mids_img = np.atleast_1d(family.eval_many(n, mids_src))
        dev = np.abs(mids_img - (img[:-1] + img[1:]) / 2.0)
        need = dev > max(2e-4 * scale, 1e-14)
        if not need.any() or len(src) > 20000:
            break
        new_src = []
        new_img = []
        for i in range(len(src) - 1):
            new_src.append(src[i])
            new_img.append(img[i])
            if need[i]:
                new_src.append(mids_src[i])
                new_img.append(mids_img[i])
        new_src.append(src[-1])
        new_img.append(img[-1])
        src = np.asarray(new_src)
        img = np.asarray(new_img)
    if line.closed:
        img = img[:-1]
    keep = np.ones(len(img), dtype=bool)
    keep[1:] = np.abs(np.diff(img)) > 0
    img = img[keep]
    return Polyline(tuple(img), closed=line.closed, simple=simple_hint)


def image_of(family: MapFamily, n: int, K: PolyCompact) -> PolyCompact:
    """Image compact of K under the n-th map of the family.

    Fat compacts require an injective map (holes map to holes); non-injective
    maps on fat compacts are rejected toward the thin / collapse-plan path.
    """
    if K.is_fat:
        verdict = family.injectivity(n, K)
        if not verdict:
            raise PreconditionError(
                "map is not injective on the fat compact; use thin compacts "
                "or the collapse-plan path", witness=verdict.witness)
        faces = []
        for f in K.faces:
            outer = _map_polyline(family, n, f.outer, simple_hint=True)
            holes = tuple(_map_polyline(family, n, h, simple_hint=True)
                          for h in f.holes)
            faces.append(Face(outer, holes))
        return PolyCompact.fat(faces)
    verdict = family.injectivity(n, K)
    simple_hint = bool(verdict)
    pieces = [_map_polyline(family, n, p, simple_hint) for p in K.pieces]
    return PolyCompact.thin(pieces)


def inverse_on(family: MapFamily, n: int, K: PolyCompact, w: complex,
               tol: float = 1e-9) -> complex:
    """Point of K mapping to w under the n-th map, within tol.

    Closed forms where the family provides them, arclength parameter search
    with local refinement otherwise.  Requires injectivity on K.
    """
    verdict = family.injectivity(n, K)
    if not verdict:
        raise PreconditionError("map is not injective on K", witness=verdict.witness)
    w = complex(w)
    zeta = family.inverse_closed_form(n, w)
    if zeta is not None:
        if point_locate(K, zeta, max(tol, 1e-7 * max(K.diameter_hint(), 1.0))) \
                is Locate.OUTSIDE:
            raise NotInImageError(f"{w} has no preimage on K")
        return zeta
    best = None
    for line in K.boundary_polylines():
        pts = sample_polyline(line, 1024)
        vals = np.atleast_1d(family.eval_many(n, pts))
        k = int(np.argmin(np.abs(vals - w)))
        lo = pts[max(0, k - 1)]
        hi = pts[min(len(pts) - 1, k + 1)]
        for _ in range(60):
            t = np.linspace(0, 1, 9)
            cand = family.project_source(lo + t * (hi - lo))
            cv = np.atleast_1d(family.eval_many(n, cand))
            j = int(np.argmin(np.abs(cv - w)))
            err = float(np.abs(cv[j] - w))
            if best is None or err < best[1]:
                best = (complex(cand[j]), err)
            span = (hi - lo) / 4
            lo, hi = cand[j] - span, cand[j] + span
            if abs(span) < 1e-16:
                break
    if best is None or best[1] > tol:
        raise NotInImageError(
            f"{w} is not in the image of K within {tol} (closest {best[1] if best else 'n/a'})")
    return best[0]


# ---------------------------------------------------------------------------
# Companion domain construction for bounded sources
# ---------------------------------------------------------------------------


@dataclass
class CompanionPair:
    omega: Domain
    family: Affine
    shift: complex
    scales: list
    ring_bounds: list


def companion_scaling_pair(G: Domain, n_max: int,
                           curve_resolution: int = 128) -> CompanionPair:
    """Scaled-translate family and a matching punctured target domain.

    The source is shifted off the origin, scaled copies pile up toward 0 in
    disjoint annular shells, and the target domain removes one obstacle per
    hole of the shell stack (plus the origin), so every complement component
    of a sampled image-union keeps an obstacle.  Obstacles for fat source
    holes are discs in their scaled interiors; point and thin source holes
    scale to point obstacles.
    """
    if not G.is_bounded:
        raise PreconditionError("companion construction needs a bounded source")
    x0, y0, x1, y1 = G.bbox_hint()
    shift = complex(1.0 - x0, 0.0)
    corners = [complex(x0, y0), complex(x0, y1), complex(x1, y0), complex(x1, y1)]
    verts = np.concatenate([ln.array for ln in G.boundary_polylines()])
    shifted = verts + shift
    m_low = float(np.min(np.abs(shifted)))
    m_high = float(np.max(np.abs(shifted)))
    if m_low <= 0:
        raise ConstructionError("shift failed to clear the origin")
    ratio = m_low / (2.0 * m_high)
    s = [ (1.0 / (2.0 * m_high)) * ratio ** k for k in range(n_max + 1)]
    obstacles: list = [PointObstacle(0j)]
    ring_bounds = []
    for k in range(n_max + 1):
        lo_k, hi_k = s[k] * m_low, s[k] * m_high
        ring_bounds.append((lo_k, hi_k))
        for ob in G.obstacles:
            rep = ob.witness_points()[0]
            target = s[k] * (rep + shift)
            if isinstance(ob, FatObstacle):
                ring_lines = ob.face.rings()
                from .geometry import _dist_point_segments
                clearance = min(_dist_point_segments(rep, *ln.segments())
                                for ln in ring_lines)
                radius = s[k] * clearance * 0.5
                obstacles.append(FatObstacle(disc_face(target, radius,
                                                       curve_resolution)))
            else:
                obstacles.append(PointObstacle(target))
        if k + 1 <= n_max:
            gap_lo = s[k + 1] * m_high
            gap_hi = s[k] * m_low
            if gap_hi <= gap_lo:
                raise ConstructionError("scaled rings failed to separate")
            centre = complex((gap_lo + gap_hi) / 2.0, 0.0)
            radius = (gap_hi - gap_lo) * 0.4
            obstacles.append(FatObstacle(disc_face(centre, radius,
                                                   curve_resolution)))
    family = Affine(a=Rule(lambda n: s[min(n, n_max)]),
                    b=Rule(lambda n: s[min(n, n_max)] * shift))
    omega = Domain(outer=None, obstacles=tuple(obstacles),
                   truncation=Truncation("companion_scaling", n_max))
    return CompanionPair(omega, family, shift, s, ring_bounds)


# ---------------------------------------------------------------------------
# Scene-facing registry
# ---------------------------------------------------------------------------


def family_from_spec(spec: dict, domains: dict) -> MapFamily:
    kind = spec.get("kind")
    if kind == "affine":
        return Affine(Rule(spec.get("a", 1)), Rule(spec.get("b", 0)))
    if kind == "annulus_scale":
        return AnnulusScale()
    if kind == "radial_scale":
        return RadialScale(Rule(spec.get("r", "1-2**(-n)")))
    if kind == "power_radial":
        return PowerRadial(Rule(spec.get("r", "1-2**(-n)")), spec.get("k", 2))
    if kind == "tangent_circles":
        return TangentCircles()
    if kind == "vertical_shift":
        return VerticalShift()
    if kind == "normal_offset":
        dom = domains[spec["domain"]]
        return NormalOffset(Rule(spec.get("r", "1-2**(-n)")),
                            dom.boundary_polylines(), dom)
    if kind == "jordan_radial":
        coeffs = [complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
                  for c in spec.get("omega_poly", [0, 1])]
        return JordanRadial(RationalFunction(tuple(coeffs), ()),
                            Rule(spec.get("r", "1-2**(-n)")))
    raise PreconditionError(f"unknown map family kind {kind!r}")
