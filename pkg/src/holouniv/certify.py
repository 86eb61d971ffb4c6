"""Condition checkers and verdict reports for universality of a map family.

Given a family, a source (domain or union of curves) and a target domain,
these searches look for indices realizing the separation / convexity clauses
over sampled compacts, apply the structural impossibility tests, and collect
everything into a machine-readable report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError, PreconditionError
from .geometry import (Domain, Locate, PolyCompact, Polyline, _point_in_ring,
                       point_locate, sample_polyline, set_distance)
from .maps import MapFamily, image_of
from .topology import (bounded_components, exhaustion, is_admissible,
                       is_omega_convex, is_union_omega_convex,
                       thin_compact_family)

CLAUSES = ("injective", "disjoint", "image_convex", "union_convex")


@dataclass(frozen=True)
class CertConfig:
    n_max: int = 8
    N_grid: tuple = (0, 2, 5)
    exhaustion_depth: int = 3
    tolerance: float = 1e-9
    truncation_note_required: bool = True
    probe_samples: int = 256

    def __post_init__(self):
        if self.N_grid and self.n_max < max(self.N_grid):
            raise PreconditionError("n_max must cover the largest start index")


@dataclass
class ClauseTrace:
    n: int
    checks: dict

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.checks.values())

    def passed_except(self, clause: str) -> bool:
        return self.checks.get(clause) is False and \
            all(v is not False for k, v in self.checks.items() if k != clause)


@dataclass
class SearchResult:
    witness: Optional[int]
    traces: list

    @property
    def found(self) -> bool:
        return self.witness is not None

    def uniformly_failing_clause(self) -> Optional[str]:
        """The single clause that blocked every otherwise-passing index."""
        if self.found:
            return None
        for clause in reversed(CLAUSES):
            if any(t.passed_except(clause) for t in self.traces):
                return clause
        return None


def _require_admissible(K: PolyCompact, dom: Domain, name: str) -> None:
    verdict = is_admissible(K, dom)
    if not verdict:
        raise PreconditionError(f"{name} fails admissibility: {verdict.reasons}")


def _search(family: MapFamily, K: PolyCompact, L: PolyCompact, omega: Domain,
            N: int, cfg: CertConfig, *, want_image_convex: bool,
            want_union_convex: bool) -> SearchResult:
    traces = []
    start = max(N, family.min_index())
    for n in range(start, cfg.n_max + 1):
        checks = {}
        trace = ClauseTrace(n, checks)
        traces.append(trace)
        verdict = family.injectivity(n, K, cfg.probe_samples)
        checks["injective"] = verdict.injective
        if not verdict.injective:
            continue
        try:
            img = image_of(family, n, K)
        except GeometryError:
            checks["disjoint"] = False
            continue
        checks["disjoint"] = set_distance(img, L) > 0
        if not checks["disjoint"]:
            continue
        if want_image_convex or want_union_convex:
            checks["image_convex"] = is_union_omega_convex([img], omega).yes
            if want_image_convex and not checks["image_convex"]:
                continue
        if want_union_convex:
            checks["union_convex"] = is_union_omega_convex([img, L], omega).yes
            if not checks["union_convex"]:
                continue
        return SearchResult(n, traces)
    return SearchResult(None, traces)


def search_joint_condition(family: MapFamily, G: Domain, omega: Domain,
                           K: PolyCompact, L: PolyCompact, N: int,
                           cfg: CertConfig = CertConfig()) -> SearchResult:
    """Smallest index with injectivity, disjointness, and omega-convex union.

    The general necessary-and-sufficient clause set; exhausting the search
    range is not a disproof.
    """
    _require_admissible(K, G, "K")
    _require_admissible(L, omega, "L")
    return _search(family, K, L, omega, N, cfg,
                   want_image_convex=False, want_union_convex=True)


def search_separation_condition(family: MapFamily, G: Domain, omega: Domain,
                                K: PolyCompact, L: PolyCompact, N: int,
                                cfg: CertConfig = CertConfig()) -> SearchResult:
    """Simply connected source: injectivity and disjointness suffice."""
    if not G.simply_connected:
        raise PreconditionError(
            "separation-only condition requires a simply connected source")
    _require_admissible(K, G, "K")
    return _search(family, K, L, omega, N, cfg,
                   want_image_convex=False, want_union_convex=False)


def search_image_condition(family: MapFamily, G: Domain, omega: Domain,
                           K: PolyCompact, L: PolyCompact, N: int,
                           cfg: CertConfig = CertConfig()) -> SearchResult:
    """Source with at least two holes: image convexity replaces union convexity."""
    if len(G.obstacles) < 2:
        raise PreconditionError(
            "image-convexity condition requires a source with at least two holes")
    _require_admissible(K, G, "K")
    return _search(family, K, L, omega, N, cfg,
                   want_image_convex=True, want_union_convex=False)


def search_trace_condition(family: MapFamily, omega: Domain,
                           K: PolyCompact, L: PolyCompact, N: int,
                           cfg: CertConfig = CertConfig()) -> SearchResult:
    """Thin sources (unions of curves): injectivity, disjointness, union convexity."""
    return _search(family, K, L, omega, N, cfg,
                   want_image_convex=False, want_union_convex=True)


# ---------------------------------------------------------------------------
# Structural impossibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructuralVerdict:
    structural_no: bool
    anchor: str = ""
    caveat: str = ""

    def __bool__(self) -> bool:
        return self.structural_no


def structural_negative(G: Domain, omega: Domain) -> StructuralVerdict:
    """No universal family can exist when the source has a hole and the
    target is finitely connected.

    Truncated targets stand in for infinitely connected domains, so they only
    ever yield `possible` with a caveat.
    """
    if not G.obstacles:
        return StructuralVerdict(False)
    if omega.truncation is not None:
        return StructuralVerdict(
            False, caveat=(
                f"target truncated at cutoff {omega.truncation.cutoff}; a "
                f"finite model cannot rule out infinite connectivity"))
    return StructuralVerdict(
        True, anchor="source not simply connected, target finitely connected")


# ---------------------------------------------------------------------------
# Thin-trace necessity probe
# ---------------------------------------------------------------------------


@dataclass
class NecessityResult:
    witnesses: list
    violation: Optional[str] = None
    collision_witness: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return self.violation is None


def necessity_probe_thin(family: MapFamily, K: PolyCompact, I1: PolyCompact,
                         I2: PolyCompact, L: PolyCompact,
                         cfg: CertConfig = CertConfig()) -> NecessityResult:
    """Indices where the image of K clears L and the two marked arcs stay apart.

    A family violating the second clause at every index cannot be universal
    on any family of compacts containing K, I1 and I2.
    """
    if set_distance(I1, I2) <= 0:
        raise PreconditionError("marked arcs must be disjoint")
    union_pieces = list(K.pieces) + list(I1.pieces) + list(I2.pieces)
    union = PolyCompact.thin(union_pieces)
    if bounded_components(union, 256):
        raise PreconditionError("K with its marked arcs must keep a connected complement")
    witnesses = []
    clause1_ok_somewhere = False
    best_pair = None
    start = family.min_index()
    for n in range(start, cfg.n_max + 1):
        try:
            imgK = image_of(family, n, K)
            img1 = image_of(family, n, I1)
            img2 = image_of(family, n, I2)
        except GeometryError:
            continue
        c1 = set_distance(imgK, L) > 0
        c2 = set_distance(img1, img2) > 0
        if c1:
            clause1_ok_somewhere = True
        if c1 and c2:
            witnesses.append(n)
        elif c1 and not c2 and best_pair is None:
            best_pair = _closest_pair(family, n, I1, I2)
    if witnesses:
        return NecessityResult(witnesses)
    clause = "clause 2" if clause1_ok_somewhere else "clause 1"
    return NecessityResult([], violation=clause, collision_witness=best_pair)


def _closest_pair(family: MapFamily, n: int, I1: PolyCompact, I2: PolyCompact):
    p1 = sample_polyline(I1.pieces[0], 128)
    p2 = sample_polyline(I2.pieces[0], 128)
    w1 = np.atleast_1d(family.eval_many(n, p1))
    w2 = np.atleast_1d(family.eval_many(n, p2))
    D = np.abs(w1[:, None] - w2[None, :])
    i, j = np.unravel_index(int(np.argmin(D)), D.shape)
    return complex(p1[i]), complex(p2[j])


# ---------------------------------------------------------------------------
# Collapse plans for non-injective circle families
# ---------------------------------------------------------------------------


@dataclass
class CollapsePlan:
    """Everything the corridor construction needs for one induction step."""

    n: int
    alpha: float
    beta: float
    intervals: list          # [(d1, d2), ...] collapse arcs, angles increasing
    etas: list               # corridor widths, one per interval
    delta: float


def _arc_angles(K: PolyCompact) -> tuple:
    piece = K.pieces[0]
    ang = np.unwrap(np.angle(piece.array))
    return float(ang.min()), float(ang.max())


def _collision_params(family: MapFamily, n: int, K: PolyCompact,
                      samples: int = 1024) -> np.ndarray:
    """Angles of K participating in collisions of the n-th map."""
    piece = K.pieces[0]
    pts = sample_polyline(piece, samples)
    pts = pts / np.abs(pts)
    w = np.atleast_1d(family.eval_many(n, pts))
    ang = np.unwrap(np.angle(pts))
    diam = float(np.max(np.abs(w[:, None] - w[None, :])))
    sep = np.abs(ang[:, None] - ang[None, :])
    img = np.abs(w[:, None] - w[None, :])
    arc_span = float(ang.max() - ang.min())
    collide = (img < diam * 1e-6) & (sep > arc_span / samples * 4)
    mask = collide.any(axis=1)
    return ang[mask]


def collapse_plan_search(family: MapFamily, K: PolyCompact, L: PolyCompact,
                         delta: float, cfg: CertConfig = CertConfig()) -> Optional[CollapsePlan]:
    """Find an index and short arcs whose image hulls clear the rest of the image.

    The returned plan partitions the arc K into collapse arcs I_m of angular
    length at most delta (with the map injective in between) such that the
    filled hull of each image(I_m) avoids image(K minus I_m) and the whole
    image clears L.  Returns None when no index up to the cap works.
    """
    if not (K.is_thin and len(K.pieces) == 1 and not K.pieces[0].closed):
        raise PreconditionError("collapse plans need a single proper arc")
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    alpha, beta = _arc_angles(K)
    for n in range(max(2, family.min_index()), cfg.n_max + 1):
        try:
            imgK = image_of(family, n, K)
        except GeometryError:
            continue
        if set_distance(imgK, L) <= 0:
            continue
        probe = family.injectivity(n, K, cfg.probe_samples)
        if probe.injective:
            return CollapsePlan(n, alpha, beta, [], [], delta)
        params = _collision_params(family, n, K)
        if params.size == 0:
            continue
        pad = min(0.1 * delta, 0.02)
        intervals = _cluster_intervals(params, gap=4 * pad, pad=pad,
                                       lo=alpha, hi=beta)
        if any(d2 - d1 > delta for d1, d2 in intervals):
            continue
        if not _plan_clauses_hold(family, n, K, intervals, cfg):
            continue
        etas = _corridor_widths(intervals, beta, delta)
        if etas is None:
            continue
        return CollapsePlan(n, alpha, beta, intervals, etas, delta)
    return None


def _cluster_intervals(params: np.ndarray, gap: float, pad: float,
                       lo: float, hi: float) -> list:
    params = np.sort(params)
    clusters = []
    start = prev = params[0]
    for t in params[1:]:
        if t - prev > gap:
            clusters.append((start, prev))
            start = t
        prev = t
    clusters.append((start, prev))
    return [(max(lo, a - pad), min(hi, b + pad)) for a, b in clusters]


def _subarc_compact(K: PolyCompact, a: float, b: float, samples: int = 256) -> Optional[PolyCompact]:
    if b <= a:
        return None
    theta = np.linspace(a, b, max(8, samples))
    return PolyCompact.thin([Polyline(tuple(np.exp(1j * theta)), closed=False,
                                      simple=True)])


def _complement_arcs(alpha: float, beta: float, intervals: list,
                     shrink: float = 0.0) -> list:
    """Arcs of [alpha, beta] left after removing the collapse intervals.

    `shrink` pulls the rest arcs off the interval endpoints: the image of the
    remainder may touch a collapse hull at the shared endpoint only, so the
    open remainder is what the separation clauses test.
    """
    out = []
    cur = alpha
    for d1, d2 in intervals:
        if d1 - shrink > cur:
            out.append((cur, d1 - shrink))
        cur = max(cur, d2 + shrink)
    if beta > cur:
        out.append((cur, beta))
    return out


def _plan_clauses_hold(family: MapFamily, n: int, K: PolyCompact,
                       intervals: list, cfg: CertConfig) -> bool:
    alpha, beta = _arc_angles(K)
    widths = [d2 - d1 for d1, d2 in intervals]
    shrink = min(widths) * 0.02 if widths else 0.0
    rest_arcs = _complement_arcs(alpha, beta, intervals, shrink)
    rests = [_subarc_compact(K, a, b) for a, b in rest_arcs if b - a > 1e-9]
    rest_union = PolyCompact.thin([p for r in rests for p in r.pieces]) \
        if rests else None
    if rest_union is not None:
        verdict = family.injectivity(n, rest_union, cfg.probe_samples)
        if not verdict.injective:
            return False
    for d1, d2 in intervals:
        piece = _subarc_compact(K, d1, d2)
        img_piece = image_of(family, n, piece)
        if rest_union is None:
            continue
        img_rest = image_of(family, n, rest_union)
        if set_distance(img_piece, img_rest) <= 0:
            return False
        loop = img_piece.pieces[0]
        rest_pts = np.concatenate([p.array for p in img_rest.pieces])
        closed_loop = Polyline(tuple(loop.array), closed=True, simple=False)
        if any(_point_in_ring(w, closed_loop) for w in rest_pts):
            return False
    return True


def _corridor_widths(intervals: list, beta: float, delta: float) -> Optional[list]:
    etas = []
    for m, (d1, d2) in enumerate(intervals):
        next_start = intervals[m + 1][0] if m + 1 < len(intervals) else beta
        room_right = next_start - d2
        room_modulus = 2 * delta - (d2 - d1)
        eta = 0.5 * min(room_right, room_modulus)
        if eta <= 0:
            return None
        etas.append(eta)
    return etas


# ---------------------------------------------------------------------------
# Nested-curve impossibility detector
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Obstruction:
    indices: tuple

    def __bool__(self) -> bool:
        return True


def impossibility_detector(family: MapFamily, curve: PolyCompact, omega: Domain,
                           cfg: CertConfig = CertConfig()) -> Optional[Obstruction]:
    """Three nested closed image curves with the region between them inside
    the domain certify that no function tracks the whole-curve family.

    Nesting is checked by point membership of curve samples in filled hulls;
    the between-region stays inside the domain iff no obstacle sits between
    the outer and inner curve.
    """
    if not (curve.is_thin and len(curve.pieces) == 1 and curve.pieces[0].closed):
        raise PreconditionError("detector expects a single closed curve")
    indices = list(range(max(1, family.min_index()), cfg.n_max + 1))
    images = {}
    for n in indices:
        try:
            img = image_of(family, n, curve)
        except GeometryError:
            continue
        if img.pieces[0].closed:
            images[n] = img.pieces[0]

    def nested(outer: Polyline, inner: Polyline) -> bool:
        pts = sample_polyline(inner, 64)
        return all(_point_in_ring(p, outer) for p in pts)

    obstacle_pts = omega.obstacle_witnesses()
    ns = sorted(images)
    for i in range(len(ns)):
        for j in range(i + 1, len(ns)):
            for k in range(j + 1, len(ns)):
                for (a, b, c) in ((ns[i], ns[j], ns[k]), (ns[k], ns[j], ns[i])):
                    ga, gb, gc = images[a], images[b], images[c]
                    if not (nested(ga, gb) and nested(gb, gc)):
                        continue
                    blocked = any(
                        _point_in_ring(w, ga) and not _point_in_ring(w, gc)
                        for w in obstacle_pts)
                    if not blocked:
                        return Obstruction((a, b, c))
    return None


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------


@dataclass
class CertReport:
    verdict: str
    condition: str
    witnesses: list = field(default_factory=list)
    counterexample: Optional[dict] = None
    structural_anchor: str = ""
    topology_summary: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    scene: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "condition": self.condition,
            "witnesses": self.witnesses,
            "counterexample": self.counterexample,
            "structural_anchor": self.structural_anchor,
            "topology_summary": self.topology_summary,
            "flags": self.flags,
            "config": self.config,
            "scene": self.scene,
        }

    def exit_code(self) -> int:
        if self.verdict == "pass":
            return 0
        if self.verdict in ("fail", "structural_no", "obstruction"):
            return 2
        return 3


def _hole_summary(dom: Domain) -> object:
    if dom.truncation is not None:
        return f"truncated({dom.truncation.cutoff})"
    return len(dom.obstacles)


def certify(family: MapFamily, G, omega: Domain,
            cfg: CertConfig = CertConfig(), *, thin_m_whole: bool = False,
            extra_K: Sequence[PolyCompact] = (), extra_L: Sequence[PolyCompact] = (),
            scene: Optional[dict] = None, flags: Sequence[str] = ()) -> CertReport:
    """Check the dispatch-appropriate condition over sampled compacts.

    `G` is a Domain (fat setting) or a list of curves (thin setting).  Passes
    only when a witness index exists for every sampled (K, L, N) triple; a
    single clause blocking every otherwise-passing index downgrades to a
    clause-attributed failure, anything else stays inconclusive.
    """
    flags = list(flags)
    thin_mode = not isinstance(G, Domain)
    report = CertReport(verdict="inconclusive", condition="", flags=flags,
                        config={"n_max": cfg.n_max, "N_grid": list(cfg.N_grid),
                                "exhaustion_depth": cfg.exhaustion_depth},
                        scene=scene)
    report.topology_summary = {
        "holes_of_G": ("thin" if thin_mode else _hole_summary(G)),
        "holes_of_omega": _hole_summary(omega),
    }
    if omega.truncation is not None:
        flags.append("truncation caveat: finite model of an infinitely "
                     "connected target")

    if not thin_mode:
        structural = structural_negative(G, omega)
        if structural:
            report.verdict = "structural_no"
            report.condition = "structural"
            report.structural_anchor = structural.anchor
            return report

    if thin_mode:
        curves = list(G)
        report.condition = "trace"
        if thin_m_whole:
            Ks = [PolyCompact.thin(curves)]
        else:
            Ks = thin_compact_family(curves, cfg.exhaustion_depth)
        search = lambda K, L, N: search_trace_condition(family, omega, K, L, N, cfg)
    else:
        holes = len(G.obstacles)
        if holes == 0:
            report.condition = "separation"
            search = lambda K, L, N: search_separation_condition(
                family, G, omega, K, L, N, cfg)
        elif holes == 1:
            report.condition = "joint"
            search = lambda K, L, N: search_joint_condition(
                family, G, omega, K, L, N, cfg)
        else:
            report.condition = "image_convex"
            search = lambda K, L, N: search_image_condition(
                family, G, omega, K, L, N, cfg)
        Ks = exhaustion(G, cfg.exhaustion_depth) + list(extra_K)

    Ls = exhaustion(omega, cfg.exhaustion_depth) + list(extra_L)

    all_pass = True
    fail_entry = None
    for ki, K in enumerate(Ks):
        for li, L in enumerate(Ls):
            for N in cfg.N_grid:
                result = search(K, L, N)
                entry = {"K": ki, "L": li, "N": N,
                         "n": result.witness,
                         "checks": [
                             {"n": t.n, **{k: v for k, v in t.checks.items()}}
                             for t in result.traces]}
                report.witnesses.append(entry)
                if not result.found:
                    all_pass = False
                    clause = result.uniformly_failing_clause()
                    if clause and fail_entry is None:
                        fail_entry = {"K": ki, "L": li, "N": N,
                                      "failing_clause": clause}
    if all_pass:
        report.verdict = "pass"
    elif fail_entry is not None:
        report.verdict = "fail"
        report.counterexample = fail_entry
    else:
        report.verdict = "inconclusive"
    return report
