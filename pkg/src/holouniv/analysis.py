"""Rational functions, winding numbers, and the least-squares fitting engine.

Rational functions are stored as a polynomial part plus partial-fraction pole
terms, which keeps evaluation, differentiation and serialization trivial.
Fitting is discrete least squares on boundary samples with column scaling and
a small ridge; sup errors are always measured on an independent validation
net four times denser than the fit net.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (ConditioningError, NonvanishingViolation,
                     PoleProximityError, PreconditionError)
from .geometry import (Domain, Locate, PolyCompact, Polyline, point_locate,
                       sample_compact, sample_polyline)
from .topology import hole_regions, is_omega_convex, _NeedsRaster, bounded_components


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """Polynomial part plus partial-fraction terms sum c_k / (z - p)^k."""

    poly: tuple = (0.0,)
    pole_terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(complex(c) for c in self.poly))
        terms = []
        seen = set()
        for pole, coeffs in self.pole_terms:
            pole = complex(pole)
            if pole in seen:
                raise PreconditionError(f"duplicate pole {pole}")
            seen.add(pole)
            terms.append((pole, tuple(complex(c) for c in coeffs)))
        object.__setattr__(self, "pole_terms", tuple(terms))

    def poles(self) -> list:
        return [p for p, _ in self.pole_terms]

    def __call__(self, z, pole_tol: float = 0.0):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zf = np.atleast_1d(z)
        if pole_tol > 0:
            for p, _ in self.pole_terms:
                d = np.abs(zf - p)
                if np.any(d <= pole_tol):
                    raise PoleProximityError(
                        f"evaluation within {pole_tol} of pole {p}")
        w = npoly.polyval(zf, np.asarray(self.poly)) if self.poly else np.zeros_like(zf)
        for p, coeffs in self.pole_terms:
            u = 1.0 / (zf - p)
            acc = np.zeros_like(zf)
            for c in reversed(coeffs):
                acc = (acc + c) * u
            w = w + acc
        return complex(w[0]) if scalar else w

    def derivative(self) -> "RationalFunction":
        dpoly = tuple(npoly.polyder(np.asarray(self.poly))) if len(self.poly) > 1 else (0.0,)
        terms = []
        for p, coeffs in self.pole_terms:
            new = [0.0] * (len(coeffs) + 1)
            for k, c in enumerate(coeffs, start=1):
                new[k] += -k * c
            terms.append((p, tuple(new)))
        return RationalFunction(dpoly, tuple(terms))

    def degree(self) -> int:
        return len(self.poly) - 1

    def to_dict(self) -> dict:
        return {
            "poly": [[c.real, c.imag] for c in self.poly],
            "pole_terms": [
                {"pole": [p.real, p.imag],
                 "coeffs": [[c.real, c.imag] for c in coeffs]}
                for p, coeffs in self.pole_terms],
        }

    @staticmethod
    def from_dict(d: dict) -> "RationalFunction":
        poly = tuple(complex(a, b) for a, b in d.get("poly", [[0, 0]]))
        terms = tuple(
            (complex(*t["pole"]), tuple(complex(a, b) for a, b in t["coeffs"]))
            for t in d.get("pole_terms", []))
        return RationalFunction(poly, terms)

    @staticmethod
    def zero() -> "RationalFunction":
        return RationalFunction((0.0,), ())


# ---------------------------------------------------------------------------
# Winding numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindingResult:
    value: int
    residual: float
    min_modulus: float


def winding_number(f, gamma: Polyline, min_modulus: float = 1e-9,
                   max_refine: int = 8) -> WindingResult:
    """Accumulated argument of f along a closed polyline, divided by 2 pi.

    Subdivides until every phase step is unambiguous; the distance of the
    total to the nearest integer must come out below 0.01.
    """
    if not gamma.closed:
        raise PreconditionError("winding number needs a closed curve")
    func = f if callable(f) else None
    if func is None:
        raise PreconditionError("f must be callable or a RationalFunction")

    pts = gamma.array
    pts = np.append(pts, pts[0])
    for attempt in range(max_refine):
        w = np.asarray(func(pts), dtype=complex)
        mods = np.abs(w)
        mmin = float(mods.min())
        if mmin <= min_modulus:
            raise NonvanishingViolation(
                f"|f| reaches {mmin:.3e} on the contour", min_modulus=mmin)
        steps = np.angle(w[1:] / w[:-1])
        if np.max(np.abs(steps)) < 0.8:
            total = float(steps.sum())
            turns = total / (2.0 * math.pi)
            value = int(round(turns))
            residual = abs(turns - value)
            if residual < 0.01:
                return WindingResult(value, residual, mmin)
        mid = (pts[1:] + pts[:-1]) / 2.0
        merged = np.empty(pts.size + mid.size, dtype=complex)
        merged[0::2] = pts
        merged[1::2] = mid
        pts = merged
    raise NonvanishingViolation(
        "winding number failed to stabilize under refinement",
        min_modulus=None)


def winding_witness(m: float, b: complex, lambdas: Sequence[complex]) -> RationalFunction:
    """Rational function with a zero of order p+1 at b and simple poles at each lambda.

    Along any curve encircling b and all the poles once, the winding count is
    (p+1) - p = 1 however large the scale factor m is.
    """
    lambdas = [complex(x) for x in lambdas]
    p = len(lambdas)
    if p < 1:
        raise PreconditionError("need at least one pole location")
    if len(set(lambdas)) != p:
        raise PreconditionError("pole locations must be pairwise distinct")
    b = complex(b)
    if b in lambdas:
        raise PreconditionError("zero location coincides with a pole")
    num = np.array([1.0 + 0j])
    factor = np.array([-b, 1.0])
    for _ in range(p + 1):
        num = npoly.polymul(num, factor)
    num = num * m
    den = np.array([1.0 + 0j])
    for lam in lambdas:
        den = npoly.polymul(den, np.array([-lam, 1.0]))
    quot, _rem = npoly.polydiv(num, den)
    residues = []
    for i, lam in enumerate(lambdas):
        denom = np.prod([lam - lambdas[j] for j in range(p) if j != i]) if p > 1 else 1.0
        residues.append((lam, (m * (lam - b) ** (p + 1) / denom,)))
    return RationalFunction(tuple(quot), tuple(residues))


# ---------------------------------------------------------------------------
# Least-squares rational fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitConfig:
    poly_degree: int = 16
    pole_degree: int = 8
    boundary_samples: int = 0        # 0: choose 4x the basis size
    validation_samples: int = 0      # 0: choose 4x the fit samples
    column_scaling: bool = True
    regularization: float = 1e-12

    def with_degree(self, poly_degree: int) -> "FitConfig":
        return FitConfig(poly_degree, self.pole_degree, self.boundary_samples,
                         self.validation_samples, self.column_scaling,
                         self.regularization)


@dataclass(frozen=True)
class FitResult:
    f: RationalFunction
    sup_error: float
    rms_residual: float
    condition_estimate: float
    pole_sites: tuple


def _basis_columns(z: np.ndarray, poly_degree: int, pole_sites: Sequence[complex],
                   pole_degree: int, z_scale: float, site_scales: Sequence[float]):
    cols = []
    zs = z / z_scale
    power = np.ones_like(z)
    for _ in range(poly_degree + 1):
        cols.append(power.copy())
        power = power * zs
    for s, rho in zip(pole_sites, site_scales):
        u = rho / (z - s)
        term = np.ones_like(z)
        for _ in range(pole_degree):
            term = term * u
            cols.append(term.copy())
    return np.column_stack(cols)


def _coefficients_to_rational(x: np.ndarray, poly_degree: int,
                              pole_sites: Sequence[complex], pole_degree: int,
                              z_scale: float, site_scales: Sequence[float]) -> RationalFunction:
    poly = tuple(x[k] / (z_scale ** k) for k in range(poly_degree + 1))
    terms = []
    idx = poly_degree + 1
    for s, rho in zip(pole_sites, site_scales):
        coeffs = tuple(x[idx + k - 1] * rho ** k for k in range(1, pole_degree + 1))
        idx += pole_degree
        terms.append((s, coeffs))
    return RationalFunction(poly, tuple(terms))


def fit_rational_samples(points: np.ndarray, values: np.ndarray,
                         val_points: np.ndarray, val_values: np.ndarray,
                         pole_sites: Sequence[complex], cfg: FitConfig) -> FitResult:
    """Least-squares rational fit against explicit sample/value pairs."""
    points = np.asarray(points, dtype=complex)
    values = np.asarray(values, dtype=complex)
    z_scale = max(float(np.max(np.abs(points))), 1e-12)
    site_scales = [max(float(np.min(np.abs(points - s))), 1e-12) for s in pole_sites]
    A = _basis_columns(points, cfg.poly_degree, pole_sites, cfg.pole_degree,
                       z_scale, site_scales)
    if cfg.column_scaling:
        norms = np.linalg.norm(A, axis=0)
        norms[norms == 0] = 1.0
    else:
        norms = np.ones(A.shape[1])
    A_scaled = A / norms
    lam = cfg.regularization
    if lam > 0:
        ridge = math.sqrt(lam) * np.eye(A.shape[1], dtype=complex)
        A_aug = np.vstack([A_scaled, ridge])
        b_aug = np.concatenate([values, np.zeros(A.shape[1], dtype=complex)])
    else:
        A_aug, b_aug = A_scaled, values
    sol, _res, _rank, svals = np.linalg.lstsq(A_aug, b_aug, rcond=None)
    if not np.all(np.isfinite(sol)):
        raise ConditioningError("least-squares solution is not finite",
                                condition_estimate=float("inf"))
    cond = float(svals[0] / svals[-1]) if svals.size and svals[-1] > 0 else float("inf")
    x = sol / norms
    f = _coefficients_to_rational(x, cfg.poly_degree, pole_sites, cfg.pole_degree,
                                  z_scale, site_scales)
    rms = float(np.sqrt(np.mean(np.abs(A @ x - values) ** 2)))
    fitted = f(np.asarray(val_points, dtype=complex))
    sup_error = float(np.max(np.abs(fitted - np.asarray(val_values, dtype=complex)))) \
        if len(val_points) else rms
    return FitResult(f, sup_error, rms, cond, tuple(pole_sites))


def _obstacle_site(obstacle) -> complex:
    pts = obstacle.witness_points()
    return pts[0]


def pole_sites_for(A: PolyCompact, omega: Domain) -> list:
    """Designated pole locations: one per obstacle sitting in a hole of A,
    plus one beyond the outer boundary when the domain is bounded."""
    sites: list = []
    try:
        regions = hole_regions(A)

        def in_some_hole(w):
            return any(r.contains(w) for r in regions)
    except _NeedsRaster:
        comps = bounded_components(A)

        def in_some_hole(w):
            return any(c.contains(w) for c in comps)

    for ob in omega.obstacles:
        for w in ob.witness_points():
            if in_some_hole(w):
                sites.append(_obstacle_site(ob))
                break
    if omega.is_bounded:
        arr = omega.outer.array
        center = complex(arr.mean())
        radius = float(np.max(np.abs(arr - center)))
        sites.append(center + 1.7 * radius)
    return sites


def _target_values(target: Callable, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(target(pts), dtype=complex)
        if vals.shape == pts.shape:
            return vals
    except Exception:
        pass
    return np.asarray([complex(target(z)) for z in pts], dtype=complex)


def runge_fit(A: PolyCompact, omega: Domain, target: Callable,
              cfg: FitConfig = FitConfig()) -> FitResult:
    """Fit a rational function with poles off the domain to `target` on A.

    A must be omega-convex so the designated pole sites cover all of its
    holes.  Fat compacts are sampled on their boundary (the sup over A of a
    holomorphic error is attained there), thin ones along every piece.
    """
    verdict = is_omega_convex(A, omega)
    if not verdict:
        raise PreconditionError("A must be omega-convex for a poles-off-domain fit",
                                witness=verdict.offending_hole_witness)
    sites = pole_sites_for(A, omega)
    basis_size = cfg.poly_degree + 1 + cfg.pole_degree * len(sites)
    n_fit = cfg.boundary_samples or 4 * basis_size
    n_val = cfg.validation_samples or 4 * n_fit
    pts = sample_compact(A, n_fit)
    vpts = sample_compact(A, n_val)
    return fit_rational_samples(pts, _target_values(target, pts),
                                vpts, _target_values(target, vpts), sites, cfg)


# ---------------------------------------------------------------------------
# Injectivity probing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InjectivityResult:
    injective: bool
    witness: Optional[tuple] = None
    exact: bool = False

    def __bool__(self) -> bool:
        return self.injective


def _probe_points(K: PolyCompact, samples: int) -> np.ndarray:
    return sample_compact(K, samples)


def injectivity_probe(phi: Callable, K: PolyCompact, samples: int = 256,
                      collision_rtol: float = 1e-8) -> InjectivityResult:
    """Pairwise collision search for `phi` on a sample net of K.

    `Injective` verdicts are probabilistic (net-based); collision witnesses
    are refined locally and reported exactly up to tolerance.  Map families
    with closed-form injectivity short-circuit before calling this.
    """
    if samples < 64:
        raise PreconditionError("samples must be at least 64")
    zs = _probe_points(K, samples)
    ws = _target_values(phi, zs)
    diam_k = max(K.diameter_hint(), 1e-12)
    diam_w = max(float(np.max(np.abs(ws[:, None] - ws[None, :]))), 1e-12)
    sep = np.abs(zs[:, None] - zs[None, :])
    img = np.abs(ws[:, None] - ws[None, :])
    cand_mask = (sep > diam_k * 2e-2) & (img < diam_w * (8.0 / samples))
    iu = np.triu_indices(samples, k=1)
    cand = [(i, j) for i, j in zip(*iu) if cand_mask[i, j]]
    cand.sort(key=lambda ij: img[ij])
    for i, j in cand[:32]:
        zeta, xi, dist = _refine_collision(phi, zs, i, j)
        if dist <= diam_w * collision_rtol and abs(zeta - xi) > diam_k * 1e-2:
            return InjectivityResult(False, (zeta, xi))
    return InjectivityResult(True, None)


def _refine_collision(phi, zs: np.ndarray, i: int, j: int):
    """Local grid refinement of a candidate collision between samples i and j."""
    def window(idx):
        lo = zs[idx - 1] if idx > 0 else zs[idx]
        hi = zs[idx + 1] if idx < len(zs) - 1 else zs[idx]
        return lo, hi

    a_lo, a_hi = window(i)
    b_lo, b_hi = window(j)
    best = (zs[i], zs[j], abs(complex(phi(zs[i])) - complex(phi(zs[j]))))
    for _ in range(24):
        ta = np.linspace(0, 1, 7)
        za = a_lo + ta * (a_hi - a_lo)
        zb = b_lo + ta * (b_hi - b_lo)
        wa = _target_values(phi, za)
        wb = _target_values(phi, zb)
        D = np.abs(wa[:, None] - wb[None, :])
        k = np.unravel_index(int(np.argmin(D)), D.shape)
        if D[k] < best[2]:
            best = (complex(za[k[0]]), complex(zb[k[1]]), float(D[k]))
        span_a = (a_hi - a_lo) / 3
        span_b = (b_hi - b_lo) / 3
        a_lo, a_hi = za[k[0]] - span_a, za[k[0]] + span_a
        b_lo, b_hi = zb[k[1]] - span_b, zb[k[1]] + span_b
        if abs(span_a) < 1e-15 and abs(span_b) < 1e-15:
            break
    return best
