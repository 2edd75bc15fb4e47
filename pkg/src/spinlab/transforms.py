"""Spin profiles, the cosine transform and its spectral inverse, and
Poisson smoothing.

A spin profile is the orbit average of a support function around an
axis u, stored as a Legendre series in t = <x, u>.  The quadrature
route (spin_orbit) averages the body over orbit circles with kink-aware
panel rules; the spectral route (spin_spectral) projects harmonic
coefficients onto the zonal line through u.  Both produce the same
ZonalProfile type.
"""

from dataclasses import dataclass, field

import numpy as np

from .spheregrid import SphereGrid, gauss_legendre_rule, orbit_frame
from .harmonics import (
    HarmonicCoeffs,
    analyze,
    cosine_multipliers,
    degrees_vector,
    legendre_table,
    sh_matrix,
)
from .bodies import Body, kink_normals, kink_t_breaks, support_eval

__all__ = [
    "ZonalProfile",
    "GeneratingCoeffs",
    "cosine_quadrature",
    "cosine_spectral",
    "inverse_cosine_spectral",
    "project_zonal",
    "spin_t_rule",
    "spin_orbit",
    "spin_spectral",
    "poisson_kernel",
    "poisson_smooth",
    "zonal_eval",
    "profile_to_coeffs",
]

PARITY_TOL = 1e-9
GUARD_THRESHOLD = 1e-14


@dataclass(frozen=True)
class ZonalProfile:
    """Legendre series a_k of a zonal function around a fixed axis.

    kind is "support" for spin profiles and "generating" for densities
    recovered through the inverse cosine transform.  Spin profiles of
    kinked bodies carry the exact pole value separately (the truncated
    series underestimates h(u) at t = 1); zonal_eval substitutes it.
    Orbit-quadrature profiles keep their node samples alongside the
    fitted series.
    """

    axis: np.ndarray
    legendre: np.ndarray
    kind: str
    endpoint: float = None
    t_nodes: np.ndarray = field(default=None, repr=False)
    t_weights: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)
    suppressed: tuple = ()

    @property
    def L(self):
        return len(self.legendre) - 1


@dataclass(frozen=True)
class GeneratingCoeffs:
    """Inverse cosine transform output: coefficients of the recovered
    even measure density, plus the degrees whose division was guarded
    off because the multiplier is below threshold."""

    coeffs: HarmonicCoeffs
    suppressed: tuple = ()

    @property
    def L(self):
        return self.coeffs.L


def cosine_quadrature(grid, samples, points):
    """sigma-quadrature of the cosine transform: for each evaluation
    point x, sum_j w_j |<x, y_j>| f(y_j) over the grid."""
    if not isinstance(grid, SphereGrid):
        raise TypeError("cosine_quadrature expects a SphereGrid")
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (len(grid),):
        raise ValueError("samples length must match grid size")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    wf = grid.weights * samples
    out = np.empty(pts.shape[0])
    chunk = max(1, int(4e6) // len(grid))
    for lo in range(0, pts.shape[0], chunk):
        block = pts[lo:lo + chunk]
        out[lo:lo + chunk] = np.abs(block @ grid.nodes.T) @ wf
    return float(out[0]) if np.asarray(points).ndim == 1 else out


def _worst_odd_degree(coeffs):
    vals = np.abs(coeffs.values)
    odd = degrees_vector(coeffs.L) % 2 == 1
    if not np.any(odd):
        return None, 0.0
    idx = int(np.argmax(np.where(odd, vals, -1.0)))
    k = int(np.floor(np.sqrt(idx)))
    return k, float(vals[idx])


def _require_even(coeffs, parity_tol, who):
    scale = float(np.abs(coeffs.values).max())
    if scale == 0.0:
        return
    k, worst = _worst_odd_degree(coeffs)
    if k is not None and worst > parity_tol * scale:
        raise ValueError(f"{who}: odd-degree content at degree {k} "
                         f"({worst:.3e}, relative {worst / scale:.3e}) "
                         f"exceeds parity tolerance {parity_tol:.0e}")


def cosine_spectral(coeffs, parity_tol=PARITY_TOL):
    """Cosine transform as a degreewise multiplier: c_km -> lambda_k c_km.

    Odd input content above the parity tolerance is an error (the
    transform annihilates odd functions, so such input is a mistake);
    residual odd noise is zeroed.
    """
    _require_even(coeffs, parity_tol, "cosine_spectral")
    lam = cosine_multipliers(coeffs.L)
    degs = degrees_vector(coeffs.L)
    vals = coeffs.values * lam.values[degs]
    vals[degs % 2 == 1] = 0.0
    return HarmonicCoeffs(L=coeffs.L, values=vals)


def inverse_cosine_spectral(coeffs, parity_tol=PARITY_TOL,
                            guard_threshold=GUARD_THRESHOLD):
    """Divide by the cosine multipliers, guarding degrees where
    |lambda_k| is below guard_threshold.

    Guarded degrees are suppressed (coefficient set to zero) and
    reported; a suppressed degree carrying real content is an error
    because the inversion cannot recover it.
    """
    _require_even(coeffs, parity_tol, "inverse_cosine_spectral")
    lam = cosine_multipliers(coeffs.L)
    scale = float(np.abs(coeffs.values).max())
    out = np.zeros_like(coeffs.values)
    suppressed = []
    for k in range(0, coeffs.L + 1, 2):
        sl = slice(k * k, (k + 1) * (k + 1))
        if abs(lam.values[k]) <= guard_threshold:
            suppressed.append(k)
            band = float(np.abs(coeffs.values[sl]).max())
            if scale > 0 and band > parity_tol * scale:
                raise ValueError(
                    f"inverse_cosine_spectral: degree {k} has multiplier "
                    f"{lam.values[k]:.3e} below guard {guard_threshold:.0e} "
                    f"but carries content {band:.3e}; inversion is ill-posed")
        else:
            out[sl] = coeffs.values[sl] / lam.values[k]
    return GeneratingCoeffs(coeffs=HarmonicCoeffs(L=coeffs.L, values=out),
                            suppressed=tuple(suppressed))


def project_zonal(coeffs, u):
    """Zonal part around u: a_k = sum_m c_km Y_km(u).

    Accepts plain coefficients (giving a support-kind profile) or
    inverse-transform output (giving a generating-kind profile with the
    suppressed degrees carried along).
    """
    if isinstance(coeffs, GeneratingCoeffs):
        inner = project_zonal(coeffs.coeffs, u)
        return ZonalProfile(axis=inner.axis, legendre=inner.legendre,
                            kind="generating", suppressed=coeffs.suppressed)
    u = np.asarray(u, dtype=float)
    row = sh_matrix(coeffs.L, u[None, :])[0]
    a = np.empty(coeffs.L + 1)
    for k in range(coeffs.L + 1):
        sl = slice(k * k, (k + 1) * (k + 1))
        a[k] = row[sl] @ coeffs.values[sl]
    return ZonalProfile(axis=u, legendre=a, kind="support")


def _graded_edges(a, b, ratio, depth):
    """Edges of a panel [a, b] refined geometrically toward both ends."""
    h = 0.5 * (b - a)
    left = [a + h * ratio ** j for j in range(depth, 0, -1)]
    right = [b - h * ratio ** j for j in range(1, depth + 1)]
    return np.array([a] + left + [a + h] + right + [b])


def spin_t_rule(body, u, L, points_per_panel=None, grade_ratio=0.25,
                grade_depth=5):
    """Composite Gauss rule in t for integrating spin profiles of this
    body against Legendre polynomials through degree L.

    Panels split at the heights where the orbit circle is tangent to a
    kink plane (the profile is analytic between them) and are refined
    geometrically toward every panel end: profiles of kinked bodies
    have square-root type behavior at panel edges that plain Gauss
    resolves poorly.  Smooth bodies get a single plain rule.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    breaks = kink_t_breaks(body, u)
    if breaks.size == 0:
        return gauss_legendre_rule(max(48, L + 16))
    if points_per_panel is None:
        points_per_panel = max(12, L // 2 + 16)
    edges = np.concatenate([[-1.0], breaks, [1.0]])
    xg, wg = gauss_legendre_rule(points_per_panel)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sub = _graded_edges(lo, hi, grade_ratio, grade_depth)
        for a, b in zip(sub[:-1], sub[1:]):
            half = 0.5 * (b - a)
            nodes.append(a + half * (xg + 1.0))
            weights.append(wg * half)
    t = np.concatenate(nodes)
    w = np.concatenate(weights)
    order = np.argsort(t)
    return t[order], w[order]


def _orbit_values(body, u, t_nodes, panel_points, uniform_points):
    """Orbit averages of h at every t node, vectorized per t-panel.

    Within a panel between consecutive kink heights the set of kink
    planes the orbit crosses is fixed, so the crossing angles for all
    the panel's nodes are computed in one array sweep.
    """
    u = np.asarray(u, dtype=float)
    e1, e2 = orbit_frame(u)
    normals = kink_normals(body)
    t = np.asarray(t_nodes, dtype=float)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    values = np.empty(t.size)

    if normals.shape[0]:
        c = normals @ u
        d1 = normals @ e1
        d2 = normals @ e2
        t_star = np.sqrt(np.clip(1.0 - c * c, 0.0, 1.0))
        breaks = kink_t_breaks(body, u)
        bins = np.searchsorted(breaks, t)
    else:
        bins = np.zeros(t.size, dtype=int)

    xg, wg = gauss_legendre_rule(panel_points)
    two_pi = 2.0 * np.pi

    for g in np.unique(bins):
        rows = np.nonzero(bins == g)[0]
        ts, ss = t[rows], s[rows]
        if normals.shape[0]:
            active = np.nonzero(t_star > np.abs(ts).max() + 1e-15)[0]
        else:
            active = np.empty(0, dtype=int)
        if active.size == 0:
            m = uniform_points
            phis = two_pi * (np.arange(m) + 0.5) / m
            ring = (np.cos(phis)[:, None] * e1 + np.sin(phis)[:, None] * e2)
            pts = ts[:, None, None] * u + ss[:, None, None] * ring
            vals = support_eval(body, pts.reshape(-1, 3)).reshape(len(rows), m)
            values[rows] = vals.mean(axis=1)
            continue
        a = ts[:, None] * c[active]
        b1 = ss[:, None] * d1[active]
        b2 = ss[:, None] * d2[active]
        R = np.hypot(b1, b2)
        phi0 = np.arctan2(b2, b1)
        dd = np.arccos(np.clip(-a / np.maximum(R, 1e-300), -1.0, 1.0))
        ang = np.sort(np.concatenate([phi0 + dd, phi0 - dd], axis=1)
                      % two_pi, axis=1)
        edges = np.concatenate([ang, ang[:, :1] + two_pi], axis=1)
        span = np.diff(edges, axis=1)
        phis = edges[:, :-1, None] + 0.5 * span[:, :, None] * (xg + 1.0)
        w = 0.5 * span[:, :, None] * wg / two_pi
        pts = (ts[:, None, None, None] * u
               + ss[:, None, None, None] * (np.cos(phis)[..., None] * e1
                                            + np.sin(phis)[..., None] * e2))
        vals = support_eval(body, pts.reshape(-1, 3)).reshape(phis.shape)
        values[rows] = np.einsum("ijk,ijk->i", vals, w)
    return values


def spin_orbit(body, u, t_nodes=None, t_weights=None, L=64, panel_points=32,
               uniform_points=None, parity_tol=PARITY_TOL):
    """Spin profile by orbit quadrature.

    Averages h over the orbit circle at each t node (splitting the
    circle at the body's kink crossings), then fits the Legendre series
    through degree L with the node weights.  Default nodes come from
    spin_t_rule; pass explicit t_nodes and t_weights to pin the rule.
    """
    if not isinstance(body, Body):
        raise TypeError("spin_orbit expects a Body")
    if body.coeffs is not None and body.coeffs.odd_ratio() > parity_tol:
        raise ValueError("spin_orbit requires an even body")
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError("axis must be a unit vector")
    if (t_nodes is None) != (t_weights is None):
        raise ValueError("pass t_nodes and t_weights together")
    if t_nodes is None:
        t_nodes, t_weights = spin_t_rule(body, u, L)
    t_nodes = np.asarray(t_nodes, dtype=float)
    t_weights = np.asarray(t_weights, dtype=float)
    if np.any(np.abs(t_nodes) > 1.0):
        raise ValueError("t nodes must lie in [-1, 1]")
    if uniform_points is None:
        uniform_points = max(64, 2 * L + 2)
    vals = _orbit_values(body, u, t_nodes, panel_points, uniform_points)
    P = legendre_table(L, t_nodes)
    a = (2.0 * np.arange(L + 1) + 1.0) / 2.0 * (P @ (t_weights * vals))
    return ZonalProfile(axis=u, legendre=a, kind="support",
                        endpoint=float(support_eval(body, u)),
                        t_nodes=t_nodes, t_weights=t_weights, values=vals)


def spin_spectral(coeffs, u):
    """Spin profile of a band-limited function: the zonal projection
    around u, with the pole value closed by the full series."""
    prof = project_zonal(coeffs, u)
    return ZonalProfile(axis=prof.axis, legendre=prof.legendre,
                        kind="support", endpoint=float(prof.legendre.sum()))


def poisson_kernel(t, r):
    """Poisson kernel (1 - r^2) / (1 + r^2 - 2 r t)^(3/2) on [-1, 1]."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    t = np.asarray(t, dtype=float)
    return (1.0 - r * r) / (1.0 + r * r - 2.0 * r * t) ** 1.5


def poisson_smooth(obj, r):
    """Scale degree k content by r^k (coefficients, inverse output, or
    a zonal profile)."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if isinstance(obj, HarmonicCoeffs):
        return HarmonicCoeffs(
            L=obj.L, values=obj.values * r ** degrees_vector(obj.L))
    if isinstance(obj, GeneratingCoeffs):
        return GeneratingCoeffs(coeffs=poisson_smooth(obj.coeffs, r),
                                suppressed=obj.suppressed)
    if isinstance(obj, ZonalProfile):
        a = obj.legendre * r ** np.arange(obj.L + 1)
        return ZonalProfile(axis=obj.axis, legendre=a, kind=obj.kind,
                            suppressed=obj.suppressed)
    raise TypeError("poisson_smooth expects coefficients or a profile")


def zonal_eval(profile, t):
    """Evaluate the profile's Legendre series; spin profiles of kinked
    bodies substitute their stored pole value at |t| = 1."""
    t = np.asarray(t, dtype=float)
    single = t.ndim == 0
    tv = np.atleast_1d(t)
    if np.any(np.abs(tv) > 1.0 + 1e-12):
        raise ValueError("t must lie in [-1, 1]")
    tv = np.clip(tv, -1.0, 1.0)
    out = legendre_table(profile.L, tv).T @ profile.legendre
    if profile.endpoint is not None:
        out[1.0 - np.abs(tv) < 1e-13] = profile.endpoint
    return float(out[0]) if single else out


def profile_to_coeffs(profile):
    """Harmonic coefficients of the zonal function t -> profile(t)
    viewed on the sphere: c_km = a_k Y_km(axis) / (2k + 1)."""
    u = np.asarray(profile.axis, dtype=float)
    row = sh_matrix(profile.L, u[None, :])[0]
    degs = degrees_vector(profile.L)
    vals = profile.legendre[degs] * row / (2.0 * degs + 1.0)
    return HarmonicCoeffs(L=profile.L, values=vals)
