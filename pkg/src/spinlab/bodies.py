"""Support-function models of centrally symmetric convex bodies.

Every model evaluates h on unit vectors (vectorized over leading axes)
and exposes the metadata the orbit quadrature needs: the normals of the
planes across which |.|-type terms switch sign.  Sampled bodies are
fitted to a band-limited representation at construction; inputs with an
odd component are rejected rather than centered.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .spheregrid import SphereGrid, orbit_frame, product_sphere_grid
from .harmonics import HarmonicCoeffs, analyze, synthesize

__all__ = [
    "Body",
    "KinkSet",
    "ball",
    "cube",
    "octahedron",
    "ellipsoid",
    "zonotope",
    "bandlimited",
    "sampled",
    "support_eval",
    "kink_normals",
    "kink_t_breaks",
    "orbit_kinks",
    "check_even",
    "check_sublinear",
]

PARITY_TOL = 1e-9

_SMOOTH_MODELS = ("ball", "ellipsoid", "bandlimited", "sampled")


@dataclass(frozen=True)
class Body:
    """Tagged support-function model; construct via the module helpers."""

    model: str
    label: str = ""
    radius: float = None
    half_width: float = None
    scale: float = None
    matrix: np.ndarray = field(default=None, repr=False)
    generators: np.ndarray = field(default=None, repr=False)
    gen_weights: np.ndarray = field(default=None, repr=False)
    coeffs: HarmonicCoeffs = field(default=None, repr=False)


@dataclass(frozen=True)
class KinkSet:
    """Orbit-circle angles where the support integrand is non-smooth."""

    angles: np.ndarray

    def __len__(self):
        return self.angles.size


def ball(radius=1.0, label="ball"):
    if radius <= 0:
        raise ValueError("radius must be positive")
    return Body(model="ball", label=label, radius=float(radius))


def cube(half_width=1.0, label="cube"):
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    return Body(model="cube", label=label, half_width=float(half_width))


def octahedron(scale=1.0, label="octahedron"):
    if scale <= 0:
        raise ValueError("scale must be positive")
    return Body(model="octahedron", label=label, scale=float(scale))


def ellipsoid(matrix, label="ellipsoid"):
    M = np.asarray(matrix, dtype=float)
    if M.shape != (3, 3) or not np.allclose(M, M.T, atol=1e-12):
        raise ValueError("ellipsoid needs a symmetric 3x3 matrix")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ValueError("ellipsoid matrix must be positive definite") from None
    return Body(model="ellipsoid", label=label, matrix=M)


def zonotope(generators, weights=None, label="zonotope"):
    V = np.atleast_2d(np.asarray(generators, dtype=float))
    if V.shape[1] != 3 or V.shape[0] < 1:
        raise ValueError("generators must be a nonempty (m, 3) array")
    norms = np.linalg.norm(V, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValueError("generators must be unit vectors")
    if weights is None:
        weights = np.ones(V.shape[0])
    w = np.asarray(weights, dtype=float)
    if w.shape != (V.shape[0],) or np.any(w <= 0):
        raise ValueError("zonotope weights must be positive, one per generator")
    return Body(model="zonotope", label=label, generators=V, gen_weights=w)


@lru_cache(maxsize=1)
def _check_grid():
    return product_sphere_grid(48, 96)


def _validate_even_positive(coeffs, label):
    ratio = coeffs.odd_ratio()
    if ratio > PARITY_TOL:
        raise ValueError(f"{label}: odd component {ratio:.2e} exceeds parity"
                         f" tolerance {PARITY_TOL:.0e}; inputs must be centered")
    vals = synthesize(coeffs, _check_grid().nodes)
    if vals.min() <= 0:
        raise ValueError(f"{label}: support values must be strictly positive"
                         f" (min {vals.min():.3e})")


def bandlimited(coeffs, label="bandlimited"):
    if not isinstance(coeffs, HarmonicCoeffs):
        raise TypeError("bandlimited expects HarmonicCoeffs")
    _validate_even_positive(coeffs, label)
    return Body(model="bandlimited", label=label, coeffs=coeffs)


def sampled(grid, values, label="sampled", L=None):
    """Grid samples of a support function, fitted to band-limited form.

    The fit degree defaults to the largest the grid analyzes exactly
    with headroom (n_theta - 1).
    """
    if not isinstance(grid, SphereGrid):
        raise TypeError("sampled expects a SphereGrid")
    values = np.asarray(values, dtype=float)
    if values.shape != (len(grid),):
        raise ValueError("values length must match grid size")
    if values.min() <= 0:
        raise ValueError("sampled support values must be strictly positive")
    if L is None:
        L = min(grid.n_theta - 1, (grid.n_phi - 1) // 2)
    coeffs = analyze(grid, values, L)
    _validate_even_positive(coeffs, label)
    return Body(model="sampled", label=label, coeffs=coeffs)


def support_eval(body, x):
    """Support function h(x) on unit vectors; vectorized over rows."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    nrm = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(nrm - 1.0) > 1e-12):
        raise ValueError("support_eval expects unit vectors")
    m = body.model
    if m == "ball":
        out = np.full(pts.shape[0], body.radius)
    elif m == "cube":
        out = body.half_width * np.abs(pts).sum(axis=1)
    elif m == "octahedron":
        out = body.scale * np.abs(pts).max(axis=1)
    elif m == "ellipsoid":
        out = np.sqrt(np.einsum("ij,jk,ik->i", pts, body.matrix, pts))
    elif m == "zonotope":
        out = np.abs(pts @ body.generators.T) @ body.gen_weights
    elif m in ("bandlimited", "sampled"):
        out = synthesize(body.coeffs, pts)
    else:
        raise ValueError(f"unknown body model {m!r}")
    return float(out[0]) if single else out


def kink_normals(body):
    """Unit normals of the planes where h loses smoothness; (0,3) if none."""
    m = body.model
    if m == "cube":
        return np.eye(3)
    if m == "octahedron":
        # argmax switches where |x_i| = |x_j|
        normals = []
        for i in range(3):
            for j in range(i + 1, 3):
                for s in (1.0, -1.0):
                    v = np.zeros(3)
                    v[i], v[j] = 1.0, s
                    normals.append(v / np.sqrt(2.0))
        return np.array(normals)
    if m == "zonotope":
        return body.generators
    return np.zeros((0, 3))


def orbit_kinks(body, u, t):
    """Angles on the orbit circle at height t where the integrand kinks.

    A normal v contributes the solutions of <x(phi), v> = 0; tangential
    touches (where the inner product grazes zero without changing sign)
    are smooth and excluded.
    """
    t = float(t)
    if abs(t) > 1.0 + 1e-12:
        raise ValueError("t must lie in [-1, 1]")
    t = min(1.0, max(-1.0, t))
    normals = kink_normals(body)
    if normals.shape[0] == 0 or 1.0 - abs(t) < 1e-15:
        return KinkSet(angles=np.empty(0))
    u = np.asarray(u, dtype=float)
    e1, e2 = orbit_frame(u)
    s = np.sqrt(1.0 - t * t)
    a = t * (normals @ u)
    b1 = s * (normals @ e1)
    b2 = s * (normals @ e2)
    R = np.hypot(b1, b2)
    angles = []
    for ai, ri, c1, c2 in zip(a, R, b1, b2):
        if ri < 1e-15 or abs(ai) >= ri:
            continue
        phi0 = np.arctan2(c2, c1)
        d = np.arccos(np.clip(-ai / ri, -1.0, 1.0))
        angles.append((phi0 + d) % (2.0 * np.pi))
        angles.append((phi0 - d) % (2.0 * np.pi))
    if not angles:
        return KinkSet(angles=np.empty(0))
    return KinkSet(angles=np.unique(angles))


def kink_t_breaks(body, u):
    """Heights t where the orbit circle is tangent to a kink plane.

    These are t* = +-sqrt(1 - <u,v>^2) per kink normal v; between
    consecutive breaks the set of kink crossings on the orbit is
    constant, so they are the panel edges for profile quadrature.
    """
    normals = kink_normals(body)
    if normals.shape[0] == 0:
        return np.empty(0)
    c = normals @ np.asarray(u, dtype=float)
    ts = np.sqrt(np.clip(1.0 - c * c, 0.0, 1.0))
    out = np.unique(np.concatenate([-ts, ts]))
    return out[(out > -1.0 + 1e-12) & (out < 1.0 - 1e-12)]


def check_even(body, grid=None, tol=PARITY_TOL):
    """Compare h at antipodal pairs; (passed, max asymmetry ratio)."""
    grid = grid if grid is not None else _check_grid()
    hp = support_eval(body, grid.nodes)
    hm = support_eval(body, -grid.nodes)
    asym = float(np.abs(hp - hm).max() / hp.max())
    return asym <= tol, asym


def check_sublinear(body, trials=100, tol=1e-12, seed=0):
    """Test H(x+y) <= H(x) + H(y) on random pairs for the 1-homogeneous
    extension H(z) = |z| h(z/|z|); (passed, worst violation)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(trials, 3))
    y = rng.normal(size=(trials, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    z = x + y
    zl = np.linalg.norm(z, axis=1)
    keep = zl > 1e-12
    hx = support_eval(body, x[keep])
    hy = support_eval(body, y[keep])
    hz = zl[keep] * support_eval(body, z[keep] / zl[keep, None])
    worst = float((hz - hx - hy).max())
    return worst <= tol, worst
