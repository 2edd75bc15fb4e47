"""Quadrature on the unit sphere and on orbit circles.

All rules integrate against the rotation invariant probability measure:
sphere weights sum to 1, circle weights sum to 1.  The colatitude rule is
a two-panel Gauss rule split at t = 0 so that |t|-type kernels are
integrated exactly alongside high-degree polynomials.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SphereGrid",
    "CircleRule",
    "gauss_legendre_rule",
    "product_sphere_grid",
    "fibonacci_directions",
    "orbit_frame",
    "circle_rule",
    "orbit_rule",
]

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature grid on S^2.

    nodes : (N, 3) unit vectors, theta-major order
    weights : (N,) nonnegative, summing to 1
    n_theta : Gauss points per t-panel (two panels, split at t = 0)
    n_phi : uniform longitude count
    t_nodes, t_weights : the 2*n_theta colatitude rule (weights sum to 2)
    phis : the n_phi longitude angles
    """

    nodes: np.ndarray
    weights: np.ndarray
    n_theta: int
    n_phi: int
    t_nodes: np.ndarray = field(repr=False, default=None)
    t_weights: np.ndarray = field(repr=False, default=None)
    phis: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return self.nodes.shape[0]

    def integrate(self, samples):
        """Integral of per-node samples against sigma (pairwise summation)."""
        samples = np.asarray(samples, dtype=float)
        if samples.shape[0] != len(self):
            raise ValueError("sample count does not match grid size")
        return float(np.sum(self.weights * samples))

    @property
    def max_degree(self):
        """Largest polynomial degree integrated exactly in t."""
        return 2 * self.n_theta - 1


@dataclass(frozen=True)
class CircleRule:
    """Quadrature on a circle parametrized by angle in [0, 2pi).

    Weights sum to 1 (normalized Haar measure on the orbit).
    """

    angles: np.ndarray
    weights: np.ndarray
    panels: int


def gauss_legendre_rule(n):
    """n-point Gauss-Legendre rule on [-1, 1]; weights sum to 2."""
    n = int(n)
    if n < 1:
        raise ValueError("gauss_legendre_rule requires n >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def product_sphere_grid(n_theta=96, n_phi=192):
    """Gauss x uniform product grid with the t-rule split at t = 0.

    Each t-panel [-1, 0] and [0, 1] carries n_theta Gauss points, so the
    rule is exact for polynomials through degree 2*n_theta - 1 and for
    |t| times any such polynomial.  Node (i, j) has weight
    (t_weight_i / 2) * (1 / n_phi).
    """
    n_theta = int(n_theta)
    n_phi = int(n_phi)
    if n_theta < 1:
        raise ValueError("n_theta must be >= 1")
    if n_phi < 2:
        raise ValueError("n_phi must be >= 2")
    x, w = gauss_legendre_rule(n_theta)
    # map the reference rule onto [-1, 0] and [0, 1]
    t = np.concatenate([0.5 * (x - 1.0), 0.5 * (x + 1.0)])
    tw = np.concatenate([0.5 * w, 0.5 * w])
    order = np.argsort(t)
    t, tw = t[order], tw[order]
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    nodes = np.empty((t.size * n_phi, 3))
    nodes[:, 0] = np.outer(s, np.cos(phis)).ravel()
    nodes[:, 1] = np.outer(s, np.sin(phis)).ravel()
    nodes[:, 2] = np.repeat(t, n_phi)
    weights = np.repeat(tw / 2.0, n_phi) / n_phi
    return SphereGrid(nodes=nodes, weights=weights, n_theta=n_theta,
                      n_phi=n_phi, t_nodes=t, t_weights=tw, phis=phis)


def fibonacci_directions(count, hemisphere=False):
    """Quasi-uniform golden-angle directions on S^2 (or the z >= 0 half).

    count=1 returns the pole by convention.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    if count == 1:
        return np.array([[0.0, 0.0, 1.0]])
    i = np.arange(count) + 0.5
    if hemisphere:
        z = 1.0 - i / count
    else:
        z = 1.0 - 2.0 * i / count
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def orbit_frame(u):
    """Deterministic orthonormal basis (e1, e2) of the plane orthogonal to u."""
    u = np.asarray(u, dtype=float)
    a = np.array([0.0, 0.0, 1.0]) if abs(u[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(a, u)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return e1, e2


def circle_rule(breakpoints=(), panel_points=32, uniform_points=64):
    """Quadrature rule on [0, 2pi) with weights summing to 1.

    With breakpoints: composite Gauss rule with panel_points per panel
    between consecutive break angles (exact for piecewise-smooth
    integrands whose kinks are all listed).  Without: uniform rule with
    uniform_points nodes, exact for trigonometric polynomials of degree
    < uniform_points.
    """
    br = np.sort(np.mod(np.asarray(breakpoints, dtype=float), 2.0 * np.pi))
    if br.size == 0:
        n = max(int(uniform_points), 1)
        angles = 2.0 * np.pi * np.arange(n) / n
        return CircleRule(angles=angles, weights=np.full(n, 1.0 / n), panels=1)
    edges = np.concatenate([br, [br[0] + 2.0 * np.pi]])
    x, w = gauss_legendre_rule(int(panel_points))
    angles = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        angles.append(mid + half * x)
        weights.append(half * w / (2.0 * np.pi))
    return CircleRule(angles=np.concatenate(angles),
                      weights=np.concatenate(weights),
                      panels=br.size)


def orbit_rule(u, t, breakpoints=(), panel_points=32, uniform_points=64):
    """Points and weights averaging over the orbit circle at height t about u.

    The orbit is x(phi) = t*u + sqrt(1-t^2)(cos(phi) e1 + sin(phi) e2) in
    the deterministic frame of orbit_frame.  Weights sum to 1.  At
    t = +-1 the orbit degenerates to the single point +-u.
    """
    u = np.asarray(u, dtype=float)
    t = float(t)
    if abs(t) > 1.0 + 1e-12:
        raise ValueError("t must lie in [-1, 1]")
    t = min(1.0, max(-1.0, t))
    if 1.0 - abs(t) < 1e-15:
        return np.sign(t) * u[None, :], np.array([1.0])
    rule = circle_rule(breakpoints, panel_points, uniform_points)
    e1, e2 = orbit_frame(u)
    s = np.sqrt(1.0 - t * t)
    points = (t * u[None, :]
              + s * (np.cos(rule.angles)[:, None] * e1[None, :]
                     + np.sin(rule.angles)[:, None] * e2[None, :]))
    return points, rule.weights
