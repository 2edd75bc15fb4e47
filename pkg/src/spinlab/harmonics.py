"""Real spherical harmonics on S^2, orthonormal for the invariant
probability measure sigma, plus the cosine-transform multipliers.

Conventions: Y_00 = 1, Y_k0 = sqrt(2k+1) P_k(x3), and for m > 0 the pair
sqrt(2) Qbar_km(x3) cos(m phi), sqrt(2) Qbar_km(x3) sin(m phi), where
Qbar_km is the fully normalized associated Legendre function.  With this
normalization the addition theorem reads
sum_m Y_km(x) Y_km(y) = (2k+1) P_k(<x,y>).  Coefficients are stored flat
with index k^2 + k + m.
"""

from dataclasses import dataclass, field

import numpy as np

from .spheregrid import SphereGrid

__all__ = [
    "HarmonicCoeffs",
    "MultiplierTable",
    "legendre_P",
    "legendre_table",
    "sh_index",
    "sh_eval",
    "sh_matrix",
    "analyze",
    "synthesize",
    "synthesize_on_grid",
    "cosine_multipliers",
    "degrees_vector",
]


def legendre_table(L, t):
    """Legendre polynomials P_0..P_L at the points t, shape (L+1, len(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    P = np.zeros((L + 1, t.size))
    P[0] = 1.0
    if L >= 1:
        P[1] = t
    for k in range(1, L):
        # Bonnet recurrence, stable upward for |t| <= 1
        P[k + 1] = ((2 * k + 1) * t * P[k] - k * P[k - 1]) / (k + 1)
    return P


def legendre_P(k, t):
    """Legendre polynomial P_k(t); scalar in, scalar out."""
    k = int(k)
    if k < 0:
        raise ValueError("degree must be >= 0")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t_arr) > 1.0 + 1e-12):
        raise ValueError("legendre_P expects |t| <= 1")
    vals = legendre_table(k, t_arr)[k]
    return float(vals[0]) if np.isscalar(t) or np.ndim(t) == 0 else vals


def _alp_blocks(L, t):
    """Fully normalized associated Legendre blocks per order.

    Returns a list Q where Q[m] has shape (L+1-m, len(t)) holding
    Qbar_{k,m}(t) for k = m..L, normalized so that
    (1/2) int Qbar_{k,m}^2 dt = 1 for m = 0 and 1/2 for m > 0 combined
    with the sqrt(2) azimuthal factor (sigma-orthonormal real basis).
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    blocks = []
    diag = np.ones_like(t)
    for m in range(L + 1):
        block = np.zeros((L + 1 - m, t.size))
        block[0] = diag
        if L - m >= 1:
            block[1] = np.sqrt(2.0 * m + 3.0) * t * diag
        for k in range(m + 2, L + 1):
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = np.sqrt((2.0 * k + 1.0) * ((k - 1.0) ** 2 - m * m)
                        / ((2.0 * k - 3.0) * (k * k - m * m)))
            block[k - m] = a * t * block[k - m - 1] - b * block[k - m - 2]
        blocks.append(block)
        if m < L:
            diag = np.sqrt((2.0 * m + 3.0) / (2.0 * m + 2.0)) * s * diag
    return blocks


def sh_index(k, m):
    """Flat index of the (k, m) harmonic."""
    return k * k + k + m


def degrees_vector(L):
    """Degree k of each flat coefficient index, length (L+1)^2."""
    return np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)


@dataclass(frozen=True)
class HarmonicCoeffs:
    """Real spherical-harmonic coefficients up to degree L (flat storage)."""

    L: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != ((self.L + 1) ** 2,):
            raise ValueError("coefficient array must have length (L+1)^2")

    def __getitem__(self, km):
        k, m = km
        if not (0 <= k <= self.L and -k <= m <= k):
            raise KeyError(f"no coefficient ({k}, {m}) at band limit {self.L}")
        return float(self.values[sh_index(k, m)])

    def degree_slice(self, k):
        return self.values[k * k:(k + 1) * (k + 1)]

    def odd_ratio(self):
        """max |odd-degree coeff| relative to max |coeff| (0 for L = 0)."""
        scale = float(np.abs(self.values).max())
        if scale == 0.0:
            return 0.0
        odd = degrees_vector(self.L) % 2 == 1
        if not odd.any():
            return 0.0
        return float(np.abs(self.values[odd]).max() / scale)

    def truncated(self, L_new):
        """Copy truncated (or zero-padded) to band limit L_new."""
        out = np.zeros((L_new + 1) ** 2)
        n = min(self.values.size, out.size)
        out[:n] = self.values[:n]
        return HarmonicCoeffs(L=L_new, values=out)


@dataclass(frozen=True)
class MultiplierTable:
    """Cosine-transform eigenvalues lambda_k; odd degrees are zero."""

    L: int
    values: np.ndarray = field(repr=False)

    def __getitem__(self, k):
        if not 0 <= k <= self.L:
            raise KeyError(f"degree {k} outside table (L={self.L})")
        return float(self.values[k])


def cosine_multipliers(L):
    """Funk-Hecke multipliers lambda_k = (1/2) int |t| P_k(t) dt.

    Computed by kink-split Gauss quadrature on [-1, 0] and [0, 1]; by
    symmetry this is int_0^1 t P_k(t) dt for even k and 0 for odd k.
    """
    L = int(L)
    if L < 0:
        raise ValueError("L must be >= 0")
    n = L // 2 + 8
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    P = legendre_table(L, t)
    lam = np.zeros(L + 1)
    lam[0::2] = P[0::2] @ (wt * t)
    return MultiplierTable(L=L, values=lam)


def sh_matrix(L, points):
    """Basis matrix B with B[i, sh_index(k, m)] = Y_km(points[i])."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.clip(pts[:, 2], -1.0, 1.0)
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    blocks = _alp_blocks(L, t)
    B = np.empty((pts.shape[0], (L + 1) ** 2))
    ks = np.arange(L + 1)
    for k in ks:
        B[:, sh_index(k, 0)] = blocks[0][k]
    root2 = np.sqrt(2.0)
    for m in range(1, L + 1):
        cm = root2 * np.cos(m * phi)
        sm = root2 * np.sin(m * phi)
        for k in range(m, L + 1):
            q = blocks[m][k - m]
            B[:, sh_index(k, m)] = q * cm
            B[:, sh_index(k, -m)] = q * sm
    return B


def sh_eval(L, x):
    """All sigma-orthonormal harmonics at a unit vector, as (k, m, value)."""
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise ValueError("sh_eval expects a unit vector")
    row = sh_matrix(L, x[None, :])[0]
    out = []
    for k in range(L + 1):
        for m in range(-k, k + 1):
            out.append((k, m, float(row[sh_index(k, m)])))
    return out


def analyze(grid, samples, L):
    """Project per-node samples onto the degree <= L basis.

    Separable product-grid algorithm: azimuthal trig sums followed by
    colatitude Gauss contractions.  Requires n_theta >= L+1 and
    n_phi >= 2L+1 so products of degree <= L harmonics are integrated
    exactly.
    """
    if not isinstance(grid, SphereGrid):
        raise TypeError("analyze requires a SphereGrid")
    L = int(L)
    if grid.n_theta < L + 1:
        raise ValueError(f"grid n_theta={grid.n_theta} insufficient for L={L}"
                         " (need n_theta >= L+1)")
    if grid.n_phi < 2 * L + 1:
        raise ValueError(f"grid n_phi={grid.n_phi} insufficient for L={L}"
                         " (need n_phi >= 2L+1)")
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (len(grid),):
        raise ValueError("sample count does not match grid size")
    nt, nph = grid.t_nodes.size, grid.n_phi
    S = samples.reshape(nt, nph)
    ms = np.arange(L + 1)
    ang = np.outer(grid.phis, ms)
    Fc = S @ np.cos(ang) / nph          # (nt, L+1), order-m cosine moments
    Fs = S @ np.sin(ang) / nph
    tw = grid.t_weights / 2.0
    blocks = _alp_blocks(L, grid.t_nodes)
    values = np.zeros((L + 1) ** 2)
    idx0 = sh_index(np.arange(L + 1), 0)
    values[idx0] = blocks[0] @ (tw * Fc[:, 0])
    root2 = np.sqrt(2.0)
    for m in range(1, L + 1):
        ks = np.arange(m, L + 1)
        values[sh_index(ks, m)] = root2 * (blocks[m] @ (tw * Fc[:, m]))
        values[sh_index(ks, -m)] = root2 * (blocks[m] @ (tw * Fs[:, m]))
    return HarmonicCoeffs(L=L, values=values)


def synthesize(coeffs, points):
    """Pointwise synthesis sum_km coeffs[k,m] Y_km(point)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(pts.shape[0])
    # chunk to bound the basis-matrix size
    chunk = max(1, int(4e6 // max((coeffs.L + 1) ** 2, 1)))
    for lo in range(0, pts.shape[0], chunk):
        B = sh_matrix(coeffs.L, pts[lo:lo + chunk])
        out[lo:lo + chunk] = B @ coeffs.values
    return out


def synthesize_on_grid(coeffs, grid):
    """Synthesis on a product grid, separable (fast path for certify)."""
    L = coeffs.L
    nt, nph = grid.t_nodes.size, grid.n_phi
    blocks = _alp_blocks(L, grid.t_nodes)
    Gc = np.zeros((nt, L + 1))
    Gs = np.zeros((nt, L + 1))
    Gc[:, 0] = blocks[0].T @ coeffs.values[sh_index(np.arange(L + 1), 0)]
    root2 = np.sqrt(2.0)
    for m in range(1, L + 1):
        ks = np.arange(m, L + 1)
        Gc[:, m] = root2 * (blocks[m].T @ coeffs.values[sh_index(ks, m)])
        Gs[:, m] = root2 * (blocks[m].T @ coeffs.values[sh_index(ks, -m)])
    ms = np.arange(L + 1)
    ang = np.outer(grid.phis, ms)
    vals = Gc @ np.cos(ang).T + Gs @ np.sin(ang).T
    return vals.reshape(nt * nph)
