import numpy as np
import pytest

from spinlab.bodies import ball, bandlimited, cube, zonotope
from spinlab.harmonics import (
    HarmonicCoeffs,
    analyze,
    cosine_multipliers,
    legendre_P,
    sh_index,
)
from spinlab.spheregrid import gauss_legendre_rule, product_sphere_grid
from spinlab.transforms import (
    cosine_quadrature,
    cosine_spectral,
    inverse_cosine_spectral,
    poisson_kernel,
    poisson_smooth,
    profile_to_coeffs,
    project_zonal,
    spin_orbit,
    spin_spectral,
    spin_t_rule,
    zonal_eval,
)

E3 = np.array([0.0, 0.0, 1.0])


def cube_pole_profile(t):
    """Spin of the unit cube about a coordinate axis."""
    t = np.asarray(t, dtype=float)
    return (4.0 / np.pi) * np.sqrt(np.maximum(0.0, 1.0 - t * t)) + np.abs(t)


def test_cube_spin_matches_closed_form():
    body = cube()
    nodes, weights = spin_t_rule(body, E3, 64)
    prof = spin_orbit(body, E3, t_nodes=nodes, t_weights=weights, L=64)
    assert np.abs(prof.values - cube_pole_profile(nodes)).max() < 1e-10
    assert prof.endpoint == pytest.approx(1.0)
    # exact coefficient oracle: a_k = (2k+1) lam_k (2 P_k(0) + 1)
    lam = cosine_multipliers(64)
    for k in range(0, 13, 2):
        ref = (2 * k + 1) * lam[k] * (2.0 * legendre_P(k, 0.0) + 1.0)
        assert abs(prof.legendre[k] - ref) < 2e-8


def test_zonotope_spin_closed_form_generic_axis():
    rng = np.random.default_rng(11)
    gens = rng.normal(size=(5, 3))
    gens /= np.linalg.norm(gens, axis=1, keepdims=True)
    wts = rng.uniform(0.5, 2.0, size=5)
    body = zonotope(gens, wts)
    u = np.array([0.2, -0.3, 0.5])
    u /= np.linalg.norm(u)
    nodes, weights = spin_t_rule(body, u, 32)
    prof = spin_orbit(body, u, t_nodes=nodes, t_weights=weights, L=32)
    lam = cosine_multipliers(32)
    for k in range(0, 33, 2):
        ref = (2 * k + 1) * lam[k] * np.sum(wts * legendre_P(k, gens @ u))
        assert abs(prof.legendre[k] - ref) < 5e-9
    assert np.abs(prof.legendre[1::2]).max() < 1e-9


def test_spin_endpoint_semantics():
    body = cube()
    nodes, weights = spin_t_rule(body, E3, 16)
    prof = spin_orbit(body, E3, t_nodes=nodes, t_weights=weights, L=16)
    # endpoint is the support value at the axis itself, not a series value
    assert prof.endpoint == pytest.approx(1.0, abs=1e-14)
    vals = zonal_eval(prof, np.array([1.0, -1.0]))
    assert np.abs(vals - 1.0).max() < 1e-13


def test_spectral_spin_agrees_with_orbit():
    rng = np.random.default_rng(13)
    L = 12
    c = np.zeros((L + 1) ** 2)
    c[sh_index(0, 0)] = 2.0
    even = [sh_index(k, m) for k in range(2, L + 1, 2) for m in range(-k, k + 1)]
    c[even] += 0.02 * rng.normal(size=len(even))
    coeffs = HarmonicCoeffs(L, c)
    body = bandlimited(coeffs)
    for u in (E3, np.array([1.0, 0.0, 0.0]),
              np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)):
        spectral = spin_spectral(coeffs, u)
        orb = spin_orbit(body, u, L=L)
        n = min(spectral.legendre.size, orb.legendre.size)
        assert np.abs(spectral.legendre[:n] - orb.legendre[:n]).max() < 1e-9


def test_cosine_spectral_parity_error_names_degree():
    c = np.zeros(16)
    c[sh_index(0, 0)] = 1.0
    c[sh_index(3, 1)] = 0.2
    with pytest.raises(ValueError, match="degree 3"):
        cosine_spectral(HarmonicCoeffs(3, c))


def test_cosine_quadrature_vs_spectral():
    rng = np.random.default_rng(17)
    L = 10
    c = np.zeros((L + 1) ** 2)
    for k in range(0, L + 1, 2):
        for m in range(-k, k + 1):
            c[sh_index(k, m)] = rng.normal()
    coeffs = HarmonicCoeffs(L, c)
    spectral = cosine_spectral(coeffs)
    from spinlab.harmonics import synthesize, synthesize_on_grid
    # quadrature of the kinked kernel converges like h^2, so compare the
    # routes at two resolutions and require the gap to shrink accordingly
    errs = []
    pts = None
    for nt in (20, 80):
        grid = product_sphere_grid(nt, 2 * nt)
        f = synthesize_on_grid(coeffs, grid)
        if pts is None:
            pts = grid.nodes[:: len(grid) // 40]
        quad = cosine_quadrature(grid, f, pts)
        ref = synthesize(spectral, pts)
        errs.append(np.abs(quad - ref).max())
    assert errs[1] < 2e-4
    assert errs[0] / errs[1] > 10.0


def test_inverse_round_trip_and_parity():
    rng = np.random.default_rng(19)
    L = 20
    c = np.zeros((L + 1) ** 2)
    for k in range(0, L + 1, 2):
        for m in range(-k, k + 1):
            c[sh_index(k, m)] = rng.normal()
    coeffs = HarmonicCoeffs(L, c)
    g = cosine_spectral(coeffs)
    back = inverse_cosine_spectral(g)
    assert np.abs(back.coeffs.values - c).max() < 1e-10
    bad = g.values.copy()
    bad[sh_index(1, 0)] = 0.1
    with pytest.raises(ValueError, match="degree 1"):
        inverse_cosine_spectral(HarmonicCoeffs(L, bad))


def test_inverse_guard_threshold_suppresses_degrees():
    L = 8
    c = np.zeros((L + 1) ** 2)
    c[sh_index(0, 0)] = 1.0
    g = cosine_spectral(HarmonicCoeffs(L, c))
    # artificial threshold knocks out every k >= 4 (|lam_4| = 1/48 < 0.03)
    back = inverse_cosine_spectral(g, guard_threshold=0.03)
    assert list(back.suppressed) == [4, 6, 8]
    # content at a suppressed degree makes the inversion ill posed
    c2 = c.copy()
    c2[sh_index(4, 0)] = 0.5
    g2 = cosine_spectral(HarmonicCoeffs(L, c2))
    with pytest.raises(ValueError, match="degree 4"):
        inverse_cosine_spectral(g2, guard_threshold=0.03)


def test_project_zonal_kinds():
    L = 6
    c = np.zeros((L + 1) ** 2)
    c[sh_index(0, 0)] = 2.0
    c[sh_index(2, 0)] = 0.4
    coeffs = HarmonicCoeffs(L, c)
    sup = project_zonal(coeffs, E3)
    assert sup.kind == "support"
    gen = project_zonal(inverse_cosine_spectral(coeffs), E3)
    assert gen.kind == "generating"
    # zonal coefficients: a_k = c_k0 Y_k0(e3) = c_k0 sqrt(2k+1)
    assert sup.legendre[0] == pytest.approx(2.0)
    assert sup.legendre[2] == pytest.approx(0.4 * np.sqrt(5.0))


def test_poisson_kernel_and_multipliers():
    t, w = gauss_legendre_rule(200)
    r = 0.7
    # row sum: the kernel averages to one over the sphere
    assert abs(0.5 * w @ poisson_kernel(t, r) - 1.0) < 1e-12
    # eigenvalue check: kernel acts on P_k as r^k
    for k in range(0, 9):
        val = 0.5 * w @ (poisson_kernel(t, r) * legendre_P(k, t))
        assert abs(val - r ** k) < 1e-11
    with pytest.raises(ValueError):
        poisson_kernel(t, 1.0)


def test_poisson_smooth_dispatch():
    L = 8
    c = np.zeros((L + 1) ** 2)
    c[sh_index(0, 0)] = 1.0
    c[sh_index(2, 2)] = 0.3
    coeffs = HarmonicCoeffs(L, c)
    sm = poisson_smooth(coeffs, 0.5)
    assert sm.values[sh_index(2, 2)] == pytest.approx(0.3 * 0.25)
    prof = project_zonal(coeffs, E3)
    smp = poisson_smooth(prof, 0.5)
    assert smp.legendre[2] == pytest.approx(prof.legendre[2] * 0.25)
    assert smp.t_nodes is None and smp.endpoint is None
    with pytest.raises(ValueError):
        poisson_smooth(coeffs, 1.0)
    with pytest.raises(ValueError):
        poisson_smooth(coeffs, -0.1)


def test_segment_zonotope_smoothed_density_at_pole():
    # single segment along e3: generating measure is two point masses of
    # mass 1/2 at the poles; the r-smoothed density at the pole is half the
    # Poisson kernel at t = 1 plus the antipodal tail
    r = 0.9
    body = zonotope(np.array([[0.0, 0.0, 1.0]]), np.array([1.0]))
    nodes, weights = spin_t_rule(body, E3, 64)
    prof = spin_orbit(body, E3, t_nodes=nodes, t_weights=weights, L=64)
    gen = inverse_cosine_spectral(profile_to_coeffs(prof))
    sm = poisson_smooth(gen, r)
    from spinlab.harmonics import synthesize
    val = synthesize(sm.coeffs, E3[None, :])[0]
    exact = 0.5 * (poisson_kernel(np.array([1.0]), r)[0]
                   + poisson_kernel(np.array([-1.0]), r)[0])
    # truncated multipole sum of the exact value at the same band limit
    ks = np.arange(0, 65)
    truncated = np.sum((2 * ks + 1) * r ** ks * 0.5
                       * (1.0 + (-1.0) ** ks))
    assert abs(exact - 95.01385041551) < 1e-9
    assert abs(val - truncated) < 1e-9
    assert abs(val - exact) < 1.0  # band-limited tail at r = 0.9, L = 64


def test_profile_round_trip():
    L = 10
    c = np.zeros((L + 1) ** 2)
    c[sh_index(0, 0)] = 2.0
    c[sh_index(4, 0)] = -0.1
    prof = project_zonal(HarmonicCoeffs(L, c), E3)
    coeffs = profile_to_coeffs(prof)
    back = project_zonal(coeffs, E3)
    assert np.abs(back.legendre - prof.legendre).max() < 1e-13
