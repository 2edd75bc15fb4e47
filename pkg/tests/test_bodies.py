import numpy as np
import pytest

from spinlab.bodies import (
    ball,
    bandlimited,
    check_even,
    check_sublinear,
    cube,
    ellipsoid,
    kink_normals,
    kink_t_breaks,
    octahedron,
    orbit_kinks,
    sampled,
    support_eval,
    zonotope,
)
from spinlab.harmonics import HarmonicCoeffs, analyze, sh_index
from spinlab.spheregrid import product_sphere_grid


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def test_closed_form_support_values():
    x = unit([1.0, 2.0, -2.0])  # components (1, 2, -2) / 3
    assert support_eval(ball(2.0), x) == pytest.approx(2.0)
    assert support_eval(cube(1.5), x) == pytest.approx(1.5 * 5.0 / 3.0)
    assert support_eval(octahedron(3.0), x) == pytest.approx(3.0 * 2.0 / 3.0)
    A = np.diag([1.0, 4.0, 9.0])
    assert support_eval(ellipsoid(A), x) == pytest.approx(
        np.sqrt(x @ A @ x))
    z = zonotope(np.eye(3), np.array([1.0, 1.0, 1.0]))
    assert support_eval(z, x) == pytest.approx(np.abs(x).sum())


def test_support_eval_batch_and_unit_check():
    b = cube()
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert np.allclose(support_eval(b, pts), [1.0, 1.0])
    with pytest.raises(ValueError):
        support_eval(b, np.array([0.0, 0.0, 2.0]))


def test_constructor_validation():
    with pytest.raises(ValueError):
        ball(-1.0)
    with pytest.raises(ValueError):
        cube(0.0)
    with pytest.raises(ValueError):
        ellipsoid(np.diag([1.0, -1.0, 1.0]))  # not positive definite
    with pytest.raises(ValueError):
        ellipsoid(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0],
                            [0.0, 0.0, 1.0]]))  # not symmetric
    with pytest.raises(ValueError):
        zonotope(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        zonotope(np.eye(3), np.array([1.0, -1.0, 1.0]))


def test_bandlimited_rejects_odd_content():
    c = np.zeros(9)
    c[sh_index(0, 0)] = 2.0
    c[sh_index(1, 0)] = 0.5
    with pytest.raises(ValueError):
        bandlimited(HarmonicCoeffs(2, c))


def test_sampled_rejects_nonpositive_values():
    grid = product_sphere_grid(8, 16)
    vals = np.ones(len(grid))
    vals[0] = -0.1
    with pytest.raises(ValueError):
        sampled(grid, vals)


def test_sampled_round_trip():
    grid = product_sphere_grid(12, 24)
    c = np.zeros(9)
    c[sh_index(0, 0)] = 2.0
    c[sh_index(2, 0)] = 0.3
    src = bandlimited(HarmonicCoeffs(2, c))
    vals = support_eval(src, grid.nodes)
    body = sampled(grid, vals, L=8)
    assert np.abs(support_eval(body, grid.nodes) - vals).max() < 1e-10


def test_evenness_and_sublinearity_checks():
    grid = product_sphere_grid(16, 32)
    for b in (ball(), cube(), octahedron(), ellipsoid(np.diag([1.0, 2.0, 3.0])),
              zonotope(np.vstack([np.eye(3), unit([1.0, 1.0, 1.0])]))):
        ok, asym = check_even(b, grid)
        assert ok and asym < 1e-12
        ok, worst = check_sublinear(b, trials=50)
        assert ok and worst < 1e-12


def test_kink_normals_by_model():
    assert kink_normals(ball()).shape == (0, 3)
    assert kink_normals(cube()).shape == (3, 3)
    oc = kink_normals(octahedron())
    assert oc.shape == (6, 3)
    assert np.abs(np.linalg.norm(oc, axis=1) - 1.0).max() < 1e-14
    gens = np.vstack([np.eye(3), unit([1.0, 2.0, 2.0])])
    assert kink_normals(zonotope(gens)).shape == (4, 3)


def test_orbit_kinks_cube():
    # orbit t = 0 through e3 crosses the x and y coordinate planes only
    angles = orbit_kinks(cube(), np.array([0.0, 0.0, 1.0]), 0.0)
    assert angles.angles.size == 4
    # along the diagonal every face plane stops crossing above sqrt(2/3)
    u = unit([1.0, 1.0, 1.0])
    t_star = np.sqrt(2.0 / 3.0)
    assert orbit_kinks(cube(), u, 0.0).angles.size == 6
    assert orbit_kinks(cube(), u, t_star + 0.01).angles.size == 0


def test_kink_t_breaks_symmetric():
    u = unit([0.3, 0.4, 0.87])
    for b in (cube(), octahedron()):
        br = kink_t_breaks(b, u)
        assert np.all(np.diff(br) > 0.0)
        assert np.abs(np.sort(-br) - np.sort(br)).max() < 1e-14
        assert br.max() < 1.0 and br.min() > -1.0
    assert kink_t_breaks(ball(), u).size == 0


def test_bandlimited_matches_analysis():
    grid = product_sphere_grid(24, 48)
    b = cube()
    coeffs = analyze(grid, support_eval(b, grid.nodes), 16)
    approx = bandlimited(coeffs)
    x = unit([0.1, -0.2, 0.97])
    # truncation error only, well under the kinked-profile scale
    assert abs(support_eval(approx, x) - support_eval(b, x)) < 0.05
