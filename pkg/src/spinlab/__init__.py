"""Spin operator, spherical cosine transform, and zonoid certification
on the unit sphere.

Submodules load lazily so the command line entry point can pin the
numerics environment before anything imports numpy.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "SphereGrid": "spheregrid",
    "product_sphere_grid": "spheregrid",
    "gauss_legendre_rule": "spheregrid",
    "fibonacci_directions": "spheregrid",
    "orbit_frame": "spheregrid",
    "orbit_rule": "spheregrid",
    "HarmonicCoeffs": "harmonics",
    "MultiplierTable": "harmonics",
    "cosine_multipliers": "harmonics",
    "sh_index": "harmonics",
    "sh_eval": "harmonics",
    "analyze": "harmonics",
    "synthesize": "harmonics",
    "legendre_P": "harmonics",
    "Body": "bodies",
    "ball": "bodies",
    "cube": "bodies",
    "octahedron": "bodies",
    "ellipsoid": "bodies",
    "zonotope": "bodies",
    "bandlimited": "bodies",
    "sampled": "bodies",
    "support_eval": "bodies",
    "orbit_kinks": "bodies",
    "check_even": "bodies",
    "check_sublinear": "bodies",
    "ZonalProfile": "transforms",
    "GeneratingCoeffs": "transforms",
    "cosine_quadrature": "transforms",
    "cosine_spectral": "transforms",
    "inverse_cosine_spectral": "transforms",
    "project_zonal": "transforms",
    "spin_orbit": "transforms",
    "spin_spectral": "transforms",
    "spin_t_rule": "transforms",
    "poisson_kernel": "transforms",
    "poisson_smooth": "transforms",
    "zonal_eval": "transforms",
    "profile_to_coeffs": "transforms",
    "CertifyParams": "zonoid",
    "Certificate": "zonoid",
    "ScanReport": "zonoid",
    "ZonotopeFit": "zonoid",
    "generating_profile": "zonoid",
    "certify_zonal": "zonoid",
    "certify_body": "zonoid",
    "nnls_zonotope_fit": "zonoid",
    "theorem_scan": "zonoid",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib

    return getattr(importlib.import_module(f".{module}", __name__), name)


def __dir__():
    return __all__
