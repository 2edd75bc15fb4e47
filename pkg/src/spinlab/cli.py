"""Batch front end: run transforms, certifications, and scans from a
JSON config and emit JSON summaries plus plot-ready CSV tables.

BLAS thread pools are pinned before numpy loads so results are
byte-reproducible across machines and across --threads settings; scan
parallelism is explicit (a thread pool over directions) rather than
inherited from the linear algebra backend.
"""

import os

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
os.environ.setdefault("NUMEXPR_NUM_THREADS", "1")

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from . import __version__
from .spheregrid import fibonacci_directions, gauss_legendre_rule, \
    product_sphere_grid
from .harmonics import HarmonicCoeffs, analyze, cosine_multipliers, sh_index
from .bodies import ball, cube, octahedron, ellipsoid, zonotope, \
    bandlimited, sampled, support_eval
from .transforms import ZonalProfile, cosine_spectral, \
    inverse_cosine_spectral, poisson_smooth, project_zonal, spin_orbit, \
    spin_spectral, zonal_eval
from .zonoid import CertifyParams, certify_body, certify_zonal, \
    nnls_zonotope_fit, theorem_scan

COMMANDS = ("spin", "cosine", "invert", "certify", "scan", "fit")

_COMMON_FIELDS = {"body", "command", "out", "seed", "L", "n_theta", "n_phi"}
_FIELDS = {
    "spin": _COMMON_FIELDS | {"axis", "r_ladder"},
    "cosine": _COMMON_FIELDS | {"axis", "r_ladder"},
    "invert": _COMMON_FIELDS | {"axis", "r_ladder", "parity_tol",
                                "guard_threshold"},
    "certify": _COMMON_FIELDS | {"axis", "r_ladder", "eps_pos", "eps_neg",
                                 "t_grid", "parity_tol", "guard_threshold"},
    "scan": _COMMON_FIELDS | {"directions", "r_ladder", "eps_pos", "eps_neg",
                              "t_grid", "parity_tol", "guard_threshold"},
    "fit": _COMMON_FIELDS | {"candidates", "max_iter", "tol"},
}

_BODY_FIELDS = {
    "ball": {"radius"},
    "cube": {"half_width"},
    "octahedron": {"scale"},
    "ellipsoid": {"matrix"},
    "zonotope": {"generators", "weights"},
    "bandlimited": {"L", "coeffs"},
    "sampled": {"n_theta", "n_phi", "values"},
}


class ConfigError(ValueError):
    pass


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def build_body(rec):
    """Body from its config record: {"type": ..., <model fields>}."""
    _require(isinstance(rec, dict), "body must be an object")
    _require("type" in rec, "body needs a 'type' field")
    kind = rec["type"]
    _require(kind in _BODY_FIELDS, f"unknown body type {kind!r}")
    allowed = _BODY_FIELDS[kind] | {"type", "label"}
    for key in rec:
        _require(key in allowed, f"unknown body field {key!r} for {kind}")
    label = rec.get("label", kind)
    if kind == "ball":
        return ball(rec.get("radius", 1.0), label=label)
    if kind == "cube":
        return cube(rec.get("half_width", 1.0), label=label)
    if kind == "octahedron":
        return octahedron(rec.get("scale", 1.0), label=label)
    if kind == "ellipsoid":
        _require("matrix" in rec, "ellipsoid needs 'matrix'")
        return ellipsoid(rec["matrix"], label=label)
    if kind == "zonotope":
        _require("generators" in rec, "zonotope needs 'generators'")
        gens = np.asarray(rec["generators"], dtype=float)
        norms = np.linalg.norm(gens, axis=1, keepdims=True)
        _require(np.all(norms > 0), "zero generator")
        return zonotope(gens / norms, rec.get("weights"), label=label)
    if kind == "bandlimited":
        _require("L" in rec and "coeffs" in rec,
                 "bandlimited needs 'L' and 'coeffs' (rows [k, m, value])")
        L = int(rec["L"])
        vals = np.zeros((L + 1) ** 2)
        for row in rec["coeffs"]:
            _require(len(row) == 3, "coeff rows are [k, m, value]")
            k, m = int(row[0]), int(row[1])
            _require(0 <= k <= L and -k <= m <= k,
                     f"coeff index ({k},{m}) out of range")
            vals[sh_index(k, m)] = float(row[2])
        return bandlimited(HarmonicCoeffs(L=L, values=vals), label=label)
    _require("n_theta" in rec and "n_phi" in rec and "values" in rec,
             "sampled needs 'n_theta', 'n_phi', 'values'")
    grid = product_sphere_grid(int(rec["n_theta"]), int(rec["n_phi"]))
    return sampled(grid, np.asarray(rec["values"], dtype=float), label=label)


def load_config(path, command):
    try:
        with open(path) as fh:
            text = fh.read()
        cfg = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno} "
                          f"column {exc.colno}: {exc.msg}") from None
    _require(isinstance(cfg, dict), "config must be a JSON object")
    allowed = _FIELDS[command]
    for key in cfg:
        _require(key in allowed,
                 f"unknown config field {key!r} for command {command}")
    if "command" in cfg:
        _require(cfg["command"] == command,
                 f"config names command {cfg['command']!r}, got {command!r}")
    _require("body" in cfg, "config needs a 'body'")

    L = int(cfg.get("L", 64))
    _require(2 <= L <= 256, "L must lie in [2, 256]")
    if "n_theta" in cfg:
        _require(int(cfg["n_theta"]) >= L + 1, "need n_theta >= L + 1")
    if "n_phi" in cfg:
        _require(int(cfg["n_phi"]) >= 2 * L + 1, "need n_phi >= 2L + 1")
    ladder = tuple(float(r) for r in cfg.get("r_ladder", (0.90, 0.95, 0.99)))
    _require(all(0.0 < r < 1.0 for r in ladder),
             "r_ladder entries must lie in (0, 1)")
    axis = None
    if "axis" in cfg:
        axis = np.asarray(cfg["axis"], dtype=float)
        _require(axis.shape == (3,), "axis must be a 3-vector")
        n = np.linalg.norm(axis)
        _require(abs(n - 1.0) < 1e-6, "axis must be a unit vector")
        axis = axis / n
    return cfg, L, ladder, axis


def _grid_for(cfg, L):
    nt = int(cfg.get("n_theta", max(96, L + 8)))
    nphi = int(cfg.get("n_phi", max(192, 2 * L + 16)))
    return product_sphere_grid(max(nt, L + 1), max(nphi, 2 * L + 1))


def _fmt(x):
    return repr(float(x))


def emit_profile_csv(profile, path, r_ladder=()):
    """Table of the profile: t, value, and one smoothed column per r.

    The value column holds the profile's own node samples when it has
    them (orbit averages), else the Legendre series; smoothed columns
    are always series evaluations of the Poisson-scaled coefficients.
    """
    if profile.t_nodes is not None:
        ts = np.asarray(profile.t_nodes, dtype=float)
    else:
        ts = gauss_legendre_rule(max(2 * (profile.L + 1), 16))[0]
    if profile.values is not None and profile.t_nodes is not None:
        vals = profile.values
    else:
        vals = zonal_eval(profile, ts)
    cols = [("t", ts), ("value", vals)]
    for r in r_ladder:
        sm = poisson_smooth(profile, r)
        cols.append((f"smoothed_r{_fmt(r)}", zonal_eval(sm, ts)))
    with open(path, "w") as fh:
        fh.write(",".join(name for name, _ in cols) + "\n")
        for i in range(ts.size):
            fh.write(",".join(_fmt(col[i]) for _, col in cols) + "\n")


def emit_scan_csv(report, path, r_ladder):
    cols = ["u1", "u2", "u3"]
    cols += [f"min_r{_fmt(r)}" for r in r_ladder]
    cols += ["verdict"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for u, cert in zip(report.directions, report.certificates):
            row = [_fmt(c) for c in u]
            ring_by_r = {ring.r: ring for ring in cert.rings}
            for r in r_ladder:
                ring = ring_by_r.get(r)
                row.append(_fmt(ring.min_value) if ring else "")
            row.append(cert.verdict)
            fh.write(",".join(row) + "\n")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _coeff_rows(coeffs):
    rows = []
    for k in range(coeffs.L + 1):
        for m in range(-k, k + 1):
            rows.append([k, m, float(coeffs.values[sh_index(k, m)])])
    return rows


def _write_summary(prefix, record, cfg, t0):
    record["meta"] = {
        "version": __version__,
        "params": _jsonable(cfg),
        "elapsed_s": time.perf_counter() - t0,
    }
    with open(prefix + ".json", "w") as fh:
        json.dump(_jsonable(record), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _certify_params(cfg, L, ladder):
    return CertifyParams(
        L=L, r_ladder=ladder,
        eps_pos=float(cfg.get("eps_pos", 1e-6)),
        eps_neg=float(cfg.get("eps_neg", 1e-3)),
        t_grid=int(cfg.get("t_grid", 2001)),
        parity_tol=float(cfg.get("parity_tol", 1e-9)),
        guard_threshold=float(cfg.get("guard_threshold", 1e-14)))


def run_spin(cfg, L, ladder, axis, prefix, threads):
    body = build_body(cfg["body"])
    u = axis if axis is not None else np.array([0.0, 0.0, 1.0])
    prof = spin_orbit(body, u, L=L)
    tg, wg = gauss_legendre_rule(L)
    at_gauss = spin_orbit(body, u, t_nodes=tg, t_weights=wg, L=L)
    table = ZonalProfile(axis=u, legendre=prof.legendre, kind="support",
                         endpoint=prof.endpoint, t_nodes=tg, t_weights=wg,
                         values=at_gauss.values)
    emit_profile_csv(table, prefix + "_profile.csv", ladder)
    return {"command": "spin", "body": body.label, "axis": u.tolist(),
            "L": L, "endpoint": prof.endpoint,
            "legendre": prof.legendre.tolist()}


def run_cosine(cfg, L, ladder, axis, prefix, threads):
    body = build_body(cfg["body"])
    grid = _grid_for(cfg, L)
    C = analyze(grid, support_eval(body, grid.nodes), L)
    out = cosine_spectral(C)
    record = {"command": "cosine", "body": body.label, "L": L,
              "multipliers": cosine_multipliers(L).values.tolist(),
              "coeffs_in": _coeff_rows(C), "coeffs_out": _coeff_rows(out)}
    if axis is not None:
        emit_profile_csv(project_zonal(out, axis), prefix + "_profile.csv",
                         ladder)
        record["axis"] = axis.tolist()
    return record


def run_invert(cfg, L, ladder, axis, prefix, threads):
    body = build_body(cfg["body"])
    grid = _grid_for(cfg, L)
    C = analyze(grid, support_eval(body, grid.nodes), L)
    G = inverse_cosine_spectral(
        C, parity_tol=float(cfg.get("parity_tol", 1e-9)),
        guard_threshold=float(cfg.get("guard_threshold", 1e-14)))
    record = {"command": "invert", "body": body.label, "L": L,
              "suppressed": list(G.suppressed),
              "coeffs": _coeff_rows(G.coeffs)}
    if axis is not None:
        emit_profile_csv(project_zonal(G, axis), prefix + "_profile.csv",
                         ladder)
        record["axis"] = axis.tolist()
    return record


def run_certify(cfg, L, ladder, axis, prefix, threads):
    body = build_body(cfg["body"])
    params = _certify_params(cfg, L, ladder)
    if axis is not None:
        if body.coeffs is not None:
            prof = spin_spectral(body.coeffs, axis)
        else:
            prof = spin_orbit(body, axis, L=min(2 * L, 256))
        cert = certify_zonal(prof, params)
        cert = dataclasses.replace(cert, label=body.label)
        from .zonoid import generating_profile
        emit_profile_csv(generating_profile(prof, params.parity_tol,
                                            params.guard_threshold),
                         prefix + "_profile.csv", ladder)
    else:
        cert = certify_body(body, params)
    record = {"command": "certify", "body": body.label,
              "verdict": cert.verdict, "certificate": _jsonable(cert)}
    if axis is not None:
        record["axis"] = axis.tolist()
    return record


def run_scan(cfg, L, ladder, axis, prefix, threads):
    body = build_body(cfg["body"])
    params = _certify_params(cfg, L, ladder)
    n_dir = int(cfg.get("directions", 100))
    _require(n_dir >= 1, "directions must be >= 1")
    report = theorem_scan(body, n_directions=n_dir, params=params,
                          threads=threads)
    emit_scan_csv(report, prefix + "_scan.csv", ladder)
    return {"command": "scan", "body": body.label, "verdict": report.verdict,
            "directions": n_dir, "witnesses": list(report.witnesses),
            "worst_direction": report.worst_direction,
            "worst_rel_min": report.worst_rel_min,
            "commutation_max": report.commutation_max,
            "per_direction": [c.verdict for c in report.certificates]}


def run_fit(cfg, L, ladder, axis, prefix, threads):
    body = build_body(cfg["body"])
    n_cand = int(cfg.get("candidates", 200))
    _require(n_cand >= 1, "candidates must be >= 1")
    fit = nnls_zonotope_fit(
        body, candidates=fibonacci_directions(n_cand, hemisphere=True),
        max_iter=int(cfg.get("max_iter", 5000)),
        tol=float(cfg.get("tol", 1e-10)))
    active = fit.weights > 1e-12 * max(fit.weights.max(), 1e-300)
    return {"command": "fit", "body": body.label,
            "residual": fit.residual, "rms_residual": fit.rms_residual,
            "converged": fit.converged, "n_iter": fit.n_iter,
            "active_generators": int(active.sum()),
            "weights": fit.weights.tolist(),
            "candidates": fit.candidates.tolist()}


_RUNNERS = {"spin": run_spin, "cosine": run_cosine, "invert": run_invert,
            "certify": run_certify, "scan": run_scan, "fit": run_fit}


def run_selftest():
    from .acceptance import CRITERIA

    failures = 0
    print(f"spinlab {__version__} selftest")
    for crit in CRITERIA:
        t0 = time.perf_counter()
        try:
            ok, detail = crit.run()
        except Exception as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"  {status}  {crit.name:<28} {dt:7.1f}s  {detail}")
    print(f"{len(CRITERIA) - failures}/{len(CRITERIA)} criteria passed")
    return 0 if failures == 0 else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spinlab",
        description="spin profiles, cosine transform inversion, and "
                    "zonoid certification on the sphere")
    parser.add_argument("command", choices=COMMANDS + ("selftest",))
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--out", help="output path prefix")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if args.command == "selftest":
        return run_selftest()
    if args.config is None:
        print("error: --config is required", file=sys.stderr)
        return 2
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("SPINLAB_THREADS", "1"))
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        cfg, L, ladder, axis = load_config(args.config, args.command)
        prefix = args.out or cfg.get("out") or f"spinlab_{args.command}"
        record = _RUNNERS[args.command](cfg, L, ladder, axis, prefix, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_summary(prefix, record, cfg, t0)
    if "verdict" in record:
        print(f"{record['command']} {record['body']}: {record['verdict']}")
    else:
        print(f"{record['command']} {record['body']}: done")
    print(f"wrote {prefix}.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
