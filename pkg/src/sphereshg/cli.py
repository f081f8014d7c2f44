"""Configuration-driven experiment runner.

Every subcommand writes two files into --out: a comma-separated data table
(``<name>_table.csv``) and a JSON summary (``<name>_summary.json``) carrying
the full effective configuration, the library version, the seed and the wall
time.  Identical configuration and seed reproduce the data tables byte for
byte; wall time lives only in the summary.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    EvolutionParams,
    picard_iterate,
    recommended_panels,
    splitstep_evolve,
)
from .errors import ConfigurationError, NumericalFailure
from .inequalities import (
    apriori_h1_bound,
    calibrate_gn_constant,
    gn_ratio,
    h1_pair_energy_sq,
)
from .observables import conservation_report
from .resonance import (
    SigmaRational,
    lambda_count_table,
    sup_count,
    verify_transformed_equation,
)
from .spectral import (
    SPHERE2,
    SpectralField,
    SpectrumModel,
    SphereGrid,
    bracket,
    dyadic_project,
    l2_inner,
    sobolev_norm,
    synthesize,
    analyze,
)
from .strichartz import ScanConfig, run_bilinear_scan, run_projector_scan


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, complex):
        return f"{x.real!r}{'+' if x.imag >= 0 else '-'}{abs(x.imag)!r}j"
    return str(x)


def _write_table(path: Path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_summary(path: Path, name, config, results, t_start):
    payload = {
        "subcommand": name,
        "config": config,
        "version": __version__,
        "seed": config.get("seed"),
        "wall_time_s": time.time() - t_start,
        "results": results,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sigma_from(args) -> SigmaRational:
    beta, theta = args.sigma
    sig = SigmaRational(int(beta), int(theta))
    if getattr(args, "require_square", False) and not sig.is_perfect_square_pair:
        raise ConfigurationError(
            f"--require-square: beta={sig.beta}, theta={sig.theta} are not both perfect squares")
    return sig


def _params_from(args) -> EvolutionParams:
    return EvolutionParams(
        sigma=_sigma_from(args),
        alpha=args.alpha,
        eps1=complex(args.eps1[0], args.eps1[1]),
        eps2=complex(args.eps2[0], args.eps2[1]),
    )


def _model_from(args) -> SpectrumModel:
    if getattr(args, "model", "sphere") == "zoll":
        return SpectrumModel("zoll", z0=args.z0, band_halfwidth=args.band_halfwidth)
    return SpectrumModel("sphere", getattr(args, "dimension", 2))


def _smooth_random_pair(kmax, seed, h1_norm, model):
    """Seeded smooth initial data with prescribed H^1 norm of the pair."""
    rng = np.random.default_rng(seed)
    v = SpectralField.random(kmax, rng, decay=kmax / 4.0)
    u = SpectralField.random(kmax, rng, decay=kmax / 4.0)
    scale = h1_norm / np.hypot(sobolev_norm(v, 1.0, model), sobolev_norm(u, 1.0, model))
    return v.scaled(scale), u.scaled(scale)


def _run_selftest(args, out: Path, t0) -> int:
    kmax = args.band_limit
    model = _model_from(args)
    grid = SphereGrid(kmax)
    rng = np.random.default_rng(args.seed)
    rows = []

    f = SpectralField.random(kmax, rng)
    back = analyze(synthesize(f, grid), grid)
    rows.append(("roundtrip_random", np.abs(back.coeffs - f.coeffs).max(), 1e-10))

    g2 = SpectralField.random(kmax, rng)
    quad = grid.integrate(np.conj(synthesize(f, grid)) * synthesize(g2, grid))
    ip = l2_inner(f, g2)
    rows.append(("parseval_rel", abs(quad - ip) / max(abs(ip), 1e-30), 1e-10))

    blocks = []
    n = 1
    while n <= 2 * kmax:
        blocks.append(dyadic_project(f, n, model))
        n *= 2
    total = blocks[0]
    for b in blocks[1:]:
        total = total + b
    rows.append(("projector_partition", np.abs(total.coeffs - f.coeffs).max(), 1e-14))
    proj = dyadic_project(f, 2, model)
    rows.append(("projector_idempotent",
                 np.abs(dyadic_project(proj, 2, model).coeffs - proj.coeffs).max(), 1e-15))

    ok = all(val <= tol for _, val, tol in rows)
    _write_table(out / "selftest_table.csv", ("check", "value", "tolerance"), rows)
    _write_summary(out / "selftest_summary.json", "selftest", vars_config(args),
                   {"all_passed": ok, "checks": {r[0]: r[1] for r in rows}}, t0)
    if not ok:
        raise NumericalFailure("selftest invariants violated")
    return 0


def _run_evolve(args, out: Path, t0) -> int:
    p = _params_from(args)
    model = _model_from(args)
    kmax = args.band_limit
    grid = SphereGrid(kmax)
    v0, u0 = _smooth_random_pair(kmax, args.seed, args.h1_norm, model)
    if args.solver == "picard":
        n_t = args.panels or recommended_panels(kmax, p, args.time, model)
        traj = picard_iterate(v0, u0, p, args.time, n_t, grid=grid, model=model)
    else:
        traj = splitstep_evolve(v0, u0, p, args.time, args.dt, grid=grid,
                                model=model, sample_stride=args.sample_stride)
    rep = conservation_report(traj, p, grid, model)
    rows = [(t, m, e) for t, m, e in rep.row_iter()]
    _write_table(out / "evolve_table.csv", ("time", "mass", "energy"), rows)
    _write_summary(out / "evolve_summary.json", "evolve", vars_config(args), {
        "mass_drift": rep.mass_drift,
        "energy_drift": rep.energy_drift,
        "conservative_coupling": rep.conservative,
        "solver_meta": traj.meta,
    }, t0)
    return 0


def _count_cell(job):
    n, l, sig, model = job
    m_lo, table = lambda_count_table(n, l, sig, model)
    m_star, sup = sup_count(n, l, sig, model)
    return (n, l, m_star, sup, int(table.sum()))


def _run_count(args, out: Path, t0) -> int:
    sig = _sigma_from(args)
    model = _model_from(args)
    checks = {}
    jobs = [(n, l, sig, model) for n in args.dyadic_n for l in args.dyadic_l]
    workers = int(os.environ.get("SPHERESHG_WORKERS", "1"))
    if workers > 1 and len(jobs) > 1:
        # cells are independent; map() preserves submission order, so the
        # table stays deterministic regardless of scheduling
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_count_cell, jobs))
    else:
        rows = [_count_cell(job) for job in jobs]
    if args.verify_transformed:
        for n in args.dyadic_n:
            for l in args.dyadic_l:
                ok, wit = verify_transformed_equation(n, l, sig,
                                                      getattr(args, "dimension", 2),
                                                      model=model)
                checks[f"newset_{n}_{l}"] = bool(ok)
                if not ok:
                    raise NumericalFailure(f"transformed-equation witness at ({n},{l}): {wit[:3]}")
    _write_table(out / "count_table.csv", ("N", "L", "m_star", "sup", "total"), rows)
    _write_summary(out / "count_summary.json", "count", vars_config(args),
                   {"cells": len(rows), "newset_checks": checks}, t0)
    return 0


def _run_strichartz(args, out: Path, t0) -> int:
    cfg = ScanConfig(n_list=args.dyadic_n, l_list=args.dyadic_l,
                     trials=args.trials, seed=args.seed, sigma=_sigma_from(args),
                     sign=args.sign, n_time=args.time_nodes)
    rows, fit = run_bilinear_scan(cfg, _model_from(args))
    _write_table(out / "strichartz_table.csv", ("N", "L", "trial", "ratio"), rows)
    _write_summary(out / "strichartz_summary.json", "strichartz", vars_config(args), {
        "slope": fit.slope, "intercept": fit.intercept,
        "residual": fit.residual, "buckets": fit.buckets,
        "reference_exponent": cfg.s0_reference,
        "note": "empirical lower envelope of the best constant",
    }, t0)
    return 0


def _run_projector_bilinear(args, out: Path, t0) -> int:
    pairs = []
    for k in args.degrees:
        pairs.append((k, k))
        if args.include_double:
            pairs.append((k, 2 * k))
    rows, fit = run_projector_scan(pairs, args.trials, args.seed, _model_from(args),
                                   structured=args.structured)
    flagged = fit.slope > 0.3
    _write_table(out / "projector_bilinear_table.csv", ("k", "l", "trials", "ratio"), rows)
    _write_summary(out / "projector_bilinear_summary.json", "projector-bilinear",
                   vars_config(args), {
                       "slope": fit.slope, "intercept": fit.intercept,
                       "residual": fit.residual, "buckets": fit.buckets,
                       "flag_above_0.3": bool(flagged),
                       "note": "empirical lower envelope of the best constant",
                   }, t0)
    return 0


def _run_gn(args, out: Path, t0) -> int:
    model = _model_from(args)
    kmax = args.band_limit
    grid = SphereGrid(kmax)
    rng = np.random.default_rng(args.seed)
    rows = []
    records = []
    for trial in range(args.trials):
        f = SpectralField.random(kmax, rng, decay=kmax / 3.0)
        rec = gn_ratio(f, args.r, grid, model)
        records.append(rec)
        rows.append((trial, rec.lhs, rec.grad_term, rec.mass_term, rec.ratio))
    a_cal = calibrate_gn_constant(records, args.r, b_const=args.b_const)
    _write_table(out / "gn_table.csv",
                 ("trial", "lr_norm", "grad_term", "mass_term", "ratio"), rows)
    _write_summary(out / "gn_summary.json", "gn", vars_config(args), {
        "max_ratio": max(r.ratio for r in records),
        "calibrated_A": a_cal, "B": args.b_const, "r": args.r,
    }, t0)
    return 0


def _run_bound(args, out: Path, t0) -> int:
    p = _params_from(args)
    model = _model_from(args)
    kmax = args.band_limit
    grid = SphereGrid(kmax)
    v0, u0 = _smooth_random_pair(kmax, args.seed, args.h1_norm, model)
    traj = splitstep_evolve(v0, u0, p, args.time, args.dt, grid=grid, model=model,
                            sample_stride=args.sample_stride)
    rep = conservation_report(traj, p, grid, model)
    records = [gn_ratio(traj.v_field(j), 4.0, grid, model) for j in range(len(traj))]
    a_cal = calibrate_gn_constant(records, 4.0, b_const=args.b_const)
    ceiling = apriori_h1_bound(p.sigma_value, p.alpha, 2,
                               rep.mass_values[0], rep.energy_values[0],
                               a_cal, args.b_const)
    rows = []
    confined = True
    for j in range(len(traj)):
        h1sq = h1_pair_energy_sq(traj.v_field(j), traj.u_field(j), model)
        ok = h1sq <= ceiling
        confined &= ok
        rows.append((traj.times[j], h1sq, ceiling, int(ok)))
    _write_table(out / "bound_table.csv", ("time", "h1_pair_sq", "bound", "confined"), rows)
    _write_summary(out / "bound_summary.json", "bound", vars_config(args), {
        "calibrated_A": a_cal, "B": args.b_const, "bound": ceiling,
        "all_confined": bool(confined),
        "mass_drift": rep.mass_drift, "energy_drift": rep.energy_drift,
    }, t0)
    if not confined:
        raise NumericalFailure("trajectory exceeded the a-priori H^1 ceiling")
    return 0


def vars_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg["workers"] = int(os.environ.get("SPHERESHG_WORKERS", "1"))
    return cfg


def _add_common(sp, *, seed_required=True):
    sp.add_argument("--out", type=Path, required=True, help="output directory")
    sp.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0)
    sp.add_argument("--model", choices=("sphere", "zoll"), default="sphere")
    sp.add_argument("--dimension", type=int, default=2)
    sp.add_argument("--z0", type=int, default=0)
    sp.add_argument("--band-halfwidth", type=float, default=1.0)


def _add_sigma(sp):
    sp.add_argument("--sigma", nargs=2, type=int, metavar=("BETA", "THETA"),
                    default=(1, 1), help="dispersion ratio as the integer pair beta theta")
    sp.add_argument("--require-square", action="store_true",
                    help="reject beta, theta that are not both perfect squares")


def _add_evolution(sp):
    _add_sigma(sp)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--eps1", nargs=2, type=float, metavar=("RE", "IM"), default=(1.0, 0.0))
    sp.add_argument("--eps2", nargs=2, type=float, metavar=("RE", "IM"), default=(1.0, 0.0))
    sp.add_argument("--time", type=float, default=0.5)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--h1-norm", type=float, default=1.0,
                    help="H^1 norm of the seeded smooth initial pair")
    sp.add_argument("--sample-stride", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sphereshg",
                                 description="quadratic SHG system on the sphere: "
                                             "solvers, conservation, resonance and "
                                             "bilinear-estimate experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("selftest", help="transform and projector invariants")
    _add_common(sp, seed_required=False)
    sp.add_argument("--band-limit", type=int, default=16)
    sp.set_defaults(func=_run_selftest)

    sp = sub.add_parser("evolve", help="nonlinear evolution + conservation report")
    _add_common(sp)
    sp.add_argument("--band-limit", type=int, default=32)
    _add_evolution(sp)
    sp.add_argument("--solver", choices=("splitstep", "picard"), default="splitstep")
    sp.add_argument("--panels", type=int, default=None,
                    help="picard time panels (default: 64 T f_max rule)")
    sp.set_defaults(func=_run_evolve)

    sp = sub.add_parser("count", help="resonance-set cardinality sweep")
    _add_common(sp, seed_required=False)
    _add_sigma(sp)
    sp.add_argument("--dyadic-n", type=int, nargs="+", required=True)
    sp.add_argument("--dyadic-l", type=int, nargs="+", required=True)
    sp.add_argument("--verify-transformed", action="store_true")
    sp.set_defaults(func=_run_count)

    sp = sub.add_parser("strichartz", help="evolution-bilinear scan and exponent fit")
    _add_common(sp)
    _add_sigma(sp)
    sp.add_argument("--dyadic-n", type=int, nargs="+", required=True)
    sp.add_argument("--dyadic-l", type=int, nargs="+", required=True)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--sign", choices=("+", "-"), default="+")
    sp.add_argument("--time-nodes", type=int, default=None)
    sp.set_defaults(func=_run_strichartz)

    sp = sub.add_parser("projector-bilinear", help="spectral-projector product scan")
    _add_common(sp)
    sp.add_argument("--degrees", type=int, nargs="+", default=(4, 8, 16, 32, 64))
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--include-double", action="store_true",
                    help="also scan the (k, 2k) cells")
    sp.add_argument("--structured", action="store_true",
                    help="max the envelope with the zonal/sectoral probes")
    sp.set_defaults(func=_run_projector_bilinear)

    sp = sub.add_parser("gn", help="interpolation-ratio envelope and A calibration")
    _add_common(sp)
    sp.add_argument("--band-limit", type=int, default=32)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--r", type=float, default=4.0)
    sp.add_argument("--b-const", type=float, default=1.0)
    sp.set_defaults(func=_run_gn)

    sp = sub.add_parser("bound", help="a-priori H^1 ceiling vs a trajectory")
    _add_common(sp)
    sp.add_argument("--band-limit", type=int, default=32)
    _add_evolution(sp)
    sp.add_argument("--b-const", type=float, default=1.0)
    sp.set_defaults(func=_run_bound)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.time()
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return args.func(args, out, t0)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(f"diagnostics: {exc.diagnostics}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
