"""Command-line surface: discriminants, polytopes, energies and the
verification suites, with reproducible JSON reports.

Exit codes: 0 success, 2 verification failed, 3 input error, 4 symbolic
degree cap exceeded, 5 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .poly import (HomogPoly, fermat, veronese_conic, load_poly, dump_poly,
                   to_json_dict)
from .elimination import (PlaneCurve, DegreeCapExceeded, NotSmoothError,
                          ExtraneousFactorError, certify, content_hash,
                          generic_binary_discriminant, generic_binary_resultant,
                          plane_dual_discriminant)
from .sampler import ProjectionDegenerate, build_sampler
from .energy import energies
from .polytope import (OneParamSubgroup, scaled_inclusion, symbolic_norm_slope,
                       predicted_norm_slope, weight_polytope)
from .verify import (SigmaFamily, log_fs_ratio_point, random_sl3, _sigma_grid,
                     verify_aubin_resultant, verify_ddbar_identity,
                     verify_plane_curve_identity, verify_tian_hypersurface,
                     verify_veronese_mt)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 2
EXIT_INPUT = 3
EXIT_CAP = 4
EXIT_NUMERIC = 5


class InputError(ValueError):
    pass


# ------------------------------------------------------------- config/flags


def _load_config(path: str) -> dict:
    if path.endswith(".json"):
        with open(path) as fh:
            return json.load(fh)
    try:
        import tomllib as toml  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as toml  # type: ignore[import-not-found]
    with open(path, "rb") as fh:
        return toml.load(fh)


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Read --config and fill in any option the flags left at its default."""
    if not getattr(args, "config", None):
        return args
    # option defaults live on the subparser that defined them
    parser = getattr(args, "subparser", parser)
    try:
        cfg = _load_config(args.config)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read config {args.config}: {exc}")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise InputError(f"unknown config key: {key}")
        if parser.get_default(attr) == getattr(args, attr):  # flags win
            setattr(args, attr, value)
    return args


# ----------------------------------------------------------- input parsing


def parse_curve(spec: str) -> HomogPoly:
    """'fermat:d', 'veronese', or a path to a polynomial JSON file."""
    if spec.startswith("fermat:"):
        try:
            d = int(spec.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad curve spec: {spec}")
        if d < 2:
            raise InputError("curve degree must be >= 2")
        return fermat(3, d)
    if spec == "veronese":
        return veronese_conic()
    if os.path.exists(spec):
        try:
            return load_poly(spec)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot parse curve file {spec}: {exc}")
    raise InputError(f"curve not found: {spec}")


def parse_t_grid(spec: str) -> List[float]:
    try:
        grid = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad t-grid: {spec}")
    if not grid or any(t <= 0 for t in grid):
        raise InputError("t-grid must be positive values")
    return grid


def parse_lam(spec: str) -> OneParamSubgroup:
    try:
        m = tuple(int(v) for v in spec.split(","))
    except ValueError:
        raise InputError(f"bad subgroup exponents: {spec}")
    if len(m) != 3 or sum(m) != 0:
        raise InputError("subgroup exponents must be 3 integers summing to 0")
    return OneParamSubgroup(m)


def parse_sigma_family(spec: str, t_grid: List[float]) -> SigmaFamily:
    """'diag:m0,m1,m2', 'random:seed=S,count=N,spread=A', or a JSON file
    with a list of 3x3 matrices of [re, im] entries."""
    if spec.startswith("diag:"):
        lam = parse_lam(spec.split(":", 1)[1])
        return SigmaFamily.diagonal(lam.m, t_grid)
    if spec.startswith("random:"):
        opts = {"seed": 0, "count": 8, "spread": 5.0}
        body = spec.split(":", 1)[1]
        for item in filter(None, body.split(",")):
            if "=" not in item:
                raise InputError(f"bad sigma option: {item}")
            k, v = item.split("=", 1)
            if k not in opts:
                raise InputError(f"unknown sigma option: {k}")
            opts[k] = float(v) if k == "spread" else int(v)
        return SigmaFamily.random(seed=int(opts["seed"]), count=int(opts["count"]),
                                  anisotropy=float(opts["spread"]))
    if os.path.exists(spec):
        try:
            with open(spec) as fh:
                raw = json.load(fh)
            sigmas = [np.array([[complex(e[0], e[1]) for e in row] for row in mat])
                      for mat in raw]
        except (ValueError, TypeError, IndexError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot parse sigma file {spec}: {exc}")
        if any(s.shape != (3, 3) for s in sigmas):
            raise InputError("sigma matrices must be 3x3")
        return SigmaFamily(sigmas, [f"{spec}[{i}]" for i in range(len(sigmas))])
    raise InputError(f"bad sigma spec: {spec}")


# ---------------------------------------------------------------- reporting


def _json_default(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def write_report(out_dir: str, name: str, payload: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    payload = dict(payload)
    payload["artifact_version"] = __version__
    path = os.path.join(out_dir, name + ".json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


# ----------------------------------------------------------------- commands


def cmd_discriminant(args) -> int:
    F = parse_curve(args.curve)
    curve = certify(PlaneCurve(F))
    dd = plane_dual_discriminant(curve, cache_dir=args.cache)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    poly_path = os.path.join(out_dir, "discriminant.json")
    dump_poly(dd.delta, poly_path)
    d = F.degree
    degree_ok = dd.delta.degree == d * (d - 1)
    write_report(out_dir, "discriminant-meta", {
        "source_degree": d,
        "degree": dd.delta.degree,
        "expected_degree": d * (d - 1),
        "degree_ok": degree_ok,
        "num_terms": dd.delta.num_terms(),
        "cache_key": content_hash("plane-dual-discriminant", F),
        "seed": args.seed,
    })
    print(f"discriminant: degree {dd.delta.degree} "
          f"({'ok' if degree_ok else 'DEGREE MISMATCH'}), {dd.delta.num_terms()} terms "
          f"-> {poly_path}")
    return EXIT_OK if degree_ok else EXIT_VERIFY_FAIL


def _cmd_generic(args, kind: str) -> int:
    d = args.degree
    if kind == "resultant":
        res = generic_binary_resultant(d, cache_dir=args.cache)
        name = "generic-resultant"
    else:
        res = generic_binary_discriminant(d, cache_dir=args.cache)
        name = "generic-discriminant"
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{name}-d{d}.json")
    dump_poly(res.poly, path)
    print(f"{name}: degree {res.poly.degree}, {res.poly.num_terms()} terms -> {path}")
    return EXIT_OK


def cmd_polytope(args) -> int:
    if args.target == "delta":
        F = parse_curve(args.curve)
        dd = plane_dual_discriminant(certify(PlaneCurve(F)), cache_dir=args.cache)
        W = weight_polytope(dd.delta, "onDual")
        Wnorm = weight_polytope(F, "onPoints")
    elif args.target == "resultant":
        F = parse_curve(args.curve)
        W = weight_polytope(F, "onPoints")
        Wnorm = W
    else:
        raise InputError(f"unknown polytope target: {args.target}")
    payload: Dict[str, object] = {
        "target": args.target,
        "vertices": [list(v) for v in W.vertices],
        "seed": args.seed,
    }
    verdict_ok = True
    if args.inclusion_scale is not None:
        try:
            c = Fraction(args.inclusion_scale)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"bad inclusion scale: {args.inclusion_scale}")
        cert = scaled_inclusion(W, c, Wnorm)
        payload["inclusion"] = {
            "scale": str(c),
            "included": cert.included,
            "witnesses": {str(k): {"coeffs": [str(x) for x in w.coeffs]}
                          for k, w in cert.witnesses.items()},
            "separators": {str(k): [str(x) for x in s.functional]
                           for k, s in cert.separators.items()},
        }
        verdict_ok = cert.included
    path = write_report(args.out, f"polytope-{args.target}", payload)
    print(f"polytope: {len(W.vertices)} vertices -> {path}")
    if args.inclusion_scale is not None:
        print(f"inclusion at c={args.inclusion_scale}: {verdict_ok}")
    return EXIT_OK


def cmd_slope(args) -> int:
    F = parse_curve(args.curve)
    lam = parse_lam(args.lam)
    t_grid = parse_t_grid(args.t_grid)
    to_zero = abs(t_grid[-1]) < abs(t_grid[0])
    W = weight_polytope(F, "onPoints")
    pred_F = predicted_norm_slope(W, lam, t_to_zero=to_zero)
    meas_F, resid_F = symbolic_norm_slope(F, "onPoints", lam, t_grid)
    rows = [{"term": "log||lam(t).F||^2", "predicted": int(pred_F),
             "measured": meas_F, "fit_residual": resid_F}]
    if F.degree <= 4:
        dd = plane_dual_discriminant(certify(PlaneCurve(F)), cache_dir=args.cache)
        Wd = weight_polytope(dd.delta, "onDual")
        pred_D = predicted_norm_slope(Wd, lam, t_to_zero=to_zero)
        meas_D, resid_D = symbolic_norm_slope(dd.delta, "onDual", lam, t_grid)
        rows.append({"term": "log||lam(t).Delta||^2", "predicted": int(pred_D),
                     "measured": meas_D, "fit_residual": resid_D})
    # quadrature slope of the Aubin term along the same family
    fam = SigmaFamily.diagonal(lam.m, t_grid)
    d = F.degree
    vals = []
    for sigma in fam.sigmas:
        grid = _sigma_grid(F, sigma, args.resolution, args.seed)
        E = energies(grid, sigma)
        vals.append(-2.0 * d * E.F0)
    k = min(3, len(vals))
    from .polytope import measure_slope
    meas_A, resid_A = measure_slope(vals[-k:], t_grid[-k:])
    rows.append({"term": "-2d F0", "predicted": int(pred_F),
                 "measured": meas_A, "fit_residual": resid_A})
    payload = {"subgroup": list(lam.m), "t_grid": t_grid, "slopes": rows,
               "resolution": args.resolution, "seed": args.seed}
    path = write_report(args.out, "slope", payload)
    for r in rows:
        print(f"{r['term']:24s} predicted {r['predicted']:+d}  measured {r['measured']:+.4f}")
    print(f"-> {path}")
    worst = max(abs(r["measured"] - r["predicted"]) / max(abs(r["predicted"]), 1.0)
                for r in rows)
    tol = args.tolerance if args.tolerance is not None else 0.02
    return EXIT_OK if worst <= tol else EXIT_VERIFY_FAIL


def cmd_energies(args) -> int:
    F = parse_curve(args.curve)
    t_grid = parse_t_grid(args.t_grid)
    fam = parse_sigma_family(args.sigma, t_grid)
    rows = []
    for sigma, sid in zip(fam.sigmas, fam.ids):
        grid = _sigma_grid(F, sigma, args.resolution, args.seed)
        E = energies(grid, sigma)
        rows.append({"sigma": sid, "J": E.J, "I": E.I, "F0": E.F0,
                     "nu": E.nu, "E1": E.E1, "grid_error": E.grid_error,
                     "log_norm_ratio": log_fs_ratio_point(F, sigma)})
        print(f"{sid:36s} J={E.J:+.6f} I={E.I:+.6f} F0={E.F0:+.6f} "
              f"nu={E.nu:+.6f} E1={E.E1:+.6f}")
    payload = {"curve": args.curve, "resolution": args.resolution,
               "seed": args.seed, "energies": rows}
    path = write_report(args.out, "energies", payload)
    print(f"-> {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    which = args.which
    names = ["ddbar", "aubin", "planecurve", "tian", "veronese"]
    if which != "all" and which not in names:
        raise InputError(f"unknown identity: {which}")
    targets = names if which == "all" else [which]
    F = parse_curve(args.curve)
    t_grid = parse_t_grid(args.t_grid)
    fam = parse_sigma_family(args.sigma, t_grid)
    reports = []
    for name in targets:
        if name == "ddbar":
            grid = build_sampler(F, resolution=min(args.resolution, 256), seed=args.seed)
            rng = np.random.default_rng(args.seed)
            gl = [random_sl3(rng, 2.0) * rng.uniform(0.5, 2.0) for _ in range(10)]
            tol = args.tolerance if args.tolerance is not None else 1e-8
            rep = verify_ddbar_identity(F, gl, grid, tol=tol, seed=args.seed)
        elif name == "aubin":
            rep = verify_aubin_resultant(F, fam, resolution=args.resolution,
                                         seed=args.seed)
        elif name == "planecurve":
            dd = plane_dual_discriminant(certify(PlaneCurve(F)), cache_dir=args.cache)
            rep = verify_plane_curve_identity(F, dd.delta, fam,
                                              resolution=args.resolution, seed=args.seed)
        elif name == "tian":
            rep = verify_tian_hypersurface(F, fam, resolution=args.resolution,
                                           seed=args.seed)
        else:
            Q = veronese_conic()
            dq = plane_dual_discriminant(certify(PlaneCurve(Q)), cache_dir=args.cache)
            rep = verify_veronese_mt(dq.delta, fam, resolution=args.resolution,
                                     seed=args.seed)
        reports.append(rep)
        payload = rep.to_json_dict()
        payload["seed"] = args.seed
        write_report(args.out, f"verify-{rep.identity}", payload)
        print(f"{rep.identity:12s} residual={rep.residual:+.4e} "
              f"spread={rep.spread:.4e} pass={rep.passed}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY_FAIL


# --------------------------------------------------------------- entry point


def _add_common(p: argparse.ArgumentParser):
    p.set_defaults(subparser=p)
    p.add_argument("--config", help="TOML or JSON config file; flags win")
    p.add_argument("--curve", default="fermat:3",
                   help="'fermat:d', 'veronese', or a polynomial JSON file")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", default="random:seed=0,count=8,spread=5.0",
                   help="'diag:m0,m1,m2', 'random:seed=,count=,spread=', or JSON file")
    p.add_argument("--t-grid", dest="t_grid", default="2,4,8,16,32,64")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--out", default="reports")
    p.add_argument("--cache", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dualcurve",
                                 description="dual-curve discriminants, weight polytopes "
                                             "and curve energy verification")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discriminant", help="dual-curve discriminant of a plane curve")
    _add_common(p)
    p.set_defaults(func=cmd_discriminant)

    for kind in ("resultant", "discriminant"):
        p = sub.add_parser(f"generic-{kind}", help=f"generic binary {kind}")
        _add_common(p)
        p.add_argument("--degree", type=int, required=True)
        p.set_defaults(func=lambda a, k=kind: _cmd_generic(a, k))

    p = sub.add_parser("verify", help="run identity verification suites")
    _add_common(p)
    p.add_argument("--which", default="all",
                   choices=["ddbar", "aubin", "planecurve", "tian", "veronese", "all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("polytope", help="weight polytope and scaled inclusion")
    _add_common(p)
    p.add_argument("--target", default="delta", choices=["delta", "resultant"])
    p.add_argument("--inclusion-scale", dest="inclusion_scale", default=None,
                   help="rational c for the scaled inclusion test, e.g. 1/2")
    p.set_defaults(func=cmd_polytope)

    p = sub.add_parser("slope", help="predicted vs measured 1-PSG slopes")
    _add_common(p)
    p.add_argument("--lam", default="1,0,-1", help="subgroup exponents m0,m1,m2")
    p.set_defaults(func=cmd_slope)

    p = sub.add_parser("energies", help="energy functionals for a sigma family")
    _add_common(p)
    p.set_defaults(func=cmd_energies)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args, parser)
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotSmoothError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegreeCapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ProjectionDegenerate, ExtraneousFactorError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        if "non-finite" in str(exc):
            print(f"numeric failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        raise


if __name__ == "__main__":
    sys.exit(main())
