"""End-to-end acceptance checks, one printed verdict line per criterion.

Exact symbolic criteria are asserted bit-exactly; quadrature criteria use
the bounded-residual / slope-match contracts of the verification drivers at
the stated resolutions and tolerances.  Known-infeasible clauses are still
executed and reported honestly rather than weakened.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from dualcurve.poly import (DUAL, EXACT, HomogPoly, canonical, dual_action,
                            eval_poly, fermat, point_action, veronese_conic)
from dualcurve.elimination import (PlaneCurve, certify, generic_binary_discriminant,
                                   generic_binary_resultant,
                                   plane_dual_discriminant)
from dualcurve.polytope import (OneParamSubgroup, folded_support_weights,
                                scaled_inclusion, symbolic_norm_slope, traceless,
                                weight_of, weight_polytope)
from dualcurve.sampler import build_sampler, integrate
from dualcurve.energy import (_raw_density, dual_degree_check, energies,
                              ricci_integral)
from dualcurve.verify import (SigmaFamily, random_sl3, verify_aubin_resultant,
                              verify_ddbar_identity, verify_plane_curve_identity,
                              verify_tian_hypersurface, verify_veronese_mt)

from conftest import random_exact_poly, random_rational_sigma


def _verdict(num: int, ok: bool, desc: str) -> None:
    print(f"\ncriterion {num:2d} [{'PASS' if ok else 'FAIL'}] {desc}", flush=True)
    assert ok, f"criterion {num}: {desc}"


def _dual(terms, degree):
    return HomogPoly.from_terms(3, degree, {k: Fraction(v) for k, v in terms.items()},
                                EXACT, DUAL)


def test_criterion_01_discriminant_oracles():
    t0 = time.monotonic()
    d_fermat = plane_dual_discriminant(PlaneCurve(fermat(3, 2))).delta
    d_ver = plane_dual_discriminant(PlaneCurve(veronese_conic())).delta
    ok = (canonical(d_fermat) == canonical(_dual({(2, 0, 0): 1, (0, 2, 0): 1,
                                                  (0, 0, 2): 1}, 2))
          and canonical(d_ver) == canonical(_dual({(1, 0, 1): 4, (0, 2, 0): -1}, 2))
          and time.monotonic() - t0 < 1.0)
    _verdict(1, ok, "conic dual-discriminant oracles, exact, < 1 s")


def test_criterion_02_degree_law(tmp_path):
    t0 = time.monotonic()
    degrees = {}
    for d in (2, 3, 4):
        dd = plane_dual_discriminant(PlaneCurve(fermat(3, d)), cache_dir=str(tmp_path))
        degrees[d] = dd.delta.degree
    elapsed = time.monotonic() - t0
    ok = all(degrees[d] == d * (d - 1) for d in (2, 3, 4)) and elapsed < 600
    _verdict(2, ok, f"deg dual = d(d-1) for d=2,3,4 (got {degrees}, {elapsed:.1f}s)")


def test_criterion_03_equivariance():
    rng = random.Random(7)
    ok = True
    for d in (2, 3):
        F = fermat(3, d)
        DF = plane_dual_discriminant(PlaneCurve(F)).delta
        for _ in range(5):
            s = random_rational_sigma(rng)
            moved = plane_dual_discriminant(PlaneCurve(point_action(s, F))).delta
            ok = ok and canonical(moved) == canonical(dual_action(s, DF))
    _verdict(3, ok, "dual discriminant equivariance, 5 random rational sigma, d=2,3")


def test_criterion_04_pointwise_duality():
    t0 = time.monotonic()
    worst = 0.0
    for d in (2, 3):
        F = fermat(3, d)
        grid = build_sampler(F, resolution=256, seed=0)
        rng = np.random.default_rng(0)
        gl = [random_sl3(rng, 2.0) * rng.uniform(0.5, 2.0) for _ in range(10)]
        rep = verify_ddbar_identity(F, gl, grid, n_points=100, tol=1e-8, seed=0)
        worst = max(worst, rep.residual)
    elapsed = time.monotonic() - t0
    ok = worst < 1e-8 and elapsed < 10
    _verdict(4, ok, f"pointwise dual-potential identity, max residual "
                    f"{worst:.2e} < 1e-8, {elapsed:.1f}s < 10s")


def test_criterion_05_quadrature_calibration():
    ok = True
    notes = []
    for d in (2, 3):
        t0 = time.monotonic()
        grid = build_sampler(fermat(3, d), resolution=512, seed=0)
        mass, _ = integrate(grid, lambda b: _raw_density(b.z, b.zp) / np.pi)
        dual, _ = dual_degree_check(grid)
        ric, _ = ricci_integral(grid)
        elapsed = time.monotonic() - t0
        ok = ok and abs(mass - d) < 0.005 * d
        ok = ok and abs(dual - d * (d - 1)) < 0.01 * d * (d - 1)
        target = (3 - d) * d
        if target == 0:
            ok = ok and abs(ric) < 0.03 * d
        else:
            ok = ok and abs(ric - target) < 0.01 * abs(target)
        ok = ok and elapsed < 120
        notes.append(f"d={d}: mass {mass:.4f}, dual {dual:.4f}, ric {ric:.4f}, {elapsed:.0f}s")
    _verdict(5, ok, "volume/dual-degree/Ricci calibration at 512 (" + "; ".join(notes) + ")")


def test_criterion_06_I_equals_2J():
    rng = np.random.default_rng(4)
    ok = True
    worst = 0.0
    for d in (2, 3):
        grid = build_sampler(fermat(3, d), resolution=256, seed=0)
        for _ in range(3):
            E = energies(grid, random_sl3(rng, 2.5))
            gap = abs(E.I - 2 * E.J)
            worst = max(worst, gap / max(E.grid_error, 1e-12))
            ok = ok and gap < E.grid_error
    _verdict(6, ok, f"I = 2J within combined quadrature error "
                    f"(worst gap/error {worst:.2f})")


def test_criterion_07_aubin_resultant():
    t_grid = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]  # |t|^2 spans ~3.6 decades
    diag = SigmaFamily.diagonal((1, 0, -1), t_grid)
    rep_slope = verify_aubin_resultant(fermat(3, 2), diag, resolution=512, seed=0)
    rand = SigmaFamily.random(seed=0, count=8, anisotropy=12.0)
    rep_spread = verify_aubin_resultant(fermat(3, 3), rand, resolution=512, seed=0)
    ok = rep_slope.passed and rep_spread.passed
    _verdict(7, ok, f"Aubin term: slope {rep_slope.slopes['measured']:.4f} vs "
                    f"{rep_slope.slopes['predicted']}, spread {rep_spread.spread:.3f} "
                    f"< 0.05 x {rep_spread.term_range:.1f}")


def test_criterion_08_plane_curve_identity():
    t0 = time.monotonic()
    t_grid = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    F2 = fermat(3, 2)
    delta2 = plane_dual_discriminant(PlaneCurve(F2)).delta
    diag = SigmaFamily.diagonal((1, 0, -1), t_grid)
    rep2 = verify_plane_curve_identity(F2, delta2, diag, resolution=512, seed=0)
    F3 = fermat(3, 3)
    delta3 = plane_dual_discriminant(PlaneCurve(F3)).delta
    rand = SigmaFamily.random(seed=1, count=8, anisotropy=5.5)
    rep3 = verify_plane_curve_identity(F3, delta3, rand, resolution=512, seed=0)
    elapsed = time.monotonic() - t0
    ok = rep2.passed and rep3.passed and elapsed < 600
    _verdict(8, ok, f"discriminant-norm identity: d=2 slopes "
                    f"{rep2.slopes['measured']:.4f}/{rep2.grid.get('rhs_slope', float('nan')):.4f} "
                    f"vs {rep2.slopes['predicted']}; d=3 spread {rep3.spread:.3f} "
                    f"< 0.05 x {rep3.term_range:.1f}; {elapsed:.0f}s < 600s")


def test_criterion_09_tian_hypersurface():
    t_grid = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    F = fermat(3, 3)
    diag = SigmaFamily.diagonal((1, 0, -1), t_grid)
    rep_slope = verify_tian_hypersurface(F, diag, resolution=512, seed=0)
    rand = SigmaFamily.random(seed=1, count=8, anisotropy=5.5)
    rep_spread = verify_tian_hypersurface(F, rand, resolution=512, seed=0)
    cons = max(abs(c) for c in rep_spread.details["consistency"])
    ok = rep_slope.passed and rep_spread.passed
    _verdict(9, ok, f"hypersurface K-energy identity: slope "
                    f"{rep_slope.slopes['measured']:.4f} vs {rep_slope.slopes['predicted']}, "
                    f"spread {rep_spread.spread:.3f}, consistency {cons:.4f} < 0.05")


def test_criterion_10_veronese_moser_trudinger():
    t_grid = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    dq = plane_dual_discriminant(PlaneCurve(veronese_conic())).delta
    diag = SigmaFamily.diagonal((1, 0, -1), t_grid)
    rep_diag = verify_veronese_mt(dq, diag, resolution=512, seed=0)
    rand = SigmaFamily.random(seed=1, count=8, anisotropy=5.5)
    rep_rand = verify_veronese_mt(dq, rand, resolution=512, seed=0)
    small = SigmaFamily.random(seed=1, count=3, anisotropy=5.5)
    min_e1 = []
    for res in (256, 512):
        rep = verify_veronese_mt(dq, small, resolution=res, seed=0)
        min_e1.append(rep.details["min_E1"])
    stable = (all(math.isfinite(v) for v in min_e1)
              and abs(min_e1[1] - min_e1[0]) < 0.05 * max(abs(min_e1[1]), 1.0))
    # The 6 E1 spread clause does not hold: the measured coefficient is 2/3
    # (reported as alt_constant), so rep_rand fails and is reported as-is.
    ok = rep_diag.passed and rep_rand.passed and stable
    _verdict(10, ok, f"Veronese 6E1 contract: diag pass={rep_diag.passed}, "
                     f"random spread {rep_rand.spread:.2f} vs bound "
                     f"{0.05 * max(rep_rand.term_range, 1.0):.2f} "
                     f"(pass={rep_rand.passed}), min E1 stable={stable} "
                     f"({min_e1[0]:.4f} -> {min_e1[1]:.4f})")


def test_criterion_11_weight_slope_law():
    rng = random.Random(99)
    t_grid = [1.0 / 2 ** k for k in range(1, 15)]  # toward t = 0: min weight
    worst = 0.0
    for _ in range(20):
        P = random_exact_poly(rng, 3, rng.randint(1, 5), n_terms=6)
        while True:
            m = [rng.randint(-3, 3) for _ in range(3)]
            m[2] = -(m[0] + m[1])
            if abs(m[2]) <= 3 and any(m):
                break
        lam = OneParamSubgroup(tuple(m))
        kind = rng.choice(("onDual", "onPoints"))
        Pk = P if kind == "onPoints" else P.with_space("dual")
        W = weight_polytope(Pk, kind)
        w = weight_of(W, lam)
        meas, _ = symbolic_norm_slope(Pk, kind, lam, t_grid[-3:])
        worst = max(worst, abs(meas - w) / max(abs(w), 1.0))
    ok = worst <= 0.02
    _verdict(11, ok, f"norm slope = Hilbert-Mumford weight, 20 random pairs "
                     f"(worst relative error {worst:.2e})")


def test_criterion_12_polytope_inclusion():
    # d = 2: exact verdict with the two hand-computed barycentric parameters
    R2 = generic_binary_resultant(2)
    D2 = generic_binary_discriminant(2)
    WR2 = weight_polytope(R2.poly, "onPoints",
                          points=folded_support_weights(R2.poly, 2, "onPoints"))
    WD2 = weight_polytope(D2.poly, "onDual")
    cert2 = scaled_inclusion(WR2, Fraction(1, 2), WD2)
    tv = traceless(WD2.vertices)
    v0, v1 = tv[0], tv[-1]
    params = sorted((tgt[0] - v0[0]) / (v1[0] - v0[0]) for tgt in cert2.witnesses)
    ok2 = cert2.included and params == [Fraction(1, 3), Fraction(5, 6)]

    # d = 3: any verdict, but the certificates must re-verify exactly
    R3 = generic_binary_resultant(3)
    D3 = generic_binary_discriminant(3)
    WR3 = weight_polytope(R3.poly, "onPoints",
                          points=folded_support_weights(R3.poly, 3, "onPoints"))
    WD3 = weight_polytope(D3.poly, "onDual")
    cert3 = scaled_inclusion(WR3, Fraction(2, 3), WD3)
    ok3 = True
    for tgt, w in cert3.witnesses.items():
        rec = tuple(sum(c * g[i] for c, g in zip(w.coeffs, w.generators))
                    for i in range(len(tgt)))
        ok3 = ok3 and rec == tgt and sum(w.coeffs) == 1 and all(c >= 0 for c in w.coeffs)
    for tgt, sep in cert3.separators.items():
        ok3 = ok3 and sep.value_at_point > sep.bound
    ok = ok2 and ok3
    _verdict(12, ok, f"scaled polytope inclusion: d=2 witnesses {params}, "
                     f"d=3 verdict included={cert3.included} with "
                     f"{len(cert3.witnesses)} witnesses / {len(cert3.separators)} "
                     f"separators, all re-verified")
