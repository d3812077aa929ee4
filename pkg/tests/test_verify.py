import json
import math

import numpy as np
import pytest

from dualcurve.poly import fermat, veronese_conic
from dualcurve.elimination import PlaneCurve, plane_dual_discriminant
from dualcurve.sampler import build_sampler
from dualcurve.verify import (SigmaFamily, VerificationReport, log_fs_ratio_dual,
                              log_fs_ratio_point, random_sl3,
                              verify_aubin_resultant, verify_ddbar_identity,
                              verify_plane_curve_identity)


class TestSigmaFamilies:
    def test_random_family_deterministic(self):
        f1 = SigmaFamily.random(seed=11, count=4, anisotropy=3.0)
        f2 = SigmaFamily.random(seed=11, count=4, anisotropy=3.0)
        for a, b in zip(f1.sigmas, f2.sigmas):
            assert np.array_equal(a, b)

    def test_random_family_special_linear(self):
        fam = SigmaFamily.random(seed=2, count=6, anisotropy=4.0)
        for s in fam.sigmas:
            assert abs(abs(np.linalg.det(s)) - 1.0) < 1e-10

    def test_diagonal_family_structure(self):
        fam = SigmaFamily.diagonal((1, 0, -1), [2.0, 4.0])
        assert fam.lam is not None and len(fam.sigmas) == 2
        assert np.allclose(fam.sigmas[0], np.diag([2.0, 1.0, 0.5]))


class TestNormRatios:
    def test_point_ratio_identity_zero(self):
        assert abs(log_fs_ratio_point(fermat(3, 3), np.eye(3))) < 1e-12

    def test_dual_ratio_diagonal_value(self):
        # conic dual 4 a0 a2 - a1^2 under diag(t,1,1/t): a0 a2 invariant,
        # a1 invariant -> ratio 0 for every t
        dq = plane_dual_discriminant(PlaneCurve(veronese_conic())).delta
        for t in (2.0, 5.0):
            s = np.diag([t, 1.0, 1.0 / t])
            assert abs(log_fs_ratio_dual(dq, s)) < 1e-12

    def test_point_ratio_scaling_law(self):
        # F(sigma^{-1} z) for sigma = c * Id scales the norm by |c|^{-2d}
        F = fermat(3, 3)
        val = log_fs_ratio_point(F, 2.0 * np.eye(3))
        assert abs(val - (-6.0) * math.log(2.0)) < 1e-12


class TestDdbar:
    def test_pointwise_identity_small_grid(self):
        F = fermat(3, 2)
        grid = build_sampler(F, resolution=128, seed=0)
        rng = np.random.default_rng(0)
        gl = [random_sl3(rng, 2.0) * rng.uniform(0.5, 2.0) for _ in range(4)]
        rep = verify_ddbar_identity(F, gl, grid, n_points=50)
        assert rep.passed and rep.residual < 1e-8


class TestIntegralIdentities:
    def test_aubin_diagonal_slope_conic(self):
        fam = SigmaFamily.diagonal((1, 0, -1), [2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
        rep = verify_aubin_resultant(fermat(3, 2), fam, resolution=256, seed=0)
        assert rep.passed
        assert rep.slopes["predicted"] is not None
        assert abs(rep.slopes["measured"] - rep.slopes["predicted"]) \
            <= 0.02 * max(abs(rep.slopes["predicted"]), 1.0)

    def test_planecurve_diagonal_slope_conic(self):
        F = fermat(3, 2)
        delta = plane_dual_discriminant(PlaneCurve(F)).delta
        fam = SigmaFamily.diagonal((1, 0, -1), [2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
        rep = verify_plane_curve_identity(F, delta, fam, resolution=256, seed=0)
        assert rep.passed
        assert "rhs_slope" in rep.grid


class TestReports:
    def test_json_roundtrip(self, tmp_path):
        rep = VerificationReport(identity="aubin", sigma_id="x", residual=0.1,
                                 spread=0.01, term_range=2.0,
                                 slopes={"predicted": 2.0, "measured": 1.99},
                                 grid={"resolution": 64}, passed=True,
                                 details={"residuals": [0.1]})
        path = tmp_path / "rep.json"
        rep.dump(path)
        data = json.loads(path.read_text())
        assert data["pass"] is True
        assert data["identity"] == "aubin"
        assert data["slopes"]["measured"] == 1.99
