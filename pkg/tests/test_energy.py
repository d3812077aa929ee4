import math

import numpy as np
import pytest

from dualcurve.poly import fermat, veronese_conic
from dualcurve.sampler import build_sampler
from dualcurve.energy import (GaussMap, bergman_potential, bergman_psi_integral,
                              density_ratio_log, dual_bergman_potential,
                              dual_degree_check, energies, psi_potential,
                              ricci_integral)
from dualcurve.verify import random_sl3


@pytest.fixture(scope="module")
def conic_grid():
    return build_sampler(fermat(3, 2), resolution=256, seed=0)


@pytest.fixture(scope="module")
def cubic_grid():
    return build_sampler(fermat(3, 3), resolution=256, seed=0)


class TestPotentials:
    def test_fermat_conic_psi_constant(self, conic_grid):
        # |grad|^2 = 4 |z|^2 on the Fermat conic, so psi == log 4 everywhere
        z = conic_grid.fine.z[:500]
        psi = psi_potential(fermat(3, 2), z)
        assert np.max(np.abs(psi - math.log(4.0))) < 1e-10

    def test_bergman_potential_identity_zero(self, nprng):
        z = nprng.normal(size=(40, 3)) + 1j * nprng.normal(size=(40, 3))
        assert np.max(np.abs(bergman_potential(np.eye(3), z))) < 1e-14

    def test_bergman_potential_scale_invariant(self, nprng):
        z = nprng.normal(size=(40, 3)) + 1j * nprng.normal(size=(40, 3))
        s = random_sl3(nprng, 2.0)
        assert np.allclose(bergman_potential(s, 3.7 * z), bergman_potential(s, z))

    def test_dual_potential_cocycle_constant(self, nprng):
        # phi_{st}(z) - phi_s(tz) - phi_t(z) = 0 pointwise for potentials
        z = nprng.normal(size=(40, 3)) + 1j * nprng.normal(size=(40, 3))
        s = random_sl3(nprng, 2.0)
        t = random_sl3(nprng, 2.0)
        lhs = bergman_potential(s @ t, z)
        rhs = bergman_potential(s, z @ t.T) + bergman_potential(t, z)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestCalibration:
    def test_dual_degree(self, conic_grid, cubic_grid):
        for grid, d in ((conic_grid, 2), (cubic_grid, 3)):
            val, err = dual_degree_check(grid)
            assert abs(val - d * (d - 1)) < 0.02 * d * (d - 1)

    def test_ricci_mass(self, conic_grid, cubic_grid):
        for grid, d in ((conic_grid, 2), (cubic_grid, 3)):
            val, err = ricci_integral(grid)
            target = (3 - d) * d
            assert abs(val - target) < max(0.02 * abs(target), 0.05)

    def test_psi_integral_conic(self, conic_grid):
        # psi == log 4 and log||F||^2 = log(3/2) on this curve, volume 2
        val, err = bergman_psi_integral(conic_grid)
        expected = 2.0 * (math.log(4.0) - math.log(1.5))
        assert abs(val - expected) < max(3 * err, 0.01)


class TestEnergies:
    def test_identity_sigma_all_zero(self, conic_grid):
        E = energies(conic_grid, np.eye(3))
        for val in (E.J, E.I, E.F0, E.nu, E.E1):
            assert abs(val) < 1e-10

    def test_unitary_sigma_norm_energies_zero(self, conic_grid, nprng):
        A = nprng.normal(size=(3, 3)) + 1j * nprng.normal(size=(3, 3))
        U, _ = np.linalg.qr(A)
        E = energies(conic_grid, U)
        assert abs(E.J) < 1e-10 and abs(E.I) < 1e-10 and abs(E.F0) < 1e-10

    def test_I_equals_2J(self, conic_grid, cubic_grid, nprng):
        for grid in (conic_grid, cubic_grid):
            for _ in range(2):
                s = random_sl3(nprng, 2.0)
                E = energies(grid, s)
                assert abs(E.I - 2 * E.J) < max(E.grid_error, 0.01)
                assert E.J >= 0

    def test_terms_recorded(self, conic_grid, nprng):
        E = energies(conic_grid, random_sl3(nprng, 1.5))
        for key in ("grad_sq", "phi_mixed", "phi_omega", "u_omega_sigma",
                    "psi_mixed", "u_ricci", "u_ricci_sigma"):
            assert key in E.terms


class TestPointwiseDuality:
    def test_dual_potential_identity(self, cubic_grid, nprng):
        # dual potential through the gradient map vs 2 phi + log density
        # ratio + determinant term, at random non-unimodular elements
        F = fermat(3, 3)
        gm = GaussMap(F)
        blk = cubic_grid.fine
        idx = nprng.integers(0, len(blk), size=100)
        import dataclasses
        sub = dataclasses.replace(blk, coord=blk.coord[idx], chart=blk.chart[idx],
                                  z=blk.z[idx], zp=blk.zp[idx], zpp=blk.zpp[idx],
                                  weight=blk.weight[idx])
        v, _ = gm.lift(sub)
        for _ in range(3):
            s = random_sl3(nprng, 2.0) * nprng.uniform(0.5, 2.0)
            lhs = dual_bergman_potential(s, v)
            rhs = (2.0 * bergman_potential(s, sub.z)
                   + density_ratio_log(s, sub)
                   - math.log(abs(np.linalg.det(s)) ** 2))
            assert np.max(np.abs(lhs - rhs)) < 1e-8
