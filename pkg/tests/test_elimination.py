import random
from fractions import Fraction

import numpy as np
import pytest

from dualcurve.poly import (DUAL, EXACT, HomogPoly, canonical, dual_action,
                            eval_poly, fermat, gradient, point_action,
                            veronese_conic)
from dualcurve.elimination import (DegreeCapExceeded, NotSmoothError, PlaneCurve,
                                   binary_discriminant, certify, content_hash,
                                   generic_binary_discriminant,
                                   generic_binary_resultant,
                                   plane_dual_discriminant, restrict_to_line,
                                   smoothness_check)

from conftest import random_rational_sigma


def _dual(terms, degree):
    return HomogPoly.from_terms(3, degree, {k: Fraction(v) for k, v in terms.items()},
                                EXACT, DUAL)


class TestDualDiscriminantOracles:
    def test_fermat_conic(self):
        # dual of z0^2+z1^2+z2^2 is the unit sphere's own equation
        dd = plane_dual_discriminant(PlaneCurve(fermat(3, 2)))
        expected = _dual({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}, 2)
        assert canonical(dd.delta) == canonical(expected)

    def test_veronese_conic_adjugate(self):
        # dual of z0 z2 - z1^2 via the adjugate of its symmetric matrix
        dd = plane_dual_discriminant(PlaneCurve(veronese_conic()))
        expected = _dual({(1, 0, 1): 4, (0, 2, 0): -1}, 2)
        assert canonical(dd.delta) == canonical(expected)

    def test_degree_law(self):
        for d in (2, 3, 4):
            dd = plane_dual_discriminant(PlaneCurve(fermat(3, d)))
            assert dd.delta.degree == d * (d - 1)

    def test_degree_cap(self):
        with pytest.raises(DegreeCapExceeded):
            plane_dual_discriminant(PlaneCurve(fermat(3, 5)))

    def test_dual_vanishes_on_tangent_lines(self):
        # the tangent line at a rational curve point is a zero of Delta
        F = fermat(3, 3)
        dd = plane_dual_discriminant(PlaneCurve(F))
        # point (1 : -1 : 0) lies on the curve; its tangent is grad F there
        p = [Fraction(1), Fraction(-1), Fraction(0)]
        assert eval_poly(F, p) == 0
        a = [eval_poly(g, p) for g in gradient(F)]
        assert eval_poly(dd.delta, a) == 0


class TestEquivariance:
    def test_conjugation_commutes_with_dual(self, rng):
        for d in (2, 3):
            F = fermat(3, d)
            DF = plane_dual_discriminant(PlaneCurve(F)).delta
            for _ in range(5):
                s = random_rational_sigma(rng)
                moved = plane_dual_discriminant(PlaneCurve(point_action(s, F))).delta
                assert canonical(moved) == canonical(dual_action(s, DF))


class TestRestriction:
    def test_restrict_recovers_evaluation(self, rng):
        # the restriction coefficients reproduce F on the pencil of lines
        F = fermat(3, 3)
        for chart in range(3):
            g = restrict_to_line(F, chart)
            assert len(g) == F.degree + 1
            i, j = [v for v in range(3) if v != chart]
            a = [Fraction(rng.randint(-3, 3)) for _ in range(3)]
            if a[chart] == 0:
                a[chart] = Fraction(1)
            s, u = Fraction(2), Fraction(-3)
            z = [Fraction(0)] * 3
            z[i], z[j] = s * a[chart], u * a[chart]
            z[chart] = -(a[i] * s + a[j] * u)
            lhs = sum(eval_poly(g[m], a) * u ** m * s ** (F.degree - m)
                      for m in range(F.degree + 1))
            assert lhs == eval_poly(F, z)

    def test_binary_discriminant_quadratic(self):
        # coefficients (g0, g1, g2) -> g1^2 - 4 g0 g2 up to scale
        g = [HomogPoly.variable(3, i, space=DUAL) for i in range(3)]
        disc = binary_discriminant(g)
        expected = _dual({(0, 2, 0): 1, (1, 0, 1): -4}, 2)
        assert canonical(disc) == canonical(expected)


class TestGenericEliminants:
    def test_resultant_vanishes_iff_common_root(self):
        R = generic_binary_resultant(2).poly
        # f = (x - y)(x - 2y), g = (x - y)(x + 3y): common root (1 : 1)
        f = [Fraction(1), Fraction(-3), Fraction(2)]   # x^2 - 3xy + 2y^2
        g = [Fraction(1), Fraction(2), Fraction(-3)]   # x^2 + 2xy - 3y^2
        assert eval_poly(R, f + g) == 0
        # g without a shared root
        g2 = [Fraction(1), Fraction(0), Fraction(1)]
        assert eval_poly(R, f + g2) != 0

    def test_resultant_multiplicativity_numeric(self, nprng):
        # Res(f, g) = prod over root pairs of differences, checked numerically
        R = generic_binary_resultant(3).poly
        f = nprng.normal(size=4) + 1j * nprng.normal(size=4)
        g = nprng.normal(size=4) + 1j * nprng.normal(size=4)
        val = complex(eval_poly(R.to_float(), list(f) + list(g)))
        rf = np.roots(f)
        rg = np.roots(g)
        prod = f[0] ** 3 * g[0] ** 3 * np.prod([x - y for x in rf for y in rg])
        assert abs(val - prod) < 1e-8 * max(abs(prod), 1.0)

    def test_discriminant_detects_double_root(self):
        D = generic_binary_discriminant(3).poly
        # (x - y)^2 (x + y) = x^3 - x^2 y - x y^2 + y^3
        c = [Fraction(1), Fraction(-1), Fraction(-1), Fraction(1)]
        assert eval_poly(D, c) == 0
        # squarefree cubic
        c2 = [Fraction(1), Fraction(0), Fraction(-1), Fraction(0)]  # x(x-y)(x+y)
        assert eval_poly(D, c2) != 0

    def test_generic_caps(self):
        with pytest.raises(DegreeCapExceeded):
            generic_binary_resultant(6)
        with pytest.raises(DegreeCapExceeded):
            generic_binary_discriminant(6)


class TestSmoothness:
    def test_fermat_curves_smooth(self):
        for d in (2, 3, 4):
            cert = smoothness_check(PlaneCurve(fermat(3, d)))
            assert cert.smooth

    def test_cuspidal_cubic_rejected(self):
        # z1^2 z2 - z0^3 has a cusp at (0 : 0 : 1)
        F = HomogPoly.from_terms(3, 3, {(0, 2, 1): Fraction(1), (3, 0, 0): Fraction(-1)},
                                 EXACT, "point")
        cert = smoothness_check(PlaneCurve(F))
        assert not cert.smooth
        with pytest.raises(NotSmoothError):
            certify(PlaneCurve(F))

    def test_certify_passes_smooth_curve(self):
        curve = certify(PlaneCurve(fermat(3, 3)))
        assert curve.F == fermat(3, 3)


class TestCaching:
    def test_cache_roundtrip(self, tmp_path):
        cache = str(tmp_path)
        d1 = plane_dual_discriminant(PlaneCurve(fermat(3, 3)), cache_dir=cache)
        d2 = plane_dual_discriminant(PlaneCurve(fermat(3, 3)), cache_dir=cache)
        assert d1.delta == d2.delta

    def test_content_hash_distinguishes(self):
        h1 = content_hash("plane-dual-discriminant", fermat(3, 2))
        h2 = content_hash("plane-dual-discriminant", fermat(3, 3))
        h3 = content_hash("other", fermat(3, 2))
        assert len({h1, h2, h3}) == 3
        assert h1 == content_hash("plane-dual-discriminant", fermat(3, 2))
