import math
import random
from fractions import Fraction

import numpy as np
import pytest

from dualcurve.poly import EXACT, POINT, HomogPoly, GroupElement


def random_exact_poly(rng: random.Random, nvars: int, degree: int,
                      n_terms: int = 5, space: str = POINT) -> HomogPoly:
    """Random sparse homogeneous polynomial with small rational coefficients."""
    n_monomials = math.comb(degree + nvars - 1, nvars - 1)
    n_terms = min(n_terms, n_monomials)
    terms = {}
    while len(terms) < n_terms:
        cuts = sorted(rng.randint(0, degree) for _ in range(nvars - 1))
        e = []
        prev = 0
        for c in cuts:
            e.append(c - prev)
            prev = c
        e.append(degree - prev)
        c = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        if c != 0:
            terms[tuple(e)] = c
    return HomogPoly.from_terms(nvars, degree, terms, EXACT, space)


def random_rational_sigma(rng: random.Random, n: int = 3) -> GroupElement:
    """Random invertible rational matrix with small entries."""
    while True:
        rows = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        g = GroupElement.from_rows(rows)
        if g.det() != 0:
            return g


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture
def nprng():
    return np.random.default_rng(20240817)
