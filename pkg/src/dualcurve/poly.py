"""Sparse homogeneous polynomial arithmetic with exact-rational or complex coefficients.

Monomials are exponent tuples; polynomials are dictionaries keyed by them.
Exact polynomials use fractions.Fraction and are closed under ring operations;
float polynomials use Python complex. Promotion is one-way (exact -> float).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

Monomial = Tuple[int, ...]
Coeff = Union[Fraction, complex]

EXACT = "exact"
FLOAT = "float"

POINT = "point"
DUAL = "dual"


def _is_zero(c: Coeff) -> bool:
    return c == 0


def grlex_key(e: Monomial) -> Tuple[int, Monomial]:
    """Graded-lex sort key (ascending); the leading monomial maximizes it."""
    return (sum(e), e)


@dataclass(frozen=True)
class HomogPoly:
    """A homogeneous polynomial in ``nvars`` variables of total degree ``degree``.

    ``terms`` maps exponent tuples to nonzero coefficients.  ``space`` records
    whether the variables are point coordinates z or dual coordinates a; the
    algebra is identical, the tag only guards against mixing conventions.
    """

    nvars: int
    degree: int
    terms: Dict[Monomial, Coeff] = field(default_factory=dict)
    coeff_kind: str = EXACT
    space: str = POINT

    def __post_init__(self):
        for e, c in self.terms.items():
            if len(e) != self.nvars:
                raise ValueError(f"monomial {e} has wrong arity for nvars={self.nvars}")
            if sum(e) != self.degree:
                raise ValueError(f"monomial {e} is not homogeneous of degree {self.degree}")
            if _is_zero(c):
                raise ValueError("zero coefficient stored")

    # ---------------------------------------------------------------- basics

    @staticmethod
    def from_terms(nvars: int, degree: int, terms: Dict[Monomial, Coeff],
                   coeff_kind: str = EXACT, space: str = POINT) -> "HomogPoly":
        clean = {tuple(e): c for e, c in terms.items() if not _is_zero(c)}
        return HomogPoly(nvars, degree, clean, coeff_kind, space)

    @staticmethod
    def zero(nvars: int, degree: int, coeff_kind: str = EXACT, space: str = POINT) -> "HomogPoly":
        return HomogPoly(nvars, degree, {}, coeff_kind, space)

    @staticmethod
    def constant(nvars: int, c: Coeff, coeff_kind: str = EXACT, space: str = POINT) -> "HomogPoly":
        if _is_zero(c):
            return HomogPoly.zero(nvars, 0, coeff_kind, space)
        return HomogPoly(nvars, 0, {(0,) * nvars: c}, coeff_kind, space)

    @staticmethod
    def variable(nvars: int, i: int, coeff_kind: str = EXACT, space: str = POINT) -> "HomogPoly":
        e = tuple(1 if j == i else 0 for j in range(nvars))
        one: Coeff = Fraction(1) if coeff_kind == EXACT else complex(1)
        return HomogPoly(nvars, 1, {e: one}, coeff_kind, space)

    def is_zero(self) -> bool:
        return not self.terms

    def is_exact(self) -> bool:
        return self.coeff_kind == EXACT

    def num_terms(self) -> int:
        return len(self.terms)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self.terms, key=grlex_key)

    def leading_coefficient(self) -> Coeff:
        return self.terms[self.leading_monomial()]

    # ------------------------------------------------------------ arithmetic

    def _check_compatible(self, other: "HomogPoly"):
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        if self.coeff_kind != other.coeff_kind:
            raise ValueError("mixed coefficient kinds; promote explicitly with to_float()")

    def __add__(self, other: "HomogPoly") -> "HomogPoly":
        self._check_compatible(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ValueError("cannot add homogeneous polynomials of different degrees")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if _is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        return HomogPoly(self.nvars, self.degree, out, self.coeff_kind, self.space)

    def __neg__(self) -> "HomogPoly":
        return HomogPoly(self.nvars, self.degree, {e: -c for e, c in self.terms.items()},
                         self.coeff_kind, self.space)

    def __sub__(self, other: "HomogPoly") -> "HomogPoly":
        return self + (-other)

    def __mul__(self, other: "HomogPoly") -> "HomogPoly":
        self._check_compatible(other)
        if self.is_zero() or other.is_zero():
            return HomogPoly.zero(self.nvars, self.degree + other.degree,
                                  self.coeff_kind, self.space)
        out: Dict[Monomial, Coeff] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if _is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        return HomogPoly(self.nvars, self.degree + other.degree, out,
                         self.coeff_kind, self.space)

    def scale(self, c: Coeff) -> "HomogPoly":
        if _is_zero(c):
            return HomogPoly.zero(self.nvars, self.degree, self.coeff_kind, self.space)
        return HomogPoly(self.nvars, self.degree, {e: v * c for e, v in self.terms.items()},
                         self.coeff_kind, self.space)

    def __pow__(self, n: int) -> "HomogPoly":
        if n < 0:
            raise ValueError("negative power")
        one: Coeff = Fraction(1) if self.is_exact() else complex(1)
        result = HomogPoly.constant(self.nvars, one, self.coeff_kind, self.space)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def to_float(self) -> "HomogPoly":
        if self.coeff_kind == FLOAT:
            return self
        return HomogPoly(self.nvars, self.degree,
                         {e: complex(c) for e, c in self.terms.items()}, FLOAT, self.space)

    def with_space(self, space: str) -> "HomogPoly":
        return HomogPoly(self.nvars, self.degree, dict(self.terms), self.coeff_kind, space)

    def __eq__(self, other) -> bool:
        return (isinstance(other, HomogPoly) and self.nvars == other.nvars
                and self.degree == other.degree and self.terms == other.terms
                and self.coeff_kind == other.coeff_kind and self.space == other.space)

    def __hash__(self):
        return hash((self.nvars, self.degree, frozenset(self.terms.items()),
                     self.coeff_kind, self.space))

    def __str__(self):
        base = "z" if self.space == POINT else "a"
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(f"{base}{i}^{p}" if p > 1 else f"{base}{i}"
                            for i, p in enumerate(e) if p)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)


# ------------------------------------------------------------------ GroupElement


def _exact_matrix(rows: Sequence[Sequence]) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


@dataclass(frozen=True)
class GroupElement:
    """An invertible (N+1)x(N+1) matrix acting on points, dual points and polynomials."""

    matrix: Tuple[Tuple[Coeff, ...], ...]
    exact: bool = True

    @staticmethod
    def from_rows(rows: Sequence[Sequence], exact: bool = True) -> "GroupElement":
        if exact:
            return GroupElement(_exact_matrix(rows), True)
        return GroupElement(tuple(tuple(complex(x) for x in row) for row in rows), False)

    @staticmethod
    def identity(n: int, exact: bool = True) -> "GroupElement":
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        return GroupElement.from_rows(rows, exact)

    @staticmethod
    def diagonal(entries: Sequence, exact: bool = True) -> "GroupElement":
        n = len(entries)
        rows = [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]
        return GroupElement.from_rows(rows, exact)

    @property
    def n(self) -> int:
        return len(self.matrix)

    def det(self) -> Coeff:
        m = [list(row) for row in self.matrix]
        n = self.n
        det: Coeff = Fraction(1) if self.exact else complex(1)
        for col in range(n):
            piv = None
            for r in range(col, n):
                if m[r][col] != 0:
                    piv = r
                    break
            if piv is None:
                return Fraction(0) if self.exact else complex(0)
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
                det = -det
            det *= m[col][col]
            inv = (Fraction(1) if self.exact else 1.0) / m[col][col]
            for r in range(col + 1, n):
                f = m[r][col] * inv
                if f != 0:
                    for c in range(col, n):
                        m[r][c] -= f * m[col][c]
        return det

    def inverse(self) -> "GroupElement":
        n = self.n
        m = [list(row) + [1 if i == j else 0 for j in range(n)]
             for i, row in enumerate(self.matrix)]
        if self.exact:
            m = [[Fraction(x) for x in row] for row in m]
        for col in range(n):
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
            if piv is None:
                raise ValueError("singular matrix")
            m[col], m[piv] = m[piv], m[col]
            inv = (Fraction(1) if self.exact else 1.0) / m[col][col]
            m[col] = [x * inv for x in m[col]]
            for r in range(n):
                if r != col and m[r][col] != 0:
                    f = m[r][col]
                    m[r] = [x - f * y for x, y in zip(m[r], m[col])]
        rows = [row[n:] for row in m]
        return GroupElement.from_rows(rows, self.exact)

    def transpose(self) -> "GroupElement":
        return GroupElement(tuple(zip(*self.matrix)), self.exact)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.exact != other.exact:
            a, b = self.to_float(), other.to_float()
            return a @ b
        n = self.n
        rows = [[sum(self.matrix[i][k] * other.matrix[k][j] for k in range(n))
                 for j in range(n)] for i in range(n)]
        return GroupElement.from_rows(rows, self.exact)

    def to_float(self) -> "GroupElement":
        if not self.exact:
            return self
        return GroupElement(tuple(tuple(complex(x) for x in row) for row in self.matrix), False)

    def apply(self, v: Sequence) -> list:
        """Matrix-vector product."""
        return [sum(row[j] * v[j] for j in range(self.n)) for row in self.matrix]

    def numpy(self):
        import numpy as np
        return np.array([[complex(x) for x in row] for row in self.matrix], dtype=complex)


# ------------------------------------------------------------------ operations


def eval_poly(P: HomogPoly, x: Sequence) -> Coeff:
    """Evaluate P at the scalar vector x."""
    if len(x) != P.nvars:
        raise ValueError("dimension mismatch")
    total = 0
    for e, c in P.terms.items():
        v = c
        for xi, p in zip(x, e):
            if p:
                v = v * xi ** p
        total = total + v
    return total


def partial_derivative(P: HomogPoly, i: int) -> HomogPoly:
    """d/dx_i, degree drops by one."""
    if not 0 <= i < P.nvars:
        raise ValueError("variable index out of range")
    out: Dict[Monomial, Coeff] = {}
    for e, c in P.terms.items():
        if e[i] == 0:
            continue
        ne = tuple(p - 1 if j == i else p for j, p in enumerate(e))
        out[ne] = c * e[i]
    return HomogPoly(P.nvars, max(P.degree - 1, 0), out, P.coeff_kind, P.space)


def gradient(P: HomogPoly) -> List[HomogPoly]:
    return [partial_derivative(P, i) for i in range(P.nvars)]


def linear_substitute(P: HomogPoly, M: GroupElement) -> HomogPoly:
    """Return P composed with the matrix: (P o M)(x) = P(Mx)."""
    if M.n != P.nvars:
        raise ValueError("dimension mismatch")
    exact = P.is_exact() and M.exact
    kind = EXACT if exact else FLOAT
    base = P if exact else P.to_float()
    mat = M.matrix if exact else M.to_float().matrix
    forms = []
    for i in range(P.nvars):
        terms = {}
        for j in range(P.nvars):
            if mat[i][j] != 0:
                e = tuple(1 if k == j else 0 for k in range(P.nvars))
                terms[e] = mat[i][j]
        forms.append(HomogPoly.from_terms(P.nvars, 1, terms, kind, P.space))
    # cache powers of each linear form
    pow_cache: Dict[Tuple[int, int], HomogPoly] = {}

    def form_pow(i: int, p: int) -> HomogPoly:
        key = (i, p)
        if key not in pow_cache:
            pow_cache[key] = forms[i] ** p
        return pow_cache[key]

    result = HomogPoly.zero(P.nvars, P.degree, kind, P.space)
    for e, c in base.terms.items():
        term = HomogPoly.constant(P.nvars, c, kind, P.space)
        for i, p in enumerate(e):
            if p:
                term = term * form_pow(i, p)
        result = result + term
    return result


def point_action(sigma: GroupElement, F: HomogPoly) -> HomogPoly:
    """sigma . F := F o sigma^{-1}, so that sigma maps X_F onto X_{sigma.F}."""
    return linear_substitute(F, sigma.inverse())


def dual_action(sigma: GroupElement, D: HomogPoly) -> HomogPoly:
    """sigma . D := D o sigma^t, the action induced by sigma.a = (sigma^{-1})^t a."""
    return linear_substitute(D, sigma.transpose())


# ------------------------------------------------------------- determinants


def sylvester_matrix(f: Sequence[HomogPoly], g: Sequence[HomogPoly]) -> List[List[HomogPoly]]:
    """Sylvester matrix of two univariate polynomials with HomogPoly coefficients.

    ``f`` and ``g`` are coefficient lists from the leading term down:
    f = f[0] t^p + ... + f[p].
    """
    p, q = len(f) - 1, len(g) - 1
    if p < 1 or q < 1:
        raise ValueError("both polynomials must have degree >= 1")
    if f[0].is_zero() or g[0].is_zero():
        raise ValueError("leading coefficient is identically zero")
    nv = f[0].nvars
    kind = f[0].coeff_kind
    space = f[0].space
    n = p + q
    rows: List[List[HomogPoly]] = []

    def zrow(degrees):
        return [HomogPoly.zero(nv, d, kind, space) for d in degrees]

    for shift in range(q):
        row = []
        for col in range(n):
            k = col - shift
            row.append(f[k] if 0 <= k <= p else None)
        rows.append(row)
    for shift in range(p):
        row = []
        for col in range(n):
            k = col - shift
            row.append(g[k] if 0 <= k <= q else None)
        rows.append(row)
    # fill structural zeros with zero polys of matching degree when possible
    out = []
    for row in rows:
        out.append([c if c is not None else HomogPoly.zero(nv, 0, kind, space) for c in row])
    return out


def cofactor_det(M: Sequence[Sequence[HomogPoly]]) -> HomogPoly:
    """Naive cofactor expansion; independent oracle for small matrices."""
    n = len(M)
    for row in M:
        if len(row) != n:
            raise ValueError("non-square matrix")
    if n == 1:
        return M[0][0]
    nv = M[0][0].nvars
    kind = M[0][0].coeff_kind
    space = M[0][0].space
    total = None
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [[M[r][c] for c in range(n) if c != j] for r in range(1, n)]
        term = M[0][j] * cofactor_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return HomogPoly.zero(nv, 0, kind, space)
    return total


def fraction_free_det(M: Sequence[Sequence[HomogPoly]]) -> HomogPoly:
    """Exact determinant of a matrix of exact HomogPoly entries.

    Division-free dynamic program: expand row by row, memoizing minors on
    column subsets (Laplace DP).  Exploits band sparsity of Sylvester
    matrices far better than Bareiss elimination with polynomial entries.
    """
    n = len(M)
    for row in M:
        if len(row) != n:
            raise ValueError("non-square matrix")
        for c in row:
            if not c.is_exact():
                raise ValueError("fraction_free_det requires exact entries")
    nv = M[0][0].nvars
    space = M[0][0].space
    # state: bitmask of used columns after processing the first popcount(mask) rows
    current: Dict[int, HomogPoly] = {0: HomogPoly.constant(nv, Fraction(1), EXACT, space)}
    for r in range(n):
        nxt: Dict[int, HomogPoly] = {}
        row = M[r]
        nonzero_cols = [j for j in range(n) if not row[j].is_zero()]
        for mask, val in current.items():
            # sign: number of already-used columns below j
            for j in nonzero_cols:
                bit = 1 << j
                if mask & bit:
                    continue
                sign = bin(mask >> (j + 1)).count("1")
                term = row[j] * val
                if sign % 2:
                    term = -term
                new_mask = mask | bit
                if new_mask in nxt:
                    nxt[new_mask] = nxt[new_mask] + term
                else:
                    nxt[new_mask] = term
        current = {m: v for m, v in nxt.items() if not v.is_zero()}
        if not current:
            return HomogPoly.zero(nv, 0, EXACT, space)
    full = (1 << n) - 1
    if full not in current:
        return HomogPoly.zero(nv, 0, EXACT, space)
    return current[full]


def exact_divide(P: HomogPoly, Q: HomogPoly) -> HomogPoly:
    """Return R with P = Q*R exactly, or raise InexactDivision."""
    if Q.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if not (P.is_exact() and Q.is_exact()):
        raise ValueError("exact_divide requires exact polynomials")
    if P.is_zero():
        return HomogPoly.zero(P.nvars, max(P.degree - Q.degree, 0), EXACT, P.space)
    if P.degree < Q.degree:
        raise InexactDivision("degree of dividend below divisor")
    lq = Q.leading_monomial()
    cq = Q.terms[lq]
    rem = P
    quot: Dict[Monomial, Coeff] = {}
    while not rem.is_zero():
        lr = rem.leading_monomial()
        diff = tuple(a - b for a, b in zip(lr, lq))
        if any(d < 0 for d in diff):
            raise InexactDivision("leading term not divisible")
        c = rem.terms[lr] / cq
        quot[diff] = quot.get(diff, 0) + c
        mono = HomogPoly(P.nvars, sum(diff), {diff: c}, EXACT, P.space)
        rem = rem - mono * Q
    return HomogPoly.from_terms(P.nvars, P.degree - Q.degree, quot, EXACT, P.space)


class InexactDivision(ArithmeticError):
    """Raised when a supposedly exact polynomial division leaves a remainder."""


# ------------------------------------------------------------- normalization


def content(P: HomogPoly) -> Fraction:
    """Positive rational c such that P/c has coprime integer coefficients."""
    if not P.is_exact():
        raise ValueError("content of a float polynomial is undefined")
    if P.is_zero():
        return Fraction(1)
    num = 0
    den = 1
    for c in P.terms.values():
        num = math.gcd(num, abs(c.numerator))
        den = den * c.denominator // math.gcd(den, c.denominator)
    return Fraction(num, den)


def canonical(P: HomogPoly) -> HomogPoly:
    """Scalar-normalize: coprime integer coefficients, positive graded-lex leader."""
    if P.is_zero():
        return P
    c = content(P)
    if P.leading_coefficient() < 0:
        c = -c
    return P.scale(Fraction(1) / c)


def fs_norm_sq(P: HomogPoly):
    """Fubini-Study-weighted coefficient norm: sum |c_a|^2 / prod(a_i!)."""
    if P.is_zero():
        return Fraction(0) if P.is_exact() else 0.0
    total = Fraction(0) if P.is_exact() else 0.0
    for e, c in P.terms.items():
        w = 1
        for p in e:
            w *= math.factorial(p)
        if P.is_exact():
            total += c * c / w
        else:
            total += (c.real * c.real + c.imag * c.imag) / w
    return total


# ------------------------------------------------------------- serialization


def _coeff_to_json(c: Coeff):
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
    c = complex(c)
    return [c.real, c.imag]


def _coeff_from_json(v) -> Coeff:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, float)):
        return Fraction(v)
    return complex(v[0], v[1])


def to_json_dict(P: HomogPoly) -> dict:
    terms = []
    for e in sorted(P.terms, key=grlex_key, reverse=True):
        terms.append({"c": _coeff_to_json(P.terms[e]), "e": list(e)})
    return {"vars": P.nvars, "degree": P.degree, "space": P.space, "terms": terms}


def from_json_dict(d: dict) -> HomogPoly:
    terms: Dict[Monomial, Coeff] = {}
    kind = EXACT
    for t in d["terms"]:
        c = _coeff_from_json(t["c"])
        if isinstance(c, complex):
            kind = FLOAT
        terms[tuple(t["e"])] = c
    if kind == FLOAT:
        terms = {e: complex(c) for e, c in terms.items()}
    return HomogPoly.from_terms(d["vars"], d["degree"], terms, kind,
                                d.get("space", POINT))


def dump_poly(P: HomogPoly, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(P), fh, indent=1)
        fh.write("\n")


def load_poly(path) -> HomogPoly:
    with open(path) as fh:
        return from_json_dict(json.load(fh))


# ------------------------------------------------------------- convenience


def poly_from_string_terms(nvars: int, degree: int, entries: Iterable[Tuple[Sequence[int], Coeff]],
                           space: str = POINT) -> HomogPoly:
    terms = {tuple(e): Fraction(c) for e, c in entries}
    return HomogPoly.from_terms(nvars, degree, terms, EXACT, space)


def fermat(nvars: int, d: int) -> HomogPoly:
    """z_0^d + ... + z_{nvars-1}^d."""
    terms = {}
    for i in range(nvars):
        e = tuple(d if j == i else 0 for j in range(nvars))
        terms[e] = Fraction(1)
    return HomogPoly(nvars, d, terms, EXACT, POINT)


def veronese_conic() -> HomogPoly:
    """z0 z2 - z1^2."""
    return poly_from_string_terms(3, 2, [((1, 0, 1), 1), ((0, 2, 0), -1)])
