"""Weight polytopes, Hilbert-Mumford weights, slope measurement and the
scaled polytope-inclusion test, all over exact rationals.

Point-in-hull queries run an exact phase-1 simplex (Bland's rule) over
fractions.Fraction; infeasibility yields a Farkas certificate which doubles
as a strictly separating functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import DUAL, HomogPoly, Monomial

ON_POINTS = "onPoints"
ON_DUAL = "onDual"


@dataclass(frozen=True)
class OneParamSubgroup:
    """lambda(t) = diag(t^m_0, ..., t^m_N) with integer exponents summing to zero."""

    m: Tuple[int, ...]

    def __post_init__(self):
        if sum(self.m) != 0:
            raise ValueError("1-PSG exponents must sum to zero")

    def matrix_at(self, t: complex):
        from .poly import GroupElement
        return GroupElement.diagonal([complex(t) ** mi for mi in self.m], exact=False)


@dataclass(frozen=True)
class WeightPolytope:
    support_points: Tuple[Tuple[int, ...], ...]
    vertices: Tuple[Tuple[int, ...], ...]
    action_kind: str

    @property
    def dim_ambient(self) -> int:
        return len(self.support_points[0])


@dataclass(frozen=True)
class HullWitness:
    """Exact convex combination: point = sum coeffs[i] * generators[i]."""
    coeffs: Tuple[Fraction, ...]
    generators: Tuple[Tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class Separator:
    """Exact functional y with <y, q> <= b for all generators but <y, point> > b."""
    functional: Tuple[Fraction, ...]
    bound: Fraction
    value_at_point: Fraction


@dataclass(frozen=True)
class InclusionCertificate:
    included: bool
    witnesses: Dict[Tuple[Fraction, ...], HullWitness]
    separators: Dict[Tuple[Fraction, ...], Separator]


@dataclass(frozen=True)
class SlopePrediction:
    identity: str
    predicted: Fraction
    measured: float
    fit_residual: float


# ------------------------------------------------------------------- supports


def support_weights(P: HomogPoly, action_kind: str) -> List[Tuple[int, ...]]:
    """Character-lattice weights of the monomials of P under a diagonal 1-PSG.

    onDual (polynomials in dual coordinates, e.g. discriminants): a^alpha has
    weight alpha, since (lambda . Delta)(a) = Delta(lambda^t a) scales it by
    t^<alpha, m>.  onPoints (polynomials in point coordinates, e.g. defining
    polynomials / hypersurface X-resultants): z^beta has weight -beta, from
    F o lambda^{-1}.
    """
    if not P.is_exact():
        raise ValueError("support weights require an exact polynomial")
    if P.is_zero():
        raise ValueError("empty polynomial has no support")
    if action_kind == ON_DUAL:
        return sorted(P.terms)
    if action_kind == ON_POINTS:
        return sorted(tuple(-x for x in e) for e in P.terms)
    raise ValueError(f"unknown action kind {action_kind!r}")


def folded_support_weights(P: HomogPoly, form_degree: int, action_kind: str) -> List[Tuple[int, ...]]:
    """Weights of a generic binary resultant: fold c- and e-exponent blocks.

    The resultant of two binary d-forms lives in 2(d+1) coefficient
    variables; both blocks transform under the same diagonal torus of
    SL(d+1), so the weight of c^beta e^gamma is the sign-adjusted sum of
    the two exponent blocks.
    """
    k = form_degree + 1
    if P.nvars != 2 * k:
        raise ValueError("not a generic-resultant polynomial")
    sign = -1 if action_kind == ON_POINTS else 1
    out = set()
    for e in P.terms:
        folded = tuple(sign * (e[i] + e[k + i]) for i in range(k))
        out.add(folded)
    return sorted(out)


def weight_polytope(P: HomogPoly, action_kind: str,
                    points: Optional[Sequence[Tuple[int, ...]]] = None) -> WeightPolytope:
    """Convex hull bookkeeping of the support weights; vertices certified by LP."""
    pts = list(points) if points is not None else support_weights(P, action_kind)
    verts = extreme_points(pts)
    return WeightPolytope(tuple(pts), tuple(verts), action_kind)


def extreme_points(points: Sequence[Tuple]) -> List[Tuple]:
    """Points not in the hull of the others, certified by exact LP."""
    pts = [tuple(Fraction(x) for x in p) for p in points]
    out = []
    for i, p in enumerate(pts):
        others = [q for j, q in enumerate(pts) if j != i]
        if not others or point_in_hull(p, others) is None:
            out.append(points[i])
    return out


def weight_of(W: WeightPolytope, lam: OneParamSubgroup) -> int:
    """w_lambda = min over the weight polytope of <x, m>; attained at a vertex."""
    if len(lam.m) != W.dim_ambient:
        raise ValueError("dimension mismatch")
    return min(sum(x * m for x, m in zip(p, lam.m)) for p in W.support_points)


def traceless(points: Sequence[Tuple]) -> List[Tuple[Fraction, ...]]:
    """Project to the traceless lattice by subtracting the coordinate mean."""
    out = []
    for p in points:
        mean = Fraction(sum(p), len(p))
        out.append(tuple(Fraction(x) - mean for x in p))
    return out


# --------------------------------------------------------------- exact simplex


def point_in_hull(x: Sequence[Fraction], points: Sequence[Sequence[Fraction]]):
    """Exact membership of x in the convex hull of points.

    Returns a HullWitness if inside, None if outside (use
    ``separating_functional`` for the certificate).
    """
    feasible, sol, _ = _phase1(x, points)
    if not feasible:
        return None
    gens = tuple(tuple(Fraction(v) for v in p) for p in points)
    return HullWitness(tuple(sol), gens)


def separating_functional(x: Sequence[Fraction], points: Sequence[Sequence[Fraction]]) -> Separator:
    """Farkas certificate: y with <y,p> <= bound for all p, <y,x> > bound."""
    feasible, _, farkas = _phase1(x, points)
    if feasible:
        raise ValueError("point is inside the hull; no separator exists")
    y = farkas[:-1]
    # Farkas: <y, p> + c <= 0 for all generators, <y, x> + c > 0, and the
    # constant cancels in the strict comparison below
    bound = max(sum(yi * pi for yi, pi in zip(y, p)) for p in points)
    val = sum(yi * xi for yi, xi in zip(y, x))
    assert val > bound, "invalid Farkas certificate"
    return Separator(tuple(y), bound, val)


def _phase1(x: Sequence[Fraction], points: Sequence[Sequence[Fraction]]):
    """Phase-1 simplex for: lambda >= 0, P^t lambda = x, sum lambda = 1.

    Returns (feasible, lambda-or-None, farkas-or-None) where the Farkas
    vector y (length dim+1) satisfies y^t A <= 0 columnwise and y^t b > 0
    for A = [P^t; 1^t], b = [x; 1].
    """
    pts = [list(map(Fraction, p)) for p in points]
    xx = list(map(Fraction, x))
    dim = len(xx)
    n = len(pts)
    m = dim + 1
    # rows: A lambda = b with artificials; flip rows so b >= 0
    A = [[pts[j][i] for j in range(n)] for i in range(dim)]
    A.append([Fraction(1)] * n)
    b = xx + [Fraction(1)]
    sign = [Fraction(1)] * m
    for i in range(m):
        if b[i] < 0:
            b[i] = -b[i]
            sign[i] = Fraction(-1)
            A[i] = [-v for v in A[i]]
    # tableau with artificial basis
    T = [A[i] + [Fraction(1) if k == i else Fraction(0) for k in range(m)] + [b[i]]
         for i in range(m)]
    basis = list(range(n, n + m))
    ncols = n + m
    # objective: minimize sum of artificials -> reduced costs
    # cost row: c_j - z_j with c = (0,...,0, 1,...,1)
    def reduced_costs():
        rc = []
        for j in range(ncols):
            cj = Fraction(0) if j < n else Fraction(1)
            zj = sum(T[i][j] for i in range(m) if basis[i] >= n)
            rc.append(cj - zj)
        return rc

    while True:
        rc = reduced_costs()
        enter = next((j for j in range(ncols) if rc[j] < 0), None)
        if enter is None:
            break
        # ratio test, Bland
        leave = None
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][ncols] / T[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise RuntimeError("phase-1 unbounded; should not happen")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [v - f * w for v, w in zip(T[i], T[leave])]
        basis[leave] = enter

    obj = sum(T[i][ncols] for i in range(m) if basis[i] >= n)
    if obj == 0:
        lam = [Fraction(0)] * n
        for i, bi in enumerate(basis):
            if bi < n:
                lam[bi] = T[i][ncols]
        return True, lam, None
    # Farkas vector from the duals of phase 1: y_i = -(reduced cost of artificial i) adjusted by row flips
    rc = reduced_costs()
    y = []
    for i in range(m):
        # artificial column i has c=1; z = sum of rows with artificial basis
        yi = (Fraction(1) - rc[n + i]) * sign[i]
        y.append(yi)
    # y satisfies y^t A_orig <= 0 (columns) and y^t b_orig = obj > 0
    return False, None, y


# -------------------------------------------------------------- inclusion test


def scaled_inclusion(P: WeightPolytope, c: Fraction, Q: WeightPolytope,
                     project: bool = True) -> InclusionCertificate:
    """Decide c * P(traceless) subset-of hull(Q traceless), with exact certificates."""
    p_verts = traceless(P.vertices) if project else [tuple(map(Fraction, v)) for v in P.vertices]
    q_pts = traceless(Q.support_points) if project else [tuple(map(Fraction, v)) for v in Q.support_points]
    if len(p_verts[0]) != len(q_pts[0]):
        raise ValueError("ambient dimension mismatch")
    witnesses: Dict[Tuple[Fraction, ...], HullWitness] = {}
    separators: Dict[Tuple[Fraction, ...], Separator] = {}
    included = True
    for v in p_verts:
        target = tuple(Fraction(c) * x for x in v)
        w = point_in_hull(target, q_pts)
        if w is not None:
            witnesses[target] = w
        else:
            separators[target] = separating_functional(target, q_pts)
            included = False
    return InclusionCertificate(included, witnesses, separators)


# -------------------------------------------------------------------- slopes


def measure_slope(values: Sequence[float], t_grid: Sequence[float]) -> Tuple[float, float]:
    """Least-squares slope of value against log|t|^2, with rms fit residual."""
    import numpy as np
    xs = np.log(np.abs(np.asarray(t_grid, dtype=float)) ** 2)
    ys = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(ys)):
        raise ValueError("non-finite values in slope sweep")
    A = np.stack([xs, np.ones_like(xs)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ys) ** 2)))
    return float(coef[0]), resid


def predicted_norm_slope(W: WeightPolytope, lam: OneParamSubgroup,
                         t_to_zero: bool) -> int:
    """Slope of log||lambda(t) v||^2 in log|t|^2.

    As t -> 0 the minimal weight dominates; on grids running to infinity the
    maximal weight does.
    """
    vals = [sum(x * m for x, m in zip(p, lam.m)) for p in W.support_points]
    return min(vals) if t_to_zero else max(vals)


def symbolic_norm_slope(P: HomogPoly, action_kind: str, lam: OneParamSubgroup,
                        t_grid: Sequence[float]) -> Tuple[float, float]:
    """Measured slope of log ||lambda(t) . P||^2_FS over the t grid."""
    import numpy as np
    # norm^2 of lambda(t).P = sum |c|^2 |t|^(2 w) / monomial weight
    from math import factorial
    terms = []
    for e, co in P.terms.items():
        w = sum((x if action_kind == ON_DUAL else -x) * m for x, m in zip(e, lam.m))
        fsw = 1
        for p in e:
            fsw *= factorial(p)
        terms.append((float(abs(co)) ** 2 / fsw, w))
    vals = []
    for t in t_grid:
        s = sum(c * float(t) ** (2 * w) for c, w in terms)
        vals.append(float(np.log(s)))
    return measure_slope(vals, t_grid)


def predict_energy_slope(delta: HomogPoly, F: HomogPoly, lam: OneParamSubgroup,
                         t_to_zero: bool = True) -> Fraction:
    """Exact rational slope prediction for 4d * nu along lambda.

    From the plane-curve identity 4d nu = log||sigma Delta||^2
    - 2 (deg Delta / d) log||sigma F||^2 + d E1: the symbolic part is
    w(Delta, dual action) - 2 (deg Delta / d) w(F, point action); the E1
    term is measured, not predicted, and must be added by the caller.
    """
    d = F.degree
    WD = weight_polytope(delta, ON_DUAL)
    WF = weight_polytope(F, ON_POINTS)
    wD = predicted_norm_slope(WD, lam, t_to_zero)
    wF = predicted_norm_slope(WF, lam, t_to_zero)
    return Fraction(wD) - 2 * Fraction(delta.degree, d) * Fraction(wF)
