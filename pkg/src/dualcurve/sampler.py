"""Quadrature on a smooth plane curve realized as a branched cover of P^1.

The curve is parametrized by the pencil of lines through a projection
center p with F(p) != 0: base point q(x) on a complementary line, fiber
points z = q(x) + w p with F(q + w p) = 0 solved for w.  Two base charts
(|x| <= 1 and the inverted chart) cover the base line.  Global grids are
log-polar; local log-polar patches resolve branch points (and optional
caller-supplied centers); a C^1 radial partition of unity glues the
patches with no double counting.  All lifts carry first and second
holomorphic derivatives, so downstream integrands are analytic in the
sample data (no finite differences anywhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .poly import FLOAT, HomogPoly, eval_poly, gradient

GLOBAL_R_MIN = 1e-5          # inner cutoff of the global log-polar charts
BRANCH_R_IN = 1e-7           # inner cutoff of branch-point patches
CENTER_R_IN = 1e-12          # inner cutoff of caller-supplied refinement patches
PATCH_R_MAX = 0.3            # default outer radius of local patches
PATCH_MERGE_TOL = 0.01       # centers closer than this share one patch
ROOT_TOL = 1e-10             # relative fiber residual accepted for a sample


class ProjectionDegenerate(RuntimeError):
    """No usable projection center found after the allowed retries."""


class RootPolishFailure(RuntimeError):
    """Too many fiber samples failed to converge."""


@dataclass
class SampleBlock:
    """Columnar sample storage: arrays indexed by sample."""

    coord: np.ndarray    # (M,) complex chart coordinate
    chart: np.ndarray    # (M,) int8, 0 or 1
    z: np.ndarray        # (M,3) holomorphic lift
    zp: np.ndarray       # (M,3) d(lift)/d(coord)
    zpp: np.ndarray      # (M,3) second derivative
    weight: np.ndarray   # (M,) base-area weight (already includes partition of unity)

    def __len__(self):
        return len(self.weight)


@dataclass(frozen=True)
class CurveSample:
    """Single-sample view, mirroring the columnar data."""

    zLift: Tuple[complex, complex, complex]
    zPrime: Tuple[complex, complex, complex]
    baseWeight: float
    chart: int


@dataclass
class QuadratureGrid:
    F: HomogPoly                  # float-promoted defining polynomial
    degree: int
    resolution: int
    seed: int
    excluded_area: float          # FS-normalized base area not covered
    fine: SampleBlock
    coarse: SampleBlock
    dropped: int
    center_info: List[dict] = field(default_factory=list)
    projection: Optional[dict] = None

    def sample(self, i: int) -> CurveSample:
        f = self.fine
        return CurveSample(tuple(f.z[i]), tuple(f.zp[i]), float(f.weight[i]), int(f.chart[i]))

    def error_scale(self) -> float:
        return self.excluded_area


# ------------------------------------------------------------------ fiber data


def _float_terms(F: HomogPoly):
    Ff = F.to_float()
    exps = np.array(list(Ff.terms.keys()), dtype=np.int64)
    cofs = np.array([Ff.terms[tuple(e)] for e in exps], dtype=complex)
    return exps, cofs


def _bivariate_fiber_coeffs(F: HomogPoly, base0: np.ndarray, base1: np.ndarray,
                            p: np.ndarray) -> np.ndarray:
    """Coefficients C[j, k] of x^j w^k in F(base0 + x*base1 + w*p)."""
    d = F.degree
    exps, cofs = _float_terms(F)
    total = np.zeros((d + 1, d + 1), dtype=complex)
    for e, c in zip(exps, cofs):
        acc = np.array([[1.0 + 0j]])
        for i in range(3):
            tri = np.zeros((2, 2), dtype=complex)
            tri[0, 0] = base0[i]
            tri[1, 0] = base1[i]
            tri[0, 1] = p[i]
            for _ in range(int(e[i])):
                nj, nk = acc.shape
                out = np.zeros((nj + 1, nk + 1), dtype=complex)
                for dj in range(2):
                    for dk in range(2):
                        if tri[dj, dk] != 0:
                            out[dj:dj + nj, dk:dk + nk] += tri[dj, dk] * acc
                acc = out
        j, k = acc.shape
        total[:j, :k] += c * acc
    return total


def _eval_fiber(C: np.ndarray, x: np.ndarray) -> np.ndarray:
    """g_k(x) for all k: returns (M, d+1), ascending powers of w."""
    d1 = C.shape[1]
    out = np.empty((len(x), d1), dtype=complex)
    for k in range(d1):
        # Horner in x
        co = C[:, k]
        acc = np.full(len(x), co[-1], dtype=complex)
        for j in range(len(co) - 2, -1, -1):
            acc = acc * x + co[j]
        out[:, k] = acc
    return out


def _eval_fiber_dx(C: np.ndarray, x: np.ndarray, order: int = 1) -> np.ndarray:
    """d^order/dx^order of g_k(x), same shape as _eval_fiber."""
    d1 = C.shape[1]
    out = np.empty((len(x), d1), dtype=complex)
    for k in range(d1):
        co = C[:, k].copy()
        for _ in range(order):
            co = co[1:] * np.arange(1, len(co))
        if len(co) == 0:
            out[:, k] = 0
            continue
        acc = np.full(len(x), co[-1], dtype=complex)
        for j in range(len(co) - 2, -1, -1):
            acc = acc * x + co[j]
        out[:, k] = acc
    return out


def _horner_w(g: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Evaluate sum_k g[...,k] w^k along the last axis of g, broadcasting w."""
    acc = np.zeros(np.broadcast(g[..., 0], w).shape, dtype=complex)
    for k in range(g.shape[-1] - 1, -1, -1):
        acc = acc * w + g[..., k]
    return acc


def _dw_coeffs(g: np.ndarray) -> np.ndarray:
    k = np.arange(1, g.shape[-1])
    return g[..., 1:] * k


# ------------------------------------------------------------------- roots


def _companion_roots(g: np.ndarray) -> np.ndarray:
    """Batched companion-matrix roots of monic-normalizable fiber polynomials.

    g: (M, d+1) ascending coefficients; leading column must be nonzero.
    """
    M, d1 = g.shape
    d = d1 - 1
    a = g / g[:, -1:][..., None].reshape(M, 1)
    comp = np.zeros((M, d, d), dtype=complex)
    comp[:, 1:, :-1] = np.broadcast_to(np.eye(d - 1, dtype=complex), (M, d - 1, d - 1))
    comp[:, :, -1] = -a[:, :d]
    return np.linalg.eigvals(comp)


def _aberth_polish(g: np.ndarray, w: np.ndarray, iterations: int = 8) -> np.ndarray:
    """Simultaneous (Aberth-Ehrlich) polishing of all d roots per sample."""
    d = w.shape[1]
    gp = _dw_coeffs(g)
    for _ in range(iterations):
        G = _horner_w(g[:, None, :], w)
        Gp = _horner_w(gp[:, None, :], w)
        newton = np.where(Gp != 0, G / np.where(Gp == 0, 1, Gp), 0)
        if d > 1:
            diff = w[:, :, None] - w[:, None, :]
            eye = np.eye(d, dtype=bool)
            inv = np.where(eye[None, :, :], 0, 1.0 / np.where(diff == 0, 1, diff))
            s = inv.sum(axis=2)
            denom = 1.0 - newton * s
            step = newton / np.where(denom == 0, 1, denom)
        else:
            step = newton
        # damping: cap wild steps
        bad = ~np.isfinite(step)
        step = np.where(bad, 0, step)
        w = w - step
    return w


def _fiber_residual(g: np.ndarray, w: np.ndarray) -> np.ndarray:
    G = np.abs(_horner_w(g[:, None, :], w))
    scale = np.zeros_like(G)
    aw = np.abs(w)
    for k in range(g.shape[-1]):
        scale += np.abs(g[:, None, k]) * aw ** k
    return G / np.maximum(scale, 1e-300)


def solve_fibers(C: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """All fiber roots over base points x: returns (w (M,d), ok mask (M,d))."""
    g = _eval_fiber(C, x)
    w = _companion_roots(g)
    w = _aberth_polish(g, w)
    res = _fiber_residual(g, w)
    return w, res < ROOT_TOL


# ------------------------------------------------------- projection selection


def _poly_scale(F: HomogPoly) -> float:
    return max(abs(complex(c)) for c in F.to_float().terms.values())


def choose_projection(F: HomogPoly, seed: int = 0, tries: int = 10):
    """Pick (p, l0, l1) with F(p) well away from zero; basis is unimodular-ish."""
    d = F.degree
    scale = _poly_scale(F)
    eye = np.eye(3, dtype=complex)
    candidates = [(eye[2], eye[0], eye[1]),
                  (eye[1], eye[0], eye[2]),
                  (eye[0], eye[1], eye[2])]
    rng = np.random.default_rng(seed)
    Ff = F.to_float()
    for _ in range(tries):
        for p, l0, l1 in candidates:
            val = abs(eval_poly(Ff, list(p)))
            if val > 1e-4 * scale * float(np.linalg.norm(p)) ** d:
                return np.asarray(p), np.asarray(l0), np.asarray(l1)
        num = rng.integers(-4, 5, size=3)
        den = rng.integers(1, 4, size=3)
        p = (num / den).astype(complex)
        if np.allclose(p, 0):
            continue
        k = int(np.argmax(np.abs(p)))
        i, j = [v for v in range(3) if v != k]
        candidates = [(p, eye[i], eye[j])]
    raise ProjectionDegenerate("no valid projection center after retries")


# ------------------------------------------------------------- branch points


def _numeric_poly_det(M: List[List[np.ndarray]]) -> np.ndarray:
    """Determinant of a matrix of 1-D complex coefficient arrays (ascending).

    Division-free column-subset dynamic program; same algorithm as the
    exact fractionFreeDet, specialized to numpy polynomial entries.
    """
    n = len(M)
    current = {0: np.array([1.0 + 0j])}
    for r in range(n):
        row = M[r]
        nz = [j for j in range(n) if row[j] is not None and np.any(row[j] != 0)]
        nxt = {}
        for mask, val in current.items():
            for j in nz:
                bit = 1 << j
                if mask & bit:
                    continue
                sign = -1 if bin(mask >> (j + 1)).count("1") % 2 else 1
                term = sign * np.convolve(val, row[j])
                key = mask | bit
                if key in nxt:
                    a, b = nxt[key], term
                    if len(a) < len(b):
                        a, b = b, a
                    a = a.copy()
                    a[:len(b)] += b
                    nxt[key] = a
                else:
                    nxt[key] = term
        current = nxt
    return current.get((1 << n) - 1, np.array([0.0 + 0j]))


def fiber_x_discriminant(C: np.ndarray) -> np.ndarray:
    """Coefficients (ascending in x) of Res_w(G, dG/dw) for G = sum C[j,k] x^j w^k."""
    d = C.shape[1] - 1
    f = [C[:, k] for k in range(d, -1, -1)]          # leading w power first
    fp = [C[:, k] * k for k in range(d, 0, -1)]
    n = (d) + (d - 1)
    rows: List[List[Optional[np.ndarray]]] = []
    for shift in range(d - 1):
        rows.append([f[c - shift] if 0 <= c - shift <= d else None for c in range(n)])
    for shift in range(d):
        rows.append([fp[c - shift] if 0 <= c - shift <= d - 1 else None for c in range(n)])
    rows = [[np.zeros(1, dtype=complex) if e is None else e for e in row] for row in rows]
    return _numeric_poly_det(rows)


def _trimmed_roots(co: np.ndarray) -> np.ndarray:
    """Roots of an ascending-coefficient polynomial, trimming tiny leaders."""
    mags = np.abs(co)
    top = mags.max()
    if top == 0:
        return np.array([], dtype=complex)
    lead = len(co) - 1
    while lead > 0 and mags[lead] < 1e-10 * top:
        lead -= 1
    if lead == 0:
        return np.array([], dtype=complex)
    return np.roots(co[:lead + 1][::-1])


def _polish_branch(C: np.ndarray, x0: complex) -> complex:
    """Newton-refine a branch point: solve G = G_w = 0 in (x, w).

    Multiple discriminant roots are only located to ~eps^(1/m) by np.roots;
    the 2x2 Newton recovers full precision for a simple branch point.
    """
    x = np.array([x0], dtype=complex)
    g = _eval_fiber(C, x)[0]
    gw = _dw_coeffs(g[None, :])[0]
    # start from the w-root where G_w is smallest
    roots = np.roots(g[::-1]) if len(g) > 1 else np.array([0j])
    w = roots[np.argmin(np.abs(np.polyval(gw[::-1], roots)))] if len(roots) else 0j
    xv = complex(x0)
    for _ in range(25):
        xa = np.array([xv], dtype=complex)
        g = _eval_fiber(C, xa)[0]
        gx = _eval_fiber_dx(C, xa, 1)[0]
        gw = _dw_coeffs(g[None, :])[0]
        gxw = _dw_coeffs(gx[None, :])[0]
        gww = _dw_coeffs(gw[None, :])[0] if len(gw) > 1 else np.zeros(1, dtype=complex)
        G = np.polyval(g[::-1], w)
        Gw = np.polyval(gw[::-1], w)
        Gx = np.polyval(gx[::-1], w)
        Gxw = np.polyval(gxw[::-1], w)
        Gww = np.polyval(gww[::-1], w) if len(gww) else 0j
        J = np.array([[Gx, Gw], [Gxw, Gww]], dtype=complex)
        rhs = np.array([G, Gw], dtype=complex)
        if abs(np.linalg.det(J)) < 1e-300:
            break
        dx, dw = np.linalg.solve(J, rhs)
        xv, w = xv - dx, w - dw
        if abs(dx) + abs(dw) < 1e-14 * (1 + abs(xv) + abs(w)):
            break
    if np.isfinite(xv) and abs(xv - x0) < 0.05 * (1 + abs(x0)):
        return xv
    return complex(x0)


def branch_points(CA: np.ndarray, CB: np.ndarray) -> List[Tuple[int, complex]]:
    """Branch-point base coordinates as (home chart, coordinate) pairs."""
    out: List[Tuple[int, complex]] = []
    disc = fiber_x_discriminant(CA)
    raw = _dedupe_sphere([(0, complex(x)) if abs(x) <= 1.0 else (1, complex(1.0 / x))
                          for x in _trimmed_roots(disc)], tol=1e-4)
    for chart, c in raw:
        C = CA if chart == 0 else CB
        out.append((chart, _polish_branch(C, c)))
    # branch exactly over the chart-B origin (x = infinity)
    discB = fiber_x_discriminant(CB)
    if len(discB) and abs(discB[0]) < 1e-9 * max(np.abs(discB).max(), 1e-300):
        out.append((1, 0.0 + 0j))
    return _dedupe_sphere(out)


def _chordal(a: Tuple[int, complex], b: Tuple[int, complex]) -> float:
    # homogeneous pairs (u:v) with chart-A coordinate x = u/v
    def hom(c):
        chart, val = c
        return (val, 1.0) if chart == 0 else (1.0, val)
    u1, v1 = hom(a)
    u2, v2 = hom(b)
    num = abs(u1 * v2 - u2 * v1)
    den = math.sqrt((abs(u1) ** 2 + abs(v1) ** 2) * (abs(u2) ** 2 + abs(v2) ** 2))
    return num / den


def _dedupe_sphere(pts: List[Tuple[int, complex]], tol: float = 1e-6) -> List[Tuple[int, complex]]:
    out: List[Tuple[int, complex]] = []
    for c in pts:
        if all(_chordal(c, o) > tol for o in out):
            out.append(c)
    return out


# --------------------------------------------------------- partition of unity


def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return 3 * s ** 2 - 2 * s ** 3


def _chi(rho: np.ndarray, R: float) -> np.ndarray:
    """1 inside R/2, 0 outside R, C^1 cubic ramp between."""
    return 1.0 - _smoothstep((rho - R / 2) / (R / 2))


def _coord_in_chart(coord: np.ndarray, chart: np.ndarray, home: int) -> np.ndarray:
    """Map sample coordinates into the home chart of a center."""
    same = chart == home
    with np.errstate(divide="ignore", invalid="ignore"):
        mapped = np.where(same, coord, 1.0 / np.where(coord == 0, np.inf, coord))
    return mapped


# ------------------------------------------------------------------- assembly


@dataclass
class _Center:
    chart: int
    coord: complex
    radius: float
    r_in: float
    kind: str


def _make_centers(br: List[Tuple[int, complex]],
                  extra: List[Tuple[int, complex]]) -> List[_Center]:
    merged: List[_Center] = []
    for chart, c in br:
        if any(_chordal((chart, c), (m.chart, m.coord)) < PATCH_MERGE_TOL for m in merged):
            continue
        merged.append(_Center(chart, c, PATCH_R_MAX, BRANCH_R_IN, "branch"))
    for chart, c in extra:
        near = [m for m in merged if _chordal((chart, c), (m.chart, m.coord)) < 1e-9]
        if near:
            # genuinely the same point; deepen the existing patch instead
            for m in near:
                m.r_in = min(m.r_in, CENTER_R_IN)
            continue
        # refinement features can be far narrower than any off-center ring
        # spacing, so even extras close to a branch patch get their own
        # centered patch; the partition of unity handles the overlap
        merged.append(_Center(chart, c, PATCH_R_MAX, CENTER_R_IN, "refine"))
    # large patches resolve concentration rings at any scale below the radius;
    # keep cores disjoint only when two surviving centers are genuinely close
    for i, m in enumerate(merged):
        dmin = min((_chordal((m.chart, m.coord), (o.chart, o.coord))
                    for j, o in enumerate(merged) if j != i), default=1.0)
        m.radius = min(PATCH_R_MAX, max(0.8 * dmin, 0.005))
    return merged


def _global_points(rpd: int, n_th: int):
    """Log-polar midpoint grid on the unit disk, radii GLOBAL_R_MIN..1."""
    decades = -math.log10(GLOBAL_R_MIN)
    n_r = max(4, int(round(rpd * decades)))
    edges = GLOBAL_R_MIN ** (1.0 - np.arange(n_r + 1) / n_r)
    r_mid = np.sqrt(edges[:-1] * edges[1:])
    ring_area = np.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
    th = (np.arange(n_th) + 0.5) * (2 * np.pi / n_th)
    xs = (r_mid[:, None] * np.exp(1j * th)[None, :]).ravel()
    ws = np.repeat(ring_area / n_th, n_th)
    return xs, ws


def _patch_points(center: _Center, rpd: int, n_th: int):
    decades = math.log10(center.radius / center.r_in)
    n_r = max(4, int(round(rpd * decades)))
    edges = center.r_in * (center.radius / center.r_in) ** (np.arange(n_r + 1) / n_r)
    r_mid = np.sqrt(edges[:-1] * edges[1:])
    ring_area = np.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
    th = (np.arange(n_th) + 0.5) * (2 * np.pi / n_th)
    rel = (r_mid[:, None] * np.exp(1j * th)[None, :]).ravel()
    xs = center.coord + rel
    ws = np.repeat(ring_area / n_th, n_th)
    return xs, ws, np.abs(rel)


def _pou_weights(coord: np.ndarray, chart: np.ndarray, centers: List[_Center],
                 own_index: Optional[int]) -> np.ndarray:
    """Ordered partition-of-unity multiplier for a batch of samples.

    Global samples (own_index None) get prod(1 - chi_c); the patch at index
    k gets chi_k * prod_{j<k}(1 - chi_j).
    """
    mult = np.ones(len(coord))
    upto = len(centers) if own_index is None else own_index
    for j in range(upto):
        c = centers[j]
        mapped = _coord_in_chart(coord, chart, c.chart)
        rho = np.abs(mapped - c.coord)
        rho = np.where(np.isfinite(rho), rho, np.inf)
        mult *= 1.0 - _chi(rho, c.radius)
    if own_index is not None:
        c = centers[own_index]
        mapped = _coord_in_chart(coord, chart, c.chart)
        rho = np.abs(mapped - c.coord)
        rho = np.where(np.isfinite(rho), rho, np.inf)
        mult *= _chi(rho, c.radius)
    return mult


def _line_intersection_centers(F: HomogPoly, basis_inv: np.ndarray,
                               lines: Sequence[np.ndarray]) -> List[Tuple[int, complex]]:
    """Base coordinates of the curve's intersections with projective lines.

    Each line is given by a functional c (the line is {z : <c, z> = 0}).
    These are the points where degenerating-family mass concentrates, so
    they get deep refinement patches.
    """
    Ff = F.to_float()
    d = F.degree
    exps = list(Ff.terms.keys())
    cofs = [complex(Ff.terms[e]) for e in exps]
    out: List[Tuple[int, complex]] = []
    for c in lines:
        c = np.asarray(c, dtype=complex)
        if np.abs(c).max() == 0:
            continue
        k = int(np.argmax(np.abs(c)))
        i, j = [v for v in range(3) if v != k]
        n1 = np.zeros(3, dtype=complex)
        n2 = np.zeros(3, dtype=complex)
        n1[i], n1[k] = 1.0, -c[i] / c[k]
        n2[j], n2[k] = 1.0, -c[j] / c[k]
        # restrict F to the line: binary form in (s, u) with z = s n1 + u n2
        co = np.zeros(d + 1, dtype=complex)   # ascending in u
        for e, cf in zip(exps, cofs):
            acc = np.array([1.0 + 0j])
            for v in range(3):
                pair = np.array([n1[v], n2[v]])
                for _ in range(int(e[v])):
                    new = np.zeros(len(acc) + 1, dtype=complex)
                    new[:-1] += pair[0] * acc
                    new[1:] += pair[1] * acc
                    acc = new
            co[:len(acc)] += cf * acc
        if np.abs(co).max() == 0:
            continue
        roots_zs = [n1 + t * n2 for t in _trimmed_roots(co)]
        if abs(co[d]) < 1e-12 * np.abs(co).max():
            roots_zs.append(n2.copy())
        for z in roots_zs:
            alpha, beta, _gamma = basis_inv @ z
            if abs(alpha) >= abs(beta):
                out.append((0, complex(beta / alpha)))
            else:
                out.append((1, complex(alpha / beta)))
    return _dedupe_sphere(out)


def _chart_coeff_matrix(P: HomogPoly, k: int, i: int, j: int) -> np.ndarray:
    """Coefficient matrix A[a, b] of x^a y^b for P restricted to z_k = 1."""
    A = np.zeros((P.degree + 1, P.degree + 1), dtype=complex)
    for e, c in P.terms.items():
        A[e[i], e[j]] += complex(c)
    return A


def _deg_y(A: np.ndarray) -> int:
    col = np.abs(A).max(axis=0)
    nz = np.nonzero(col > 1e-13 * max(col.max(), 1e-300))[0]
    return int(nz[-1]) if len(nz) else -1


def _np_roots(ascending: np.ndarray) -> List[complex]:
    c = np.asarray(ascending, dtype=complex)
    top = np.abs(c).max()
    if top == 0:
        return []
    c = c / top
    nz = np.nonzero(np.abs(c) > 1e-12)[0]
    if len(nz) == 0 or nz[-1] == 0:
        return []
    return [complex(r) for r in np.roots(c[:nz[-1] + 1][::-1])]


def _affine_common_roots(A: np.ndarray, B: np.ndarray) -> List[Tuple[complex, complex]]:
    """Candidate common zeros of two bivariate polynomials given by coefficient
    matrices (x-degree along rows, y-degree along columns).

    The y-resultant is interpolated from Sylvester determinants at FFT nodes;
    candidates are polished by the caller, so loose tolerances are fine here.
    """
    p, q = _deg_y(A), _deg_y(B)
    if p < 0 or q < 0:
        return []
    out: List[Tuple[complex, complex]] = []

    def y_coeffs(M, x, dy):
        pw = x ** np.arange(M.shape[0])
        return pw @ M[:, :dy + 1]

    if q == 0 or p == 0:
        # one polynomial is univariate in x: its roots fix x, the other fixes y
        M1, M2, d2 = (B, A, p) if q == 0 else (A, B, q)
        for xr in _np_roots(M1[:, 0]):
            for yr in _np_roots(y_coeffs(M2, complex(xr), d2)):
                out.append((complex(xr), yr))
        return out

    n_nodes = 128
    nodes = np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    syl = np.zeros((n_nodes, p + q, p + q), dtype=complex)
    pwA = nodes[:, None] ** np.arange(A.shape[0])[None, :]
    fA = pwA @ A[:, :p + 1]                      # (n_nodes, p+1), ascending in y
    pwB = nodes[:, None] ** np.arange(B.shape[0])[None, :]
    fB = pwB @ B[:, :q + 1]
    for r in range(q):
        syl[:, r, r:r + p + 1] = fA[:, ::-1]
    for r in range(p):
        syl[:, q + r, r:r + q + 1] = fB[:, ::-1]
    vals = np.linalg.det(syl)
    top = np.abs(vals).max()
    if top == 0:
        return []
    res_coeffs = np.fft.fft(vals / top) / n_nodes    # ascending in x
    for xr in _np_roots(res_coeffs):
        cf = y_coeffs(A, complex(xr), p)
        scaleB = np.abs(B).max() * (1.0 + abs(xr)) ** (B.shape[0] + q)
        for yr in _np_roots(cf):
            gv = y_coeffs(B, complex(xr), q) @ (yr ** np.arange(q + 1))
            if abs(gv) < 1e-3 * scaleB * (1.0 + abs(yr)) ** q:
                out.append((complex(xr), yr))
    return out


def _newton_polish_pair(Ff, Gf, gF, gG, z: np.ndarray, i: int, j: int):
    """Polish a common zero of (F, G) in the chart z_k = 1; None on failure."""
    z = z.copy()
    normF = max(abs(complex(c)) for c in Ff.terms.values())
    normG = max(abs(complex(c)) for c in Gf.terms.values())
    for _ in range(60):
        s = float(np.abs(z).max())
        if not np.isfinite(s) or s > 1e8:
            return None
        f0 = complex(eval_poly(Ff, z))
        g0 = complex(eval_poly(Gf, z))
        sf = normF * s ** Ff.degree
        sg = normG * s ** max(Gf.degree, 1)
        if abs(f0) < 1e-13 * sf and abs(g0) < 1e-13 * sg:
            return z
        J = np.array([[complex(eval_poly(gF[i], z)), complex(eval_poly(gF[j], z))],
                      [complex(eval_poly(gG[i], z)), complex(eval_poly(gG[j], z))]])
        try:
            dx, dy = np.linalg.solve(J, [f0, g0])
        except np.linalg.LinAlgError:
            return None
        z[i] -= dx
        z[j] -= dy
    return None


def _common_zeros(F: HomogPoly, G: HomogPoly) -> List[np.ndarray]:
    """Numeric common zeros in P^2 of two plane curves without common factor."""
    Ff, Gf = F.to_float(), G.to_float()
    if Ff.is_zero() or Gf.is_zero():
        return []
    gF = gradient(Ff)
    gG = gradient(Gf)
    found: List[np.ndarray] = []
    for k in range(3):
        i, j = [v for v in range(3) if v != k]
        A = _chart_coeff_matrix(Ff, k, i, j)
        B = _chart_coeff_matrix(Gf, k, i, j)
        for x, y in _affine_common_roots(A, B):
            z = np.zeros(3, dtype=complex)
            z[i], z[j], z[k] = x, y, 1.0
            res = _newton_polish_pair(Ff, Gf, gF, gG, z, i, j)
            if res is not None:
                found.append(res / np.linalg.norm(res))
    out: List[np.ndarray] = []
    for z in found:
        if all(1.0 - abs(np.vdot(z, o)) > 1e-9 for o in out):
            out.append(z)
    return out


def _tangency_centers(F: HomogPoly, basis_inv: np.ndarray,
                      directions: Sequence[np.ndarray]) -> List[Tuple[int, complex]]:
    """Base coordinates of points where <c, grad F> vanishes on the curve.

    These are the preimages under the Gauss map of the dual curve's
    intersections with a line, where pulled-back dual-side densities of a
    degenerating family concentrate.
    """
    Ff = F.to_float()
    grads = gradient(Ff)
    out: List[Tuple[int, complex]] = []
    for c in directions:
        c = np.asarray(c, dtype=complex)
        top = np.abs(c).max()
        if top == 0:
            continue
        terms: dict = {}
        for cj, Pj in zip(c / top, grads):
            if abs(cj) == 0:
                continue
            for e, co in Pj.terms.items():
                terms[e] = terms.get(e, 0.0) + cj * complex(co)
        big = max((abs(v) for v in terms.values()), default=0.0)
        terms = {e: v for e, v in terms.items() if abs(v) > 1e-14 * big}
        if not terms:
            continue
        G = HomogPoly.from_terms(3, F.degree - 1, terms, coeff_kind=FLOAT,
                                 space=Ff.space)
        for z in _common_zeros(Ff, G):
            alpha, beta, _gamma = basis_inv @ z
            if abs(alpha) >= abs(beta):
                out.append((0, complex(beta / alpha)))
            else:
                out.append((1, complex(alpha / beta)))
    return _dedupe_sphere(out)


def build_sampler(F: HomogPoly, resolution: int = 256, seed: int = 0,
                  refine_coordinate_lines: bool = False,
                  refine_lines: Optional[Sequence[np.ndarray]] = None,
                  refine_tangencies: Optional[Sequence[np.ndarray]] = None,
                  extra_centers: Optional[Sequence[Tuple[int, complex]]] = None) -> QuadratureGrid:
    """Build the two-chart quadrature grid for the curve X_F.

    ``resolution`` controls rings per radial decade (resolution/8) of every
    log-polar patch.  ``refine_coordinate_lines`` adds deep refinement
    patches at the curve's intersections with the coordinate lines, and
    ``refine_lines`` at intersections with arbitrary lines {<c, z> = 0} —
    needed for accurate energies along strongly degenerate families, whose
    mass concentrates at exactly those points.  ``refine_tangencies`` adds
    patches where <c, grad F> vanishes on the curve, the concentration
    points of dual-side (Gauss-map pullback) densities for the same
    degenerating families.
    """
    d = F.degree
    if d < 1:
        raise ValueError("degree must be positive")
    p, l0, l1 = choose_projection(F, seed=seed)
    basis = np.stack([l0, l1, p], axis=1)
    basis_inv = np.linalg.inv(basis)
    CA = _bivariate_fiber_coeffs(F, l0, l1, p)   # chart 0: q = l0 + x l1
    CB = _bivariate_fiber_coeffs(F, l1, l0, p)   # chart 1: q = l1 + y l0

    br = branch_points(CA, CB)
    extras: List[Tuple[int, complex]] = list(extra_centers or [])
    lines: List[np.ndarray] = list(refine_lines or [])
    if refine_coordinate_lines:
        lines += [np.eye(3, dtype=complex)[i] for i in range(3)]
    if lines:
        extras += _line_intersection_centers(F, basis_inv, lines)
    if refine_tangencies:
        extras += _tangency_centers(F, basis_inv, list(refine_tangencies))
    centers = _make_centers(br, extras)

    rpd = max(4, resolution // 8)

    def assemble(rpd_level: int) -> Tuple[SampleBlock, int, float]:
        n_th = max(16, int(math.ceil(2 * np.pi / (math.log(10.0) / rpd_level))))
        n_th_local = max(16, rpd_level)
        coords: List[np.ndarray] = []
        charts: List[np.ndarray] = []
        weights: List[np.ndarray] = []
        excluded = 0.0
        for chart in (0, 1):
            xs, ws = _global_points(rpd_level, n_th)
            ch = np.full(len(xs), chart, dtype=np.int8)
            mult = _pou_weights(xs, ch, centers, None)
            keep = mult > 1e-14
            coords.append(xs[keep])
            charts.append(ch[keep])
            weights.append((ws * mult)[keep])
            # uncovered origin disk unless a patch owns it
            if not any(c.chart == chart and abs(c.coord) < c.radius / 2 for c in centers):
                excluded += GLOBAL_R_MIN ** 2
        for idx, c in enumerate(centers):
            xs, ws, _rho = _patch_points(c, rpd_level, n_th_local)
            ch = np.full(len(xs), c.chart, dtype=np.int8)
            mult = _pou_weights(xs, ch, centers, idx)
            keep = mult > 1e-14
            coords.append(xs[keep])
            charts.append(ch[keep])
            weights.append((ws * mult)[keep])
            excluded += c.r_in ** 2 / (1.0 + abs(c.coord) ** 2) ** 2
        coord = np.concatenate(coords)
        chart = np.concatenate(charts)
        weight = np.concatenate(weights)

        blocks = []
        dropped = 0
        for ci, C in ((0, CA), (1, CB)):
            m = chart == ci
            x = coord[m]
            wgt = weight[m]
            if len(x) == 0:
                continue
            w_roots, ok = solve_fibers(C, x)
            g = _eval_fiber(C, x)
            gx = _eval_fiber_dx(C, x, 1)
            gxx = _eval_fiber_dx(C, x, 2)
            Gw = _horner_w(_dw_coeffs(g)[:, None, :], w_roots)
            Gx = _horner_w(gx[:, None, :], w_roots)
            Gxx = _horner_w(gxx[:, None, :], w_roots)
            gw = _dw_coeffs(g)
            Gxw = _horner_w(_dw_coeffs(gx)[:, None, :], w_roots) if g.shape[1] > 1 else 0
            Gww = _horner_w(_dw_coeffs(gw)[:, None, :], w_roots) if gw.shape[1] > 1 else np.zeros_like(Gw)
            wp = -Gx / Gw
            wpp = -(Gxx + 2 * Gxw * wp + Gww * wp ** 2) / Gw
            base0 = (l0 if ci == 0 else l1)
            base1 = (l1 if ci == 0 else l0)
            q = base0[None, None, :] + x[:, None, None] * base1[None, None, :]
            z = q + w_roots[..., None] * p[None, None, :]
            zp = base1[None, None, :] + wp[..., None] * p[None, None, :]
            zpp = wpp[..., None] * p[None, None, :]
            dct = w_roots.shape[1]
            flat_ok = ok.ravel()
            dropped += int((~flat_ok).sum())
            blocks.append((
                np.repeat(x, dct)[flat_ok],
                np.full(flat_ok.sum(), ci, dtype=np.int8),
                z.reshape(-1, 3)[flat_ok],
                zp.reshape(-1, 3)[flat_ok],
                zpp.reshape(-1, 3)[flat_ok],
                np.repeat(wgt, dct)[flat_ok],
            ))
        block = SampleBlock(
            coord=np.concatenate([b[0] for b in blocks]),
            chart=np.concatenate([b[1] for b in blocks]),
            z=np.concatenate([b[2] for b in blocks]),
            zp=np.concatenate([b[3] for b in blocks]),
            zpp=np.concatenate([b[4] for b in blocks]),
            weight=np.concatenate([b[5] for b in blocks]),
        )
        return block, dropped, excluded

    fine, dropped_f, excluded = assemble(rpd)
    coarse, dropped_c, _ = assemble(max(4, rpd // 2))
    info = [{"chart": c.chart, "coord": [c.coord.real, c.coord.imag],
             "radius": c.radius, "r_in": c.r_in, "kind": c.kind} for c in centers]
    return QuadratureGrid(F=F.to_float(), degree=d, resolution=resolution, seed=seed,
                          excluded_area=excluded, fine=fine, coarse=coarse,
                          dropped=dropped_f + dropped_c, center_info=info,
                          projection={"p": p.tolist(), "l0": l0.tolist(), "l1": l1.tolist()})


# ------------------------------------------------------------------ integrate


def integrate(grid: QuadratureGrid, density) -> Tuple[float, float]:
    """Deterministic weighted sum of a pointwise density over the grid.

    ``density`` maps a SampleBlock to a real array (density against the
    base-area element of the sample's own chart coordinate).  Returns
    (value, error estimate); the estimate compares against the built-in
    half-resolution grid and accounts for the excluded area.
    """
    vals = []
    for block in (grid.fine, grid.coarse):
        dens = np.asarray(density(block))
        if not np.all(np.isfinite(dens)):
            bad = int(np.argmax(~np.isfinite(dens)))
            raise FloatingPointError(f"non-finite density at retained sample {bad}")
        vals.append(float(np.real(np.sum(dens * block.weight))))
    err = abs(vals[0] - vals[1]) + grid.excluded_area
    return vals[0], err
