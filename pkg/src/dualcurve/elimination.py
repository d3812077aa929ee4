"""Dual-curve discriminants of smooth plane curves and generic binary eliminants.

The dual discriminant is computed by restricting F to a symbolic line,
taking the discriminant of the resulting binary form (a Sylvester
determinant divided by its leading coefficient), and stripping monomial
content.  The degree formula deg = d(d-1) is enforced as a hard check.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import (DUAL, EXACT, POINT, GroupElement, HomogPoly, InexactDivision,
                   canonical, eval_poly, exact_divide, fraction_free_det,
                   from_json_dict, gradient, partial_derivative,
                   sylvester_matrix, to_json_dict)

MAX_DUAL_DEGREE = 4        # planeDualDiscriminant cap
MAX_GENERIC_DEGREE = 5     # generic binary resultant/discriminant cap


class DegreeCapExceeded(ValueError):
    """Symbolic elimination requested beyond the supported degree."""


class ExtraneousFactorError(RuntimeError):
    """Stripped eliminant does not have the expected degree d(d-1)."""


class NotSmoothError(ValueError):
    """Curve failed (or lacks) the smoothness certificate."""


@dataclass(frozen=True)
class SmoothnessCertificate:
    smooth: bool
    method: str
    tolerance: float
    min_gradient: float
    witness: Optional[Tuple[complex, complex, complex]] = None


@dataclass(frozen=True)
class PlaneCurve:
    """A plane curve X_F with exact defining polynomial F of degree d >= 2."""

    F: HomogPoly
    certificate: Optional[SmoothnessCertificate] = None

    def __post_init__(self):
        if self.F.nvars != 3:
            raise ValueError("plane curves need 3 variables")
        if self.F.degree < 1:
            raise ValueError("degree must be >= 1")

    @property
    def degree(self) -> int:
        return self.F.degree


@dataclass(frozen=True)
class DualDiscriminant:
    delta: HomogPoly
    source_degree: int

    def __post_init__(self):
        d = self.source_degree
        if self.delta.degree != d * (d - 1):
            raise ValueError("dual discriminant has wrong degree")


@dataclass(frozen=True)
class GenericEliminant:
    poly: HomogPoly
    kind: str          # "resultant" | "discriminant"
    form_degree: int


# ---------------------------------------------------------------- restriction


def restrict_to_line(F: HomogPoly, chart: int) -> List[HomogPoly]:
    """Restrict F to the line a.z = 0, solving for z_chart.

    Returns the binary form g(s,u) = a_k^d * F(line(s,u)) as a coefficient
    list [g_0, ..., g_d] with g_m the coefficient of s^(d-m) u^m; each g_m is
    an exact HomogPoly of degree d in the dual variables (a0,a1,a2).
    """
    if chart not in (0, 1, 2):
        raise ValueError("chart must be 0, 1 or 2")
    if not F.is_exact():
        raise ValueError("symbolic restriction needs exact F")
    d = F.degree
    i, j = [v for v in range(3) if v != chart]  # s goes with z_i, u with z_j
    coeffs: List[Dict[Tuple[int, int, int], Fraction]] = [dict() for _ in range(d + 1)]

    def add(m: int, e: Tuple[int, int, int], c: Fraction):
        cur = coeffs[m].get(e, Fraction(0)) + c
        if cur == 0:
            coeffs[m].pop(e, None)
        else:
            coeffs[m][e] = cur

    from math import comb

    for e, c in F.terms.items():
        aj, ak = e[j], e[chart]
        # z_i^ai z_j^aj z_k^ak -> s^ai u^aj (-(a_i s + a_j u))^ak a_k^(d-ak)
        for p in range(ak + 1):
            # term (a_i s)^p (a_j u)^(ak-p)
            m = aj + ak - p  # power of u
            coef = c * comb(ak, p) * (-1) ** ak
            ea = [0, 0, 0]
            ea[i] = p
            ea[j] = ak - p
            ea[chart] = d - ak
            add(m, tuple(ea), Fraction(coef))
    out = []
    for m in range(d + 1):
        out.append(HomogPoly.from_terms(3, d, coeffs[m], EXACT, DUAL))
    return out


def binary_discriminant(g: Sequence[HomogPoly]) -> HomogPoly:
    """Discriminant of a binary form given as coefficient list [g_0..g_d].

    Computes Res_t(f, f') with f(t) = g(t, 1) via the Sylvester determinant
    and divides exactly by the leading coefficient g_0.  Raises
    InexactDivision if the chart is degenerate.
    """
    d = len(g) - 1
    if d < 2:
        raise ValueError("binary discriminant needs degree >= 2")
    if g[0].is_zero():
        raise InexactDivision("leading coefficient identically zero")
    # f = g0 t^d + ... + gd ; f' = d g0 t^(d-1) + ... + g_{d-1}
    fprime = [gi.scale(Fraction(d - m)) for m, gi in enumerate(g[:-1])]
    M = sylvester_matrix(list(g), fprime)
    det = fraction_free_det(M)
    return exact_divide(det, g[0])


def plane_dual_discriminant(curve: PlaneCurve, cache_dir: Optional[str] = None) -> DualDiscriminant:
    """The defining polynomial of the dual curve, canonically normalized.

    Tries chart 2, then 1, then 0; strips monomial content in the dual
    variables; enforces deg = d(d-1) exactly.
    """
    F = curve.F
    d = F.degree
    if d > MAX_DUAL_DEGREE:
        raise DegreeCapExceeded(f"dual discriminant supported for d <= {MAX_DUAL_DEGREE}, got {d}")
    if d < 2:
        raise ValueError("dual discriminant needs d >= 2")
    if curve.certificate is not None and not curve.certificate.smooth:
        raise NotSmoothError("curve is not certified smooth")

    cached = _cache_load(cache_dir, "dual-discriminant", F)
    if cached is not None:
        return DualDiscriminant(cached, d)

    last_err: Optional[Exception] = None
    for chart in (2, 1, 0):
        try:
            g = restrict_to_line(F, chart)
            disc = binary_discriminant(g)
        except InexactDivision as err:
            last_err = err
            continue
        delta = _strip_monomial_content(disc)
        if delta.degree != d * (d - 1):
            raise ExtraneousFactorError(
                f"stripped eliminant has degree {delta.degree}, expected {d * (d - 1)}; "
                "non-monomial extraneous factor (is the curve smooth?)")
        delta = canonical(delta)
        _cache_store(cache_dir, "dual-discriminant", F, delta)
        return DualDiscriminant(delta, d)
    raise ExtraneousFactorError(f"all charts degenerate: {last_err}")


def _strip_monomial_content(P: HomogPoly) -> HomogPoly:
    if P.is_zero():
        return P
    mins = [min(e[i] for e in P.terms) for i in range(P.nvars)]
    if not any(mins):
        return P
    terms = {tuple(p - m for p, m in zip(e, mins)): c for e, c in P.terms.items()}
    return HomogPoly.from_terms(P.nvars, P.degree - sum(mins), terms, P.coeff_kind, P.space)


# ----------------------------------------------------------- generic eliminants


def generic_binary_resultant(d: int, cache_dir: Optional[str] = None) -> GenericEliminant:
    """Resultant of two generic binary d-forms, in 2(d+1) coefficient variables.

    Variables are ordered c_0..c_d, e_0..e_d where the forms are
    sum c_i s^(d-i) u^i and sum e_i s^(d-i) u^i.
    """
    if not 1 <= d <= MAX_GENERIC_DEGREE:
        raise DegreeCapExceeded(f"generic resultant supported for 1 <= d <= {MAX_GENERIC_DEGREE}")
    nv = 2 * (d + 1)
    key_poly = HomogPoly.from_terms(nv, 1, {tuple(1 if i == 0 else 0 for i in range(nv)): Fraction(d)},
                                    EXACT, DUAL)  # stand-in content key: kind+d encoded below
    cached = _cache_load(cache_dir, f"generic-resultant-{d}", key_poly)
    if cached is not None:
        return GenericEliminant(cached, "resultant", d)

    def var(i):
        return HomogPoly.variable(nv, i, EXACT, DUAL)

    f = [var(i) for i in range(d + 1)]
    g = [var(d + 1 + i) for i in range(d + 1)]
    M = sylvester_matrix(f, g)
    res = canonical(fraction_free_det(M))
    _cache_store(cache_dir, f"generic-resultant-{d}", key_poly, res)
    return GenericEliminant(res, "resultant", d)


def generic_binary_discriminant(d: int, cache_dir: Optional[str] = None) -> GenericEliminant:
    """Discriminant of the generic binary d-form in a_0..a_d."""
    if not 2 <= d <= MAX_GENERIC_DEGREE:
        raise DegreeCapExceeded(f"generic discriminant supported for 2 <= d <= {MAX_GENERIC_DEGREE}")
    nv = d + 1
    key_poly = HomogPoly.from_terms(nv, 1, {tuple(1 if i == 0 else 0 for i in range(nv)): Fraction(d)},
                                    EXACT, DUAL)
    cached = _cache_load(cache_dir, f"generic-discriminant-{d}", key_poly)
    if cached is not None:
        return GenericEliminant(cached, "discriminant", d)

    g = [HomogPoly.variable(nv, i, EXACT, DUAL) for i in range(d + 1)]
    disc = canonical(binary_discriminant(g))
    _cache_store(cache_dir, f"generic-discriminant-{d}", key_poly, disc)
    return GenericEliminant(disc, "discriminant", d)


# ------------------------------------------------------------------ smoothness


def smoothness_check(curve: PlaneCurve, samples_per_chart: int = 400,
                     tolerance: float = 1e-9) -> SmoothnessCertificate:
    """Certify that F and its partials have no common projective zero.

    Samples the curve on coarse grids in all three chart projections,
    measures the scale-normalized gradient, and polishes the worst
    candidates with Gauss-Newton on the gradient system.  A converged
    common zero is a disproof (with witness); otherwise a positive
    minimum normalized gradient certifies smoothness.
    """
    import numpy as np

    F = curve.F.to_float()
    d = curve.degree
    grads = [g.to_float() for g in gradient(curve.F)]
    hess = [[partial_derivative(g, j).to_float() for j in range(3)] for g in gradient(curve.F)]

    pts: List[np.ndarray] = []

    # sample fibers of the three coordinate projections
    for chart in range(3):
        i, j = [v for v in range(3) if v != chart]
        n = int(np.sqrt(samples_per_chart))
        for rr in np.linspace(0.15, 1.4, n):
            for th in np.linspace(0, 2 * np.pi, n, endpoint=False):
                x = rr * np.exp(1j * th)
                # fiber poly in w = z_chart along the line z_i = 1, z_j = x
                co = np.zeros(d + 1, dtype=complex)
                for e, c in F.terms.items():
                    co[d - e[chart]] += c * x ** e[j]
                # lines meeting the curve at this chart's hyperplane give a
                # lower-degree fiber; trim instead of skipping the whole fiber
                scale = max(abs(co).max(), 1.0)
                while len(co) > 1 and abs(co[0]) < 1e-13 * scale:
                    co = co[1:]
                if len(co) < 2:
                    continue
                roots = np.roots(co)
                for w in roots:
                    z = np.zeros(3, dtype=complex)
                    z[i], z[j], z[chart] = 1.0, x, w
                    pts.append(z)
    if not pts:
        return SmoothnessCertificate(False, "sampling", tolerance, 0.0, None)
    Z = np.array(pts)
    Z = Z / np.linalg.norm(Z, axis=1, keepdims=True)

    def grad_at(z):
        return np.array([eval_poly(g, list(z)) for g in grads])

    gnorms = np.array([np.linalg.norm(grad_at(z)) for z in Z])
    order = np.argsort(gnorms)
    min_g = float(gnorms[order[0]])

    # Gauss-Newton polish of the most suspicious points on the gradient system
    for idx in order[:8]:
        z = Z[idx].copy()
        for _ in range(30):
            gv = grad_at(z)
            J = np.array([[eval_poly(hess[r][c], list(z)) for c in range(3)] for r in range(3)])
            # the system is homogeneous, so J z is parallel to gv and the
            # min-norm step is radial (undone by renormalization); restrict
            # the step to the orthogonal complement of z
            Qb, _ = np.linalg.qr(np.column_stack([z.conj(), np.eye(3)]))
            B = Qb[:, 1:3]
            try:
                y, *_ = np.linalg.lstsq(J @ B, -gv, rcond=None)
            except np.linalg.LinAlgError:
                break
            z = z + B @ y
            nz = np.linalg.norm(z)
            if nz < 1e-12:
                break
            z = z / nz
            if np.linalg.norm(grad_at(z)) < tolerance:
                return SmoothnessCertificate(False, "gauss-newton", tolerance,
                                             float(np.linalg.norm(grad_at(z))),
                                             tuple(complex(v) for v in z))
    threshold = 1e-5
    smooth = min_g > threshold
    return SmoothnessCertificate(smooth, "sampling+gauss-newton", tolerance, min_g, None)


def certify(curve: PlaneCurve, **kwargs) -> PlaneCurve:
    cert = smoothness_check(curve, **kwargs)
    if not cert.smooth:
        raise NotSmoothError(f"curve not smooth (min normalized gradient {cert.min_gradient:.3e})")
    return PlaneCurve(curve.F, cert)


# ----------------------------------------------------------------------- cache


def content_hash(kind: str, P: HomogPoly) -> str:
    payload = json.dumps({"kind": kind, "poly": to_json_dict(P)}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _cache_path(cache_dir: str, kind: str, P: HomogPoly) -> str:
    return os.path.join(cache_dir, content_hash(kind, P) + ".json")


def _cache_load(cache_dir: Optional[str], kind: str, P: HomogPoly) -> Optional[HomogPoly]:
    if not cache_dir:
        return None
    path = _cache_path(cache_dir, kind, P)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    return from_json_dict(data["poly"])


def _cache_store(cache_dir: Optional[str], kind: str, P: HomogPoly, result: HomogPoly) -> None:
    if not cache_dir:
        return
    os.makedirs(cache_dir, exist_ok=True)
    path = _cache_path(cache_dir, kind, P)
    data = {"kind": kind, "input": to_json_dict(P), "poly": to_json_dict(result),
            "written": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh)
    os.replace(tmp, path)
