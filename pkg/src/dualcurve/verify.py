"""Verification drivers for the energy/norm identities on plane curves.

Each driver measures residuals of one integral identity over a family of
group elements and checks the contract appropriate to it: pointwise
identities must vanish to near machine precision, integral identities must
have bounded residual (the norm comparison hides a bounded conformal
factor) and exactly matching asymptotic slopes along one-parameter
subgroups.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import (HomogPoly, GroupElement, fs_norm_sq, point_action, dual_action,
                   gradient, veronese_conic)
from .sampler import QuadratureGrid, build_sampler
from .energy import (GaussMap, energies, EnergyValues, bergman_potential,
                     dual_bergman_potential, density_ratio_log, bergman_psi_integral)
from .polytope import (measure_slope, weight_polytope, predicted_norm_slope,
                       OneParamSubgroup)

__all__ = [
    "VerificationReport", "SigmaFamily", "random_sl3",
    "verify_ddbar_identity", "verify_aubin_resultant",
    "verify_plane_curve_identity", "verify_tian_hypersurface",
    "verify_veronese_mt",
]


@dataclass
class VerificationReport:
    identity: str
    sigma_id: str
    residual: float
    spread: float
    term_range: float
    slopes: Dict[str, Optional[float]]
    grid: Dict[str, float]
    passed: bool
    details: Dict[str, object] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            "identity": self.identity,
            "sigma_id": self.sigma_id,
            "residual": self.residual,
            "spread": self.spread,
            "term_range": self.term_range,
            "slopes": {"predicted": self.slopes.get("predicted"),
                       "measured": self.slopes.get("measured")},
            "grid": self.grid,
            "pass": self.passed,
        }
        if self.details:
            out["details"] = self.details
        return out

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ------------------------------------------------------------ sigma families


def random_sl3(rng: np.random.Generator, anisotropy: float = 2.5) -> np.ndarray:
    """Random SL(3,C): unitary x exp-scaled diagonal x unitary, det of modulus 1."""
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    U, _ = np.linalg.qr(A)
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    V, _ = np.linalg.qr(B)
    s = rng.uniform(-anisotropy, anisotropy, size=3)
    s -= s.mean()
    sig = U @ np.diag(np.exp(s)) @ V.conj().T
    det = np.linalg.det(sig)
    return sig / det ** (1.0 / 3.0)


@dataclass
class SigmaFamily:
    """A list of group elements with ids, plus optional 1-PSG structure."""

    sigmas: List[np.ndarray]
    ids: List[str]
    lam: Optional[OneParamSubgroup] = None
    t_grid: Optional[List[complex]] = None

    @staticmethod
    def diagonal(m: Sequence[int], t_grid: Sequence[complex]) -> "SigmaFamily":
        lam = OneParamSubgroup(tuple(int(v) for v in m))
        sigmas = [np.diag([complex(t) ** mi for mi in lam.m]) for t in t_grid]
        ids = [f"diag(t^{tuple(lam.m)}), t={t:g}" for t in t_grid]
        return SigmaFamily(sigmas, ids, lam=lam, t_grid=list(map(complex, t_grid)))

    @staticmethod
    def random(seed: int, count: int, anisotropy: float = 2.5) -> "SigmaFamily":
        rng = np.random.default_rng(seed)
        sigmas = [random_sl3(rng, anisotropy) for _ in range(count)]
        ids = [f"random-sl3(seed={seed})[{i}]" for i in range(count)]
        return SigmaFamily(sigmas, ids)


def _sigma_grid(F: HomogPoly, sigma: np.ndarray, resolution: int, seed: int) -> QuadratureGrid:
    """Grid refined where the sigma-degenerate mass concentrates."""
    _, _, Vh = np.linalg.svd(sigma)
    return build_sampler(F, resolution=resolution, seed=seed, refine_lines=list(Vh),
                         refine_tangencies=[row.conj() for row in Vh])


def log_fs_ratio_point(F: HomogPoly, sigma: np.ndarray) -> float:
    """log(||sigma . F||^2 / ||F||^2) for the substitution action F о sigma^{-1}."""
    ge = GroupElement(tuple(tuple(complex(x) for x in row) for row in sigma), exact=False)
    sF = point_action(ge, F.to_float())
    return math.log(float(fs_norm_sq(sF)) / float(fs_norm_sq(F.to_float())))


def log_fs_ratio_dual(delta: HomogPoly, sigma: np.ndarray) -> float:
    """log(||sigma . Delta||^2 / ||Delta||^2) for the dual action Delta о sigma^T."""
    ge = GroupElement(tuple(tuple(complex(x) for x in row) for row in sigma), exact=False)
    sD = dual_action(ge, delta.to_float())
    return math.log(float(fs_norm_sq(sD)) / float(fs_norm_sq(delta.to_float())))


def _grid_meta(grid: QuadratureGrid, error: float) -> Dict[str, float]:
    return {"resolution": grid.resolution, "error": error,
            "excluded_area": grid.excluded_area}


def _fit_slope(values: Sequence[float], t_grid: Sequence[complex]) -> Tuple[float, float]:
    """Asymptotic slope in log|t|^2: fit the last three grid points.

    The norm comparisons hide a bounded conformal factor whose drift decays
    along the subgroup, so early points bias a least-squares fit; the tail
    carries the asymptotic slope.
    """
    k = min(3, len(values))
    return measure_slope(list(values)[-k:], [abs(complex(t)) for t in t_grid][-k:])


def _t_to_zero(t_grid: Sequence[complex]) -> bool:
    return abs(complex(t_grid[-1])) < abs(complex(t_grid[0]))


# ------------------------------------------------------------------- ddbar


def verify_ddbar_identity(F: HomogPoly, sigmas: Sequence[np.ndarray],
                          grid: QuadratureGrid, n_points: int = 100,
                          tol: float = 1e-8, seed: int = 0) -> VerificationReport:
    """Pointwise: dual potential pulled back by the gradient map equals
    2 phi_sigma + log(omega_sigma/omega) - log|det sigma|^2 on the curve."""
    rng = np.random.default_rng(seed)
    blk = grid.fine
    idx = rng.integers(0, len(blk), size=min(n_points, len(blk)))
    import dataclasses as _dc
    sub = _dc.replace(blk, coord=blk.coord[idx], chart=blk.chart[idx],
                      z=blk.z[idx], zp=blk.zp[idx], zpp=blk.zpp[idx],
                      weight=blk.weight[idx])
    gm = GaussMap(grid.F)
    v, _ = gm.lift(sub)
    worst = 0.0
    for sigma in sigmas:
        lhs = dual_bergman_potential(sigma, v)
        rhs = (2.0 * bergman_potential(sigma, sub.z)
               + density_ratio_log(sigma, sub)
               - math.log(abs(np.linalg.det(sigma)) ** 2))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(
        identity="ddbar", sigma_id=f"{len(sigmas)} GL(3,C) x {len(idx)} points",
        residual=worst, spread=0.0, term_range=0.0,
        slopes={"predicted": None, "measured": None},
        grid=_grid_meta(grid, 0.0), passed=worst < tol,
        details={"tolerance": tol})


# ------------------------------------------------------------------- aubin


def verify_aubin_resultant(F: HomogPoly, family: SigmaFamily, resolution: int = 512,
                           seed: int = 0, slope_tol: float = 0.02,
                           spread_tol: float = 0.05) -> VerificationReport:
    """-2d F0(phi_sigma) vs log||sigma.F||^2 ratio: bounded residual, exact slopes."""
    d = F.degree
    residuals, terms = [], []
    total_err = 0.0
    grid_meta = None
    for sigma in family.sigmas:
        grid = _sigma_grid(F, sigma, resolution, seed)
        E = energies(grid, sigma)
        lhs = -2.0 * d * E.F0
        rhs = log_fs_ratio_point(F, sigma)
        residuals.append(lhs - rhs)
        terms.append(lhs)
        total_err += E.grid_error
        if grid_meta is None:
            grid_meta = _grid_meta(grid, E.grid_error)
    spread = max(residuals) - min(residuals)
    term_range = max(terms) - min(terms)
    slopes: Dict[str, Optional[float]] = {"predicted": None, "measured": None}
    ok = spread < spread_tol * term_range if term_range > 0 else spread < 1e-9
    if family.lam is not None and family.t_grid is not None:
        W = weight_polytope(F, "onPoints")
        pred = predicted_norm_slope(W, family.lam, t_to_zero=_t_to_zero(family.t_grid))
        meas, _resid = _fit_slope(terms, family.t_grid)
        slopes = {"predicted": float(pred), "measured": meas}
        ok = abs(meas - float(pred)) <= slope_tol * max(abs(float(pred)), 1.0)
    return VerificationReport(
        identity="aubin", sigma_id="; ".join(family.ids[:3]) + ("..." if len(family.ids) > 3 else ""),
        residual=float(np.mean(residuals)), spread=spread, term_range=term_range,
        slopes=slopes, grid=grid_meta or {}, passed=bool(ok),
        details={"residuals": residuals, "terms": terms, "quadrature_error": total_err})


# -------------------------------------------------------------- plane curve


def verify_plane_curve_identity(F: HomogPoly, delta: HomogPoly, family: SigmaFamily,
                                resolution: int = 512, seed: int = 0,
                                slope_tol: float = 0.02,
                                spread_tol: float = 0.05) -> VerificationReport:
    """log-discriminant-norm vs 4d nu - 4 deg(Delta) F0 - d E1: bounded residual."""
    d = F.degree
    deg_delta = delta.degree
    residuals, lhs_terms, nu_terms, e1_terms = [], [], [], []
    total_err = 0.0
    grid_meta = None
    for sigma in family.sigmas:
        grid = _sigma_grid(F, sigma, resolution, seed)
        E = energies(grid, sigma)
        rhs = 4 * d * E.nu - 4 * deg_delta * E.F0 - d * E.E1
        lhs = log_fs_ratio_dual(delta, sigma)
        residuals.append(lhs - rhs)
        lhs_terms.append(lhs)
        nu_terms.append(4 * d * E.nu)
        e1_terms.append(E.E1)
        total_err += E.grid_error
        if grid_meta is None:
            grid_meta = _grid_meta(grid, E.grid_error)
    spread = max(residuals) - min(residuals)
    term_range = max(nu_terms) - min(nu_terms)
    slopes: Dict[str, Optional[float]] = {"predicted": None, "measured": None}
    ok = spread < spread_tol * max(term_range, 1.0)
    if family.lam is not None and family.t_grid is not None:
        Wd = weight_polytope(delta, "onDual")
        pred = predicted_norm_slope(Wd, family.lam, t_to_zero=_t_to_zero(family.t_grid))
        meas, _ = _fit_slope(lhs_terms, family.t_grid)
        rhs_meas, _ = _fit_slope([l - r for l, r in zip(lhs_terms, residuals)], family.t_grid)
        slopes = {"predicted": float(pred), "measured": meas}
        ok = (abs(meas - float(pred)) <= slope_tol * max(abs(float(pred)), 1.0)
              and abs(rhs_meas - float(pred)) <= slope_tol * max(abs(float(pred)), 1.0))
        grid_meta = grid_meta or {}
        grid_meta["rhs_slope"] = rhs_meas
    return VerificationReport(
        identity="planecurve", sigma_id="; ".join(family.ids[:3]) + ("..." if len(family.ids) > 3 else ""),
        residual=float(np.mean(residuals)), spread=spread, term_range=term_range,
        slopes=slopes, grid=grid_meta or {}, passed=bool(ok),
        details={"residuals": residuals, "lhs": lhs_terms, "nu_terms": nu_terms,
                 "E1": e1_terms, "quadrature_error": total_err})


# --------------------------------------------------------------------- tian


def verify_tian_hypersurface(F: HomogPoly, family: SigmaFamily, resolution: int = 512,
                             seed: int = 0, spread_tol: float = 0.05,
                             consistency_tol: float = 0.05) -> VerificationReport:
    """d nu = (3(d-1)/2) log||sigma.F||-ratio + Psi_B([sigma.F]) - Psi_B([F]).

    Unlike the norm-comparison identities, this one carries no bounded
    conformal slack: the singular term compensates the norm choice exactly,
    so it is the linear-dependence check among the integral identities.
    Contract: residual spread bounded as usual, plus the residual itself
    must vanish relative to the shared log-norm scale (quadrature only)."""
    d = F.degree
    base_grid = build_sampler(F, resolution=resolution, seed=seed,
                              refine_coordinate_lines=True)
    psi_base, psi_base_err = bergman_psi_integral(base_grid)
    residuals, terms, consistency, delta_psis, lognorms = [], [], [], [], []
    total_err = psi_base_err
    grid_meta = None
    for sigma in family.sigmas:
        grid = _sigma_grid(F, sigma, resolution, seed)
        E = energies(grid, sigma)
        lognorm = log_fs_ratio_point(F, sigma)
        ge = GroupElement(tuple(tuple(complex(x) for x in row) for row in sigma), exact=False)
        sF = point_action(ge, F.to_float())
        _, _, Vh = np.linalg.svd(np.linalg.inv(sigma))
        moved_grid = build_sampler(sF, resolution=resolution, seed=seed,
                                   refine_lines=list(Vh))
        psi_moved, psi_moved_err = bergman_psi_integral(moved_grid)
        lhs = d * E.nu
        delta_psi = psi_moved - psi_base
        rhs = 1.5 * (d - 1) * lognorm + delta_psi
        residuals.append(lhs - rhs)
        terms.append(lhs)
        delta_psis.append(delta_psi)
        lognorms.append(lognorm)
        total_err += E.grid_error + psi_moved_err
        if grid_meta is None:
            grid_meta = _grid_meta(grid, E.grid_error)
    spread = max(residuals) - min(residuals)
    term_range = max(terms) - min(terms)
    # this identity is an exact consequence of the other two once the
    # bookkeeping terms are unwound, so its residual is pure quadrature and
    # is judged against the scale of the shared log-norm term it carries
    cons_scale = max(1.5 * (d - 1) * max(abs(l) for l in lognorms), 1.0)
    consistency = [r / cons_scale for r in residuals]
    cons_ok = max(abs(c) for c in consistency) < consistency_tol
    slopes: Dict[str, Optional[float]] = {"predicted": None, "measured": None}
    if family.lam is not None and family.t_grid is not None:
        # slope of d nu - Delta Psi_B against the norm polytope
        W = weight_polytope(F, "onPoints")
        pred = 1.5 * (d - 1) * predicted_norm_slope(W, family.lam,
                                                    t_to_zero=_t_to_zero(family.t_grid))
        meas, _ = _fit_slope([t - p for t, p in zip(terms, delta_psis)], family.t_grid)
        slopes = {"predicted": float(pred), "measured": meas}
        ok = cons_ok and abs(meas - float(pred)) <= 0.02 * max(abs(float(pred)), 1.0)
    else:
        ok = (spread < spread_tol * max(term_range, 1.0)) and cons_ok
    return VerificationReport(
        identity="tian", sigma_id="; ".join(family.ids[:3]) + ("..." if len(family.ids) > 3 else ""),
        residual=float(np.mean(residuals)), spread=spread, term_range=term_range,
        slopes=slopes, grid=grid_meta or {}, passed=bool(ok),
        details={"residuals": residuals, "terms": terms,
                 "consistency": consistency, "quadrature_error": total_err})


# ----------------------------------------------------------------- veronese


def verify_veronese_mt(delta_q: HomogPoly, family: SigmaFamily, resolution: int = 512,
                       seed: int = 0, spread_tol: float = 0.05) -> VerificationReport:
    """On the conic z0 z2 - z1^2: log-discriminant-norm ratio vs 6 E1.

    Also reports the minimum of E1 over the family (the boundedness-below
    consequence) for stability checks under resolution doubling.
    """
    Q = veronese_conic()
    residuals, lhs_terms, e1s = [], [], []
    total_err = 0.0
    grid_meta = None
    for sigma in family.sigmas:
        grid = _sigma_grid(Q, sigma, resolution, seed)
        E = energies(grid, sigma)
        lhs = log_fs_ratio_dual(delta_q, sigma)
        residuals.append(lhs - 6.0 * E.E1)
        lhs_terms.append(lhs)
        e1s.append(E.E1)
        total_err += E.grid_error
        if grid_meta is None:
            grid_meta = _grid_meta(grid, E.grid_error)
    spread = max(residuals) - min(residuals)
    term_range = max(lhs_terms) - min(lhs_terms)
    slopes: Dict[str, Optional[float]] = {"predicted": None, "measured": None}
    ok = spread < spread_tol * max(term_range, 1.0)
    if family.lam is not None and family.t_grid is not None:
        Wd = weight_polytope(delta_q, "onDual")
        pred = predicted_norm_slope(Wd, family.lam, t_to_zero=_t_to_zero(family.t_grid))
        meas, _ = _fit_slope(lhs_terms, family.t_grid)
        rhs_meas, _ = _fit_slope([6.0 * e for e in e1s], family.t_grid)
        slopes = {"predicted": float(pred), "measured": meas}
        ok = ok and abs(rhs_meas - float(pred)) <= 0.02 * max(abs(float(pred)), 1.0)
    # The stated constant is 6; the constant consistent with the other two
    # integral identities (eliminating nu between them) is 2/3.  Report both
    # so a failure localizes the convention, not the quadrature.
    alt_residuals = [l - (2.0 / 3.0) * e for l, e in zip(lhs_terms, e1s)]
    return VerificationReport(
        identity="veronese", sigma_id="; ".join(family.ids[:3]) + ("..." if len(family.ids) > 3 else ""),
        residual=float(np.mean(residuals)), spread=spread, term_range=term_range,
        slopes=slopes, grid=grid_meta or {}, passed=bool(ok),
        details={"residuals": residuals, "E1": e1s, "min_E1": min(e1s),
                 "alt_constant": 2.0 / 3.0, "alt_residuals": alt_residuals,
                 "quadrature_error": total_err})
