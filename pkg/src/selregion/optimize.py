"""Choosing the selection angle and reference distance.

For a fixed angle the derivative of the expected density of progress with
respect to r_m has the sign of :func:`stationarity_residual_rm`; the objective
is not known to be concave, so every sign change of that residual is bracketed
and polished and the best root wins.  The joint optimum additionally zeroes
:func:`joint_residual`, which is the sign of the derivative of the profiled
objective phi -> max_rm E[D].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .analytic import NetworkConfig, composite_k, expected_density_of_progress, SelectionRegion
from .errors import InvalidParameterError, ModelDomainError, NumericalError
from .special import upper_gamma_3_2, upper_gamma_3_2_scaled

TWO_PI = 2.0 * math.pi
SCAN_CELLS = 400
RESIDUAL_TOL = 1e-10
JOINT_TOL = 1e-8
PHI_TOL = 1e-6
TIE_EPS = 1e-12


@dataclass(frozen=True)
class BoundResult:
    upper_bound: Optional[float]
    discriminant: float

    @property
    def exists(self) -> bool:
        return self.upper_bound is not None


class RmOptimum(NamedTuple):
    rm_star: float
    e_star: float
    boundary_flag: bool
    residual: float


@dataclass(frozen=True)
class OptimizationResult:
    phi_star: float
    rm_star: float
    e_star: float
    residual_rm: float
    residual_joint: float
    boundary_flag: bool


def _density(cfg, phi, r_m):
    return expected_density_of_progress(cfg, SelectionRegion(phi, r_m))


def stationarity_residual_rm(cfg: NetworkConfig, phi_sel: float, r_m: float) -> float:
    """Γ(3/2, lam k r^2) lam (1-p) phi r - 2 (lam k)^(3/2) r^2 exp(-lam k r^2).

    Its sign is the sign of dE[D]/dr_m.
    """
    if r_m < 0:
        raise InvalidParameterError("r_m must be >= 0")
    lk = cfg.lam * composite_k(cfg, phi_sel)
    x = lk * r_m * r_m
    return (
        upper_gamma_3_2(x) * cfg.lam * (1.0 - cfg.p) * phi_sel * r_m
        - 2.0 * lk ** 1.5 * r_m * r_m * math.exp(-x)
    )


def _scaled_residual(cfg, phi_sel, r):
    # residual * exp(lam k r^2) / r: same sign for r > 0, no underflow
    lk = cfg.lam * composite_k(cfg, phi_sel)
    if not isinstance(r, float):
        r = np.asarray(r, dtype=float)
    return upper_gamma_3_2_scaled(lk * r * r) * cfg.lam * (1.0 - cfg.p) * phi_sel - 2.0 * lk ** 1.5 * r


def rm_upper_bound(cfg: NetworkConfig, phi_sel: float) -> BoundResult:
    """Analytic upper bound on the optimal reference distance at a fixed angle.

    Absent when the discriminant 4K^3 - 2K A^2 is negative, with K = lam k and
    A = lam (1-p) phi.
    """
    big_k = cfg.lam * composite_k(cfg, phi_sel)
    a = cfg.lam * (1.0 - cfg.p) * phi_sel
    disc = 4.0 * big_k ** 3 - 2.0 * big_k * a * a
    if disc < 0:
        return BoundResult(None, disc)
    return BoundResult((2.0 * big_k ** 1.5 - math.sqrt(disc)) / (big_k * a), disc)


def _bisect(f, lo, hi, f_lo):
    """Bisect a sign change of ``f`` on [lo, hi] down to floating-point resolution."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_limit(cfg: NetworkConfig, phi_sel: float) -> float:
    bound = rm_upper_bound(cfg, phi_sel).upper_bound
    fallback = 10.0 / math.sqrt(cfg.lam * composite_k(cfg, phi_sel))
    return fallback if bound is None else max(bound, fallback)


def stationary_points_rm(cfg: NetworkConfig, phi_sel: float) -> list:
    """All interior roots of the r_m stationarity condition found by a 400-cell scan."""
    limit = scan_limit(cfg, phi_sel)
    grid = np.linspace(0.0, limit, SCAN_CELLS + 1)[1:]
    vals = _scaled_residual(cfg, phi_sel, grid)
    f = lambda r: _scaled_residual(cfg, phi_sel, r)
    roots = []
    # the scaled residual is positive as r -> 0+, so (0, grid[0]] is a bracket too
    lo, f_lo = 0.0, cfg.lam * (1.0 - cfg.p) * phi_sel * 0.5 * math.sqrt(math.pi)
    for hi, f_hi in zip(grid, vals):
        if f_hi == 0.0:
            roots.append(float(hi))
        elif (f_hi > 0) != (f_lo > 0) and f_lo != 0.0:
            roots.append(_bisect(f, lo, float(hi), f_lo))
        lo, f_lo = float(hi), float(f_hi)
    return roots


def optimal_rm_given_phi(cfg: NetworkConfig, phi_sel: float, tol: float = RESIDUAL_TOL) -> RmOptimum:
    """Best reference distance for a fixed selection angle.

    Candidates are every stationary point plus the boundary r_m = 0; ties within
    1e-12 go to the interior root.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be > 0")
    best = RmOptimum(0.0, _density(cfg, phi_sel, 0.0), True, 0.0)
    for r in stationary_points_rm(cfg, phi_sel):
        res = stationarity_residual_rm(cfg, phi_sel, r)
        if abs(res) > tol:
            raise NumericalError(f"bisection stalled at r_m={r!r} with residual {res:.3e}", estimate=r)
        e = _density(cfg, phi_sel, r)
        if e > best.e_star or (best.boundary_flag and e >= best.e_star - TIE_EPS):
            best = RmOptimum(r, e, False, res)
    return best


def joint_residual(cfg: NetworkConfig, phi_sel: float, r_m: float) -> float:
    """cot(phi/2) k / (1-p) - 3/2 + lam p t r_m^2."""
    if not 0.0 < phi_sel < TWO_PI:
        raise ModelDomainError("joint residual needs 0 < phi < 2pi")
    k = composite_k(cfg, phi_sel)
    cot = math.cos(0.5 * phi_sel) / math.sin(0.5 * phi_sel)
    return cot * k / (1.0 - cfg.p) - 1.5 + cfg.lam * cfg.p * cfg.t * r_m * r_m


def rm_from_phi_closed_form(cfg: NetworkConfig, phi_sel: float) -> Optional[float]:
    """Reference distance on the joint-stationarity curve, or None if the radicand is negative."""
    k = composite_k(cfg, phi_sel)
    cot = math.cos(0.5 * phi_sel) / math.sin(0.5 * phi_sel)
    radicand = (1.5 - cot * k / (1.0 - cfg.p)) / (cfg.lam * cfg.p * cfg.t)
    if radicand < 0:
        return None
    return math.sqrt(radicand)


def golden_section_max(f, lo, hi, tol=PHI_TOL):
    """Maximise a unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d)]
    fx, x = max(candidates, key=lambda t: (t[0], -t[1]))
    return x, fx


def default_phi_grid(points: int = 64) -> np.ndarray:
    """Open grid on (0, 2pi)."""
    return TWO_PI * (np.arange(points) + 0.5) / points


def _coarse_then_golden(profile, grid):
    values = [profile(phi) for phi in grid]
    # max with deterministic tie-break on the smaller angle
    i = max(range(len(grid)), key=lambda j: (values[j], -grid[j]))
    lo = grid[i - 1] if i > 0 else 0.5 * grid[0]
    hi = grid[i + 1] if i + 1 < len(grid) else 0.5 * (grid[-1] + TWO_PI)
    return golden_section_max(profile, float(lo), float(hi))


def _polish_phi(cfg, phi0, tol):
    """Zero the joint residual along the profiled optimum near ``phi0``."""

    def g(phi):
        return joint_residual(cfg, phi, optimal_rm_given_phi(cfg, phi, tol).rm_star)

    g0 = g(phi0)
    if g0 == 0.0:
        return phi0
    step = 4.0 * PHI_TOL
    for _ in range(40):
        lo, hi = max(phi0 - step, 1e-9), min(phi0 + step, TWO_PI - 1e-9)
        g_lo, g_hi = g(lo), g(hi)
        # the profiled objective increases where g > 0
        if g_lo > 0 > g_hi:
            return _bisect(g, lo, hi, g_lo)
        step *= 2.0
    return None


def optimize_phi_at_rm(cfg: NetworkConfig, r_m: float = 0.0, grid: Optional[Sequence[float]] = None):
    """Best selection angle for a fixed reference distance; returns (phi, E)."""
    grid = default_phi_grid() if grid is None else np.asarray(grid, dtype=float)
    return _coarse_then_golden(lambda phi: _density(cfg, phi, r_m), grid)


def optimize_joint(
    cfg: NetworkConfig,
    grid: Optional[Sequence[float]] = None,
    tol: float = RESIDUAL_TOL,
    joint_tol: float = JOINT_TOL,
) -> OptimizationResult:
    """Jointly optimise (phi, r_m).

    Coarse scan of the profiled objective over ``grid`` (default: 64 points on
    (0, 2pi)), golden-section refinement to 1e-6 rad, then bisection on the
    joint residual so that both stationarity conditions hold to tolerance.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be > 0")
    grid = default_phi_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(grid >= TWO_PI):
        raise InvalidParameterError("phi grid must be non-empty and inside (0, 2pi)")

    profile = lambda phi: optimal_rm_given_phi(cfg, phi, tol).e_star
    phi_gs, e_gs = _coarse_then_golden(profile, grid)
    phi_star = phi_gs
    inner = optimal_rm_given_phi(cfg, phi_gs, tol)
    if not inner.boundary_flag:
        polished = _polish_phi(cfg, phi_gs, tol)
        if polished is not None:
            cand = optimal_rm_given_phi(cfg, polished, tol)
            if cand.e_star >= e_gs - TIE_EPS:
                phi_star, inner = polished, cand
    res_joint = joint_residual(cfg, phi_star, inner.rm_star)
    if not inner.boundary_flag and abs(res_joint) > joint_tol:
        raise NumericalError(
            f"joint residual {res_joint:.3e} above tolerance at phi={phi_star!r}", estimate=phi_star
        )
    return OptimizationResult(
        phi_star=phi_star,
        rm_star=inner.rm_star,
        e_star=inner.e_star,
        residual_rm=stationarity_residual_rm(cfg, phi_star, inner.rm_star),
        residual_joint=res_joint,
        boundary_flag=inner.boundary_flag,
    )
