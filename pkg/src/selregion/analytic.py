"""Closed-form channel and progress model, with a quadrature cross-check.

With Rayleigh fading and no noise the per-hop success probability at distance
``d`` is exp(-lam * p * t * d^2).  A relay chosen as the nearest receiver in an
annular sector of opening ``phi`` beyond ``r_m`` yields the expected density of
progress

    E[D] = sqrt(lam) p (1-p) k^(-3/2) sin(phi/2)
           * Γ(3/2, lam k r_m^2) * exp(lam (1-p) phi/2 r_m^2),

with k = p t + (1-p) phi/2.  The density ``lam`` enters the incomplete-gamma
argument and the exponential; :func:`expected_density_numeric` integrates the
defining double integral directly and confirms this placement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, ModelDomainError, NumericalError
from .special import upper_gamma_3_2, upper_gamma_3_2_scaled

__all__ = [
    "NetworkConfig",
    "SelectionRegion",
    "DerivedConstants",
    "interference_constant_t",
    "success_probability",
    "hop_distance_cdf",
    "incomplete_gamma_3_2",
    "composite_k",
    "derived_constants",
    "expected_density_of_progress",
    "expected_density_numeric",
    "db_to_linear",
]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Network and channel parameters.

    ``beta`` is the SIR threshold on a linear scale.  ``rho`` and ``mu`` cancel
    out of every closed form; they are kept so the physical simulator can
    demonstrate that.  ``eta`` (noise) must be zero.
    """

    lam: float = 1.0
    p: float = 0.05
    alpha: float = 3.0
    beta: float = 10.0
    rho: float = 1.0
    mu: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("lam", "p", "alpha", "beta", "rho", "mu", "eta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParameterError(f"{name} must be a finite number, got {v!r}")
        if self.alpha <= 2.0:
            raise ModelDomainError(f"path-loss exponent must exceed 2, got alpha={self.alpha}")
        for name in ("lam", "beta", "rho", "mu"):
            if getattr(self, name) <= 0.0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 < self.p < 1.0:
            raise InvalidParameterError(f"p must lie strictly inside (0, 1), got {self.p}")
        if self.eta != 0.0:
            raise ModelDomainError("only the interference-limited case eta = 0 is modelled")

    def replace(self, **changes) -> "NetworkConfig":
        fields = {k: getattr(self, k) for k in ("lam", "p", "alpha", "beta", "rho", "mu", "eta")}
        fields.update(changes)
        return NetworkConfig(**fields)

    @property
    def t(self) -> float:
        return interference_constant_t(self.alpha, self.beta)


@dataclass(frozen=True)
class SelectionRegion:
    phi_sel: float
    r_m: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.phi_sel <= 2.0 * math.pi):
            raise InvalidParameterError(f"selection angle must lie in (0, 2pi], got {self.phi_sel}")
        if not (math.isfinite(self.r_m) and self.r_m >= 0.0):
            raise InvalidParameterError(f"reference distance must be finite and >= 0, got {self.r_m}")


@dataclass(frozen=True)
class DerivedConstants:
    t: float
    k: float


def interference_constant_t(alpha: float, beta: float) -> float:
    """t = (2 pi^2 / alpha) / sin(2 pi / alpha) * beta^(2/alpha)."""
    if not alpha > 2.0:
        raise ModelDomainError(f"interference constant diverges for alpha <= 2 (alpha={alpha})")
    if not beta > 0.0:
        raise InvalidParameterError(f"beta must be > 0, got {beta}")
    return (2.0 * math.pi ** 2 / alpha) / math.sin(2.0 * math.pi / alpha) * beta ** (2.0 / alpha)


def success_probability(cfg: NetworkConfig, d):
    """Probability that a hop of length ``d`` clears the SIR threshold."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise InvalidParameterError("hop distance must be >= 0")
    out = np.exp(-cfg.lam * cfg.p * cfg.t * d * d)
    return float(out) if out.ndim == 0 else out


def hop_distance_cdf(cfg: NetworkConfig, region: SelectionRegion, r):
    """P(d <= r) for the distance to the nearest receiver in the selection region."""
    r = np.asarray(r, dtype=float)
    if np.any(r < region.r_m):
        raise ModelDomainError("hop-distance CDF is only defined for r >= r_m")
    c = cfg.lam * (1.0 - cfg.p) * 0.5 * region.phi_sel
    out = -np.expm1(-c * (r * r - region.r_m ** 2))
    return float(out) if out.ndim == 0 else out


def incomplete_gamma_3_2(x):
    return upper_gamma_3_2(x)


def composite_k(cfg: NetworkConfig, phi_sel: float) -> float:
    return cfg.p * cfg.t + (1.0 - cfg.p) * 0.5 * phi_sel


def derived_constants(cfg: NetworkConfig, phi_sel: float) -> DerivedConstants:
    return DerivedConstants(t=cfg.t, k=composite_k(cfg, phi_sel))


def _as_region(region_or_phi, r_m=None) -> SelectionRegion:
    if isinstance(region_or_phi, SelectionRegion):
        return region_or_phi
    return SelectionRegion(float(region_or_phi), 0.0 if r_m is None else float(r_m))


def expected_density_of_progress(cfg: NetworkConfig, region: SelectionRegion) -> float:
    """Closed-form expected density of progress of the selection-region rule.

    Evaluated as exp(x) Γ(3/2, x) * exp(-lam p t r_m^2) so that large reference
    distances neither overflow nor lose precision.
    """
    region = _as_region(region)
    phi, r_m = region.phi_sel, region.r_m
    k = composite_k(cfg, phi)
    x = cfg.lam * k * r_m * r_m
    return (
        math.sqrt(cfg.lam)
        * cfg.p
        * (1.0 - cfg.p)
        * k ** -1.5
        * math.sin(0.5 * phi)
        * upper_gamma_3_2_scaled(x)
        * math.exp(-cfg.lam * cfg.p * cfg.t * r_m * r_m)
    )


def expected_density_numeric(cfg: NetworkConfig, region: SelectionRegion, abs_tol: float = 1e-12) -> float:
    """Expected density of progress by adaptive quadrature of its defining integral.

    p lam * int_{r_m}^{inf} exp(-p lam t x^2) x E[cos theta] f_d(x) dx, where
    f_d is the density of the nearest-receiver distance and
    E[cos theta] = 2 sin(phi/2) / phi for theta uniform on [-phi/2, phi/2].
    """
    region = _as_region(region)
    phi, r_m = region.phi_sel, region.r_m
    lam, p, t = cfg.lam, cfg.p, cfg.t
    rx = lam * (1.0 - p)
    mean_cos = 2.0 * math.sin(0.5 * phi) / phi

    def f_d(x):
        return rx * phi * x * math.exp(-rx * 0.5 * phi * (x * x - r_m * r_m))

    def integrand(x):
        return math.exp(-p * lam * t * x * x) * x * mean_cos * f_d(x)

    k = composite_k(cfg, phi)
    upper = r_m + 40.0 / math.sqrt(lam * k)
    value, err = integrate.quad(integrand, r_m, upper, epsabs=abs_tol / 10.0, epsrel=1e-13, limit=500)
    value *= p * lam
    err *= p * lam
    if not err <= abs_tol:
        raise NumericalError(f"quadrature error estimate {err:.3e} exceeds {abs_tol:.1e}", estimate=value)
    return value
