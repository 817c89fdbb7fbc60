"""Market parameters, coordinate transforms and the transformed put payoff.

The pricer works in scaled log coordinates

    x_i = (gamma / sigma_i) * ln(S_i / K),      tau = T - t,
    u   = exp(r * tau) * V / K,

which turn the two-asset lognormal pricing equation into a constant-coefficient
parabolic problem

    u_tau = (gamma^2/2) (u_11 + u_22) + gamma^2 rho12 u_12
            - gamma (b_1 u_1 + b_2 u_2),        b_i = sigma_i/2 - r/sigma_i,

with initial condition u(x, 0) = max(1 - sum_i omega_i exp(sigma_i x_i / gamma), 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# |rho12| = 1 makes the diffusion matrix singular and the problem loses its
# parabolic character; reject anything close rather than degrade silently.
RHO_MAX = 0.95

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MarketParams:
    """Two-asset market description plus the coordinate scaling gamma."""

    sigma1: float
    sigma2: float
    r: float
    rho12: float
    omega1: float
    omega2: float
    K: float
    T: float
    gamma: float

    def __post_init__(self):
        if not (self.sigma1 > 0.0 and self.sigma2 > 0.0):
            raise ValidationError(
                f"volatilities must be positive, got sigma1={self.sigma1}, sigma2={self.sigma2}"
            )
        if abs(self.rho12) > RHO_MAX:
            raise ValidationError(
                f"rho12={self.rho12} outside [-{RHO_MAX}, {RHO_MAX}]"
            )
        if not (self.omega1 > 0.0 and self.omega2 > 0.0):
            raise ValidationError(
                f"basket weights must be positive, got omega1={self.omega1}, omega2={self.omega2}"
            )
        if abs(self.omega1 + self.omega2 - 1.0) > _WEIGHT_TOL:
            raise ValidationError(
                f"basket weights must sum to 1, got {self.omega1} + {self.omega2}"
            )
        if not self.K > 0.0:
            raise ValidationError(f"strike must be positive, got K={self.K}")
        if not self.T > 0.0:
            raise ValidationError(f"maturity must be positive, got T={self.T}")
        if not self.gamma > 0.0:
            raise ValidationError(f"scaling must be positive, got gamma={self.gamma}")
        if self.r < 0.0:
            raise ValidationError(f"riskless rate must be non-negative, got r={self.r}")


@dataclass(frozen=True)
class ConvectionCoeffs:
    """First-derivative coefficients b_i = sigma_i/2 - r/sigma_i."""

    b1: float
    b2: float


def convection_coeffs(p: MarketParams) -> ConvectionCoeffs:
    return ConvectionCoeffs(
        b1=p.sigma1 / 2.0 - p.r / p.sigma1,
        b2=p.sigma2 / 2.0 - p.r / p.sigma2,
    )


def to_log_coords(s1, s2, p: MarketParams):
    """Map spots (S1, S2) to scaled log coordinates (x1, x2).

    Accepts scalars or numpy arrays; spots must be strictly positive.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if np.any(s1 <= 0.0) or np.any(s2 <= 0.0):
        raise ValidationError("spots must be strictly positive")
    x1 = (p.gamma / p.sigma1) * np.log(s1 / p.K)
    x2 = (p.gamma / p.sigma2) * np.log(s2 / p.K)
    return x1[()], x2[()]


def from_log_coords(x1, x2, p: MarketParams):
    """Inverse of :func:`to_log_coords`: S_i = K exp(sigma_i x_i / gamma)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    s1 = p.K * np.exp(p.sigma1 * x1 / p.gamma)
    s2 = p.K * np.exp(p.sigma2 * x2 / p.gamma)
    return s1[()], s2[()]


def payoff_transformed(x1, x2, p: MarketParams):
    """Transformed put payoff u0(x) = max(1 - sum_i omega_i e^{sigma_i x_i / gamma}, 0)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    with np.errstate(over="ignore"):
        basket = p.omega1 * np.exp(p.sigma1 * x1 / p.gamma) + p.omega2 * np.exp(
            p.sigma2 * x2 / p.gamma
        )
    return np.maximum(1.0 - basket, 0.0)[()]


def payoff_kink_gap(x1, x2, p: MarketParams):
    """Signed payoff argument g(x) = 1 - sum_i omega_i e^{sigma_i x_i / gamma}.

    Positive in the money, negative out of the money; the kink curve is g = 0.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    with np.errstate(over="ignore"):
        basket = p.omega1 * np.exp(p.sigma1 * x1 / p.gamma) + p.omega2 * np.exp(
            p.sigma2 * x2 / p.gamma
        )
    return (1.0 - basket)[()]


def undo_value_transform(u, tau: float, p: MarketParams):
    """Recover the option price V = K e^{-r tau} u from the transformed value."""
    return p.K * np.exp(-p.r * tau) * np.asarray(u, dtype=float)[()]


def apply_value_transform(v, tau: float, p: MarketParams):
    """Forward transform u = e^{r tau} V / K."""
    return np.exp(p.r * tau) * np.asarray(v, dtype=float)[()] / p.K


def manufactured_growth_rate(k1: float, k2: float, p: MarketParams) -> float:
    """Growth rate omega such that exp(k1 x1 + k2 x2 + omega tau) solves the PDE.

    Used only for verification runs; not part of the pricing pipeline.
    """
    b = convection_coeffs(p)
    g2 = p.gamma * p.gamma
    return (
        0.5 * g2 * (k1 * k1 + k2 * k2)
        + g2 * p.rho12 * k1 * k2
        - p.gamma * (b.b1 * k1 + b.b2 * k2)
    )
