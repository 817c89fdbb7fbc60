"""Compact 3x3 spatial and mass coefficient arrays for the transformed PDE.

Two discretisations share one container:

* ``hoc_coefficients`` builds the fourth-order compact pair (K_hat, M_hat).
  The entries are taken verbatim from the scheme's coefficient listing with
  a = gamma^2/h^2 and b_i = sigma_i/2 - r/sigma_i; the plus-or-minus signs in
  the corner formulas are resolved upper-sign-throughout, which is the unique
  reading that annihilates constants (sum K_hat = 0) and reproduces fourth
  order in the consistency sweep.
* ``second_order_coefficients`` builds the standard central-difference pair
  with an identity mass.

Both satisfy sum(K_hat) = 0 and sum(M_hat) = 1; this is checked at build time.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import GridField, classify, NodeKind
from .model import MarketParams, convection_coeffs

_ROWSUM_TOL = 1e-12


@dataclass(frozen=True)
class StencilPair:
    """Spatial (k_hat) and mass (m_hat) 3x3 arrays, indexed [d1+1, d2+1]."""

    k_hat: np.ndarray
    m_hat: np.ndarray
    h: float

    def __post_init__(self):
        object.__setattr__(self, "k_hat", np.asarray(self.k_hat, dtype=float))
        object.__setattr__(self, "m_hat", np.asarray(self.m_hat, dtype=float))
        if self.k_hat.shape != (3, 3) or self.m_hat.shape != (3, 3):
            raise ValidationError("stencil arrays must be 3x3")
        scale = np.abs(self.k_hat).max()
        if abs(self.k_hat.sum()) > _ROWSUM_TOL * max(scale, 1.0):
            raise NumericalError(
                "spatial stencil does not annihilate constants",
                row_sum=float(self.k_hat.sum()),
                scale=float(scale),
            )
        if abs(self.m_hat.sum() - 1.0) > _ROWSUM_TOL:
            raise NumericalError(
                "mass stencil is not normalised", row_sum=float(self.m_hat.sum())
            )


@lru_cache(maxsize=64)
def hoc_coefficients(p: MarketParams, h: float) -> StencilPair:
    """Fourth-order compact coefficient pair for spacing h."""
    if h <= 0.0:
        raise ValidationError(f"spacing must be positive, got h={h}")
    b = convection_coeffs(p)
    b1, b2 = b.b1, b.b2
    g2 = p.gamma * p.gamma
    rho = p.rho12
    gam = p.gamma
    h2 = h * h

    K = np.empty((3, 3))
    M = np.empty((3, 3))

    K[1, 1] = -2 * g2 * rho**2 / (3 * h2) + 5 * g2 / (3 * h2) + b1**2 / 3 + b2**2 / 3
    for pm in (+1, -1):
        K[1 + pm, 1] = (
            g2 * rho**2 / (3 * h2)
            + pm * gam * b1 / (3 * h)
            - pm * gam * b2 * rho / (3 * h)
            - b1**2 / 6
            - g2 / (3 * h2)
        )
        K[1, 1 + pm] = (
            g2 * rho**2 / (3 * h2)
            + pm * gam * b2 / (3 * h)
            - pm * gam * b1 * rho / (3 * h)
            - b2**2 / 6
            - g2 / (3 * h2)
        )
        # corners at (i1 +/- 1, i2 - 1), upper sign throughout
        K[1 + pm, 0] = (
            pm * b1 * b2 / 12
            - gam * b2 / (12 * h)
            + pm * gam * b1 / (12 * h)
            - gam * b1 * rho / (6 * h)
            + pm * gam * b2 * rho / (6 * h)
            - g2 / (12 * h2)
            + pm * g2 * rho / (4 * h2)
            - g2 * rho**2 / (6 * h2)
        )
        # corners at (i1 +/- 1, i2 + 1)
        K[1 + pm, 2] = (
            gam * b2 / (12 * h)
            - pm * b1 * b2 / 12
            + pm * gam * b1 / (12 * h)
            + gam * rho * b1 / (6 * h)
            + pm * gam * b2 * rho / (6 * h)
            - g2 / (12 * h2)
            - pm * g2 * rho / (4 * h2)
            - g2 * rho**2 / (6 * h2)
        )

    M[1, 1] = 2.0 / 3.0
    for pm in (+1, -1):
        M[1 + pm, 1] = 1.0 / 12.0 - pm * h * b1 / (12 * gam)
        M[1, 1 + pm] = 1.0 / 12.0 - pm * h * b2 / (12 * gam)
        # opposite corners share the value, adjacent corners flip sign
        M[2, 1 + pm] = pm * rho / 24.0
        M[0, 1 + pm] = -pm * rho / 24.0

    return StencilPair(K, M, h)


@lru_cache(maxsize=64)
def second_order_coefficients(p: MarketParams, h: float) -> StencilPair:
    """Standard second-order central-difference pair (identity mass)."""
    if h <= 0.0:
        raise ValidationError(f"spacing must be positive, got h={h}")
    b = convection_coeffs(p)
    g2 = p.gamma * p.gamma
    h2 = h * h

    K = np.zeros((3, 3))
    M = np.zeros((3, 3))
    M[1, 1] = 1.0

    K[1, 1] = 2 * g2 / h2
    for pm in (+1, -1):
        K[1 + pm, 1] = -g2 / (2 * h2) + pm * p.gamma * b.b1 / (2 * h)
        K[1, 1 + pm] = -g2 / (2 * h2) + pm * p.gamma * b.b2 / (2 * h)
        K[1 + pm, 1 + pm] = -g2 * p.rho12 / (4 * h2)
        K[1 + pm, 1 - pm] = +g2 * p.rho12 / (4 * h2)

    return StencilPair(K, M, h)


def coefficients_for(scheme: str, p: MarketParams, h: float) -> StencilPair:
    if scheme == "hoc":
        return hoc_coefficients(p, h)
    if scheme == "second_order":
        return second_order_coefficients(p, h)
    raise ValidationError(f"unknown scheme {scheme!r}; expected 'hoc' or 'second_order'")


def apply_stencil(s: StencilPair, which: str, f: GridField, i1: int, i2: int) -> float:
    """Inner double sum  sum_{d1,d2} coeff[d1,d2] * f[i1+d1, i2+d2]  at an interior node."""
    if which == "K":
        c = s.k_hat
    elif which == "M":
        c = s.m_hat
    else:
        raise ValidationError(f"which must be 'K' or 'M', got {which!r}")
    if classify(f.grid, i1, i2) is not NodeKind.INTERIOR:
        raise ValidationError(f"stencil application needs an interior node, got ({i1}, {i2})")
    block = f.values[i1 - 1 : i1 + 2, i2 - 1 : i2 + 2]
    return float(np.sum(c * block))


def dump_text(s: StencilPair) -> str:
    """Plain-text dump of both arrays, 17 significant digits, for golden files."""
    lines = [f"h={s.h:.17g}", "k_hat:"]
    for row in s.k_hat:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    lines.append("m_hat:")
    for row in s.m_hat:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"
