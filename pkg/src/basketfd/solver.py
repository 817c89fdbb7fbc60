"""Crank-Nicolson time stepping of the semi-discrete compact scheme.

Each step solves

    [M_hat + (dtau/2) K_hat] U^{k+1} = [M_hat - (dtau/2) K_hat] U^k + dtau*g

on the interior, with Dirichlet identity rows carrying the boundary data at
tau_{k+1}. The operator is constant in time, so it is assembled once; the
number of steps is chosen as N_tau = ceil(T / (mesh_ratio h^2)) and
dtau = T / N_tau, which lands exactly on tau = T while keeping
dtau in O(h^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BasketPutBoundary
from .errors import NumericalError, ValidationError
from .grid import Grid2, GridField, boundary_mask, interpolate_bicubic
from .linsolve import (
    STATUS_CONVERGED,
    STATUS_MAXITER,
    bicgstab_stencil,
    extrapolate_guess,
    rhs_with_boundary,
    stencil_matvec,
)
from .model import MarketParams, payoff_transformed, to_log_coords, undo_value_transform
from .smoothing import smooth_initial_condition
from .stencil import StencilPair, coefficients_for

SCHEMES = ("hoc", "second_order")

_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class SolveConfig:
    """Scheme selection and stepping/solver knobs."""

    scheme: str = "hoc"
    mesh_ratio: float = 0.4
    tol: float = 1e-11
    max_iterations: int = 400
    smoothing: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.mesh_ratio <= 0.0:
            raise ValidationError(f"mesh ratio must be positive, got {self.mesh_ratio}")
        if self.tol <= 0.0:
            raise ValidationError(f"solver tolerance must be positive, got {self.tol}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")


@dataclass(frozen=True)
class DiscreteSystem:
    """Fully discrete stepping operator: lhs/rhs 3x3 stencils plus identity
    rows on the boundary."""

    grid: Grid2
    lhs: np.ndarray
    rhs_op: np.ndarray
    dtau: float
    n_steps: int

    def dirichlet_mask(self) -> np.ndarray:
        return boundary_mask(self.grid)


def assemble(grid: Grid2, s: StencilPair, dtau: float, n_steps: int = 1) -> DiscreteSystem:
    """Build the Crank-Nicolson pair lhs = M + (dtau/2) K, rhs = M - (dtau/2) K."""
    if abs(s.h - grid.h) > 1e-12 * grid.h:
        raise ValidationError(f"stencil built for h={s.h}, grid has h={grid.h}")
    if dtau < 0.0:
        raise ValidationError(f"time step must be non-negative, got {dtau}")
    if n_steps < 1:
        raise ValidationError("n_steps must be at least 1")
    half = 0.5 * dtau
    lhs = s.m_hat + half * s.k_hat
    rhs = s.m_hat - half * s.k_hat
    splitting_gap = np.abs(lhs + rhs - 2.0 * s.m_hat).max()
    if splitting_gap > _IDENTITY_TOL * max(1.0, np.abs(s.m_hat).max()):
        raise NumericalError("Crank-Nicolson splitting identity violated",
                             gap=float(splitting_gap))
    return DiscreteSystem(grid, lhs, rhs, dtau, n_steps)


def solve_linear(sys: DiscreteSystem, b: np.ndarray, tol: float = 1e-11,
                 x0: np.ndarray | None = None,
                 max_iterations: int = 400) -> tuple[np.ndarray, dict]:
    """Solve lhs x = b to ||lhs x - b||_2 <= tol ||b||_2; returns (x, info)."""
    b = np.ascontiguousarray(b, dtype=float)
    if b.shape != sys.grid.shape:
        raise ValidationError(f"rhs shape {b.shape} does not match grid {sys.grid.shape}")
    x = np.array(x0, dtype=float, copy=True) if x0 is not None else b.copy()
    if x.shape != b.shape:
        raise ValidationError("initial guess shape mismatch")
    status, iters, relres = bicgstab_stencil(sys.lhs, b, x, tol, max_iterations)
    if status != STATUS_CONVERGED:
        reason = "max iterations exceeded" if status == STATUS_MAXITER else "breakdown"
        raise NumericalError(
            f"linear solver failed: {reason}",
            iterations=int(iters),
            relative_residual=float(relres),
            tolerance=float(tol),
        )
    return x, {"iterations": int(iters), "relative_residual": float(relres)}


def step(sys: DiscreteSystem, u_k: np.ndarray, bc_next: np.ndarray,
         tol: float = 1e-11, x0: np.ndarray | None = None,
         max_iterations: int = 400,
         forcing: np.ndarray | None = None) -> tuple[np.ndarray, dict]:
    """Advance one Crank-Nicolson step; bc_next carries the Dirichlet data at
    tau_{k+1} in its boundary entries."""
    u_k = np.ascontiguousarray(u_k, dtype=float)
    rhs = np.empty_like(u_k)
    rhs_with_boundary(sys.rhs_op, u_k, bc_next, rhs)
    if forcing is not None:
        rhs[1:-1, 1:-1] += sys.dtau * np.asarray(forcing, dtype=float)[1:-1, 1:-1]
    return solve_linear(sys, rhs, tol=tol, x0=x0, max_iterations=max_iterations)


@dataclass
class RunResult:
    field: GridField
    dtau: float
    n_steps: int
    total_iterations: int
    max_relative_residual: float


def n_time_steps(p: MarketParams, grid: Grid2, mesh_ratio: float) -> int:
    return max(1, math.ceil(p.T / (mesh_ratio * grid.h * grid.h)))


def initial_condition(p: MarketParams, grid: Grid2, smoothing: bool) -> GridField:
    if smoothing:
        return smooth_initial_condition(grid, p)
    return GridField.from_function(grid, lambda x1, x2: payoff_transformed(x1, x2, p))


def run(p: MarketParams, grid: Grid2, cfg: SolveConfig,
        boundary=None, initial: GridField | None = None,
        callback=None) -> RunResult:
    """March the solution from tau = 0 to tau = T; returns the final field.

    `boundary` is any object with fill(out, tau); defaults to the basket-put
    boundary built from the (optionally smoothed) payoff. `callback(k, tau,
    values)` is invoked after every accepted step.
    """
    stencil = coefficients_for(cfg.scheme, p, grid.h)
    n_steps = n_time_steps(p, grid, cfg.mesh_ratio)
    dtau = p.T / n_steps
    sys = assemble(grid, stencil, dtau, n_steps)

    if initial is None:
        initial = initial_condition(p, grid, cfg.smoothing)
    elif initial.grid != grid:
        raise ValidationError("initial field lives on a different grid")
    if boundary is None:
        boundary = BasketPutBoundary(grid, p, initial)

    u = initial.values.copy()
    u_prev = u.copy()
    bc = np.zeros_like(u)
    guess = np.empty_like(u)
    total_iters = 0
    worst_res = 0.0

    for k in range(n_steps):
        tau_next = (k + 1) * dtau if k + 1 < n_steps else p.T
        boundary.fill(bc, tau_next)
        if k == 0:
            guess[:, :] = u
            guess[0, :], guess[-1, :] = bc[0, :], bc[-1, :]
            guess[:, 0], guess[:, -1] = bc[:, 0], bc[:, -1]
        else:
            extrapolate_guess(u, u_prev, bc, guess)
        rhs = np.empty_like(u)
        rhs_with_boundary(sys.rhs_op, u, bc, rhs)
        u_prev, u = u, u_prev  # recycle buffers
        u[:, :] = guess
        status, iters, relres = bicgstab_stencil(sys.lhs, rhs, u, cfg.tol,
                                                 cfg.max_iterations)
        if status != STATUS_CONVERGED:
            reason = "max iterations exceeded" if status == STATUS_MAXITER else "breakdown"
            raise NumericalError(
                f"time step {k + 1}/{n_steps} failed: {reason}",
                tau=float(tau_next),
                iterations=int(iters),
                relative_residual=float(relres),
            )
        total_iters += iters
        worst_res = max(worst_res, relres)
        if callback is not None:
            callback(k + 1, tau_next, u)

    return RunResult(GridField(grid, u.copy()), dtau, n_steps, total_iters, worst_res)


def price_at_spots(result_field: GridField, p: MarketParams, s1: float, s2: float) -> float:
    """Read the option price off a final-time transformed field at spots (s1, s2)."""
    x1, x2 = to_log_coords(s1, s2, p)
    u = interpolate_bicubic(result_field, float(x1), float(x2))
    return float(undo_value_transform(u, p.T, p))


__all__ = [
    "SCHEMES",
    "SolveConfig",
    "DiscreteSystem",
    "assemble",
    "solve_linear",
    "step",
    "run",
    "RunResult",
    "n_time_steps",
    "initial_condition",
    "price_at_spots",
    "stencil_matvec",
]
