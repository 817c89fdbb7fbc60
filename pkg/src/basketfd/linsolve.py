"""Stabilised bi-conjugate-gradient solver for the 9-diagonal stepping systems.

The operator is never materialised: interior rows apply a constant 3x3
stencil, boundary rows are identity. Matrix-vector products and the whole
BiCGStab recurrence run inside numba-compiled loops on the 2D node arrays,
with Jacobi (diagonal) preconditioning. Entirely serial so repeated runs are
bitwise reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_CONVERGED = 0
STATUS_MAXITER = 1
STATUS_BREAKDOWN = 2


@njit(cache=True, fastmath=True)
def stencil_matvec(c, x, out):
    """out = A x with identity boundary rows and 3x3 interior stencil c."""
    n1, n2 = x.shape
    for j in range(n2):
        out[0, j] = x[0, j]
        out[n1 - 1, j] = x[n1 - 1, j]
    c00, c01, c02 = c[0, 0], c[0, 1], c[0, 2]
    c10, c11, c12 = c[1, 0], c[1, 1], c[1, 2]
    c20, c21, c22 = c[2, 0], c[2, 1], c[2, 2]
    for i in range(1, n1 - 1):
        out[i, 0] = x[i, 0]
        out[i, n2 - 1] = x[i, n2 - 1]
        for j in range(1, n2 - 1):
            out[i, j] = (
                c00 * x[i - 1, j - 1] + c01 * x[i - 1, j] + c02 * x[i - 1, j + 1]
                + c10 * x[i, j - 1] + c11 * x[i, j] + c12 * x[i, j + 1]
                + c20 * x[i + 1, j - 1] + c21 * x[i + 1, j] + c22 * x[i + 1, j + 1]
            )


@njit(cache=True, fastmath=True)
def _dot(a, b):
    n1, n2 = a.shape
    acc = 0.0
    for i in range(n1):
        for j in range(n2):
            acc += a[i, j] * b[i, j]
    return acc


@njit(cache=True, fastmath=True)
def _norm2(a):
    return np.sqrt(_dot(a, a))


@njit(cache=True, fastmath=True)
def _jacobi(c11, v, out):
    """out = D^{-1} v: interior diagonal c11, boundary diagonal 1."""
    n1, n2 = v.shape
    inv = 1.0 / c11
    for j in range(n2):
        out[0, j] = v[0, j]
        out[n1 - 1, j] = v[n1 - 1, j]
    for i in range(1, n1 - 1):
        out[i, 0] = v[i, 0]
        out[i, n2 - 1] = v[i, n2 - 1]
        for j in range(1, n2 - 1):
            out[i, j] = v[i, j] * inv


@njit(cache=True, fastmath=True)
def bicgstab_stencil(c, b, x, tol, maxiter):
    """Solve A x = b in place starting from x; returns (status, iters, relres).

    Relative residual is measured against ||b||_2. The boundary entries of x
    are forced to b's (identity rows), so every Krylov iterate keeps a zero
    boundary residual.
    """
    n1, n2 = b.shape
    for j in range(n2):
        x[0, j] = b[0, j]
        x[n1 - 1, j] = b[n1 - 1, j]
    for i in range(n1):
        x[i, 0] = b[i, 0]
        x[i, n2 - 1] = b[i, n2 - 1]

    bnorm = _norm2(b)
    if bnorm == 0.0:
        x[:, :] = 0.0
        return STATUS_CONVERGED, 0, 0.0
    target = tol * bnorm

    r = np.empty_like(b)
    stencil_matvec(c, x, r)
    for i in range(n1):
        for j in range(n2):
            r[i, j] = b[i, j] - r[i, j]
    rnorm = _norm2(r)
    if rnorm <= target:
        return STATUS_CONVERGED, 0, rnorm / bnorm

    rhat = r.copy()
    p = np.zeros_like(b)
    v = np.zeros_like(b)
    phat = np.empty_like(b)
    shat = np.empty_like(b)
    t = np.empty_like(b)

    rho_old = 1.0
    alpha = 1.0
    omega = 1.0
    tiny = 1e-300

    for it in range(1, maxiter + 1):
        rho = _dot(rhat, r)
        if abs(rho) < tiny:
            return STATUS_BREAKDOWN, it, rnorm / bnorm
        beta = (rho / rho_old) * (alpha / omega)
        for i in range(n1):
            for j in range(n2):
                p[i, j] = r[i, j] + beta * (p[i, j] - omega * v[i, j])
        _jacobi(c[1, 1], p, phat)
        stencil_matvec(c, phat, v)
        denom = _dot(rhat, v)
        if abs(denom) < tiny:
            return STATUS_BREAKDOWN, it, rnorm / bnorm
        alpha = rho / denom
        # s lives in r
        for i in range(n1):
            for j in range(n2):
                r[i, j] = r[i, j] - alpha * v[i, j]
        snorm = _norm2(r)
        if snorm <= target:
            for i in range(n1):
                for j in range(n2):
                    x[i, j] += alpha * phat[i, j]
            return STATUS_CONVERGED, it, snorm / bnorm
        _jacobi(c[1, 1], r, shat)
        stencil_matvec(c, shat, t)
        tt = _dot(t, t)
        if tt < tiny:
            return STATUS_BREAKDOWN, it, snorm / bnorm
        omega = _dot(t, r) / tt
        if abs(omega) < tiny:
            return STATUS_BREAKDOWN, it, snorm / bnorm
        for i in range(n1):
            for j in range(n2):
                x[i, j] += alpha * phat[i, j] + omega * shat[i, j]
        for i in range(n1):
            for j in range(n2):
                r[i, j] = r[i, j] - omega * t[i, j]
        rnorm = _norm2(r)
        if rnorm <= target:
            return STATUS_CONVERGED, it, rnorm / bnorm
        rho_old = rho

    return STATUS_MAXITER, maxiter, rnorm / bnorm


@njit(cache=True, fastmath=True)
def rhs_with_boundary(c, u, bc, out):
    """out = stencil(c) u on the interior, bc values on the boundary."""
    n1, n2 = u.shape
    stencil_matvec(c, u, out)
    for j in range(n2):
        out[0, j] = bc[0, j]
        out[n1 - 1, j] = bc[n1 - 1, j]
    for i in range(n1):
        out[i, 0] = bc[i, 0]
        out[i, n2 - 1] = bc[i, n2 - 1]


@njit(cache=True, fastmath=True)
def extrapolate_guess(u_now, u_prev, bc, out):
    """Linear extrapolation 2*u_now - u_prev with exact boundary values."""
    n1, n2 = u_now.shape
    for i in range(n1):
        for j in range(n2):
            out[i, j] = 2.0 * u_now[i, j] - u_prev[i, j]
    for j in range(n2):
        out[0, j] = bc[0, j]
        out[n1 - 1, j] = bc[n1 - 1, j]
    for i in range(n1):
        out[i, 0] = bc[i, 0]
        out[i, n2 - 1] = bc[i, n2 - 1]
