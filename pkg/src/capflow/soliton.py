"""Stationary self-similar profiles, solved directly by damped Newton.

The stationary equation of the normalized flow is

    G(h) = h * det(radii(h))^alpha - lam * ell = 0   on the cap,

together with the contact-angle condition at the rim (and the smooth-pole
condition in AXISYMMETRIC mode).  Newton linearizes

    dG = det^alpha dh + alpha h det^alpha * a^ij (Hess dh + dh sigma)_ij,

which is tridiagonal in 1-D; the boundary rows impose the conditions on dh so
every iterate satisfies them exactly.  The linear solves use a direct banded
factorization (bandwidth 2: the one-sided edge stencils reach two neighbors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .body import CapillaryBody
from .errors import NewtonStalled
from .grid import (CapGrid, GridMode, ScalarField, enforce_boundary,
                   principal_radii_arrays)

MAX_HALVINGS = 30
MAX_NEWTON_ITER = 60


@dataclass(frozen=True)
class SolitonResidual:
    field: ScalarField
    sup: float
    l2: float


@dataclass(frozen=True)
class SolitonReport:
    residual_sup: float
    residual_l2: float
    newton_iterations: int
    converged: bool
    distance_to_cap: float
    residual_history: tuple


def _residual_arrays(grid: CapGrid, h: np.ndarray, alpha: float,
                     lam: float) -> np.ndarray:
    lam_r, lam_t = principal_radii_arrays(grid, h)
    det = lam_r * lam_t ** (grid.n - 1)
    return h * det ** alpha - lam * grid.ell


def residual(body: CapillaryBody, alpha: float = 1.0,
             lam: float = 1.0) -> SolitonResidual:
    """Per-node stationarity defect, with norms relative to sup ell."""
    grid = body.grid
    G = _residual_arrays(grid, body.support, alpha, lam)
    sup_ell = float(np.max(grid.ell))
    sup = float(np.max(np.abs(G))) / sup_ell
    l2 = math.sqrt(float(grid.quad(G * G))) / sup_ell
    return SolitonResidual(field=ScalarField(grid, G), sup=sup, l2=l2)


def _assemble_banded(grid: CapGrid, h: np.ndarray, alpha: float):
    """Banded Jacobian (l = u = 2) with boundary-condition rows."""
    N = grid.node_count
    dx = grid.dx
    dx2 = dx * dx
    n = grid.n
    lam_r, lam_t = principal_radii_arrays(grid, h)
    det = lam_r * lam_t ** (n - 1)
    det_a = det ** alpha
    q = alpha * h * det_a
    ab = np.zeros((5, N))

    def put(i, j, val):
        ab[2 + i - j, j] += val

    if grid.mode is GridMode.FULL1D:
        # interior rows: dG = det^a dh + q * (d2 dh + dh) / lam_r
        for i in range(1, N - 1):
            qi = q[i] / lam_r[i]
            put(i, i - 1, qi / dx2)
            put(i, i, det_a[i] + qi * (1.0 - 2.0 / dx2))
            put(i, i + 1, qi / dx2)
        cot = grid.cot_theta
        put(0, 0, 3.0 / (2.0 * dx) - cot)
        put(0, 1, -2.0 / dx)
        put(0, 2, 1.0 / (2.0 * dx))
    else:
        cotn = grid.cot_nodes
        for i in range(1, N - 1):
            qa = q[i] / lam_r[i]
            qb = q[i] * (n - 1) / lam_t[i]
            put(i, i - 1, qa / dx2 - qb * cotn[i] / (2.0 * dx))
            put(i, i, det_a[i] + qa * (1.0 - 2.0 / dx2) + qb)
            put(i, i + 1, qa / dx2 + qb * cotn[i] / (2.0 * dx))
        # pole row: dh'(0) = 0
        put(0, 0, -3.0 / (2.0 * dx))
        put(0, 1, 2.0 / dx)
        put(0, 2, -1.0 / (2.0 * dx))
    cot = grid.cot_theta
    put(N - 1, N - 3, 1.0 / (2.0 * dx))
    put(N - 1, N - 2, -2.0 / dx)
    put(N - 1, N - 1, 3.0 / (2.0 * dx) - cot)
    return ab


def _interior_sup(grid: CapGrid, G: np.ndarray) -> float:
    return float(np.max(np.abs(G[1:-1])))


def newton_solve(initial: CapillaryBody, alpha: float = 1.0,
                 lam: float = 1.0, newton_tol: float = 1.0e-10
                 ) -> tuple[CapillaryBody, SolitonReport]:
    """Damped Newton from a valid body; iterates keep the boundary conditions
    exactly, so convergence is judged on the interior equation rows."""
    grid = initial.grid
    sup_ell = float(np.max(grid.ell))
    h = initial.support.copy()
    enforce_boundary(grid, h)

    G = _residual_arrays(grid, h, alpha, lam)
    history = [_interior_sup(grid, G) / sup_ell]
    iterations = 0
    converged = history[-1] <= newton_tol
    while not converged and iterations < MAX_NEWTON_ITER:
        ab = _assemble_banded(grid, h, alpha)
        rhs = -G
        rhs[0] = 0.0
        rhs[-1] = 0.0
        delta = solve_banded((2, 2), ab, rhs)
        s = 1.0
        base = history[-1]
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            trial = h + s * delta
            lam_r, lam_t = principal_radii_arrays(grid, trial)
            if min(lam_r.min(), lam_t.min()) > 0.0:
                G_trial = _residual_arrays(grid, trial, alpha, lam)
                if _interior_sup(grid, G_trial) / sup_ell < base:
                    h = trial
                    G = G_trial
                    accepted = True
                    break
            s *= 0.5
        if not accepted:
            raise NewtonStalled(
                f"no residual decrease after {MAX_HALVINGS} halvings "
                f"(residual {base:.3e})")
        iterations += 1
        history.append(_interior_sup(grid, G) / sup_ell)
        converged = history[-1] <= newton_tol

    body = CapillaryBody(grid, ScalarField(grid, h))
    res_l2 = math.sqrt(float(grid.quad(G * G))) / sup_ell
    report = SolitonReport(
        residual_sup=history[-1],
        residual_l2=res_l2,
        newton_iterations=iterations,
        converged=converged,
        distance_to_cap=float(np.max(np.abs(h - grid.ell))),
        residual_history=tuple(history),
    )
    return body, report
