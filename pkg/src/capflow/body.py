"""Convex bodies over the direction cap, encoded by support-function samples.

A body is strictly convex (both principal radii positive at every node) and
satisfies the discrete contact-angle condition at the rim.  All geometric
quantities -- curvature, embedding, volume, areas, inner/outer radii -- are
derived from the support samples through the grid operators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GeneratorFailed, NotConvex, RobinViolation
from .grid import (CapGrid, GridMode, ScalarField, ball_volume, build_grid,
                   deriv1, principal_radii_arrays, robin_residual_arrays,
                   sphere_area)

#: Relative floor of the contact-angle tolerance.  The default check adds an
#: O(dx^2 |h'''|) allowance on top: the one-sided rim stencil carries that
#: truncation error even for bodies satisfying the condition exactly in the
#: continuum, and the third derivative of a legitimate body can be large.
ROBIN_TOL_FLOOR = 1.0e-6


def _rim_third_derivative(grid: CapGrid, h: np.ndarray) -> float:
    dx3 = grid.dx ** 3
    right = abs(-h[-1] + 3.0 * h[-2] - 3.0 * h[-3] + h[-4]) / dx3
    if grid.mode is GridMode.FULL1D:
        left = abs(-h[0] + 3.0 * h[1] - 3.0 * h[2] + h[3]) / dx3
        return max(left, right)
    return right


def default_robin_allowance(grid: CapGrid, h: np.ndarray) -> float:
    """Absolute residual allowance: relative floor plus stencil truncation."""
    scale = float(np.max(np.abs(h)))
    return ROBIN_TOL_FLOOR * scale + grid.dx ** 2 * (
        scale + _rim_third_derivative(grid, h))


@dataclass(frozen=True)
class CapillaryBody:
    """Validated strictly convex body; construct through :func:`from_support`.

    The constructor itself only checks shapes (flows update bodies in ways
    that preserve validity by construction and skip re-validation).
    """

    grid: CapGrid
    h: ScalarField

    @property
    def support(self) -> np.ndarray:
        return self.h.values

    @property
    def capillary_support_values(self) -> np.ndarray:
        """u = h / ell, the support seen from the origin."""
        return self.h.values / self.grid.ell


@dataclass(frozen=True)
class BodyMetrics:
    volume: float
    surface_area: float
    wetting_area: float
    capillary_area: float
    k_min: float
    k_max: float
    lambda_min: float
    lambda_max: float
    rho_minus_cap: float
    rho_plus_cap: float
    rho_minus: float
    rho_plus: float
    rho_minus_approximate: bool = True


def from_support(grid: CapGrid, h: ScalarField | np.ndarray,
                 robin_tol: float | None = None) -> CapillaryBody:
    """Validate support samples and wrap them as a body.

    An explicit robin_tol is relative to sup|h|; by default the check uses
    :func:`default_robin_allowance`, a 1e-6 relative floor plus the measured
    O(dx^2 |h'''|) truncation of the one-sided rim stencil.
    """
    if isinstance(h, ScalarField):
        if h.grid is not grid and h.grid != grid:
            raise ValueError("field belongs to a different grid")
        field = h
    else:
        field = ScalarField(grid, np.asarray(h, dtype=float))
    lam_rad, lam_tan = principal_radii_arrays(grid, field.values)
    worst = int(np.argmin(np.minimum(lam_rad, lam_tan)))
    worst_val = float(min(lam_rad[worst], lam_tan[worst]))
    if worst_val <= 0.0:
        raise NotConvex(
            f"principal radius {worst_val:.6g} <= 0 at node {worst} "
            f"(angle {grid.nodes[worst]:.6g})",
            node_index=worst, value=worst_val)
    res = robin_residual_arrays(grid, field.values)
    sup_res = float(np.max(np.abs(res.boundary)))
    if res.pole is not None:
        sup_res = max(sup_res, abs(res.pole))
    scale = float(np.max(np.abs(field.values)))
    if robin_tol is None:
        allowance = default_robin_allowance(grid, field.values)
    else:
        allowance = robin_tol * scale
    if scale > 0.0 and sup_res > allowance:
        raise RobinViolation(
            f"contact-angle residual {sup_res:.3e} exceeds the allowance "
            f"{allowance:.3e}")
    return CapillaryBody(grid=grid, h=field)


def cap_support(grid: CapGrid, radius: float = 1.0,
                center: float = 0.0) -> ScalarField:
    """Support samples of the spherical cap of the given radius whose wetting
    disk is centered at ``center`` on the floor (FULL1D only for center != 0)."""
    values = radius * grid.ell.copy()
    if center != 0.0:
        if grid.mode is not GridMode.FULL1D:
            raise ValueError("off-center caps require FULL1D mode")
        values = values + center * grid.xi_horizontal
    return ScalarField(grid, values)


def cap_body(grid: CapGrid, radius: float = 1.0,
             center: float = 0.0) -> CapillaryBody:
    return from_support(grid, cap_support(grid, radius, center))


@dataclass(frozen=True)
class AzimuthalSamples:
    """Capillary support resolved in azimuth for an off-axis base point.

    values[i, j] = u_z at polar angle alpha_i and azimuth beta_j, where the
    azimuth runs over [0, pi] (the integrand is even) with the fiber weight
    sphere_area(n-2) * sin(beta)^(n-2) absorbed into ``beta_weights``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    values: np.ndarray
    alpha_weights: np.ndarray  # polar weights with the azimuth factor removed
    beta_weights: np.ndarray

    def quad(self, integrand: np.ndarray) -> float:
        return float(self.alpha_weights @ integrand @ self.beta_weights)


BETA_RESOLUTION = 64


def azimuthal_support(body: CapillaryBody, z: np.ndarray,
                      beta_count: int = BETA_RESOLUTION) -> AzimuthalSamples:
    """u_z on the (polar, azimuth) product grid, z on the first horizontal axis.

    The azimuth beta is the angle between the horizontal part of the
    direction and z, folded to [0, pi]; the remaining fiber is integrated
    analytically (weight sphere_area(n-2) * sin(beta)^(n-2), which is the
    constant 2 for n = 2).
    """
    grid = body.grid
    if grid.mode is not GridMode.AXISYMMETRIC or grid.n < 2:
        raise ValueError("azimuthal sampling needs an AXISYMMETRIC grid, n >= 2")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    z_norm = float(np.linalg.norm(z))
    beta = np.linspace(0.0, math.pi, beta_count)
    if grid.n > 2:
        wbeta = sphere_area(grid.n - 2) * np.sin(beta) ** (grid.n - 2)
    else:
        wbeta = np.full(beta_count, 2.0)
    trap = np.full(beta_count, math.pi / (beta_count - 1))
    trap[0] *= 0.5
    trap[-1] *= 0.5
    beta_weights = wbeta * trap
    # direction . z = |z| sin(alpha) cos(beta)
    u = body.capillary_support_values
    shift = np.outer(grid.xi_horizontal / grid.ell, z_norm * np.cos(beta))
    values = u[:, None] - shift
    alpha_weights = grid.quad_weights / sphere_area(grid.n - 1)
    return AzimuthalSamples(alpha=grid.nodes, beta=beta, values=values,
                            alpha_weights=alpha_weights,
                            beta_weights=beta_weights)


def capillary_support(body: CapillaryBody, z=0.0):
    """Capillary support u_z = (h - <z, direction>) / ell.

    FULL1D: z is a scalar horizontal offset; returns a ScalarField.
    AXISYMMETRIC: z = 0 returns a ScalarField; a nonzero z (vector along the
    first horizontal axis) returns :class:`AzimuthalSamples`.
    """
    grid = body.grid
    if grid.mode is GridMode.FULL1D:
        zval = float(np.atleast_1d(z)[0]) if np.ndim(z) else float(z)
        vals = (body.support - zval * grid.xi_horizontal) / grid.ell
        return ScalarField(grid, vals)
    zvec = np.atleast_1d(np.asarray(z, dtype=float))
    if np.allclose(zvec, 0.0):
        return ScalarField(grid, body.capillary_support_values.copy())
    return azimuthal_support(body, zvec)


def gauss_curvature(body: CapillaryBody) -> ScalarField:
    lam_rad, lam_tan = principal_radii_arrays(body.grid, body.support)
    det = lam_rad * lam_tan ** (body.grid.n - 1)
    return ScalarField(body.grid, 1.0 / det)


def embed(body: CapillaryBody) -> np.ndarray:
    """Surface points from the support samples.

    FULL1D: (N, 2) ambient points (horizontal, vertical).
    AXISYMMETRIC: (N, 2) profile points (radial, vertical); the surface is
    the revolution of the profile.
    """
    grid = body.grid
    h = body.support
    hp = deriv1(h, grid.dx,
                pole_zero=grid.mode is GridMode.AXISYMMETRIC)
    a = grid.nodes
    first = hp * np.cos(a) + h * np.sin(a)
    vertical = -hp * np.sin(a) + h * np.cos(a)
    return np.column_stack([first, vertical])


def volume(body: CapillaryBody) -> float:
    """Enclosed volume: quad(h * det(radii)) / (n + 1)."""
    grid = body.grid
    lam_rad, lam_tan = principal_radii_arrays(grid, body.support)
    det = lam_rad * lam_tan ** (grid.n - 1)
    return grid.quad(body.support * det) / (grid.n + 1)


def wetting_extent(body: CapillaryBody) -> tuple[float, float]:
    """Horizontal extent of the flat face on the floor plane.

    FULL1D: (left, right) endpoints h(+-theta)/sin(theta).
    AXISYMMETRIC: (0, rim radius).
    """
    grid = body.grid
    h = body.support
    right = float(h[-1] / grid.sin_theta)
    if grid.mode is GridMode.FULL1D:
        left = float(-h[0] / grid.sin_theta)
        return left, right
    return 0.0, right


def _golden_max(f, a: float, b: float, tol_rel: float = 1e-12) -> tuple[float, float]:
    """Golden-section maximization of a unimodal function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    tol = tol_rel * max(abs(a), abs(b), b - a)
    x1 = a + invphi2 * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + invphi2 * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    x = (a + b) / 2.0
    return x, f(x)


def metrics(body: CapillaryBody) -> BodyMetrics:
    """All first-class scalar diagnostics of a body.

    Cap radii optimize the base point of the largest inscribed / smallest
    circumscribed contact-angle cap; FULL1D searches the wetting interval by
    golden section, AXISYMMETRIC uses the symmetry center.  The classical
    inner radius extends the support beyond the direction cap through the rim
    contact set (exact for this smooth class, still flagged approximate
    because the data only covers cap directions).
    """
    grid = body.grid
    h = body.support
    lam_rad, lam_tan = principal_radii_arrays(grid, h)
    if grid.mode is GridMode.FULL1D:
        lam_all = lam_rad
    else:
        lam_all = np.concatenate([lam_rad, lam_tan])
    det = lam_rad * lam_tan ** (grid.n - 1)
    K = 1.0 / det
    surface = grid.quad(det)
    left, right = wetting_extent(body)
    if grid.mode is GridMode.FULL1D:
        wetting = right - left
    else:
        wetting = ball_volume(grid.n) * right ** grid.n
    capillary_area = surface - grid.cos_theta * wetting
    vol = grid.quad(h * det) / (grid.n + 1)
    ell = grid.ell
    xi1 = grid.xi_horizontal
    points = embed(body)

    if grid.mode is GridMode.FULL1D:
        margin = 1e-9 * (right - left)
        lo, hi = left + margin, right - margin
        _, rho_minus_cap = _golden_max(
            lambda z: float(np.min((h - z * xi1) / ell)), lo, hi)
        _, neg = _golden_max(
            lambda z: -float(np.max((h - z * xi1) / ell)), lo, hi)
        rho_plus_cap = -neg
        _, rho_minus = _golden_max(
            lambda z: float(np.min(h - z * xi1)), lo, hi)
        _, neg = _golden_max(
            lambda z: -float(np.max(np.hypot(points[:, 0] - z, points[:, 1]))),
            lo, hi)
        rho_plus = -neg
    else:
        u = h / ell
        rho_minus_cap = float(np.min(u))
        rho_plus_cap = float(np.max(u))
        rho_minus = float(np.min(h))
        rho_plus = float(np.max(np.hypot(points[:, 0], points[:, 1])))

    return BodyMetrics(
        volume=vol,
        surface_area=surface,
        wetting_area=wetting,
        capillary_area=capillary_area,
        k_min=float(np.min(K)),
        k_max=float(np.max(K)),
        lambda_min=float(np.min(lam_all)),
        lambda_max=float(np.max(lam_all)),
        rho_minus_cap=rho_minus_cap,
        rho_plus_cap=rho_plus_cap,
        rho_minus=rho_minus,
        rho_plus=rho_plus,
    )


def random_body(grid: CapGrid, amplitude: float, mode_count: int,
                seed: int) -> CapillaryBody:
    """Deterministic perturbed body that satisfies the contact condition
    exactly in the continuum.

    The capillary support is u = 1 + sum_j c_j * basis_j with |c_j| <=
    amplitude / j^2 drawn from the seed, where every basis function has zero
    normal derivative at the rim (and at the pole in AXISYMMETRIC mode), so
    h = ell * u inherits the exact rim identity of ell.  The amplitude is
    halved and redrawn on convexity failure, at most 10 times.
    """
    if not (0.0 <= amplitude <= 0.5):
        raise ValueError(f"amplitude {amplitude} not in [0, 0.5]")
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    rng = np.random.default_rng(seed)
    j = np.arange(1, mode_count + 1)
    coeffs = rng.uniform(-1.0, 1.0, size=mode_count) / j ** 2
    theta = grid.theta
    if grid.mode is GridMode.FULL1D:
        phases = np.outer(j, math.pi * (grid.nodes + theta) / (2.0 * theta))
    else:
        phases = np.outer(j, math.pi * grid.nodes / theta)
    basis = np.cos(phases)
    amp = amplitude
    for _ in range(11):
        u = 1.0 + amp * coeffs @ basis
        h = grid.ell * u
        try:
            return from_support(grid, ScalarField(grid, h))
        except NotConvex:
            amp *= 0.5
    raise GeneratorFailed(
        f"no convex body after 10 halvings (seed {seed}, "
        f"amplitude {amplitude}, modes {mode_count})")


SNAPSHOT_CREATOR = "capflow/0.1.0"


def snapshot_dict(body: CapillaryBody, label: str = "") -> dict:
    return {
        "n": body.grid.n,
        "theta": body.grid.theta,
        "mode": body.grid.mode.value,
        "node_count": body.grid.node_count,
        "h": [float(v) for v in body.support],
        "meta": {"label": label, "created_by": SNAPSHOT_CREATOR},
    }


def write_snapshot(path: str | Path, body: CapillaryBody,
                   label: str = "") -> None:
    from .output import write_json
    write_json(path, snapshot_dict(body, label))


def load_snapshot(path: str | Path) -> CapillaryBody:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    grid = build_grid(int(data["n"]), float(data["theta"]),
                      int(data["node_count"]), GridMode(data["mode"]))
    return from_support(grid, np.asarray(data["h"], dtype=float))
