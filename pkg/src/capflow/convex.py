"""Static convex-geometry toolkit over the direction cap.

Contains the contact-angle gauge and its dual, the associated unit-level-set
map, polar-body volumes, the Santalo point (polar-volume minimizer), the
entropy functional with its maximizing base point, the power-mean entropy
family, and the Blaschke-Santalo product check.

Base points z live on the floor plane.  FULL1D searches the open wetting
interval (shrunk by a relative margin) with safeguarded Newton; AXISYMMETRIC
bodies take z = 0 by symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .body import (AzimuthalSamples, CapillaryBody, capillary_support,
                   volume, wetting_extent)
from .errors import MaxIterations, NoInteriorMinimum, NonpositiveSupport
from .grid import GridMode, ball_volume

#: Relative shrink of the admissible base-point interval, keeping the
#: negative powers and logarithms of u_z away from the rim blow-up.
SEARCH_MARGIN = 1.0e-6

NEWTON_TOL = 1.0e-10
NEWTON_MAX_ITER = 100


# ---------------------------------------------------------------------------
# Gauge functions and the unit-level-set map
# ---------------------------------------------------------------------------

def gauge(theta: float, x: np.ndarray) -> np.ndarray | float:
    """Contact gauge |x| - cos(theta) * x_vertical (vertical = last axis)."""
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x, axis=-1)
    return norm - math.cos(theta) * x[..., -1]


def dual_gauge(theta: float, x: np.ndarray) -> np.ndarray | float:
    """Dual gauge; its r-level set is the contact-angle cap of radius r."""
    x = np.asarray(x, dtype=float)
    s, c = math.sin(theta), math.cos(theta)
    cot = c / s
    down = -x[..., -1]  # component along the downward axis
    norm2 = np.sum(x * x, axis=-1)
    return (np.sqrt(norm2 + cot ** 2 * down ** 2) - cot * down) / s


def cahn_hoffman(theta: float, x: np.ndarray) -> np.ndarray:
    """Anisotropic normal map x -> (x + cos(theta) e_vert) / ell(x) with the
    affine weight ell(x) = sin(theta)^2 - cos(theta) * x_vertical.

    Restricted to cap directions it lands on the unit gauge level set:
    gauge(theta, cahn_hoffman(theta, xi)) = 1 exactly.
    """
    x = np.asarray(x, dtype=float)
    c = math.cos(theta)
    ell = math.sin(theta) ** 2 - c * x[..., -1]
    shifted = x.copy()
    shifted[..., -1] = shifted[..., -1] + c
    return shifted / ell[..., None]


def cahn_hoffman_jacobian(theta: float, x: np.ndarray,
                          step: float = 1.0e-5) -> float:
    """Determinant of the ambient Jacobian of the map, by central differences.

    The closed form is ell(x)^-(d+1) for points in R^d; on cap directions of
    an n-surface problem (d = n + 1) this is ell^-(n+2).
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    jac = np.empty((d, d))
    for j in range(d):
        dx = np.zeros(d)
        dx[j] = step
        jac[:, j] = (cahn_hoffman(theta, x + dx)
                     - cahn_hoffman(theta, x - dx)) / (2.0 * step)
    return float(np.linalg.det(jac))


# ---------------------------------------------------------------------------
# Polar volume, entropy, and their optimal base points
# ---------------------------------------------------------------------------

def _uz_or_raise(body: CapillaryBody, z) -> np.ndarray | AzimuthalSamples:
    uz = capillary_support(body, z)
    vals = uz.values
    if float(np.min(vals)) <= 0.0:
        raise NonpositiveSupport(
            f"min u_z = {float(np.min(vals)):.6g} <= 0 at z = {z}")
    return uz


def polar_volume(body: CapillaryBody, z=0.0) -> float:
    """Volume of the polar body seen from z: quad(ell * u_z^-(n+1)) / (n+1)."""
    grid = body.grid
    n = grid.n
    uz = _uz_or_raise(body, z)
    if isinstance(uz, AzimuthalSamples):
        integrand = grid.ell[:, None] * uz.values ** (-(n + 1))
        return uz.quad(integrand) / (n + 1)
    return grid.quad(grid.ell * uz.values ** (-(n + 1))) / (n + 1)


def entropy(body: CapillaryBody, z=0.0) -> float:
    """Mean of log u_z against the contact weight, normalized by quad(ell)."""
    grid = body.grid
    omega = grid.quad(grid.ell)
    uz = _uz_or_raise(body, z)
    if isinstance(uz, AzimuthalSamples):
        integrand = grid.ell[:, None] * np.log(uz.values)
        return uz.quad(integrand) / omega
    return grid.quad(grid.ell * np.log(uz.values)) / omega


def alpha_entropy(body: CapillaryBody, z=0.0, alpha: float = 1.0) -> float:
    """Power-mean entropy; continuous in alpha with the log mean at alpha=1."""
    if alpha <= 0.0:
        raise ValueError(f"alpha {alpha} must be positive")
    if alpha == 1.0:
        return entropy(body, z)
    grid = body.grid
    omega = grid.quad(grid.ell)
    uz = _uz_or_raise(body, z)
    p = 1.0 - 1.0 / alpha
    if isinstance(uz, AzimuthalSamples):
        mean = uz.quad(grid.ell[:, None] * uz.values ** p) / omega
    else:
        mean = grid.quad(grid.ell * uz.values ** p) / omega
    return alpha / (alpha - 1.0) * math.log(mean)


def _search_interval(body: CapillaryBody) -> tuple[float, float]:
    left, right = wetting_extent(body)
    margin = SEARCH_MARGIN * (right - left)
    return left + margin, right - margin


def _newton_1d(value_deriv, lo: float, hi: float, scale_fn,
               increasing: bool, tol: float = NEWTON_TOL):
    """Safeguarded Newton for a monotone derivative g on [lo, hi].

    value_deriv(z) -> (g, g'); ``increasing`` states the sign of g'.  Keeps a
    sign-change bracket and falls back to bisection whenever the Newton step
    leaves it.  Converged when |g| <= tol * scale_fn(z).
    """
    g_lo, _ = value_deriv(lo)
    g_hi, _ = value_deriv(hi)
    if not increasing:
        g_lo, g_hi = -g_lo, -g_hi
    if g_lo > 0.0 or g_hi < 0.0:
        raise NoInteriorMinimum(
            "first-order condition has no sign change inside the wetting "
            "region; the body is invalid")
    a, b = lo, hi
    z = 0.5 * (a + b)
    for _ in range(NEWTON_MAX_ITER):
        g, gp = value_deriv(z)
        if abs(g) <= tol * scale_fn(z):
            return z
        gs = g if increasing else -g
        if gs > 0.0:
            b = z
        else:
            a = z
        z_new = z - g / gp if gp != 0.0 else math.inf
        if not (a < z_new < b):
            z_new = 0.5 * (a + b)
        z = z_new
    raise MaxIterations(f"no convergence in {NEWTON_MAX_ITER} iterations")


def santalo_point(body: CapillaryBody):
    """Unique minimizer of the polar volume over interior base points.

    Returns (z, min polar volume).  The first-order condition is
    quad(xi_1 * u_z^-(n+2)) = 0; the objective is strictly convex in z.
    """
    grid = body.grid
    n = grid.n
    if grid.mode is GridMode.AXISYMMETRIC:
        return np.zeros(n), polar_volume(body, 0.0)
    h = body.support
    xi1 = grid.xi_horizontal
    ell = grid.ell
    w = grid.quad_weights

    def value_deriv(z):
        uz = (h - z * xi1) / ell
        um = uz ** (-(n + 2))
        g = float(np.dot(w, xi1 * um))
        gp = float((n + 2) * np.dot(w, xi1 ** 2 * um / (uz * ell)))
        return g, gp

    def scale(z):
        uz = (h - z * xi1) / ell
        return float(np.dot(w, np.abs(xi1) * uz ** (-(n + 2))))

    lo, hi = _search_interval(body)
    z = _newton_1d(value_deriv, lo, hi, scale, increasing=True)
    return z, polar_volume(body, z)


def entropy_point(body: CapillaryBody):
    """Unique maximizer of the entropy over interior base points.

    Returns (z, entropy value); first-order condition quad(xi_1 / u_z) = 0.
    """
    grid = body.grid
    if grid.mode is GridMode.AXISYMMETRIC:
        return np.zeros(grid.n), entropy(body, 0.0)
    h = body.support
    xi1 = grid.xi_horizontal
    ell = grid.ell
    w = grid.quad_weights

    def value_deriv(z):
        hz = h - z * xi1
        g = float(np.dot(w, xi1 * ell / hz))
        gp = float(np.dot(w, xi1 ** 2 * ell / hz ** 2))
        return g, gp

    def scale(z):
        hz = h - z * xi1
        return float(np.dot(w, np.abs(xi1) * ell / hz))

    lo, hi = _search_interval(body)
    z = _newton_1d(value_deriv, lo, hi, scale, increasing=True)
    return z, entropy(body, z)


def orthogonality_residuals(body: CapillaryBody, z_santalo, z_entropy):
    """Normalized first-order residuals at the two optimal base points."""
    grid = body.grid
    n = grid.n
    if grid.mode is GridMode.AXISYMMETRIC:
        # exact zero by the analytic azimuth integral
        return [0.0], [0.0]
    w, xi1, ell, h = (grid.quad_weights, grid.xi_horizontal, grid.ell,
                      body.support)
    us = (h - float(z_santalo) * xi1) / ell
    ue = (h - float(z_entropy) * xi1) / ell
    rs = np.dot(w, xi1 * us ** (-(n + 2)))
    rs_scale = np.dot(w, np.abs(xi1) * us ** (-(n + 2)))
    re = np.dot(w, xi1 / ue)
    re_scale = np.dot(w, np.abs(xi1) / ue)
    return [float(rs / rs_scale)], [float(re / re_scale)]


def blaschke_santalo_check(body: CapillaryBody):
    """(product, bound, margin) with product = vol * min polar volume and
    bound = half the squared unit-ball volume; margin = bound - product."""
    vol = volume(body)
    _, vmin = santalo_point(body)
    product = vol * vmin
    bound = 0.5 * ball_volume(body.grid.n + 1) ** 2
    return product, bound, bound - product


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToolkitReport:
    polar_volume_at: dict
    santalo_point: object
    santalo_volume: float
    entropy_point: object
    entropy_value: float
    bs_product: float
    bs_bound: float
    orthogonality_residuals: dict

    def to_dict(self) -> dict:
        def point(z):
            return [float(v) for v in np.atleast_1d(z)]
        return {
            "polar_volume_at": self.polar_volume_at,
            "santalo_point": point(self.santalo_point),
            "santalo_volume": self.santalo_volume,
            "entropy_point": point(self.entropy_point),
            "entropy_value": self.entropy_value,
            "bs_product": self.bs_product,
            "bs_bound": self.bs_bound,
            "orthogonality_residuals": self.orthogonality_residuals,
        }


def _fmt_point(z) -> str:
    vals = np.atleast_1d(np.asarray(z, dtype=float))
    return ",".join(f"{v:.17g}" for v in vals)


def build_toolkit_report(body: CapillaryBody) -> ToolkitReport:
    zs, vmin = santalo_point(body)
    ze, evalue = entropy_point(body)
    vol = volume(body)
    bound = 0.5 * ball_volume(body.grid.n + 1) ** 2
    res_s, res_e = orthogonality_residuals(body, zs, ze)
    pv = {
        _fmt_point(0.0 if body.grid.mode is GridMode.FULL1D
                   else np.zeros(body.grid.n)): polar_volume(body, 0.0),
        _fmt_point(zs): vmin,
    }
    return ToolkitReport(
        polar_volume_at=pv,
        santalo_point=zs,
        santalo_volume=vmin,
        entropy_point=ze,
        entropy_value=evalue,
        bs_product=vol * vmin,
        bs_bound=bound,
        orthogonality_residuals={"santalo": res_s, "entropy": res_e},
    )
