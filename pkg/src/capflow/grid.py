"""Spherical-cap discretization: nodes, quadrature, differential operators.

The computational domain is the set of outward normal directions of a convex
body that meets the floor plane {x_{n+1} = 0} at a fixed contact angle theta.
Directions are parametrized by the polar angle of the unit normal measured
from the vertical axis, so a single 1-D array of angles covers both modes:

* ``FULL1D``       -- planar bodies (n = 1), angles in [-theta, theta];
* ``AXISYMMETRIC`` -- rotationally symmetric bodies (n >= 1), angles in
  [0, theta], with azimuthal directions integrated out analytically.

The contact weight ell(a) = 1 - cos(theta) * cos(a) appears in every integral
and in the boundary condition.  In this chart it satisfies the exact
identities  ell'' + ell = 1  and  d_mu ell = cot(theta) * ell  on the rim,
which makes ell a built-in self-test for the difference operators below.

All derivative stencils are second order: centered in the interior, one-sided
3-point (first derivative) / 4-point (second derivative) at the ends.
Quadrature weights are trapezoid-type with exact cell moments of the
axisymmetric area factor, so integrating the constant 1 reproduces the cap
area to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import AngleOutOfRange, BadNodeCount

MIN_NODE_COUNT = 33

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class GridMode(Enum):
    FULL1D = "full1d"
    AXISYMMETRIC = "axisymmetric"


def sphere_area(m: int) -> float:
    """Surface area of the unit m-sphere embedded in R^{m+1}."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True)
class CapGrid:
    """Uniform angular grid on the direction cap, with quadrature weights.

    ``quad_weights`` integrate over the full cap of directions: plain arc
    length for FULL1D, and  sphere_area(n-1) * sin(a)^(n-1) da  for
    AXISYMMETRIC (azimuth already integrated).
    """

    n: int
    theta: float
    mode: GridMode
    nodes: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.quad_weights.setflags(write=False)

    @property
    def node_count(self) -> int:
        return self.nodes.size

    @cached_property
    def dx(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @cached_property
    def cos_theta(self) -> float:
        return math.cos(self.theta)

    @cached_property
    def sin_theta(self) -> float:
        return math.sin(self.theta)

    @cached_property
    def cot_theta(self) -> float:
        return self.cos_theta / self.sin_theta

    @cached_property
    def ell(self) -> np.ndarray:
        """Contact weight 1 - cos(theta) * cos(a) sampled at the nodes."""
        v = 1.0 - self.cos_theta * np.cos(self.nodes)
        v.setflags(write=False)
        return v

    @cached_property
    def xi_horizontal(self) -> np.ndarray:
        """Signed magnitude of the horizontal part of the direction.

        FULL1D: the first (and only) horizontal coordinate sin(a).
        AXISYMMETRIC: sin(a) >= 0; the azimuthal factor is supplied by
        consumers that resolve the azimuth.
        """
        v = np.sin(self.nodes)
        v.setflags(write=False)
        return v

    @cached_property
    def xi_vertical(self) -> np.ndarray:
        """Vertical coordinate cos(a) - cos(theta) of the direction."""
        v = np.cos(self.nodes) - self.cos_theta
        v.setflags(write=False)
        return v

    @cached_property
    def cot_nodes(self) -> np.ndarray:
        """cot(a) at the nodes; the first entry is unused in AXISYMMETRIC
        mode (the pole limit is handled explicitly)."""
        with np.errstate(divide="ignore"):
            v = np.cos(self.nodes) / np.sin(self.nodes)
        v.setflags(write=False)
        return v

    def quad(self, values: np.ndarray) -> float:
        """Integrate node samples over the direction cap."""
        return float(np.dot(self.quad_weights, values))

    def cap_area(self) -> float:
        """|cap| = quadrature of the constant 1 (exact cell moments)."""
        return float(self.quad_weights.sum())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "theta": self.theta,
            "mode": self.mode.value,
            "node_count": self.node_count,
        }


@dataclass(frozen=True)
class ScalarField:
    """One sample per grid node; the basic value container of the package."""

    grid: CapGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.node_count,):
            raise ValueError(
                f"field length {vals.shape} does not match node count "
                f"{self.grid.node_count}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size


class RobinResidual(NamedTuple):
    """Discrete contact-angle residual: one value per rim node, plus the
    smooth-pole residual h'(0) in AXISYMMETRIC mode (None otherwise)."""

    boundary: np.ndarray
    pole: float | None


def _axisymmetric_weights(n: int, theta: float, nodes: np.ndarray) -> np.ndarray:
    """Hat-function (trapezoid-type) weights for the measure
    sphere_area(n-1) * sin(a)^(n-1) da with exact per-cell moments."""
    dx = nodes[1] - nodes[0]
    area = sphere_area(n - 1)
    # Gauss-Legendre points of every cell, shape (cells, 16)
    left = nodes[:-1][:, None]
    pts = left + (_GL_X[None, :] + 1.0) * (dx / 2.0)
    wfun = area * np.sin(pts) ** (n - 1)
    lin_up = (pts - left) / dx          # hat of the right cell node
    base = (dx / 2.0) * _GL_W[None, :]
    w_right = np.sum(base * wfun * lin_up, axis=1)
    w_left = np.sum(base * wfun * (1.0 - lin_up), axis=1)
    weights = np.zeros(nodes.size)
    weights[:-1] += w_left
    weights[1:] += w_right
    return weights


def build_grid(n: int, theta: float, node_count: int, mode: GridMode) -> CapGrid:
    """Construct a uniform grid with quadrature weights.

    node_count must be odd and >= 33 so the center (FULL1D) or the pole
    (AXISYMMETRIC) falls exactly on a node.
    """
    if not (0.0 < theta <= math.pi / 2.0):
        raise AngleOutOfRange(f"contact angle {theta} not in (0, pi/2]")
    if node_count < MIN_NODE_COUNT or node_count % 2 == 0:
        raise BadNodeCount(
            f"node count {node_count} must be odd and >= {MIN_NODE_COUNT}")
    if n < 1:
        raise ValueError(f"surface dimension {n} must be >= 1")
    if mode is GridMode.FULL1D:
        if n != 1:
            raise ValueError("FULL1D mode requires n = 1")
        nodes = np.linspace(-theta, theta, node_count)
        dx = nodes[1] - nodes[0]
        weights = np.full(node_count, dx)
        weights[0] = weights[-1] = dx / 2.0
    elif mode is GridMode.AXISYMMETRIC:
        nodes = np.linspace(0.0, theta, node_count)
        weights = _axisymmetric_weights(n, theta, nodes)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return CapGrid(n=n, theta=float(theta), mode=mode, nodes=nodes,
                   quad_weights=weights)


def ell_field(grid: CapGrid) -> ScalarField:
    """Contact weight as a field; strictly positive for theta <= pi/2."""
    return ScalarField(grid, grid.ell.copy())


def deriv1(values: np.ndarray, dx: float, pole_zero: bool = False) -> np.ndarray:
    """Second-order first derivative; one-sided 3-point at the ends."""
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2.0 * dx)
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx)
    d[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dx)
    if pole_zero:
        d[0] = 0.0
    return d


def deriv2(values: np.ndarray, dx: float) -> np.ndarray:
    """Second-order second derivative; one-sided 4-point at the ends."""
    dx2 = dx * dx
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dx2
    d[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2]
            - values[3]) / dx2
    d[-1] = (2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3]
             - values[-4]) / dx2
    return d


def differentiate(f: ScalarField, order: int) -> ScalarField:
    """First or second derivative with respect to the polar angle.

    In AXISYMMETRIC mode the first derivative at the pole is forced to 0
    (smooth axisymmetric fields are even in the polar angle).
    """
    if order == 1:
        pole = f.grid.mode is GridMode.AXISYMMETRIC
        return ScalarField(f.grid, deriv1(f.values, f.grid.dx, pole_zero=pole))
    if order == 2:
        return ScalarField(f.grid, deriv2(f.values, f.grid.dx))
    raise ValueError(f"order must be 1 or 2, got {order}")


def principal_radii_arrays(grid: CapGrid, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Principal curvature radii of the body with support samples h.

    Returns (radial, tangential).  FULL1D has a single radius h'' + h; the
    tangential array aliases its values and carries multiplicity 0 in
    determinants.  AXISYMMETRIC: tangential = cot(a) h' + h with the pole
    limit h''(0) + h(0), multiplicity n - 1.
    """
    lam_rad = deriv2(h, grid.dx) + h
    if grid.mode is GridMode.FULL1D:
        return lam_rad, lam_rad.copy()
    d1 = deriv1(h, grid.dx, pole_zero=True)
    lam_tan = np.empty_like(h)
    lam_tan[1:] = grid.cot_nodes[1:] * d1[1:] + h[1:]
    lam_tan[0] = lam_rad[0]
    return lam_rad, lam_tan


def principal_radii(h: ScalarField) -> tuple[ScalarField, ScalarField]:
    lam_rad, lam_tan = principal_radii_arrays(h.grid, h.values)
    return ScalarField(h.grid, lam_rad), ScalarField(h.grid, lam_tan)


def robin_residual_arrays(grid: CapGrid, h: np.ndarray) -> RobinResidual:
    """d_mu h - cot(theta) h at each rim node (one-sided stencil)."""
    dx, cot = grid.dx, grid.cot_theta
    right = (3.0 * h[-1] - 4.0 * h[-2] + h[-3]) / (2.0 * dx) - cot * h[-1]
    if grid.mode is GridMode.FULL1D:
        left = (3.0 * h[0] - 4.0 * h[1] + h[2]) / (2.0 * dx) - cot * h[0]
        return RobinResidual(np.array([left, right]), None)
    pole = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dx)
    return RobinResidual(np.array([right]), float(pole))


def robin_residual(h: ScalarField) -> RobinResidual:
    return robin_residual_arrays(h.grid, h.values)


def enforce_boundary(grid: CapGrid, h: np.ndarray) -> None:
    """Overwrite edge values so the discrete boundary conditions hold exactly.

    Solves the one-sided stencil identity for the edge value given its two
    interior neighbors: contact-angle (Robin) condition at the rim and, in
    AXISYMMETRIC mode, h'(0) = 0 at the pole.
    """
    denom = 3.0 - 2.0 * grid.dx * grid.cot_theta
    h[-1] = (4.0 * h[-2] - h[-3]) / denom
    if grid.mode is GridMode.FULL1D:
        h[0] = (4.0 * h[1] - h[2]) / denom
    else:
        h[0] = (4.0 * h[1] - h[2]) / 3.0


def reference_cap_volume(grid: CapGrid) -> float:
    """Enclosed volume of the unit cap body, quadrature-consistent.

    Defined as quad(ell) / (n + 1); all flow normalizations and polar-volume
    identities are measured against this value so that exact identities
    survive discretization.
    """
    return grid.quad(grid.ell) / (grid.n + 1)
