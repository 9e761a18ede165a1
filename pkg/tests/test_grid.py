"""Grid construction, quadrature, and difference-operator tests.

Oracles: closed forms of the contact weight ell(a) = 1 - cos(theta) cos(a)
(derivative cos(theta) sin(a), curvature identity ell'' + ell = 1) and cap
areas (2 theta for arcs, 2 pi (1 - cos theta) for n = 2), cross-checked once
with adaptive quadrature.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

import capflow as cf

THETA3 = math.pi / 3.0


def test_full1d_quadrature_of_one_is_arc_length():
    g = cf.build_grid(1, math.pi / 2, 101, cf.GridMode.FULL1D)
    assert g.cap_area() == pytest.approx(math.pi, rel=1e-12)


def test_axisymmetric_quadrature_of_one_matches_cap_area():
    g = cf.build_grid(2, THETA3, 101, cf.GridMode.AXISYMMETRIC)
    closed = 2.0 * math.pi * (1.0 - math.cos(THETA3))   # = pi
    oracle, err = scipy_quad(lambda a: 2.0 * math.pi * math.sin(a), 0, THETA3)
    assert closed == pytest.approx(oracle, abs=10 * err)
    assert g.cap_area() == pytest.approx(closed, rel=1e-8)
    # pole weight vanishes with sin(a): one cell of the area factor
    assert g.quad_weights[0] <= math.pi * g.dx ** 2


@pytest.mark.parametrize("n", [3, 4])
def test_axisymmetric_higher_dimension_area(n):
    g = cf.build_grid(n, THETA3, 101, cf.GridMode.AXISYMMETRIC)
    area = cf.sphere_area(n - 1)
    oracle, _ = scipy_quad(lambda a: area * math.sin(a) ** (n - 1), 0, THETA3)
    assert g.cap_area() == pytest.approx(oracle, rel=1e-10)


def test_build_grid_rejects_bad_input():
    with pytest.raises(cf.BadNodeCount):
        cf.build_grid(1, THETA3, 32, cf.GridMode.FULL1D)
    with pytest.raises(cf.BadNodeCount):
        cf.build_grid(1, THETA3, 100, cf.GridMode.FULL1D)
    with pytest.raises(cf.AngleOutOfRange):
        cf.build_grid(1, 0.0, 101, cf.GridMode.FULL1D)
    with pytest.raises(cf.AngleOutOfRange):
        cf.build_grid(1, math.pi / 2 + 0.01, 101, cf.GridMode.FULL1D)
    with pytest.raises(ValueError):
        cf.build_grid(2, THETA3, 101, cf.GridMode.FULL1D)


def test_nodes_uniform_and_contain_center(grid_1d_101):
    g = grid_1d_101
    spacings = np.diff(g.nodes)
    assert np.allclose(spacings, spacings[0], rtol=1e-14)
    assert g.nodes[g.node_count // 2] == pytest.approx(0.0, abs=1e-15)


def test_contact_weight_values(grid_1d_101):
    g = grid_1d_101
    ell = cf.ell_field(g).values
    assert ell[g.node_count // 2] == pytest.approx(0.5, rel=1e-14)
    assert ell[-1] == pytest.approx(0.75, rel=1e-14)
    g_free = cf.build_grid(1, math.pi / 2, 101, cf.GridMode.FULL1D)
    assert np.allclose(cf.ell_field(g_free).values, 1.0, atol=1e-15)


def test_contact_weight_integral_matches_closed_form():
    g = cf.build_grid(1, THETA3, 801, cf.GridMode.FULL1D)
    omega = 1.2283696986087564  # 2 (theta - sin theta cos theta)
    assert g.quad(g.ell) == pytest.approx(omega, rel=1e-6)
    g2 = cf.build_grid(2, THETA3, 801, cf.GridMode.AXISYMMETRIC)
    c = math.cos(THETA3)
    omega2 = 2 * math.pi * (1 - c) - c * math.pi * math.sin(THETA3) ** 2
    assert g2.quad(g2.ell) == pytest.approx(omega2, rel=1e-6)


def test_first_derivative_against_analytic(grid_1d_101):
    g = grid_1d_101
    d = cf.differentiate(cf.ell_field(g), 1).values
    exact = math.cos(THETA3) * np.sin(g.nodes)
    assert np.max(np.abs(d - exact)) <= 1.0 * g.dx ** 2


def test_derivative_of_constant_vanishes(grid_1d_101):
    g = grid_1d_101
    const = cf.ScalarField(g, np.full(g.node_count, 3.7))
    assert np.max(np.abs(cf.differentiate(const, 1).values)) <= 1e-12
    assert np.max(np.abs(cf.differentiate(const, 2).values)) <= 1e-10


def test_curvature_identity_of_contact_weight(grid_1d_101):
    g = grid_1d_101
    ell = cf.ell_field(g)
    second = cf.differentiate(ell, 2).values
    assert np.max(np.abs(second + ell.values - 1.0)) <= 5 * g.dx ** 2


def test_differentiate_is_linear(grid_1d_101):
    g = grid_1d_101
    rng = np.random.default_rng(1)
    f = rng.standard_normal(g.node_count)
    h = rng.standard_normal(g.node_count)
    for order in (1, 2):
        lhs = cf.differentiate(cf.ScalarField(g, 2.0 * f + 3.0 * h),
                               order).values
        rhs = (2.0 * cf.differentiate(cf.ScalarField(g, f), order).values
               + 3.0 * cf.differentiate(cf.ScalarField(g, h), order).values)
        scale = np.max(np.abs(rhs))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@pytest.mark.parametrize("mode,n", [(cf.GridMode.FULL1D, 1),
                                    (cf.GridMode.AXISYMMETRIC, 2)])
def test_principal_radii_of_contact_weight(mode, n):
    errs = []
    for count in (65, 129, 257):
        g = cf.build_grid(n, THETA3, count, mode)
        lr, lt = cf.principal_radii(cf.ell_field(g))
        err = max(np.max(np.abs(lr.values - 1.0)),
                  np.max(np.abs(lt.values - 1.0)))
        assert err <= 5.0 * g.dx ** 2
        errs.append(err)
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9


def test_principal_radii_linear_and_zero(grid_1d_101):
    g = grid_1d_101
    lr, lt = cf.principal_radii(cf.ScalarField(g, 3.0 * g.ell))
    assert np.max(np.abs(lr.values - 3.0)) <= 15 * g.dx ** 2
    lr0, lt0 = cf.principal_radii(cf.ScalarField(g, np.zeros(g.node_count)))
    assert np.all(lr0.values == 0.0) and np.all(lt0.values == 0.0)


def test_rim_residual_of_contact_weight_second_order():
    errs = []
    for count in (65, 129, 257):
        g = cf.build_grid(1, THETA3, count, cf.GridMode.FULL1D)
        res = cf.robin_residual(cf.ell_field(g))
        errs.append(np.max(np.abs(res.boundary)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9


def test_rim_residual_of_neumann_modulated_weight(grid_1d_101):
    g = grid_1d_101
    factor = 1.0 + 0.1 * np.cos(math.pi * (g.nodes + THETA3) / (2 * THETA3))
    res = cf.robin_residual(cf.ScalarField(g, g.ell * factor))
    assert np.max(np.abs(res.boundary)) <= 5 * g.dx ** 2


def test_rim_residual_of_constant():
    g = cf.build_grid(1, math.pi / 4, 101, cf.GridMode.FULL1D)
    res = cf.robin_residual(cf.ScalarField(g, np.ones(g.node_count)))
    assert np.allclose(res.boundary, -1.0, atol=1e-10)  # -cot(pi/4)


def test_axisymmetric_pole_residual(grid_axi_101):
    g = grid_axi_101
    res = cf.robin_residual(cf.ell_field(g))
    assert res.pole is not None
    assert abs(res.pole) <= 5 * g.dx ** 2


def test_enforce_boundary_zeroes_residual(grid_1d_101):
    g = grid_1d_101
    rng = np.random.default_rng(3)
    h = g.ell * (1.0 + 0.05 * rng.standard_normal(g.node_count))
    cf.enforce_boundary(g, h)
    res = cf.robin_residual(cf.ScalarField(g, h))
    assert np.max(np.abs(res.boundary)) <= 1e-12 * np.max(np.abs(h))


def test_scalar_field_validation(grid_1d_101):
    g = grid_1d_101
    with pytest.raises(ValueError):
        cf.ScalarField(g, np.ones(5))
    with pytest.raises(ValueError):
        cf.ScalarField(g, np.full(g.node_count, np.nan))
