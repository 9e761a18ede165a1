"""Gauge identities, polar volumes, optimal base points, entropy family.

Closed-form oracles: caps of radius r have polar volume r^-(n+1) V_ref,
entropy log r, and dual-gauge value r on their surface.
"""

import math

import numpy as np
import pytest

import capflow as cf

THETA3 = math.pi / 3.0
BS_BOUND_1D = 4.934802200544679       # pi^2 / 2
BS_PRODUCT_CAP_PI3 = 0.3772230291150418
BS_PRODUCT_CAP_PI2 = 2.4674011002723395
LOG2 = 0.6931471805599453


def cap_directions(grid):
    return np.column_stack([np.sin(grid.nodes),
                            np.cos(grid.nodes) - grid.cos_theta])


def test_gauge_dual_pair_on_cap_surfaces(grid_1d_101):
    g = grid_1d_101
    xi = cap_directions(g)
    for r in (0.5, 1.0, 2.0):
        values = cf.dual_gauge(g.theta, r * xi)
        assert np.allclose(values, r, rtol=1e-12)


def test_unit_level_set_identity(grid_1d_201):
    g = grid_1d_201
    rng = np.random.default_rng(5)
    idx = rng.integers(0, g.node_count, size=20)
    xi = cap_directions(g)[idx]
    psi = cf.cahn_hoffman(g.theta, xi)
    assert np.allclose(cf.gauge(g.theta, psi), 1.0, atol=1e-14)


def test_ambient_jacobian_matches_weight_power(grid_1d_101):
    g = grid_1d_101
    xi = cap_directions(g)
    for i in (0, 17, 50, 83, 100):
        jac = cf.cahn_hoffman_jacobian(g.theta, xi[i])
        exact = g.ell[i] ** -(g.n + 2)
        assert jac == pytest.approx(exact, rel=1e-6)


def test_polar_volume_of_caps(grid_1d_201):
    g = grid_1d_201
    vref = cf.reference_cap_volume(g)
    assert cf.polar_volume(cf.cap_body(g), 0.0) == pytest.approx(
        vref, rel=1e-12)
    for r in (0.5, 2.0):
        assert cf.polar_volume(cf.cap_body(g, radius=r), 0.0) == \
            pytest.approx(r ** -(g.n + 1) * vref, rel=1e-12)


def test_polar_volume_rejects_outside_point(grid_1d_101):
    body = cf.cap_body(grid_1d_101)
    with pytest.raises(cf.NonpositiveSupport):
        cf.polar_volume(body, 2.0)


def test_entropy_values(grid_1d_201):
    g = grid_1d_201
    assert cf.entropy(cf.cap_body(g), 0.0) == pytest.approx(0.0, abs=1e-14)
    assert cf.entropy(cf.cap_body(g, radius=2.0), 0.0) == pytest.approx(
        LOG2, rel=1e-12)
    translated = cf.cap_body(g, radius=1.0, center=0.2)
    assert cf.entropy(translated, 0.2) == pytest.approx(0.0, abs=1e-13)


def test_alpha_entropy_family(grid_1d_201):
    g = grid_1d_201
    cap2 = cf.cap_body(g, radius=2.0)
    for alpha in (0.5, 1.0, 2.0, 3.0):
        assert cf.alpha_entropy(cap2, 0.0, alpha) == pytest.approx(
            LOG2, rel=1e-12)
        assert cf.alpha_entropy(cf.cap_body(g), 0.0, alpha) == pytest.approx(
            0.0, abs=1e-13)


def test_alpha_entropy_continuous_at_one(grid_1d_201):
    body = cf.random_body(grid_1d_201, 0.2, 3, 13)
    base = cf.alpha_entropy(body, 0.0, 1.0)
    for alpha in (1.0 - 1e-3, 1.0 + 1e-3):
        assert cf.alpha_entropy(body, 0.0, alpha) == pytest.approx(
            base, abs=1e-4)


def test_alpha_entropy_rejects_nonpositive_alpha(grid_1d_101):
    with pytest.raises(ValueError):
        cf.alpha_entropy(cf.cap_body(grid_1d_101), 0.0, 0.0)


def test_santalo_point_of_caps(grid_1d_201):
    g = grid_1d_201
    z, vmin = cf.santalo_point(cf.cap_body(g))
    assert z == pytest.approx(0.0, abs=1e-12)
    assert vmin == pytest.approx(cf.reference_cap_volume(g), rel=1e-12)
    z2, _ = cf.santalo_point(cf.cap_body(g, radius=1.0, center=0.3))
    assert z2 == pytest.approx(0.3, abs=1e-10)


def test_entropy_point_of_caps(grid_1d_201):
    g = grid_1d_201
    z, e = cf.entropy_point(cf.cap_body(g))
    assert z == pytest.approx(0.0, abs=1e-12)
    assert e == pytest.approx(0.0, abs=1e-13)
    z2, _ = cf.entropy_point(cf.cap_body(g, radius=1.0, center=0.3))
    assert z2 == pytest.approx(0.3, abs=1e-10)


def test_optimal_points_are_orthogonal(grid_1d_201):
    body = cf.random_body(grid_1d_201, 0.1, 3, 7)
    zs, _ = cf.santalo_point(body)
    ze, _ = cf.entropy_point(body)
    rs, re = cf.convex.orthogonality_residuals(body, zs, ze)
    assert abs(rs[0]) <= 1e-8
    assert abs(re[0]) <= 1e-8


def test_entropy_peak_dominates_probes(grid_1d_201):
    body = cf.random_body(grid_1d_201, 0.15, 4, 21)
    ze, emax = cf.entropy_point(body)
    left, right = cf.wetting_extent(body)
    for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
        z = left + frac * (right - left)
        gap = emax - cf.entropy(body, z)
        assert gap >= -1e-12
        if abs(z - ze) > 1e-6 * (right - left):
            assert gap > 0.0


def test_objective_curvature_signs(grid_1d_201):
    body = cf.random_body(grid_1d_201, 0.1, 2, 3)
    left, right = cf.wetting_extent(body)
    dz = 0.02 * (right - left)
    for frac in (0.3, 0.5, 0.7):
        z = left + frac * (right - left)
        d2v = (cf.polar_volume(body, z + dz) - 2 * cf.polar_volume(body, z)
               + cf.polar_volume(body, z - dz)) / dz ** 2
        d2e = (cf.entropy(body, z + dz) - 2 * cf.entropy(body, z)
               + cf.entropy(body, z - dz)) / dz ** 2
        assert d2v > 0.0
        assert d2e < 0.0


def test_blaschke_santalo_product_of_caps(grid_1d_201):
    prod, bound, margin = cf.blaschke_santalo_check(cf.cap_body(grid_1d_201))
    assert bound == pytest.approx(BS_BOUND_1D, rel=1e-12)
    assert prod == pytest.approx(BS_PRODUCT_CAP_PI3, rel=1e-3)
    assert margin > 0
    g2 = cf.build_grid(1, math.pi / 2, 201, cf.GridMode.FULL1D)
    prod2, _, margin2 = cf.blaschke_santalo_check(cf.cap_body(g2))
    assert prod2 == pytest.approx(BS_PRODUCT_CAP_PI2, rel=1e-3)
    assert margin2 > 0


def test_entropy_radius_identity_for_caps(grid_1d_201):
    g = grid_1d_201
    for r in (0.5, 1.0, 2.0):
        cap = cf.cap_body(g, radius=r)
        _, e = cf.entropy_point(cap)
        m = cf.metrics(cap)
        assert math.exp(e) == pytest.approx(m.rho_plus_cap, rel=1e-9)


def test_axisymmetric_polar_volume_and_entropy(grid_axi_101):
    g = grid_axi_101
    cap = cf.cap_body(g)
    assert cf.polar_volume(cap, 0.0) == pytest.approx(
        cf.reference_cap_volume(g), rel=1e-12)
    z, e = cf.entropy_point(cap)
    assert np.allclose(z, 0.0)
    assert e == pytest.approx(0.0, abs=1e-13)
    # off-axis probe goes through the azimuth-resolved quadrature
    value = cf.entropy(cap, np.array([0.05, 0.0]))
    assert value < 0.0  # the peak is at the symmetry center
    assert cf.polar_volume(cap, np.array([0.05, 0.0])) > \
        cf.polar_volume(cap, 0.0)


def test_toolkit_report_contents(grid_1d_201):
    body = cf.random_body(grid_1d_201, 0.1, 3, 7)
    report = cf.build_toolkit_report(body)
    payload = report.to_dict()
    assert set(payload) == {
        "polar_volume_at", "santalo_point", "santalo_volume",
        "entropy_point", "entropy_value", "bs_product", "bs_bound",
        "orthogonality_residuals"}
    assert report.bs_product <= report.bs_bound + 1e-6
    assert abs(report.orthogonality_residuals["santalo"][0]) <= 1e-8
