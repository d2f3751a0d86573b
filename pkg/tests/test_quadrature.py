import math

import numpy as np
import pytest

from hypclif import quadrature as qd

SPH = qd.Sphere((0.0, 0.0, 2.0), 0.5)


def test_sphere_area_and_normals():
    S = qd.sphere_rule(qd.Sphere((0.0, 0.0, 2.0), 1.0), 16)
    assert S.weights.sum() == pytest.approx(4 * math.pi, rel=1e-13)
    assert np.allclose(qd.integrate_surface(S, lambda x, nu: nu), 0, atol=1e-13)
    assert np.allclose(np.linalg.norm(S.normals, axis=1), 1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_area_higher_dimensions(n):
    c = (0.0,) * (n - 1) + (3.0,)
    S = qd.sphere_rule(qd.Sphere(c, 0.7), 10)
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2) * 0.7 ** (n - 1)
    assert S.weights.sum() == pytest.approx(area, rel=1e-12)


def test_divergence_theorem_on_sphere():
    # div(x1^2, 0, 0) = 2 x1; integral over the ball is 2 * c1 * volume = 0 for c1 = 0
    S = qd.sphere_rule(SPH, 12)
    flux = qd.integrate_surface(S, lambda x, nu: (x[:, 0] ** 2 + x[:, 1]) * nu[:, 1])
    assert flux == pytest.approx(4 / 3 * math.pi * 0.5**3, rel=1e-12)


def test_ball_and_box_volume():
    B = qd.ball_rule(qd.Sphere((0.0, 0.0, 2.0), 1.0), 12)
    assert B.weights.sum() == pytest.approx(4 * math.pi / 3, rel=1e-12)
    box = qd.box_rule(qd.Box((0, 0, 1), (1, 1, 2)), 6)
    assert box.weights.sum() == pytest.approx(1.0, rel=1e-14)
    assert qd.integrate_volume(box, lambda x: x[:, 2] ** 3) == pytest.approx((16 - 1) / 4, rel=1e-13)


def test_box_boundary_rule():
    b = qd.Box((0, 0, 1), (1, 2, 3))
    S = qd.box_boundary_rule(b, 4)
    assert S.weights.sum() == pytest.approx(2 * (2 + 2 + 4), rel=1e-14)
    assert np.allclose(qd.integrate_surface(S, lambda x, nu: nu), 0, atol=1e-14)


def test_star_rule_integrates_polynomials():
    y = np.array([0.1, -0.1, 2.05])
    for region, vol in ((SPH, 4 / 3 * math.pi * 0.125), (qd.Box((-0.5, -0.5, 1.5), (0.5, 0.5, 2.5)), 1.0)):
        R = qd.star_rule(region, y, 10)
        assert R.weights.sum() == pytest.approx(vol, rel=1e-10)
        assert np.all(R.weights > 0)


def test_star_rule_integrates_weak_singularity():
    # int over the ball of |x - c|^{-2} = 4 pi r
    c = np.asarray(SPH.center)
    R = qd.star_rule(SPH, c, 8)
    got = qd.integrate_volume(R, lambda x: 1.0 / np.sum((x - c) ** 2, axis=1))
    assert got == pytest.approx(4 * math.pi * 0.5, rel=1e-12)


def test_cap_bookkeeping():
    S = qd.pv_sphere_rule(SPH, 12, (0.0, 0.0, 2.5), 0.1)
    cap = qd.spherical_cap_area(0.5, qd.cap_angle(0.5, 0.1), 3)
    assert S.weights.sum() + cap == pytest.approx(4 * math.pi * 0.25, rel=1e-12)
    # on S^2 a cap of chord radius eps has area pi eps^2
    assert cap == pytest.approx(math.pi * 0.01, rel=1e-12)
    with pytest.raises(qd.QuadratureError):
        qd.pv_sphere_rule(SPH, 12, (0.0, 0.0, 2.4), 0.1)


def test_disc_rule_gaussian():
    D = qd.disc_rule(qd.BoundaryDisc((0.0, 0.0), 6.0), 24)
    got = qd.integrate_volume(D, lambda x: np.exp(-np.sum(x[:, :2] ** 2, axis=1)))
    assert got == pytest.approx(math.pi * (1 - math.exp(-36)), rel=1e-10)
    assert np.all(D.nodes[:, -1] == 0)


def test_json_roundtrip():
    S = qd.sphere_rule(SPH, 4)
    T = qd.SurfaceRule.from_json(S.to_json())
    assert np.array_equal(S.nodes, T.nodes) and np.array_equal(S.weights, T.weights)
    V = qd.ball_rule(SPH, 3)
    W = qd.VolumeRule.from_json(V.to_json())
    assert np.array_equal(V.weights, W.weights)
    with pytest.raises(qd.QuadratureError):
        qd.VolumeRule.from_json(S.to_json())


def test_region_validation():
    with pytest.raises(qd.QuadratureError):
        qd.Sphere((0.0, 0.0, 0.4), 0.5)
    with pytest.raises(qd.QuadratureError):
        qd.Box((0, 0, 1), (1, 0, 2))
    with pytest.raises(qd.QuadratureError):
        qd.weighted_sum(np.array([1.0, np.inf]), np.ones(2))


def test_fsum_is_order_exact():
    v = np.array([1e16, 1.0, -1e16, 1.0])
    assert qd.weighted_sum(v, np.ones(4)) == 2.0
