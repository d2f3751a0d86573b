import warnings

import numpy as np
import pytest

from hypclif import calculus as calc
from hypclif import clifford as cl
from hypclif import formulas as F
from hypclif import kernels as K
from hypclif import mobius as mb
from hypclif import quadrature as qd

N = 3
SPH = qd.Sphere((0.0, 0.0, 2.0), 0.5)
CENTRE = np.array([0.0, 0.0, 2.0])
E1, E2, E3 = (cl.basis_vector(N, j) for j in (1, 2, 3))
E12 = cl.gp(E1, E2)


@pytest.fixture(scope="module")
def rule():
    return qd.sphere_rule(SPH, 32)


def const(v):
    return calc.CliffordField.constant(v, N)


def test_cauchy_P_reproduces_constants(rule):
    assert np.allclose(F.cauchy_P(const(E1), rule, CENTRE).coeffs, E1, atol=1e-8)
    assert np.allclose(F.cauchy_P(const(E12), rule, CENTRE).coeffs, E12, atol=1e-8)
    assert np.allclose(F.cauchy_P(const(E1), rule, [0.0, 0.0, 3.0]).coeffs, 0, atol=1e-8)


def test_cauchy_full_and_parts(rule):
    f = F.power_field(-1, N)
    P = np.array([[0.1, 0.0, 2.1], [-0.1, 0.15, 1.9]])
    full = F.cauchy_full(f, rule, P)
    assert np.max(cl.norm(full - f.eval(P))) <= 1e-6 * np.max(cl.norm(f.eval(P)))
    assert np.allclose(cl.p_part(full), F.cauchy_P(f, rule, P), atol=1e-7)
    assert np.allclose(F.cauchy_full(const(E1), rule, [0.0, 1.0, 2.0]).coeffs, 0, atol=1e-8)


def test_cauchy_Q_with_volume_term(rule):
    got = F.cauchy_Q(const(E3), rule, CENTRE + [0.1, 0, 0], volume=SPH)
    assert np.allclose(got.coeffs, np.eye(8)[0], atol=1e-6)
    assert np.allclose(F.cauchy_Q(const(E1), rule, CENTRE).coeffs, 0, atol=1e-8)


def test_borel_pompeiu(rule):
    f = calc.CliffordField(lambda X: X[:, -1:] * E1, N)
    y = CENTRE + [0.1, -0.1, 0.1]
    assert np.allclose(F.borel_pompeiu(f, None, rule, SPH, y).coeffs, f.eval(y[None])[0], atol=1e-5)
    got = F.borel_pompeiu(const(E3), None, rule, SPH, y)
    assert np.allclose(got.coeffs, E3, atol=1e-5)


def test_greens_hyperbolic(rule):
    y = CENTRE + [0.2, 0.0, -0.1]
    one = calc.CliffordField.constant(1.0, N)
    assert F.greens_hyperbolic(one, None, rule, y).coeffs[0] == pytest.approx(1.0, abs=1e-7)
    x1 = calc.CliffordField(lambda X: X[:, :1] * np.eye(8)[0], N)
    assert F.greens_hyperbolic(x1, None, rule, y).coeffs[0] == pytest.approx(0.2, abs=1e-6)


def test_greens_prime(rule):
    y = CENTRE + [0.0, 0.1, 0.1]
    u = calc.CliffordField(lambda X: X[:, -1:] * E3, N)
    assert np.allclose(F.greens_prime(u, None, rule, y).coeffs, y[-1] * E3, atol=1e-6)


def test_teodorescu_of_zero():
    got = F.teodorescu(const(0.0 * E1), SPH, CENTRE + [0.1, 0, 0], order=6)
    assert np.allclose(got.coeffs, 0)


def test_clearance_guard(rule):
    with pytest.raises(F.AccuracyError):
        F.cauchy_full(const(E1), rule, [0.0, 0.0, 2.499])


def test_plemelj_constant_density():
    y = CENTRE + [0.0, 0.0, 0.5]
    res = F.plemelj_boundary(const(E1), SPH, y)
    assert np.allclose(res.jump(), E1, atol=2e-3)
    assert np.allclose(res.interior - res.pv, 0.5 * E1, atol=2e-3)
    zero = F.plemelj_boundary(const(0 * E1), SPH, y, check_level=False)
    assert np.allclose(zero.interior, 0) and np.allclose(zero.pv, 0)
    assert np.isnan(zero.spread) and not zero.converged()


def test_surface_density_interpolates_polynomials():
    S = qd.sphere_rule(SPH, 8)
    vals = np.stack([S.nodes[:, 0] ** 2 * S.nodes[:, 2], np.sin(S.nodes[:, 1])], axis=1)
    d = F.SurfaceDensity(S, vals)
    assert d.fit_residual() < 1e-5
    assert d.fit_residual() < F.SurfaceDensity(S, vals, degree=2).fit_residual()
    x = CENTRE + 0.5 * np.array([0.6, 0.0, 0.8])
    assert d.eval(x)[0, 0] == pytest.approx(x[0] ** 2 * x[2], rel=1e-8)


def test_kerzman_stein_zero_and_skew():
    S = qd.sphere_rule(SPH, 6)
    assert np.allclose(F.kerzman_stein(np.zeros((len(S), 8)), S, order=8), 0)
    a = F.as_density(calc.CliffordField(lambda X: X[:, :1] * E1 + X[:, 1:2] ** 2 * E12, N), S)
    b = F.as_density(calc.CliffordField(lambda X: X[:, 2:3] * E3 + X[:, :1] * X[:, 1:2] * np.eye(8)[0], N), S)
    Aa, Ab = F.kerzman_stein(a, S), F.kerzman_stein(b, S)
    assert abs(F.discrete_pairing(S, Aa, b.values) + F.discrete_pairing(S, a.values, Ab)) < 1e-6


def test_hardy_sign_validation():
    with pytest.raises(ValueError):
        F.hardy_project(const(E1), qd.sphere_rule(SPH, 4), sign=0)


def test_neville():
    xs = [0.4, 0.2, 0.1]
    vals = [np.array([2 + 3 * x - x * x]) for x in xs]
    assert F.neville(xs, vals)[0] == pytest.approx(2.0, abs=1e-13)


def test_poisson_mass_and_constant():
    assert F.poisson_mass([0.0, 0.0, 0.7]) == pytest.approx(1.0, abs=1e-5)
    v = F.poisson_extend(lambda X: np.ones(X.shape[0]), [0.3, 0.0, 0.5], tail_value=1.0)
    assert v == pytest.approx(1.0, abs=1e-5)


def test_poisson_boundary_limit():
    phi = lambda X: np.exp(-np.sum(X[:, :-1] ** 2, axis=1))
    lim, vals = F.poisson_boundary_limit(phi, np.array([0.2, -0.1]))
    assert lim == pytest.approx(np.exp(-0.05), abs=1e-3)
    assert len(vals) == 3


def test_poisson_truncation_warning():
    disc = qd.BoundaryDisc((0.0, 0.0), 2.0)
    with pytest.warns(UserWarning, match="truncation radius"):
        F.poisson_extend(lambda X: np.ones(X.shape[0]), [0.0, 0.0, 0.5], disc=disc, order=8)
    with pytest.raises(cl.CliffordDomainError):
        F.poisson_extend(lambda X: np.ones(X.shape[0]), [0.0, 0.0, -0.5])


def test_boundary_expansion_basis():
    B = F.boundary_expansion_basis([0.5], 3)
    assert np.allclose(B[0], [1, 0.25, 0.25 * np.log(0.5)])
    assert np.allclose(F.boundary_expansion_basis([0.5], 4)[0], [1, 0.25, 0.125])


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_power_functions_hypermonogenic(k):
    P = np.array([[0.3, -0.2, 0.9], [0.5, 0.4, 1.6]])
    assert np.max(cl.norm(calc.dirac_hodge_M(F.power_field(k, N), P))) < 1e-5


def test_conformal_residuals():
    P = np.array([[0.3, -0.2, 0.9], [0.1, 0.4, 1.6]])
    f = F.power_field(-1, N)
    t = mb.VahlenTransform(N, (mb.translation([0.3, -0.2, 0.0]),))
    assert F.conformal_covariance_residual(f, t, P) < 1e-6
    inv = mb.VahlenTransform(N, (mb.inversion(),))
    assert F.conformal_covariance_residual(const(-E1), inv, P) < 1e-5
    xe1 = calc.CliffordField(lambda X: X[:, -1:] * E1, N)
    psi = mb.sample_transform(3, N)
    assert F.conformal_covariance_residual(xe1, psi, P, mode="intertwining") < 1e-4


def test_calibration_reports_matches():
    res = F.calibrate("cauchy_full", 3)
    assert res.ok and res.best_match == "2^(n-2)/omega_n"
    assert res.derived_match
    assert res.kappa == pytest.approx(2 / K.omega(3), rel=1e-6)
    res = F.calibrate("greens_prime", 3)
    assert res.best_match == F.NO_MATCH and "opposite sign" in res.note
    with pytest.raises(ValueError):
        F.calibrate("nope", 3)
    with pytest.raises(cl.DimensionError):
        F.calibrate("poisson", 2)


def test_reconstruction_report_rows():
    P = np.array([[0.0, 0.0, 2.1]])
    rep = F.reconstruction_report("cauchy_full", 3, P, P, P, 16, 0.16)
    rows = F.reconstruction_rows(rep)
    assert rows and set(rows[0]) >= set(F.RECONSTRUCTION_COLUMNS)
