import math

import numpy as np
import pytest
from scipy.integrate import quad

from hypclif import calculus as calc
from hypclif import clifford as cl
from hypclif import kernels as K

X0 = np.array([0.0, 0.0, 1.0])
Y0 = np.array([0.0, 0.0, 2.0])


def test_omega():
    assert K.omega(3) == pytest.approx(4 * math.pi)
    assert K.omega(4) == pytest.approx(2 * math.pi**2)


def test_g_profile_closed_forms():
    # n = 3: g(r) = 1/r + r - 2
    assert K.g_profile(0.5, 3) == pytest.approx(0.5)
    for n in (3, 4, 5, 6):
        for r in (0.05, 0.3, 0.9):
            ref = quad(lambda t: (1 - t * t) ** (n - 2) / t ** (n - 1), r, 1.0, epsrel=1e-13)[0]
            assert K.g_profile(r, n) == pytest.approx(ref, rel=1e-11)
    assert K.g_profile(1.0, 4) == 0.0
    with pytest.raises(ValueError):
        K.g_profile(0.0, 3)


def test_point_values():
    assert K.G(X0, Y0) == pytest.approx(4 / 3)
    assert K.H(X0, Y0) == pytest.approx(1 / 3)
    assert np.allclose(K.E_kernel(X0, Y0), cl.embed_vector([0, 0, 1 / 3]))
    assert np.allclose(K.F_kernel(X0, Y0), cl.embed_vector([0, 0, 1 / 9]))


def test_symmetry():
    rng = np.random.default_rng(0)
    for n in (3, 4, 5):
        x, y = rng.uniform(0.2, 2, (2, n))
        assert K.G(x, y) == pytest.approx(K.G(y, x), rel=1e-14)
        assert K.H(x, y) == pytest.approx(K.H(y, x), rel=1e-14)


def test_kernels_are_vectors():
    x, y = np.array([0.1, 0.4, 0.7, 1.2]), np.array([-0.3, 0.2, 0.1, 0.6])
    grades = cl.tables(4)["grade"]
    for k in (K.E_kernel, K.F_kernel, K.p_kernel, K.h_kernel, K.q_kernel):
        v = k(x, y)
        assert np.allclose(v[grades != 1], 0)


def test_derivative_kernels_match_fd():
    x, y = np.array([0.2, -0.1, 0.9]), np.array([-0.4, 0.3, 1.5])
    f = lambda fn: calc.CliffordField(lambda Z: fn(Z)[:, None] * np.eye(8)[0], 3)
    assert np.allclose(calc.dirac_left(f(lambda Z: K.G(Z, y)), x), K.p_kernel(x, y), atol=1e-8)
    assert np.allclose(calc.dirac_left(f(lambda Z: K.G(x, Z)), y), K.h_kernel(x, y), atol=1e-8)
    assert np.allclose(calc.dirac_left(f(lambda Z: K.H(Z, y)), x), K.q_kernel(x, y), atol=1e-8)
    E = calc.CliffordField(lambda Z: K.E_kernel(x, Z), 3)
    assert np.allclose(calc.dirac_left(E, y), K.DyE_closed(x, y), atol=1e-8)


def test_vector_identities_vanish():
    rng = np.random.default_rng(1)
    X, Y = rng.uniform(0.1, 2, (2, 50, 4))
    assert np.max(np.abs(K.identity_I1(X, Y))) < 1e-10
    assert np.max(np.abs(K.identity_I2(X, Y))) < 1e-10


def test_singular_pair():
    with pytest.raises(K.SingularPairError):
        K.G(X0, X0)
    with pytest.raises(cl.DimensionError):
        K.G([0.0, 1.0], [0.0, 2.0])


def test_poisson_kernel_positive_and_domain():
    v = K.poisson_kernel(np.array([[0.3, 0.1, 0.0]]), np.array([0.0, 0.0, 0.5]))
    assert v[0] > 0
    with pytest.raises(cl.CliffordDomainError):
        K.poisson_kernel([0, 0, 0], [0, 0, -1.0])
