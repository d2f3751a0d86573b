import json

import numpy as np
import pytest

from hypclif import clifford as cl
from hypclif import mobius as mb


def V(n, *gens):
    return mb.VahlenTransform(n, tuple(gens))


def test_apply_examples():
    e3 = np.array([0.0, 0.0, 1.0])
    assert np.allclose(mb.apply(V(3, mb.inversion()), e3), e3)
    assert np.allclose(mb.apply(V(3, mb.translation([1, 0, 0])), e3), [1, 0, 1])
    assert np.allclose(mb.apply(V(3, mb.dilation(2.0)), e3), [0, 0, 2])


@pytest.mark.parametrize("seed", range(8))
def test_word_and_coefficients_agree(seed):
    psi = mb.sample_transform(seed, 4, "V(n)")
    X = np.random.default_rng(seed).uniform(-2, 2, (20, 4))
    word = np.array([psi.apply_word(x) for x in X])
    assert np.allclose(word, psi.apply_coeffs(X), atol=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_vahlen_conditions(seed):
    psi = mb.sample_transform(seed, 3)
    for coef in psi.coeffs:
        # products of vectors: X conj(X) is a scalar |X|^2
        s = cl.gp(coef, cl.conjugate(coef))
        assert np.allclose(s[1:], 0, atol=1e-10)
        assert s[0] == pytest.approx(np.sum(coef**2))
    pd = psi.pseudo_determinant()
    assert np.allclose(pd[1:], 0, atol=1e-10) and abs(abs(pd[0]) - 1) < 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_upper_half_space_preserved(seed):
    psi = mb.sample_transform(seed, 3)
    P = np.random.default_rng(seed).uniform(-2, 2, (20, 3))
    P[:, -1] = np.abs(P[:, -1]) + 0.1
    assert np.all(psi.apply_coeffs(P)[:, -1] > 0)


def test_sample_deterministic_and_json_roundtrip():
    a, b = mb.sample_transform(0, 3), mb.sample_transform(0, 3)
    assert a.to_json() == b.to_json()
    c = mb.VahlenTransform.from_json(a.to_json())
    X = np.array([[0.1, 0.2, 1.3]])
    assert np.allclose(c.apply_coeffs(X), a.apply_coeffs(X))
    assert json.loads(a.to_json())["dim"] == 3


def test_inverse_and_compose():
    psi = mb.sample_transform(5, 3)
    X = np.array([[0.3, -0.4, 0.9], [1.0, 0.5, 2.0]])
    assert np.allclose(psi.inverse().apply_coeffs(psi.apply_coeffs(X)), X, atol=1e-12)
    phi = mb.sample_transform(6, 3)
    assert np.allclose(phi.compose(psi).apply_coeffs(X), phi.apply_coeffs(psi.apply_coeffs(X)), atol=1e-12)


def test_pole():
    with pytest.raises(mb.PoleError):
        V(3, mb.inversion()).apply_coeffs(np.zeros((1, 3)))
    assert mb.apply(V(3, mb.inversion()), np.zeros(3)) is mb.INFINITY


def test_hat_reflect():
    assert np.allclose(mb.hat_reflect([1.0, 0.0, 1.0]), [1, 0, -1])
    assert np.allclose(mb.hat_reflect([1.0, 2.0, 0.0]), [1, 2, 0])
    y = np.array([0.3, 0.1, 0.7])
    assert np.allclose(mb.hat_reflect(mb.hat_reflect(y)), y)


def test_cross_ratio():
    e1 = np.array([1.0, 0, 0])
    cr = mb.cross_ratio(0 * e1, e1, 2 * e1, 3 * e1)
    assert cr.isclose(4.0 / 3.0)
    w = np.random.default_rng(3).standard_normal((4, 3))
    base = mb.cross_ratio(*w).norm()
    assert mb.cross_ratio(*(w + [0.5, -1, 2])).norm() == pytest.approx(base, rel=1e-12)
    psi = mb.sample_transform(11, 3, "V(n)")
    assert mb.cross_ratio(*psi.apply_coeffs(w)).norm() == pytest.approx(base, rel=1e-9)


def test_cayley():
    assert np.allclose(mb.cayley([0, 0, 1.0]), 0)
    assert np.linalg.norm(mb.cayley_centered([0, 0, 1.0], [0, 0, 2.0])) == pytest.approx(1 / 3)
    y = np.array([0.2, 0.1, 0.8])
    assert np.allclose(mb.cayley_centered(y, y), 0)


def test_conformal_factors():
    u = np.array([[0.3, -0.2, 1.1]])
    ident = mb.identity(3)
    assert np.allclose(mb.conformal_factor("J", ident, u), np.eye(8)[0])
    assert np.allclose(mb.conformal_factor("Jprime", ident, u), np.eye(8)[0])
    assert np.allclose(mb.conformal_factor("J1", ident, u), 1.0)
    inv = V(3, mb.inversion())
    J = mb.conformal_factor("J", inv, u)
    assert np.linalg.norm(J) == pytest.approx(1 / np.linalg.norm(u))
    psi = mb.sample_transform(2, 3)
    J1 = mb.conformal_factor("J1", psi, u)
    den = psi.denominator(u)
    assert J1[0] * np.sum(den**2) ** 2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mb.conformal_factor("K", psi, u)
