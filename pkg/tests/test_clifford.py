import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypclif import clifford as cl
from hypclif.clifford import Multivector as MV


def sorted_sign(word):
    """Sign and blade of a generator word, by bubble sort and e_i^2 = -1 (oracle)."""
    w = list(word)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] > w[i + 1]:
                w[i], w[i + 1] = w[i + 1], w[i]
                sign = -sign
                changed = True
            elif w[i] == w[i + 1]:
                del w[i : i + 2]
                sign = -sign
                changed = True
                break
    return sign, sum(1 << (j - 1) for j in w)


def blade_bits(bits):
    return [j + 1 for j in range(8) if bits >> j & 1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_blade_sign_matches_word_oracle(n):
    for a, b in itertools.product(range(1 << n), repeat=2):
        s, k = sorted_sign(blade_bits(a) + blade_bits(b))
        assert k == a ^ b
        assert cl.blade_sign(a, b) == s


def test_generator_squares():
    e1 = MV.blade(3, 1)
    assert (e1 * e1).isclose(-1.0)


def test_blade_product_example():
    # (e1 e2)(e2 e3) = e1 (e2 e2) e3 = -e1 e3
    got = MV.blade(3, 1, 2) * MV.blade(3, 2, 3)
    assert got.isclose(-MV.blade(3, 1, 3))


def test_unit():
    a = MV(4, np.random.default_rng(1).standard_normal(16))
    assert (1.0 * a).isclose(a) and (MV.scalar(4) * a).isclose(a)


def test_reverse_conjugate_hat_examples():
    e12 = MV.blade(3, 1, 2)
    assert e12.reverse().isclose(-e12)
    assert MV.blade(3, 1).reverse().isclose(MV.blade(3, 1))
    assert MV.blade(3, 1).conjugate().isclose(-MV.blade(3, 1))
    assert MV.scalar(3, 2.0).conjugate().isclose(2.0)
    assert e12.conjugate().isclose(-e12)
    v = MV.blade(3, 1) + MV.blade(3, 3)
    assert v.hat().isclose(MV.blade(3, 1) - MV.blade(3, 3))
    assert e12.hat().isclose(e12)


def test_pq_split_examples():
    a = MV(3, cl.as_coeffs(MV.scalar(3) + 2 * MV.blade(3, 1) + 3 * MV.blade(3, 3)))
    assert a.P().isclose(MV.scalar(3) + 2 * MV.blade(3, 1))
    assert a.Q().isclose(3.0)
    e13 = MV.blade(3, 1, 3)
    assert e13.P().isclose(0.0) and e13.Q().isclose(MV.blade(3, 1))


def test_q_prime_examples():
    assert MV.blade(3, 3).q_prime().isclose(1.0)
    assert MV.blade(3, 1, 3).q_prime().isclose(-MV.blade(3, 1))
    assert (MV.blade(3, 1) + MV.blade(3, 1, 2)).q_prime().isclose(0.0)


def test_norm_examples():
    assert (MV.scalar(3) + MV.blade(3, 1)).norm() == pytest.approx(np.sqrt(2))
    assert MV.blade(3, 1, 2).norm() == pytest.approx(1.0)
    assert ((2 * MV.blade(3, 1)) * (3 * MV.blade(3, 2))).norm() == pytest.approx(6.0)


def test_vector_inverse_examples():
    assert cl.vector_inverse([2.0, 0, 0]).isclose(-0.5 * MV.blade(3, 1))
    assert cl.vector_inverse([0, 0, -1.0]).isclose(MV.blade(3, 3))
    for j in range(1, 5):
        e = np.eye(4)[j - 1]
        assert cl.vector_inverse(e).isclose(-MV.blade(4, j))
    with pytest.raises(cl.CliffordDomainError):
        cl.vector_inverse([0.0, 0.0, 0.0])


def test_multivector_validation():
    with pytest.raises(cl.DimensionError):
        MV(3, np.zeros(7))
    with pytest.raises(ValueError):
        MV(3, [np.nan] + [0] * 7)
    with pytest.raises(AttributeError):
        MV(3).dim = 4
    with pytest.raises(cl.DimensionError):
        MV(3) * MV(4)


def test_exact_path_agrees_with_float():
    rng = np.random.default_rng(2)
    a = rng.integers(-3, 4, 8)
    b = rng.integers(-3, 4, 8)
    fa = np.array([Fraction(int(v)) for v in a], dtype=object)
    fb = np.array([Fraction(int(v)) for v in b], dtype=object)
    exact = cl.gp(fa, fb)
    assert np.array_equal(np.array(exact, dtype=float), cl.gp(a.astype(float), b.astype(float)))


def test_point_upper():
    with pytest.raises(cl.CliffordDomainError):
        cl.Point([1.0, 0.0, -0.5]).require_upper()
    assert cl.Point([0, 0, 2.0]).to_multivector().isclose(2 * MV.blade(3, 3))


mv3 = st.lists(st.floats(-10, 10, allow_nan=False), min_size=8, max_size=8).map(np.array)
mv4 = st.lists(st.floats(-10, 10, allow_nan=False), min_size=16, max_size=16).map(np.array)


def _close(a, b, scale):
    return np.max(np.abs(a - b)) <= 1e-12 * max(1.0, scale)


@settings(max_examples=60, deadline=None)
@given(mv4, mv4, mv4)
def test_associative(a, b, c):
    s = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
    assert _close(cl.gp(cl.gp(a, b), c), cl.gp(a, cl.gp(b, c)), s)


@settings(max_examples=60, deadline=None)
@given(mv3, mv3)
def test_involution_laws(a, b):
    s = np.linalg.norm(a) * np.linalg.norm(b)
    ab = cl.gp(a, b)
    assert _close(cl.reverse(ab), cl.gp(cl.reverse(b), cl.reverse(a)), s)
    assert _close(cl.conjugate(ab), cl.gp(cl.conjugate(b), cl.conjugate(a)), s)
    assert _close(cl.hat(ab), cl.gp(cl.hat(a), cl.hat(b)), s)
    assert _close(cl.involute(ab), cl.gp(cl.involute(a), cl.involute(b)), s)


@settings(max_examples=60, deadline=None)
@given(mv4)
def test_pq_identities(a):
    assert _close(cl.p_part(a), 0.5 * (a + cl.hat(a)), np.linalg.norm(a))
    assert _close(cl.p_part(a) + cl.times_en(cl.q_part(a)), a, np.linalg.norm(a))
    assert not np.any(cl.p_part(a)[cl.tables(4)["has_en"]])
    assert not np.any(cl.q_part(a)[cl.tables(4)["has_en"]])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3), st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3))
def test_vector_product_norm_is_multiplicative(x, y):
    X, Y = cl.embed_vector(np.array(x)), cl.embed_vector(np.array(y))
    assert np.linalg.norm(cl.gp(X, Y)) == pytest.approx(np.linalg.norm(x) * np.linalg.norm(y), rel=1e-12, abs=1e-12)
