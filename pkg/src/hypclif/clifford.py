"""Dense real Clifford algebra Cl_n with e_i e_j + e_j e_i = -2 delta_ij.

Blades are indexed by bitmaps: coefficient ``b`` of a multivector belongs to
the blade e_A where A is the set of bits of ``b`` (ascending).  All array
routines operate on the trailing axis, so batches of shape ``(..., 2**n)``
go through unchanged.  ``Multivector`` is a thin immutable wrapper used at
API boundaries; hot loops use the array functions directly.
"""

from __future__ import annotations

from functools import lru_cache
from numbers import Real

import numpy as np

MAX_DIM = 10


class DimensionError(ValueError):
    pass


class CliffordDomainError(ValueError):
    pass


def blade_sign(a: int, b: int) -> int:
    """Sign of e_A e_B = sign * e_{A xor B} under e_i^2 = -1."""
    swaps = 0
    t = a >> 1
    while t:
        swaps += bin(t & b).count("1")
        t >>= 1
    sign = -1 if swaps & 1 else 1
    if bin(a & b).count("1") & 1:
        sign = -sign
    return sign


@lru_cache(maxsize=None)
def tables(n: int) -> dict:
    """Precomputed product/involution tables for Cl_n (cached per n)."""
    if not 1 <= n <= MAX_DIM:
        raise DimensionError(f"dimension {n} outside [1, {MAX_DIM}]")
    N = 1 << n
    idx = np.arange(N)
    xor = idx[:, None] ^ idx[None, :]
    # sign[i, k] is the sign of e_i * e_{i^k}
    sign = np.array([[blade_sign(i, i ^ k) for k in range(N)] for i in range(N)], dtype=float)
    grade = np.array([bin(i).count("1") for i in range(N)])
    rev = np.where((grade * (grade - 1) // 2) % 2 == 0, 1.0, -1.0)
    inv = np.where(grade % 2 == 0, 1.0, -1.0)
    en = 1 << (n - 1)
    has_en = (idx & en) != 0
    hat = np.where(has_en, -1.0, 1.0)
    for arr in (sign, rev, inv, hat):
        arr.setflags(write=False)
    return {
        "N": N,
        "xor": xor,
        "sign": sign,
        "grade": grade,
        "rev": rev,
        "conj": rev * inv,
        "hat": hat,
        "has_en": has_en,
        "en": en,
    }


def dim_of(a: np.ndarray) -> int:
    N = a.shape[-1]
    n = N.bit_length() - 1
    if 1 << n != N:
        raise DimensionError(f"trailing axis {N} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# array-level operations


def gp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product of (batched) coefficient arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    t = tables(dim_of(a))
    if a.dtype == object or b.dtype == object:
        return _gp_exact(a, b, t)
    # out[k] = sum_i sign[i,k] a[i] b[i^k]
    return np.einsum("...i,ik,...ik->...k", a, t["sign"], b[..., t["xor"]], optimize=True)


def _gp_exact(a, b, t):
    # object-dtype path (fractions); slow, used by the exact identity tests
    a, b = np.broadcast_arrays(a, b)
    N = t["N"]
    out = np.empty(a.shape, dtype=object)
    for pos in np.ndindex(*a.shape[:-1]):
        acc = [0] * N
        av, bv = a[pos], b[pos]
        for i in range(N):
            if av[i] == 0:
                continue
            for j in range(N):
                if bv[j] == 0:
                    continue
                k = i ^ j
                acc[k] += int(t["sign"][i, k]) * av[i] * bv[j]
        res = np.empty(N, dtype=object)
        res[:] = acc
        out[pos] = res
    return out


def gp_many(*arrays: np.ndarray) -> np.ndarray:
    out = arrays[0]
    for b in arrays[1:]:
        out = gp(out, b)
    return out


def reverse(a):
    a = np.asarray(a)
    return a * tables(dim_of(a))["rev"]


def conjugate(a):
    a = np.asarray(a)
    return a * tables(dim_of(a))["conj"]


def involute(a):
    a = np.asarray(a)
    t = tables(dim_of(a))
    return a * t["conj"] * t["rev"]


def hat(a):
    """Automorphism induced by e_n -> -e_n."""
    a = np.asarray(a)
    return a * tables(dim_of(a))["hat"]


def p_part(a):
    """P(A): the Cl_{n-1} coefficients B of A = B + C e_n."""
    a = np.asarray(a)
    t = tables(dim_of(a))
    return np.where(t["has_en"], 0.0, a) if a.dtype != object else _mask_obj(a, ~t["has_en"])


def q_part(a):
    """Q(A): the Cl_{n-1} coefficients C of A = B + C e_n.

    C e_n has the blade e_A e_n with A not containing n; that blade is
    stored at index A | en with sign +1 since e_n is the highest generator.
    """
    a = np.asarray(a)
    t = tables(dim_of(a))
    en = t["en"]
    N = t["N"]
    src = np.arange(N) | en
    moved = a[..., src]
    if a.dtype == object:
        return _mask_obj(moved, ~t["has_en"])
    return np.where(t["has_en"], 0.0, moved)


def _mask_obj(a, keep):
    out = a.copy()
    out[..., ~keep] = 0
    return out


def pq_split(a):
    return p_part(a), q_part(a)


def times_en(a):
    """Right multiplication by e_n for a Cl_{n-1}-valued array."""
    a = np.asarray(a)
    n = dim_of(a)
    return gp(a, basis_vector(n, n, dtype=a.dtype))


def q_prime(a):
    """Q'(A) = -e_n Q(A) e_n."""
    a = np.asarray(a)
    n = dim_of(a)
    en = basis_vector(n, n, dtype=a.dtype)
    return -gp(gp(en, q_part(a)), en)


def scalar_part(a):
    return np.asarray(a)[..., 0]


def norm(a):
    return np.linalg.norm(np.asarray(a, dtype=float), axis=-1)


def grade_part(a, k: int):
    a = np.asarray(a)
    t = tables(dim_of(a))
    return np.where(t["grade"] == k, a, 0.0)


# ---------------------------------------------------------------------------
# vectors


@lru_cache(maxsize=None)
def vector_indices(n: int) -> np.ndarray:
    out = np.array([1 << j for j in range(n)])
    out.setflags(write=False)
    return out


def embed_vector(x) -> np.ndarray:
    """Coordinates (..., n) -> grade-1 coefficient arrays (..., 2**n)."""
    x = np.asarray(x)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (1 << n,), dtype=x.dtype if x.dtype == object else float)
    if x.dtype == object:
        out[...] = 0
    out[..., vector_indices(n)] = x
    return out


def vector_coords(a) -> np.ndarray:
    a = np.asarray(a)
    return a[..., vector_indices(dim_of(a))]


def basis_vector(n: int, j: int, dtype=float) -> np.ndarray:
    """e_j as a coefficient array (1-based j)."""
    out = np.zeros(1 << n, dtype=dtype)
    if dtype == object:
        out[...] = 0
        out[1 << (j - 1)] = 1
    else:
        out[1 << (j - 1)] = 1.0
    return out


def vector_inverse_coords(x) -> np.ndarray:
    """Inverse of a nonzero vector, in coordinates: x^{-1} = -x / |x|^2."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(r2 == 0.0):
        raise CliffordDomainError("zero vector has no inverse")
    return -x / r2


def hat_coords(x) -> np.ndarray:
    x = np.array(x, dtype=float, copy=True)
    x[..., -1] = -x[..., -1]
    return x


# ---------------------------------------------------------------------------
# value types


class Multivector:
    """Immutable element of Cl_n."""

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs=None):
        t = tables(dim)
        if coeffs is None:
            arr = np.zeros(t["N"])
        else:
            arr = np.array(coeffs, dtype=float)
        if arr.shape != (t["N"],):
            raise DimensionError(f"Cl_{dim} needs {t['N']} coefficients, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("multivector coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @classmethod
    def scalar(cls, dim: int, value: float = 1.0) -> "Multivector":
        c = np.zeros(1 << dim)
        c[0] = value
        return cls(dim, c)

    @classmethod
    def blade(cls, dim: int, *indices: int, coeff: float = 1.0) -> "Multivector":
        """Product e_{i1} e_{i2} ... (1-based, any order) times coeff."""
        out = np.zeros(1 << dim)
        out[0] = coeff
        for j in indices:
            out = gp(out, basis_vector(dim, j))
        return cls(dim, out)

    @classmethod
    def vector(cls, coords) -> "Multivector":
        coords = np.asarray(coords, dtype=float)
        return cls(coords.shape[0], embed_vector(coords))

    def _coerce(self, other):
        if isinstance(other, Multivector):
            if other.dim != self.dim:
                raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other.coeffs
        if isinstance(other, Point):
            return other.to_multivector()._coerce_self()
        if isinstance(other, Real):
            c = np.zeros(1 << self.dim)
            c[0] = float(other)
            return c
        return NotImplemented

    def _coerce_self(self):
        return self.coeffs

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Multivector(self.dim, self.coeffs + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Multivector(self.dim, self.coeffs - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Multivector(self.dim, o - self.coeffs)

    def __neg__(self):
        return Multivector(self.dim, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Real):
            return Multivector(self.dim, self.coeffs * float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Multivector(self.dim, gp(self.coeffs, o))

    def __rmul__(self, other):
        if isinstance(other, Real):
            return Multivector(self.dim, self.coeffs * float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Multivector(self.dim, gp(o, self.coeffs))

    def __truediv__(self, other):
        if isinstance(other, Real):
            return Multivector(self.dim, self.coeffs / float(other))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.dim, self.coeffs.tobytes()))

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c != 0.0:
                name = "e" + "".join(str(j + 1) for j in range(self.dim) if i >> j & 1) if i else "1"
                terms.append(f"{c:+.6g}*{name}")
        return f"Multivector(n={self.dim}, {' '.join(terms) or '0'})"

    def isclose(self, other, atol=1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs - self._coerce(other))) <= atol)

    @property
    def real(self) -> float:
        return float(self.coeffs[0])

    def reverse(self):
        return Multivector(self.dim, reverse(self.coeffs))

    def conjugate(self):
        return Multivector(self.dim, conjugate(self.coeffs))

    def hat(self):
        return Multivector(self.dim, hat(self.coeffs))

    def norm(self) -> float:
        return float(norm(self.coeffs))

    def P(self):
        return Multivector(self.dim, p_part(self.coeffs))

    def Q(self):
        return Multivector(self.dim, q_part(self.coeffs))

    def q_prime(self):
        return Multivector(self.dim, q_prime(self.coeffs))

    def grade(self, k: int):
        return Multivector(self.dim, grade_part(self.coeffs, k))

    def is_grade(self, k: int, atol=1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs - grade_part(self.coeffs, k))) <= atol)


class Point:
    """Point of R^n stored by its coordinates x_1..x_n."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        c = np.array(coords, dtype=float).reshape(-1)
        if c.size < 1 or not np.all(np.isfinite(c)):
            raise ValueError("point coordinates must be finite and nonempty")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __setattr__(self, name, value):
        raise AttributeError("Point is immutable")

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    @property
    def xn(self) -> float:
        return float(self.coords[-1])

    def to_multivector(self) -> Multivector:
        return Multivector(self.dim, embed_vector(self.coords))

    def require_upper(self) -> "Point":
        if self.xn <= 0.0:
            raise CliffordDomainError(f"point {self.coords.tolist()} not in upper half space")
        return self

    def __eq__(self, other):
        return isinstance(other, Point) and bool(np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"Point({self.coords.tolist()})"


def as_coeffs(a, n: int | None = None) -> np.ndarray:
    if isinstance(a, Multivector):
        return a.coeffs
    if isinstance(a, Point):
        return embed_vector(a.coords)
    arr = np.asarray(a, dtype=float)
    if n is not None and arr.ndim == 0:
        return float(arr) * np.eye(1 << n)[0]
    if n is not None and arr.shape[-1] != 1 << n:
        raise DimensionError(f"expected trailing axis {1 << n}")
    return arr


def as_coords(x) -> np.ndarray:
    if isinstance(x, Point):
        return x.coords
    if isinstance(x, Multivector):
        return vector_coords(x.coeffs)
    return np.asarray(x, dtype=float)


# public single-value API


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return Multivector(a.dim, gp(a.coeffs, b.coeffs))


def vector_inverse(v) -> Multivector:
    c = as_coords(v)
    return Multivector(c.shape[0], embed_vector(vector_inverse_coords(c)))
