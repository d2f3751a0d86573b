"""Vahlen (Clifford 2x2 matrix) form of Moebius transformations of R^n u {oo}.

A transform is stored as a word of generators applied in order, i.e. the
word (g1, g2, ..., gk) is the map x -> gk(...g2(g1(x))).  The Vahlen
coefficients are the product M_k ... M_1 of the generator matrices:

    translation t :  [[1, t], [0, 1]]
    dilation lam  :  [[sqrt(lam), 0], [0, 1/sqrt(lam)]]
    rotation      :  [[R, 0], [0, R]] with R = cos(th/2) + sin(th/2) e_i e_j
    inversion     :  [[0, -1], [1, 0]]          (x -> -x^{-1})
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import clifford as cl


class PoleError(cl.CliffordDomainError):
    pass


class _Infinity:
    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()

GENERATOR_KINDS = ("translation", "dilation", "rotation", "inversion")


@dataclass(frozen=True)
class Generator:
    kind: str
    t: tuple = ()
    lam: float = 1.0
    plane: tuple = ()
    angle: float = 0.0

    def to_dict(self) -> dict:
        if self.kind == "translation":
            return {"kind": "translation", "t": list(self.t)}
        if self.kind == "dilation":
            return {"kind": "dilation", "lambda": self.lam}
        if self.kind == "rotation":
            return {"kind": "rotation", "plane": list(self.plane), "angle": self.angle}
        return {"kind": "inversion"}

    @classmethod
    def from_dict(cls, d: dict) -> "Generator":
        kind = d["kind"]
        if kind == "translation":
            return translation(d["t"])
        if kind == "dilation":
            return dilation(d["lambda"])
        if kind == "rotation":
            return rotation(*d["plane"], d["angle"])
        if kind == "inversion":
            return inversion()
        raise ValueError(f"unknown generator kind {kind!r}")

    def matrix(self, n: int):
        one = cl.Multivector.scalar(n, 1.0).coeffs
        zero = np.zeros(1 << n)
        if self.kind == "translation":
            if len(self.t) != n:
                raise cl.DimensionError("translation vector has wrong dimension")
            return one, cl.embed_vector(np.asarray(self.t, float)), zero, one
        if self.kind == "dilation":
            s = math.sqrt(self.lam)
            return s * one, zero, zero, one / s
        if self.kind == "rotation":
            i, j = self.plane
            R = math.cos(self.angle / 2) * one + math.sin(self.angle / 2) * cl.gp(
                cl.basis_vector(n, i), cl.basis_vector(n, j)
            )
            return R, zero, zero, R
        return zero, -one, one, zero

    def preserves_upper(self, n: int) -> bool:
        if self.kind == "translation":
            return abs(self.t[-1]) == 0.0
        if self.kind == "rotation":
            return max(self.plane) < n
        return True

    def apply_coords(self, x):
        x = np.asarray(x, float)
        if self.kind == "translation":
            return x + np.asarray(self.t, float)
        if self.kind == "dilation":
            return self.lam * x
        if self.kind == "rotation":
            i, j = self.plane
            n = x.shape[-1]
            R = self.matrix(n)[0]
            v = cl.gp(cl.gp(R, cl.embed_vector(x)), cl.reverse(R))
            return cl.vector_coords(v)
        r2 = float(np.dot(x, x))
        if r2 == 0.0:
            return INFINITY
        return x / r2  # -x^{-1} = x / |x|^2


def translation(t) -> Generator:
    return Generator("translation", t=tuple(float(v) for v in t))


def dilation(lam: float) -> Generator:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    return Generator("dilation", lam=float(lam))


def rotation(i: int, j: int, angle: float) -> Generator:
    if i == j:
        raise ValueError("rotation plane needs two distinct axes")
    return Generator("rotation", plane=(int(i), int(j)), angle=float(angle))


def inversion() -> Generator:
    return Generator("inversion")


def _mat_mul(A, B):
    a1, b1, c1, d1 = A
    a2, b2, c2, d2 = B
    gp = cl.gp
    return (gp(a1, a2) + gp(b1, c2), gp(a1, b2) + gp(b1, d2), gp(c1, a2) + gp(d1, c2), gp(c1, b2) + gp(d1, d2))


def _first_nonzero(v, tol=1e-14):
    nz = np.flatnonzero(np.abs(v) > tol)
    return v[nz[0]] if nz.size else 0.0


@dataclass(frozen=True)
class VahlenTransform:
    dim: int
    word: tuple = ()
    coeffs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.dim
        one = cl.Multivector.scalar(n, 1.0).coeffs
        zero = np.zeros(1 << n)
        M = (one, zero, zero, one)
        for g in self.word:
            M = _mat_mul(g.matrix(n), M)
        a, b, c, d = M
        lead = _first_nonzero(d)
        if lead == 0.0:
            lead = _first_nonzero(c)
        if lead < 0:
            a, b, c, d = -a, -b, -c, -d
        for arr in (a, b, c, d):
            arr.setflags(write=False)
        object.__setattr__(self, "coeffs", (a, b, c, d))

    # coefficient access
    @property
    def a(self):
        return cl.Multivector(self.dim, self.coeffs[0])

    @property
    def b(self):
        return cl.Multivector(self.dim, self.coeffs[1])

    @property
    def c(self):
        return cl.Multivector(self.dim, self.coeffs[2])

    @property
    def d(self):
        return cl.Multivector(self.dim, self.coeffs[3])

    def pseudo_determinant(self) -> np.ndarray:
        a, b, c, d = self.coeffs
        return cl.gp(a, cl.reverse(d)) - cl.gp(b, cl.reverse(c))

    def preserves_upper(self) -> bool:
        return all(g.preserves_upper(self.dim) for g in self.word)

    def compose(self, other: "VahlenTransform") -> "VahlenTransform":
        """self o other (apply other first)."""
        return VahlenTransform(self.dim, tuple(other.word) + tuple(self.word))

    def inverse(self) -> "VahlenTransform":
        inv = []
        for g in reversed(self.word):
            if g.kind == "translation":
                inv.append(translation([-v for v in g.t]))
            elif g.kind == "dilation":
                inv.append(dilation(1.0 / g.lam))
            elif g.kind == "rotation":
                inv.append(rotation(*g.plane, -g.angle))
            else:
                inv.append(inversion())
        return VahlenTransform(self.dim, tuple(inv))

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "word": [g.to_dict() for g in self.word]})

    @classmethod
    def from_json(cls, text) -> "VahlenTransform":
        d = json.loads(text) if isinstance(text, str) else text
        return cls(int(d["dim"]), tuple(Generator.from_dict(g) for g in d["word"]))

    # evaluation
    def denominator(self, x) -> np.ndarray:
        """cx + d for coordinates x (batched)."""
        _, _, c, d = self.coeffs
        return cl.gp(np.broadcast_to(c, np.shape(x)[:-1] + c.shape), cl.embed_vector(np.asarray(x, float))) + d

    def apply_coeffs(self, x) -> np.ndarray:
        """(ax + b)(cx + d)^{-1} on coordinates (batched); raises PoleError at a pole."""
        a, b, c, d = self.coeffs
        X = cl.embed_vector(np.asarray(x, float))
        num = cl.gp(np.broadcast_to(a, X.shape), X) + b
        den = cl.gp(np.broadcast_to(c, X.shape), X) + d
        r2 = np.sum(den * den, axis=-1, keepdims=True)
        if np.any(r2 < 1e-300):
            raise PoleError("point is a pole of the transform")
        # den is a product of vectors: den^{-1} = conj(den) / |den|^2
        return cl.vector_coords(cl.gp(num, cl.conjugate(den) / r2))

    def apply_word(self, x):
        cur = np.asarray(x, float)
        for g in self.word:
            if cur is INFINITY:
                cur = np.zeros(self.dim) if g.kind == "inversion" else INFINITY
                continue
            cur = g.apply_coords(cur)
        return cur

    def __call__(self, x):
        return apply(self, x)


def apply(psi: VahlenTransform, x):
    """Image of a Point (or coordinates) under psi; INFINITY at a pole."""
    coords = cl.as_coords(x)
    out = psi.apply_word(coords)
    if out is INFINITY:
        return INFINITY
    return cl.Point(out) if isinstance(x, cl.Point) else out


def apply_batch(psi: VahlenTransform, X) -> np.ndarray:
    """Vectorised image of coordinates (m, n) via the coefficient formula."""
    return psi.apply_coeffs(X)


def identity(n: int) -> VahlenTransform:
    return VahlenTransform(n, ())


def hat_reflect(y):
    c = cl.hat_coords(cl.as_coords(y))
    return cl.Point(c) if isinstance(y, cl.Point) else c


def cross_ratio(w1, w2, w3, w4) -> cl.Multivector:
    """(w1 - w4)^{-1} (w1 - w3) (w2 - w3)^{-1} (w2 - w4)."""
    w = [np.asarray(cl.as_coords(v), float) for v in (w1, w2, w3, w4)]
    n = w[0].shape[0]
    d14, d13, d23, d24 = w[0] - w[3], w[0] - w[2], w[1] - w[2], w[1] - w[3]
    if np.dot(d14, d14) == 0 or np.dot(d23, d23) == 0:
        raise cl.CliffordDomainError("cross ratio needs w1 != w4 and w2 != w3")
    inv = cl.vector_inverse_coords
    out = cl.gp_many(
        cl.embed_vector(inv(d14)), cl.embed_vector(d13), cl.embed_vector(inv(d23)), cl.embed_vector(d24)
    )
    return cl.Multivector(n, out)


def cayley(x):
    """C(x) = (e_n x + 1)(x + e_n)^{-1}."""
    x = np.asarray(cl.as_coords(x), float)
    n = x.shape[0]
    en = cl.basis_vector(n, n)
    X = cl.embed_vector(x)
    den = x.copy()
    den[-1] += 1.0
    if np.dot(den, den) == 0.0:
        raise PoleError("-e_n is the pole of the Cayley transform")
    num = cl.gp(en, X)
    num[0] += 1.0
    out = cl.gp(num, cl.embed_vector(cl.vector_inverse_coords(den)))
    return _vector_result(out, x)


def cayley_centered(x, y):
    """C(x, y) = e_n (x - y)(x - y^)^{-1}, a map of upper half space to the unit ball."""
    x = np.asarray(cl.as_coords(x), float)
    y = np.asarray(cl.as_coords(y), float)
    n = x.shape[0]
    dh = x - cl.hat_coords(y)
    if np.dot(dh, dh) == 0.0:
        raise PoleError("x equals the reflected centre")
    out = cl.gp_many(cl.basis_vector(n, n), cl.embed_vector(x - y), cl.embed_vector(cl.vector_inverse_coords(dh)))
    return _vector_result(out, x)


def _vector_result(out, like):
    # Cayley images are vectors up to rounding; keep the full multivector if not
    resid = out - cl.grade_part(out, 1)
    if np.max(np.abs(resid)) > 1e-10 * max(1.0, np.max(np.abs(out))):
        return cl.Multivector(like.shape[0], out)
    return cl.vector_coords(out)


def conformal_factor(kind: str, psi: VahlenTransform, u):
    """Conformal factors of psi at u (batched over u).

    J = (cu+d)~/|cu+d|^2 and J1 = 1/|cu+d|^4.  For J' the reversion must be
    replaced by Clifford conjugation, J' = conj(cu+d)/|cu+d|^4, or the
    intertwining M(J f o psi) = J' (Mf) o psi picks up a sign (-1)^k, k the
    number of inversions in the word.  ``Jprime_reverse`` keeps the
    reversion form for comparison.
    """
    u = np.asarray(cl.as_coords(u), float)
    den = psi.denominator(u)
    r2 = np.sum(den * den, axis=-1)
    if np.any(r2 < 1e-300):
        raise PoleError("conformal factor evaluated at a pole")
    if kind == "J":
        return cl.reverse(den) / r2[..., None]
    if kind in ("Jprime", "J'"):
        return cl.conjugate(den) / (r2**2)[..., None]
    if kind == "Jprime_reverse":
        return cl.reverse(den) / (r2**2)[..., None]
    if kind == "J1":
        return 1.0 / r2**2
    raise ValueError(f"unknown conformal factor {kind!r}")


# sampling

SUBGROUPS = ("V(n)", "upper")


def sample_transform(seed, n: int, subgroup: str = "upper", max_len: int = 6) -> VahlenTransform:
    """Random word of 1..max_len generators.

    ``upper`` draws boundary translations, dilations, rotations in planes
    (i, j) with i, j < n, and Kelvin inversion; every such word preserves
    x_n > 0.  ``V(n)`` also allows e_n translations and rotations through e_n.
    """
    if subgroup not in SUBGROUPS:
        raise ValueError(f"subgroup must be one of {SUBGROUPS}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = int(rng.integers(1, max_len + 1))
    word = []
    for _ in range(k):
        kind = GENERATOR_KINDS[int(rng.integers(0, 4))]
        if kind == "translation":
            t = rng.uniform(-1.0, 1.0, n)
            if subgroup == "upper":
                t[-1] = 0.0
            word.append(translation(t))
        elif kind == "dilation":
            word.append(dilation(float(np.exp(rng.uniform(-0.7, 0.7)))))
        elif kind == "rotation":
            top = n - 1 if subgroup == "upper" else n
            i, j = rng.choice(np.arange(1, top + 1), size=2, replace=False)
            word.append(rotation(int(min(i, j)), int(max(i, j)), float(rng.uniform(-math.pi, math.pi))))
        else:
            word.append(inversion())
    return VahlenTransform(n, tuple(word))
