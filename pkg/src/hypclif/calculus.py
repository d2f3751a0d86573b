"""Finite-difference Dirac, Dirac-Hodge and Weinstein-type operators.

Fields are black boxes evaluated on batches of points, so every operator
here is a stencil: central differences at steps h, h/2, ... combined by a
Richardson (Neville) table in h^2.  Near the boundary plane the base step
is shrunk to min(h0, x_n / 8) per point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import clifford as cl

MIN_HEIGHT = 1e-6


@dataclass(frozen=True)
class DiffConfig:
    step: float = 1e-3
    richardson_levels: int = 2
    scheme: str = "central"

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.richardson_levels < 1:
            raise ValueError("richardson_levels must be >= 1")
        if self.scheme != "central":
            raise ValueError("only the central scheme is implemented")


DEFAULT = DiffConfig()


class CliffordField:
    """A map from points of R^n to Cl_n, evaluated in batches.

    ``fn`` receives coordinates of shape ``(m, n)`` and returns coefficient
    arrays of shape ``(m, 2**n)``.  It must be deterministic and safe to
    call concurrently.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], dim: int, domain=None, name: str = ""):
        self.fn = fn
        self.dim = dim
        self.domain = domain
        self.name = name or getattr(fn, "__name__", "field")

    @classmethod
    def pointwise(cls, fn, dim: int, **kw) -> "CliffordField":
        """Wrap a Point -> Multivector function (slow path)."""

        def batched(X):
            return np.stack([cl.as_coeffs(fn(cl.Point(row))) for row in X])

        return cls(batched, dim, **kw)

    @classmethod
    def constant(cls, value, dim: int) -> "CliffordField":
        c = cl.as_coeffs(value, dim)
        return cls(lambda X: np.broadcast_to(c, X.shape[:-1] + c.shape).copy(), dim, name="constant")

    def eval(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, self.dim)
        if self.domain is not None and not np.all(self.domain(flat)):
            raise cl.CliffordDomainError(f"field {self.name} evaluated outside its domain")
        out = np.asarray(self.fn(flat), dtype=float)
        return out.reshape(X.shape[:-1] + (1 << self.dim,))

    def __call__(self, x) -> cl.Multivector:
        return cl.Multivector(self.dim, self.eval(cl.as_coords(x)[None, :])[0])

    # algebra on fields, so formulas can be fed derived fields
    def map(self, op, name=None) -> "CliffordField":
        return CliffordField(lambda X: op(self.fn(X)), self.dim, self.domain, name or self.name)

    def __add__(self, other):
        return CliffordField(lambda X: self.fn(X) + other.fn(X), self.dim, self.domain)

    def __sub__(self, other):
        return CliffordField(lambda X: self.fn(X) - other.fn(X), self.dim, self.domain)

    def scale(self, c: float):
        return CliffordField(lambda X: c * self.fn(X), self.dim, self.domain)


def as_field(f, dim: int | None = None) -> CliffordField:
    if isinstance(f, CliffordField):
        return f
    if dim is None:
        raise TypeError("need dim to wrap a plain callable")
    return CliffordField(f, dim)


def _points(x, dim):
    X = np.asarray(cl.as_coords(x), dtype=float)
    single = X.ndim == 1
    X = X.reshape(-1, dim)
    return X, single


def _steps(X, cfg: DiffConfig, upper: bool):
    h = np.full(X.shape[0], cfg.step)
    if upper:
        xn = X[:, -1]
        if np.any(xn < MIN_HEIGHT):
            raise cl.CliffordDomainError(f"point with x_n < {MIN_HEIGHT} refused")
        h = np.minimum(h, xn / 8.0)
    return h


def _richardson(table):
    # table[k] computed with step h / 2^k; leading error term in h^2
    cur = list(table)
    fac = 4.0
    while len(cur) > 1:
        cur = [(fac * cur[i + 1] - cur[i]) / (fac - 1.0) for i in range(len(cur) - 1)]
        fac *= 4.0
    return cur[0]


CHUNK = 2048


def partials(f, x, cfg: DiffConfig = DEFAULT, upper: bool = True, second: bool = False):
    """First partials (or pure second partials) of a field.

    Returns shape ``(m, n, 2**n)`` (or ``(n, 2**n)`` for a single point).
    Large batches are processed in chunks to bound stencil memory.
    """
    f = as_field(f)
    n = f.dim
    X, single = _points(x, n)
    if X.shape[0] > CHUNK:
        out = np.concatenate([_partials(f, X[i : i + CHUNK], cfg, upper, second) for i in range(0, X.shape[0], CHUNK)])
    else:
        out = _partials(f, X, cfg, upper, second)
    return out[0] if single else out


def _partials(f, X, cfg, upper, second):
    n = f.dim
    h = _steps(X, cfg, upper)
    m = X.shape[0]
    L = cfg.richardson_levels
    eye = np.eye(n)
    # stencil layout: (level, +/-, j, m, n)
    hs = h[None, :] / (2.0 ** np.arange(L))[:, None]  # (L, m)
    off = hs[:, None, None, :, None] * eye[None, None, :, None, :]
    sgn = np.array([1.0, -1.0])[None, :, None, None, None]
    pts = X[None, None, None] + sgn * off
    if second:
        vals = f.eval(np.concatenate([pts.reshape(-1, n), X]))
        center = vals[-m:]
        vals = vals[:-m].reshape(L, 2, n, m, -1)
        est = (vals[:, 0] + vals[:, 1] - 2.0 * center[None, None]) / (hs**2)[:, None, :, None]
    else:
        vals = f.eval(pts.reshape(-1, n)).reshape(L, 2, n, m, -1)
        est = (vals[:, 0] - vals[:, 1]) / (2.0 * hs)[:, None, :, None]
    return _richardson(list(est)).transpose(1, 0, 2)  # (m, n, N)


def _basis_vectors(n):
    return np.stack([cl.basis_vector(n, j + 1) for j in range(n)])


def dirac_left(f, x, cfg: DiffConfig = DEFAULT, upper: bool = True) -> np.ndarray:
    """sum_j e_j df/dx_j."""
    f = as_field(f)
    d = partials(f, x, cfg, upper)
    return np.sum(cl.gp(_basis_vectors(f.dim), d), axis=-2)


def dirac_right(f, x, cfg: DiffConfig = DEFAULT, upper: bool = True) -> np.ndarray:
    """sum_j df/dx_j e_j."""
    f = as_field(f)
    d = partials(f, x, cfg, upper)
    return np.sum(cl.gp(d, _basis_vectors(f.dim)), axis=-2)


def _xn(x, n):
    X, single = _points(x, n)
    if np.any(X[:, -1] <= 0.0):
        raise cl.CliffordDomainError("operator needs x_n > 0")
    return (X[0, -1] if single else X[:, -1:]), X, single


def dirac_hodge_M(f, x, cfg: DiffConfig = DEFAULT) -> np.ndarray:
    """Mf = Df + ((n-2)/x_n) Q'(f)."""
    f = as_field(f)
    n = f.dim
    xn, X, single = _xn(x, n)
    fx = f.eval(X)
    out = dirac_left(f, X, cfg) + (n - 2) / X[:, -1:] * cl.q_prime(fx)
    return out[0] if single else out


def dirac_hodge_right(f, x, cfg: DiffConfig = DEFAULT) -> np.ndarray:
    """fM = sum_j (df/dx_j) e_j + ((n-2)/x_n) Q'(f)."""
    f = as_field(f)
    n = f.dim
    xn, X, single = _xn(x, n)
    out = dirac_right(f, X, cfg) + (n - 2) / X[:, -1:] * cl.q_prime(f.eval(X))
    return out[0] if single else out


def laplacian(f, x, cfg: DiffConfig = DEFAULT, upper: bool = True) -> np.ndarray:
    return np.sum(partials(f, x, cfg, upper, second=True), axis=-2)


def laplacian_hyperbolic(u, x, cfg: DiffConfig = DEFAULT) -> np.ndarray:
    """Delta u - ((n-2)/x_n) du/dx_n, componentwise."""
    u = as_field(u)
    n = u.dim
    xn, X, single = _xn(x, n)
    lap = np.sum(partials(u, X, cfg, second=True), axis=-2)
    dn = partials(u, X, cfg)[:, -1, :]
    out = lap - (n - 2) / X[:, -1:] * dn
    return out[0] if single else out


def laplacian_prime(u, x, cfg: DiffConfig = DEFAULT) -> np.ndarray:
    """Delta_hyp u + ((n-2)/x_n^2) u."""
    u = as_field(u)
    n = u.dim
    xn, X, single = _xn(x, n)
    out = laplacian_hyperbolic(u, X, cfg) + (n - 2) / X[:, -1:] ** 2 * u.eval(X)
    return out[0] if single else out


def M_field(f, cfg: DiffConfig = DEFAULT) -> CliffordField:
    """The field x -> (Mf)(x), itself evaluated by finite differences."""
    f = as_field(f)
    return CliffordField(lambda X: dirac_hodge_M(f, X, cfg), f.dim, f.domain, f"M[{f.name}]")


def msquared_decomposition(h, x, cfg: DiffConfig = DEFAULT):
    """Both sides of -M^2 h = Delta_hyp P(h) + (Delta_hyp Q(h) + (n-2)/x_n^2 Q(h)) e_n."""
    h = as_field(h)
    n = h.dim
    lhs = -dirac_hodge_M(M_field(h, cfg), x, cfg)
    P = h.map(cl.p_part)
    Q = h.map(cl.q_part)
    rhs = laplacian_hyperbolic(P, x, cfg) + cl.times_en(laplacian_prime(Q, x, cfg))
    return lhs, rhs


def msquared_decomposition_residual(h, x, cfg: DiffConfig = DEFAULT) -> float:
    lhs, rhs = msquared_decomposition(h, x, cfg)
    return float(np.max(cl.norm(lhs - rhs)))
