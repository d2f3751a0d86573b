"""Closed-form kernels on upper half space.

Every kernel takes point coordinates ``x`` and ``y`` with shapes that
broadcast to ``(..., n)`` and returns either a real array ``(...)`` or a
coefficient array ``(..., 2**n)``.  Derivative kernels are the exact
derivatives of their potentials:

    p = D_x G,  h = D_y G,  q = D_x H,  DyE = D_y E,  DyF = D_y F

and are cross-checked against finite differences in the test suite.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import comb, gamma

from . import clifford as cl

MIN_SEPARATION = 1e-8


class SingularPairError(ValueError):
    pass


def omega(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2) / gamma(n / 2)


def _pair(x, y, min_sep=MIN_SEPARATION):
    x = np.asarray(cl.as_coords(x), dtype=float)
    y = np.asarray(cl.as_coords(y), dtype=float)
    x, y = np.broadcast_arrays(x, y)
    n = x.shape[-1]
    if n < 3:
        raise cl.DimensionError("kernels need n >= 3")
    d = x - y
    a = np.sqrt(np.sum(d * d, axis=-1))
    if np.any(a < min_sep):
        raise SingularPairError("x and y closer than min_separation")
    dh = x - cl.hat_coords(y)
    b = np.sqrt(np.sum(dh * dh, axis=-1))
    return x, y, n, d, dh, a, b


def g_profile(r, n: int):
    """g(r) = int_r^1 (1 - t^2)^(n-2) / t^(n-1) dt, by exact binomial antiderivatives."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0) or np.any(r > 1.0):
        raise ValueError("g_profile needs 0 < r <= 1")
    out = np.zeros_like(r)
    for k in range(n - 1):
        c = comb(n - 2, k, exact=True) * (-1) ** k
        e = 2 * k - n + 1
        if e == -1:
            out = out - c * np.log(r)
        else:
            out = out + c * (1.0 - r ** (e + 1)) / (e + 1)
    return out


def g_profile_derivative(r, n: int):
    r = np.asarray(r, dtype=float)
    return -((1.0 - r * r) ** (n - 2)) / r ** (n - 1)


def G(x, y):
    _, _, n, _, _, a, b = _pair(x, y)
    return g_profile(a / b, n)


def H(x, y):
    _, _, n, _, _, a, b = _pair(x, y)
    return 1.0 / ((n - 2) * a ** (n - 2) * b ** (n - 2))


def _inv(v):
    return cl.vector_inverse_coords(v)


def E_kernel(x, y):
    """(x - y)^{-1} / (|x - y|^{n-2} |x - y^|^{n-2})."""
    _, _, n, d, _, a, b = _pair(x, y)
    return cl.embed_vector(_inv(d) / (a ** (n - 2) * b ** (n - 2))[..., None])


def F_kernel(x, y):
    """(x^ - y)^{-1} / (|x - y|^{n-2} |x^ - y|^{n-2})."""
    x, y, n, _, _, a, b = _pair(x, y)
    return cl.embed_vector(_inv(cl.hat_coords(x) - y) / (a ** (n - 2) * b ** (n - 2))[..., None])


def p_kernel(x, y):
    """D_x G = (4 x_n y_n)^{n-2} ((x-y)^{-1} - (x-y^)^{-1}) / (|x-y| |x-y^|)^{n-2}."""
    x, y, n, d, dh, a, b = _pair(x, y)
    c = (4.0 * x[..., -1] * y[..., -1]) ** (n - 2) / (a * b) ** (n - 2)
    return cl.embed_vector(c[..., None] * (_inv(d) - _inv(dh)))


def h_kernel(x, y):
    """D_y G; by the symmetry of G this is p with the roles of x and y swapped."""
    x, y, n, d, _, a, b = _pair(x, y)
    c = (4.0 * x[..., -1] * y[..., -1]) ** (n - 2) / (a * b) ** (n - 2)
    return cl.embed_vector(c[..., None] * (_inv(-d) - _inv(y - cl.hat_coords(x))))


def q_kernel(x, y):
    """D_x H = ((x-y)^{-1} + (x-y^)^{-1}) / (|x-y| |x-y^|)^{n-2}."""
    _, _, n, d, dh, a, b = _pair(x, y)
    c = 1.0 / (a * b) ** (n - 2)
    return cl.embed_vector(c[..., None] * (_inv(d) + _inv(dh)))


def r_kernel(x, y):
    x_, y_, n, *_ = _pair(x, y)
    return p_kernel(x, y) * (y_[..., -1] ** (2 - n))[..., None]


def DyE_closed(x, y):
    """(n-2) (x^ - y)(conj(x) - conj(y)) / (|x^ - y|^n |x - y|^n)."""
    x, y, n, d, _, a, b = _pair(x, y)
    u = cl.embed_vector(cl.hat_coords(x) - y)
    v = cl.embed_vector(-d)
    return (n - 2) * cl.gp(u, v) / ((a * b) ** n)[..., None]


def DyF_closed(x, y):
    """(n-2) (x - y)(conj(x^) - conj(y)) / (|x^ - y|^n |x - y|^n)."""
    x, y, n, d, _, a, b = _pair(x, y)
    u = cl.embed_vector(d)
    v = cl.embed_vector(-(cl.hat_coords(x) - y))
    return (n - 2) * cl.gp(u, v) / ((a * b) ** n)[..., None]


def poisson_kernel(x, y, kappa: float | None = None):
    """Half-space Poisson density at boundary point x (x_n = 0) for target y.

    kappa defaults to the printed 2^{n-2}/omega_n; the calibrated value is
    obtained from ``formulas.calibrate("poisson", n)``.
    """
    x = np.asarray(cl.as_coords(x), dtype=float)
    y = np.asarray(cl.as_coords(y), dtype=float)
    x, y = np.broadcast_arrays(x, y)
    n = x.shape[-1]
    if np.any(y[..., -1] <= 0.0):
        raise cl.CliffordDomainError("poisson kernel needs y_n > 0")
    if kappa is None:
        kappa = 2.0 ** (n - 2) / omega(n)
    a = np.sqrt(np.sum((x - y) ** 2, axis=-1))
    b = np.sqrt(np.sum((x - cl.hat_coords(y)) ** 2, axis=-1))
    yn = y[..., -1]
    return kappa * yn ** (n - 1) * (1.0 / (a**n * b ** (n - 2)) + 1.0 / (a ** (n - 2) * b**n))


# algebraic identities used inside the Teodorescu argument


def identity_I1(x, y):
    """e_n(xb - yb)|x^-y|^2 + 2y_n(x^-y)(xb-yb) - e_n(xb - (y^)b)|x-y|^2, should vanish."""
    x, y, n, d, _, a, b = _pair(x, y, min_sep=0.0)
    en = cl.basis_vector(n, n)
    xb_yb = cl.embed_vector(-d)
    xb_yhb = cl.embed_vector(-(x - cl.hat_coords(y)))
    xh_y = cl.embed_vector(cl.hat_coords(x) - y)
    return (
        cl.gp(en, xb_yb) * (b * b)[..., None]
        + 2.0 * y[..., -1:] * cl.gp(xh_y, xb_yb)
        - cl.gp(en, xb_yhb) * (a * a)[..., None]
    )


def identity_I2(x, y):
    """-(x-y)(xb-yb)e_n((x^)b-yb) - 2y_n(x-y)((x^)b-yb) + (x-y)e_n|x^-y|^2, should vanish."""
    x, y, n, d, _, a, b = _pair(x, y, min_sep=0.0)
    en = cl.basis_vector(n, n)
    xy = cl.embed_vector(d)
    xhb_yb = cl.embed_vector(-(cl.hat_coords(x) - y))
    return (
        -cl.gp_many(xy, -xy, en, xhb_yb)
        - 2.0 * y[..., -1:] * cl.gp(xy, xhb_yb)
        + cl.gp(xy, en) * (b * b)[..., None]
    )
