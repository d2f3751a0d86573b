"""Integral representation formulas on upper half space, as reconstructions.

Each formula is implemented with its normalising constant kappa pulled
out: the ``*_integral`` functions evaluate the bracketed integrals with
kappa = 1 and the public functions multiply by a constant that
``calibrate`` measures on a known exact solution.  Printed values of the
constants are kept next to the measured ones in ``CONSTANTS`` so a report
can say which (if any) of them is right.

Volume integrals whose kernel is singular at the target point use a
polar rule centred at the target (``quadrature.star_rule``); the r^{n-1}
Jacobian removes the singularity, so no excision is needed.  Excision with
extrapolation is still available as ``singular="excision"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from . import calculus as calc
from . import clifford as cl
from . import kernels as K
from . import mobius as mb
from . import quadrature as qd

NO_MATCH = "none of the printed variants"


class AccuracyError(ValueError):
    """The target point is too close to the surface for the rule in use."""


class CalibrationError(RuntimeError):
    pass


# constants


def _w(n):
    return K.omega(n)


# formula id -> (printed candidates, derived closed form); values are functions of n
CONSTANTS: dict[str, dict] = {
    "cauchy_P": {
        "printed": [("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)), ("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("1/(2^(n-2) omega_n)", lambda n: 1.0 / (2.0 ** (n - 2) * _w(n))),
    },
    "cauchy_full": {
        "printed": [("2^(n-1)/omega_n", lambda n: 2.0 ** (n - 1) / _w(n)), ("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n))],
        "derived": ("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)),
    },
    "cauchy_Q": {
        "printed": [("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)), ("2^(n-1)/omega_n", lambda n: 2.0 ** (n - 1) / _w(n))],
        "derived": ("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)),
    },
    "borel_pompeiu": {
        "printed": [("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n))],
        "derived": ("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)),
    },
    "borel_pompeiu_P": {
        "printed": [("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("1/(2^(n-2) omega_n)", lambda n: 1.0 / (2.0 ** (n - 2) * _w(n))),
    },
    "greens_hyperbolic": {
        "printed": [("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("-1/(2^(n-2) omega_n)", lambda n: -1.0 / (2.0 ** (n - 2) * _w(n))),
    },
    "greens_prime": {
        "printed": [("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)), ("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("-2^(n-2)/omega_n", lambda n: -(2.0 ** (n - 2)) / _w(n)),
    },
    "poisson": {
        "printed": [("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n))],
        "derived": ("2^(n-2)/omega_n", lambda n: 2.0 ** (n - 2) / _w(n)),
    },
    # kappa M(I) = L for the Teodorescu transform I of a density L
    "teodorescu": {
        "printed": [("1", lambda n: 1.0)],
        "derived": ("-2^(n-2)/omega_n", lambda n: -(2.0 ** (n - 2)) / _w(n)),
    },
    "green_potential": {
        "printed": [("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("-1/(2^(n-2) omega_n)", lambda n: -1.0 / (2.0 ** (n - 2) * _w(n))),
    },
    "h_potential": {
        "printed": [("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("1/(2^(n-2) omega_n)", lambda n: 1.0 / (2.0 ** (n - 2) * _w(n))),
    },
    "laplacian_of_green_potential": {
        "printed": [("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("-1/(2^(n-2) omega_n)", lambda n: -1.0 / (2.0 ** (n - 2) * _w(n))),
    },
    "prime_potential": {
        "printed": [("1/omega_n", lambda n: 1.0 / _w(n))],
        "derived": ("-2^(n-2)/omega_n", lambda n: -(2.0 ** (n - 2)) / _w(n)),
    },
}

FORMULAS = tuple(CONSTANTS)


@dataclass
class CalibrationResult:
    formula: str
    n: int
    kappa: float
    candidates: list
    best_match: str
    spread: float
    derived: tuple
    derived_match: bool
    note: str = ""
    probes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.spread <= 1e-6

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


@dataclass
class ReconstructionReport:
    formula: str
    n: int
    points: list
    values: list
    reference: list
    residual_abs: float
    residual_rel: float
    order: int
    kappa: float

    def to_dict(self) -> dict:
        return asdict(self)


RECONSTRUCTION_COLUMNS = ("formula", "n", "order", "probe", "residual_abs", "residual_rel", "kappa", "kappa_match")


def reconstruction_rows(report: ReconstructionReport, kappa_match: str = "") -> list[dict]:
    """One CSV row per probe point."""
    rows = []
    for i, (v, r) in enumerate(zip(report.values, report.reference)):
        err = float(np.max(np.abs(np.subtract(v, r))))
        scale = float(np.max(np.abs(r)))
        rows.append(
            {
                "formula": report.formula, "n": report.n, "order": report.order, "probe": i,
                "residual_abs": err, "residual_rel": err / scale if scale > 0 else err,
                "kappa": report.kappa, "kappa_match": kappa_match,
            }
        )
    return rows


def reconstruction_report(formula, n, points, values, reference, order, kappa) -> ReconstructionReport:
    values = np.atleast_2d(np.asarray(values, float))
    reference = np.atleast_2d(np.asarray(reference, float))
    err = float(np.max(np.abs(values - reference))) if values.size else 0.0
    scale = float(np.max(np.abs(reference))) if reference.size else 0.0
    return ReconstructionReport(
        formula, n, np.atleast_2d(points).tolist(), values.tolist(), reference.tolist(),
        err, err / scale if scale > 0 else err, int(order), float(kappa),
    )


# helpers


def _targets(y, n=None):
    Y = np.asarray(cl.as_coords(y) if isinstance(y, cl.Point) else y, dtype=float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    if np.any(Y[:, -1] <= 0):
        raise cl.CliffordDomainError("target points must lie in upper half space")
    return Y, single


def _finish(out, single, n):
    out = np.asarray(out)
    return cl.Multivector(n, out[0]) if single else out


def _field(f, n):
    if isinstance(f, calc.CliffordField):
        return f
    if isinstance(f, cl.Multivector):
        return calc.CliffordField.constant(f, f.dim)
    if callable(f):
        return calc.CliffordField(f, n)
    return calc.CliffordField.constant(np.asarray(f, float), n)


def check_clearance(rule, y, spacings: float = 2.0):
    """Raise AccuracyError if y is within ``spacings`` local node spacings of the rule."""
    d = np.sqrt(np.sum((rule.nodes - y) ** 2, axis=1))
    near = np.argsort(d)[:8]
    h = float(np.max(rule.weights[near])) ** (1.0 / (rule.dim - 1))
    if d[near[0]] < spacings * h:
        raise AccuracyError(f"target at distance {d[near[0]]:.3g} from the surface; local spacing {h:.3g}")


def _vec(X):
    return cl.embed_vector(X)


def _sum(values, weights, nodes=None):
    return qd.weighted_sum(values, weights, nodes)


def _prepare(f, surface, y, check):
    n = surface.dim
    Y, single = _targets(y)
    if check:
        for t in Y:
            check_clearance(surface, t)
    return n, _field(f, n), Y, single


# volume integrals


def _volume_integral(volume, y, integrand, order: int, singular: str = "polar"):
    """Integral over a region (or a fixed rule) of integrand(X) -> (m, N)."""
    if isinstance(volume, qd.VolumeRule):
        return _sum(integrand(volume.nodes), volume.weights, volume.nodes)
    region = volume
    if not region.contains(y):
        rule = _region_rule(region, order)
        return _sum(integrand(rule.nodes), rule.weights, rule.nodes)
    if singular == "polar":
        rule = qd.star_rule(region, y, order)
        return _sum(integrand(rule.nodes), rule.weights, rule.nodes)
    if singular == "excision":
        return excised_volume_integral(region, y, integrand, order)
    raise ValueError("singular must be 'polar' or 'excision'")


@lru_cache(maxsize=32)
def _region_rule_cached(kind, key, order):
    if kind == "ball":
        return qd.ball_rule(qd.Sphere(key[0], key[1]), order)
    return qd.box_rule(qd.Box(key[0], key[1]), order)


def _region_rule(region, order):
    if isinstance(region, qd.Sphere):
        return _region_rule_cached("ball", (tuple(region.center), region.radius), order)
    return _region_rule_cached("box", (tuple(region.lo), tuple(region.hi)), order)


def _diameter(region):
    if isinstance(region, qd.Sphere):
        return 2.0 * region.radius
    return float(np.linalg.norm(np.subtract(region.hi, region.lo)))


def neville(xs, values, x0: float = 0.0):
    """Polynomial extrapolation of values(x) to x0 (Neville's scheme)."""
    xs = list(xs)
    P = [np.asarray(v, float) for v in values]
    m = len(xs)
    for k in range(1, m):
        P = [((x0 - xs[i + k]) * P[i] + (xs[i] - x0) * P[i + 1]) / (xs[i] - xs[i + k]) for i in range(m - k)]
    return P[0]


def excised_volume_integral(region, y, integrand, order: int, fractions=(0.02, 0.01, 0.005)):
    """Integral over region minus B(y, delta), extrapolated to delta = 0."""
    diam = _diameter(region)
    deltas = [f * diam for f in fractions]
    vals = []
    for d in deltas:
        rule = qd.star_rule(region, y, order, r_min=d)
        vals.append(_sum(integrand(rule.nodes), rule.weights, rule.nodes))
    return neville(deltas, vals)


def _mfield(f, Mf, cfg=calc.DEFAULT):
    return calc.M_field(f, cfg) if Mf is None else _field(Mf, f.dim)


# Cauchy-type surface integrals (kappa = 1)


def cauchy_P_integral(f, surface, y, check=True):
    """P( int_S p(x,y) n(x) x_n^{2-n} f(x) dsigma )."""
    n, f, Y, single = _prepare(f, surface, y, check)
    X, nu = surface.nodes, _vec(surface.normals)
    fx = f.eval(X)
    w = X[:, -1:] ** (2 - n)
    out = [cl.p_part(_sum(cl.gp_many(K.p_kernel(X, t), nu * w, fx), surface.weights)) for t in Y]
    return np.array(out), single


def _layer_integrand(X, normals, t, fx):
    """E(x,t) n(x) f(x) - F(x,t) n^(x) f^(x) at nodes X."""
    nu = _vec(normals)
    return cl.gp_many(K.E_kernel(X, t), nu, fx) - cl.gp_many(K.F_kernel(X, t), cl.hat(nu), cl.hat(fx))


def cauchy_full_integral(f, surface, y, check=True):
    """y_n^{n-2} int_S (E n f - F n^ f^) dsigma."""
    n, f, Y, single = _prepare(f, surface, y, check)
    X = surface.nodes
    fx = f.eval(X)
    out = [t[-1] ** (n - 2) * _sum(_layer_integrand(X, surface.normals, t, fx), surface.weights) for t in Y]
    return np.array(out), single


def cauchy_Q_integral(f, surface, y, Mf=None, volume=None, order=20, check=True, singular="polar"):
    """y_n^{n-2} Q( int q n f dsigma - int_U q Mf dx ); the volume term needs ``volume``."""
    n, f, Y, single = _prepare(f, surface, y, check)
    X, nu = surface.nodes, _vec(surface.normals)
    fx = f.eval(X)
    Mf = _mfield(f, Mf) if volume is not None else None
    out = []
    for t in Y:
        s = _sum(cl.gp_many(K.q_kernel(X, t), nu, fx), surface.weights)
        if volume is not None:
            s = s - _volume_integral(volume, t, lambda Z: cl.gp(K.q_kernel(Z, t), Mf.eval(Z)), order, singular)
        out.append(t[-1] ** (n - 2) * cl.q_part(s))
    return np.array(out), single


def borel_pompeiu_integral(f, Mf, surface, volume, y, order=20, check=True, singular="polar"):
    """y_n^{n-2} [ int_dK (E n f - F n^ f^) - int_K (E Mf - F (Mf)^) ]."""
    n, f, Y, single = _prepare(f, surface, y, check)
    Mf = _mfield(f, Mf)
    X = surface.nodes
    fx = f.eval(X)
    out = []
    for t in Y:
        s = _sum(_layer_integrand(X, surface.normals, t, fx), surface.weights)

        def vol(Z, t=t):
            g = Mf.eval(Z)
            return cl.gp(K.E_kernel(Z, t), g) - cl.gp(K.F_kernel(Z, t), cl.hat(g))

        s = s - _volume_integral(volume, t, vol, order, singular)
        out.append(t[-1] ** (n - 2) * s)
    return np.array(out), single


def borel_pompeiu_P_integral(f, Mf, surface, volume, y, order=20, check=True, singular="polar"):
    """P( int_dK p n x_n^{2-n} f dsigma - int_K p Mf x_n^{2-n} dx ), the P-part variant."""
    n, f, Y, single = _prepare(f, surface, y, check)
    Mf = _mfield(f, Mf)
    X, nu = surface.nodes, _vec(surface.normals)
    fx = f.eval(X)
    w = X[:, -1:] ** (2 - n)
    out = []
    for t in Y:
        s = _sum(cl.gp_many(K.p_kernel(X, t), nu * w, fx), surface.weights)
        vol = lambda Z, t=t: cl.gp(K.p_kernel(Z, t), Mf.eval(Z)) * Z[:, -1:] ** (2 - n)
        s = s - _volume_integral(volume, t, vol, order, singular)
        out.append(cl.p_part(s))
    return np.array(out), single


def greens_hyperbolic_integral(h, Mh, surface, y, check=True):
    """P( int_S G n x_n^{2-n} Mh - p n x_n^{2-n} h dsigma )."""
    n, h, Y, single = _prepare(h, surface, y, check)
    Mh = _mfield(h, Mh)
    X = surface.nodes
    nu = _vec(surface.normals) * X[:, -1:] ** (2 - n)
    hx, mhx = h.eval(X), Mh.eval(X)
    out = []
    for t in Y:
        v = K.G(X, t)[:, None] * cl.gp(nu, mhx) - cl.gp_many(K.p_kernel(X, t), nu, hx)
        out.append(cl.p_part(_sum(v, surface.weights)))
    return np.array(out), single


def greens_prime_integral(u, Mu, surface, y, lap=None, volume=None, order=20, check=True, singular="polar"):
    """y_n^{n-2} Q( int H n Mu - q n u dsigma + int_U H lap'(u) dx ) e_n.

    The volume term (included when ``volume`` is given) enters with the same
    sign as the surface term; ``lap`` defaults to a finite-difference
    Delta' of u.
    """
    n, u, Y, single = _prepare(u, surface, y, check)
    Mu = _mfield(u, Mu)
    X, nu = surface.nodes, _vec(surface.normals)
    ux, mux = u.eval(X), Mu.eval(X)
    if volume is not None and lap is None:
        lap = calc.CliffordField(lambda Z: calc.laplacian_prime(u, Z), n)
    elif lap is not None:
        lap = _field(lap, n)
    out = []
    for t in Y:
        s = _sum(K.H(X, t)[:, None] * cl.gp(nu, mux) - cl.gp_many(K.q_kernel(X, t), nu, ux), surface.weights)
        if volume is not None:
            s = s + _volume_integral(volume, t, lambda Z, t=t: K.H(Z, t)[:, None] * lap.eval(Z), order, singular)
        out.append(cl.times_en(t[-1] ** (n - 2) * cl.q_part(s)))
    return np.array(out), single


def teodorescu(L, volume, y, order: int = 20, singular: str = "polar"):
    """I(y) = y_n^{n-2} ( int_K E(x,y) L(x) dx - int_K F(x,y) L^(x) dx ).

    ``volume`` is a region (Sphere or Box) or a fixed VolumeRule.  M(I) is
    L / kappa inside K and 0 outside, kappa = kappa_for("teodorescu", n).
    """
    n = volume.dim
    L = _field(L, n)
    Y, single = _targets(y)
    out = []
    for t in Y:

        def integrand(Z, t=t):
            g = L.eval(Z)
            return cl.gp(K.E_kernel(Z, t), g) - cl.gp(K.F_kernel(Z, t), cl.hat(g))

        out.append(t[-1] ** (n - 2) * _volume_integral(volume, t, integrand, order, singular))
    return _finish(out, single, n)


def teodorescu_field(L, volume, order: int = 20) -> calc.CliffordField:
    return calc.CliffordField(lambda Y: teodorescu(L, volume, Y, order), volume.dim, name="teodorescu")


# public reconstructions


def _kappa(formula, n, kappa):
    return kappa_for(formula, n) if kappa is None else float(kappa)


def cauchy_P(f, surface, y, kappa=None, check=True):
    """P(f(y)) from boundary values of a hypermonogenic f."""
    out, single = cauchy_P_integral(f, surface, y, check)
    return _finish(_kappa("cauchy_P", surface.dim, kappa) * out, single, surface.dim)


def cauchy_full(f, surface, y, kappa=None, check=True):
    """f(y) from boundary values of a hypermonogenic f (E/F form)."""
    out, single = cauchy_full_integral(f, surface, y, check)
    return _finish(_kappa("cauchy_full", surface.dim, kappa) * out, single, surface.dim)


def cauchy_Q(f, surface, y, Mf=None, volume=None, kappa=None, order=20, check=True):
    """Q(f(y)) (a Cl_{n-1} element); pass ``volume`` when f is not hypermonogenic."""
    out, single = cauchy_Q_integral(f, surface, y, Mf, volume, order, check)
    return _finish(_kappa("cauchy_Q", surface.dim, kappa) * out, single, surface.dim)


def borel_pompeiu(f, Mf, surface, volume, y, kappa=None, order=20, check=True, singular="polar"):
    """f(y) for any C^1 f: boundary layer minus the Teodorescu transform of Mf."""
    out, single = borel_pompeiu_integral(f, Mf, surface, volume, y, order, check, singular)
    return _finish(_kappa("borel_pompeiu", surface.dim, kappa) * out, single, surface.dim)


def borel_pompeiu_P(f, Mf, surface, volume, y, kappa=None, order=20, check=True, singular="polar"):
    out, single = borel_pompeiu_P_integral(f, Mf, surface, volume, y, order, check, singular)
    return _finish(_kappa("borel_pompeiu_P", surface.dim, kappa) * out, single, surface.dim)


def greens_hyperbolic(h, Mh, surface, y, kappa=None, check=True):
    """h(y) for hyperbolic harmonic Cl_{n-1}-valued h."""
    out, single = greens_hyperbolic_integral(h, Mh, surface, y, check)
    return _finish(_kappa("greens_hyperbolic", surface.dim, kappa) * out, single, surface.dim)


def greens_prime(u, Mu, surface, y, lap=None, volume=None, kappa=None, order=20, check=True):
    """u(y) for Cl_{n-1} e_n valued u; add ``volume`` unless Delta'u = 0."""
    out, single = greens_prime_integral(u, Mu, surface, y, lap, volume, order, check)
    return _finish(_kappa("greens_prime", surface.dim, kappa) * out, single, surface.dim)


# layer potentials, principal values, Plemelj limits


def layer_potential(phi, surface, z, kappa=None):
    """kappa z_n^{n-2} int_S (E n phi - F n^ phi^) dsigma at off-surface points z."""
    n = surface.dim
    out, single = cauchy_full_integral(phi, surface, z, check=False)
    return _finish(_kappa("cauchy_full", n, kappa) * out, single, n)


def _sphere_of(rule_or_spec):
    if isinstance(rule_or_spec, qd.Sphere):
        return rule_or_spec
    meta = getattr(rule_or_spec, "meta", {}) or {}
    if meta.get("region") != "sphere":
        raise NotImplementedError("principal values are implemented on spheres only")
    return qd.Sphere(tuple(meta["center"]), meta["radius"])


def _pv_kernel_sum(phi, rule, t, adjoint=False):
    X = rule.nodes
    fx = phi.eval(X)
    if not adjoint:
        v = _layer_integrand(X, rule.normals, t, fx) * t[-1] ** (rule.dim - 2)
    else:
        v = adjoint_layer_integrand(X, rule.normals, t, _unit_normal_at(rule, t), fx)
    return _sum(v, rule.weights)


def _unit_normal_at(rule, t):
    c = np.asarray(rule.meta["center"], float)
    return (t - c) / np.linalg.norm(t - c)


def adjoint_layer_integrand(X, normals, t, normal_t, fx):
    """Kernel of the L^2 adjoint of the layer operator (kappa = 1).

    With respect to <a, b> = sum_A a_A b_A the transpose of left
    multiplication by a vector v is left multiplication by -v, which gives
    x_n^{n-2} ( -n(t) E(x,t) f + n(t) F(x,t) f^ ).
    """
    n = X.shape[1]
    nt = np.broadcast_to(_vec(normal_t), (X.shape[0], 1 << n))
    w = X[:, -1:] ** (n - 2)
    return w * (-cl.gp_many(nt, K.E_kernel(X, t), fx) + cl.gp_many(nt, K.F_kernel(X, t), cl.hat(fx)))


def principal_value(phi, sphere, y, eps_fracs=(0.1, 0.05, 0.025), order: int = 16, kappa=None, adjoint=False):
    """PV of the layer operator at y on the sphere, by cap excision and Neville in eps.

    Returns (extrapolated value, list of truncated values).
    """
    sphere = _sphere_of(sphere)
    n = sphere.dim
    phi = _field(phi, n)
    y = np.asarray(cl.as_coords(y), float)
    eps = [f * sphere.radius for f in eps_fracs]
    vals = [_pv_kernel_sum(phi, qd.pv_sphere_rule(sphere, order, y, e), y, adjoint) for e in eps]
    k = _kappa("cauchy_full", n, kappa)
    vals = [k * v for v in vals]
    return neville(eps, vals), vals


@dataclass
class PlemeljResult:
    interior: np.ndarray
    exterior: np.ndarray
    pv: np.ndarray
    pv_sequence: list
    interior_sequence: list
    exterior_sequence: list
    spread: float  # last-step change of the extrapolated sequences, a convergence indicator

    def jump(self):
        return self.interior - self.exterior

    def converged(self, tol: float = 2e-3) -> bool:
        return bool(np.isfinite(self.spread) and self.spread <= tol)


def plemelj_boundary(
    phi, sphere, y, eps_fracs=(0.1, 0.05, 0.025), offsets=(4, 2, 1), order: int = 16, kappa=None, check_level: bool = True
) -> PlemeljResult:
    """Interior/exterior limits and PV of the layer potential at y on a sphere.

    Limits are taken along the normal at distances offsets * min(eps), each
    evaluated with a rule graded towards y, then extrapolated to distance 0
    through all given levels.  With ``check_level`` one coarser level (twice
    the largest eps and offset) is also computed; ``spread`` is the change
    in the extrapolants when the window is shifted to include it, an
    estimate of the extrapolation error.
    """
    sphere = _sphere_of(sphere)
    n = sphere.dim
    phi = _field(phi, n)
    y = np.asarray(cl.as_coords(y), float)
    c = np.asarray(sphere.center, float)
    nu = (y - c) / np.linalg.norm(y - c)
    eps_all = ((2 * eps_fracs[0],) if check_level else ()) + tuple(eps_fracs)
    _, pv_all = principal_value(phi, sphere, y, eps_all, order, kappa)
    base = min(eps_fracs) * sphere.radius
    off_all = ((2 * offsets[0],) if check_level else ()) + tuple(offsets)
    d_all = [m * base for m in off_all]
    rule = qd.graded_sphere_rule(sphere, order, nu)
    k = _kappa("cauchy_full", n, kappa)
    ins_all = [k * cauchy_full_integral(phi, rule, y - d * nu, check=False)[0][0] for d in d_all]
    outs_all = [k * cauchy_full_integral(phi, rule, y + d * nu, check=False)[0][0] for d in d_all]
    e_all = [f * sphere.radius for f in eps_all]
    m = len(eps_fracs)
    interior = neville(d_all[-m:], ins_all[-m:])
    exterior = neville(d_all[-m:], outs_all[-m:])
    pv = neville(e_all[-m:], pv_all[-m:])
    if check_level:
        spread = float(
            max(
                np.max(np.abs(interior - neville(d_all[:m], ins_all[:m]))),
                np.max(np.abs(exterior - neville(d_all[:m], outs_all[:m]))),
                np.max(np.abs(pv - neville(e_all[:m], pv_all[:m]))),
            )
        )
    else:
        spread = float("nan")
    return PlemeljResult(interior, exterior, pv, pv_all[-m:], ins_all[-m:], outs_all[-m:], spread)


# densities on spheres


def _legendre_table(t, L):
    P = [np.ones_like(t), t]
    for k in range(1, L):
        P.append(((2 * k + 1) * t * P[k] - k * P[k - 1]) / (k + 1))
    return np.stack(P[: L + 1], axis=-1)


@lru_cache(maxsize=16)
def _exponents(d, L):
    out = []

    def rec(prefix, left, k):
        if k == d:
            out.append(prefix)
            return
        for e in range(left + 1):
            rec(prefix + (e,), left - e, k + 1)

    rec((), L, 0)
    return np.array(out)


class SurfaceDensity:
    """Node values on a sphere rule with a polynomial interpolant.

    The interpolant is the weighted least-squares fit by polynomials of
    total degree <= ``degree`` in the ambient coordinates (Legendre
    products), which on the sphere spans the spherical harmonics up to that
    degree.  The default degree is order - 1, where the product rule
    integrates the normal equations exactly.
    """

    def __init__(self, rule, values, degree: int | None = None):
        self.rule = rule
        self.sphere = _sphere_of(rule)
        self.values = np.asarray(values, float)
        self.dim = rule.dim
        order = int(rule.meta.get("order", 8))
        self.degree = order - 1 if degree is None else degree
        B = self._basis(rule.nodes)
        sw = np.sqrt(rule.weights)[:, None]
        self.coef = np.linalg.lstsq(B * sw, self.values * sw, rcond=1e-12)[0]

    def _basis(self, X):
        u = (X - np.asarray(self.sphere.center)) / self.sphere.radius
        E = _exponents(self.dim, self.degree)
        tabs = [_legendre_table(u[:, j], self.degree) for j in range(self.dim)]
        B = np.ones((X.shape[0], E.shape[0]))
        for j in range(self.dim):
            B *= tabs[j][:, E[:, j]]
        return B

    def eval(self, X):
        X = np.asarray(X, float).reshape(-1, self.dim)
        return self._basis(X) @ self.coef

    def as_field(self) -> calc.CliffordField:
        return calc.CliffordField(self.eval, self.dim, name="density")

    def fit_residual(self) -> float:
        return float(np.max(np.abs(self.eval(self.rule.nodes) - self.values)))


def as_density(phi, rule) -> SurfaceDensity:
    if isinstance(phi, SurfaceDensity):
        return phi
    if isinstance(phi, np.ndarray) and phi.ndim == 2 and phi.shape[0] == len(rule):
        return SurfaceDensity(rule, phi)
    return SurfaceDensity(rule, _field(phi, rule.dim).eval(rule.nodes))


def singular_operator(phi, rule, eps_fracs=(0.1, 0.05, 0.025), pv_order: int = 12, kappa=None, adjoint=False):
    """T_S phi (or its adjoint) at every node of a sphere rule."""
    dens = as_density(phi, rule)
    f = dens.as_field()
    sphere = dens.sphere
    return np.array([principal_value(f, sphere, y, eps_fracs, pv_order, kappa, adjoint)[0] for y in rule.nodes])


def hardy_project(phi, rule, sign: int = 1, eps_fracs=(0.1, 0.05, 0.025), pv_order: int = 12, kappa=None):
    """(1/2 I + sign * T_S) phi at the nodes of a sphere rule."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    dens = as_density(phi, rule)
    T = singular_operator(dens, rule, eps_fracs, pv_order, kappa)
    return 0.5 * dens.values + sign * T


def kerzman_stein_integrand(X, normals, t, normal_t, fx):
    """Weakly singular kernel of T_S - T_S^* (kappa = 1)."""
    n = X.shape[1]
    nu = _vec(normals)
    nt = np.broadcast_to(_vec(normal_t), nu.shape)
    E = K.E_kernel(X, t)
    F = K.F_kernel(X, t)
    yw = t[-1] ** (n - 2)
    xw = X[:, -1:] ** (n - 2)
    return cl.gp(yw * cl.gp(E, nu) + xw * cl.gp(nt, E), fx) - cl.gp(yw * cl.gp(F, cl.hat(nu)) + xw * cl.gp(nt, F), cl.hat(fx))


def kerzman_stein(phi, rule, order: int = 16, panels: int = 12, kappa=None):
    """A_S phi = (T_S - T_S^*) phi at the nodes of a sphere rule.

    The kernel is weakly singular, so each target uses an ordinary rule with
    polar axis at the target and panels graded towards it.
    """
    dens = as_density(phi, rule)
    f = dens.as_field()
    sphere = dens.sphere
    c = np.asarray(sphere.center, float)
    k = _kappa("cauchy_full", rule.dim, kappa)
    out = []
    for y in rule.nodes:
        nt = (y - c) / sphere.radius
        g = qd.graded_sphere_rule(sphere, order, nt, 0.0, panels)
        keep = np.sum((g.nodes - y) ** 2, axis=1) > K.MIN_SEPARATION**2
        X = g.nodes[keep]
        out.append(k * _sum(kerzman_stein_integrand(X, g.normals[keep], y, nt, f.eval(X)), g.weights[keep]))
    return np.array(out)


def discrete_pairing(rule, a, b) -> float:
    """sum_i w_i <a_i, b_i> with the coefficient inner product."""
    return math.fsum(rule.weights * np.sum(np.asarray(a) * np.asarray(b), axis=1))


# Poisson extension


def poisson_tail_mass(yn: float, R: float, n: int, kappa: float) -> float:
    """Kernel mass outside the disc of radius R about the foot of y."""
    wn1 = K.omega(n - 1)
    g = lambda r: r ** (n - 2) * 2.0 / (r * r + yn * yn) ** (n - 1)
    return kappa * yn ** (n - 1) * wn1 * quad(g, R, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]


def _boundary_values(phi, X):
    v = np.asarray(phi(X), float)
    return v


def poisson_extend(phi, y, disc=None, order: int = 24, kappa=None, tail_value=None, n: int | None = None):
    """Poisson integral of boundary data phi on R^{n-1} at y.

    ``phi`` maps boundary coordinates (m, n) with x_n = 0 to values (m,) or
    (m, 2**n).  Without ``disc`` a disc about the foot of y with radius
    20 (y_n + |y'|) (at least 20) is used.  ``tail_value`` adds
    tail_value * (kernel mass outside the disc), which is exact for data
    that are constant outside it.
    """
    y = np.asarray(cl.as_coords(y), float)
    n = y.shape[0]
    if y[-1] <= 0:
        raise cl.CliffordDomainError("poisson_extend needs y_n > 0")
    k = _kappa("poisson", n, kappa)
    foot = y[:-1]
    if disc is None:
        disc = qd.BoundaryDisc(tuple(foot), max(20.0, 20.0 * (y[-1] + float(np.linalg.norm(foot)))))
    centred = np.allclose(np.asarray(disc.center, float), foot)
    need = 20.0 * (y[-1] + float(np.linalg.norm(foot - np.asarray(disc.center, float))))
    if disc.radius < need:
        bound = 2.0 * k * K.omega(n - 1) * y[-1] ** (n - 1) * (disc.radius / 2) ** (1 - n) / (n - 1)
        warnings.warn(f"truncation radius {disc.radius:.3g} below {need:.3g}; tail mass bound {bound:.2e}")
    rule = qd.disc_rule(disc, order, inner=min(1e-3, 0.05 * y[-1]))
    vals = _boundary_values(phi, rule.nodes)
    kern = K.poisson_kernel(rule.nodes, y, kappa=k)
    out = _sum(kern.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals, rule.weights)
    if tail_value is not None:
        if not centred:
            raise ValueError("tail correction needs a disc centred at the foot of y")
        out = out + np.asarray(tail_value, float) * poisson_tail_mass(y[-1], disc.radius, n, k)
    return float(out) if np.ndim(out) == 0 else out


def boundary_expansion_basis(t, n: int) -> np.ndarray:
    """Leading terms of a hyperbolic harmonic function in the height t above the boundary.

    The indicial exponents are 0 and n - 1, so the expansion starts
    phi + a t^2 + b t^{n-1}; when n - 1 is even the two series resonate and
    t^{n-1} is replaced by t^{n-1} log t.
    """
    t = np.asarray(t, float)
    last = t ** (n - 1) * np.log(t) if (n - 1) % 2 == 0 else t ** (n - 1)
    return np.stack([np.ones_like(t), t * t, last], axis=-1)


def poisson_boundary_limit(phi, x0, heights=(0.1, 0.05, 0.025), order: int = 24, kappa=None):
    """Value at height 0 above the boundary point x0, fitted to the boundary expansion.

    Returns (limit, values at the given heights).
    """
    x0 = np.asarray(x0, float)
    n = x0.shape[0] + 1
    vals = np.array([np.atleast_1d(poisson_extend(phi, np.r_[x0, h], order=order, kappa=kappa)) for h in heights])
    B = boundary_expansion_basis(np.asarray(heights, float), n)
    coef = np.linalg.lstsq(B, vals.reshape(len(heights), -1), rcond=None)[0]
    lim = coef[0].reshape(vals.shape[1:])
    return (float(lim[0]) if lim.size == 1 else lim), vals


def poisson_mass(y, order: int = 24, kappa=None) -> float:
    return poisson_extend(lambda X: np.ones(X.shape[0]), y, order=order, kappa=kappa, tail_value=1.0)


# conformal covariance


def transformed_field(f, psi, factor: str = "J") -> calc.CliffordField:
    """v -> J(psi, v) f(psi(v)) (or J' or J1 in place of J)."""
    f = _field(f, psi.dim)

    def fn(V):
        J = mb.conformal_factor(factor, psi, V)
        fv = f.eval(psi.apply_coeffs(V))
        return fv * J[:, None] if np.ndim(J) == 1 else cl.gp(J, fv)

    return calc.CliffordField(fn, psi.dim, name=f"{factor}*{f.name}@psi")


def composed_field(f, psi) -> calc.CliffordField:
    f = _field(f, psi.dim)
    return calc.CliffordField(lambda V: f.eval(psi.apply_coeffs(V)), psi.dim, name=f"{f.name}@psi")


def conformal_covariance_residual(f, psi, probes, mode: str = "hypermonogenic", factor: str = "Jprime", cfg=calc.DEFAULT):
    """Max residual of conformal covariance of M at the probe points.

    ``hypermonogenic``: |M[J (f o psi)]| for hypermonogenic f.
    ``intertwining``: |M[J (f o psi)] - J' (Mf) o psi| for any C^1 f;
    ``factor`` selects J' (``Jprime``) or its reversion form.
    """
    P = np.atleast_2d(np.asarray(probes, float))
    g = transformed_field(f, psi, "J")
    lhs = calc.dirac_hodge_M(g, P, cfg)
    if mode == "hypermonogenic":
        return float(np.max(cl.norm(lhs)))
    if mode != "intertwining":
        raise ValueError("mode must be 'hypermonogenic' or 'intertwining'")
    f = _field(f, psi.dim)
    Mf = calc.M_field(f, cfg)
    rhs = cl.gp(mb.conformal_factor(factor, psi, P), Mf.eval(psi.apply_coeffs(P)))
    return float(np.max(cl.norm(lhs - rhs)))


def laplacian_covariance_residual(phi, psi, probes, operator: str = "prime", mode: str = "annihilated", cfg=calc.DEFAULT):
    """Covariance of Delta' (``prime``) or Delta_hyp (``hyperbolic``) under psi.

    ``annihilated``: |L[phi o psi]| for phi with L phi = 0.
    ``full``: |L[phi o psi] - J1 (L phi) o psi| for any C^2 phi.
    """
    P = np.atleast_2d(np.asarray(probes, float))
    op = {"prime": calc.laplacian_prime, "hyperbolic": calc.laplacian_hyperbolic}[operator]
    phi = _field(phi, psi.dim)
    lhs = op(composed_field(phi, psi), P, cfg)
    if mode == "annihilated":
        return float(np.max(cl.norm(lhs)))
    if mode != "full":
        raise ValueError("mode must be 'annihilated' or 'full'")
    img = psi.apply_coeffs(P)
    rhs = mb.conformal_factor("J1", psi, P)[:, None] * op(phi, img, cfg)
    return float(np.max(cl.norm(lhs - rhs)))


def power_function(k: int, y):
    """Member k of the hypermonogenic family generated from -v^{-1} e_1.

    k < 0:  -(v^{-1} e_1)^{|k|}, proportional to the (|k|-1)-th derivative
            in v_1 of -v^{-1} e_1 (M commutes with d/dv_1);
    k >= 0: (-1)^{k+1} e_1 (v e_1)^k, the image of member -k-1 under the
            Kelvin inversion f -> -v^{-1} f(-v^{-1}).
    Batched over y of shape (m, n).
    """
    Y = np.asarray(cl.as_coords(y) if isinstance(y, cl.Point) else y, float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    n = Y.shape[1]
    e1 = np.broadcast_to(cl.basis_vector(n, 1), (Y.shape[0], 1 << n))
    if k < 0:
        if np.any(np.sum(Y * Y, axis=1) == 0):
            raise cl.CliffordDomainError("negative powers are singular at the origin")
        step = cl.gp(cl.embed_vector(cl.vector_inverse_coords(Y)), e1)
        out = -step
        for _ in range(-k - 1):
            out = cl.gp(out, step)
    else:
        step = cl.gp(cl.embed_vector(Y), e1)
        out = (-1.0) ** (k + 1) * e1
        for _ in range(k):
            out = cl.gp(out, step)
    return _finish(out, single, n)


def power_field(k: int, n: int) -> calc.CliffordField:
    return calc.CliffordField(lambda Y: power_function(k, Y), n, name=f"power[{k}]")


# Moebius-transformed Cauchy formula


def fit_sphere(points):
    """Centre and radius of the sphere through the given points (least squares)."""
    P = np.asarray(points, float)
    A = np.concatenate([2 * P, np.ones((P.shape[0], 1))], axis=1)
    b = np.sum(P * P, axis=1)
    sol = np.linalg.lstsq(A, b, rcond=None)[0]
    c = sol[:-1]
    return c, float(np.sqrt(sol[-1] + c @ c))


def pulled_back_rule(psi, sphere, order: int):
    """The image under psi^{-1} of a sphere rule, by change of variables.

    Nodes are mapped by psi^{-1}, weights scaled by |d psi^{-1}|^{n-1} =
    |c'x + d'|^{-2(n-1)}; the image is again a sphere and its outward
    normals are taken from the fitted centre.
    """
    inv = psi.inverse()
    base = qd.sphere_rule(sphere, order)
    U = inv.apply_coeffs(base.nodes)
    den = inv.denominator(base.nodes)
    scale = np.sum(den * den, axis=1) ** (-(sphere.dim - 1))
    c, r = fit_sphere(U)
    normals = (U - c) / np.linalg.norm(U - c, axis=1, keepdims=True)
    meta = {"region": "sphere", "center": c.tolist(), "radius": r, "order": order}
    return qd.SurfaceRule(U, normals, base.weights * scale, "pulled_back_sphere", meta)


def mobius_cauchy(f, psi, sphere, v, order: int = 32, kappa=None):
    """Cauchy formula applied to v -> J(psi, v) f(psi(v)) over the boundary of psi^{-1}(ball).

    Returns (pulled-back-rule value, direct-rule value on the image sphere,
    target J(psi, v) f(psi(v))).
    """
    g = transformed_field(f, psi, "J")
    pulled = pulled_back_rule(psi, sphere, order)
    direct = qd.sphere_rule(qd.Sphere(tuple(pulled.meta["center"]), pulled.meta["radius"]), order)
    V = np.atleast_2d(np.asarray(v, float))
    a = cauchy_full(g, pulled, V, kappa=kappa)
    b = cauchy_full(g, direct, V, kappa=kappa)
    return a, b, g.eval(V)


# volume potentials (compactly supported data)


def volume_potential(kind: str, psi, region, y, order: int = 20):
    """Volume potentials of compactly supported psi (supported in ``region``).

    ``green``: int G(x,y) psi(x) x_n^{2-n} dx
    ``h``:     int h(x,y) psi(x) x_n^{2-n} dx
    ``prime``: y_n^{n-2} int H(x,y) psi(x) dx
    """
    n = region.dim
    psi = _field(psi, n)
    Y, single = _targets(y)
    out = []
    for t in Y:
        if kind == "green":
            g = lambda Z, t=t: K.G(Z, t)[:, None] * psi.eval(Z) * Z[:, -1:] ** (2 - n)
        elif kind == "h":
            g = lambda Z, t=t: cl.gp(K.h_kernel(Z, t), psi.eval(Z)) * Z[:, -1:] ** (2 - n)
        elif kind == "prime":
            g = lambda Z, t=t: t[-1] ** (n - 2) * K.H(Z, t)[:, None] * psi.eval(Z)
        else:
            raise ValueError(f"unknown potential {kind!r}")
        out.append(_volume_integral(region, t, g, order))
    return _finish(out, single, n)


def volume_potential_field(kind, psi, region, order: int = 20) -> calc.CliffordField:
    return calc.CliffordField(lambda Y: volume_potential(kind, psi, region, Y, order), region.dim, name=f"{kind}_potential")


NESTED = calc.DiffConfig(step=2e-2, richardson_levels=3)


def volume_identity(name: str, psi, region, y, lap=None, order: int = 20, cfg: calc.DiffConfig = NESTED, kappa=None):
    """Both sides (kappa * lhs, psi(y)) of a volume-potential identity.

    ``green_potential``:              int G (Delta_hyp psi) x_n^{2-n} dx
    ``h_potential``:                  P M_y int h psi x_n^{2-n} dx
    ``laplacian_of_green_potential``: Delta_hyp,y int G psi x_n^{2-n} dx
    ``prime_potential``:              Delta'_y y_n^{n-2} int H psi dx
    """
    n = region.dim
    psi = _field(psi, n)
    Y, single = _targets(y)
    if name == "green_potential":
        if lap is None:
            lap = calc.CliffordField(lambda Z: calc.laplacian_hyperbolic(psi, Z), n)
        lhs = np.atleast_2d(volume_potential("green", _field(lap, n), region, Y, order))
    elif name == "h_potential":
        lhs = cl.p_part(calc.dirac_hodge_M(volume_potential_field("h", psi, region, order), Y, cfg))
    elif name == "laplacian_of_green_potential":
        lhs = calc.laplacian_hyperbolic(volume_potential_field("green", psi, region, order), Y, cfg)
    elif name == "prime_potential":
        lhs = calc.laplacian_prime(volume_potential_field("prime", psi, region, order), Y, cfg)
    else:
        raise ValueError(f"unknown identity {name!r}")
    k = _kappa(name, n, kappa)
    return k * np.atleast_2d(lhs), psi.eval(Y)


# calibration


def _probe_points(center, radius, count=5):
    n = center.shape[0]
    dirs = []
    for j in range(count):
        v = np.array([math.cos(1.3 * j + 0.2 * k) for k in range(n)])
        v[j % n] += 1.5
        dirs.append(v / np.linalg.norm(v))
    fr = [0.0, 0.2, 0.35, 0.45, 0.3, 0.25, 0.4]
    return np.array([center + fr[j % len(fr)] * radius * dirs[j] for j in range(count)])


def bump(center, radius, power: int = 4):
    """(1 - |x - c|^2 / r^2)_+^power and its hyperbolic Laplacian, as scalar functions."""
    c = np.asarray(center, float)

    def value(X):
        s = np.clip(1.0 - np.sum((X - c) ** 2, axis=-1) / radius**2, 0.0, None)
        return s**power

    def lap_hyp(X):
        n = X.shape[-1]
        rho2 = np.sum((X - c) ** 2, axis=-1)
        s = np.clip(1.0 - rho2 / radius**2, 0.0, None)
        lap = power * (power - 1) * s ** (power - 2) * 4 * rho2 / radius**4 - power * s ** (power - 1) * 2 * n / radius**2
        dn = power * s ** (power - 1) * (-2.0 * (X[..., -1] - c[-1]) / radius**2)
        return lap - (n - 2) / X[..., -1] * dn

    return value, lap_hyp


def scalar_field(fn, n) -> calc.CliffordField:
    def out(X):
        v = np.zeros((X.shape[0], 1 << n))
        v[:, 0] = fn(X)
        return v

    return calc.CliffordField(out, n)


def _calibration_samples(formula: str, n: int, order: int, radii):
    """Pairs (raw value with kappa = 1, exact value) over probes and radii."""
    e1 = cl.basis_vector(n, 1)
    en = cl.basis_vector(n, n)
    samples = []
    for r in radii:
        center = np.zeros(n)
        center[-1] = 2.0
        sph = qd.Sphere(tuple(center), r)
        S = qd.sphere_rule(sph, order)
        P = _probe_points(center, r)
        vorder = max(8, order // 2 + 4)
        if formula == "cauchy_P":
            raw, _ = cauchy_P_integral(calc.CliffordField.constant(e1, n), S, P)
            ref = np.tile(e1, (len(P), 1))
        elif formula == "cauchy_full":
            raw, _ = cauchy_full_integral(calc.CliffordField.constant(e1, n), S, P)
            ref = np.tile(e1, (len(P), 1))
        elif formula == "cauchy_Q":
            f = calc.CliffordField.constant(en, n)
            Mf = scalar_field(lambda X: (n - 2) / X[:, -1], n)
            raw, _ = cauchy_Q_integral(f, S, P, Mf, sph, vorder)
            ref = np.tile(cl.q_part(en), (len(P), 1))
        elif formula in ("borel_pompeiu", "borel_pompeiu_P"):
            f = calc.CliffordField(lambda X: X[:, -1:] * e1, n)
            Mf = calc.CliffordField.constant(cl.gp(en, e1), n)
            fn = borel_pompeiu_integral if formula == "borel_pompeiu" else borel_pompeiu_P_integral
            raw, _ = fn(f, Mf, S, sph, P, vorder)
            ref = f.eval(P)
        elif formula == "greens_hyperbolic":
            h = scalar_field(lambda X: X[:, -1] ** (n - 1), n)
            Mh = calc.CliffordField(lambda X: (n - 1) * X[:, -1:] ** (n - 2) * en, n)
            raw, _ = greens_hyperbolic_integral(h, Mh, S, P)
            ref = h.eval(P)
        elif formula == "greens_prime":
            u = calc.CliffordField(lambda X: X[:, -1:] * en, n)
            Mu = calc.CliffordField(lambda X: np.tile(-1.0 + (n - 2), (X.shape[0], 1)) * np.eye(1 << n)[0], n)
            raw, _ = greens_prime_integral(u, Mu, S, P)
            ref = u.eval(P)
        elif formula == "poisson":
            Yp = P.copy()
            raw = np.array([[poisson_mass(t, order=max(order, 16), kappa=1.0)] for t in Yp])
            ref = np.ones((len(P), 1))
        elif formula == "teodorescu":
            val, _ = bump(center, r)
            L = calc.CliffordField(lambda X: val(X)[:, None] * (0.5 * np.eye(1 << n)[0] + e1 + 0.3 * en), n)
            I = teodorescu_field(L, sph, vorder)
            Pi = P[1:]
            raw = calc.dirac_hodge_M(I, Pi, NESTED)
            ref = L.eval(Pi)
        elif formula in ("green_potential", "h_potential", "laplacian_of_green_potential", "prime_potential"):
            val, lap = bump(center, r)
            psi = calc.CliffordField(lambda X: val(X)[:, None] * (np.eye(1 << n)[0] + 0.5 * e1), n)
            lapf = calc.CliffordField(lambda X: lap(X)[:, None] * (np.eye(1 << n)[0] + 0.5 * e1), n)
            if formula == "prime_potential":
                psi = scalar_field(val, n)
            Pi = P[1:]
            raw, ref = volume_identity(formula, psi, sph, Pi, lap=lapf, order=vorder, kappa=1.0)
        else:
            raise ValueError(f"unknown formula {formula!r}")
        samples.append((np.atleast_2d(raw), np.atleast_2d(ref), r, P))
    return samples


def calibrate(formula: str, n: int = 3, order: int | None = None, radii=(0.5, 0.35)) -> CalibrationResult:
    """Measure the constant of a formula from exact solutions at several probes.

    kappa_i = <raw_i, ref_i> / <raw_i, raw_i> per probe; the reported kappa
    is their mean and ``spread`` is (max - min) / |mean|.
    """
    if formula not in CONSTANTS:
        raise ValueError(f"unknown formula {formula!r}; known: {', '.join(FORMULAS)}")
    if n < 3:
        raise cl.DimensionError("n must be >= 3")
    if order is None:
        order = {3: 24, 4: 14}.get(n, 10)
    ks, probes = [], []
    for raw, ref, r, P in _calibration_samples(formula, n, order, radii):
        for i in range(raw.shape[0]):
            den = float(np.dot(raw[i], raw[i]))
            if den == 0.0:
                raise CalibrationError(f"{formula}: raw integral vanished at a probe")
            ks.append(float(np.dot(raw[i], ref[i])) / den)
            probes.append({"radius": r, "point": P[min(i, len(P) - 1)].tolist()})
    ks = np.array(ks)
    kappa = float(np.mean(ks))
    spread = float((ks.max() - ks.min()) / abs(kappa))
    cands = [(label, float(fn(n))) for label, fn in CONSTANTS[formula]["printed"]]
    best, note = NO_MATCH, ""
    for label, val in cands:
        if abs(kappa - val) <= 1e-6 * abs(val):
            best = label
            break
    if best == NO_MATCH:
        for label, val in cands:
            if abs(kappa + val) <= 1e-6 * abs(val):
                note = f"magnitude matches {label} with the opposite sign"
    dlabel, dfn = CONSTANTS[formula]["derived"]
    dval = float(dfn(n))
    return CalibrationResult(
        formula, n, kappa, cands, best, spread, (dlabel, dval), bool(abs(kappa - dval) <= 1e-6 * abs(dval)), note, probes
    )


@lru_cache(maxsize=None)
def calibrated(formula: str, n: int) -> CalibrationResult:
    return calibrate(formula, n)


def kappa_for(formula: str, n: int) -> float:
    """Measured constant of a formula (calibrated once per process, then cached)."""
    res = calibrated(formula, n)
    if not res.ok:
        raise CalibrationError(f"{formula}: calibration spread {res.spread:.2e} exceeds 1e-6")
    return res.kappa
