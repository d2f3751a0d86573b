"""Verification experiments: each returns report rows judged against the tolerance table.

A row is (experiment, check, n, order, param, value, tolerance); it passes
when value <= tolerance.  Everything here is deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus as calc
from . import clifford as cl
from . import formulas as F
from . import kernels as K
from . import mobius as mb
from . import quadrature as qd
from .tolerances import tol

COLUMNS = ("experiment", "check", "n", "order", "param", "value", "tolerance", "pass")


@dataclass(frozen=True)
class Row:
    experiment: str
    check: str
    n: int
    order: int
    param: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment, "check": self.check, "n": self.n, "order": self.order,
            "param": self.param, "value": float(self.value), "tolerance": float(self.tolerance),
            "pass": self.passed,
        }


class Recorder:
    def __init__(self, experiment: str, n: int, scale: float = 1.0):
        self.experiment = experiment
        self.n = n
        self.scale = scale
        self.rows: list[Row] = []

    def add(self, check, value, key, order=0, param="", n=None):
        self.rows.append(Row(self.experiment, check, self.n if n is None else n, int(order), param, float(value), tol(key, self.scale)))


def _unit(n):
    return np.eye(1 << n)[0]


def _sphere(n, radius=0.5, height=2.0):
    c = np.zeros(n)
    c[-1] = height
    return qd.Sphere(tuple(c), radius)


def _ball_points(rng, sphere, m, frac=0.6):
    c = np.asarray(sphere.center)
    d = rng.standard_normal((m, sphere.dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return c + frac * sphere.radius * rng.uniform(0.0, 1.0, (m, 1)) ** (1.0 / sphere.dim) * d


def _upper_points(rng, n, m, lo=0.5, hi=2.0, width=1.0):
    P = rng.uniform(-width, width, (m, n))
    P[:, -1] = rng.uniform(lo, hi, m)
    return P


def _pairs(rng, n, m, min_sep=0.3):
    X, Y = [], []
    while len(X) < m:
        x = _upper_points(rng, n, 1)[0]
        y = _upper_points(rng, n, 1)[0]
        if np.linalg.norm(x - y) >= min_sep:
            X.append(x)
            Y.append(y)
    return np.array(X), np.array(Y)


def _rel(a, b):
    return float(np.max(cl.norm(np.asarray(a) - np.asarray(b))) / max(np.max(cl.norm(b)), 1e-300))


# algebra


def algebra_identities(n: int, seed: int = 0, count: int = 1000, scale: float = 1.0) -> list[Row]:
    rec = Recorder("algebra-identities", n, scale)
    rng = np.random.default_rng([seed, n, 1])
    A, B, C = (rng.standard_normal((count, 1 << n)) for _ in range(3))
    size = cl.norm(A) * cl.norm(B)
    size3 = size * cl.norm(C)

    def worst(diff, s):
        return float(np.max(cl.norm(diff) / s))

    AB = cl.gp(A, B)
    rec.add("associativity", worst(cl.gp(AB, C) - cl.gp(A, cl.gp(B, C)), size3), "algebra.relative", param=f"samples={count}")
    rec.add("reverse_anti", worst(cl.reverse(AB) - cl.gp(cl.reverse(B), cl.reverse(A)), size), "algebra.relative")
    rec.add("conjugate_anti", worst(cl.conjugate(AB) - cl.gp(cl.conjugate(B), cl.conjugate(A)), size), "algebra.relative")
    rec.add("involute_auto", worst(cl.involute(AB) - cl.gp(cl.involute(A), cl.involute(B)), size), "algebra.relative")
    rec.add("hat_auto", worst(cl.hat(AB) - cl.gp(cl.hat(A), cl.hat(B)), size), "algebra.relative")
    a = cl.norm(A)
    rec.add("hat_involution", worst(cl.hat(cl.hat(A)) - A, a), "algebra.relative")
    rec.add("p_half_sum", worst(cl.p_part(A) - 0.5 * (A + cl.hat(A)), a), "algebra.relative")
    rec.add("pq_reassembly", worst(cl.p_part(A) + cl.times_en(cl.q_part(A)) - A, a), "algebra.relative")
    en = cl.basis_vector(n, n)
    rec.add("q_prime", worst(cl.q_prime(A) + cl.gp(cl.gp(en, cl.q_part(A)), en), a), "algebra.relative")
    # e_n anticommutes with e_1..e_{n-1}, so -e_n Q e_n is the grade involution of Q
    rec.add("q_prime_is_involute_of_q", worst(cl.q_prime(A) - cl.involute(cl.q_part(A)), a), "algebra.relative")
    e = [cl.basis_vector(n, j) for j in (1, 2, 3)]
    ex = cl.gp(cl.gp(e[0], e[1]), cl.gp(e[1], e[2]))
    rec.add("blade_example", float(np.max(np.abs(ex + cl.gp(e[0], e[2])))), "algebra.relative", param="(e1e2)(e2e3)=-e1e3")
    return rec.rows


def vector_identities(n: int, seed: int = 0, count: int = 500, scale: float = 1.0) -> list[Row]:
    rec = Recorder("kernel-residuals", n, scale)
    rng = np.random.default_rng([seed, n, 2])
    X, Y = _upper_points(rng, n, count, 0.05, 3.0, 2.0), _upper_points(rng, n, count, 0.05, 3.0, 2.0)
    a = np.linalg.norm(X - Y, axis=1)
    b = np.linalg.norm(cl.hat_coords(X) - Y, axis=1)
    s = (a * b * b)[:, None]
    rec.add("I1", float(np.max(cl.norm(K.identity_I1(X, Y) / s))), "vector_identities.relative", param=f"pairs={count}")
    rec.add("I2", float(np.max(cl.norm(K.identity_I2(X, Y) / s))), "vector_identities.relative", param=f"pairs={count}")
    return rec.rows


# kernels


def _scalar(fn, n):
    return calc.CliffordField(lambda X: fn(X)[:, None] * _unit(n), n)


def kernel_fd(n: int, seed: int = 0, count: int = 100, scale: float = 1.0) -> list[Row]:
    """Closed-form derivative kernels against finite differences of their potentials."""
    rec = Recorder("kernel-residuals", n, scale)
    rng = np.random.default_rng([seed, n, 3])
    X, Y = _pairs(rng, n, count)
    worst = {"p": 0.0, "h": 0.0, "q": 0.0, "DyE": 0.0, "DyF": 0.0}
    for x, y in zip(X, Y):
        dx = lambda fn: calc.dirac_left(fn, x)
        dy = lambda fn: calc.dirac_left(fn, y)
        worst["p"] = max(worst["p"], np.max(np.abs(dx(_scalar(lambda Z: K.G(Z, y), n)) - K.p_kernel(x, y))))
        worst["h"] = max(worst["h"], np.max(np.abs(dy(_scalar(lambda Z: K.G(x, Z), n)) - K.h_kernel(x, y))))
        worst["q"] = max(worst["q"], np.max(np.abs(dx(_scalar(lambda Z: K.H(Z, y), n)) - K.q_kernel(x, y))))
        fE = calc.CliffordField(lambda Z: K.E_kernel(x, Z), n)
        fF = calc.CliffordField(lambda Z: K.F_kernel(x, Z), n)
        worst["DyE"] = max(worst["DyE"], np.max(np.abs(dy(fE) - K.DyE_closed(x, y))))
        worst["DyF"] = max(worst["DyF"], np.max(np.abs(dy(fF) - K.DyF_closed(x, y))))
    for k, v in worst.items():
        rec.add(f"{k}_vs_fd", v, "kernel_fd.absolute", param=f"pairs={count}")
    return rec.rows


def kernel_hypermonogenic(n: int, seed: int = 0, count: int = 50, scale: float = 1.0) -> list[Row]:
    rec = Recorder("kernel-residuals", n, scale)
    rng = np.random.default_rng([seed, n, 4])
    X, Y = _pairs(rng, n, count)
    L = rng.standard_normal(1 << n)
    Lh = cl.hat(L)
    r = {"M_x p": 0.0, "M_y h": 0.0, "M_y layer": 0.0, "lap_x G": 0.0, "lap_y G": 0.0}
    for x, y in zip(X, Y):
        r["M_x p"] = max(r["M_x p"], np.max(cl.norm(calc.dirac_hodge_M(calc.CliffordField(lambda Z: K.p_kernel(Z, y), n), x))))
        r["M_y h"] = max(r["M_y h"], np.max(cl.norm(calc.dirac_hodge_M(calc.CliffordField(lambda Z: K.h_kernel(x, Z), n), y))))
        lay = calc.CliffordField(
            lambda Z: Z[:, -1:] ** (n - 2) * (cl.gp(K.E_kernel(x, Z), L) - cl.gp(K.F_kernel(x, Z), Lh)), n
        )
        r["M_y layer"] = max(r["M_y layer"], np.max(cl.norm(calc.dirac_hodge_M(lay, y))))
        r["lap_x G"] = max(r["lap_x G"], abs(calc.laplacian_hyperbolic(_scalar(lambda Z: K.G(Z, y), n), x)[0]))
        r["lap_y G"] = max(r["lap_y G"], abs(calc.laplacian_hyperbolic(_scalar(lambda Z: K.G(x, Z), n), y)[0]))
    for k in ("M_x p", "M_y h", "M_y layer"):
        rec.add(k.replace(" ", "_"), r[k], "hypermonogenic.residual", param=f"probes={count}")
    for k in ("lap_x G", "lap_y G"):
        rec.add(k.replace(" ", "_"), r[k], "hyperbolic_harmonic.residual", param=f"probes={count}")
    return rec.rows


# constants


CALIBRATED = ("cauchy_P", "cauchy_full", "cauchy_Q", "greens_hyperbolic", "greens_prime", "borel_pompeiu", "poisson")


def calibration(n: int, formulas=CALIBRATED, scale: float = 1.0) -> tuple[list[Row], list]:
    rec = Recorder("calibrate", n, scale)
    results = []
    for name in formulas:
        res = F.calibrated(name, n)
        results.append(res)
        match = res.best_match + (f" ({res.note})" if res.note else "")
        rec.add(f"kappa_spread:{name}", res.spread, "kappa.spread", param=f"kappa={res.kappa!r};printed={match};derived={res.derived[0]}")
    return rec.rows, results


# reconstructions


def _constants(n):
    # only Cl_{n-1}-valued constants are hypermonogenic: M(e_n) = (n-2)/x_n
    e = lambda j: cl.basis_vector(n, j)
    return {
        "1": _unit(n),
        "e1": e(1),
        "e1e2": cl.gp(e(1), e(2)),
        "mixed": 0.5 * _unit(n) - e(2) + 0.25 * cl.gp(e(1), e(n - 1)),
    }


def cauchy(n: int, orders=(64,), seed: int = 0, scale: float = 1.0) -> list[Row]:
    rec = Recorder("cauchy", n, scale)
    rng = np.random.default_rng([seed, n, 5])
    sph = _sphere(n)
    inner = _ball_points(rng, sph, 5)
    c = np.asarray(sph.center)
    outer = c + np.array([[0.0] * (n - 1) + [1.0], [1.0] + [0.0] * (n - 1), [0.7] * (n - 1) + [-0.3]])
    fields = {k: calc.CliffordField.constant(v, n) for k, v in _constants(n).items()}
    fields["-v^-1 e1"] = F.power_field(-1, n)
    for order in orders:
        S = qd.sphere_rule(sph, order)
        try:
            for y in np.vstack([inner, outer]):
                F.check_clearance(S, y)
        except F.AccuracyError as exc:
            rec.add("resolution", math.inf, "cauchy.relative", order, str(exc))
            continue
        for name, f in fields.items():
            got = F.cauchy_full(f, S, inner)
            rec.add("reproduce", _rel(got, f.eval(inner)), "cauchy.relative", order, f"f={name}")
            rec.add("exterior", float(np.max(cl.norm(F.cauchy_full(f, S, outer)))), "cauchy.exterior", order, f"f={name}")
        f = fields["-v^-1 e1"]
        rec.add("P_part", _rel(F.cauchy_P(f, S, inner), cl.p_part(f.eval(inner))), "cauchy.relative", order, "f=-v^-1 e1")
    return rec.rows


def convergence(n: int, orders=(8, 16, 32), seed: int = 0, scale: float = 1.0) -> list[Row]:
    """Reconstruction residual under order doubling for a field singular near the sphere."""
    rec = Recorder("convergence", n, scale)
    c = np.zeros(n)
    c[-1] = 0.8
    sph = qd.Sphere(tuple(c), 0.5)
    f = F.power_field(-3, n)
    rng = np.random.default_rng([seed, n, 6])
    P = _ball_points(rng, sph, 4, 0.5)
    ref = f.eval(P)
    floor = 1e-13 * float(np.max(cl.norm(ref)))
    errs = []
    for order in sorted(orders):
        S = qd.sphere_rule(sph, order)
        errs.append(float(np.max(cl.norm(F.cauchy_full(f, S, P, check=False) - ref))))
    for k in range(1, len(errs)):
        ratio = errs[k] / (errs[k - 1] + floor)
        rec.add("residual_ratio", ratio, "convergence.ratio", sorted(orders)[k], f"residual={errs[k]:.3e}")
    return rec.rows


def borel_pompeiu(n: int, order: int = 24, seed: int = 0, scale: float = 1.0) -> list[Row]:
    rec = Recorder("borel-pompeiu", n, scale)
    rng = np.random.default_rng([seed, n, 7])
    sph = _sphere(n)
    S = qd.sphere_rule(sph, order)
    P = _ball_points(rng, sph, 4)
    e1 = cl.basis_vector(n, 1)
    f = calc.CliffordField(lambda X: X[:, -1:] * e1, n)
    rec.add("reproduce", _rel(F.borel_pompeiu(f, None, S, sph, P, order=order), f.eval(P)), "borel_pompeiu.relative", order, "f=x_n e1")
    g = calc.CliffordField(lambda X: np.sin(X[:, :1]) * e1 + X[:, -1:] ** 2 * _unit(n), n)
    rec.add("reproduce", _rel(F.borel_pompeiu(g, None, S, sph, P, order=order), g.eval(P)), "borel_pompeiu.relative", order, "f=sin(x1) e1 + x_n^2")
    rec.add(
        "reproduce_P", _rel(F.borel_pompeiu_P(g, None, S, sph, P, order=order), cl.p_part(g.eval(P))),
        "borel_pompeiu.relative", order, "f=sin(x1) e1 + x_n^2",
    )
    return rec.rows


def green(n: int, order: int = 24, seed: int = 0, scale: float = 1.0) -> list[Row]:
    rec = Recorder("green", n, scale)
    rng = np.random.default_rng([seed, n, 8])
    sph = _sphere(n)
    S = qd.sphere_rule(sph, order)
    P = _ball_points(rng, sph, 4)
    hs = {
        "1": lambda X: np.ones(X.shape[0]),
        "x1": lambda X: X[:, 0],
        "x_n^(n-1)": lambda X: X[:, -1] ** (n - 1),
    }
    for name, fn in hs.items():
        h = _scalar(fn, n)
        err = float(np.max(np.abs(F.greens_hyperbolic(h, None, S, P) - h.eval(P))))
        rec.add("greens_hyperbolic", err, "green.absolute", order, f"h={name}")
    en = cl.basis_vector(n, n)
    u = calc.CliffordField(lambda X: X[:, -1:] * en, n)
    rec.add("greens_prime", float(np.max(np.abs(F.greens_prime(u, None, S, P) - u.eval(P)))), "green.absolute", order, "u=x_n e_n")
    u = calc.CliffordField.constant(en, n)
    got = F.greens_prime(u, None, S, P, volume=sph, order=order)
    rec.add("greens_prime_volume", float(np.max(np.abs(got - u.eval(P)))), "green.absolute", order, "u=e_n")
    return rec.rows


# volume potentials


def _bump_field(sph, n):
    val, lap = F.bump(sph.center, sph.radius)
    mix = 0.5 * _unit(n) + cl.basis_vector(n, 1) + 0.3 * cl.basis_vector(n, n)
    return calc.CliffordField(lambda X: val(X)[:, None] * mix, n), calc.CliffordField(lambda X: lap(X)[:, None] * mix, n)


def teodorescu(n: int, order: int = 20, seed: int = 0, scale: float = 1.0) -> list[Row]:
    rec = Recorder("teodorescu", n, scale)
    rng = np.random.default_rng([seed, n, 9])
    sph = _sphere(n)
    L, _ = _bump_field(sph, n)
    I = F.teodorescu_field(L, sph, order)
    c = np.asarray(sph.center)
    ext = np.array([c + 0.9 * np.eye(n)[j % n] * (1 if j < n else -1) for j in range(2 * n - 1)])
    rec.add("exterior_M", float(np.max(cl.norm(calc.dirac_hodge_M(I, ext, F.NESTED)))), "teodorescu.exterior", order, f"probes={len(ext)}")
    P = _ball_points(rng, sph, 4, 0.5)
    kap = F.kappa_for("teodorescu", n)
    got = kap * calc.dirac_hodge_M(I, P, F.NESTED)
    rec.add("interior_recovery", float(np.max(cl.norm(got - L.eval(P)))), "teodorescu.interior", order, f"kappa={kap!r}")
    zero = F.teodorescu(calc.CliffordField.constant(np.zeros(1 << n), n), sph, P[:1], order)
    rec.add("zero_density", float(np.max(np.abs(zero))), "teodorescu.exterior", order, "L=0")
    return rec.rows


def volume_potentials(n: int, order: int = 20, seed: int = 0, scale: float = 1.0) -> list[Row]:
    rec = Recorder("volume-potentials", n, scale)
    rng = np.random.default_rng([seed, n, 10])
    sph = _sphere(n)
    P = _ball_points(rng, sph, 3, 0.5)
    val, lap = F.bump(sph.center, sph.radius)
    mix = _unit(n) + 0.5 * cl.basis_vector(n, 1)
    psi = calc.CliffordField(lambda X: val(X)[:, None] * mix, n)
    lapf = calc.CliffordField(lambda X: lap(X)[:, None] * mix, n)
    lhs, rhs = F.volume_identity("green_potential", psi, sph, P, lap=lapf, order=order)
    rec.add("green_potential", float(np.max(np.abs(lhs - rhs))), "green_potential.absolute", order)
    for name in ("h_potential", "laplacian_of_green_potential"):
        lhs, rhs = F.volume_identity(name, psi, sph, P, order=order)
        rec.add(name, float(np.max(np.abs(lhs - rhs))), "volume_identity.absolute", order)
    lhs, rhs = F.volume_identity("prime_potential", _scalar(val, n), sph, P, order=order)
    rec.add("prime_potential", float(np.max(np.abs(lhs - rhs))), "volume_identity.absolute", order)
    return rec.rows


# singular integrals


def _smooth_density(n):
    e1, e2 = cl.basis_vector(n, 1), cl.basis_vector(n, 2)
    return calc.CliffordField(lambda X: X[:, :1] * e1 + (X[:, -1:] - 2.0) ** 2 * e2 + 0.3 * X[:, 1:2] * _unit(n), n)


def plemelj(n: int, seed: int = 0, hardy_order: int = 6, scale: float = 1.0) -> list[Row]:
    rec = Recorder("plemelj", n, scale)
    sph = _sphere(n)
    c = np.asarray(sph.center)
    dens = {"e1": calc.CliffordField.constant(cl.basis_vector(n, 1), n), "smooth": _smooth_density(n)}
    rng = np.random.default_rng([seed, n, 11])
    dirs = rng.standard_normal((3, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for name, phi in dens.items():
        jump = half = spread = 0.0
        for d in dirs:
            y = c + sph.radius * d
            r = F.plemelj_boundary(phi, sph, y)
            py = phi.eval(y[None])[0]
            jump = max(jump, float(np.max(np.abs(r.jump() - py))))
            half = max(half, float(np.max(np.abs(r.interior - r.pv - 0.5 * py))))
            spread = max(spread, r.spread)
        rec.add("jump", jump, "plemelj.absolute", 16, f"phi={name}")
        rec.add("interior_minus_pv", half, "plemelj.absolute", 16, f"phi={name}")
        rec.add("extrapolation_spread", spread, "plemelj.absolute", 16, f"phi={name}")
    zero = F.plemelj_boundary(calc.CliffordField.constant(np.zeros(1 << n), n), sph, c + sph.radius * dirs[0])
    rec.add("zero_density", float(max(np.max(np.abs(zero.interior)), np.max(np.abs(zero.exterior)), np.max(np.abs(zero.pv)))), "plemelj.absolute", 16)
    rec.rows.extend(hardy(n, hardy_order, scale))
    return rec.rows


def hardy(n: int, order: int = 6, scale: float = 1.0) -> list[Row]:
    rec = Recorder("plemelj", n, scale)
    sph = _sphere(n)
    rule = qd.sphere_rule(sph, order)
    d = F.as_density(_smooth_density(n), rule)
    plus = F.hardy_project(d, rule, 1)
    rec.add("hardy_idempotent", float(np.max(np.abs(F.hardy_project(plus, rule, 1) - plus))), "hardy.absolute", order)
    minus = F.hardy_project(d, rule, -1)
    rec.add("hardy_annihilate", float(np.max(np.abs(F.hardy_project(minus, rule, 1)))), "hardy.absolute", order)
    f = F.power_field(-1, n)
    tr = F.as_density(f, rule)
    rec.add("hardy_trace_invariant", float(np.max(np.abs(F.hardy_project(tr, rule, 1) - tr.values))), "hardy.invariance", order, "f=-v^-1 e1")
    return rec.rows


def kerzman_stein(n: int, order: int = 6, scale: float = 1.0) -> list[Row]:
    rec = Recorder("plemelj", n, scale)
    sph = _sphere(n)
    rule = qd.sphere_rule(sph, order)
    e1, e3 = cl.basis_vector(n, 1), cl.basis_vector(n, 3)
    phi = F.as_density(_smooth_density(n), rule)
    psi = F.as_density(calc.CliffordField(lambda X: X[:, 1:2] * e3 + X[:, :1] * X[:, -1:] * _unit(n) + 0.5 * cl.gp(e1, e3), n), rule)
    A_phi = F.kerzman_stein(phi, rule)
    A_psi = F.kerzman_stein(psi, rule)
    skew = abs(F.discrete_pairing(rule, A_phi, psi.values) + F.discrete_pairing(rule, phi.values, A_psi))
    rec.add("kerzman_stein_skew", skew, "kerzman_stein.skew", order)
    T = F.singular_operator(phi, rule)
    Ts = F.singular_operator(phi, rule, adjoint=True)
    rec.add("kerzman_stein_vs_T_minus_Tstar", float(np.max(np.abs(A_phi - (T - Ts)))), "kerzman_stein.agreement", order)
    zero = F.kerzman_stein(np.zeros((len(rule), 1 << n)), rule)
    rec.add("kerzman_stein_zero", float(np.max(np.abs(zero))), "kerzman_stein.skew", order)
    return rec.rows


# poisson


def gaussian(X):
    return np.exp(-np.sum(X[:, :-1] ** 2, axis=1))


def poisson(n: int, seed: int = 0, scale: float = 1.0) -> list[Row]:
    rec = Recorder("poisson", n, scale)
    rng = np.random.default_rng([seed, n, 12])
    Y = _upper_points(rng, n, 4, 0.2, 2.0)
    kap = F.kappa_for("poisson", n)
    mass = max(abs(F.poisson_mass(y, kappa=kap) - 1.0) for y in Y)
    rec.add("kernel_mass", mass, "poisson.mass", 24, f"kappa={kap!r}")

    def ext(Z):
        out = np.zeros((Z.shape[0], 1 << n))
        out[:, 0] = [F.poisson_extend(gaussian, z, kappa=kap) for z in Z]
        return out

    u = calc.CliffordField(ext, n)
    P = _upper_points(rng, n, 2, 0.5, 1.5, 0.5)
    lap = calc.laplacian_hyperbolic(u, P, calc.DiffConfig(step=1e-2, richardson_levels=3))
    rec.add("hyperbolic_laplacian", float(np.max(np.abs(lap))), "poisson.laplacian", 24, "phi=gaussian")
    x0 = rng.uniform(-0.5, 0.5, n - 1)
    lim, _ = F.poisson_boundary_limit(gaussian, x0, kappa=kap)
    rec.add("boundary_limit", abs(lim - math.exp(-float(x0 @ x0))), "poisson.boundary", 24, "heights=0.1,0.05,0.025")
    return rec.rows


# conformal


def conformal(n: int, seed: int = 0, transforms: int = 20, probes: int = 20, scale: float = 1.0) -> list[Row]:
    rec = Recorder("conformal", n, scale)
    rng = np.random.default_rng([seed, n, 13])
    P = _upper_points(rng, n, probes, 0.5, 2.0)
    e1 = cl.basis_vector(n, 1)
    const = calc.CliffordField.constant(-e1, n)
    inv_img = F.power_field(-1, n)
    xe1 = calc.CliffordField(lambda X: X[:, -1:] * e1, n)
    xn = _scalar(lambda X: X[:, -1], n)
    xh = _scalar(lambda X: X[:, -1] ** (n - 1), n)
    gen = calc.CliffordField(lambda X: np.sin(X[:, :1]) * X[:, -1:] * e1 + X[:, 1:2] ** 2 * _unit(n), n)
    w = dict.fromkeys(("hm_const", "hm_inv", "inter", "lap_prime", "lap_hyp", "lap_prime_full", "lap_hyp_full"), 0.0)
    for s in range(transforms):
        psi = mb.sample_transform([seed, s], n)
        w["hm_const"] = max(w["hm_const"], F.conformal_covariance_residual(const, psi, P))
        w["hm_inv"] = max(w["hm_inv"], F.conformal_covariance_residual(inv_img, psi, P))
        w["inter"] = max(w["inter"], F.conformal_covariance_residual(xe1, psi, P, mode="intertwining"))
        w["lap_prime"] = max(w["lap_prime"], F.laplacian_covariance_residual(xn, psi, P))
        w["lap_hyp"] = max(w["lap_hyp"], F.laplacian_covariance_residual(xh, psi, P, operator="hyperbolic"))
        w["lap_prime_full"] = max(w["lap_prime_full"], F.laplacian_covariance_residual(gen, psi, P, mode="full"))
        w["lap_hyp_full"] = max(w["lap_hyp_full"], F.laplacian_covariance_residual(gen, psi, P, "hyperbolic", "full"))
    tag = f"transforms={transforms};probes={probes}"
    rec.add("hypermonogenic_image", w["hm_const"], "covariance.hypermonogenic", param=tag + ";f=-e1")
    rec.add("hypermonogenic_image", w["hm_inv"], "covariance.hypermonogenic", param=tag + ";f=-v^-1 e1")
    rec.add("intertwining", w["inter"], "covariance.intertwining", param=tag + ";phi=x_n e1")
    rec.add("laplacian_prime_invariance", w["lap_prime"], "laplacian_covariance.residual", param=tag + ";phi=x_n")
    rec.add("laplacian_hyp_invariance", w["lap_hyp"], "laplacian_covariance.residual", param=tag + ";phi=x_n^(n-1)")
    rec.add("laplacian_prime_covariance", w["lap_prime_full"], "laplacian_covariance.residual", param=tag + ";J1 factor")
    rec.add("laplacian_hyp_covariance", w["lap_hyp_full"], "laplacian_covariance.residual", param=tag + ";J1 factor")
    inv = mb.VahlenTransform(n, (mb.inversion(),))
    rec.add("inversion_image", F.conformal_covariance_residual(const, inv, P), "covariance.hypermonogenic", param="psi=inversion")
    for name, g in (("translation", mb.translation([0.3] + [-0.2] * (n - 2) + [0.0])), ("dilation", mb.dilation(1.7))):
        rec.add(f"{name}_image", F.conformal_covariance_residual(inv_img, mb.VahlenTransform(n, (g,)), P), "covariance.hypermonogenic")
    for k in (-3, -2, -1, 0, 1, 2, 3):
        res = float(np.max(cl.norm(calc.dirac_hodge_M(F.power_field(k, n), P))))
        rec.add("power_function", res, "power.residual", param=f"k={k}")
    rec.rows.extend(mobius_cauchy(n, seed, scale=scale))
    return rec.rows


def mobius_cauchy(n: int, seed: int = 0, count: int = 3, order: int = 32, scale: float = 1.0) -> list[Row]:
    rec = Recorder("conformal", n, scale)
    c = np.zeros(n)
    c[0], c[-1] = 0.3, 2.0
    sph = qd.Sphere(tuple(c), 0.5)
    f = F.power_field(-1, n)
    rng = np.random.default_rng([seed, n, 14])
    worst = 0.0
    for s in range(count):
        psi = mb.sample_transform([seed, 100 + s], n)
        centre = psi.inverse().apply_coeffs(c[None])[0]
        img = F.pulled_back_rule(psi, sph, order)
        V = centre + 0.3 * img.meta["radius"] * rng.uniform(-1, 1, (2, n)) / math.sqrt(n)
        a, b, ref = F.mobius_cauchy(f, psi, sph, V, order)
        worst = max(worst, _rel(a, ref), _rel(b, ref))
    rec.add("mobius_cauchy", worst, "mobius_cauchy.relative", order, f"transforms={count}")
    return rec.rows


# registry


def _calibrate_rows(n, seed, orders, scale):
    return calibration(n, scale=scale)[0]


EXPERIMENTS = {
    "algebra-identities": lambda n, seed, orders, scale: algebra_identities(n, seed, scale=scale),
    "kernel-residuals": lambda n, seed, orders, scale: vector_identities(n, seed, scale=scale)
    + kernel_fd(n, seed, scale=scale)
    + kernel_hypermonogenic(n, seed, scale=scale),
    "calibrate": _calibrate_rows,
    "cauchy": lambda n, seed, orders, scale: cauchy(n, orders, seed, scale),
    "convergence": lambda n, seed, orders, scale: convergence(n, orders, seed, scale),
    "borel-pompeiu": lambda n, seed, orders, scale: borel_pompeiu(n, seed=seed, scale=scale),
    "green": lambda n, seed, orders, scale: green(n, seed=seed, scale=scale),
    "teodorescu": lambda n, seed, orders, scale: teodorescu(n, seed=seed, scale=scale),
    "volume-potentials": lambda n, seed, orders, scale: volume_potentials(n, seed=seed, scale=scale),
    "plemelj": lambda n, seed, orders, scale: plemelj(n, seed, scale=scale) + kerzman_stein(n, scale=scale),
    "poisson": lambda n, seed, orders, scale: poisson(n, seed, scale),
    "conformal": lambda n, seed, orders, scale: conformal(n, seed, scale=scale),
}


def run_experiment(name: str, n: int, seed: int, orders, scale: float) -> list[dict]:
    rows = EXPERIMENTS[name](n, seed, tuple(orders), scale)
    return [r.as_dict() for r in rows]
