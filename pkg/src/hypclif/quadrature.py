"""Deterministic quadrature rules for spheres, boxes, balls and boundary discs.

Sphere rules are tensor products in hyperspherical angles: the polar
factors carry weight sin^k(phi) and use Gauss-Jacobi nodes in cos(phi)
(Gauss-Legendre for k = 1), the azimuth uses the periodic trapezoid rule.
Sums use ``math.fsum`` per component so results do not depend on how the
integrand was evaluated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from . import clifford as cl


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceRule:
    nodes: np.ndarray  # (m, n)
    normals: np.ndarray  # (m, n), outward unit
    weights: np.ndarray  # (m,)
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "surface",
                "label": self.label,
                "nodes": self.nodes.tolist(),
                "normals": self.normals.tolist(),
                "weights": self.weights.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SurfaceRule":
        d = json.loads(text)
        if d.get("kind") != "surface":
            raise QuadratureError("not a surface rule document")
        return cls(np.array(d["nodes"]), np.array(d["normals"]), np.array(d["weights"]), d.get("label", ""))


@dataclass(frozen=True)
class VolumeRule:
    nodes: np.ndarray
    weights: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {"kind": "volume", "label": self.label, "nodes": self.nodes.tolist(), "weights": self.weights.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "VolumeRule":
        d = json.loads(text)
        if d.get("kind") != "volume":
            raise QuadratureError("not a volume rule document")
        return cls(np.array(d["nodes"]), np.array(d["weights"]), d.get("label", ""))

    def restrict(self, mask) -> "VolumeRule":
        return VolumeRule(self.nodes[mask], self.weights[mask], self.label, dict(self.meta))


# region specs


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if not self.radius > 0:
            raise QuadratureError("radius must be positive")
        if c[-1] - self.radius <= 0:
            raise QuadratureError("sphere must lie strictly inside upper half space")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, y) -> bool:
        return bool(np.linalg.norm(np.asarray(y) - np.asarray(self.center)) < self.radius)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise QuadratureError("degenerate box")
        if lo[-1] <= 0:
            raise QuadratureError("box must lie strictly inside upper half space")

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, y) -> bool:
        y = np.asarray(y)
        return bool(np.all(y > np.asarray(self.lo)) and np.all(y < np.asarray(self.hi)))


@dataclass(frozen=True)
class BoundaryDisc:
    """Disc of radius ``radius`` in R^{n-1} = {x_n = 0} centred at ``center`` (n-1 coords)."""

    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise QuadratureError("radius must be positive")

    @property
    def dim(self):
        return len(self.center) + 1


# one-dimensional building blocks


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0):
    t, w = roots_legendre(order)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def _polar_factor(k: int, order: int):
    """Nodes phi in (0, pi) and weights for int_0^pi g(phi) sin^k(phi) dphi."""
    if k == 0:
        phi, w = gauss_legendre(order, 0.0, math.pi)
        return phi, w
    alpha = (k - 1) / 2.0
    if alpha == 0.0:
        t, w = roots_legendre(order)
    else:
        t, w = roots_jacobi(order, alpha, alpha)
    return np.arccos(t), w


def unit_sphere_angles(d: int, order: int):
    """Nodes (unit vectors in R^d) and weights on S^{d-1}."""
    if d < 2:
        raise QuadratureError("sphere dimension must be >= 2")
    naz = 2 * order
    az = 2.0 * math.pi * np.arange(naz) / naz
    waz = np.full(naz, 2.0 * math.pi / naz)
    # points built recursively: x = (cos phi, sin phi * x_rest)
    pts = np.stack([np.cos(az), np.sin(az)], axis=1)
    w = waz
    for k in range(1, d - 1):
        phi, wp = _polar_factor(k, order)
        c, s = np.cos(phi), np.sin(phi)
        pts = np.concatenate(
            [c[:, None, None] * np.ones((1, pts.shape[0], 1)), s[:, None, None] * pts[None]], axis=2
        ).reshape(-1, k + 2)
        w = (wp[:, None] * w[None, :]).reshape(-1)
    return pts, w


def _rotation_to(axis_from, axis_to):
    """Orthogonal matrix R with R @ axis_from = axis_to (Householder composition)."""
    a = np.asarray(axis_from, float)
    b = np.asarray(axis_to, float)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    d = a.shape[0]

    def householder(v):
        nv = np.linalg.norm(v)
        if nv < 1e-15:
            return np.eye(d)
        v = v / nv
        return np.eye(d) - 2.0 * np.outer(v, v)

    # two reflections: a -> -a ... -> b keeps the determinant +1
    H1 = householder(a - (-a))  # maps a -> -a
    H2 = householder(-a - b)  # maps -a -> b
    if np.linalg.norm(-a - b) < 1e-15:
        return H1
    return H2 @ H1


# surfaces


def sphere_rule(spec: Sphere, order: int, pole=None) -> SurfaceRule:
    """Product Gauss rule on a sphere; ``pole`` optionally aligns the polar axis."""
    c = np.asarray(spec.center, dtype=float)
    u, w = unit_sphere_angles(spec.dim, order)
    if pole is not None:
        R = _rotation_to(np.eye(spec.dim)[0], np.asarray(pole, float))
        u = u @ R.T
    nodes = c + spec.radius * u
    return SurfaceRule(
        nodes, u.copy(), w * spec.radius ** (spec.dim - 1), f"sphere(r={spec.radius},order={order})",
        {"region": "sphere", "center": c.tolist(), "radius": spec.radius, "order": order},
    )


def _cap_polar_panels(k: int, theta0: float, order: int, panels: int, grade: float = 2.5):
    """Composite Gauss-Legendre in phi on [theta0, pi], panels graded towards theta0."""
    if theta0 <= 0:
        edges = np.concatenate([[0.0], math.pi * grade ** (np.arange(-panels + 1, 1))])
    else:
        span = math.pi - theta0
        edges = [theta0]
        width = min(theta0, span / (grade**panels))
        pos = theta0
        while pos + width < math.pi and len(edges) < panels + 1:
            pos += width
            edges.append(pos)
            width *= grade
        edges[-1] = math.pi
        edges = np.array(edges)
    phis, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        p, w = gauss_legendre(order, a, b)
        phis.append(p)
        ws.append(w * np.sin(p) ** k)
    return np.concatenate(phis), np.concatenate(ws)


def graded_sphere_rule(spec: Sphere, order: int, pole, theta0: float = 0.0, panels: int = 12) -> SurfaceRule:
    """Sphere rule with polar axis at ``pole`` and angular panels graded towards it.

    With ``theta0 > 0`` the polar cap phi < theta0 is excluded, which is the
    symmetric excision used for principal values.
    """
    d = spec.dim
    c = np.asarray(spec.center, dtype=float)
    phi, wphi = _cap_polar_panels(d - 2, theta0, order, panels)
    if d == 2:
        raise QuadratureError("graded rule needs n >= 3")
    rest, wrest = unit_sphere_angles(d - 1, order)
    u = np.concatenate(
        [np.repeat(np.cos(phi), rest.shape[0])[:, None], (np.sin(phi)[:, None, None] * rest[None]).reshape(-1, d - 1)],
        axis=1,
    )
    w = (wphi[:, None] * wrest[None, :]).reshape(-1)
    R = _rotation_to(np.eye(d)[0], np.asarray(pole, float))
    u = u @ R.T
    return SurfaceRule(
        c + spec.radius * u, u, w * spec.radius ** (d - 1), f"graded_sphere(r={spec.radius},theta0={theta0:.3g})",
        {"region": "sphere", "center": c.tolist(), "radius": spec.radius, "order": order, "theta0": theta0},
    )


def cap_angle(radius: float, eps: float) -> float:
    """Polar angle of the set {x on the sphere : |x - y| < eps}."""
    if not 0 < eps < 2 * radius:
        raise QuadratureError("cap radius must be in (0, 2r)")
    return 2.0 * math.asin(eps / (2.0 * radius))


def pv_sphere_rule(spec: Sphere, order: int, y_on_surface, eps: float, panels: int = 12) -> SurfaceRule:
    """Sphere rule with the cap |x - y| < eps removed (symmetric about y)."""
    if eps >= spec.radius:
        raise QuadratureError("cap radius must be smaller than the sphere radius")
    c = np.asarray(spec.center, float)
    y = np.asarray(cl.as_coords(y_on_surface), float)
    if abs(np.linalg.norm(y - c) - spec.radius) > 1e-9 * spec.radius:
        raise QuadratureError("y is not on the sphere")
    rule = graded_sphere_rule(spec, order, y - c, cap_angle(spec.radius, eps), panels)
    meta = dict(rule.meta, eps=eps)
    return SurfaceRule(rule.nodes, rule.normals, rule.weights, f"pv_sphere(eps={eps:.3g})", meta)


def spherical_cap_area(radius: float, theta: float, n: int) -> float:
    """Area of {phi < theta} on a sphere of radius r in R^n."""
    from scipy.integrate import quad

    s = quad(lambda p: math.sin(p) ** (n - 2), 0.0, theta, epsabs=1e-15, epsrel=1e-14)[0]
    return radius ** (n - 1) * s * _sphere_area(n - 1)


def _sphere_area(d: int) -> float:
    """Area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def _tensor_gl(lo, hi, order):
    grids = [gauss_legendre(order, a, b) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*[g[0] for g in grids], indexing="ij"), axis=-1).reshape(-1, len(lo))
    w = np.ones(1)
    for g in grids:
        w = (w[:, None] * g[1][None, :]).reshape(-1)
    return pts, w


def box_boundary_rule(spec: Box, order: int) -> SurfaceRule:
    lo = np.asarray(spec.lo, float)
    hi = np.asarray(spec.hi, float)
    n = lo.shape[0]
    nodes, normals, weights = [], [], []
    for j in range(n):
        others = [i for i in range(n) if i != j]
        pts, w = _tensor_gl(lo[others], hi[others], order)
        for side, val in ((-1.0, lo[j]), (1.0, hi[j])):
            full = np.empty((pts.shape[0], n))
            full[:, others] = pts
            full[:, j] = val
            nrm = np.zeros((pts.shape[0], n))
            nrm[:, j] = side
            nodes.append(full)
            normals.append(nrm)
            weights.append(w)
    return SurfaceRule(
        np.concatenate(nodes), np.concatenate(normals), np.concatenate(weights), f"box_boundary(order={order})",
        {"region": "box", "lo": lo.tolist(), "hi": hi.tolist(), "order": order},
    )


def box_rule(spec: Box, order: int) -> VolumeRule:
    pts, w = _tensor_gl(np.asarray(spec.lo, float), np.asarray(spec.hi, float), order)
    return VolumeRule(pts, w, f"box(order={order})", {"region": "box", "order": order})


def ball_rule(spec: Sphere, order: int, radial_order: int | None = None, r_min: float = 0.0) -> VolumeRule:
    """Ball (optionally an annulus r_min < r < R) as radial Gauss x sphere rule."""
    d = spec.dim
    c = np.asarray(spec.center, float)
    r, wr = gauss_legendre(radial_order or order, r_min, spec.radius)
    u, wu = unit_sphere_angles(d, order)
    pts = c + (r[:, None, None] * u[None]).reshape(-1, d)
    w = ((wr * r ** (d - 1))[:, None] * wu[None, :]).reshape(-1)
    return VolumeRule(pts, w, f"ball(order={order})", {"region": "ball", "order": order})


def star_rule(region, y, order: int, radial_order: int | None = None, r_min: float = 0.0) -> VolumeRule:
    """Volume rule in polar coordinates centred at an interior point ``y``.

    The Jacobian r^{n-1} cancels kernels of order |x - y|^{1-n}, so weakly
    singular volume potentials become smooth integrands.  Balls use one
    radial segment per direction; boxes are split into the 2n pyramids with
    apex y.  ``r_min > 0`` excises the ball |x - y| < r_min (balls only).
    """
    y = np.asarray(cl.as_coords(y), float)
    d = y.shape[0]
    m = radial_order or order
    if not region.contains(y):
        raise QuadratureError("star rule centre must be inside the region")
    if isinstance(region, Sphere):
        c = np.asarray(region.center, float)
        u, wu = unit_sphere_angles(d, order)
        s = (y - c) @ u.T
        rho = -s + np.sqrt(s * s - np.dot(y - c, y - c) + region.radius**2)
        if r_min >= np.min(rho):
            raise QuadratureError("excised ball leaves the region")
        t, wt = gauss_legendre(m, 0.0, 1.0)
        r = r_min + t[:, None] * (rho - r_min)[None, :]  # (m, dirs)
        w = wt[:, None] * (rho - r_min)[None, :] * r ** (d - 1) * wu[None, :]
        pts = y + r[..., None] * u[None]
        return VolumeRule(pts.reshape(-1, d), w.reshape(-1), f"star_ball(order={order})", {"region": "ball", "order": order})
    if isinstance(region, Box):
        if r_min > 0:
            raise QuadratureError("excision is only implemented for balls")
        lo = np.asarray(region.lo, float)
        hi = np.asarray(region.hi, float)
        t, wt = gauss_legendre(m, 0.0, 1.0)
        nodes, weights = [], []
        for j in range(d):
            others = [i for i in range(d) if i != j]
            z, wz = _tensor_gl(lo[others], hi[others], order)
            for val in (lo[j], hi[j]):
                face = np.empty((z.shape[0], d))
                face[:, others] = z
                face[:, j] = val
                height = abs(val - y[j])
                pts = y + t[:, None, None] * (face - y)[None]
                nodes.append(pts.reshape(-1, d))
                weights.append((wt[:, None] * t[:, None] ** (d - 1) * height * wz[None, :]).reshape(-1))
        return VolumeRule(np.concatenate(nodes), np.concatenate(weights), f"star_box(order={order})", {"region": "box", "order": order})
    raise QuadratureError(f"unsupported region {type(region).__name__}")


def disc_rule(spec: BoundaryDisc, order: int, inner: float = 1e-3, grade: float = 2.0) -> VolumeRule:
    """Rule on the disc |x' - c| < R in R^{n-1}, embedded at x_n = 0.

    Radial panels are geometric from ``inner`` outwards (plus one panel on
    [0, inner]) so integrands peaked at the centre are resolved.
    """
    d = spec.dim - 1
    c = np.asarray(spec.center, float)
    edges = [0.0, inner]
    while edges[-1] * grade < spec.radius:
        edges.append(edges[-1] * grade)
    edges.append(spec.radius)
    rs, wrs = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r, w = gauss_legendre(order, a, b)
        rs.append(r)
        wrs.append(w * r ** (d - 1))
    r = np.concatenate(rs)
    wr = np.concatenate(wrs)
    u, wu = unit_sphere_angles(d, order)
    pts = c + (r[:, None, None] * u[None]).reshape(-1, d)
    w = (wr[:, None] * wu[None, :]).reshape(-1)
    full = np.concatenate([pts, np.zeros((pts.shape[0], 1))], axis=1)
    return VolumeRule(full, w, f"disc(R={spec.radius},order={order})", {"region": "disc", "radius": spec.radius})


# integration


def _fsum_rows(terms: np.ndarray) -> np.ndarray:
    flat = terms.reshape(terms.shape[0], -1)
    return np.array([math.fsum(flat[:, k]) for k in range(flat.shape[1])]).reshape(terms.shape[1:])


def weighted_sum(values: np.ndarray, weights: np.ndarray, nodes=None) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    bad = ~np.all(np.isfinite(values.reshape(values.shape[0], -1)), axis=1)
    if np.any(bad):
        i = int(np.argmax(bad))
        where = f" at node {nodes[i].tolist()}" if nodes is not None else ""
        raise QuadratureError(f"non-finite integrand value (node index {i}){where}")
    w = weights.reshape((-1,) + (1,) * (values.ndim - 1))
    return _fsum_rows(values * w)


def integrate_surface(rule: SurfaceRule, integrand) -> np.ndarray:
    """Sum of w_i * integrand(nodes, normals) with exactly rounded per-component sums."""
    return weighted_sum(integrand(rule.nodes, rule.normals), rule.weights, rule.nodes)


def integrate_volume(rule: VolumeRule, integrand) -> np.ndarray:
    return weighted_sum(integrand(rule.nodes), rule.weights, rule.nodes)
