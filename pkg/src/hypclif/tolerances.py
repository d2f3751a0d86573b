"""Default tolerances for every reported check.

One table, one version string.  Bump VERSION whenever a value changes so
report files can be matched to the table that judged them.  ``--tol-scale``
multiplies every entry uniformly.
"""

from __future__ import annotations

VERSION = "1.0"

TOLERANCES: dict[str, float] = {
    # algebra
    "algebra.relative": 1e-12,
    "vector_identities.relative": 1e-12,
    # kernels
    "kernel_fd.absolute": 1e-7,
    "hypermonogenic.residual": 1e-5,
    "hyperbolic_harmonic.residual": 1e-4,
    # constants
    "kappa.spread": 1e-6,
    # reconstructions
    "cauchy.relative": 1e-6,
    "cauchy.exterior": 1e-8,
    "borel_pompeiu.relative": 1e-5,
    "green.absolute": 1e-5,
    "convergence.ratio": 1.10,
    "mobius_cauchy.relative": 1e-6,
    # volume potentials
    "teodorescu.exterior": 1e-5,
    "teodorescu.interior": 1e-3,
    "green_potential.absolute": 1e-4,
    "volume_identity.absolute": 1e-3,
    # singular integrals
    "plemelj.absolute": 2e-3,
    "hardy.absolute": 2e-3,
    "hardy.invariance": 1e-3,
    "kerzman_stein.skew": 1e-6,
    "kerzman_stein.agreement": 1e-3,
    # poisson
    "poisson.mass": 1e-5,
    "poisson.laplacian": 1e-4,
    "poisson.boundary": 1e-3,
    # conformal
    "covariance.hypermonogenic": 1e-5,
    "covariance.intertwining": 1e-4,
    "laplacian_covariance.residual": 1e-4,
    "power.residual": 1e-5,
}

# wall-clock budgets (seconds) for the acceptance suite, one laptop core
BUDGETS: dict[int, float] = {1: 5, 2: 2, 3: 30, 4: 60, 5: 120, 6: 120, 7: 60, 8: 180, 9: 300, 10: 120, 11: 120}


def tol(key: str, scale: float = 1.0) -> float:
    try:
        return TOLERANCES[key] * scale
    except KeyError:
        raise KeyError(f"no tolerance named {key!r} (table version {VERSION})") from None
