"""Shared oracle utilities for the test suite.

Oracles are kept independent of the package's own quadrature: brute-force
midpoint sums, scipy.integrate.quad with explicit kink points, and mpmath
high-precision quadrature.
"""
import numpy as np
from scipy import integrate as _si

from mincf.families import Family, null_min_cf


def midpoint_oracle(f, a, b, points=10_000_000, chunks=20):
    """Brute-force midpoint Riemann sum with a vectorized integrand."""
    edges = np.linspace(a, b, chunks + 1)
    per = points // chunks
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = lo + (np.arange(per) + 0.5) * (hi - lo) / per
        total += float(f(x).sum()) * (hi - lo) / per
    return total


def quad_pieces(f, points, upper=np.inf):
    """scipy quadrature split at the given interior points (sorted, > 0)."""
    total, lo = 0.0, 0.0
    for p in sorted(points):
        if lo < p:
            total += _si.quad(f, lo, p, limit=300)[0]
            lo = p
    total += _si.quad(f, lo, upper, limit=300)[0]
    return total


def lambda_oracle(family: Family, gamma: float, z: float) -> float:
    """Defining integral of lam(z), split at the integrand kinks."""
    kinks = {1.0 / z}
    if family is Family.PARETO:
        kinks.add(1.0)

    def f(t):
        return min(1.0, t * z) * null_min_cf(family, t) * np.exp(-gamma * t)

    return quad_pieces(f, kinks)


def l_constant_oracle(family: Family, gamma: float) -> float:
    """Defining integral of the family constant L."""
    def f(t):
        v = null_min_cf(family, t)
        return v * v * np.exp(-gamma * t)

    kinks = {1.0} if family is Family.PARETO else set()
    return quad_pieces(f, kinks)


def kernel_oracle(gamma: float, z1: float, z2: float) -> float:
    def f(t):
        return min(1.0, t * z1) * min(1.0, t * z2) * np.exp(-gamma * t)

    return quad_pieces(f, {1.0 / z1, 1.0 / z2})
