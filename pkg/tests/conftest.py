"""Shared test oracles: tensor-product Gauss-Legendre quadrature and helpers.

The quadrature oracle lives here, not in the library: the package only ever
uses closed-form moments, and the tests check those against numerical
integration computed by an independent route.
"""

import itertools

import numpy as np
import pytest

from cdmos.polyring import Polynomial


def box_quadrature(func, lo, hi, points=40):
    """Integral of func over the box [lo, hi] against the uniform probability
    measure, via tensor-product Gauss-Legendre (exact for degree < 2*points)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    nodes, weights = np.polynomial.legendre.leggauss(points)
    axes_x = [0.5 * (b - a) * nodes + 0.5 * (a + b) for a, b in zip(lo, hi)]
    # weights normalized so the box has total mass 1
    axes_w = [weights / 2.0 for _ in lo]
    total = 0.0
    for idx in itertools.product(*(range(points) for _ in lo)):
        x = tuple(axes_x[i][k] for i, k in enumerate(idx))
        w = 1.0
        for i, k in enumerate(idx):
            w *= axes_w[i][k]
        total += w * func(x)
    return total


def random_polynomial(rng, n, degree, density=0.7):
    """Random sparse polynomial with coefficients in [-1, 1]."""
    terms = {}
    for alpha in itertools.product(range(degree + 1), repeat=n):
        if sum(alpha) > degree:
            continue
        if rng.random() < density:
            terms[alpha] = rng.uniform(-1.0, 1.0)
    if not terms:
        terms[(0,) * n] = rng.uniform(-1.0, 1.0)
    return Polynomial(n, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
