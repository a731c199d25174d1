"""Closed-form truncated moment sequences for the built-in reference measures.

Two kinds are supported: the uniform probability measure on an axis-aligned
box, and the normalized counting measure on the discrete hypercube {-1,1}^n.
Both factor across coordinates, so every moment is a product of univariate
closed forms; no numerical integration happens in the library.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .polyring import MonomialBasis, Polynomial, enumerate_basis


@dataclass(frozen=True)
class UniformBox:
    """Uniform probability measure on the box [lo_1,hi_1] x ... x [lo_n,hi_n]."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must be non-empty and of equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box bounds must satisfy lo < hi componentwise")

    @property
    def n(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class CountingHypercube:
    """Normalized counting (probability) measure on {-1, 1}^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")


ReferenceMeasure = Union[UniformBox, CountingHypercube]


@dataclass
class MomentSequence:
    """Truncated moment sequence y_alpha, |alpha| <= t, graded-lex ordered."""

    n: int
    t: int
    values: np.ndarray
    basis: MonomialBasis

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.basis),):
            raise ValueError(
                f"moment vector length {self.values.shape} != basis size {len(self.basis)}")

    def value(self, alpha) -> float:
        return float(self.values[self.basis.position(alpha)])


def make_moment_sequence(n: int, t: int, values) -> MomentSequence:
    return MomentSequence(n, t, np.asarray(values, dtype=float), enumerate_basis(n, t))


def _box_univariate_moments(lo: float, hi: float, t: int) -> np.ndarray:
    """m_k = (1/(hi-lo)) * integral of x^k over [lo, hi], k = 0..t."""
    k = np.arange(t + 1)
    return (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))


def _hypercube_univariate_moments(t: int) -> np.ndarray:
    m = np.zeros(t + 1)
    m[::2] = 1.0
    return m


def coordinate_moments(measure: ReferenceMeasure, t: int) -> list[np.ndarray]:
    """Per-coordinate univariate moment tables; y_alpha = prod_i m_i[alpha_i]."""
    if isinstance(measure, UniformBox):
        return [_box_univariate_moments(lo, hi, t) for lo, hi in zip(measure.lo, measure.hi)]
    if isinstance(measure, CountingHypercube):
        return [_hypercube_univariate_moments(t)] * measure.n
    raise ValueError(f"unsupported measure kind: {type(measure).__name__}")


def moments(measure: ReferenceMeasure, t: int) -> MomentSequence:
    """Exact moments y_alpha = int x^alpha dmu for all |alpha| <= t."""
    if t < 0:
        raise ValueError(f"degree bound must be >= 0, got {t}")
    n = measure.n
    uni = coordinate_moments(measure, t)
    basis = enumerate_basis(n, t)
    values = np.empty(len(basis))
    for i, alpha in enumerate(basis):
        v = 1.0
        for j, a in enumerate(alpha):
            v *= uni[j][a]
        values[i] = v
    return MomentSequence(n, t, values, basis)


def dirac_moments(x: Sequence[float], t: int) -> MomentSequence:
    """Moments of the Dirac measure at x: y_alpha = x^alpha."""
    x = [float(v) for v in x]
    n = len(x)
    basis = enumerate_basis(n, t)
    values = np.empty(len(basis))
    for i, alpha in enumerate(basis):
        m = 1.0
        for xi, ai in zip(x, alpha):
            if ai:
                m *= xi ** ai
        values[i] = m
    return MomentSequence(n, t, values, basis)


def integrate(p: Polynomial, y: MomentSequence) -> float:
    """The linear functional <f, y> = sum_alpha f_alpha y_alpha."""
    if p.n != y.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {y.n}")
    if p.degree > y.t:
        raise ValueError(f"polynomial degree {p.degree} exceeds moment order {y.t}")
    return float(sum(c * y.value(alpha) for alpha, c in p.terms.items()))
