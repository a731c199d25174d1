"""Moment and localizing matrix assembly, plus finite-order Putinar checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .measures import MomentSequence
from .polyring import MonomialBasis, Polynomial, enumerate_basis


@dataclass
class LocalizingMatrix:
    """M(alpha, beta) = sum_gamma g_gamma y_{alpha+beta+gamma}, order-s index set."""

    g: Polynomial
    order: int
    basis: MonomialBasis
    matrix: np.ndarray


def localizing_matrix(y: MomentSequence, g: Polynomial, s: int) -> LocalizingMatrix:
    if g.n != y.n:
        raise ValueError(f"dimension mismatch: {g.n} vs {y.n}")
    if s < 0:
        raise ValueError(f"order must be >= 0, got {s}")
    if 2 * s + g.degree > y.t:
        raise ValueError(
            f"moment sequence too short: need degree {2 * s + g.degree}, have {y.t}")
    basis = enumerate_basis(y.n, s)
    m = len(basis)
    M = np.zeros((m, m))
    for i, a in enumerate(basis):
        for j in range(i, m):
            b = basis.exponents[j]
            v = 0.0
            for gamma, c in g.terms.items():
                v += c * y.value(tuple(x + z + w for x, z, w in zip(a, b, gamma)))
            M[i, j] = v
            M[j, i] = v
    return LocalizingMatrix(g, s, basis, M)


def moment_matrix(y: MomentSequence, s: int) -> LocalizingMatrix:
    """The g == 1 special case of the localizing matrix."""
    return localizing_matrix(y, Polynomial.constant(y.n, 1.0), s)


def half_degree(g: Polynomial) -> int:
    """d = ceil(deg g / 2); the zero polynomial contributes 0."""
    return math.ceil(g.degree / 2)


@dataclass(frozen=True)
class SemialgebraicSet:
    """B = {x : g_j(x) >= 0, j = 1..m}; g_0 == 1 is implicit everywhere."""

    n: int
    constraints: Tuple[Polynomial, ...]
    box: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for g in self.constraints:
            if g.n != self.n:
                raise ValueError(f"constraint dimension {g.n} != set dimension {self.n}")

    @property
    def half_degrees(self) -> List[int]:
        """d_j = ceil(deg g_j / 2) for j = 1..m (g_0's d_0 = 0 is implicit)."""
        return [half_degree(g) for g in self.constraints]

    def contains(self, x, tol: float = 0.0) -> bool:
        return all(g(x) >= -tol for g in self.constraints)


@dataclass
class PutinarEntry:
    constraint_index: int  # 0 = moment matrix, j >= 1 = g_j
    order: int
    min_eigenvalue: float


@dataclass
class PutinarReport:
    t: int
    tol: float
    entries: List[PutinarEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.min_eigenvalue >= -self.tol for e in self.entries)


def putinar_prefix_check(y: MomentSequence, B: SemialgebraicSet, t: int,
                         tol: float = 1e-8) -> PutinarReport:
    """Min eigenvalue of M_{t-d_j}(g_j y) for j = 0..m; PASS iff all >= -tol.

    Only a finite prefix of the Putinar conditions: necessary, never sufficient.
    """
    if B.n != y.n:
        raise ValueError(f"dimension mismatch: {B.n} vs {y.n}")
    report = PutinarReport(t=t, tol=tol)
    gs = [Polynomial.constant(y.n, 1.0)] + list(B.constraints)
    for j, g in enumerate(gs):
        s = t - half_degree(g)
        if s < 0 or 2 * s + g.degree > y.t:
            continue  # not checkable at this order with the available moments
        M = localizing_matrix(y, g, s).matrix
        lam_min = float(np.linalg.eigvalsh(M)[0])
        report.entries.append(PutinarEntry(j, s, lam_min))
    return report
