"""Lower- and upper-bound hierarchies, exactness certification, minimizer
extraction, and reconstruction of the signed polynomial density.

The lower bound at order t is computed purely in moment form:

    rho_t = inf { <f, y> : y_0 = 1, M_{t-d_j}(g_j y) PSD, j = 0..m }

whose SDP dual multipliers are the Gram matrices of the SOS certificate
f - rho = sum_j psi_j g_j.  The upper bound at order t minimizes the
integral of f against SOS densities of degree 2t, which reduces to the
smallest generalized eigenvalue of the pencil (M_t(f y_mu), M_t(y_mu)).

Once a reference measure is fixed, the optimal moment vector y* turns into
coefficients sigma = D y* of a signed polynomial density in the orthonormal
basis; at an exact relaxation with minimizer xi, sigma_alpha = T_alpha(xi),
the density is the kernel section x -> K_2t(xi, x), and its value at xi is
the reciprocal Christoffel function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .measures import (MomentSequence, ReferenceMeasure, integrate,
                       make_moment_sequence, moments)
from .momentmat import (SemialgebraicSet, half_degree, localizing_matrix,
                        moment_matrix)
from .orthobasis import (BasisConstructionError, OrthoBasis, build_basis,
                         cd_kernel, ortho_expansion_poly)
from .polyring import (Polynomial, coeff_vector, enumerate_basis,
                       monomial_values, vector_to_poly)
from .sdp import (SdpBlock, SdpOptions, SdpProblem, SdpSolution, SdpStatus,
                  gen_eig_min, solve_sdp)

DEFAULT_RANK_TOL = 1e-6
FEASIBILITY_TOL = 1e-6
OPTIMALITY_TOL = 1e-6
CLUSTER_TOL = 1e-5


class HierarchyError(RuntimeError):
    """Solver or assembly failure at a specific relaxation order."""

    def __init__(self, t: int, message: str):
        super().__init__(f"order {t}: {message}")
        self.t = t


@dataclass
class SosCertificate:
    """lam + sum_j psi_j g_j with psi_j = v' Q_j v from the dual Gram blocks."""

    lam: float
    multipliers: List[Tuple[Polynomial, int, np.ndarray]]  # (g_j, order, Gram Q_j)

    def multiplier_poly(self, j: int) -> Polynomial:
        g, s, Q = self.multipliers[j]
        basis = enumerate_basis(g.n, s)
        psi = Polynomial.zero(g.n)
        for a in range(len(basis)):
            for b in range(len(basis)):
                if Q[a, b] != 0.0:
                    e = tuple(x + z for x, z in zip(basis.exponents[a], basis.exponents[b]))
                    psi = psi + Polynomial.monomial(g.n, e, Q[a, b])
        return psi

    def residual(self, f: Polynomial) -> float:
        """Max coefficient deviation of f - lam - sum psi_j g_j."""
        r = f - Polynomial.constant(f.n, self.lam)
        for j, (g, _, _) in enumerate(self.multipliers):
            r = r - self.multiplier_poly(j) * g
        return max((abs(c) for c in r.terms.values()), default=0.0)


@dataclass
class Extraction:
    certified: bool
    minimizers: List[Tuple[Tuple[float, ...], float]] = field(default_factory=list)
    rank_high: int = 0
    rank_low: int = 0


@dataclass
class LowerBoundResult:
    t: int
    rho: float
    f: Polynomial
    y: MomentSequence
    certificate: SosCertificate
    solution: SdpSolution
    extraction: Optional[Extraction] = None
    sigma: Optional[np.ndarray] = None      # D_{2t} y*, when a measure is declared
    density_basis: Optional[OrthoBasis] = None
    density_error: Optional[str] = None


@dataclass
class UpperBoundResult:
    t: int
    u: float
    sos_density: Polynomial  # sigma(x) = (v' v_t(x))^2 / normalization
    eigvec: np.ndarray


@dataclass
class DensityReconstruction:
    sigma: np.ndarray
    sigma_poly: Polynomial
    christoffel_at: Dict[Tuple[float, ...], float]


def _moment_blocks(B: SemialgebraicSet, t: int, basis2t) -> List[SdpBlock]:
    """One SDP block per constraint: M_{t-d_j}(g_j y) as an affine map of y."""
    N = len(basis2t)
    gs = [Polynomial.constant(B.n, 1.0)] + list(B.constraints)
    blocks = []
    for g in gs:
        s = t - half_degree(g)
        if s < 0:
            raise ValueError(f"order {t} too small for constraint of degree {g.degree}")
        bas = enumerate_basis(B.n, s)
        d = len(bas)
        coeffs = np.zeros((N, d, d))
        for a in range(d):
            for bcol in range(a, d):
                for gamma, cg in g.terms.items():
                    k = basis2t.position(tuple(
                        x + z + w for x, z, w in
                        zip(bas.exponents[a], bas.exponents[bcol], gamma)))
                    coeffs[k, a, bcol] += cg
                    if bcol != a:
                        coeffs[k, bcol, a] += cg
        blocks.append(SdpBlock(const=np.zeros((d, d)), coeffs=coeffs))
    return blocks


def min_relaxation_order(f: Polynomial, B: SemialgebraicSet) -> int:
    return max([math.ceil(f.degree / 2), 1] + B.half_degrees)


def lower_bound(f: Polynomial, B: SemialgebraicSet, t: int,
                measure: Optional[ReferenceMeasure] = None,
                opts: Optional[SdpOptions] = None,
                rank_tol: float = DEFAULT_RANK_TOL) -> LowerBoundResult:
    """Order-t moment relaxation; returns rho_t, y*, SOS certificate, and the
    signed density coefficients when a reference measure is declared."""
    if f.n != B.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {B.n}")
    if t < min_relaxation_order(f, B):
        raise ValueError(f"order {t} below minimum {min_relaxation_order(f, B)}")
    basis2t = enumerate_basis(f.n, 2 * t)
    c = coeff_vector(f, basis2t)
    blocks = _moment_blocks(B, t, basis2t)
    e0 = np.zeros((1, len(basis2t)))
    e0[0, basis2t.position((0,) * f.n)] = 1.0
    prob = SdpProblem(c=c, blocks=blocks, eq_lhs=e0, eq_rhs=np.array([1.0]))
    sol = solve_sdp(prob, opts)
    if sol.status is not SdpStatus.OPTIMAL:
        raise HierarchyError(t, f"SDP solver returned {sol.status.value}")
    y = make_moment_sequence(f.n, 2 * t, sol.y)
    rho = float(c @ sol.y)
    gs = [Polynomial.constant(B.n, 1.0)] + list(B.constraints)
    cert = SosCertificate(
        lam=float(sol.eq_multipliers[0]),
        multipliers=[(g, t - half_degree(g), sol.dual_blocks[j])
                     for j, g in enumerate(gs)])
    result = LowerBoundResult(t=t, rho=rho, f=f, y=y, certificate=cert, solution=sol)
    result.extraction = certify_and_extract(result, B, rank_tol=rank_tol)
    if measure is not None:
        try:
            basis = build_basis(measure, 2 * t)
        except BasisConstructionError as exc:
            # degree-2t orthonormal family does not exist for this measure
            # (e.g. counting hypercube beyond multilinear degree)
            result.density_error = str(exc)
        else:
            result.density_basis = basis
            result.sigma = basis.D @ sol.y
    return result


# ---------------------------------------------------------------------------
# Exactness certification via flat truncation, and minimizer extraction.
# ---------------------------------------------------------------------------

def _numerical_rank(M: np.ndarray, tol: float) -> int:
    w = np.linalg.eigvalsh(M)
    wmax = float(w[-1])
    if wmax <= 0.0:
        return 0
    return int(np.sum(w > tol * wmax))


def certify_and_extract(r: LowerBoundResult, B: SemialgebraicSet,
                        rank_tol: float = DEFAULT_RANK_TOL) -> Extraction:
    """Flat-truncation rank test; on success, extract minimizers from the
    multiplication operators on the column space of the moment matrix.

    Every returned point is re-checked by direct evaluation: g_j(xi) >= -1e-6
    and |f(xi) - rho| <= 1e-6.  A failed rank test is an honest NotCertified.
    """
    y, t = r.y, r.t
    if t < 1:
        return Extraction(certified=False)
    Mt = moment_matrix(y, t).matrix
    Mlow = moment_matrix(y, t - 1).matrix
    rank_high = _numerical_rank(Mt, rank_tol)
    rank_low = _numerical_rank(Mlow, rank_tol)
    if rank_high == 0 or rank_high != rank_low:
        return Extraction(certified=False, rank_high=rank_high, rank_low=rank_low)

    rank = rank_high
    w, Q = np.linalg.eigh(Mlow)
    U = Q[:, -rank:]
    G = U.T @ Mlow @ U
    n = y.n
    bas_low = enumerate_basis(n, t - 1)
    Ns = []
    for i in range(n):
        e_i = tuple(1 if k == i else 0 for k in range(n))
        m = len(bas_low)
        Mi = np.empty((m, m))
        for a in range(m):
            for b in range(m):
                Mi[a, b] = y.value(tuple(
                    x + z + v for x, z, v in
                    zip(bas_low.exponents[a], bas_low.exponents[b], e_i)))
        Ns.append(np.linalg.solve(G, U.T @ Mi @ U))

    # simultaneous diagonalization via a fixed random combination
    rng = np.random.default_rng(20240229)
    wts = rng.random(n) + 0.5
    wts /= wts.sum()
    Nc = sum(wi * Ni for wi, Ni in zip(wts, Ns))
    vals, T = np.linalg.eig(Nc)
    try:
        Tinv = np.linalg.inv(T)
    except np.linalg.LinAlgError:
        return Extraction(certified=False, rank_high=rank_high, rank_low=rank_low)
    candidates = []
    for col in range(rank):
        xi = tuple(float(np.real((Tinv[col] @ Ni @ T[:, col]))) for Ni in Ns)
        candidates.append(xi)

    # filter by epsilon-feasibility and epsilon-optimality, then merge clusters
    accepted: List[Tuple[Tuple[float, ...], float]] = []
    for xi in candidates:
        if not B.contains(xi, tol=FEASIBILITY_TOL):
            continue
        fval = r.f(xi)
        if abs(fval - r.rho) > OPTIMALITY_TOL:
            continue
        if any(max(abs(a - b) for a, b in zip(xi, prev)) <= CLUSTER_TOL
               for prev, _ in accepted):
            continue
        accepted.append((xi, fval))
    if not accepted:
        return Extraction(certified=False, rank_high=rank_high, rank_low=rank_low)
    accepted.sort(key=lambda p: p[0])
    return Extraction(certified=True, minimizers=accepted,
                      rank_high=rank_high, rank_low=rank_low)


# ---------------------------------------------------------------------------
# Signed density reconstruction and its Christoffel interpretation.
# ---------------------------------------------------------------------------

def reconstruct_density(r: LowerBoundResult, basis: OrthoBasis) -> DensityReconstruction:
    """sigma = D y* in the orthonormal basis of degree 2t, with the Christoffel
    function evaluated at each certified minimizer."""
    if basis.t != 2 * r.t:
        raise ValueError(
            f"basis degree {basis.t} must equal 2t = {2 * r.t} of the relaxation")
    if basis.n != r.y.n:
        raise ValueError(f"dimension mismatch: {basis.n} vs {r.y.n}")
    sigma = basis.D @ r.y.values
    sigma_poly = ortho_expansion_poly(sigma, basis)
    christoffel_at: Dict[Tuple[float, ...], float] = {}
    if r.extraction is not None and r.extraction.certified:
        for xi, _ in r.extraction.minimizers:
            christoffel_at[xi] = 1.0 / cd_kernel(basis, xi, xi)
    return DensityReconstruction(sigma=sigma, sigma_poly=sigma_poly,
                                 christoffel_at=christoffel_at)


def smoothed_objective(f: Polynomial, y_values: np.ndarray, basis: OrthoBasis) -> float:
    """int f * (sum_alpha (D y)_alpha T_alpha) dmu, computed with exact moments.

    Equals <f, y> by the change-of-basis identity; used as an independent
    cross-check of the density route.
    """
    sigma = basis.D @ np.asarray(y_values, dtype=float)
    sigma_poly = ortho_expansion_poly(sigma, basis)
    prod = f * sigma_poly
    mom = moments(basis.measure, prod.degree)
    return integrate(prod, mom)


# ---------------------------------------------------------------------------
# Upper-bound hierarchy (SOS densities) via a generalized eigenvalue problem.
# ---------------------------------------------------------------------------

def upper_bound(f: Polynomial, measure: ReferenceMeasure, t: int) -> UpperBoundResult:
    """u_t = min eigenvalue of (M_t(f y_mu), M_t(y_mu)); the eigenvector gives
    the optimal SOS density (v' v_t(x))^2 normalized to integrate to one."""
    if f.n != measure.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {measure.n}")
    if t < 0:
        raise ValueError(f"order must be >= 0, got {t}")
    y = moments(measure, 2 * t + f.degree)
    A = localizing_matrix(y, f, t).matrix
    Bm = moment_matrix(y, t).matrix
    lam, v = gen_eig_min(A, Bm)
    norm = float(v @ Bm @ v)
    basis_t = enumerate_basis(f.n, t)
    q = vector_to_poly(v, basis_t)
    density = (q * q) * (1.0 / norm)
    return UpperBoundResult(t=t, u=lam, sos_density=density, eigvec=v)


# ---------------------------------------------------------------------------
# Sandwich sweep over orders.
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    t: int
    lower: Optional[LowerBoundResult] = None
    upper: Optional[UpperBoundResult] = None
    lower_error: Optional[str] = None
    upper_error: Optional[str] = None

    @property
    def rho(self) -> Optional[float]:
        return self.lower.rho if self.lower is not None else None

    @property
    def u(self) -> Optional[float]:
        return self.upper.u if self.upper is not None else None

    @property
    def gap(self) -> Optional[float]:
        if self.lower is None or self.upper is None:
            return None
        return self.upper.u - self.lower.rho


def sandwich_sweep(f: Polynomial, B: SemialgebraicSet,
                   measure: Optional[ReferenceMeasure], t_max: int,
                   t_min: Optional[int] = None,
                   opts: Optional[SdpOptions] = None) -> List[SweepRow]:
    """Run both hierarchies for t = t_min..t_max; individual-order failures are
    recorded in the row and the sweep continues."""
    if t_min is None:
        t_min = min_relaxation_order(f, B)
    rows = []
    for t in range(t_min, t_max + 1):
        row = SweepRow(t=t)
        try:
            row.lower = lower_bound(f, B, t, measure=measure, opts=opts)
        except Exception as exc:  # per-order isolation is the contract here
            row.lower_error = str(exc)
        if measure is not None:
            try:
                row.upper = upper_bound(f, measure, t)
            except Exception as exc:
                row.upper_error = str(exc)
        rows.append(row)
    return rows
