"""Dense linear-algebra kernel: small-scale semidefinite solver and eigensolvers.

The SDP solved here is

    min  c'y   s.t.   E y = b,   A0_j + sum_k y_k A_kj  PSD   for each block j,

with y free.  The algorithm is an infeasible-start Mehrotra predictor-corrector
with Nesterov-Todd scaling on the PSD blocks.  Slack blocks S_j track the
affine maps, dual blocks Z_j are their multipliers; at optimality the Z_j are
the Gram matrices of the SOS certificate and the equality multiplier is the
certified lower bound.

Everything is deterministic: identical inputs and options give identical
iterates within one build.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as sla


class SdpStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class SdpBlock:
    """Affine symmetric map y -> const + sum_k y_k coeffs[k], required PSD."""

    const: np.ndarray   # (d, d)
    coeffs: np.ndarray  # (N, d, d)

    def __post_init__(self):
        self.const = np.asarray(self.const, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        d = self.const.shape[0]
        if self.const.shape != (d, d) or self.coeffs.shape[1:] != (d, d):
            raise ValueError("inconsistent block shapes")
        if not np.allclose(self.const, self.const.T):
            raise ValueError("block constant matrix must be symmetric")
        if not np.allclose(self.coeffs, np.transpose(self.coeffs, (0, 2, 1))):
            raise ValueError("block coefficient matrices must be symmetric")

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    def at(self, y: np.ndarray) -> np.ndarray:
        return self.const + np.einsum("k,kab->ab", y, self.coeffs)


@dataclass
class SdpProblem:
    c: np.ndarray             # objective over the free variables y
    blocks: List[SdpBlock]
    eq_lhs: np.ndarray        # (p, N)
    eq_rhs: np.ndarray        # (p,)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.eq_lhs = np.atleast_2d(np.asarray(self.eq_lhs, dtype=float))
        self.eq_rhs = np.atleast_1d(np.asarray(self.eq_rhs, dtype=float))
        N = self.c.shape[0]
        if not self.blocks:
            raise ValueError("at least one PSD block is required")
        for blk in self.blocks:
            if blk.coeffs.shape[0] != N:
                raise ValueError("block coefficient count != number of variables")
        if self.eq_lhs.shape != (self.eq_rhs.shape[0], N):
            raise ValueError("equality constraint shapes inconsistent")

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]


@dataclass
class SdpOptions:
    tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98


@dataclass
class SdpSolution:
    y: np.ndarray
    objective: float
    dual_objective: float
    eq_multipliers: np.ndarray
    dual_blocks: List[np.ndarray]    # Z_j: SOS-certificate Gram matrices
    slack_blocks: List[np.ndarray]   # S_j = A0_j + sum_k y_k A_kj at the iterate
    status: SdpStatus
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float


def _psd_cholesky(M: np.ndarray) -> np.ndarray:
    """Cholesky of an iterate kept PD by step control; roundoff can still push
    the smallest eigenvalue marginally negative, so retry with tiny jitter."""
    jitter = 0.0
    scale = max(1.0, float(np.max(np.diag(M))))
    for _ in range(6):
        try:
            return np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(10.0 * jitter, 1e-15 * scale)
    raise np.linalg.LinAlgError("iterate lost positive definiteness")


def _chol_regularized(M: np.ndarray):
    """Cholesky with escalating diagonal jitter; the Schur complement loses
    definiteness to roundoff as the barrier parameter collapses."""
    scale = max(1.0, float(np.max(np.diag(M))))
    jitter = 0.0
    for _ in range(6):
        try:
            return sla.cho_factor(M + jitter * np.eye(M.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            jitter = max(10.0 * jitter, 1e-14 * scale)
    raise np.linalg.LinAlgError("Schur complement factorization failed")


def _nt_scaling(S: np.ndarray, Z: np.ndarray):
    """NT scaling factors for one block: R, R^{-1} and the scaled spectrum.

    R satisfies W = R R' with W Z W = S; in the scaled space both
    R^{-1} S R^{-T} and R' Z R equal diag(lam).
    """
    Ls = _psd_cholesky(S)
    Lz = _psd_cholesky(Z)
    U, lam, Vt = np.linalg.svd(Lz.T @ Ls)
    sq = np.sqrt(lam)
    R = Ls @ Vt.T / sq
    Rinv = (sq[:, None] * Vt) @ sla.solve_triangular(Ls, np.eye(len(lam)), lower=True)
    return R, Rinv, lam


def _max_step(lam: np.ndarray, dtilde: np.ndarray) -> float:
    """sup {a : diag(lam) + a*dtilde PSD}, via the Lam^{-1/2}-scaled spectrum."""
    s = 1.0 / np.sqrt(lam)
    w = np.linalg.eigvalsh(s[:, None] * dtilde * s[None, :])
    wmin = w[0]
    if wmin >= 0.0:
        return np.inf
    return -1.0 / wmin


def solve_sdp(prob: SdpProblem, opts: Optional[SdpOptions] = None) -> SdpSolution:
    """Primal-dual predictor-corrector path following; see module docstring."""
    opts = opts or SdpOptions()
    c = prob.c
    E = prob.eq_lhs
    b = prob.eq_rhs
    N = prob.num_vars
    blocks = prob.blocks
    nb = len(blocks)
    dims = [blk.dim for blk in blocks]
    total_dim = sum(dims)

    data_scale = max(1.0, max(float(np.max(np.abs(blk.coeffs), initial=0.0)) for blk in blocks),
                     max(float(np.max(np.abs(blk.const), initial=0.0)) for blk in blocks))
    cost_scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))

    # "big identity" strictly feasible start
    y = np.zeros(N)
    nu = np.zeros(b.shape[0])
    S = [10.0 * data_scale * np.eye(d) for d in dims]
    Z = [10.0 * cost_scale * np.eye(d) for d in dims]

    bnorm = 1.0 + float(np.max(np.abs(b), initial=0.0))
    cnorm = 1.0 + cost_scale

    status = SdpStatus.MAX_ITER
    it = 0
    pres = dres = gap_rel = np.inf
    for it in range(1, opts.max_iter + 1):
        # residuals
        Rres = [blk.at(y) - S[j] for j, blk in enumerate(blocks)]
        rp = b - E @ y
        rd = c - E.T @ nu
        for j, blk in enumerate(blocks):
            rd = rd - np.einsum("kab,ab->k", blk.coeffs, Z[j])
        mu = sum(float(np.sum(S[j] * Z[j])) for j in range(nb)) / total_dim

        pobj = float(c @ y)
        dobj = float(b @ nu) - sum(float(np.sum(blk.const * Z[j]))
                                   for j, blk in enumerate(blocks))
        gap_abs = mu * total_dim
        gap_rel = gap_abs / (1.0 + abs(pobj) + abs(dobj))
        pres = max(float(np.max(np.abs(rp), initial=0.0)),
                   max(float(np.max(np.abs(Rres[j]))) for j in range(nb))) / (bnorm + data_scale)
        dres = float(np.max(np.abs(rd), initial=0.0)) / cnorm

        if pres <= opts.tol and dres <= opts.tol and gap_rel <= opts.tol:
            status = SdpStatus.OPTIMAL
            break

        # crude infeasibility signal: complementarity collapsed but the affine
        # residuals cannot be driven down
        if mu < 1e-14 * data_scale and (pres > 1e-6 or dres > 1e-6):
            status = SdpStatus.INFEASIBLE
            break
        if abs(dobj) > 1e12 * cost_scale or abs(pobj) > 1e12 * cost_scale:
            status = SdpStatus.INFEASIBLE
            break

        try:
            scalings = [_nt_scaling(S[j], Z[j]) for j in range(nb)]

            # scaled coefficient matrices and Schur complement
            Gflat = []
            Hres = []
            M = np.zeros((N, N))
            for j, blk in enumerate(blocks):
                R, Rinv, lam = scalings[j]
                G = np.einsum("ab,kbc,dc->kad", Rinv, blk.coeffs, Rinv)
                Gf = G.reshape(N, -1)
                M += Gf @ Gf.T
                Gflat.append(Gf)
                Hres.append(Rinv @ Rres[j] @ Rinv.T)
            Mfac = _chol_regularized(M)
            MiE = sla.cho_solve(Mfac, E.T)
            Schur_nu = E @ MiE

            def newton(Dmats):
                Cs = []
                h = -rd.copy()
                for j in range(nb):
                    _, _, lam = scalings[j]
                    Cj = 2.0 * Dmats[j] / (lam[:, None] + lam[None, :])
                    Cs.append(Cj)
                    h += Gflat[j] @ (Cj - Hres[j]).ravel()
                Mih = sla.cho_solve(Mfac, h)
                dnu = np.linalg.solve(Schur_nu, rp - E @ Mih)
                dy = Mih + MiE @ dnu
                dS, dZ, dtS, dtZ = [], [], [], []
                for j, blk in enumerate(blocks):
                    R, Rinv, _ = scalings[j]
                    dSj = Rres[j] + np.einsum("k,kab->ab", dy, blk.coeffs)
                    dtSj = Rinv @ dSj @ Rinv.T
                    dtZj = Cs[j] - dtSj
                    dZj = Rinv.T @ dtZj @ Rinv
                    dS.append(dSj)
                    dZ.append(dZj)
                    dtS.append(0.5 * (dtSj + dtSj.T))
                    dtZ.append(0.5 * (dtZj + dtZj.T))
                return dy, dnu, dS, dZ, dtS, dtZ

            # predictor (affine scaling direction)
            D_aff = [np.diag(-scalings[j][2] ** 2) for j in range(nb)]
            _, _, _, _, dtS_a, dtZ_a = newton(D_aff)

            ap = min((_max_step(scalings[j][2], dtS_a[j]) for j in range(nb)), default=np.inf)
            ad = min((_max_step(scalings[j][2], dtZ_a[j]) for j in range(nb)), default=np.inf)
            ap = min(1.0, ap)
            ad = min(1.0, ad)
            mu_aff = sum(float(np.sum(
                (np.diag(scalings[j][2]) + ap * dtS_a[j]) *
                (np.diag(scalings[j][2]) + ad * dtZ_a[j]).T))
                for j in range(nb)) / total_dim
            sigma = min(1.0, max(0.0, (mu_aff / mu))) ** 3

            # corrector
            D_cor = []
            for j in range(nb):
                lam = scalings[j][2]
                cross = dtS_a[j] @ dtZ_a[j]
                D_cor.append(sigma * mu * np.eye(len(lam)) - np.diag(lam ** 2)
                             - 0.5 * (cross + cross.T))
            dy, dnu, dS, dZ, dtS, dtZ = newton(D_cor)
        except np.linalg.LinAlgError:
            status = SdpStatus.NUMERICAL_FAILURE
            break

        ap = min((_max_step(scalings[j][2], dtS[j]) for j in range(nb)), default=np.inf)
        ad = min((_max_step(scalings[j][2], dtZ[j]) for j in range(nb)), default=np.inf)
        ap = min(1.0, opts.step_fraction * ap)
        ad = min(1.0, opts.step_fraction * ad)

        y = y + ap * dy
        nu = nu + ad * dnu
        for j in range(nb):
            S[j] = 0.5 * ((S[j] + ap * dS[j]) + (S[j] + ap * dS[j]).T)
            Z[j] = 0.5 * ((Z[j] + ad * dZ[j]) + (Z[j] + ad * dZ[j]).T)

    pobj = float(c @ y)
    dobj = float(b @ nu) - sum(float(np.sum(blk.const * Z[j]))
                               for j, blk in enumerate(blocks))
    return SdpSolution(
        y=y, objective=pobj, dual_objective=dobj, eq_multipliers=nu,
        dual_blocks=Z, slack_blocks=[blk.at(y) for blk in blocks],
        status=status, iterations=it,
        primal_residual=float(pres), dual_residual=float(dres), gap=float(gap_rel))


def sym_eig(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(M, M.T, atol=1e-12 * max(1.0, float(np.max(np.abs(M))))):
        raise ValueError("matrix must be symmetric")
    w, V = np.linalg.eigh(M)
    return w, V


def gen_eig_min(A: np.ndarray, B: np.ndarray) -> Tuple[float, np.ndarray]:
    """Smallest lambda with A v = lambda B v, for symmetric A and SPD B.

    Reduced to a standard symmetric problem via the Cholesky factor of B.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("B is not positive definite")
    # C = L^{-1} A L^{-T}
    Y = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, Y.T, lower=True).T
    w, Q = np.linalg.eigh(0.5 * (C + C.T))
    v = sla.solve_triangular(L.T, Q[:, 0], lower=False)
    return float(w[0]), v


def dump_sdp(prob: SdpProblem) -> str:
    """Plain-text dump (sizes, then nonzero triplets) for external cross-checks."""
    lines = [f"nvars {prob.num_vars}", f"nblocks {len(prob.blocks)}",
             "blockdims " + " ".join(str(b.dim) for b in prob.blocks),
             "objective " + " ".join(repr(float(v)) for v in prob.c)]
    for r, row in enumerate(prob.eq_lhs):
        ent = " ".join(f"{k}:{float(v)!r}" for k, v in enumerate(row) if v != 0.0)
        lines.append(f"eq {r} rhs {float(prob.eq_rhs[r])!r} {ent}")
    for j, blk in enumerate(prob.blocks):
        for a in range(blk.dim):
            for bcol in range(a, blk.dim):
                if blk.const[a, bcol] != 0.0:
                    lines.append(f"const {j} {a} {bcol} {float(blk.const[a, bcol])!r}")
        for k in range(prob.num_vars):
            for a in range(blk.dim):
                for bcol in range(a, blk.dim):
                    v = blk.coeffs[k, a, bcol]
                    if v != 0.0:
                        lines.append(f"coeff {j} {k} {a} {bcol} {float(v)!r}")
    return "\n".join(lines) + "\n"
