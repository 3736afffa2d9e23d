"""Matrix-level checks for the discrete Gaussian free field.

The field has covariance Gamma = (Id - P)^{-1} for a symmetric, irreducible,
sub-stochastic P. Resampling the coordinates in a block A maps the mean
through Id - M_A, where

    M_A[A, A] = Id,   M_A[A, A^c] = -Gamma[A, A^c] Gamma[A^c, A^c]^{-1},

and the other two blocks are zero. Contraction in the distorted metric
sum_i psi_i |(Delta z)_i| (psi the positive bottom eigenvector of Delta)
reduces to a finite-dimensional inequality that is checked here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .zoo import BlockFamily, members, theta_star

SYM_TOL = 1e-12
RESID_TOL = 1e-8
MAX_LATTICE = 4096


@dataclass(frozen=True)
class GffInstance:
    P_matrix: np.ndarray
    Delta: np.ndarray
    Gamma: np.ndarray
    delta_min: float
    psi: np.ndarray

    @property
    def n(self) -> int:
        return self.P_matrix.shape[0]


def build_gff(P_matrix) -> GffInstance:
    """Validate P and precompute Delta, Gamma, delta_min and psi."""
    P = np.array(P_matrix, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ValueError("P must be a nonempty square matrix")
    n = P.shape[0]
    if np.any(P < 0):
        raise ValueError("P has negative entries")
    if np.max(np.abs(P - P.T)) > SYM_TOL:
        raise ValueError("P is not symmetric")
    P = 0.5 * (P + P.T)
    if np.any(P.sum(axis=1) > 1 + SYM_TOL):
        raise ValueError("P is not sub-stochastic")
    Delta = np.eye(n) - P
    vals, vecs = np.linalg.eigh(Delta)
    delta = float(vals[0])
    if delta <= 1e-12:
        raise ValueError(f"Id - P is singular (least eigenvalue {delta:.3e})")
    ncomp, _ = connected_components(P > 0, directed=False)
    if np.allclose(Delta, delta * np.eye(n), atol=SYM_TOL):
        # scalar Delta: every vector is a bottom eigenvector
        psi = np.ones(n)
    elif ncomp > 1:
        raise ValueError("P is reducible")
    else:
        psi = np.abs(vecs[:, 0])
        if np.min(psi) <= 0:
            raise ValueError("bottom eigenvector is not strictly positive")
        psi = psi / psi.max()
    Gamma = np.linalg.inv(Delta)
    Gamma = 0.5 * (Gamma + Gamma.T)
    inst = GffInstance(P, Delta, Gamma, delta, psi)
    if np.max(np.abs(Gamma @ Delta - np.eye(n))) > RESID_TOL:
        raise ValueError("Gamma is not an accurate inverse of Delta")
    if np.max(np.abs(Delta @ psi - delta * psi)) > RESID_TOL:
        raise ValueError("psi is not an eigenvector")
    return inst


def random_gff(n: int, rng: np.random.Generator, density: float = 0.5, margin: float = 0.1) -> GffInstance:
    """Random irreducible instance with zero diagonal and row sums <= 1 - margin."""
    if n == 1:
        return build_gff(np.zeros((1, 1)))
    W = rng.uniform(0, 1, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    W = np.triu(W, 1)
    perm = rng.permutation(n)
    for a, b in zip(perm, perm[1:]):  # a spanning path keeps it irreducible
        i, j = min(a, b), max(a, b)
        W[i, j] = max(W[i, j], 0.1)
    W = W + W.T
    W *= (1 - margin) / W.sum(axis=1).max()
    return build_gff(W)


def _as_members(A, n: int) -> list[int]:
    if isinstance(A, (int, np.integer)):
        return members(int(A), n)
    idx = sorted({int(i) for i in A})
    if any(i < 0 or i >= n for i in idx):
        raise ValueError("block index out of range")
    return idx


def _conditional(Gamma: np.ndarray, A: list[int]) -> np.ndarray:
    n = Gamma.shape[0]
    M = np.zeros((n, n))
    if not A:
        return M
    Ac = [i for i in range(n) if i not in set(A)]
    M[np.ix_(A, A)] = np.eye(len(A))
    if Ac:
        G = Gamma[np.ix_(Ac, Ac)]
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(f"Gamma[A^c, A^c] is ill-conditioned (cond {cond:.3e})")
        M[np.ix_(A, Ac)] = -np.linalg.solve(G, Gamma[np.ix_(Ac, A)]).T
    return M


def conditional_matrix(inst: GffInstance, A) -> np.ndarray:
    """M_A for a block given as a bitmask or an iterable of indices."""
    A = _as_members(A, inst.n)
    if not A:
        raise ValueError("block must be nonempty")
    return _conditional(inst.Gamma, A)


def block_invariants(inst: GffInstance, A) -> dict:
    """Residuals of the structural identities satisfied by M_A."""
    idx = _as_members(A, inst.n)
    M = conditional_matrix(inst, idx)
    Ac = [i for i in range(inst.n) if i not in set(idx)]
    DM = inst.Delta @ M
    MG = M @ inst.Gamma
    Mpsi = M @ inst.psi
    out = {
        "idempotent": float(np.max(np.abs(M @ M - M))),
        "delta_m_symmetric": float(np.max(np.abs(DM - DM.T))),
        "min_id_minus_mt": float(np.min(np.eye(inst.n) - M.T)),
        "mg_cross_block": float(np.max(np.abs(MG[np.ix_(idx, Ac)]))) if Ac else 0.0,
        "m_psi_off_block": float(np.max(np.abs(Mpsi[Ac]))) if Ac else 0.0,
        "m_psi_shortfall": float(np.max(inst.delta_min * inst.psi[idx] - Mpsi[idx])),
    }
    return out


def neumann_residual(inst: GffInstance, A, tol: float = 1e-10) -> dict:
    """Compare (Delta_AA)^{-1} with a truncated geometric series in P_AA."""
    idx = _as_members(A, inst.n)
    PA = inst.P_matrix[np.ix_(idx, idx)]
    r = float(np.max(np.abs(np.linalg.eigvalsh(PA)))) if len(idx) else 0.0
    K = 1 if r == 0 else int(np.ceil(np.log(tol * (1 - r)) / np.log(r))) + 1
    term = np.eye(len(idx))
    acc = np.zeros_like(term)
    for _ in range(K + 1):
        acc += term
        term = term @ PA
    exact = np.linalg.inv(np.eye(len(idx)) - PA)
    return {"terms": K + 1, "spectral_radius": r, "residual": float(np.max(np.abs(acc - exact)))}


def check_distorted_curvature(inst: GffInstance, family: BlockFamily, z_samples: int = 1000, seed: int = 0,
                              z=None) -> dict:
    """Max violation of the per-block and aggregated distorted-metric bounds."""
    if family.n != inst.n:
        raise ValueError("family size does not match the instance")
    n = inst.n
    if z is None:
        if z_samples < 1:
            raise ValueError("need at least one sample")
        Z = np.random.default_rng(seed).standard_normal((n, z_samples))
    else:
        Z = np.asarray(z, dtype=float).reshape(n, -1)
    psi, D, delta = inst.psi, inst.Delta, inst.delta_min
    DZ = np.abs(D @ Z)
    base = psi @ DZ
    agg = np.zeros(Z.shape[1])
    worst = -np.inf
    worst_rel = -np.inf
    worst_block = None
    for mask, th in zip(family.blocks, family.theta):
        A = members(mask, n)
        M = _conditional(inst.Gamma, A)
        lhs = psi @ np.abs(D @ (Z - M @ Z))
        rhs = base - delta * (psi[A] @ DZ[A]) if A else base
        gap = lhs - rhs
        g = float(np.max(gap))
        if g > worst:
            worst, worst_block = g, A
        scale = np.maximum(base, 1e-300)
        worst_rel = max(worst_rel, float(np.max(gap / scale)))
        agg += float(th) * lhs
    ts = float(theta_star(family))
    agg_gap = float(np.max(agg - (1 - delta * ts) * base))
    return {
        "samples": int(Z.shape[1]),
        "max_violation": max(worst, 0.0),
        "max_gap": worst,
        "max_relative_gap": worst_rel,
        "worst_block": worst_block,
        "aggregate_max_gap": agg_gap,
        "aggregate_factor": 1 - delta * ts,
    }


def glauber_constants(inst: GffInstance, family: BlockFamily | None = None) -> dict:
    out = {"kappa": inst.delta_min / inst.n, "lambda": inst.delta_min / inst.n}
    if family is not None:
        out["kappa_lower"] = inst.delta_min * float(theta_star(family))
    return out


def lambda_upper_linear(inst: GffInstance, z=None, family: BlockFamily | None = None) -> float:
    """Rayleigh quotient of the block dynamics' Dirichlet form at f(x) = x.z.

    For a linear test function the conditional variance on block A is
    z_A^T (Delta_AA)^{-1} z_A and Var f = z^T Gamma z. The default z is psi
    and the default family is uniform single-site updates.
    """
    n = inst.n
    z = inst.psi if z is None else np.asarray(z, dtype=float)
    if family is None:
        blocks = [[i] for i in range(n)]
        weights = [1.0 / n] * n
    else:
        blocks = [members(b, n) for b in family.blocks]
        weights = [float(t) for t in family.theta]
    num = 0.0
    for A, th in zip(blocks, weights):
        if A and th:
            zA = z[A]
            num += th * float(zA @ np.linalg.solve(inst.Delta[np.ix_(A, A)], zA))
    den = float(z @ inst.Gamma @ z)
    if den <= 0:
        raise ValueError("z must be nonzero")
    return num / den


def sigma_quantities(Gamma, family: BlockFamily) -> dict:
    """Sigma = sum_A theta_A Gamma^{1/2} M_A^T Gamma^{-1} M_A Gamma^{1/2} and its sandwich."""
    G = np.array(Gamma, dtype=float)
    if G.shape != (family.n, family.n):
        raise ValueError("Gamma does not match the family size")
    if np.max(np.abs(G - G.T)) > 1e-10:
        raise ValueError("Gamma is not symmetric")
    G = 0.5 * (G + G.T)
    vals, vecs = np.linalg.eigh(G)
    if vals[0] <= 0:
        raise ValueError("Gamma is not positive definite")
    root = (vecs * np.sqrt(vals)) @ vecs.T
    Ginv = (vecs / vals) @ vecs.T
    S = np.zeros_like(G)
    for mask, th in zip(family.blocks, family.theta):
        if not th:
            continue
        M = _conditional(G, members(mask, family.n))
        S += float(th) * (root @ M.T @ Ginv @ M @ root)
    S = 0.5 * (S + S.T)
    sigma = float(np.clip(np.linalg.eigvalsh(S)[0], 0.0, 1.0))
    return {
        "Sigma": S,
        "sigma": sigma,
        "kappa_low": 1 - float(np.sqrt(1 - sigma)),
        "kappa_high": sigma,
    }


def lattice_P(dims, hop_weight: float) -> np.ndarray:
    """Killed nearest-neighbour walk on the box prod_k {0..n_k-1}."""
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise ValueError("side lengths must be positive")
    size = int(np.prod(dims))
    if size > MAX_LATTICE:
        raise ValueError(f"box has {size} sites, limit {MAX_LATTICE}")
    if hop_weight < 0 or 2 * len(dims) * hop_weight > 1 + 1e-12:
        raise ValueError("hop_weight must lie in [0, 1/(2d)]")
    P = np.zeros((size, size))
    coords = np.array(np.unravel_index(np.arange(size), dims)).T
    for axis, n_k in enumerate(dims):
        ok = coords[:, axis] + 1 < n_k
        src = np.flatnonzero(ok)
        nb = coords[ok].copy()
        nb[:, axis] += 1
        dst = np.ravel_multi_index(nb.T, dims)
        P[src, dst] = hop_weight
        P[dst, src] = hop_weight
    return P


def lattice_delta(dims, hop_weight: float | None = None) -> dict:
    """Bottom eigenvalue of Id - P on a box, by eigendecomposition and in closed form.

    ``closed_form`` is 1 - 2 h sum_k cos(pi/(n_k+1)) for hop weight h.
    ``two_over_d`` is (2/d) sum_k (1 - cos(pi/(n_k+1))), the alternative
    normalisation, reported alongside for comparison.
    """
    d = len(dims)
    h = 1.0 / (2 * d) if hop_weight is None else float(hop_weight)
    P = lattice_P(dims, h)
    eig = float(np.linalg.eigvalsh(np.eye(P.shape[0]) - P)[0])
    cos = np.cos(np.pi / (np.asarray(dims, dtype=float) + 1))
    return {
        "delta": eig,
        "closed_form": float(1 - 2 * h * cos.sum()),
        "separable_sum": float(np.sum(2 * h * (1 - cos))),
        "two_over_d": float(2.0 / d * np.sum(1 - cos)),
        "hop_weight": h,
    }
