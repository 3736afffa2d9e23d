"""Finite probability spaces, entropy, Markov kernels and metrics.

Everything here is immutable after construction. Probabilities are kept as
float64 arrays; spaces and kernels built from ``Fraction`` inputs additionally
carry an exact object-array copy which downstream code (transport,
certification) uses to produce exact rational constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ._exact import all_rational, fraction_array, to_float

PROB_TOL = 1e-12
STATIONARY_TOL = 1e-10
EXACT_MAX_STATES = 100
TRIANGLE_CHECK_MAX = 500


class ContractViolation(ValueError):
    """An operation's precondition on its inputs does not hold."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """A finite state set with a strictly positive reference law ``p``."""

    states: tuple
    p: np.ndarray
    p_exact: np.ndarray | None = None
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise ValueError("state labels must be unique")
        p = np.asarray(self.p, dtype=float)
        if p.shape != (len(self.states),):
            raise ValueError("p must have one entry per state")
        if np.any(p <= 0):
            raise ValueError("reference probabilities must be strictly positive")
        if self.p_exact is not None:
            if sum(self.p_exact) != 1:
                raise ValueError("exact probabilities must sum to 1")
        elif abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "p", _frozen(p))
        if self.p_exact is not None:
            object.__setattr__(self, "p_exact", _frozen(self.p_exact))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @classmethod
    def from_probs(cls, states: Sequence[Hashable], probs, exact: bool | None = None) -> "FiniteSpace":
        """Build a space; ``exact`` defaults to True when every prob is rational."""
        states = tuple(states)
        if exact is None:
            exact = all_rational(probs)
        if exact:
            if len(states) > EXACT_MAX_STATES:
                raise ValueError(f"exact mode is limited to {EXACT_MAX_STATES} states")
            pe = fraction_array(probs)
            return cls(states, to_float(pe), pe)
        return cls(states, np.asarray(probs, dtype=float))

    @classmethod
    def uniform(cls, states: Sequence[Hashable], exact: bool = False) -> "FiniteSpace":
        states = tuple(states)
        m = len(states)
        if exact and m <= EXACT_MAX_STATES:
            return cls.from_probs(states, [Fraction(1, m)] * m, exact=True)
        return cls(states, np.full(m, 1.0 / m))

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def is_exact(self) -> bool:
        return self.p_exact is not None

    def index(self, label) -> int:
        return self._index[label]

    def expect(self, f) -> float:
        return float(np.dot(self.p, f))


# ---------------------------------------------------------------------------
# entropy
# ---------------------------------------------------------------------------


def _phi(d: np.ndarray) -> np.ndarray:
    """(1+d) log(1+d) - d, accurate for small |d| and equal to 1 at d = -1."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    small = np.abs(d) < 1e-3
    ds = d[small]
    # sum_{k>=2} (-1)^k d^k / (k(k-1))
    out[small] = ds**2 * (0.5 - ds / 6 + ds**2 / 12 - ds**3 / 20 + ds**4 / 30)
    dl = d[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        big = (1.0 + dl) * np.log1p(dl) - dl
    out[~small] = np.where(dl <= -1.0, 1.0, big)
    return out


def entropy_weighted(f, p) -> float:
    """Ent(f) under the weights ``p``; f must be nonnegative and not all zero."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("densities must be nonnegative")
    m = float(np.dot(p, f))
    if m <= 0:
        raise ValueError("entropy of zero function undefined for ratio use")
    return max(m * float(np.dot(p, _phi(f / m - 1.0))), 0.0)


def entropy(f, space: FiniteSpace) -> float:
    """Ent(f) = E[f log f] - E[f] log E[f], with 0 log 0 = 0."""
    f = np.asarray(f, dtype=float)
    if f.shape != (space.size,):
        raise ValueError("density does not match the space")
    return entropy_weighted(f, space.p)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    """Row-stochastic matrix over ``space``; ``stationary`` is P^T T = P^T."""

    space: FiniteSpace
    matrix: np.ndarray
    exact: np.ndarray | None = None
    stationary: bool = False
    name: str = ""

    @classmethod
    def from_matrix(cls, space: FiniteSpace, matrix, name: str = "", exact: bool | None = None) -> "MarkovKernel":
        n = space.size
        if exact is None:
            exact = space.is_exact and all_rational(matrix)
        if exact:
            ex = fraction_array(matrix)
            if ex.shape != (n, n):
                raise ValueError(f"kernel shape {ex.shape} does not match space of size {n}")
            if any(v < 0 for v in ex.ravel()):
                raise ValueError("kernel entries must be nonnegative")
            if any(sum(row) != 1 for row in ex):
                raise ValueError("kernel rows must sum to 1")
            stationary = bool(space.is_exact and np.all(space.p_exact.dot(ex) == space.p_exact))
            return cls(space, _frozen(to_float(ex)), _frozen(ex), stationary, name)
        mat = np.asarray(matrix, dtype=float)
        if mat.shape != (n, n):
            raise ValueError(f"kernel shape {mat.shape} does not match space of size {n}")
        if np.any(mat < 0):
            raise ValueError("kernel entries must be nonnegative")
        if np.max(np.abs(mat.sum(axis=1) - 1.0)) > PROB_TOL * max(1, n):
            raise ValueError("kernel rows must sum to 1")
        stationary = bool(np.max(np.abs(space.p @ mat - space.p)) <= STATIONARY_TOL)
        return cls(space, _frozen(mat), None, stationary, name)

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def require_stationary(self):
        if not self.stationary:
            raise ContractViolation(f"kernel {self.name or '<unnamed>'} is not stationary for P")


def identity_kernel(space: FiniteSpace) -> MarkovKernel:
    if space.is_exact:
        m = np.full((space.size, space.size), Fraction(0), dtype=object)
        for i in range(space.size):
            m[i, i] = Fraction(1)
        return MarkovKernel.from_matrix(space, m, name="identity")
    return MarkovKernel.from_matrix(space, np.eye(space.size), name="identity")


def mixing_kernel(space: FiniteSpace) -> MarkovKernel:
    """One-step mixing kernel: every row equals P."""
    src = space.p_exact if space.is_exact else space.p
    return MarkovKernel.from_matrix(space, np.tile(src, (space.size, 1)), name="mixing")


def apply(T: MarkovKernel, f) -> np.ndarray:
    """(Tf)(x) = sum_y T(x,y) f(y)."""
    f = np.asarray(f)
    if f.shape != (T.size,):
        raise ValueError(f"function of length {f.shape} does not match kernel of size {T.size}")
    if T.is_exact and f.dtype == object:
        return T.exact.dot(f)
    return T.matrix @ np.asarray(f, dtype=float)


def adjoint(T: MarkovKernel) -> MarkovKernel:
    """T*(x,y) = P(y) T(y,x) / P(x)."""
    T.require_stationary()
    sp = T.space
    if T.is_exact and sp.is_exact:
        pe = sp.p_exact
        adj = (T.exact.T * pe[None, :]) / pe[:, None]
        return MarkovKernel.from_matrix(sp, adj, name=f"{T.name}*" if T.name else "")
    adj = T.matrix.T * sp.p[None, :] / sp.p[:, None]
    # renormalise away the O(eps) stationarity residual
    adj = adj / adj.sum(axis=1, keepdims=True)
    return MarkovKernel.from_matrix(sp, adj, name=f"{T.name}*" if T.name else "")


def mixture(kernels: Sequence[MarkovKernel], theta) -> MarkovKernel:
    """Entrywise convex combination sum_i theta_i T_i."""
    kernels = list(kernels)
    if len(kernels) != len(theta):
        raise ValueError(f"{len(theta)} weights for {len(kernels)} kernels")
    if not kernels:
        raise ValueError("need at least one kernel")
    sp = kernels[0].space
    if any(K.space is not sp for K in kernels):
        raise ValueError("kernels must share a space")
    w = check_weights(theta)
    if all(K.is_exact for K in kernels) and w.dtype == object:
        acc = sum((wi * K.exact for wi, K in zip(w, kernels)), np.zeros((sp.size, sp.size), dtype=object) + Fraction(0))
        return MarkovKernel.from_matrix(sp, acc, name="mixture")
    acc = sum(float(wi) * K.matrix for wi, K in zip(w, kernels))
    return MarkovKernel.from_matrix(sp, acc, name="mixture")


def check_weights(theta) -> np.ndarray:
    """Validate a probability vector; rational inputs stay exact."""
    if all_rational(theta):
        w = fraction_array(theta)
        if any(v < 0 for v in w) or sum(w) != 1:
            raise ValueError("weights must be nonnegative and sum to 1")
        return w
    w = np.asarray(theta, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > PROB_TOL:
        raise ValueError("weights must be nonnegative and sum to 1")
    return w


def conditional_kernel(space: FiniteSpace, partition: Sequence[Hashable], name: str = "") -> MarkovKernel:
    """Kernel of f -> E[f | cell]; ``partition[x]`` is the cell key of state x."""
    if len(partition) != space.size:
        raise ValueError("every state must be assigned to exactly one cell")
    if any(c is None for c in partition):
        raise ValueError("unassigned state in partition")
    cells: dict = {}
    for i, c in enumerate(partition):
        cells.setdefault(c, []).append(i)
    n = space.size
    if space.is_exact:
        pe = space.p_exact
        mat = np.full((n, n), Fraction(0), dtype=object)
        for members in cells.values():
            mass = sum(pe[members])
            row = [pe[j] / mass for j in members]
            for i in members:
                mat[i, members] = row
        return MarkovKernel.from_matrix(space, mat, name=name)
    mat = np.zeros((n, n))
    for members in cells.values():
        idx = np.asarray(members)
        row = space.p[idx] / space.p[idx].sum()
        mat[np.ix_(idx, idx)] = row[None, :]
    return MarkovKernel.from_matrix(space, mat, name=name)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Metric:
    """Symmetric distance matrix, optionally generated by an edge list."""

    dist: np.ndarray
    edges: np.ndarray | None = None
    exact: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, dist, edges=None, check: bool = True) -> "Metric":
        exact = None
        if all_rational(dist):
            exact = _frozen(fraction_array(dist))
            d = to_float(exact)
        else:
            d = np.asarray(dist, dtype=float)
        e = None if edges is None else _frozen(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        m = cls(_frozen(d), e, exact)
        if check:
            m.validate()
        return m

    @classmethod
    def from_edges(cls, n: int, edges, weights=None) -> "Metric":
        """Shortest-path metric of a connected weighted graph on n states."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=float)
        g = csr_matrix((w, (e[:, 0], e[:, 1])), shape=(n, n))
        d = shortest_path(g, directed=False)
        if not np.all(np.isfinite(d)):
            raise ValueError("generator edges do not connect the space")
        if weights is None:
            d = np.rint(d)
        return cls.from_matrix(d, edges=e)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    def validate(self):
        d = self.dist
        n = d.shape[0]
        if d.shape != (n, n):
            raise ValueError("distance matrix must be square")
        if np.any(np.diag(d) != 0):
            raise ValueError("dist(x,x) must be 0")
        if not np.array_equal(d, d.T):
            if np.max(np.abs(d - d.T)) > 1e-12:
                raise ValueError("distance matrix must be symmetric")
        off = d[~np.eye(n, dtype=bool)]
        if np.any(off <= 0):
            raise ValueError("distinct states must have positive distance")
        if n <= TRIANGLE_CHECK_MAX:
            tol = 1e-12 * max(1.0, float(d.max()))
            for k in range(n):
                if np.any(d > d[:, k, None] + d[None, k, :] + tol):
                    raise ValueError("triangle inequality fails")
        if self.edges is not None:
            e = self.edges
            g = csr_matrix((d[e[:, 0], e[:, 1]], (e[:, 0], e[:, 1])), shape=(n, n))
            sp = shortest_path(g, directed=False)
            if not np.allclose(sp, d, rtol=0, atol=1e-9):
                raise ValueError("generator edges do not induce the distance matrix")

    def integer_costs(self) -> tuple[np.ndarray, int] | None:
        """Integer cost matrix and scale with dist = costs / scale, if exact-capable."""
        from ._exact import common_denominator, scale_to_int

        if self.exact is not None:
            s = common_denominator(self.exact)
            return scale_to_int(self.exact, s), s
        r = np.rint(self.dist)
        if np.array_equal(r, self.dist) and r.max() < 2**40:
            return r.astype(np.int64), 1
        return None
