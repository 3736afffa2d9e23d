"""Curvature certificates for entropy contraction.

Given kernels T_1..T_M, weights theta and a metric, compute the per-kernel
Lipschitz constants

    ell_i = max_{x,y} W_inf(T_i*(x,.), T_i*(y,.)) / dist(x, y)

and the certified constant

    kappa = 1 - max_{x,y} sum_i theta_i ell_i W_1(T_i(x,.), T_i(y,.)) / dist(x, y)

clipped to [0, 1]. On a finite space with a strictly positive reference law
the regularity requirement is automatic, so the pair of curvature bounds is
all that needs checking.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import all_rational, common_denominator, scale_to_int
from .measure import ContractViolation, MarkovKernel, Metric, adjoint, check_weights
from .transport import PairSolver

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PairSet:
    pairs: np.ndarray  # (P, 2) state indices, i < j
    mode: str  # "exhaustive" or "generator-edges"

    def __len__(self):
        return len(self.pairs)


def pair_set(n_states: int, metric: Metric, mode: str = "exhaustive") -> PairSet:
    """All unordered pairs, or only the metric's generating edges."""
    if mode == "exhaustive":
        i, j = np.triu_indices(n_states, k=1)
        return PairSet(np.stack([i, j], axis=1), mode)
    if mode == "generator-edges":
        if metric.edges is None:
            raise ValueError("generator-edges mode needs a metric with declared generator edges")
        e = np.sort(metric.edges, axis=1)
        e = e[e[:, 0] != e[:, 1]]
        e = np.unique(e, axis=0)
        return PairSet(e, mode)
    raise ValueError(f"unknown pair mode {mode!r}")


@dataclass
class CertReport:
    ell: list
    kappa: float | Fraction
    worst_pair: tuple
    worst_ratio: float | Fraction
    pair_mode: str
    n_pairs: int
    exact: bool
    spot_check: dict | None = None
    timing: dict = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        out = {
            "ell": [num(v) for v in self.ell],
            "kappa": num(self.kappa),
            "kappa_float": float(self.kappa),
            "worst_pair": [str(s) for s in self.worst_pair],
            "worst_ratio": num(self.worst_ratio),
            "pair_mode": self.pair_mode,
            "n_pairs": self.n_pairs,
            "exact": self.exact,
        }
        if self.spot_check is not None:
            out["spot_check"] = self.spot_check
        if include_timing:
            out["timing"] = self.timing
        return out


class _Rows:
    """Kernel rows in the representation the pair solver expects."""

    def __init__(self, K: MarkovKernel, exact: bool):
        self.exact = exact
        if exact:
            self.denom = common_denominator(K.exact)
            self.rows = np.ascontiguousarray(scale_to_int(K.exact, self.denom))
        else:
            self.denom = 1
            self.rows = np.ascontiguousarray(K.matrix)


def _self_adjoint(K: MarkovKernel) -> bool:
    if K.is_exact and K.space.is_exact:
        pe = K.space.p_exact
        return bool(np.all(pe[:, None] * K.exact == (pe[:, None] * K.exact).T))
    m = K.space.p[:, None] * K.matrix
    return bool(np.allclose(m, m.T, rtol=0, atol=1e-15))


def _use_exact(kernels, theta, metric) -> bool:
    return (
        all(K.is_exact and K.space.is_exact for K in kernels)
        and all_rational(theta)
        and metric.integer_costs() is not None
    )


def _lipschitz(rows: _Rows, solver: PairSolver, pairs: np.ndarray, exact: bool):
    best = Fraction(0) if exact else 0.0
    arg = None
    for x, y in pairs:
        raw = solver.winf_raw(rows.rows[x], rows.rows[y])
        d = solver.C[x, y]
        r = Fraction(int(raw), int(d)) if exact else float(raw) / float(d)
        if arg is None or r > best:
            best, arg = r, (int(x), int(y))
    return best, arg


def lipschitz_constant(Tstar: MarkovKernel, metric: Metric, pairs: PairSet | np.ndarray) -> float | Fraction:
    """Least ell with W_inf(Tstar(x,.), Tstar(y,.)) <= ell * dist(x,y) over the pairs."""
    Tstar.require_stationary()
    p = pairs.pairs if isinstance(pairs, PairSet) else np.asarray(pairs).reshape(-1, 2)
    if len(p) == 0:
        raise ValueError("pair set is empty")
    exact = Tstar.is_exact and metric.integer_costs() is not None
    solver = PairSolver(metric, exact)
    val, _ = _lipschitz(_Rows(Tstar, exact), solver, p, exact)
    return val


def certify_kappa(
    kernels: Sequence[MarkovKernel],
    theta,
    metric: Metric,
    pairs: PairSet,
    ell_override: Sequence | None = None,
    spot_checks: int = 8,
    seed: int = 0,
    exact: bool | None = None,
) -> CertReport:
    """Certify an entropy-contraction constant for the weighted family."""
    t0 = time.perf_counter()
    kernels = list(kernels)
    if not kernels:
        raise ValueError("need at least one kernel")
    w = check_weights(theta)
    if len(w) != len(kernels):
        raise ValueError(f"{len(w)} weights for {len(kernels)} kernels")
    space = kernels[0].space
    for K in kernels:
        if K.space is not space:
            raise ValueError("kernels must share a space")
        K.require_stationary()
    if metric.size != space.size:
        raise ValueError("metric does not match the space")
    if len(pairs) == 0:
        raise ValueError("pair set is empty")
    if exact is None:
        exact = _use_exact(kernels, w, metric)
    solver = PairSolver(metric, exact)
    cscale = solver.cscale
    P = pairs.pairs

    # per-kernel Lipschitz constants from the adjoint rows
    ells = []
    adj_rows = []
    for K in kernels:
        Ks = K if _self_adjoint(K) else adjoint(K)
        rows = _Rows(Ks, exact)
        adj_rows.append(rows)
        ell, _ = _lipschitz(rows, solver, P, exact)
        ells.append(ell)
    if ell_override is not None:
        if len(ell_override) != len(kernels):
            raise ValueError("ell override must have one entry per kernel")
        for i, (given, computed) in enumerate(zip(ell_override, ells)):
            if float(given) < float(computed) - 1e-12:
                raise ContractViolation(f"ell[{i}]={given} is below the sectional bound {computed}")
        ells = [Fraction(g) if exact else float(g) for g in ell_override]
    t1 = time.perf_counter()

    # weighted W1 contraction over pairs
    fwd_rows = [_Rows(K, exact) for K in kernels]
    coef = [wi * li for wi, li in zip(w, ells)]
    active = [i for i, c in enumerate(coef) if c != 0]
    worst = None
    worst_pair = tuple(int(v) for v in P[0])
    for x, y in P:
        d = solver.C[x, y]
        if exact:
            s = Fraction(0)
            for i in active:
                r = fwd_rows[i]
                raw = solver.w1_raw(r.rows[x], r.rows[y])
                if raw:
                    s += coef[i] * Fraction(int(raw), r.denom * int(d))
        else:
            s = 0.0
            for i in active:
                r = fwd_rows[i]
                s += float(coef[i]) * float(solver.w1_raw(r.rows[x], r.rows[y])) / float(d)
        if worst is None or s > worst:
            worst, worst_pair = s, (int(x), int(y))
    kappa = 1 - worst
    kappa = min(max(kappa, 0), 1)
    t2 = time.perf_counter()

    spot = None
    if pairs.mode == "generator-edges" and spot_checks > 0:
        spot = _spot_check(adj_rows, ells, solver, metric, pairs, spot_checks, seed, exact)

    return CertReport(
        ell=ells,
        kappa=kappa,
        worst_pair=(space.states[worst_pair[0]], space.states[worst_pair[1]]),
        worst_ratio=worst,
        pair_mode=pairs.mode,
        n_pairs=len(P),
        exact=exact,
        spot_check=spot,
        timing={"ell_seconds": t1 - t0, "w1_seconds": t2 - t1},
    )


def _shortest_path(edges: np.ndarray, n: int, src: int, dst: int) -> list[int]:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    prev = [-1] * n
    prev[src] = src
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            break
        for v in adj[u]:
            if prev[v] == -1:
                prev[v] = u
                q.append(v)
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


def _spot_check(adj_rows, ells, solver, metric, pairs, count, seed, exact) -> dict:
    """Check the edge-based ell against direct W_inf on random non-edge pairs.

    Along one shortest path per sampled pair, W_inf of the endpoints must not
    exceed the sum of the edge W_inf values, nor ell * dist.
    """
    n = metric.size
    rng = np.random.default_rng(seed)
    edge_set = {tuple(e) for e in pairs.pairs.tolist()}
    checked = 0
    worst_excess = 0.0
    ok = True
    for _ in range(count * 4):
        if checked >= count:
            break
        x, y = sorted(rng.choice(n, size=2, replace=False).tolist())
        if (x, y) in edge_set:
            continue
        path = _shortest_path(pairs.pairs, n, x, y)
        for rows, ell in zip(adj_rows, ells):
            direct = solver.winf_raw(rows.rows[x], rows.rows[y])
            along = sum(solver.winf_raw(rows.rows[a], rows.rows[b]) for a, b in zip(path, path[1:]))
            bound = float(ell) * float(solver.C[x, y])
            excess = max(float(direct) - float(along), float(direct) - bound)
            worst_excess = max(worst_excess, excess)
            if excess > (0 if exact else 1e-9):
                ok = False
        checked += 1
    return {"pairs_checked": checked, "ok": ok, "max_excess": worst_excess / solver.cscale}
