"""Compiled network-flow kernels for the transport solvers.

Both routines work on a dense bipartite transportation graph (supply rows,
demand columns) and are compiled once for int64 (exact, masses and costs
pre-scaled to integers) and once for float64 inputs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INT_INF = np.int64(2**62)


@njit(cache=True)
def ssp_transport(a, b, C, eps, inf):
    """Min-cost transport plan by successive shortest paths with potentials.

    ``a`` (m,) supplies, ``b`` (k,) demands with equal totals, ``C`` (m, k)
    nonnegative costs. Returns the flow matrix.
    """
    m = a.shape[0]
    k = b.shape[0]
    nn = m + k
    F = np.zeros_like(C)
    sup = a.copy()
    dem = b.copy()
    pot = np.zeros(nn, dtype=C.dtype)
    dist = np.empty(nn, dtype=C.dtype)
    prev = np.empty(nn, dtype=np.int64)
    done = np.empty(nn, dtype=np.bool_)
    remaining = sup.sum()
    while remaining > eps:
        for v in range(nn):
            dist[v] = inf
            prev[v] = -1
            done[v] = False
        for i in range(m):
            if sup[i] > eps:
                dist[i] = 0
        target = -1
        while True:
            u = -1
            best = inf
            for v in range(nn):
                if not done[v] and dist[v] < best:
                    best = dist[v]
                    u = v
            if u == -1:
                break
            done[u] = True
            if u >= m:
                j = u - m
                if dem[j] > eps:
                    target = u
                    break
                for i in range(m):
                    if not done[i] and F[i, j] > eps:
                        nd = dist[u] - C[i, j] + pot[u] - pot[i]
                        if nd < dist[i]:
                            dist[i] = nd
                            prev[i] = u
            else:
                for j in range(k):
                    v = m + j
                    if not done[v]:
                        nd = dist[u] + C[u, j] + pot[u] - pot[v]
                        if nd < dist[v]:
                            dist[v] = nd
                            prev[v] = u
        if target == -1:
            break
        dt = dist[target]
        for v in range(nn):
            if dist[v] < dt:
                pot[v] += dist[v]
            else:
                pot[v] += dt
        # bottleneck along the path
        delta = dem[target - m]
        v = target
        while prev[v] != -1:
            u = prev[v]
            if v < m:  # backward edge col u -> row v
                if F[v, u - m] < delta:
                    delta = F[v, u - m]
            v = u
        if sup[v] < delta:
            delta = sup[v]
        src = v
        v = target
        while prev[v] != -1:
            u = prev[v]
            if v >= m:
                F[u, v - m] += delta
            else:
                F[v, u - m] -= delta
            v = u
        sup[src] -= delta
        dem[target - m] -= delta
        remaining -= delta
    return F


@njit(cache=True)
def max_flow_allowed(a, b, allowed, eps):
    """Route as much of ``a`` to ``b`` as possible over allowed pairs.

    Breadth-first augmenting paths on the bipartite residual graph. Returns
    the flow matrix and the total routed mass.
    """
    m = a.shape[0]
    k = b.shape[0]
    nn = m + k
    F = np.zeros((m, k), dtype=a.dtype)
    sup = a.copy()
    dem = b.copy()
    prev = np.empty(nn, dtype=np.int64)
    seen = np.empty(nn, dtype=np.bool_)
    queue = np.empty(nn, dtype=np.int64)
    routed = a[0] * 0
    while True:
        for v in range(nn):
            prev[v] = -1
            seen[v] = False
        head = 0
        tail = 0
        for i in range(m):
            if sup[i] > eps:
                seen[i] = True
                queue[tail] = i
                tail += 1
        target = -1
        while head < tail and target == -1:
            u = queue[head]
            head += 1
            if u < m:
                for j in range(k):
                    v = m + j
                    if allowed[u, j] and not seen[v]:
                        seen[v] = True
                        prev[v] = u
                        if dem[j] > eps:
                            target = v
                            break
                        queue[tail] = v
                        tail += 1
            else:
                j = u - m
                for i in range(m):
                    if not seen[i] and F[i, j] > eps:
                        seen[i] = True
                        prev[i] = u
                        queue[tail] = i
                        tail += 1
        if target == -1:
            break
        delta = dem[target - m]
        v = target
        while prev[v] != -1:
            u = prev[v]
            if v < m and F[v, u - m] < delta:
                delta = F[v, u - m]
            v = u
        if sup[v] < delta:
            delta = sup[v]
        src = v
        v = target
        while prev[v] != -1:
            u = prev[v]
            if v >= m:
                F[u, v - m] += delta
            else:
                F[v, u - m] -= delta
            v = u
        sup[src] -= delta
        dem[target - m] -= delta
        routed += delta
    return F, routed


@njit(cache=True)
def _support(x, eps):
    n = 0
    for i in range(x.shape[0]):
        if x[i] > eps:
            n += 1
    idx = np.empty(n, dtype=np.int64)
    n = 0
    for i in range(x.shape[0]):
        if x[i] > eps:
            idx[n] = i
            n += 1
    return idx


@njit(cache=True)
def w1_value(mu, nu, C, eps, inf):
    """W1 between full-length vectors; shared mass is left in place first."""
    n = mu.shape[0]
    a = np.empty(n, dtype=mu.dtype)
    b = np.empty(n, dtype=mu.dtype)
    for i in range(n):
        c = mu[i] if mu[i] < nu[i] else nu[i]
        a[i] = mu[i] - c
        b[i] = nu[i] - c
    ia = _support(a, eps)
    ib = _support(b, eps)
    if ia.shape[0] == 0 or ib.shape[0] == 0:
        return C[0, 0] * 0
    aa = a[ia]
    bb = b[ib]
    # float residuals: rebalance the tiny total mismatch onto the largest demand
    diff = aa.sum() - bb.sum()
    if diff != 0:
        jmax = np.argmax(bb)
        bb[jmax] += diff
    Cs = np.empty((ia.shape[0], ib.shape[0]), dtype=C.dtype)
    for r in range(ia.shape[0]):
        for s in range(ib.shape[0]):
            Cs[r, s] = C[ia[r], ib[s]]
    F = ssp_transport(aa, bb, Cs, eps, inf)
    total = C[0, 0] * 0
    for r in range(ia.shape[0]):
        for s in range(ib.shape[0]):
            total += F[r, s] * Cs[r, s]
    return total


@njit(cache=True)
def winf_value(mu, nu, C, eps, feas_tol):
    """W-infinity between full-length vectors via thresholded max-flow."""
    ia = _support(mu, eps)
    ib = _support(nu, eps)
    aa = mu[ia]
    bb = nu[ib]
    Cs = np.empty((ia.shape[0], ib.shape[0]), dtype=C.dtype)
    for r in range(ia.shape[0]):
        for s in range(ib.shape[0]):
            Cs[r, s] = C[ia[r], ib[s]]
    cand = np.unique(Cs.ravel())
    # every supply row needs at least one admissible partner, and each column too
    lo_bound = cand[0]
    for r in range(Cs.shape[0]):
        mn = Cs[r, 0]
        for s in range(Cs.shape[1]):
            if Cs[r, s] < mn:
                mn = Cs[r, s]
        if mn > lo_bound:
            lo_bound = mn
    for s in range(Cs.shape[1]):
        mn = Cs[0, s]
        for r in range(Cs.shape[0]):
            if Cs[r, s] < mn:
                mn = Cs[r, s]
        if mn > lo_bound:
            lo_bound = mn
    lo = 0
    while cand[lo] < lo_bound:
        lo += 1
    hi = cand.shape[0] - 1
    need = aa.sum()
    while lo < hi:
        mid = (lo + hi) // 2
        F, routed = max_flow_allowed(aa, bb, Cs <= cand[mid], eps)
        if routed >= need - feas_tol:
            hi = mid
        else:
            lo = mid + 1
    return cand[lo]
