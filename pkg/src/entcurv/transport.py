"""Exact W1 and W-infinity distances between finitely supported laws.

W1 is solved as a min-cost transportation problem (successive shortest
paths with potentials); W-infinity is the smallest pairwise distance
threshold for which a max-flow routes all the mass. When both marginals are
rational and the metric has a rational grid, everything runs on scaled
integers and the returned values are ``Fraction`` instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _flow
from ._exact import all_rational, common_denominator, fraction_array, scale_to_int, to_float
from .measure import Metric

FLOAT_EPS = 1e-13
FEAS_TOL = 1e-12


@dataclass(frozen=True)
class TransportPlan:
    """A coupling of (mu, nu) together with the cost it certifies."""

    coupling: np.ndarray
    cost: float | Fraction
    kind: str  # "w1" or "winf"

    def to_json(self) -> str:
        rows = [[str(v) if isinstance(v, Fraction) else float(v) for v in r] for r in self.coupling]
        cost = str(self.cost) if isinstance(self.cost, Fraction) else float(self.cost)
        return json.dumps({"kind": self.kind, "cost": cost, "coupling": rows})


def _check_marginals(mu, nu, n: int, exact: bool):
    if len(mu) != n or len(nu) != n:
        raise ValueError(f"marginals must have length {n}")
    if exact:
        if sum(mu) != 1 or sum(nu) != 1:
            raise ValueError("marginals must sum to 1")
        if any(v < 0 for v in list(mu) + list(nu)):
            raise ValueError("marginals must be nonnegative")
    else:
        if abs(float(np.sum(mu)) - 1) > 1e-10 or abs(float(np.sum(nu)) - 1) > 1e-10:
            raise ValueError("marginals must sum to 1")
        if np.any(np.asarray(mu) < -FLOAT_EPS) or np.any(np.asarray(nu) < -FLOAT_EPS):
            raise ValueError("marginals must be nonnegative")


class _Problem:
    """Marginals and costs normalised to either int64 or float64 arrays."""

    def __init__(self, mu, nu, metric: Metric, exact: bool | None):
        n = metric.size
        if exact is None:
            exact = all_rational(mu) and all_rational(nu) and metric.integer_costs() is not None
        _check_marginals(mu, nu, n, exact)
        self.exact = exact
        if exact:
            costs = metric.integer_costs()
            if costs is None:
                raise ValueError("exact mode needs a metric on a rational grid")
            self.C, self.cscale = costs
            fm, fn = fraction_array(mu), fraction_array(nu)
            self.mscale = common_denominator(np.concatenate([fm, fn]))
            self.mu = scale_to_int(fm, self.mscale)
            self.nu = scale_to_int(fn, self.mscale)
        else:
            self.C = np.ascontiguousarray(metric.dist, dtype=float)
            self.cscale = self.mscale = 1
            self.mu = np.clip(to_float(mu) if np.asarray(mu).dtype == object else np.asarray(mu, float), 0, None)
            self.nu = np.clip(to_float(nu) if np.asarray(nu).dtype == object else np.asarray(nu, float), 0, None)

    def value(self, raw, kind: str):
        if not self.exact:
            return float(raw)
        if kind == "w1":
            return Fraction(int(raw), self.mscale * self.cscale)
        return Fraction(int(raw), self.cscale)

    def mass(self, F):
        if not self.exact:
            return F
        out = np.empty(F.shape, dtype=object)
        for idx, v in np.ndenumerate(F):
            out[idx] = Fraction(int(v), self.mscale)
        return out

    @property
    def eps(self):
        return 0 if self.exact else FLOAT_EPS


def w1(mu, nu, metric: Metric, exact: bool | None = None) -> tuple[float | Fraction, TransportPlan]:
    """L1-Wasserstein distance and an optimal coupling."""
    pb = _Problem(mu, nu, metric, exact)
    n = metric.size
    common = np.minimum(pb.mu, pb.nu)
    a, b = pb.mu - common, pb.nu - common
    F = np.zeros((n, n), dtype=pb.mu.dtype)
    F[np.diag_indices(n)] = common
    ia = np.flatnonzero(a > pb.eps)
    ib = np.flatnonzero(b > pb.eps)
    if len(ia) and len(ib):
        aa, bb = a[ia].copy(), b[ib].copy()
        if not pb.exact:
            bb[np.argmax(bb)] += aa.sum() - bb.sum()
        inf = _flow.INT_INF if pb.exact else np.inf
        sub = _flow.ssp_transport(aa, bb, np.ascontiguousarray(pb.C[np.ix_(ia, ib)]), pb.eps, inf)
        F[np.ix_(ia, ib)] += sub
    raw = (F * pb.C).sum()
    val = pb.value(raw, "w1")
    return val, TransportPlan(pb.mass(F), val, "w1")


def winf(mu, nu, metric: Metric, exact: bool | None = None) -> tuple[float | Fraction, TransportPlan]:
    """L-infinity Wasserstein distance and a coupling supported on pairs within it."""
    pb = _Problem(mu, nu, metric, exact)
    thr = _flow.winf_value(pb.mu, pb.nu, pb.C, pb.eps, 0 if pb.exact else FEAS_TOL)
    ia = np.flatnonzero(pb.mu > pb.eps)
    ib = np.flatnonzero(pb.nu > pb.eps)
    sub_c = pb.C[np.ix_(ia, ib)]
    sub, _ = _flow.max_flow_allowed(pb.mu[ia].copy(), pb.nu[ib].copy(), sub_c <= thr, pb.eps)
    F = np.zeros((metric.size, metric.size), dtype=pb.mu.dtype)
    F[np.ix_(ia, ib)] = sub
    val = pb.value(thr, "winf")
    return val, TransportPlan(pb.mass(F), val, "winf")


class PairSolver:
    """Repeated W1 / W-infinity evaluations between rows of kernels.

    Built once per metric; rows are passed as already-scaled arrays (int64
    numerators over ``mscale`` in exact mode, float64 otherwise) so the hot
    loop stays inside compiled code.
    """

    def __init__(self, metric: Metric, exact: bool):
        self.exact = exact
        if exact:
            costs = metric.integer_costs()
            if costs is None:
                raise ValueError("exact mode needs a metric on a rational grid")
            self.C, self.cscale = costs
            self.C = np.ascontiguousarray(self.C)
            self.eps = np.int64(0)
            self.inf = _flow.INT_INF
        else:
            self.C = np.ascontiguousarray(metric.dist, dtype=float)
            self.cscale = 1
            self.eps = FLOAT_EPS
            self.inf = np.inf

    def w1_raw(self, mu, nu):
        return _flow.w1_value(mu, nu, self.C, self.eps, self.inf)

    def winf_raw(self, mu, nu):
        return _flow.winf_value(mu, nu, self.C, self.eps, 0 if self.exact else FEAS_TOL)
