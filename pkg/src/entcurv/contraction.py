"""Upper-bound side of the contraction problem.

The certified constant from :mod:`entcurv.certify` is a lower bound on the
best entropy-contraction constant kappa_opt. This module searches for bad
test functions instead: any density g gives

    rho(g) = sum_i theta_i Ent(T_i* g) / Ent(g) <= 1 - kappa_opt,

so the best ratio found is a lower bound on rho and 1 - rho_est an upper
bound on kappa_opt. It also provides the variance analogue (second
eigenvalue of sum_i theta_i T_i T_i*), the nonlinear operator

    Lambda f = sum_i theta_i T_i log T_i* exp f

and an exact-summation check of the dual Brascamp-Lieb form.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .measure import MarkovKernel, Metric, _phi, adjoint, check_weights

BOX = 10.0


def _family(kernels: Sequence[MarkovKernel], theta):
    kernels = list(kernels)
    if not kernels:
        raise ValueError("need at least one kernel")
    w = np.asarray([float(t) for t in check_weights(theta)])
    if len(w) != len(kernels):
        raise ValueError(f"{len(w)} weights for {len(kernels)} kernels")
    for K in kernels:
        K.require_stationary()
    p = kernels[0].space.p
    fwd = np.stack([K.matrix for K in kernels])
    adj = np.stack([adjoint(K).matrix for K in kernels])
    return w, p, fwd, adj


# ---------------------------------------------------------------------------
# Lambda operator and Lipschitz seminorms
# ---------------------------------------------------------------------------


def lambda_op(f, kernels: Sequence[MarkovKernel], theta) -> np.ndarray:
    """sum_i theta_i T_i log T_i* exp f, with per-row log-sum-exp."""
    w, _, fwd, adj = _family(kernels, theta)
    return _lambda(np.asarray(f, dtype=float), w, fwd, adj)


def _lambda(f, w, fwd, adj):
    return _lambda_batch(f[None, :], w, fwd, adj)[0]


def _lambda_batch(F, w, fwd, adj):
    """Lambda applied to each row of F."""
    out = np.zeros_like(F)
    for wi, T, S in zip(w, fwd, adj):
        if wi == 0:
            continue
        inner = logsumexp(F[:, None, :], b=S[None, :, :], axis=2)
        out += wi * (inner @ T.T)
    return out


def lipschitz_seminorm(f, metric: Metric | None = None) -> float:
    """max |f(x) - f(y)| / dist(x, y); the oscillation when no metric is given."""
    return float(_lip_batch(np.asarray(f, dtype=float)[None, :], metric)[0])


def _lip_batch(F, metric):
    if metric is None:
        return np.ptp(F, axis=1)
    d = metric.dist
    off = d > 0
    if not np.any(off):
        return np.zeros(len(F))
    diff = np.abs(F[:, :, None] - F[:, None, :])[:, off]
    return np.max(diff / d[off], axis=1)


def lambda_contraction_check(kernels, theta, metric: Metric, kappa, trials: int = 1000, seed: int = 0,
                             scale: float = 3.0) -> dict:
    """Largest excess of Lip(Lambda f) over (1 - kappa) Lip(f) on random f."""
    w, p, fwd, adj = _family(kernels, theta)
    rng = np.random.default_rng(seed)
    n = len(p)
    F = np.empty((trials, n))
    kind = np.arange(trials) % 4
    for k, draw in enumerate((
        lambda m: rng.normal(scale=scale, size=(m, n)),
        lambda m: rng.uniform(-scale, scale, size=(m, n)),
        lambda m: scale * rng.standard_cauchy(size=(m, n)).clip(-5, 5),
        # distance-to-a-point functions saturate the Lipschitz constant
        lambda m: scale * metric.dist[rng.integers(0, n, size=m)],
    )):
        F[kind == k] = draw(int(np.sum(kind == k)))
    worst = -np.inf
    for lo in range(0, trials, 100):
        block = F[lo:lo + 100]
        lf = _lip_batch(block, metric)
        lg = _lip_batch(_lambda_batch(block, w, fwd, adj), metric)
        worst = max(worst, float(np.max(lg - (1 - float(kappa)) * lf)))
    return {"trials": trials, "max_excess": float(worst), "kappa": float(kappa)}


# ---------------------------------------------------------------------------
# entropy ratio
# ---------------------------------------------------------------------------


def _ent_pert(wv, p):
    """Ent(1 + wv) from the perturbation wv (wv >= -1); rows of a 2-d wv are separate functions."""
    mw = np.asarray(wv @ p)
    m = 1.0 + mw
    d = (wv - mw[..., None]) / m[..., None]
    return m * (_phi(d) @ p)


def entropy_ratio(g, kernels: Sequence[MarkovKernel], theta) -> float:
    """sum_i theta_i Ent(T_i* g) / Ent(g) for a nonconstant density g."""
    w, p, _, adj = _family(kernels, theta)
    g = np.asarray(g, dtype=float)
    if np.any(g < 0) or not np.any(g > 0):
        raise ValueError("g must be nonnegative and not identically zero")
    if np.ptp(g) == 0:
        raise ValueError("ratio undefined for constant g")
    g = g / float(p @ g)
    return _ratio_pert(g - 1.0, w, p, adj)


# below this relative spread the ratio is a quotient of rounding errors
FLAT = 1e-10


def _ratio_pert(wv, w, p, adj):
    den = float(_ent_pert(wv, p))
    if den <= 0 or np.ptp(wv) <= FLAT * (1 + np.max(np.abs(wv))):
        raise ValueError("ratio undefined for constant g")
    return float(w @ _ent_pert(adj @ wv, p)) / den


def _ratio_from_log(h, w, p, adj):
    return _ratio_pert(np.expm1(h - float(p @ h)), w, p, adj)


def _ratio_grad(h, w, p, adj):
    """Ratio and its gradient with respect to the log-density h."""
    h = h - float(p @ h)
    wv = np.expm1(h)
    g = 1.0 + wv
    m = float(p @ g)
    den = float(_ent_pert(wv, p))
    if den <= 0 or np.ptp(wv) <= FLAT * (1 + np.max(np.abs(wv))):
        raise ValueError("ratio undefined for constant g")
    dden = p * (h - np.log(m))
    U = adj @ wv  # (kernels, states)
    num = float(w @ _ent_pert(U, p))
    logu = np.log(np.maximum(1.0 + U, 1e-300))
    dnum = np.einsum("k,kij,kj->i", w, adj, p * (logu - np.log(m)))
    val = num / den
    grad = g * (dnum * den - num * dden) / den**2
    return val, grad


# ---------------------------------------------------------------------------
# spectral bound
# ---------------------------------------------------------------------------


def _spectral(w, p, fwd, adj):
    T = sum(wi * (A @ S) for wi, A, S in zip(w, fwd, adj))
    q = np.sqrt(p)
    sym = q[:, None] * T / q[None, :]
    sym = 0.5 * (sym + sym.T) - np.outer(q, q)
    vals, vecs = np.linalg.eigh(sym)
    lam = float(np.clip(vals[-1], 0.0, 1.0))
    return lam, vecs[:, -1] / q


def variance_contraction_spectral(kernels: Sequence[MarkovKernel], theta) -> float:
    """Largest eigenvalue of sum_i theta_i T_i T_i* on mean-zero functions."""
    w, p, fwd, adj = _family(kernels, theta)
    if len(p) == 1:
        return 0.0
    return _spectral(w, p, fwd, adj)[0]


# ---------------------------------------------------------------------------
# estimator
# ---------------------------------------------------------------------------


@dataclass
class EstimateConfig:
    restarts: int = 16
    max_iters: int = 400
    step: float = 0.5
    tol: float = 1e-12
    box: float = BOX
    lambda_iters: int = 200
    seed: int = 0


@dataclass
class EstimateReport:
    rho_est: float
    witness_f: np.ndarray
    spectral_factor: float
    iterations: int
    converged: bool
    best_restart: int
    ascent_best: float
    lambda_best: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["witness_f"] = [float(v) for v in self.witness_f]
        return d


def _project(h, p, box):
    h = h - float(p @ h)
    return np.clip(h, -box, box)


def _ascend(h0, w, p, adj, cfg: EstimateConfig):
    h = _project(h0, p, cfg.box)
    try:
        val, grad = _ratio_grad(h, w, p, adj)
    except ValueError:
        return -np.inf, h, 0, True
    step = cfg.step
    it = 0
    converged = False
    for it in range(1, cfg.max_iters + 1):
        gn = np.max(np.abs(grad))
        if gn == 0 or not np.isfinite(gn):
            converged = True
            break
        moved = False
        while step > 1e-10:
            cand = _project(h + step * grad / gn, p, cfg.box)
            try:
                cval, cgrad = _ratio_grad(cand, w, p, adj)
            except ValueError:
                cval = -np.inf
            if np.isfinite(cval) and cval > val:
                gain = cval - val
                h, val, grad = cand, cval, cgrad
                step = min(step * 1.5, 4 * cfg.box)
                moved = True
                break
            step *= 0.5
        if not moved or gain < cfg.tol:
            converged = True
            break
    return val, h, it, converged


def _seeds(n, p, top_vec, cfg: EstimateConfig):
    # one generator per restart so restarts are independent of each other
    gens = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(max(cfg.restarts, 1))]
    seeds = []
    if top_vec is not None:
        v = top_vec / max(np.max(np.abs(top_vec)), 1e-300)
        seeds += [1e-6 * v, 0.5 * v, 2.0 * v, -2.0 * v]
    order = np.argsort(p)
    for x in order[: max(2, cfg.restarts // 4)]:
        e = np.zeros(n)
        e[x] = cfg.box
        seeds.append(e)
    while len(seeds) < cfg.restarts:
        seeds.append(gens[len(seeds)].normal(scale=1.5, size=n))
    return seeds[: max(cfg.restarts, 1)]


def _lambda_iteration(f0, w, p, fwd, adj, metric, cfg: EstimateConfig):
    """f <- normalise(Lambda f) while tracking the entropy ratio of e^f."""
    target = lipschitz_seminorm(f0, metric)
    if target == 0:
        return -np.inf, f0
    f = f0 - float(p @ f0)
    best, best_f = -np.inf, f
    for _ in range(cfg.lambda_iters):
        try:
            r = _ratio_from_log(np.clip(f, -cfg.box, cfg.box), w, p, adj)
        except ValueError:
            break
        if r > best:
            best, best_f = r, f.copy()
        g = _lambda(f, w, fwd, adj)
        g = g - float(p @ g)
        lip = lipschitz_seminorm(g, metric)
        if lip < 1e-14:
            break
        f_new = g * (target / lip)
        if np.max(np.abs(f_new - f)) < 1e-13:
            break
        f = f_new
    return best, best_f


def estimate_rho(kernels: Sequence[MarkovKernel], theta, config: EstimateConfig | None = None,
                 metric: Metric | None = None) -> EstimateReport:
    """Best entropy ratio found by projected ascent and Lambda-iteration."""
    cfg = config or EstimateConfig()
    w, p, fwd, adj = _family(kernels, theta)
    n = len(p)
    if n == 1:
        return EstimateReport(0.0, np.ones(1), 0.0, 0, True, -1, 0.0, 0.0, asdict(cfg))
    spectral, top = _spectral(w, p, fwd, adj)
    rng = np.random.default_rng([cfg.seed, 1])
    best = (-np.inf, None, -1)
    total_iters = 0
    all_converged = True
    for r, h0 in enumerate(_seeds(n, p, top, cfg)):
        val, h, its, conv = _ascend(h0, w, p, adj, cfg)
        total_iters += its
        all_converged &= conv
        if val > best[0]:
            best = (val, h, r)
    ascent_best = best[0]
    lam_best = -np.inf
    for k, f0 in enumerate([top, rng.normal(size=n)]):
        scale = 1.0 if k == 0 else 0.5
        val, f = _lambda_iteration(scale * f0, w, p, fwd, adj, metric, cfg)
        lam_best = max(lam_best, val)
        if val > best[0]:
            best = (val, np.clip(f, -cfg.box, cfg.box), cfg.restarts + k)
    h = best[1] - float(p @ best[1])
    witness = np.exp(h)
    witness /= float(p @ witness)
    rho = entropy_ratio(witness, kernels, theta)
    return EstimateReport(
        rho_est=float(min(max(rho, 0.0), 1.0)),
        witness_f=witness,
        spectral_factor=spectral,
        iterations=total_iters,
        converged=bool(all_converged),
        best_restart=int(best[2]),
        ascent_best=float(ascent_best),
        lambda_best=float(lam_best),
        config=asdict(cfg),
    )


# ---------------------------------------------------------------------------
# Brascamp-Lieb duality
# ---------------------------------------------------------------------------


def bl_duality_check(kernels: Sequence[MarkovKernel], theta, kappa, trials: int = 1000, seed: int = 0,
                     amplitude: float = 2.0, phis: Sequence[np.ndarray] | None = None) -> dict:
    """Exact-summation test of E[prod_i e^{c_i T_i phi_i}] <= prod_i E[e^{phi_i}]^{c_i}.

    c_i = theta_i / (1 - kappa). Each trial draws one family of uniform
    phi_i and one family phi_i = log T_i* g. ``violation`` is the largest
    relative excess of the left side over the right side (0 when it holds).
    """
    kappa = float(kappa)
    if not 0 < kappa < 1:
        if kappa >= 1:
            raise ValueError("kappa must be < 1")
        raise ValueError("kappa must be > 0")
    w, p, fwd, adj = _family(kernels, theta)
    c = w / (1 - kappa)
    logp = np.log(p)
    rng = np.random.default_rng(seed)
    M, n = len(fwd), len(p)

    def gap(PH):
        # PH: (batch, kernels, states)
        lhs = logsumexp(logp + np.einsum("k,kxy,bky->bx", c, fwd, PH), axis=1)
        rhs = logsumexp(logp + PH, axis=2) @ c
        return float(np.max(lhs - rhs))

    worst_log = -np.inf
    if phis is not None:
        worst_log = gap(np.asarray(phis, dtype=float)[None])
    for lo in range(0, trials, 200):
        m = min(200, trials - lo)
        worst_log = max(worst_log, gap(rng.uniform(-amplitude, amplitude, size=(m, M, n))))
        # phi_i = log T_i* g for a random density g: the family that is tight in the dual problem
        G = np.exp(rng.uniform(-amplitude, amplitude, size=(m, n)))
        worst_log = max(worst_log, gap(np.log(np.einsum("kxy,by->bkx", adj, G))))
    return {
        "trials": 2 * trials + (phis is not None),
        "c": [float(v) for v in c],
        "max_log_gap": float(worst_log),
        "violation": float(max(np.expm1(worst_log), 0.0)),
    }
