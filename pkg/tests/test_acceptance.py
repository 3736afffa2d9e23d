"""One PASS/FAIL line per acceptance criterion.

Run with pytest (lines appear in the terminal summary) or directly as a
script: ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import functools
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import conftest  # noqa: E402
from oracles import w1_linprog, w1_simplex, winf_hall  # noqa: E402

from entcurv.certify import certify_kappa, pair_set  # noqa: E402
from entcurv.contraction import (  # noqa: E402
    bl_duality_check,
    estimate_rho,
    lambda_contraction_check,
    variance_contraction_spectral,
)
from entcurv.gff import (  # noqa: E402
    block_invariants,
    build_gff,
    check_distorted_curvature,
    glauber_constants,
    lambda_upper_linear,
    lattice_delta,
    random_gff,
    sigma_quantities,
)
from entcurv.langevin import (  # noqa: E402
    coupled_paths,
    decay_rate_fit,
    entropy_decay_estimate,
    quadratic,
    quadratic_logcosh,
)
from entcurv.measure import Metric  # noqa: E402
from entcurv.sphere import contraction_check  # noqa: E402
from entcurv.transport import w1, winf  # noqa: E402
from entcurv.zoo import (  # noqa: E402
    BlockFamily,
    build_nsets,
    build_permutations,
    build_product,
    downup_theoretical_kappa,
    theta_star,
    theta_star_star,
)


def record(number: int, name: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {name}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def exhaustive_kappa(model):
    return certify_kappa(model.kernels, model.theta, model.metric,
                         pair_set(model.space.size, model.metric, "exhaustive")).kappa


# ---------------------------------------------------------------------------
# certified zoo instances (shared by criteria 1-6)
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def product_runs():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    runs = []
    for n in (2, 3, 4):
        for _ in range(50):
            fam = BlockFamily.random(n, rng)
            m = build_product([2] * n, fam)
            runs.append((m, exhaustive_kappa(m), theta_star(fam)))
    return runs, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def permutation_runs():
    t0 = time.perf_counter()
    m = build_permutations(4, BlockFamily.from_pattern(4, "pairs"))
    pair_kappa = exhaustive_kappa(m)
    runs = [(m, pair_kappa, theta_star_star(m.family))]
    rng = np.random.default_rng(7)
    for _ in range(20):
        fam = BlockFamily.random(4, rng)
        pm = build_permutations(4, fam)
        runs.append((pm, exhaustive_kappa(pm), theta_star_star(fam)))
    return runs, pair_kappa, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def downup_runs():
    t0 = time.perf_counter()
    runs = []
    for N in range(2, 9):
        for n in range(1, N):
            for k in range(1, n + 1):
                m = build_nsets(N, n, k)
                w = [0] * n
                w[k - 1] = 1
                runs.append((m, exhaustive_kappa(m), downup_theoretical_kappa(N, n, w), (N, n, k)))
    return runs, time.perf_counter() - t0


def zoo_instances():
    out = [(m, k) for m, k, _ in product_runs()[0]]
    out += [(m, k) for m, k, _ in permutation_runs()[0]]
    out += [(m, k) for m, k, _, _ in downup_runs()[0]]
    return out


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def test_c01_product_exactness():
    runs, secs = product_runs()
    bad = [(m.family, k, t) for m, k, t in runs if k != t]
    ok = not bad and secs < 30
    assert record(1, "product kappa equals theta_star exactly",
                  ok, f"{len(runs)} families, {len(bad)} mismatches, {secs:.1f}s (limit 30s)")


def test_c02_permutations():
    runs, pair_kappa, secs = permutation_runs()
    worst = min(float(k) - float(t) for _, k, t in runs[1:])
    ok = abs(float(pair_kappa) - 1 / 6) <= 1e-9 and worst >= -1e-9 and secs < 300
    assert record(2, "S4 transposition blocks", ok,
                  f"pair-uniform kappa={pair_kappa}, min(kappa-theta_star_star) over 20 families={worst:.3g}, "
                  f"{secs:.1f}s (limit 300s)")


def test_c03_downup():
    runs, secs = downup_runs()
    bad = []
    for m, kappa, ref, (N, n, k) in runs:
        if float(kappa) < float(ref) - 1e-9:
            bad.append((N, n, k, "below formula"))
        if k < n and not kappa > Fraction(k, n):
            bad.append((N, n, k, "not above k/n"))
    ok = not bad and secs < 120
    assert record(3, "down-up walks N<=8", ok, f"{len(runs)} triples, failures={bad[:3]}, {secs:.1f}s (limit 120s)")


def test_c04_sandwich():
    worst_rho, worst_spec = -np.inf, -np.inf
    t0 = time.perf_counter()
    inst = zoo_instances()
    for m, kappa in inst:
        est = estimate_rho(m.kernels, m.theta, metric=m.metric)
        lam = variance_contraction_spectral(m.kernels, m.theta)
        worst_rho = max(worst_rho, float(kappa) + est.rho_est - 1)
        worst_spec = max(worst_spec, float(kappa) + lam - 1)
    ok = worst_rho <= 1e-6 and worst_spec <= 1e-9
    assert record(4, "sandwich kappa+rho<=1, kappa+spectral<=1", ok,
                  f"{len(inst)} instances, max(kappa+rho-1)={worst_rho:.3g}, "
                  f"max(kappa+spectral-1)={worst_spec:.3g}, {time.perf_counter() - t0:.1f}s")


def test_c05_lambda_contraction():
    worst = -np.inf
    inst = zoo_instances()
    for i, (m, kappa) in enumerate(inst):
        rep = lambda_contraction_check(m.kernels, m.theta, m.metric, kappa, trials=1000, seed=i)
        worst = max(worst, rep["max_excess"])
    assert record(5, "Lip(Lambda f) <= (1-kappa) Lip(f)", worst <= 1e-9,
                  f"{len(inst)} instances x 1000 f, max excess={worst:.3g}")


def test_c06_duality():
    worst, used, skipped = 0.0, 0, 0
    for i, (m, kappa) in enumerate(zoo_instances()):
        if not 0 < kappa < 1:
            skipped += 1
            continue
        rep = bl_duality_check(m.kernels, m.theta, float(kappa), trials=1000, seed=i)
        worst = max(worst, rep["violation"])
        used += 1
    assert record(6, "Brascamp-Lieb dual form", worst <= 1e-10,
                  f"{used} instances x 1000 phi draws ({skipped} with kappa=1 skipped), max violation={worst:.3g}")


def test_c07_gff_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst_res = 0.0
    worst_curv = -np.inf
    blocks = 0
    for i in range(20):
        inst = random_gff(int(rng.integers(2, 9)), rng)
        for mask in range(1, 2**inst.n):
            r = block_invariants(inst, mask)
            worst_res = max(worst_res, r["idempotent"], r["delta_m_symmetric"], -r["min_id_minus_mt"],
                            r["m_psi_shortfall"])
            blocks += 1
        fam = BlockFamily.from_pattern(inst.n, "all", exact=False)
        rep = check_distorted_curvature(inst, fam, z_samples=10_000, seed=i)
        worst_curv = max(worst_curv, rep["max_violation"])
    secs = time.perf_counter() - t0
    ok = worst_res <= 1e-8 and worst_curv <= 1e-9 and secs < 300
    assert record(7, "GFF conditional-matrix identities", ok,
                  f"20 instances, {blocks} blocks, max residual={worst_res:.3g}, "
                  f"curvature violation={worst_curv:.3g} over 1e4 z, {secs:.1f}s (limit 300s)")


def test_c08_gff_constants():
    rng = np.random.default_rng(12)
    insts = [build_gff([[0, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0]])]
    insts += [random_gff(int(rng.integers(1, 9)), rng) for _ in range(20)]
    gl = 0.0
    for inst in insts:
        c = glauber_constants(inst)
        target = inst.delta_min / inst.n
        gl = max(gl, abs(c["kappa"] - target), abs(c["lambda"] - target), abs(lambda_upper_linear(inst) - target))
    lat = 0.0
    for dims in ([3], [5], [4, 4], [3, 5], [3, 3, 3], [2, 3, 4], [8, 8]):
        r = lattice_delta(dims)
        lat = max(lat, abs(r["delta"] - r["separable_sum"]))
    sig_ok = True
    for _ in range(20):
        n = int(rng.integers(2, 7))
        fam = BlockFamily.random(n, rng, exact=False)
        s = sigma_quantities(np.eye(n), fam)
        ts = float(theta_star(fam))
        sig_ok &= abs(s["sigma"] - ts) <= 1e-9 and 1 - np.sqrt(1 - ts) <= ts + 1e-12
        sig_ok &= s["kappa_low"] <= s["kappa_high"] + 1e-12
    ok = gl <= 1e-9 and lat <= 1e-10 and sig_ok
    assert record(8, "GFF constants", ok,
                  f"glauber/linear vs delta/n max err={gl:.3g}, lattice eig vs closed form={lat:.3g}, "
                  f"identity-covariance sigma sandwich ok={sig_ok}")


def test_c09_sphere():
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    worst, attain, runs = -np.inf, True, 0
    for p in (1.0, 2.0, 4.0):
        for n in (3, 4, 6):
            for j in range(10):
                fam = BlockFamily.random(n, rng)
                rep = contraction_check(fam, p, n, pairs=100_000, seed=int(rng.integers(1 << 31)))
                worst = max(worst, rep["max_ratio"] - rep["bound"])
                attain &= rep["canonical_attains"]
                runs += 1
    secs = time.perf_counter() - t0
    ok = worst <= 1e-9 and attain and secs < 180
    assert record(9, "sphere coupling ratio <= 1-theta_star_star", ok,
                  f"{runs} runs x 1e5 pairs, max(ratio-bound)={worst:.3g}, canonical attains={attain}, "
                  f"{secs:.1f}s (limit 180s)")


def _grid_metric(rng, n):
    while True:
        pts = rng.integers(0, 6, size=(n, 2))
        if len({tuple(p) for p in pts}) == n:
            return np.abs(pts[:, None, :] - pts[None, :, :]).sum(-1)


def _rational(rng, n):
    w = rng.integers(0, 5, size=n)
    if w.sum() == 0:
        w[rng.integers(n)] = 1
    return [Fraction(int(x), int(w.sum())) for x in w]


def test_c10_transport():
    rng = np.random.default_rng(14)
    exact_bad, float_err = 0, 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        D = _grid_metric(rng, n)
        m = Metric.from_matrix(D.tolist())
        mu, nu = _rational(rng, n), _rational(rng, n)
        exact_bad += w1(mu, nu, m)[0] != w1_simplex(mu, nu, D.tolist())
        exact_bad += winf(mu, nu, m)[0] != winf_hall(mu, nu, D.tolist())
        Df = D * rng.uniform(0.5, 2.0)
        mf = Metric.from_matrix(Df)
        a, b = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        float_err = max(float_err, abs(w1(a, b, mf)[0] - w1_linprog(a, b, Df)),
                        abs(winf(a, b, mf)[0] - winf_hall(a, b, Df, tol=1e-12)))
    ok = exact_bad == 0 and float_err <= 1e-10
    assert record(10, "W1/W_inf vs brute-force oracles", ok,
                  f"200 instances, exact mismatches={exact_bad}, float max error={float_err:.3g}")


def test_c11_langevin():
    ou = coupled_paths(quadratic(1.0), [1.0, 2.0], [-1.0, 0.0], 1e-3, 5.0, seed=0)
    r_ou = decay_rate_fit(ou.t, ou.distance)
    lc = coupled_paths(quadratic_logcosh(1.0, 1.0), [1.0, 2.0], [-1.0, 0.0], 1e-3, 5.0, seed=0)
    r_lc = decay_rate_fit(lc.t, lc.distance)
    grid = np.linspace(0.0, 2.0, 9)
    curve = entropy_decay_estimate(quadratic(1.0), lambda g, k: g.normal(2.0, 1.0, k), grid,
                                   particles=100_000, bins=200, seed=0)
    env = float(np.max(curve.entropy / (1.2 * curve.envelope)))
    ok = 0.99 <= r_ou <= 1.01 and r_lc >= 1.0 - 0.05 and env <= 1.0
    assert record(11, "Langevin coupling and entropy envelope", ok,
                  f"OU rate={r_ou:.4f}, logcosh rate={r_lc:.4f} (rho=1), "
                  f"max Ent/(1.2 envelope)={env:.3f}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
