from fractions import Fraction

import numpy as np
import pytest

from entcurv.certify import certify_kappa, lipschitz_constant, pair_set
from entcurv.contraction import variance_contraction_spectral
from entcurv.measure import ContractViolation, FiniteSpace, MarkovKernel, Metric, identity_kernel, mixing_kernel
from entcurv.zoo import BlockFamily, build_nsets, build_permutations, build_product


def cube(n, pattern="singletons"):
    return build_product([2] * n, BlockFamily.from_pattern(n, pattern))


def test_pair_set_sizes():
    m = Metric.from_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert len(pair_set(3, m, "exhaustive")) == 3
    q3 = cube(3)
    assert len(pair_set(8, q3.metric, "generator-edges")) == 12
    s4 = build_permutations(4, BlockFamily.from_pattern(4, "pairs"))
    assert len(pair_set(24, s4.metric, "generator-edges")) == 72
    with pytest.raises(ValueError):
        pair_set(3, m, "generator-edges")
    with pytest.raises(ValueError):
        pair_set(3, m, "sideways")


def test_lipschitz_examples():
    q = cube(3)
    pairs = pair_set(8, q.metric)
    for K in q.kernels:
        assert lipschitz_constant(K, q.metric, pairs) == 1
    assert lipschitz_constant(identity_kernel(q.space), q.metric, pairs) == 1
    assert lipschitz_constant(mixing_kernel(q.space), q.metric, pairs) == 0
    with pytest.raises(ValueError):
        lipschitz_constant(identity_kernel(q.space), q.metric, np.zeros((0, 2), dtype=int))


def test_certify_examples():
    q = cube(3)
    r = certify_kappa(q.kernels, q.theta, q.metric, pair_set(8, q.metric))
    assert r.kappa == Fraction(1, 3) and r.ell == [1, 1, 1] and r.exact
    s4 = build_permutations(4, BlockFamily.from_pattern(4, "pairs"))
    r = certify_kappa(s4.kernels, s4.theta, s4.metric, pair_set(24, s4.metric))
    assert r.kappa == Fraction(1, 6)
    d = build_nsets(4, 2, 1)
    r = certify_kappa(d.kernels, d.theta, d.metric, pair_set(6, d.metric))
    assert r.kappa == Fraction(2, 3)


def test_report_invariants_and_json():
    q = cube(3, "pairs")
    r = certify_kappa(q.kernels, q.theta, q.metric, pair_set(8, q.metric))
    assert 0 <= r.kappa <= 1 and all(v >= 0 for v in r.ell)
    # the worst pair attains the binding ratio
    from entcurv.transport import w1

    x, y = (q.space.index(s) for s in r.worst_pair)
    total = sum(t * ell * w1(K.exact[x], K.exact[y], q.metric)[0]
                for t, ell, K in zip(q.theta, r.ell, q.kernels))
    assert total == (1 - r.kappa) * Fraction(int(q.metric.dist[x, y]))
    d = r.to_dict()
    assert set(d) >= {"ell", "kappa", "worst_pair", "pair_mode", "timing"}
    assert "timing" not in r.to_dict(include_timing=False)


def test_errors():
    q = cube(2)
    with pytest.raises(ValueError):
        certify_kappa([], [], q.metric, pair_set(4, q.metric))
    bad_space = FiniteSpace.from_probs(range(2), [0.3, 0.7])
    K = MarkovKernel.from_matrix(bad_space, [[0, 1], [1, 0]])
    with pytest.raises(ContractViolation):
        certify_kappa([K], [1], Metric.from_matrix([[0, 1], [1, 0]]), pair_set(2, Metric.from_matrix([[0, 1], [1, 0]])))
    with pytest.raises(ValueError):
        certify_kappa(q.kernels, q.theta, q.metric, pair_set(4, q.metric).__class__(np.zeros((0, 2), int), "exhaustive"))


def test_ell_override():
    q = cube(2)
    pairs = pair_set(4, q.metric)
    r = certify_kappa(q.kernels, q.theta, q.metric, pairs, ell_override=[2, 2])
    assert r.ell == [2, 2] and r.kappa == 0
    with pytest.raises(ContractViolation):
        certify_kappa(q.kernels, q.theta, q.metric, pairs, ell_override=[Fraction(1, 2), 1])


def test_exhaustive_matches_generator_mode():
    rng = np.random.default_rng(4)
    models = [cube(n, pat) for n in (2, 3, 4) for pat in ("singletons", "pairs", "all")]
    models += [build_permutations(3, BlockFamily.random(3, rng)), build_permutations(4, BlockFamily.from_pattern(4, "pairs"))]
    models += [build_product([2] * 3, BlockFamily.random(3, rng)) for _ in range(5)]
    for m in models:
        a = certify_kappa(m.kernels, m.theta, m.metric, pair_set(m.space.size, m.metric, "exhaustive"))
        b = certify_kappa(m.kernels, m.theta, m.metric, pair_set(m.space.size, m.metric, "generator-edges"))
        assert abs(float(a.kappa) - float(b.kappa)) <= 1e-9
        assert b.spot_check["ok"]


def test_monotone_in_pair_set():
    m = cube(3, "pairs")
    full = pair_set(8, m.metric, "exhaustive")
    sub = full.__class__(full.pairs[:7], "exhaustive")
    a = certify_kappa(m.kernels, m.theta, m.metric, full)
    b = certify_kappa(m.kernels, m.theta, m.metric, sub)
    assert a.kappa <= b.kappa and all(x >= y for x, y in zip(a.ell, b.ell))


def test_float_mode_agrees():
    m = build_product([2, 3], BlockFamily.from_pattern(2, "singletons"), exact=False)
    r = certify_kappa(m.kernels, m.theta, m.metric, pair_set(6, m.metric))
    assert not r.exact and r.kappa == pytest.approx(0.5, abs=1e-12)


def test_spectral_never_exceeds_one_minus_kappa():
    rng = np.random.default_rng(9)
    for _ in range(10):
        m = build_product([2] * 3, BlockFamily.random(3, rng))
        r = certify_kappa(m.kernels, m.theta, m.metric, pair_set(8, m.metric))
        assert variance_contraction_spectral(m.kernels, m.theta) <= 1 - float(r.kappa) + 1e-9
