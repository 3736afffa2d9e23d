import itertools
from fractions import Fraction

import numpy as np
import pytest

from entcurv.certify import certify_kappa, pair_set
from entcurv.measure import adjoint
from entcurv.transport import winf
from entcurv.zoo import (
    BlockFamily,
    build_nsets,
    build_permutations,
    build_product,
    cayley_distance,
    downup_theoretical_kappa,
    mask_of,
    theta_star,
    theta_star_star,
)
from oracles import FROZEN, downup_closed_form, downup_enumerated, transposition_bfs


def test_theta_constants():
    f = BlockFamily.from_pattern(3, "singletons")
    assert theta_star(f) == Fraction(1, 3) and theta_star_star(f) == 0
    f = BlockFamily.from_pattern(3, "all-but-one")
    assert theta_star(f) == Fraction(2, 3) and theta_star_star(f) == Fraction(1, 3)
    f = BlockFamily.from_pattern(4, "pairs")
    assert theta_star(f) == Fraction(1, 2) and theta_star_star(f) == Fraction(1, 6)
    with pytest.raises(ValueError):
        theta_star_star(BlockFamily.from_pattern(1, "singletons"))


def test_family_validation():
    with pytest.raises(ValueError):
        BlockFamily(2, (1, 1), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(ValueError):
        BlockFamily(2, (1, 2), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        BlockFamily.from_pattern(3, "triples")
    f = BlockFamily.from_lists(3, [[0, 2], [1]], theta=[Fraction(1, 4), Fraction(3, 4)])
    assert f.blocks == (mask_of([0, 2]), 2)
    assert BlockFamily.from_pattern(4, "size-3").blocks == BlockFamily.from_pattern(4, "all-but-one").blocks


def test_tss_le_ts_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        f = BlockFamily.random(n, rng)
        assert theta_star_star(f) <= theta_star(f)


def test_product_builder():
    m = build_product([2, 2], BlockFamily.from_pattern(2, "full"))
    assert np.allclose(m.kernels[0].matrix, 0.25)
    m = build_product([2, 3, 2], BlockFamily.from_pattern(3, "pairs"))
    assert m.space.size == 12
    for K in m.kernels:
        assert K.stationary and np.max(np.abs(adjoint(K).matrix - K.matrix)) <= 1e-12
    with pytest.raises(ValueError):
        build_product([10] * 6, BlockFamily.from_pattern(6, "singletons"))
    with pytest.raises(ValueError):
        build_product([2, 2], BlockFamily.from_pattern(3, "singletons"))


def test_nonuniform_product_marginals():
    marg = [[Fraction(1, 3), Fraction(2, 3)], [Fraction(1, 4), Fraction(3, 4)]]
    m = build_product([2, 2], BlockFamily.from_pattern(2, "singletons"), marginals=marg)
    assert m.space.p_exact[0] == Fraction(1, 12)
    r = certify_kappa(m.kernels, m.theta, m.metric, pair_set(4, m.metric))
    assert r.kappa == Fraction(1, 2)


def test_downup_matches_enumeration():
    for N, n, k in [(4, 2, 1), (5, 2, 2), (5, 3, 1), (6, 3, 2)]:
        m = build_nsets(N, n, k)
        states, P = downup_enumerated(N, n, k)
        for i, X in enumerate(m.space.states):
            for j, Y in enumerate(m.space.states):
                a = states.index(frozenset(X))
                b = states.index(frozenset(Y))
                assert m.kernels[0].exact[i, j] == P[a][b] == downup_closed_form(N, n, k, X, Y)
        K = m.kernels[0]
        assert np.array_equal(K.exact, K.exact.T)


def test_downup_examples():
    m = build_nsets(4, 2, 1)
    assert m.kernels[0].exact[0, 0] == FROZEN["downup_4_2_1_stay"]
    full = build_nsets(6, 3, 3)
    assert np.allclose(full.kernels[0].matrix, 1 / 20)
    with pytest.raises(ValueError):
        build_nsets(4, 4, 1)
    with pytest.raises(ValueError):
        build_nsets(4, 2, 3)
    with pytest.raises(ValueError):
        build_nsets(30, 15, 1)


def test_downup_theory():
    assert downup_theoretical_kappa(5, 3, [0, 0, 1]) == 1
    assert downup_theoretical_kappa(4, 2, [1, 0]) == Fraction(2, 3)
    assert downup_theoretical_kappa(100, 10, [1] + [0] * 9) == FROZEN["downup_100_10_1"]


def test_downup_weighted_family():
    th = [Fraction(1, 2), Fraction(1, 2)]
    m = build_nsets(5, 2, theta_k=th)
    r = certify_kappa(m.kernels, m.theta, m.metric, pair_set(m.space.size, m.metric))
    assert r.kappa >= downup_theoretical_kappa(5, 2, th)


def test_cayley_distance():
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = rng.permutation(6)
        i, j = rng.choice(6, 2, replace=False)
        t = s.copy()
        t[i], t[j] = t[j], t[i]
        assert cayley_distance(s, t) == 1
    perms, D = transposition_bfs(4)
    m = build_permutations(4, BlockFamily.from_pattern(4, "pairs"))
    order = [perms.index(s) for s in m.space.states]
    assert np.array_equal(m.metric.dist, D[np.ix_(order, order)])
    m.metric.validate()


def test_permutation_kernels():
    m = build_permutations(3, BlockFamily.from_pattern(3, "all"))
    for K in m.kernels:
        assert K.stationary and np.array_equal(K.exact, K.exact.T)
    with pytest.raises(ValueError):
        build_permutations(8, BlockFamily.from_pattern(8, "pairs"))


def test_permutation_winf_nonexpansive():
    m = build_permutations(4, BlockFamily.from_pattern(4, "all"))
    rng = np.random.default_rng(2)
    pairs = [tuple(rng.choice(24, 2, replace=False)) for _ in range(30)]
    for K in m.kernels:
        for x, y in pairs:
            assert winf(K.exact[x], K.exact[y], m.metric)[0] <= m.metric.dist[x, y]


def test_certify_equals_theory_rational():
    for n, pat in itertools.product((2, 3), ("singletons", "pairs", "all")):
        if pat == "pairs" and n < 2:
            continue
        fam = BlockFamily.from_pattern(n, pat)
        m = build_product([2] * n, fam)
        assert certify_kappa(m.kernels, m.theta, m.metric, pair_set(m.space.size, m.metric)).kappa == theta_star(fam)
