import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entcurv.sphere import SpherePoint, closed_form_W, cone_sample, contraction_check, sphere_dist
from entcurv.transport import Metric, w1, winf
from entcurv.zoo import BlockFamily, theta_star_star


def test_cone_sample_on_sphere():
    for p in (1, 2, 4, 0.5):
        X = cone_sample(5, p, 1000, seed=1)
        assert np.allclose(np.sum(np.abs(X) ** p, axis=1), 1, atol=1e-12)
    X = cone_sample(3, 2, 200_000, seed=0)
    assert np.mean(X[:, 0] ** 2) == pytest.approx(1 / 3, abs=5e-3)


def test_distance_examples():
    e = np.eye(3)
    assert sphere_dist(e[0], e[1], 2) == 2
    assert sphere_dist(e[0], -e[0], 2) == 1
    x = np.array([0.6, 0.8, 0.0])
    assert sphere_dist(x, x, 2) == 0
    with pytest.raises(ValueError):
        SpherePoint(np.array([1.0, 1.0]), 2)


def test_closed_form_examples():
    e = np.eye(3)
    # resampling the block {0,1} from e0 or e1 gives the same law
    assert closed_form_W(e[0], e[1], [0, 1], 2) == 0
    assert closed_form_W(e[0], e[1], [0], 2) == 2
    assert closed_form_W(e[0], e[1], 0b111, 2) == 0
    with pytest.raises(ValueError):
        closed_form_W(e[0], e[1], [], 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 2.0, 4.0]))
def test_closed_form_le_dist(seed, p):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    X = cone_sample(n, p, 20, seed=seed)
    Y = cone_sample(n, p, 20, seed=seed + 1)
    A = [i for i in range(n) if rng.uniform() < 0.5] or [0]
    assert np.all(closed_form_W(X, Y, A, p) <= sphere_dist(X, Y, p) + 1e-12)


def test_closed_form_against_transport_solver():
    # n = 2, block {0}: given x_1 the law of x_0 is uniform on +-(1-|x_1|^p)^(1/p)
    p = 2.0
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = cone_sample(2, p, 1, seed=int(rng.integers(1 << 30)))[0]
        y = cone_sample(2, p, 1, seed=int(rng.integers(1 << 30)))[0]
        sx = [np.array([s * abs(x[0]), x[1]]) for s in (1, -1)]
        sy = [np.array([s * abs(y[0]), y[1]]) for s in (1, -1)]
        pts = sx + sy
        D = np.array([[sphere_dist(a, b, p) for b in pts] for a in pts])
        M = Metric(np.round(D, 12))
        mu = np.array([0.5, 0.5, 0, 0])
        nu = np.array([0, 0, 0.5, 0.5])
        ref = closed_form_W(x, y, [0], p)
        assert w1(mu, nu, M)[0] == pytest.approx(ref, abs=1e-9)
        assert winf(mu, nu, M)[0] == pytest.approx(ref, abs=1e-9)


def test_contraction_check_examples():
    fam = BlockFamily.from_pattern(4, "pairs")
    r = contraction_check(fam, 2.0, pairs=2000)
    assert r["max_ratio"] == pytest.approx(5 / 6, abs=1e-12)
    assert r["bound_ok"] and r["canonical_attains"]
    assert r["theta_star_star"] == pytest.approx(1 / 6)
    with pytest.raises(ValueError):
        contraction_check(fam, 2.0, n=3)


def test_contraction_random_families():
    rng = np.random.default_rng(0)
    for n, p in itertools.product((3, 4), (1.0, 4.0)):
        fam = BlockFamily.random(n, rng)
        r = contraction_check(fam, p, pairs=2000, seed=1)
        assert r["bound_ok"] and r["canonical_attains"]
        assert r["theta_star_star"] <= r["theta_star"] + 1e-15
        assert float(theta_star_star(fam)) == r["theta_star_star"]
