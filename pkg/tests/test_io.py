import json
from fractions import Fraction

import numpy as np
import pytest

from entcurv.certify import certify_kappa, pair_set
from entcurv.io import dump_model, load_model, metric_from_dict, metric_to_dict
from entcurv.zoo import BlockFamily, build_nsets, build_product


def test_exact_round_trip(tmp_path):
    m = build_nsets(5, 2, 1)
    f = tmp_path / "m.json"
    dump_model(f, m.space, m.kernels, m.theta, m.metric)
    space, kernels, theta, metric = load_model(f)
    assert space.is_exact and list(space.p_exact) == list(m.space.p_exact)
    assert np.array_equal(kernels[0].exact, m.kernels[0].exact)
    assert theta == [Fraction(1)]
    assert np.array_equal(metric.dist, m.metric.dist)
    assert certify_kappa(kernels, theta, metric, pair_set(10, metric)).kappa == \
        certify_kappa(m.kernels, m.theta, m.metric, pair_set(10, m.metric)).kappa


def test_float_round_trip(tmp_path):
    m = build_product([2, 3], BlockFamily.from_pattern(2, "singletons"), exact=False)
    f = tmp_path / "m.json"
    dump_model(f, m.space, m.kernels, m.theta, m.metric)
    space, kernels, theta, metric = load_model(f)
    assert not space.is_exact
    assert np.allclose(kernels[1].matrix, m.kernels[1].matrix, atol=0)
    assert theta == [0.5, 0.5]


def test_edge_metric():
    d = metric_from_dict({"n": 3, "edges": [[0, 1], [1, 2]]})
    assert d.dist[0, 2] == 2
    assert metric_from_dict(metric_to_dict(d)).dist.tolist() == d.dist.tolist()
    with pytest.raises(ValueError):
        metric_from_dict({"edges": [[0, 1]]})
    with pytest.raises(ValueError):
        metric_from_dict({})


def test_missing_fields():
    with pytest.raises(ValueError):
        load_model({"space": {"states": [0], "P": [1]}})
    doc = {"space": {"states": [0, 1], "P": ["1/2", "1/2"]},
           "kernels": [{"rows": [["1/2", "1/2"], ["1/2", "1/2"]]}],
           "metric": {"dist": [[0, 1], [1, 0]]}}
    space, kernels, theta, metric = load_model(json.loads(json.dumps(doc)))
    assert theta == [Fraction(1)] and kernels[0].exact[0, 1] == Fraction(1, 2)
