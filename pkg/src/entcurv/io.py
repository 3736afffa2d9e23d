"""JSON round-trips for spaces, kernels and metrics.

Numbers are written as decimals, or as ``"a/b"`` strings for exact objects.
Loading accepts either; all-string (or all-integer) input restores exact mode.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._exact import as_fraction
from .measure import FiniteSpace, MarkovKernel, Metric


def _num(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return float(v)


def _parse(values):
    arr = np.asarray(values, dtype=object)
    if any(isinstance(v, str) for v in arr.ravel()):
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = as_fraction(v)
        return out
    return arr


def space_to_dict(space: FiniteSpace) -> dict:
    probs = space.p_exact if space.is_exact else space.p
    return {"states": [str(s) for s in space.states], "P": [_num(v) for v in probs]}


def space_from_dict(d: dict) -> FiniteSpace:
    try:
        states, probs = d["states"], d["P"]
    except KeyError as exc:
        raise ValueError(f"space is missing field {exc.args[0]!r}") from None
    return FiniteSpace.from_probs(states, _parse(probs))


def kernel_to_dict(K: MarkovKernel) -> dict:
    rows = K.exact if K.is_exact else K.matrix
    return {"name": K.name, "rows": [[_num(v) for v in r] for r in rows]}


def kernel_from_dict(d: dict, space: FiniteSpace) -> MarkovKernel:
    if "rows" not in d:
        raise ValueError("kernel is missing field 'rows'")
    return MarkovKernel.from_matrix(space, _parse(d["rows"]), name=d.get("name", ""))


def metric_to_dict(metric: Metric) -> dict:
    d = metric.exact if metric.exact is not None else metric.dist
    out = {"dist": [[_num(v) for v in r] for r in d]}
    if metric.edges is not None:
        out["edges"] = metric.edges.tolist()
    return out


def metric_from_dict(d: dict, n: int | None = None) -> Metric:
    """Dense ``dist`` matrix, or ``edges`` (with optional ``weights``) plus ``n``."""
    if "dist" in d:
        return Metric.from_matrix(_parse(d["dist"]), edges=d.get("edges"))
    if "edges" in d:
        size = d.get("n", n)
        if size is None:
            raise ValueError("edge-list metric needs 'n'")
        return Metric.from_edges(int(size), d["edges"], d.get("weights"))
    raise ValueError("metric needs 'dist' or 'edges'")


def dump_model(path, space: FiniteSpace, kernels, theta, metric: Metric) -> None:
    doc = {
        "space": space_to_dict(space),
        "kernels": [kernel_to_dict(K) for K in kernels],
        "theta": [_num(t) if isinstance(t, Fraction) else float(t) for t in theta],
        "metric": metric_to_dict(metric),
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path_or_dict):
    """Returns (space, kernels, theta, metric)."""
    doc = path_or_dict if isinstance(path_or_dict, dict) else json.loads(Path(path_or_dict).read_text())
    for key in ("space", "kernels", "metric"):
        if key not in doc:
            raise ValueError(f"model file is missing field {key!r}")
    space = space_from_dict(doc["space"])
    kernels = [kernel_from_dict(k, space) for k in doc["kernels"]]
    theta = doc.get("theta")
    theta = [Fraction(1, len(kernels))] * len(kernels) if theta is None else list(_parse(theta))
    metric = metric_from_dict(doc["metric"], space.size)
    return space, kernels, theta, metric
