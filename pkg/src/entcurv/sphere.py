"""Block resampling on the l_p sphere under the cone measure.

Points are stored as (count, n) arrays. The metric is

    dist(x, y) = sum_i ||x_i|^p - |y_i|^p| + #{i : x_i y_i < 0}

and resampling a block A has a closed-form W_inf (equal to W_1) between
the laws started at x and y, so no transport solver is needed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .zoo import BlockFamily, members, theta_star, theta_star_star

NORM_TOL = 1e-10


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray
    p: float

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if self.p <= 0:
            raise ValueError("p must be positive")
        if abs(float(np.sum(np.abs(c) ** self.p)) - 1) > NORM_TOL:
            raise ValueError("point is not on the unit l_p sphere")
        object.__setattr__(self, "coords", c)


def cone_sample(n: int, p: float, count: int, seed: int = 0) -> np.ndarray:
    """Cone-measure samples X = G / ||G||_p with G_i of density prop. to exp(-|t|^p)."""
    if p <= 0:
        raise ValueError("p must be positive")
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    W = rng.gamma(1.0 / p, 1.0, size=(count, n))
    sign = rng.choice([-1.0, 1.0], size=(count, n))
    # |G_i|^p = W_i, so ||G||_p^p = sum W_i and |X_i|^p = W_i / sum W
    return sign * (W / W.sum(axis=1, keepdims=True)) ** (1.0 / p)


def _coords(x):
    return x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)


def sphere_dist(x, y, p: float) -> float | np.ndarray:
    """Works on single points or row-aligned batches."""
    x, y = _coords(x), _coords(y)
    if x.shape != y.shape:
        raise ValueError("points must share a dimension")
    mod = np.abs(np.abs(x) ** p - np.abs(y) ** p).sum(axis=-1)
    flips = (x * y < 0).sum(axis=-1)
    return mod + flips


def closed_form_W(x, y, A, p: float) -> float | np.ndarray:
    """W_inf (= W_1) between the block-A resampling laws from x and from y."""
    x, y = _coords(x), _coords(y)
    n = x.shape[-1]
    idx = members(A, n) if isinstance(A, (int, np.integer)) else sorted(set(int(i) for i in A))
    if not idx:
        raise ValueError("block must be nonempty")
    inA = np.zeros(n, dtype=bool)
    inA[idx] = True
    dx = np.abs(x) ** p - np.abs(y) ** p
    out = np.abs(dx[..., ~inA]).sum(axis=-1) + (x[..., ~inA] * y[..., ~inA] < 0).sum(axis=-1)
    return out + np.abs(dx[..., inA].sum(axis=-1))


def _structured_pairs(n: int, p: float, count: int, rng) -> tuple[np.ndarray, np.ndarray]:
    X = cone_sample(n, p, 2 * count, seed=int(rng.integers(2**63)))
    # same-sign pairs: moduli from one sample, signs from the other
    same_x = X[:count]
    same_y = np.abs(X[count:]) * np.sign(same_x)
    # single-coordinate sign flips
    flip_y = X[:count].copy()
    j = rng.integers(0, n, size=count)
    flip_y[np.arange(count), j] *= -1
    return np.concatenate([same_x, X[:count]]), np.concatenate([same_y, flip_y])


def ratio_sweep(family: BlockFamily, p: float, pairs: int = 1000, seed: int = 0):
    """Ratios sum_A theta_A W_A / dist for random, structured and canonical pairs.

    Returns (X, Y, kinds, ratios); pairs at distance 0 get ratio -inf.
    """
    n = family.n
    rng = np.random.default_rng(seed)
    R = cone_sample(n, p, 2 * pairs, seed=int(rng.integers(2**63)))
    sx, sy = _structured_pairs(n, p, pairs, rng)
    eye = np.eye(n)
    ci, cj = zip(*itertools.combinations(range(n), 2))
    X = np.concatenate([R[:pairs], sx, eye[list(ci)]])
    Y = np.concatenate([R[pairs:], sy, eye[list(cj)]])
    kinds = ["random"] * pairs + ["same-sign"] * pairs + ["sign-flip"] * pairs + ["canonical"] * len(ci)
    d = sphere_dist(X, Y, p)
    keep = d > 0
    num = np.zeros(len(X))
    for mask, th in zip(family.blocks, family.theta):
        if th and mask:
            num += float(th) * closed_form_W(X, Y, mask, p)
    ratio = np.where(keep, num / np.where(keep, d, 1), -np.inf)
    return X, Y, kinds, ratio


def contraction_check(family: BlockFamily, p: float, n: int | None = None, pairs: int = 1000,
                      seed: int = 0) -> dict:
    """Largest sum_A theta_A W_A(x,y) / dist(x,y) over random and structured pairs."""
    n = family.n if n is None else n
    if n != family.n:
        raise ValueError("family size does not match n")
    X, Y, kinds, ratio = ratio_sweep(family, p, pairs, seed)
    k = int(np.argmax(ratio))
    tss = float(theta_star_star(family))
    labels = np.asarray(kinds)
    canon = ratio[labels == "canonical"]
    by_kind = {}
    for name in ("random", "same-sign", "sign-flip", "canonical"):
        sel = ratio[(labels == name) & np.isfinite(ratio)]
        by_kind[name] = float(sel.max()) if sel.size else None
    return {
        "n": n,
        "p": p,
        "pairs_evaluated": int(np.isfinite(ratio).sum()),
        "max_ratio": float(ratio[k]),
        "argmax_kind": kinds[k],
        "argmax_pair": [X[k].tolist(), Y[k].tolist()],
        "max_ratio_by_kind": by_kind,
        "theta_star": float(theta_star(family)),
        "theta_star_star": tss,
        "bound": 1 - tss,
        "bound_ok": bool(ratio[k] <= 1 - tss + 1e-9),
        "canonical_attains": bool(abs(float(canon.max()) - (1 - tss)) <= 1e-9),
    }
