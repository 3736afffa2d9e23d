"""Helpers for the optional exact-rational representation."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np


def is_rational_like(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def all_rational(values) -> bool:
    arr = np.asarray(values, dtype=object).ravel()
    return arr.size > 0 and all(is_rational_like(v) for v in arr)


def as_fraction(x) -> Fraction:
    """Parse a number or a string such as ``"7/10"`` into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x)).limit_denominator(10**9)
    return Fraction(x)


def fraction_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = as_fraction(v)
    return out


def to_float(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    return np.vectorize(float, otypes=[float])(arr) if arr.size else np.zeros(arr.shape)


def common_denominator(values) -> int:
    d = 1
    for v in np.asarray(values, dtype=object).ravel():
        d = math.lcm(d, Fraction(v).denominator)
    return d


def scale_to_int(values, denom: int) -> np.ndarray:
    """Return ``values * denom`` as int64; raises if not integral."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=np.int64)
    for idx, v in np.ndenumerate(arr):
        q = Fraction(v) * denom
        if q.denominator != 1:
            raise ValueError(f"{v} is not on the grid 1/{denom}")
        out[idx] = q.numerator
    return out
