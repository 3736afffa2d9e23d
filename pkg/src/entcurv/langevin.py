"""Langevin dynamics dX = -grad V(X) dt + sqrt(2) dB under synchronous coupling.

Two copies driven by the same Brownian increments contract at rate rho when
V is rho-convex. The simulator uses Euler-Maruyama; tolerances in the
checks budget for its O(dt) bias.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

DIVERGENCE = 1e6


@dataclass(frozen=True)
class Potential:
    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    rho: float
    params: dict


def quadratic(rho: float = 1.0) -> Potential:
    """V(x) = rho |x|^2 / 2; works on (..., n) arrays."""
    return Potential(
        "quadratic",
        lambda x: 0.5 * rho * np.sum(np.asarray(x) ** 2, axis=-1),
        lambda x: rho * np.asarray(x, dtype=float),
        rho,
        {"rho": rho},
    )


def quadratic_logcosh(rho: float = 1.0, slope: float = 1.0) -> Potential:
    """V(x) = rho |x|^2 / 2 + log cosh(slope * x_1), still rho-convex."""

    def value(x):
        x = np.asarray(x, dtype=float)
        s = slope * x[..., 0]
        # log cosh without overflow
        lc = np.abs(s) + np.log1p(np.exp(-2 * np.abs(s))) - np.log(2)
        return 0.5 * rho * np.sum(x**2, axis=-1) + lc

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = rho * x
        g[..., 0] += slope * np.tanh(slope * x[..., 0])
        return g

    return Potential("quadratic-logcosh", value, grad, rho, {"rho": rho, "slope": slope})


POTENTIALS = {"quadratic": quadratic, "quadratic-logcosh": quadratic_logcosh}


def make_potential(name: str, **params) -> Potential:
    try:
        return POTENTIALS[name](**params)
    except KeyError:
        raise ValueError(f"unknown potential {name!r}; choose from {sorted(POTENTIALS)}") from None


def verify_potential(V: Potential, dim: int, probes: int = 10_000, seed: int = 0, scale: float = 3.0) -> dict:
    """Monotonicity of grad V at modulus rho, and gradient vs central differences."""
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=scale, size=(probes, dim))
    y = rng.normal(scale=scale, size=(probes, dim))
    gap = np.sum((V.gradient(x) - V.gradient(y)) * (x - y), axis=1) - V.rho * np.sum((x - y) ** 2, axis=1)
    h = 1e-5
    pts = x[: min(probes, 200)]
    fd = np.empty_like(pts)
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h
        fd[:, k] = (V.value(pts + e) - V.value(pts - e)) / (2 * h)
    g = V.gradient(pts)
    rel = np.max(np.abs(fd - g) / np.maximum(np.abs(g), 1.0))
    return {"min_monotonicity_gap": float(gap.min()), "max_gradient_rel_error": float(rel),
            "monotone_ok": bool(gap.min() >= -1e-8), "gradient_ok": bool(rel <= 1e-5)}


@dataclass
class CoupledPaths:
    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    distance: np.ndarray
    diverged_at: int | None = None

    @property
    def max_step_increase(self) -> float:
        return float(np.max(np.diff(self.distance), initial=0.0))


def coupled_paths(V: Potential, x0, y0, dt: float, T_end: float, seed: int = 0) -> CoupledPaths:
    """Euler-Maruyama for two copies driven by the same Gaussian increments."""
    if dt > 1e-2:
        raise ValueError("dt must be <= 1e-2")
    if V.rho * dt > 0.1:
        raise ValueError("rho * dt must be <= 0.1")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    if x.shape != y.shape:
        raise ValueError("starting points must share a dimension")
    steps = int(round(T_end / dt))
    rng = np.random.default_rng(seed)
    X = np.empty((steps + 1, x.size))
    Y = np.empty((steps + 1, x.size))
    X[0], Y[0] = x, y
    sq = np.sqrt(2 * dt)
    diverged = None
    for k in range(1, steps + 1):
        noise = sq * rng.standard_normal(x.size)
        x = x - V.gradient(x) * dt + noise
        y = y - V.gradient(y) * dt + noise
        X[k], Y[k] = x, y
        if np.linalg.norm(x - y) > DIVERGENCE or not np.all(np.isfinite(x - y)):
            diverged = k
            X, Y = X[: k + 1], Y[: k + 1]
            break
    dist = np.linalg.norm(X - Y, axis=1)
    return CoupledPaths(np.arange(len(dist)) * dt, X, Y, dist, diverged)


def decay_rate_fit(t, distance, floor: float = 1e-250) -> float:
    """Least-squares exponential rate of a positive distance curve.

    The fit stops at the first point at or below ``floor``.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(distance, dtype=float)
    bad = np.flatnonzero(~(d > floor))
    end = bad[0] if len(bad) else len(d)
    if end < 2:
        raise ValueError("need at least two positive distances to fit a rate")
    slope = np.polyfit(t[:end], np.log(d[:end]), 1)[0]
    return float(-slope)


@dataclass
class EntropyCurve:
    t: np.ndarray
    entropy: np.ndarray
    envelope: np.ndarray
    bins: int
    edges: np.ndarray


def _stationary_masses(V: Potential, edges: np.ndarray) -> np.ndarray:
    """Masses of exp(-V) / Z on (-inf, e0], the bins, and (e_last, inf)."""
    dens = lambda s: float(np.exp(-V.value(np.array([[s]]))[0]))  # noqa: E731
    pts = np.concatenate([[-np.inf], edges, [np.inf]])
    parts = np.array([integrate.quad(dens, a, b, limit=200)[0] for a, b in zip(pts[:-1], pts[1:])])
    return parts / parts.sum()


def entropy_decay_estimate(V: Potential, f0: Callable[[np.random.Generator, int], np.ndarray], t_grid,
                           particles: int = 100_000, bins: int = 200, seed: int = 0,
                           dt: float = 1e-3, min_per_bin: int = 50) -> EntropyCurve:
    """Histogram estimate of Ent(P_t f) relative to exp(-V) along t_grid (1-d only)."""
    if particles < 100_000:
        raise ValueError("need at least 1e5 particles")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be nonnegative and sorted")
    if particles // bins < min_per_bin:
        new = max(particles // min_per_bin, 10)
        warnings.warn(f"too few particles per bin; using {new} bins instead of {bins}")
        bins = new
    rng = np.random.default_rng(seed)
    x = np.asarray(f0(rng, particles), dtype=float).reshape(particles, 1)
    snaps = []
    t = 0.0
    sq = np.sqrt(2 * dt)
    for target in t_grid:
        while t < target - 1e-12:
            x = x - V.gradient(x) * dt + sq * rng.standard_normal(x.shape)
            t += dt
        snaps.append(x[:, 0].copy())
    allx = np.concatenate(snaps)
    lo, hi = np.quantile(allx, [1e-4, 1 - 1e-4])
    edges = np.linspace(lo, hi, bins + 1)
    ref = _stationary_masses(V, edges)
    ent = []
    for s in snaps:
        counts = np.concatenate([[np.sum(s < edges[0])], np.histogram(s, edges)[0], [np.sum(s > edges[-1])]])
        q = counts / counts.sum()
        nz = q > 0
        ent.append(float(np.sum(q[nz] * np.log(q[nz] / ref[nz]))))
    ent = np.array(ent)
    env = np.exp(-2 * V.rho * (t_grid - t_grid[0])) * ent[0]
    return EntropyCurve(t_grid, ent, env, bins, edges)


def write_csv(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])
