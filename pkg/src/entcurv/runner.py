"""Executes an ExperimentConfig and assembles a JSON-ready report."""

from __future__ import annotations

import json
import time
from fractions import Fraction

import numpy as np

from . import gff, langevin, sphere
from .certify import SCHEMA_VERSION, certify_kappa, pair_set
from .config import ExperimentConfig, build_finite_model, parse_family
from .contraction import EstimateConfig, bl_duality_check, estimate_rho, variance_contraction_spectral
from .zoo import downup_theoretical_kappa, theta_star, theta_star_star

AUTO_EXHAUSTIVE_MAX = 200


def jsonable(obj):
    """Recursively convert numpy and Fraction values into JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"


class _Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, passed: bool, detail: str):
        self.items.append({"name": name, "passed": bool(passed), "detail": detail})

    @property
    def ok(self) -> bool:
        return all(c["passed"] for c in self.items)


def theory_kappa(model):
    if model.name == "product":
        return theta_star(model.family), "theta_star"
    if model.name == "permutations":
        if model.family.n < 2:
            return None, None
        return theta_star_star(model.family), "theta_star_star"
    if model.name == "nsets":
        N, n, ks = model.params["N"], model.params["n"], model.params["ks"]
        w = [0] * n
        for k, t in zip(ks, model.theta):
            w[k - 1] = t
        if not isinstance(model.theta[0], Fraction):
            w = [float(v) for v in w]
        return downup_theoretical_kappa(N, n, w), "downup_formula"
    return None, None


def _finite(cfg: ExperimentConfig, out: dict, checks: _Checks, timing: dict):
    tol = cfg.tolerances
    t0 = time.perf_counter()
    model = build_finite_model(cfg.model, exact=cfg.exact)
    timing["build_seconds"] = time.perf_counter() - t0
    out["model"] = {"kind": model.name, "states": model.space.size, "kernels": len(model.kernels),
                    "params": model.params}
    kappa = None
    if "certify" in cfg.tasks:
        mode = cfg.pair_mode
        if mode == "auto":
            small = model.space.size <= AUTO_EXHAUSTIVE_MAX or model.metric.edges is None
            mode = "exhaustive" if small else "generator-edges"
        rep = certify_kappa(model.kernels, model.theta, model.metric, pair_set(model.space.size, model.metric, mode),
                            seed=cfg.seed)
        timing["certify"] = rep.timing
        out["certify"] = rep.to_dict(include_timing=False)
        kappa = rep.kappa
        ref, label = theory_kappa(model)
        if ref is not None:
            out["certify"]["theory"] = {"name": label, "value": ref}
            checks.add(f"certify.kappa>={label}", float(kappa) >= float(ref) - tol["theory"],
                       f"kappa={kappa} {label}={ref}")
        if rep.spot_check is not None:
            checks.add("certify.spot_check", rep.spot_check["ok"], json.dumps(jsonable(rep.spot_check)))
    if "spectral" in cfg.tasks:
        lam = variance_contraction_spectral(model.kernels, model.theta)
        out["spectral"] = {"spectral_factor": lam}
        if kappa is not None:
            checks.add("sandwich.spectral", float(kappa) + lam <= 1 + tol["sandwich_spectral"],
                       f"kappa+spectral={float(kappa) + lam}")
    if "estimate" in cfg.tasks:
        t0 = time.perf_counter()
        ecfg = EstimateConfig(**{"seed": cfg.seed, **cfg.estimate})
        est = estimate_rho(model.kernels, model.theta, ecfg, metric=model.metric)
        timing["estimate_seconds"] = time.perf_counter() - t0
        out["estimate"] = est.to_dict()
        if kappa is not None:
            checks.add("sandwich.rho", float(kappa) + est.rho_est <= 1 + tol["sandwich_rho"],
                       f"kappa+rho_est={float(kappa) + est.rho_est}")
    if "duality" in cfg.tasks:
        if kappa is None:
            raise ValueError("duality task needs certify in the same run")
        k = float(kappa)
        if 0 < k < 1:
            dual = bl_duality_check(model.kernels, model.theta, k, trials=cfg.trials, seed=cfg.seed)
            out["duality"] = dual
            checks.add("duality.violation", dual["violation"] <= tol["duality"], f"violation={dual['violation']}")
        else:
            out["duality"] = {"skipped": f"kappa={k} is outside (0, 1)"}


def _gff_instance(m: dict):
    if "P" in m:
        return gff.build_gff(np.asarray(m["P"], dtype=float)), None
    if "lattice" in m:
        lat = m["lattice"]
        dims = lat["dims"] if isinstance(lat, dict) else lat
        hop = lat.get("hop_weight") if isinstance(lat, dict) else None
        info = gff.lattice_delta(dims, hop)
        return gff.build_gff(gff.lattice_P(dims, info["hop_weight"])), info
    r = m["random"]
    return gff.random_gff(int(r["n"]), np.random.default_rng(int(r.get("seed", 0)))), None


def _gff(cfg: ExperimentConfig, out: dict, checks: _Checks):
    m = cfg.model
    inst, lattice = _gff_instance(m)
    fam = parse_family(inst.n, m.get("blocks", "singletons"), m.get("theta"))
    rep = gff.check_distorted_curvature(inst, fam, int(m.get("samples", 1000)), seed=cfg.seed)
    sig = gff.sigma_quantities(inst.Gamma, fam)
    out["gff"] = {
        "n": inst.n,
        "delta_min": inst.delta_min,
        "psi": inst.psi,
        "curvature": rep,
        "glauber": gff.glauber_constants(inst, fam),
        "lambda_upper_linear": gff.lambda_upper_linear(inst),
        "sigma": {k: v for k, v in sig.items() if k != "Sigma"},
    }
    if lattice is not None:
        out["gff"]["lattice"] = lattice
    tol = cfg.tolerances["gff"]
    checks.add("gff.distorted_curvature", rep["max_violation"] <= tol, f"max_violation={rep['max_violation']}")
    checks.add("gff.aggregate", rep["aggregate_max_gap"] <= tol, f"aggregate_max_gap={rep['aggregate_max_gap']}")
    checks.add("gff.sigma_sandwich", sig["kappa_low"] <= sig["kappa_high"] + 1e-12,
               f"{sig['kappa_low']} <= {sig['kappa_high']}")


def _sphere(cfg: ExperimentConfig, out: dict, checks: _Checks):
    m = cfg.model
    n = m["n"]
    fam = parse_family(n, m.get("blocks"), m.get("theta"))
    rep = sphere.contraction_check(fam, float(m["p"]), n, pairs=int(m.get("pairs", 10000)), seed=cfg.seed)
    out["sphere"] = rep
    checks.add("sphere.bound", rep["max_ratio"] <= rep["bound"] + cfg.tolerances["sphere"],
               f"max_ratio={rep['max_ratio']} bound={rep['bound']}")
    checks.add("sphere.canonical_attains", rep["canonical_attains"], f"theta_star_star={rep['theta_star_star']}")


def _langevin(cfg: ExperimentConfig, out: dict, checks: _Checks):
    m = cfg.model
    params = {k: m[k] for k in ("rho", "slope") if k in m}
    if m["name"] == "quadratic":
        params.pop("slope", None)
    V = langevin.make_potential(m["name"], **params)
    x0 = m.get("x0", [1.0, 2.0])
    y0 = m.get("y0", [-1.0, 0.0])
    paths = langevin.coupled_paths(V, x0, y0, float(m.get("dt", 1e-3)), float(m.get("T_end", 5.0)), seed=cfg.seed)
    res = {"potential": V.name, "rho": V.rho, "diverged_at": paths.diverged_at,
           "final_distance": float(paths.distance[-1]), "max_step_increase": paths.max_step_increase}
    if paths.diverged_at is None:
        res["fitted_rate"] = langevin.decay_rate_fit(paths.t, paths.distance)
        checks.add("langevin.rate", res["fitted_rate"] >= V.rho - cfg.tolerances["rate"],
                   f"fitted_rate={res['fitted_rate']} rho={V.rho}")
    else:
        checks.add("langevin.rate", False, f"diverged at step {paths.diverged_at}")
    if m.get("distance_csv"):
        langevin.write_csv(m["distance_csv"], ["t", "distance"], [paths.t, paths.distance])
    if m.get("entropy"):
        shift = float(m.get("shift", 2.0))
        grid = np.linspace(0.0, float(m.get("entropy_T", 2.0)), int(m.get("entropy_points", 9)))
        one_d = langevin.make_potential(m["name"], **params)
        curve = langevin.entropy_decay_estimate(
            one_d, lambda g, k: g.normal(shift, 1.0, k), grid,
            particles=int(m.get("particles", 100_000)), bins=int(m.get("bins", 200)), seed=cfg.seed)
        res["entropy"] = {"t": curve.t, "entropy": curve.entropy, "envelope": curve.envelope, "bins": curve.bins}
        slack = cfg.tolerances["entropy_slack"]
        checks.add("langevin.entropy_envelope", bool(np.all(curve.entropy <= slack * curve.envelope + 1e-12)),
                   f"max ratio {float(np.max(curve.entropy / np.maximum(curve.envelope, 1e-300)))}")
        if m.get("entropy_csv"):
            langevin.write_csv(m["entropy_csv"], ["t", "entropy", "envelope"], [curve.t, curve.entropy, curve.envelope])
    out["langevin"] = res


def run_experiment(cfg: ExperimentConfig) -> tuple[dict, dict]:
    """Returns (report, timing); the report is deterministic given the config."""
    out: dict = {}
    checks = _Checks()
    timing: dict = {}
    t0 = time.perf_counter()
    kind = cfg.model["kind"]
    if kind in ("product", "nsets", "permutations", "file"):
        _finite(cfg, out, checks, timing)
    elif kind == "gff":
        _gff(cfg, out, checks)
    elif kind == "sphere":
        _sphere(cfg, out, checks)
    elif kind == "potential":
        _langevin(cfg, out, checks)
    timing["total_seconds"] = time.perf_counter() - t0
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "results": out,
        "assertions": checks.items,
        "passed": checks.ok,
    }
    return report, timing
