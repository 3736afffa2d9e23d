"""Experiment configuration: parsing, validation and model construction."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ._exact import as_fraction
from .zoo import BlockFamily, Model, build_nsets, build_permutations, build_product

FINITE_MODELS = {"product", "nsets", "permutations", "file"}
MODEL_TASKS = {
    **{m: {"certify", "estimate", "spectral", "duality"} for m in FINITE_MODELS},
    "gff": {"curvature-gff"},
    "sphere": {"sphere-check"},
    "potential": {"langevin"},
}
TASK_ORDER = ["certify", "spectral", "estimate", "duality", "curvature-gff", "sphere-check", "langevin"]

DEFAULT_TOLERANCES = {
    "theory": 1e-9,
    "sandwich_rho": 1e-6,
    "sandwich_spectral": 1e-9,
    "duality": 1e-10,
    "gff": 1e-9,
    "sphere": 1e-9,
    "rate": 0.05,
    "entropy_slack": 1.2,
}


class ConfigError(ValueError):
    """Raised for malformed configuration; the message names the field."""


@dataclass
class ExperimentConfig:
    model: dict
    tasks: list
    seed: int = 0
    pair_mode: str = "auto"
    exact: bool | None = None
    trials: int = 1000
    estimate: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}.{key}: required field is missing")
    return d[key]


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return v


def parse_theta(raw, where: str = "model.theta"):
    if raw is None or raw == "uniform":
        return None
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: expected a list of weights or 'uniform'")
    try:
        vals = [as_fraction(v) if isinstance(v, (str, int)) else float(v) for v in raw]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if all(isinstance(v, Fraction) for v in vals):
        return vals
    return [float(v) for v in vals]


def parse_family(n: int, blocks, theta, where: str = "model") -> BlockFamily:
    th = parse_theta(theta, f"{where}.theta")
    try:
        if blocks is None:
            raise ConfigError(f"{where}.blocks: required field is missing")
        if isinstance(blocks, str):
            return BlockFamily.from_pattern(n, blocks, theta=th)
        if isinstance(blocks, list) and all(isinstance(b, list) for b in blocks):
            return BlockFamily.from_lists(n, blocks, theta=th)
        raise ConfigError(f"{where}.blocks: expected a pattern name or a list of index lists")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}.blocks: {exc}") from None


def _check_model(m: dict) -> None:
    kind = _require(m, "kind", "model")
    if kind not in MODEL_TASKS:
        raise ConfigError(f"model.kind: unknown model {kind!r}; choose from {sorted(MODEL_TASKS)}")
    if kind == "product":
        sizes = m.get("sizes")
        if sizes is None:
            n = _int(_require(m, "n", "model"), "model.n")
            sizes = [int(m.get("size", 2))] * n
        if not isinstance(sizes, list) or not all(isinstance(s, int) and s >= 1 for s in sizes):
            raise ConfigError("model.sizes: expected a list of positive integers")
        m["sizes"] = sizes
        parse_family(len(sizes), m.get("blocks"), m.get("theta"))
    elif kind == "permutations":
        n = _int(_require(m, "n", "model"), "model.n")
        parse_family(n, m.get("blocks"), m.get("theta"))
    elif kind == "nsets":
        _int(_require(m, "N", "model"), "model.N")
        _int(_require(m, "n", "model"), "model.n")
        if ("k" in m) == ("theta_k" in m):
            raise ConfigError("model.k: give exactly one of k or theta_k")
        if "k" in m:
            _int(m["k"], "model.k")
        else:
            parse_theta(m["theta_k"], "model.theta_k")
    elif kind == "file":
        _require(m, "path", "model")
    elif kind == "gff":
        if not any(k in m for k in ("P", "lattice", "random")):
            raise ConfigError("model.P: give one of P, lattice or random")
    elif kind == "sphere":
        n = _int(_require(m, "n", "model"), "model.n")
        if float(_require(m, "p", "model")) <= 0:
            raise ConfigError("model.p: must be positive")
        parse_family(n, m.get("blocks"), m.get("theta"))
    elif kind == "potential":
        if _require(m, "name", "model") not in ("quadratic", "quadratic-logcosh"):
            raise ConfigError(f"model.name: unknown potential {m['name']!r}")


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config: expected a table at the top level")
    model = dict(_require(d, "model", "config"))
    _check_model(model)
    tasks = _require(d, "tasks", "config")
    if not isinstance(tasks, list) or not tasks:
        raise ConfigError("config.tasks: expected a nonempty list")
    allowed = MODEL_TASKS[model["kind"]]
    for t in tasks:
        if t not in TASK_ORDER:
            raise ConfigError(f"config.tasks: unknown task {t!r}")
        if t not in allowed:
            raise ConfigError(f"config.tasks: task {t!r} is not available for model kind {model['kind']!r}")
    unknown = set(d) - {"model", "tasks", "seed", "pair_mode", "exact", "trials", "estimate", "tolerances", "output"}
    if unknown:
        raise ConfigError(f"config.{sorted(unknown)[0]}: unknown field")
    pair_mode = d.get("pair_mode", "auto")
    if pair_mode not in ("auto", "exhaustive", "generator-edges"):
        raise ConfigError(f"config.pair_mode: unknown mode {pair_mode!r}")
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in d.get("tolerances", {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{k}: unknown tolerance")
        tol[k] = float(v)
    return ExperimentConfig(
        model=model,
        tasks=sorted(set(tasks), key=TASK_ORDER.index),
        seed=_int(d.get("seed", 0), "config.seed"),
        pair_mode=pair_mode,
        exact=d.get("exact"),
        trials=_int(d.get("trials", 1000), "config.trials"),
        estimate=dict(d.get("estimate", {})),
        tolerances=tol,
        output=d.get("output"),
    )


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        if p.suffix == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"config: parse error: {exc}") from None
    return config_from_dict(raw)


def build_finite_model(m: dict, exact: bool | None = None) -> Model:
    """Model for the finite kinds (product, nsets, permutations, file)."""
    kind = m["kind"]
    if kind == "product":
        sizes = m["sizes"]
        fam = parse_family(len(sizes), m.get("blocks"), m.get("theta"))
        return build_product(sizes, fam, exact=exact)
    if kind == "permutations":
        fam = parse_family(m["n"], m.get("blocks"), m.get("theta"))
        return build_permutations(m["n"], fam, exact=exact)
    if kind == "nsets":
        if "k" in m:
            return build_nsets(m["N"], m["n"], k=m["k"], exact=exact)
        return build_nsets(m["N"], m["n"], theta_k=parse_theta(m["theta_k"], "model.theta_k"), exact=exact)
    if kind == "file":
        from .io import load_model

        space, kernels, theta, metric = load_model(m["path"])
        return Model("file", space, kernels, tuple(theta), metric, None, {"path": m["path"]})
    raise ConfigError(f"model.kind: {kind!r} is not a finite model")
