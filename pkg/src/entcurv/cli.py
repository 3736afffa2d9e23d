"""Command-line front end.

Exit codes: 0 when every enabled assertion passes, 1 when one fails, 2 for
configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import sphere, transport
from ._exact import as_fraction
from .config import ConfigError, config_from_dict, load_config
from .io import metric_from_dict
from .runner import dumps, jsonable, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _emit(report: dict, output: str | None, timing: dict | None = None) -> None:
    text = dumps(report)
    if output:
        Path(output).write_text(text)
        if timing is not None:
            Path(output + ".timing.json").write_text(dumps({"timing": timing, "finished_at": time.time()}))
    else:
        sys.stdout.write(text)


def _run_cfg(raw: dict | None, args, cfg=None) -> int:
    try:
        if cfg is None:
            cfg = config_from_dict(raw)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report, timing = run_experiment(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: model could not be built or run: {exc}", file=sys.stderr)
        return EXIT_USAGE
    output = getattr(args, "output", None) or cfg.output
    _emit(report, output, timing)
    for c in report["assertions"]:
        if not c["passed"]:
            print(f"FAILED {c['name']}: {c['detail']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _list(text: str, cast=str):
    return [cast(v) for v in text.split(",") if v.strip()]


def _blocks(text):
    if text is None:
        return None
    text = text.strip()
    return json.loads(text) if text.startswith("[") else text


def _theta(text):
    return None if text is None or text == "uniform" else _list(text)


def _model_from_args(args) -> dict:
    kind = args.model
    m = {"kind": kind}
    if kind == "product":
        if args.sizes:
            m["sizes"] = _list(args.sizes, int)
        elif args.n is not None:
            m["n"] = args.n
        m["blocks"] = _blocks(args.blocks)
        m["theta"] = _theta(args.theta)
    elif kind == "permutations":
        if args.n is not None:
            m["n"] = args.n
        m["blocks"] = _blocks(args.blocks)
        m["theta"] = _theta(args.theta)
    elif kind == "nsets":
        for key in ("N", "n", "k"):
            if getattr(args, key) is not None:
                m[key] = getattr(args, key)
        if args.theta_k:
            m["theta_k"] = _list(args.theta_k)
    elif kind == "file":
        m["path"] = args.path
    return {k: v for k, v in m.items() if v is not None}


def _add_model_args(p):
    p.add_argument("--model", required=True, choices=["product", "nsets", "permutations", "file"])
    p.add_argument("--n", type=int, help="coordinates, set size, or permutation length")
    p.add_argument("--N", type=int, help="ground set size for nsets")
    p.add_argument("--k", type=int, help="down-up step size")
    p.add_argument("--theta-k", help="comma-separated weights for k = 1..n")
    p.add_argument("--sizes", help="comma-separated coordinate sizes for product")
    p.add_argument("--blocks", help="pattern name or JSON list of index lists")
    p.add_argument("--theta", help="comma-separated block weights (fractions allowed)")
    p.add_argument("--path", help="model JSON file for --model file")
    p.add_argument("--pair-mode", default="auto", choices=["auto", "exhaustive", "generator-edges"])
    p.add_argument("--float", action="store_true", help="force floating-point mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")


def _finite_cmd(args, tasks, extra=None) -> int:
    raw = {"model": _model_from_args(args), "tasks": tasks, "seed": args.seed, "pair_mode": args.pair_mode}
    if args.float:
        raw["exact"] = False
    raw.update(extra or {})
    return _run_cfg(raw, args)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return _run_cfg(None, args, cfg)


def cmd_certify(args) -> int:
    tasks = ["certify"] + (["spectral"] if args.spectral else [])
    return _finite_cmd(args, tasks)


def cmd_estimate(args) -> int:
    est = {"restarts": args.restarts, "max_iters": args.max_iters}
    tasks = ["certify", "spectral", "estimate"] if args.sandwich else ["spectral", "estimate"]
    return _finite_cmd(args, tasks, {"estimate": est})


def cmd_duality(args) -> int:
    if args.kappa is None:
        return _finite_cmd(args, ["certify", "duality"], {"trials": args.trials})
    from .config import build_finite_model
    from .contraction import bl_duality_check

    try:
        cfg = config_from_dict({"model": _model_from_args(args), "tasks": ["duality"]})
        model = build_finite_model(cfg.model, exact=False if args.float else None)
        rep = bl_duality_check(model.kernels, model.theta, args.kappa, trials=args.trials, seed=args.seed)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    passed = rep["violation"] <= 1e-10
    _emit({"duality": rep, "passed": passed}, args.output)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_gff(args) -> int:
    m = {"kind": "gff", "blocks": _blocks(args.blocks) or "singletons", "samples": args.samples}
    if args.lattice:
        m["lattice"] = {"dims": args.lattice, "hop_weight": args.hop}
    elif args.P_file:
        doc = json.loads(Path(args.P_file).read_text())
        m["P"] = doc["P"] if isinstance(doc, dict) else doc
    elif args.random:
        m["random"] = {"n": args.random, "seed": args.seed}
    else:
        print("error: give --lattice, --P-file or --random", file=sys.stderr)
        return EXIT_USAGE
    if args.theta:
        m["theta"] = _theta(args.theta)
    return _run_cfg({"model": m, "tasks": ["curvature-gff"], "seed": args.seed}, args)


def cmd_sphere(args) -> int:
    m = {"kind": "sphere", "n": args.n, "p": args.p, "blocks": _blocks(args.blocks), "pairs": args.pairs}
    if args.theta:
        m["theta"] = _theta(args.theta)
    code = _run_cfg({"model": m, "tasks": ["sphere-check"], "seed": args.seed}, args)
    if args.csv and code != EXIT_USAGE:
        from .config import parse_family

        fam = parse_family(args.n, m["blocks"], m.get("theta"))
        _, _, kinds, ratio = sphere.ratio_sweep(fam, args.p, args.pairs, args.seed)
        with open(args.csv, "w") as fh:
            fh.write("kind,ratio\n")
            for k, r in zip(kinds, ratio):
                if np.isfinite(r):
                    fh.write(f"{k},{float(r)!r}\n")
    return code


def cmd_langevin(args) -> int:
    m = {"kind": "potential", "name": args.potential, "rho": args.rho, "dt": args.dt, "T_end": args.T,
         "x0": _list(args.x0, float), "y0": _list(args.y0, float)}
    if args.potential == "quadratic-logcosh":
        m["slope"] = args.slope
    if args.csv:
        m["distance_csv"] = args.csv
    if args.entropy:
        m["entropy"] = True
        m["particles"] = args.particles
        if args.entropy_csv:
            m["entropy_csv"] = args.entropy_csv
    return _run_cfg({"model": m, "tasks": ["langevin"], "seed": args.seed}, args)


def _read_vector(text: str):
    p = Path(text)
    if p.suffix == ".json" and p.exists():
        vals = json.loads(p.read_text())
    else:
        vals = _list(text)
    return [as_fraction(v) if isinstance(v, (str, int)) else float(v) for v in vals]


def cmd_wasserstein(args) -> int:
    try:
        doc = json.loads(Path(args.dist_file).read_text())
        metric = metric_from_dict(doc if isinstance(doc, dict) else {"dist": doc})
        mu, nu = _read_vector(args.mu), _read_vector(args.nu)
        exact = None if not args.float else False
        v1, plan1 = transport.w1(mu, nu, metric, exact=exact)
        vi, plani = transport.winf(mu, nu, metric, exact=exact)
    except (OSError, ValueError, KeyError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = {"w1": v1, "w1_float": float(v1), "winf": vi, "winf_float": float(vi)}
    if args.plans:
        out["w1_plan"] = json.loads(plan1.to_json())
        out["winf_plan"] = json.loads(plani.to_json())
    sys.stdout.write(json.dumps(jsonable(out), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entcurv", description="Entropy-contraction certificates and checks.")
    ap.add_argument("--threads", type=int, help="cap on compiled-kernel worker threads")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a TOML or JSON experiment config")
    p.add_argument("config")
    p.add_argument("--output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", help="certified contraction constant for a zoo model")
    _add_model_args(p)
    p.add_argument("--spectral", action="store_true", help="also report the spectral factor")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("estimate", help="search for bad test functions (upper bound on kappa)")
    _add_model_args(p)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--sandwich", action="store_true", help="also certify and check the sandwich")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("duality", help="exact-summation Brascamp-Lieb check")
    _add_model_args(p)
    p.add_argument("--kappa", type=float, help="constant to test; default is the certified one")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("gff", help="Gaussian free field matrix checks")
    p.add_argument("--lattice", type=int, nargs="+", metavar="SIDE")
    p.add_argument("--hop", type=float, help="per-neighbour weight (default 1/(2d))")
    p.add_argument("--P-file", dest="P_file")
    p.add_argument("--random", type=int, metavar="N")
    p.add_argument("--blocks")
    p.add_argument("--theta")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gff)

    p = sub.add_parser("sphere", help="l_p sphere coupling ratios")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--blocks", required=True)
    p.add_argument("--theta")
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write every (kind, ratio) to this file")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sphere)

    p = sub.add_parser("langevin", help="synchronous coupling of Langevin diffusions")
    p.add_argument("--potential", default="quadratic", choices=["quadratic", "quadratic-logcosh"])
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--slope", type=float, default=1.0)
    p.add_argument("--x0", default="1,2")
    p.add_argument("--y0", default="-1,0")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write (t, distance)")
    p.add_argument("--entropy", action="store_true", help="also run the 1-d entropy decay estimate")
    p.add_argument("--particles", type=int, default=100_000)
    p.add_argument("--entropy-csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_langevin)

    p = sub.add_parser("wasserstein", help="W1 and W-infinity between two laws")
    p.add_argument("dist_file", help="JSON metric: dense matrix, {'dist': ...} or {'n', 'edges'}")
    p.add_argument("mu", help="comma-separated masses or a .json list")
    p.add_argument("nu")
    p.add_argument("--plans", action="store_true")
    p.add_argument("--float", action="store_true")
    p.set_defaults(func=cmd_wasserstein)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is not None:
        import warnings

        import numba

        with warnings.catch_warnings():
            # threading-layer probing may complain about an old TBB; the fallback layer is fine
            warnings.simplefilter("ignore", numba.NumbaWarning)
            numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
