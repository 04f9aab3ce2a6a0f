"""Batch experiment runner: ``run`` a config, ``sweep`` a grid, ``verify`` the suite.

Configs are versioned JSON.  Exit codes: 0 success, 2 validation error,
3 energy-inequality (majorant) violation, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .core import Majorant, NormTag, NumericFailure
from .dictionaries import ARGMAX, FIRST_ABOVE, FiniteDictionary, SphereDictionary
from .diagnostics import ALL_CLAIMS, claim_verdict, fit_rate
from .greedy import (
    CoefficientSequence,
    MajorantViolationError,
    StopRule,
    WeaknessSequence,
    make_power_coefficients,
    run_ega,
    run_gbe,
    run_gega,
    run_gga_adaptive,
    run_gga_fixed,
)
from .objectives import logistic_objective, p_power_objective, quadratic_objective
from .traceio import write_manifest, write_trace_csv
from .verification import VerifyContext, criterion_names, run_all

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _load_matrix_csv(path, base_dir):
    return np.loadtxt(Path(base_dir) / path, delimiter=",", ndmin=2)


def _load_vector_csv(path, base_dir):
    return np.loadtxt(Path(base_dir) / path, delimiter=",").reshape(-1)


def build_objective(spec, base_dir="."):
    _require(isinstance(spec, dict) and "kind" in spec,
             "objective spec needs a 'kind'")
    kind = spec["kind"]
    if kind == "quadratic":
        _require("target" in spec, "quadratic objective needs a target")
        scale = float(spec.get("scale", 1.0))
        _require(scale > 0, "scale must be positive")
        return quadratic_objective(spec["target"], scale=scale)
    if kind == "p_power":
        p = float(spec.get("p", 2.0))
        _require(1.0 < p <= 2.0, "p must lie in (1, 2]")
        design = (np.asarray(spec["design"], dtype=float) if "design" in spec
                  else _load_matrix_csv(spec["design_csv"], base_dir))
        response = (np.asarray(spec["response"], dtype=float)
                    if "response" in spec
                    else _load_vector_csv(spec["response_csv"], base_dir))
        return p_power_objective(design, response, p)
    if kind == "logistic":
        design = (np.asarray(spec["design"], dtype=float) if "design" in spec
                  else _load_matrix_csv(spec["design_csv"], base_dir))
        labels = (np.asarray(spec["labels"], dtype=float) if "labels" in spec
                  else _load_vector_csv(spec["labels_csv"], base_dir))
        return logistic_objective(design, labels,
                                  region_radius=float(spec.get("region_radius",
                                                               10.0)))
    raise ConfigError(f"unknown objective kind {kind!r}")


def build_dictionary(spec, base_dir="."):
    _require(isinstance(spec, dict) and "kind" in spec,
             "dictionary spec needs a 'kind'")
    kind = spec["kind"]
    p = float(spec.get("p", 2.0))
    try:
        norm = NormTag(p)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if kind == "coordinate":
        _require("dim" in spec, "coordinate dictionary needs 'dim'")
        return FiniteDictionary.coordinate(int(spec["dim"]), norm=norm)
    if kind == "gaussian":
        for key in ("dim", "count", "seed"):
            _require(key in spec, f"gaussian dictionary needs {key!r}")
        return FiniteDictionary.gaussian(int(spec["dim"]), int(spec["count"]),
                                         int(spec["seed"]), norm=norm)
    if kind == "csv":
        _require("path" in spec, "csv dictionary needs 'path'")
        return FiniteDictionary.from_csv(Path(base_dir) / spec["path"],
                                         norm=norm)
    if kind == "sphere":
        return SphereDictionary(norm=norm)
    raise ConfigError(f"unknown dictionary kind {kind!r}")


def build_weakness(spec):
    if spec is None:
        return WeaknessSequence.constant(1.0)
    if isinstance(spec, (int, float)):
        spec = {"kind": "constant", "t": spec}
    kind = spec.get("kind", "constant")
    try:
        if kind == "constant":
            return WeaknessSequence.constant(float(spec["t"]))
        if kind == "explicit":
            return WeaknessSequence.explicit(spec["values"])
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad weakness spec: {exc}")
    raise ConfigError(f"unknown weakness kind {kind!r}")


def build_coefficients(spec, objective):
    _require(isinstance(spec, dict) and "kind" in spec,
             "coefficient spec needs a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "power":
            c, s = float(spec["c"]), float(spec["s"])
            _require(0.0 < s < 1.0, "s must lie in (0, 1)")
            return CoefficientSequence.power(c, s)
        if kind == "explicit":
            return CoefficientSequence.explicit(spec["values"])
        if kind == "power-rule":
            t = float(spec.get("t", 1.0))
            _require(0.0 < t <= 1.0, "t must lie in (0, 1]")
            mu = objective.majorant
            q = float(spec.get("q", mu.q if mu.is_power else 2.0))
            _require(1.0 < q <= 2.0, "q must lie in (1, 2]")
            gamma = float(spec.get("gamma",
                                   mu.gamma if mu.is_power else 1.0))
            _require(gamma > 0, "gamma must be positive")
            return make_power_coefficients(t, q, gamma)
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad coefficient spec: {exc}")
    raise ConfigError(f"unknown coefficient kind {kind!r}")


def build_majorant(spec, objective):
    if spec is None or spec == "objective":
        return None  # runner falls back to the objective's majorant
    _require(isinstance(spec, dict) and spec.get("kind") == "power",
             "majorant spec must be 'objective' or a power law")
    gamma, q = float(spec["gamma"]), float(spec["q"])
    _require(gamma > 0, "gamma must be positive")
    _require(1.0 < q <= 2.0, "q must lie in (1, 2]")
    return Majorant.power(gamma, q)


def build_stop(spec, max_iter_override=None):
    spec = spec or {}
    max_iter = int(max_iter_override if max_iter_override is not None
                   else spec.get("max_iter", 1000))
    _require(max_iter >= 1, "max_iter must be at least 1")
    grad_tol = spec.get("grad_tol")
    target_gap = spec.get("target_gap")
    return StopRule(max_iter=max_iter,
                    grad_tol=None if grad_tol is None else float(grad_tol),
                    target_gap=None if target_gap is None
                    else float(target_gap))


def _mode(spec):
    mode = spec.get("mode", ARGMAX)
    _require(mode in (ARGMAX, FIRST_ABOVE),
             f"mode must be {ARGMAX!r} or {FIRST_ABOVE!r}")
    return mode


def execute_run(config, base_dir=".", seed_override=None,
                max_iter_override=None):
    """Build everything from a validated config and run it."""
    _require(config.get("schema") == SCHEMA_VERSION,
             f"config schema must be {SCHEMA_VERSION}")
    seed = int(seed_override if seed_override is not None
               else config.get("seed", 0))
    objective = build_objective(config.get("objective"), base_dir)
    dictionary = build_dictionary(config.get("dictionary"), base_dir)
    algo = config.get("algorithm")
    _require(isinstance(algo, dict) and "kind" in algo,
             "algorithm spec needs a 'kind'")
    stop = build_stop(config.get("stop"), max_iter_override)
    kind = algo["kind"]

    if kind == "GBE":
        t = float(algo.get("t", 1.0))
        _require(0.0 < t <= 1.0, "t must lie in (0, 1]")
        coeffs = build_coefficients(algo.get("coefficients"), objective)
        trace = run_gbe(objective, dictionary, t, coeffs.value, stop,
                        mode=_mode(algo), seed=seed)
    elif kind == "EGA":
        _require(not isinstance(dictionary, SphereDictionary),
                 "EGA needs a finite dictionary (sphere is not supported)")
        coeffs = build_coefficients(algo.get("coefficients"), objective)
        trace = run_ega(objective, dictionary, coeffs, stop, seed=seed)
    elif kind == "GGA_FIXED":
        tau = build_weakness(algo.get("tau", algo.get("t")))
        coeffs = build_coefficients(algo.get("coefficients"), objective)
        trace = run_gga_fixed(objective, dictionary, tau, coeffs, stop,
                              mode=_mode(algo), seed=seed)
    elif kind == "GGA_ADAPTIVE":
        tau = build_weakness(algo.get("tau", algo.get("t")))
        b = float(algo.get("b", 0.5))
        _require(0.0 < b < 1.0, "b must be in (0,1)")
        mu = build_majorant(algo.get("mu", "objective"), objective)
        trace = run_gga_adaptive(objective, dictionary, tau, b, stop,
                                 majorant=mu, mode=_mode(algo), seed=seed)
    elif kind == "GEGA":
        tau = build_weakness(algo.get("tau", algo.get("t")))
        trace = run_gega(objective, dictionary, tau, stop, mode=_mode(algo),
                         line_tol=float(algo.get("line_tol", 1e-12)),
                         seed=seed)
    else:
        raise ConfigError(f"unknown algorithm kind {kind!r}")

    results = {"status": trace.status, "iterations": len(trace),
               "final_E": trace.final_E, "final_gap": trace.final_gap}
    diag = config.get("diagnostics") or {}
    if trace.infimum is not None and len(trace) >= 10:
        window = diag.get("fit_window")
        fit = fit_rate(trace, window=tuple(window) if window else None)
        results["fit"] = fit.describe()
    verdicts = []
    for claim_spec in diag.get("claims", []):
        if isinstance(claim_spec, str):
            claim_spec = {"claim": claim_spec}
        name = claim_spec.get("claim")
        _require(name in ALL_CLAIMS,
                 f"unknown claim {name!r}; choose from {sorted(ALL_CLAIMS)}")
        verdict = claim_verdict(
            name, trace,
            r=claim_spec.get("r"),
            hull_radius=claim_spec.get("hull_radius"),
            tolerance=float(claim_spec.get("tolerance", 1e-2)),
            calibration=int(claim_spec.get("calibration", 10)))
        verdicts.append(verdict.describe())
    if verdicts:
        results["verdicts"] = verdicts
    resolved = dict(config)
    resolved["seed"] = seed
    resolved["stop"] = {"max_iter": stop.max_iter, "grad_tol": stop.grad_tol,
                        "target_gap": stop.target_gap}
    manifest = {"schema": SCHEMA_VERSION, "config": resolved,
                "results": results, "run_config": trace.config}
    return trace, manifest


def _write_outputs(trace, manifest, config, out_dir):
    out_dir = Path(out_dir)
    output = config.get("output") or {}
    trace_path = out_dir / output.get("trace", "trace.csv")
    manifest_path = out_dir / output.get("manifest", "manifest.json")
    write_trace_csv(trace, trace_path)
    write_manifest(manifest, manifest_path)
    return trace_path, manifest_path


def _unwrap_manifest(payload):
    # a manifest is itself a runnable config (round-trip property)
    if "config" in payload and isinstance(payload["config"], dict) \
            and "results" in payload:
        return payload["config"]
    return payload


def cmd_run(args):
    config = _unwrap_manifest(_load_json(args.config))
    base_dir = Path(args.config).parent
    trace, manifest = execute_run(config, base_dir=base_dir,
                                  seed_override=args.seed,
                                  max_iter_override=args.max_iter)
    trace_path, manifest_path = _write_outputs(trace, manifest, config,
                                               args.out)
    print(f"{trace.config['algorithm']}: {len(trace)} iterations, "
          f"status {trace.status}, final E {trace.final_E:.6g}"
          + (f", gap {trace.final_gap:.3e}" if trace.final_gap is not None
             else ""))
    print(f"trace: {trace_path}")
    print(f"manifest: {manifest_path}")
    return 0


def _set_by_path(config, dotted, value):
    node = config
    parts = dotted.split(".")
    for key in parts[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[parts[-1]] = value


def _sweep_one(index, config, base_dir, out_dir, seed, max_iter):
    run_dir = Path(out_dir) / f"run_{index:04d}"
    try:
        trace, manifest = execute_run(config, base_dir=base_dir,
                                      seed_override=seed,
                                      max_iter_override=max_iter)
        _write_outputs(trace, manifest, config, run_dir)
        fit = manifest["results"].get("fit") or {}
        return {"status": trace.status, "iterations": len(trace),
                "final_E": trace.final_E, "final_gap": trace.final_gap,
                "fit_exponent": fit.get("exponent")}
    except (ConfigError, MajorantViolationError, NumericFailure,
            FloatingPointError, OverflowError) as exc:
        return {"status": f"error: {type(exc).__name__}", "iterations": None,
                "final_E": None, "final_gap": None, "fit_exponent": None}


def cmd_sweep(args):
    config = _unwrap_manifest(_load_json(args.config))
    grid = _load_json(args.grid)
    _require(isinstance(grid, dict) and grid, "grid must be a nonempty object")
    names = list(grid.keys())
    for name in names:
        _require(isinstance(grid[name], list) and grid[name],
                 f"grid entry {name!r} must be a nonempty list")
    points = list(itertools.product(*(grid[n] for n in names)))
    base_dir = Path(args.config).parent

    def job(item):
        index, values = item
        point = json.loads(json.dumps(config))  # deep copy
        for name, value in zip(names, values):
            _set_by_path(point, name, value)
        return _sweep_one(index, point, base_dir, args.out, args.seed,
                          args.max_iter)

    workers = int(os.environ.get("GREEDY_OPT_THREADS", "0")) or min(4,
                                                                    len(points))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(job, enumerate(points)))

    lines = ["run," + ",".join(names)
             + ",status,iterations,final_E,final_gap,fit_exponent"]
    succeeded = 0
    for index, (values, row) in enumerate(zip(points, rows)):
        if not str(row["status"]).startswith("error"):
            succeeded += 1
        cells = [str(index)] + [json.dumps(v) for v in values]
        for key in ("status", "iterations", "final_E", "final_gap",
                    "fit_exponent"):
            val = row[key]
            if isinstance(val, float):
                cells.append(format(val, ".17g"))
            else:
                cells.append("" if val is None else str(val))
        lines.append(",".join(cells))
    from .traceio import atomic_write_text
    summary = Path(args.out) / "summary.csv"
    atomic_write_text(summary, "\n".join(lines) + "\n")
    print(f"sweep: {succeeded}/{len(points)} runs succeeded; summary {summary}")
    return 0 if succeeded else 1


def cmd_verify(args):
    if args.list:
        for name in criterion_names():
            print(name)
        return 0
    ctx = VerifyContext(out_dir=Path(args.out),
                        fault_gamma_half=(args.inject_fault == "gamma-half"))
    results = run_all(ctx)
    width = max(len(r.name) for r in results)
    failed = [r for r in results if not r.passed]
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark}  {r.name:<{width}}  {r.detail}")
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        print("failed: " + ", ".join(r.name for r in failed))
        return 1
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="greedy-opt",
        description="Greedy dictionary expansions for smooth convex "
                    "minimization: batch runs, sweeps, and the verification "
                    "suite.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("config", help="JSON config (or a manifest) to execute")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--max-iter", type=int, default=None,
                       help="override the stop rule's max_iter")

    p_sweep = sub.add_parser("sweep", help="grid of runs over config parameters")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--grid", required=True,
                         help="JSON file mapping dotted config paths to value lists")
    p_sweep.add_argument("--out", default="sweep-out")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--max-iter", type=int, default=None)

    p_verify = sub.add_parser("verify", help="run the acceptance criteria")
    p_verify.add_argument("--list", action="store_true",
                          help="print the criteria without running them")
    p_verify.add_argument("--out", default="verify-out",
                          help="directory for the criteria's trace files")
    p_verify.add_argument("--inject-fault", choices=["gamma-half"],
                          default=None,
                          help="halve the declared quadratic majorants to "
                               "demonstrate violation detection")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MajorantViolationError as exc:
        print(f"MAJORANT_VIOLATION: {exc}", file=sys.stderr)
        return 3
    except (NumericFailure, FloatingPointError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
