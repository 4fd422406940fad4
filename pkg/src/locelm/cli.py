"""Batch front end.

::

    locelm problems
    locelm solve run.json
    locelm sweep run.json --param M --values 50,100,200

A run configuration is a JSON object::

    {
      "problem": "helmholtz1d",
      "t_final": null, "n_blocks": 1,
      "partition": {"counts": [4]},
      "collocation": {"distribution": "uniform", "q": [100]},
      "network": {"hidden_widths": [100], "r_m": 3.0, "seed": 1},
      "solver": {"kind": "linear", "rcond": null,
                 "nlsq": {"delta": 0.5, "xi2_mode": "random", ...},
                 "newton": {"max_iter": 20, "tol": 1e-10}},
      "metrics": {"spatial_points": 201},
      "output": {"report": "run_report.json", "values": "run_values.csv"}
    }

``counts`` and ``q`` list one entry per axis (time last); a single ``q`` is
used for every axis.  Exit codes: 0 success, 2 configuration error, 3
solver failure.  Sweep CSV columns: ``<param>, max_error, rms_error,
solve_time``.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .metrics import default_grid, error_report, grid_points
from .problems import PROBLEMS, get_problem
from .solvers import XI2_MODES, LmOptions, NlsqOptions, SolverError
from .timemarch import SOLVERS, BlockConfig, evaluate_solution, march
from .mesh import DISTRIBUTIONS

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
SWEEP_PARAMS = ("n_subdomains", "q_per_direction", "M", "r_m", "n_blocks")
SWEEP_COLUMNS = ("max_error", "rms_error", "solve_time")


class ConfigError(ValueError):
    pass


def _require(cond: bool, field: str, msg: str):
    if not cond:
        raise ConfigError(f"{field}: {msg}")


def _int_list(value, field: str, minimum: int) -> list[int]:
    vals = value if isinstance(value, (list, tuple)) else [value]
    _require(len(vals) > 0, field, "must not be empty")
    out = []
    for i, v in enumerate(vals):
        _require(isinstance(v, (int, np.integer)) and not isinstance(v, bool),
                 f"{field}[{i}]", f"must be an integer, got {v!r}")
        _require(v >= minimum, f"{field}[{i}]", f"must be >= {minimum}, got {v}")
        out.append(int(v))
    return out


def _positive(value, field: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             field, f"must be a number, got {value!r}")
    _require(value > 0, field, f"must be positive, got {value}")
    return float(value)


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    _require(isinstance(cfg, dict), "config", "must be a JSON object")
    return cfg


def build_run(cfg: dict, base: Path | None = None):
    """Validate a configuration; returns ``(problem, t_final, n_blocks, BlockConfig, outputs)``."""
    name = cfg.get("problem")
    _require(name in PROBLEMS, "problem", f"unknown id {name!r}; choose from {sorted(PROBLEMS)}")
    params = cfg.get("problem_params", {}) or {}
    _require(isinstance(params, dict), "problem_params", "must be an object")
    try:
        problem = get_problem(name, **params)
    except TypeError as exc:
        raise ConfigError(f"problem_params: {exc}") from exc

    n_blocks = cfg.get("n_blocks", 1)
    _int_list(n_blocks, "n_blocks", 1)
    t_final = cfg.get("t_final")
    if problem.time_order:
        t_final = problem.t_final if t_final is None else _positive(t_final, "t_final")
    else:
        _require(n_blocks == 1, "n_blocks", "steady problems take a single block")
        t_final = None

    part = cfg.get("partition", {})
    counts = _int_list(part.get("counts"), "partition.counts", 1)
    _require(len(counts) == problem.ndim, "partition.counts",
             f"needs {problem.ndim} entries for {name}, got {len(counts)}")
    col = cfg.get("collocation", {})
    dist = col.get("distribution", "uniform")
    _require(dist in DISTRIBUTIONS, "collocation.distribution", f"must be one of {DISTRIBUTIONS}")
    q = _int_list(col.get("q"), "collocation.q", 2)
    if len(q) == 1:
        q = q * problem.ndim
    _require(len(q) == problem.ndim, "collocation.q", f"needs 1 or {problem.ndim} entries")
    if dist == "gauss-lobatto-legendre":
        _require(max(q) <= 100, "collocation.q", "quadrature points are limited to 100 per direction")

    net = cfg.get("network", {})
    widths = _int_list(net.get("hidden_widths", [100]), "network.hidden_widths", 1)
    r_m = _positive(net.get("r_m", 1.0), "network.r_m")
    seed = net.get("seed", 1)
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             "network.seed", "must be a non-negative integer")

    sol = cfg.get("solver", {})
    kind = sol.get("kind", "nlsq_perturb" if problem.is_nonlinear else "linear")
    _require(kind in SOLVERS, "solver.kind", f"must be one of {SOLVERS}")
    if problem.is_nonlinear:
        _require(kind != "linear", "solver.kind", f"{name} is nonlinear")
    else:
        _require(kind == "linear", "solver.kind", f"{name} is linear; use 'linear'")
    rcond = sol.get("rcond")
    if rcond is not None:
        _require(isinstance(rcond, (int, float)) and rcond >= 0, "solver.rcond", "must be >= 0")
    nl = dict(sol.get("nlsq", {}) or {})
    inner = nl.pop("inner", {}) or {}
    try:
        lm = LmOptions(**inner)
        if rcond is not None and "rcond" not in inner:
            lm.rcond = rcond
        if "xi2_mode" in nl:
            _require(nl["xi2_mode"] in XI2_MODES, "solver.nlsq.xi2_mode", f"must be one of {XI2_MODES}")
        nlsq = NlsqOptions(inner=lm, **nl)
    except TypeError as exc:
        raise ConfigError(f"solver.nlsq: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"solver.nlsq: {exc}") from exc
    newton = sol.get("newton", {}) or {}
    block_cfg = BlockConfig(
        counts=tuple(counts), q=tuple(q), hidden_widths=tuple(widths), r_m=r_m, seed=seed,
        distribution=dist, solver=kind, nlsq=nlsq,
        newton_max_iter=int(newton.get("max_iter", 20)),
        newton_tol=float(newton.get("tol", 1e-10)),
        rcond=rcond,
    )

    metrics = cfg.get("metrics", {}) or {}
    n_space = metrics.get("spatial_points", 201)
    _int_list(n_space, "metrics.spatial_points", 2)

    out = cfg.get("output", {}) or {}
    base = base or Path(".")
    outputs = {
        "report": Path(out.get("report", base / "report.json")),
        "values": Path(out.get("values", base / "values.csv")),
        "spatial_points": int(n_space),
    }
    return problem, t_final, int(n_blocks), block_cfg, outputs


def run(problem, t_final, n_blocks, block_cfg, spatial_points: int = 201):
    result = march(problem, t_final, n_blocks, block_cfg)
    bounds = problem.domain_bounds(result.t_final)
    axes = default_grid(bounds, bool(problem.time_order), spatial_points)
    rep = error_report(result, grid=axes)
    return result, rep, axes


def make_report(cfg: dict, result, rep) -> dict:
    return {
        "problem": result.problem.name,
        "config": cfg,
        "max_error": rep.max_error,
        "rms_error": rep.rms_error,
        "grid_shape": list(rep.grid_shape),
        "per_block": [{"max_error": m, "rms_error": r} for m, r in rep.per_block],
        "blocks": [
            {
                "index": b.block_index,
                "cost": b.cost,
                "iterations": b.iterations,
                "subiterations": b.subiterations,
                "converged": b.converged,
                "solve_time": b.solve_time,
            }
            for b in result.blocks
        ],
        "cost": result.cost,
        "n_params": sum(len(b.weights()) for b in result.blocks),
        "solve_time": result.solve_time,
    }


def write_values(path: Path, result, axes):
    pts = grid_points(axes)
    u_hat = evaluate_solution(result, pts)
    u = result.problem.exact(pts)
    names = ["x", "y"][: result.problem.n_space] + (["t"] if result.problem.time_order else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["computed", "exact", "abs_error"])
        for row, a, b in zip(pts, u_hat, u):
            w.writerow([f"{v:.17g}" for v in row] + [f"{a:.17g}", f"{b:.17g}", f"{abs(a - b):.17g}"])


def cmd_solve(args) -> int:
    try:
        cfg = load_config(args.config)
        problem, t_final, n_blocks, block_cfg, outputs = build_run(cfg, Path(args.config).parent)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result, rep, axes = run(problem, t_final, n_blocks, block_cfg, outputs["spatial_points"])
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    report = make_report(cfg, result, rep)
    outputs["report"].write_text(json.dumps(report, indent=2) + "\n")
    write_values(outputs["values"], result, axes)
    print(f"{problem.name}: max_error={rep.max_error:.3e} rms_error={rep.rms_error:.3e} "
          f"solve_time={result.solve_time:.2f}s")
    print(f"wrote {outputs['report']} and {outputs['values']}")
    return EXIT_OK


def _apply(cfg: dict, param: str, value, ndim: int) -> dict:
    c = copy.deepcopy(cfg)
    if param == "n_subdomains":
        counts = list(c.setdefault("partition", {}).get("counts", [1] * ndim))
        counts[0] = int(value)
        c["partition"]["counts"] = counts
    elif param == "q_per_direction":
        c.setdefault("collocation", {})["q"] = [int(value)]
    elif param == "M":
        net = c.setdefault("network", {})
        widths = list(net.get("hidden_widths", [100]))
        widths[-1] = int(value)
        net["hidden_widths"] = widths
    elif param == "r_m":
        c.setdefault("network", {})["r_m"] = float(value)
    elif param == "n_blocks":
        c["n_blocks"] = int(value)
    return c


def _parse_values(text: str, param: str) -> list:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            vals.append(float(tok) if param == "r_m" else int(tok))
        except ValueError:
            raise ConfigError(f"--values: cannot parse {tok!r} for {param}") from None
    if not vals:
        raise ConfigError("--values: no values given")
    return vals


def cmd_sweep(args) -> int:
    try:
        if len(args.param) != 1:
            raise ConfigError("--param: sweep exactly one parameter")
        param = args.param[0]
        if param not in SWEEP_PARAMS:
            raise ConfigError(f"--param: must be one of {SWEEP_PARAMS}, got {param!r}")
        values = sorted(_parse_values(args.values, param))
        cfg = load_config(args.config)
        base = build_run(cfg, Path(args.config).parent)
        runs = [build_run(_apply(cfg, param, v, base[0].ndim)) for v in values]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.output) if args.output else Path(args.config).with_name(
        f"{Path(args.config).stem}_sweep_{param}.csv"
    )
    rows = []
    for v, (problem, t_final, n_blocks, block_cfg, outputs) in zip(values, runs):
        try:
            result, rep, _ = run(problem, t_final, n_blocks, block_cfg, outputs["spatial_points"])
        except SolverError as exc:
            print(f"solver failure at {param}={v}: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        rows.append((v, rep.max_error, rep.rms_error, result.solve_time))
        print(f"{param}={v}: max_error={rep.max_error:.3e} rms_error={rep.rms_error:.3e} "
              f"solve_time={result.solve_time:.3f}s")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow((param,) + SWEEP_COLUMNS)
        for v, mx, rms, t in rows:
            w.writerow([v, f"{mx:.17g}", f"{rms:.17g}", f"{t:.6f}"])
    print(f"wrote {out}")
    return EXIT_OK


def cmd_problems(args) -> int:
    for name in PROBLEMS:
        p = get_problem(name)
        kind = "nonlinear" if p.is_nonlinear else "linear"
        time_ = f", time order {p.time_order}" if p.time_order else ""
        print(f"{name}\t{p.n_space}D {kind}{time_}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locelm", description="locELM PDE solver")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run one configuration")
    s.add_argument("config")
    s.set_defaults(func=cmd_solve)
    w = sub.add_parser("sweep", help="vary one parameter of a configuration")
    w.add_argument("config")
    w.add_argument("--param", action="append", required=True, help=f"one of {SWEEP_PARAMS}")
    w.add_argument("--values", required=True, help="comma-separated values")
    w.add_argument("--output", help="CSV path (default: <config>_sweep_<param>.csv)")
    w.set_defaults(func=cmd_sweep)
    p = sub.add_parser("problems", help="list benchmark problem ids")
    p.set_defaults(func=cmd_problems)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
