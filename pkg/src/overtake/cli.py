"""Command-line harness.

Every command writes its artifacts plus ``manifest.json`` into the output
directory.  Settings come from built-in defaults, then an optional JSON
config file (``--config``), then command-line flags; the output directory
can additionally be set by ``OVERTAKE_OUT``, which beats the config file but
not ``--out``.

Exit codes: 0 success, 2 invalid configuration, 3 solver non-convergence,
4 every sweep point failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import io
from . import overtaking as ot
from .errors import ConvergenceError, DomainError, OvertakeError, StructuralError
from .model import ModelSpec, euler_residuals, feasibility_check, total_utility
from .solvers import DPGrid, ShootingConfig, solve_bruteforce_dp, solve_closed_form, solve_shooting

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_SWEEP = 0, 2, 3, 4
DEFAULT_OUT = "overtake_out"
COMMANDS = ("solve", "limit", "steady-state", "conditions", "certify", "propositions", "sweep")

DEFAULTS = {
    "alpha": 0.5,
    "k0": 0.0625,
    "T": 10,
    "t_max": 50,
    "T_grid": list(ot.DEFAULT_CONDITION_GRID),
    "method": "closed-form",
    "tolerance": 1e-12,
    "grid_points": 20001,
    "challengers": ["constant_saving", "impatient_burst", "delayed_start"],
    "alphas": [0.2, 0.5, 0.8],
    "k0s": [0.05, 0.25, 0.9],
    "kind": "solve",
    "jobs": 1,
}
# keys each command reads; anything else in a config file is rejected
KEYS = {
    "solve": {"alpha", "k0", "T", "method", "tolerance", "grid_points"},
    "limit": {"alpha", "k0", "t_max", "method", "tolerance"},
    "steady-state": {"alpha"},
    "conditions": {"alpha", "k0", "T_grid"},
    "certify": {"alpha", "k0", "T_grid", "challengers"},
    "propositions": {"alpha", "k0", "t_max"},
    "sweep": {"alphas", "k0s", "T", "T_grid", "kind", "method", "tolerance", "grid_points", "jobs"},
}
CHALLENGERS = {
    "constant_saving": ot.constant_saving,
    "impatient_burst": ot.impatient_burst,
    "delayed_start": ot.delayed_start,
    "limit_policy": ot.limit_policy,
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _names(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="overtake", description="Finite-horizon Ramsey solver and overtaking certification.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, *keys):
        sp.add_argument("--config", help="JSON file with settings; flags override it")
        sp.add_argument("--out", help="output directory (default %s)" % DEFAULT_OUT)
        if "alpha" in keys:
            sp.add_argument("--alpha", type=float)
        if "k0" in keys:
            sp.add_argument("--k0", type=float)
        return sp

    s = common(sub.add_parser("solve", help="solve one finite-horizon problem"), "alpha", "k0")
    s.add_argument("--T", type=int, dest="T")
    s.add_argument("--method", choices=["closed-form", "shooting", "dp"])
    s.add_argument("--tolerance", type=float, help="shooting terminal tolerance")
    s.add_argument("--grid-points", type=int, dest="grid_points", help="DP grid size")

    s = common(sub.add_parser("limit", help="tabulate the limit path"), "alpha", "k0")
    s.add_argument("--t-max", type=int, dest="t_max")
    s.add_argument("--method", choices=["closed-form", "shooting"])
    s.add_argument("--tolerance", type=float)

    common(sub.add_parser("steady-state", help="steady-state values"), "alpha")

    s = common(sub.add_parser("conditions", help="check the two sufficient conditions"), "alpha", "k0")
    s.add_argument("--T-grid", type=_ints, dest="T_grid")

    s = common(sub.add_parser("certify", help="compare challengers with the limit path"), "alpha", "k0")
    s.add_argument("--T-grid", type=_ints, dest="T_grid")
    s.add_argument("--challengers", type=_names, help="comma-separated: " + ",".join(CHALLENGERS))

    s = common(sub.add_parser("propositions", help="composite report on the closed-form results"), "alpha", "k0")
    s.add_argument("--t-max", type=int, dest="t_max")

    s = common(sub.add_parser("sweep", help="run solve or conditions over a parameter grid"))
    s.add_argument("--kind", choices=["solve", "conditions"])
    s.add_argument("--alphas", type=_floats)
    s.add_argument("--k0s", type=_floats)
    s.add_argument("--T", type=int, dest="T")
    s.add_argument("--T-grid", type=_ints, dest="T_grid")
    s.add_argument("--method", choices=["closed-form", "shooting", "dp"])
    s.add_argument("--tolerance", type=float)
    s.add_argument("--grid-points", type=int, dest="grid_points")
    s.add_argument("--jobs", type=int, help="worker processes")
    return p


# -- configuration ---------------------------------------------------------


def resolve_config(args, environ=None):
    """Merge defaults, config file and flags; validate; pick the output dir."""
    environ = os.environ if environ is None else environ
    cmd = args.command
    keys = KEYS[cmd]
    cfg = {k: DEFAULTS[k] for k in keys}
    if cmd == "certify":
        cfg["T_grid"] = list(ot.DEFAULT_CERTIFY_GRID)
    out = DEFAULT_OUT
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        out = data.pop("out", out)
        data.pop("command", None)
        unknown = sorted(set(data) - keys)
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {', '.join(unknown)}")
        cfg.update(data)
    if environ.get("OVERTAKE_OUT"):
        out = environ["OVERTAKE_OUT"]
    if args.out:
        out = args.out
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    _validate(cmd, cfg)
    return cfg, Path(out)


def _validate(cmd, cfg):
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    def real(x):
        return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)

    def integer(x):
        return isinstance(x, int) and not isinstance(x, bool)

    if "alpha" in cfg:
        need(real(cfg["alpha"]) and 0 < cfg["alpha"] < 1, f"alpha must lie in (0, 1), got {cfg['alpha']!r}")
    if "k0" in cfg:
        need(real(cfg["k0"]) and 0 < cfg["k0"] < 1, f"k0 must lie in (0, 1), got {cfg['k0']!r}")
    if "T" in cfg:
        need(integer(cfg["T"]) and cfg["T"] >= 0, f"T must be a nonnegative integer, got {cfg['T']!r}")
    if "t_max" in cfg:
        need(integer(cfg["t_max"]) and cfg["t_max"] >= 0, "t_max must be a nonnegative integer")
    if "tolerance" in cfg:
        need(real(cfg["tolerance"]) and cfg["tolerance"] > 0, "tolerance must be positive")
    if "grid_points" in cfg:
        need(integer(cfg["grid_points"]) and cfg["grid_points"] >= 3, "grid_points must be an integer >= 3")
    if "method" in cfg:
        allowed = {"closed-form", "shooting"} if cmd == "limit" else {"closed-form", "shooting", "dp"}
        need(cfg["method"] in allowed, f"method must be one of {sorted(allowed)}")
    if "T_grid" in cfg:
        g = cfg["T_grid"]
        need(isinstance(g, list) and len(g) >= 2 and all(integer(x) and x >= 1 for x in g),
             "T_grid must list at least two positive integers")
        need(all(b > a for a, b in zip(g, g[1:])), "T_grid must be strictly increasing")
        if cmd == "certify":
            need(len(g) >= 10, "certify needs a T_grid with at least 10 horizons")
    if "challengers" in cfg:
        ch = cfg["challengers"]
        need(isinstance(ch, list) and ch, "challengers must be a nonempty list")
        bad = [c for c in ch if c not in CHALLENGERS]
        need(not bad, f"unknown challengers: {', '.join(map(str, bad))}")
    if cmd == "sweep":
        for name in ("alphas", "k0s"):
            v = cfg[name]
            need(isinstance(v, list) and v, f"{name} grid is empty")
            need(all(real(x) and 0 < x < 1 for x in v), f"{name} entries must lie in (0, 1)")
        need(cfg["kind"] in ("solve", "conditions"), "kind must be solve or conditions")
        need(integer(cfg["jobs"]) and cfg["jobs"] >= 1, "jobs must be a positive integer")
        if cfg["method"] == "dp":
            need(cfg["T"] <= 6, "the DP oracle supports T <= 6")
    if cmd == "solve" and cfg["method"] == "dp":
        need(cfg["T"] <= 6, "the DP oracle supports T <= 6")


# -- commands --------------------------------------------------------------


def _solve(alpha, k0, T, method, tolerance=1e-12, grid_points=20001):
    model = ModelSpec.log_cobb_douglas(alpha)
    if method == "closed-form":
        path = solve_closed_form(alpha, k0, T)
    elif method == "shooting":
        path = solve_shooting(model, k0, T, ShootingConfig(tolerance=tolerance))
    else:
        path = solve_bruteforce_dp(model, k0, T, DPGrid(grid_points=grid_points)).path
    return model, path


def _solve_summary(model, path, k0, method):
    resid = euler_residuals(model, path)
    return {
        "kind": "solve_summary",
        "model": model.to_dict(),
        "k0": k0,
        "T": path.T,
        "method": method,
        "objective": total_utility(model, path),
        "max_abs_euler_residual": float(np.max(np.abs(resid))) if len(resid) else 0.0,
        "terminal_residual": path.terminal_residual,
        "feasible": feasibility_check(model, k0, path).feasible,
    }


def cmd_solve(cfg, out):
    model, path = _solve(cfg["alpha"], cfg["k0"], cfg["T"], cfg["method"], cfg["tolerance"], cfg["grid_points"])
    return [
        io.export_path_csv(path, out / "path.csv", model),
        io.write_json(_solve_summary(model, path, cfg["k0"], cfg["method"]), out / "summary.json"),
    ]


def cmd_limit(cfg, out):
    alpha, k0 = cfg["alpha"], cfg["k0"]
    if cfg["method"] == "closed-form":
        lp = asy.limit_path_closed_form(alpha, k0, cfg["t_max"])
    else:
        model = ModelSpec.log_cobb_douglas(alpha)
        lp = asy.limit_path_numeric(model, k0, cfg["t_max"], cfg=ShootingConfig(tolerance=cfg["tolerance"]))
    return [
        io.export_limit_csv(lp, out / "limit.csv"),
        io.write_json(asy.steady_state(alpha).to_dict(), out / "steady_state.json"),
    ]


def cmd_steady_state(cfg, out):
    return [io.write_json(asy.steady_state(cfg["alpha"]).to_dict(), out / "steady_state.json")]


def cmd_conditions(cfg, out):
    rep = ot.check_conditions(cfg["alpha"], cfg["k0"], cfg["T_grid"])
    return [io.write_json(rep.to_dict(), out / "conditions.json")]


def cmd_certify(cfg, out):
    challengers = [CHALLENGERS[n]() for n in cfg["challengers"]]
    reports = ot.certify_optimality(cfg["alpha"], cfg["k0"], challengers, cfg["T_grid"])
    files = [io.export_ratio_csv(r, out / f"ratios_{r.challenger}.csv") for r in reports]
    doc = {
        "kind": "certification",
        "alpha": cfg["alpha"],
        "k0": cfg["k0"],
        "T_grid": cfg["T_grid"],
        "reports": [r.to_dict() for r in reports],
    }
    files.append(io.write_json(doc, out / "certification.json"))
    return files


def propositions_report(alpha, k0, t_max=50) -> dict:
    """Composite check of the closed-form results at one parameter point."""
    model = ModelSpec.log_cobb_douglas(alpha)
    lp = asy.limit_path_closed_form(alpha, k0, t_max)
    sr = asy.saving_ratio(lp, model)
    dist = asy.log_distance(lp, alpha)
    nz = dist[:-1] > 1e-300
    ratios = dist[1:][nz] / dist[:-1][nz]
    resolved = asy.monotone_convergence_report(alpha, k0, t_max)
    a, b = 4.0, 2.0
    formula = asy.recovery_time_gap(a, b, alpha)
    simulated = asy.simulated_recovery_gap(a, b, alpha)
    tables = [asy.horizon_dependence(alpha, k0, t) for t in (0, 1, 5)]
    return {
        "kind": "propositions_report",
        "alpha": alpha,
        "k0": k0,
        "t_max": t_max,
        "saving_ratio": {
            "max_abs_deviation": float(np.max(np.abs(sr - alpha))),
            "constant": bool(np.max(np.abs(sr - alpha)) <= 1e-12),
        },
        "steady_state": asy.steady_state(alpha).to_dict(),
        "convergence": resolved.to_dict(),
        "log_distance_decay": {
            "expected_ratio": alpha,
            "max_abs_ratio_error": float(np.max(np.abs(ratios - alpha))) if len(ratios) else 0.0,
        },
        "elasticity": asy.elasticity_effect_report([0.2, 0.5, 0.8], [0.05, 0.25, 0.9], 5).to_dict(),
        "recovery_time": {
            "a": a,
            "b": b,
            "formula_gap": formula,
            "simulated_gap": simulated,
            "within_half_period": bool(abs(simulated - formula) <= 0.51),
        },
        "horizon_dependence": [t.to_dict() for t in tables],
    }


def cmd_propositions(cfg, out):
    rep = propositions_report(cfg["alpha"], cfg["k0"], cfg["t_max"])
    return [io.write_json(rep, out / "propositions.json")]


def _point_label(alpha, k0):
    return f"alpha={float(alpha)!r}_k0={float(k0)!r}"


def _sweep_point(task):
    """Run one grid point; never raises, so failures are recorded per point."""
    kind, alpha, k0, cfg, out = task
    pdir = Path(out) / _point_label(alpha, k0)
    try:
        if kind == "solve":
            model, path = _solve(alpha, k0, cfg["T"], cfg["method"], cfg["tolerance"], cfg["grid_points"])
            io.export_path_csv(path, pdir / "path.csv", model)
            summ = _solve_summary(model, path, k0, cfg["method"])
            io.write_json(summ, pdir / "summary.json")
            return {"alpha": alpha, "k0": k0, "T": cfg["T"], "status": "ok",
                    "objective": summ["objective"], "certified": None, "error": ""}
        rep = ot.check_conditions(alpha, k0, cfg["T_grid"])
        io.write_json(rep.to_dict(), pdir / "conditions.json")
        return {"alpha": alpha, "k0": k0, "T": cfg["T_grid"][-1], "status": "ok",
                "objective": rep.condition_i.partial_sums[-1], "certified": rep.certified, "error": ""}
    except (OvertakeError, ValueError, ArithmeticError) as exc:
        return {"alpha": alpha, "k0": k0, "T": cfg.get("T"), "status": "failed",
                "objective": None, "certified": None, "error": str(exc).replace("\n", " ")}


def cmd_sweep(cfg, out):
    tasks = [(cfg["kind"], a, k, cfg, str(out)) for a in cfg["alphas"] for k in cfg["k0s"]]
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as ex:
            rows = list(ex.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    # single writer, fixed order
    rows.sort(key=lambda r: (r["alpha"], r["k0"]))
    agg = [
        [io.fmt(r["alpha"]), io.fmt(r["k0"]), "" if r["T"] is None else str(r["T"]), r["status"],
         io.fmt(r["objective"]), "" if r["certified"] is None else str(r["certified"]).lower(), r["error"]]
        for r in rows
    ]
    io.write_rows(out / "aggregate.csv", ["alpha", "k0", "T", "status", "objective", "certified", "error"], agg)
    files = [out / "aggregate.csv"]
    for r in rows:
        if r["status"] == "ok":
            files.extend(sorted((out / _point_label(r["alpha"], r["k0"])).iterdir()))
    n_fail = sum(r["status"] != "ok" for r in rows)
    return files, n_fail, len(rows)


HANDLERS = {
    "solve": cmd_solve,
    "limit": cmd_limit,
    "steady-state": cmd_steady_state,
    "conditions": cmd_conditions,
    "certify": cmd_certify,
    "propositions": cmd_propositions,
}


def _fail(code, message):
    print(f"overtake: error: {message}", file=sys.stderr)
    return code


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a command is required: " + ", ".join(COMMANDS))
        cfg, out = resolve_config(args, environ)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc).replace("\n", " "))

    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _fail(EXIT_CONFIG, f"output directory {out} not writable: {exc.strerror}")

    status, code = "ok", EXIT_OK
    try:
        if args.command == "sweep":
            files, n_fail, n = cmd_sweep(cfg, out)
            if n_fail:
                status = f"{n_fail} of {n} points failed"
            if n_fail == n:
                code = EXIT_SWEEP
        else:
            files = HANDLERS[args.command](cfg, out)
    except ConvergenceError as exc:
        io.write_manifest(out, args.command, cfg, [], status="convergence_failure")
        return _fail(EXIT_CONVERGENCE, str(exc))
    except (DomainError, StructuralError) as exc:
        io.write_manifest(out, args.command, cfg, [], status="config_error")
        return _fail(EXIT_CONFIG, str(exc))
    io.write_manifest(out, args.command, cfg, files, status=status)
    if code == EXIT_SWEEP:
        return _fail(code, "all sweep points failed; see aggregate.csv")
    print(out / "manifest.json")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
