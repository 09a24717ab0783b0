"""Command-line entry point: ``nptransfer <subcommand> --config run.json``.

Exit codes: 0 on success, 1 on a domain error (infeasible constraint, level
not achievable, ...), 2 on configuration or I/O problems. Reports embed every
default so a run is fully described by its own output.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any

from .adaptive import AdaptiveConfig
from .distributions import distribution_from_dict
from .errors import ConfigError, NPTransferError
from .exponent import delta_of, fit_exponent, worst_source_solution
from .harness import SweepConfig, fit_rate, results_to_csv, run_sweep
from .lowerbound import VerificationReport, hard_family, verify_instance
from .np_oracle import NPProblem, achievable_threshold, check_equivalence, np_solution
from .presets import scenario_from_config
from .regions import encode_float

__all__ = ["main", "build_parser"]

log = logging.getLogger("nptransfer")

SUBCOMMANDS = ("solve", "equiv", "exponent", "simulate", "rates", "lowerbound")

DEFAULT_SCENARIO = {"preset": "power_source", "params": {"rho": 1.0}}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run description")
    common.add_argument("--out", type=Path, help="output file (default: standard output)")
    common.add_argument("--seed", type=int, help="override the configured base seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")
    p = argparse.ArgumentParser(prog="nptransfer", description="Neyman-Pearson transfer learning toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "exact level-set solution of one problem",
        "equiv": "decide whether source solutions solve the target",
        "exponent": "transfer exponent and coefficient of a scenario",
        "simulate": "Monte Carlo sweep, CSV rows",
        "rates": "sweep plus log-log rate fit",
        "lowerbound": "build and verify a hard-instance family",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def _load(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _scenario(cfg: dict):
    return scenario_from_config(cfg.get("scenario", DEFAULT_SCENARIO))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float):
        return encode_float(obj) if math.isinf(obj) else (None if math.isnan(obj) else obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _dump(data: dict) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------- subcommands


def cmd_solve(cfg: dict, args) -> str:
    if "problem" in cfg:
        pr = cfg["problem"]
        try:
            problem = NPProblem(distribution_from_dict(pr["mu0"]), distribution_from_dict(pr["mu1"]), float(pr["alpha"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad problem description: {exc}") from exc
        desc = {"mu0": problem.mu0.to_dict(), "mu1": problem.mu1.to_dict(), "alpha": problem.alpha}
    else:
        sc = _scenario(cfg)
        which = cfg.get("which", "target")
        if which not in ("source", "target"):
            raise ConfigError("which must be 'source' or 'target'")
        problem = sc.source if which == "source" else sc.target
        desc = {"scenario": sc.to_dict(), "which": which}
    lam = achievable_threshold(problem)
    h, t1, t2 = np_solution(problem)
    return _dump({"config": desc, "lambda": lam, "region": h.to_dict(), "type1": t1, "type2": t2})


def cmd_equiv(cfg: dict, args) -> str:
    sc = _scenario(cfg)
    ustar = bool(cfg.get("restrict_Ustar", False))
    tol = float(cfg.get("tol", 1e-9))
    res = check_equivalence(sc.source, sc.target, ustar, tol)
    return _dump({"config": {"scenario": sc.to_dict(), "restrict_Ustar": ustar, "tol": tol}, **res.to_dict()})


def cmd_exponent(cfg: dict, args) -> str:
    sc = _scenario(cfg)
    c_max = float(cfg.get("c_max", 1.0))
    check = bool(cfg.get("check_slack", True))
    fit = fit_exponent(sc, check_slack=check, c_max=c_max)
    hS = worst_source_solution(sc)
    out = {
        "config": {"scenario": sc.to_dict(), "c_max": c_max, "check_slack": check},
        "rho_hat": fit.rho_hat,
        "C_hat": fit.C_hat,
        "Delta": delta_of(sc),
        "n_grid": fit.n_grid,
        "witnesses": {
            "worst_source_solution": hS.to_dict(),
            "target_solution": sc.target_optimum[0].to_dict(),
            "violator": None if fit.witness is None else fit.witness.to_dict(),
        },
    }
    return _dump(out)


def _sweep_config(cfg: dict, args) -> SweepConfig:
    sc = _scenario(cfg)
    ad = cfg.get("adaptive", {})
    try:
        return SweepConfig(
            scenario=sc,
            n0=tuple(cfg.get("n0", [1024])),
            n_s=tuple(cfg.get("n_s", [0])),
            n_t=tuple(cfg.get("n_t", [1024])),
            replicates=int(cfg.get("replicates", 20)),
            seed=int(args.seed if args.seed is not None else cfg.get("seed", 0)),
            adaptive=AdaptiveConfig(float(ad.get("c", 1.0)), float(ad.get("delta", 0.05)), float(ad.get("delta0", 0.05))),
            learner=cfg.get("learner", "adaptive"),
            erm_slack=None if cfg.get("erm_slack") is None else float(cfg["erm_slack"]),
            tie_n0=cfg.get("tie_n0"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sweep description: {exc}") from exc


def cmd_simulate(cfg: dict, args) -> str:
    sweep = _sweep_config(cfg, args)
    log.info("running %d cells x %d seeds", len(sweep.cells()), sweep.replicates)
    return results_to_csv(run_sweep(sweep, jobs=args.jobs))


def cmd_rates(cfg: dict, args) -> str:
    sweep = _sweep_config(cfg, args)
    axis = cfg.get("axis", "n_t")
    log.info("running %d cells x %d seeds", len(sweep.cells()), sweep.replicates)
    rows = run_sweep(sweep, jobs=args.jobs)
    fit = fit_rate(rows, axis)
    errors = sum(r.status != "ok" for r in rows)
    return _dump({"config": {**sweep.to_dict(), "axis": axis}, "fit": fit.to_dict(), "error_rows": errors})


def cmd_lowerbound(cfg: dict, args) -> tuple[str, str | None]:
    p = {
        "variant": "C1",
        "d_H": 17,
        "alpha": 0.25,
        "rho": 1.0,
        "n_S": 10000,
        "n_T": 10000,
        "c1": 0.05,
        "seed": 0,
        **cfg,
    }
    if p.get("delta") is None:
        p["delta"] = 0.3 if p["variant"] == "C3" else 0.0
    if args.seed is not None:
        p["seed"] = args.seed
    try:
        fam = hard_family(p["variant"], int(p["d_H"]), float(p["alpha"]), float(p["rho"]), int(p["seed"]), float(p["delta"]))
        rep = verify_instance(fam, int(p["n_S"]), int(p["n_T"]), float(p["c1"]))
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad lower-bound description: {exc}") from exc
    lines = [",".join(VerificationReport.CSV_HEADER)]
    lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rep.csv_rows()]
    return _dump({"config": p, "packing": fam.code.to_dict(), **rep.to_dict()}), "\n".join(lines) + "\n"


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _configure_logging(quiet: bool) -> None:
    # own handler on the current stderr, so diagnostics do not depend on the root logger
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.WARNING if quiet else logging.INFO)
    log.propagate = False


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    _configure_logging(args.quiet)
    try:
        cfg = _load(args.config)
        if args.command == "lowerbound":
            report, table = cmd_lowerbound(cfg, args)
            _write(report, args.out)
            if args.out is not None:
                _write(table, args.out.with_suffix(".pairs.csv"))
            return 0
        handler = {
            "solve": cmd_solve,
            "equiv": cmd_equiv,
            "exponent": cmd_exponent,
            "simulate": cmd_simulate,
            "rates": cmd_rates,
        }[args.command]
        _write(handler(cfg, args), args.out)
        return 0
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except NPTransferError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
