"""Command line entry point: ``hessquot <command> [--config PATH] [overrides]``.

Exit codes: 0 success, 1 a check or solve failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, HessQuotError
from ..expressions import parse_expression
from ..grid import build_grid, write_field_csv
from ..psi import manufactured_rhs
from ..solver import solve
from .barrier import BarrierParams, barrier_check, search_barrier_params
from .config import COMMANDS, RunConfig, load_config, set_key
from .monitor import monitor as stage_table
from .monitor import refinement_table
from .properties import run_property_suite

log = logging.getLogger("hessquot")

OVERRIDES = ("seed", "threads", "n", "k", "l", "m", "eps_schedule", "psi")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_report(out: Path, payload: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def _config_dict(cfg: RunConfig) -> dict:
    d = dict(vars(cfg))
    d["barrier"] = dict(sorted(cfg.barrier.items()))
    return d


def _grids(cfg: RunConfig):
    return cfg.refine or (cfg.m,)


# ---------------------------------------------------------------------------
# commands; each returns (payload, ok)


def cmd_verify_props(cfg: RunConfig, out: Path):
    rep = run_property_suite(cfg.n, cfg.k, cfg.l, seed=cfg.seed, sample_count=cfg.sample_count,
                             threads=cfg.threads)
    for r in rep.results.values():
        if not r.passed:
            log.error(r.describe())
    payload = rep.to_dict()
    payload["wall_time"] = rep.runtime
    return payload, rep.passed


def cmd_solve(cfg: RunConfig, out: Path):
    dom, spec, scfg = cfg.domain(), cfg.operator(), cfg.solver_config()
    psi = cfg.psi_model()
    grid = build_grid(dom, cfg.m)
    rep = solve(grid, spec, psi, scfg)
    if rep.field is not None:
        write_field_csv(out / f"u_m{cfg.m}.csv", rep.field, spec.k, spec.l)
    write_field_csv(out / f"subsolution_m{cfg.m}.csv", rep.subsolution.field, spec.k, spec.l)
    payload = rep.to_dict()
    payload["monitor"] = stage_table(rep).to_dict()
    ok = rep.status == "ok" and rep.final_residual is not None and rep.final_residual < scfg.newton_tol
    return payload, ok


def cmd_manufactured(cfg: RunConfig, out: Path):
    dom, spec, scfg = cfg.domain(), cfg.operator(), cfg.solver_config()
    if dom.shape != "disc":
        raise ConfigError("manufactured runs need shape = disc (exact solutions vanish on a sphere)")
    try:
        exact = parse_expression(cfg.exact or "expbowl:0.5:0.5", dom.size)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad exact solution {cfg.exact!r}: {exc}") from exc
    runs, ok, wall = [], True, 0.0
    for m in _grids(cfg):
        grid = build_grid(dom, m)
        psi = manufactured_rhs(exact, spec, grid)
        rep = solve(grid, spec, psi, scfg)
        wall += rep.wall_time
        err = None
        if rep.field is not None:
            err = float(np.abs(rep.u - exact.value(grid.points)).max())
            write_field_csv(out / f"u_m{m}.csv", rep.field, spec.k, spec.l)
        ok &= rep.status == "ok"
        runs.append({"m": m, "h": grid.h, "status": rep.status, "error": err,
                     "final_residual": rep.final_residual,
                     "iterations": [st.iterations for st in rep.stages]})
    errs = [r["error"] for r in runs]
    ratios = [a / b if a is not None and b else None for a, b in zip(errs, errs[1:])]
    return {"exact": cfg.exact or "expbowl:0.5:0.5", "runs": runs, "error_ratios": ratios,
            "wall_time": wall}, ok


def cmd_monitor(cfg: RunConfig, out: Path):
    dom, spec, scfg = cfg.domain(), cfg.operator(), cfg.solver_config()
    psi = cfg.psi_model()
    reports, stages, ok, wall = [], {}, True, 0.0
    for m in _grids(cfg):
        rep = solve(build_grid(dom, m), spec, psi, scfg)
        wall += rep.wall_time
        ok &= rep.status == "ok"
        reports.append(rep)
        stages[f"m={m}"] = stage_table(rep).to_dict()
    return {"stages": stages, "refinement": refinement_table(reports).to_dict(), "wall_time": wall}, ok


def cmd_barrier_check(cfg: RunConfig, out: Path):
    dom, spec = cfg.domain(), cfg.operator()
    b = cfg.barrier
    if all(key in b for key in ("theta", "K", "eta0", "delta")):
        params = BarrierParams(**b)
        rep = barrier_check(dom, spec, params, m=cfg.collar_nodes, seed=cfg.seed)
        searched = False
    else:
        extra = {key: b[key] for key in ("N", "b", "R") if key in b}
        params, rep = search_barrier_params(dom, spec, m=cfg.collar_nodes, **extra)
        searched = True
    for v in rep.violations[:10]:
        log.error("barrier violation %s", v)
    payload = rep.to_dict()
    payload["searched"] = searched
    return payload, rep.passed


HANDLERS = {
    "solve": cmd_solve,
    "verify-props": cmd_verify_props,
    "barrier-check": cmd_barrier_check,
    "manufactured": cmd_manufactured,
    "monitor": cmd_monitor,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--seed", help="unsigned 64-bit sampling seed")
    common.add_argument("--threads")
    common.add_argument("--n")
    common.add_argument("--k")
    common.add_argument("--l")
    common.add_argument("--m")
    common.add_argument("--eps-schedule", dest="eps_schedule", help="comma-separated decreasing list")
    common.add_argument("--psi", help="KIND:p1,p2,...")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="hessquot", description="Hessian-quotient curvature solver and checks")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg.command = args.command
        for key in OVERRIDES:
            val = getattr(args, key)
            if val is not None:
                set_key(cfg, key, val, where="--" + key.replace("_", "-"))
        if args.out is not None:
            cfg.output_dir = args.out
        cfg.validate()
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload, ok = HANDLERS[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HessQuotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        payload, ok = {"error": str(exc), "error_type": type(exc).__name__}, False
        out = Path(cfg.output_dir)
    payload = {"command": cfg.command, "config": _config_dict(cfg), "passed": bool(ok), "result": payload}
    path = write_report(out, payload)
    print(f"{'ok' if ok else 'FAILED'}: {cfg.command} -> {path}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
