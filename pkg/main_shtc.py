#!/usr/bin/env python3
# main_shtc.py (verify / simulate / eigen front end)

import argparse
import csv
import json
import math
import multiprocessing as mp
import sys
import traceback
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config_module import (
    get_bool,
    get_float,
    get_int,
    get_range,
    load_yaml,
    log_debug,
    log_error,
    log_info,
    log_warning,
    parse_relax,
    parse_state_values,
    section,
    state_from_values,
)
from dynamics_module import (
    DIAGNOSTICS_HEADER,
    SNAPSHOT_HEADER,
    calibrated_mixture,
    diagnostics_row,
    load_sim_config,
    run_simulation,
    snapshot_rows,
)
from eos_module import MixtureEos, calibrate_offsets, mixture_sound_speed_sq
from errors_module import ConfigError, DomainError, PreconditionError, ShtcError, StepFailure
from state_module import PrimitiveState, RelaxationParams, is_equilibrium, make_mechanical_equilibrium
from structure_module import FIELDS, Tolerances, eigen_structure, structure_report

# -----------------------------------------------------------------------------
# UTF-8 Output
# -----------------------------------------------------------------------------
if sys.platform == "win32":
    for stream in (sys.stdout, sys.stderr):
        if stream.encoding.lower() != "utf-8":
            try: stream.reconfigure(encoding="utf-8", errors="replace")
            except Exception: pass

# --- Configuration ---
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
VANISHING_ALPHAS = (1e-3, 1.0 - 1e-3)
OFF_EQUILIBRIUM_SPREAD = 0.2
SNAPSHOT_FILE = "snapshots.csv"
DIAGNOSTICS_FILE = "diagnostics.csv"


@dataclass(frozen=True)
class SamplingConfig:
    n_states: int = 100
    seed: int = 0
    alpha_range: Tuple[float, float] = (0.05, 0.95)
    pressure_range: Tuple[float, float] = (1.0, 10.0)
    u_range: Tuple[float, float] = (-1.0, 1.0)


@dataclass(frozen=True)
class VerifyConfig:
    mix: MixtureEos
    sampling: SamplingConfig
    tolerances: Tolerances
    relax: RelaxationParams
    require_sk_pass: bool = False


@dataclass(frozen=True)
class VerifyTask:
    index: int
    mix: MixtureEos
    relax: RelaxationParams
    tolerances: Tolerances
    require_sk_pass: bool
    state: PrimitiveState
    off_state: PrimitiveState


# --- Config loading ---
def load_verify_config(path) -> VerifyConfig:
    data = load_yaml(path)
    mix = calibrated_mixture(data)
    s = section(data, "sampling", required=False)
    sampling = SamplingConfig(
        n_states=get_int(s, "n_states", SamplingConfig.n_states, "sampling."),
        seed=get_int(s, "seed", SamplingConfig.seed, "sampling."),
        alpha_range=get_range(s, "alpha_range", SamplingConfig.alpha_range, "sampling."),
        pressure_range=get_range(s, "pressure_range", SamplingConfig.pressure_range, "sampling."),
        u_range=get_range(s, "u_range", SamplingConfig.u_range, "sampling."),
    )
    if sampling.n_states < 1:
        raise ConfigError("sampling.n_states must be >= 1")
    if not (0.0 < sampling.alpha_range[0] and sampling.alpha_range[1] < 1.0):
        raise ConfigError(f"sampling.alpha_range must lie inside (0, 1), got {sampling.alpha_range}")
    if not sampling.pressure_range[0] > 0:
        raise ConfigError(f"sampling.pressure_range must be positive, got {sampling.pressure_range}")
    try:
        tolerances = Tolerances.from_mapping(section(data, "tolerances", required=False))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"tolerances: {e}") from e
    gates = section(data, "gates", required=False)
    return VerifyConfig(
        mix=mix,
        sampling=sampling,
        tolerances=tolerances,
        relax=parse_relax(data),
        require_sk_pass=get_bool(gates, "require_sk_pass", False, "gates."),
    )


# --- Sampling ---
def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def perturb_off_equilibrium(mix: MixtureEos, state: PrimitiveState, r: np.ndarray) -> PrimitiveState:
    """Shift alpha and c by up to 10% of their distance to the bounds and add w ~ a."""
    a = math.sqrt(mixture_sound_speed_sq(mix, state.alpha, state.c, state.rho))
    alpha = state.alpha + OFF_EQUILIBRIUM_SPREAD * (r[0] - 0.5) * min(state.alpha, 1.0 - state.alpha)
    c = state.c + OFF_EQUILIBRIUM_SPREAD * (r[1] - 0.5) * min(state.c, 1.0 - state.c)
    return PrimitiveState(alpha=alpha, c=c, rho=state.rho, u=state.u, w=(r[2] - 0.5) * a)


def sample_tasks(cfg: VerifyConfig) -> List[VerifyTask]:
    s = cfg.sampling
    rng = np.random.Generator(np.random.PCG64(s.seed))
    draws = []
    for _ in range(s.n_states):
        alpha = float(rng.uniform(*s.alpha_range))
        p_star = _log_uniform(rng, *s.pressure_range)
        u = float(rng.uniform(*s.u_range))
        draws.append((alpha, p_star, u, rng.random(3)))
    p_mid = math.sqrt(s.pressure_range[0] * s.pressure_range[1])
    u_mid = 0.5 * (s.u_range[0] + s.u_range[1])
    for alpha in VANISHING_ALPHAS:
        draws.append((alpha, p_mid, u_mid, rng.random(3)))

    tasks = []
    for index, (alpha, p_star, u, r) in enumerate(draws):
        try:
            mix = calibrate_offsets(cfg.mix, p_star)
            state = make_mechanical_equilibrium(mix, p_star, alpha, u)
        except DomainError as e:
            raise ConfigError(f"sampled state {index} (alpha={alpha}, p*={p_star}): {e}") from e
        tasks.append(VerifyTask(index=index, mix=mix, relax=cfg.relax, tolerances=cfg.tolerances,
                                require_sk_pass=cfg.require_sk_pass, state=state,
                                off_state=perturb_off_equilibrium(mix, state, r)))
    return tasks


# --- Check invocation ---
def _run_check(label: str, func, *args):
    try:
        return func(*args), None
    except Exception as e:
        log_error(label, f"{type(e).__name__}: {e}")
        log_debug(label, traceback.format_exc())
        return None, f"{type(e).__name__}: {e}"


def verify_one(task: VerifyTask) -> Dict[str, Any]:
    report, error = _run_check(
        f"state {task.index}", structure_report,
        task.mix, task.relax, task.state, task.tolerances, task.off_state, task.require_sk_pass,
    )
    if report is None:
        return {"index": task.index, "state": task.state.to_dict(), "failures": [error], "passed": False}
    row = {"index": task.index}
    row.update(report.to_json_dict())
    row["passed"] = report.passed
    return row


def run_all_checks(tasks: List[VerifyTask], workers: int = 1) -> List[Dict[str, Any]]:
    log_info("verify", f"checking {len(tasks)} states with {workers} worker(s)")
    if workers > 1:
        with mp.Pool(processes=workers) as pool:
            return pool.map(verify_one, tasks)
    return [verify_one(t) for t in tasks]


def summarize(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    failed = [r for r in rows if not r["passed"]]
    discrepancy_counts = Counter(d["check"] for r in rows for d in r.get("discrepancies", []))
    return {
        "n_states": len(rows),
        "n_failed": len(failed),
        "n_sk_pass": sum(1 for r in rows if r.get("sk_pass")),
        "n_degenerate": sum(1 for r in rows if r.get("degenerate")),
        "discrepancies": dict(sorted(discrepancy_counts.items())),
    }


def save_to_json(data, filename):
    try:
        Path(filename).parent.mkdir(parents=True, exist_ok=True)
        with open(filename, "w", encoding="utf-8") as f: json.dump(data, f, ensure_ascii=False, indent=2)
        log_info("report", f"saved to {filename}")
    except OSError as e:
        log_error("report", f"failed to save {filename}: {e}")
        raise ConfigError(f"cannot write report {filename}: {e}") from e


# --- Commands ---
def cmd_verify(args) -> int:
    cfg = load_verify_config(args.config)
    tasks = sample_tasks(cfg)
    rows = run_all_checks(tasks, max(1, args.workers))
    summary = summarize(rows)

    for name, count in summary["discrepancies"].items():
        log_warning("verify", f"{name}: closed form disagrees with its oracle at {count}/{len(rows)} states")
    for r in rows:
        if not r["passed"]:
            log_error("verify", f"state {r['index']} {r['state']} failed: {'; '.join(r['failures'])}")
    log_info("verify", f"{summary['n_states'] - summary['n_failed']}/{summary['n_states']} states passed, "
                       f"sk_pass at {summary['n_sk_pass']}/{summary['n_states']}")

    report = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "config": str(args.config),
        "seed": cfg.sampling.seed,
        "passed": summary["n_failed"] == 0,
        "summary": summary,
        "states": rows,
    }
    save_to_json(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAILURE


def cmd_simulate(args) -> int:
    mix, config = load_sim_config(args.config)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / SNAPSHOT_FILE, "w", newline="", encoding="utf-8") as fs, \
            open(outdir / DIAGNOSTICS_FILE, "w", newline="", encoding="utf-8") as fd:
        snap_writer = csv.DictWriter(fs, fieldnames=SNAPSHOT_HEADER)
        diag_writer = csv.DictWriter(fd, fieldnames=DIAGNOSTICS_HEADER)
        snap_writer.writeheader()
        diag_writer.writeheader()

        def on_output(snapshot):
            snap_writer.writerows(snapshot_rows(mix, snapshot))
            diag_writer.writerow(diagnostics_row(snapshot))

        try:
            run_simulation(mix, config, on_output)
        except StepFailure as e:
            log_error("simulate", f"solver aborted: {e}")
            return EXIT_FAILURE
    log_info("simulate", f"wrote {outdir / SNAPSHOT_FILE} and {outdir / DIAGNOSTICS_FILE}")
    return EXIT_OK


def cmd_eigen(args) -> int:
    data = load_yaml(args.config)
    mix = calibrated_mixture(data)
    try:
        tolerances = Tolerances.from_mapping(section(data, "tolerances", required=False))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"tolerances: {e}") from e
    state = state_from_values(parse_state_values(args.state))
    try:
        eig = eigen_structure(mix, state, tolerances)
    except PreconditionError as e:
        eq = is_equilibrium(mix, state, tolerances.eq_tol)
        log_error("eigen", f"{e}; residuals: mechanical={eq.mechanical_residual:.3e}, "
                           f"chemical={eq.chemical_residual:.3e}, kinetic={eq.kinetic_residual:.3e}")
        return EXIT_FAILURE

    print(f"{'field':<6}{'lambda':>14}  {'R (w1..w5)':<70}{'residual':>12}  character")
    for k, name in enumerate(FIELDS):
        vec = " ".join(f"{x:13.6g}" for x in eig.rvecs[:, k])
        print(f"{name:<6}{eig.lambdas[k]:>14.8g}  {vec:<70}{eig.residuals[k]:>12.3e}  {eig.character[k]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Barotropic SHTC two-fluid model: structure checks and 1D simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="sample equilibrium states and run every structure check")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--workers", type=int, default=1, help="process pool size (order of results is preserved)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run the finite-volume solver and write CSV output")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eigen", help="print the eigenstructure at one equilibrium state")
    p.add_argument("--config", required=True)
    p.add_argument("--state", required=True, help="alpha,c,rho,u,w")
    p.set_defaults(func=cmd_eigen)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        log_error(args.command, f"configuration error: {e}")
        return EXIT_USAGE
    except ShtcError as e:
        log_error(args.command, str(e))
        return EXIT_FAILURE
    except OSError as e:
        log_error(args.command, f"i/o error: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
