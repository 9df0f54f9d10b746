"""Command line entry point.

Subcommands build a grid from a TOML config (or the built-in defaults),
run one of the verification or evolution experiments, and write a JSON
report plus CSV tables.  Outputs are byte-identical for identical config
and seed; pass --stamp to embed a wall-clock timestamp.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver non-convergence.
"""

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .evolve import SolverConfig, contraction_gap, linear_exact, run
from .grid import BallGrid, ConfigError, dual_norm_vector, shell
from .harmonic import (
    GridFunction,
    character_function,
    indicator_function,
    random_function,
)
from .monotone import PowerLawNonlinearity, ProxConvergenceError
from .sobolev import norm_report
from .verify import TOLERANCES, run_battery
from .vladimirov import VladimirovParams, arbitrate_symbols, eigenfunction_psi0

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_FAILED = 3


def _report_skeleton(command: str, cfg: ExperimentConfig, stamp: bool) -> dict:
    echo = cfg.as_dict()
    echo.pop("out", None)  # output location does not influence any result
    meta = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": echo,
        "versions": {"padicpme": __version__, "numpy": np.__version__},
    }
    if stamp:
        import datetime

        meta["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return meta


def _jsonify(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _write_json(report: dict, out_dir: Path, name: str, quiet: bool) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(_jsonify(report), indent=2, sort_keys=True) + "\n")
    if not quiet:
        print(f"wrote {path}")
    return path


def _write_csv(rows: list[list], header: list[str], out_dir: Path, name: str, quiet: bool) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    if not quiet:
        print(f"wrote {path}")
    return path


def _initial_condition(cfg: ExperimentConfig, grid: BallGrid) -> GridFunction:
    spec = cfg.initial
    if spec == "psi0":
        return eigenfunction_psi0(grid)
    if spec == "random":
        return random_function(grid, np.random.default_rng(cfg.seed), real=True)
    if spec == "indicator" or spec.startswith("indicator:"):
        a = int(spec.split(":", 1)[1]) if ":" in spec else 0
        return indicator_function(grid, a)
    if spec.startswith("character:"):
        return character_function(grid, int(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        path = Path(spec.split(":", 1)[1])
        if not path.exists():
            raise ConfigError(f"initial-condition file not found: {path}")
        values = json.loads(path.read_text())
        return GridFunction(grid, np.asarray(values, dtype=np.float64))
    raise ConfigError(
        f"unknown initial condition {spec!r}; expected psi0, random, "
        "indicator[:a], character:b or file:path"
    )


def cmd_grid_info(cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool) -> int:
    grid = BallGrid(cfg.p, cfg.N, cfg.K)
    params = VladimirovParams(grid, cfg.alpha)
    radii = [float(grid.p) ** (grid.N - v) for v in range(grid.N + grid.K)]
    shells = {f"{r:g}": int(len(shell(grid, r))) for r in radii}
    shells["0"] = 1
    dn = dual_norm_vector(grid)
    hist = {f"{v:g}": int(np.sum(dn == v)) for v in np.unique(dn)}
    report = _report_skeleton("grid-info", cfg, stamp)
    report["results"] = {
        "M": grid.M,
        "haar_weight": grid.haar_weight,
        "total_measure": grid.measure,
        "lambda0": params.lambda0,
        "kernel_constant": params.a_p,
        "shell_census": shells,
        "dual_norm_histogram": hist,
    }
    _write_json(report, out_dir, "grid_info.json", quiet)
    if not quiet:
        print(f"M={grid.M}, lambda0={params.lambda0:.12g}")
    return EXIT_OK


def cmd_symbol_verify(cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool) -> int:
    grid = BallGrid(cfg.p, cfg.N, cfg.K)
    params = VladimirovParams(grid, cfg.alpha)
    report_obj = arbitrate_symbols(params, tol=TOLERANCES["arbitration"])
    names = list(report_obj.candidates)
    dn = dual_norm_vector(grid)
    rows = []
    for b in range(grid.M):
        row = [b, f"{dn[b]:.17g}", f"{report_obj.brute[b]:.17g}"]
        for name in names:
            cand = report_obj.candidates[name][b]
            row += [f"{cand:.17g}", f"{abs(report_obj.brute[b] - cand):.17g}"]
        rows.append(row)
    header = ["b", "dual_norm", "brute_symbol"]
    for name in names:
        header += [name, f"gap_{name}"]
    _write_csv(rows, header, out_dir, "symbol_table.csv", quiet)

    report = _report_skeleton("symbol-verify", cfg, stamp)
    report["results"] = {
        "winner": report_obj.winner,
        "matches": report_obj.matches,
        "max_gaps": report_obj.gaps,
        "tolerance": report_obj.tolerance,
        "unique_match": report_obj.unique,
    }
    _write_json(report, out_dir, "symbol_verify.json", quiet)
    if not quiet:
        print(f"arbitration winner: {report_obj.winner}")
    return EXIT_OK if report_obj.unique else EXIT_VERIFY_FAILED


def cmd_norms(cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool) -> int:
    grid = BallGrid(cfg.p, cfg.N, cfg.K)
    params = VladimirovParams(grid, cfg.alpha)
    f = _initial_condition(cfg, grid)
    if not 0.0 < cfg.alpha < 1.0:
        raise ConfigError("the norms command needs alpha in (0, 1) for the seminorm scale")
    rep = norm_report(f, params, cfg.alpha)
    report = _report_skeleton("norms", cfg, stamp)
    report["results"] = {
        "l2": rep.l2,
        "h_alpha": rep.h_alpha,
        "ags_seminorm": rep.ags,
        "ags_multiplier_form": rep.ags_multiplier_form,
        "h1": rep.h1,
        "hminus1": rep.hminus1,
        "h1_full": rep.h1_full,
        "hminus1_full": rep.hminus1_full,
        "C1_bound": rep.C1_bound,
        "C2_exact": rep.C2_exact,
        "equivalence_envelope": {k: list(v) for k, v in rep.envelope.items()},
        "ags_identity_ratio": (
            rep.ags / rep.ags_multiplier_form if rep.ags_multiplier_form > 0 else 1.0
        ),
    }
    _write_json(report, out_dir, "norms.json", quiet)
    return EXIT_OK


def _trajectory_rows(traj) -> list[list]:
    rows = []
    for i, t in enumerate(traj.times):
        rows.append(
            [
                f"{t:.17g}",
                f"{traj.l2[i]:.17g}",
                f"{traj.hminus1[i]:.17g}",
                f"{traj.psi[i]:.17g}",
                f"{traj.zero_mode[i].real:.17g}",
                f"{traj.zero_mode[i].imag:.17g}",
                int(traj.newton_iterations[i]),
                f"{traj.residuals[i]:.17g}",
            ]
        )
    return rows


_TRAJ_HEADER = ["t", "l2", "hminus1", "psi", "zero_mode_re", "zero_mode_im", "newton_iters", "residual"]


def cmd_solve(cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool) -> int:
    grid = BallGrid(cfg.p, cfg.N, cfg.K)
    params = VladimirovParams(grid, cfg.alpha)
    nl = PowerLawNonlinearity(cfg.m)
    u0 = _initial_condition(cfg, grid)
    try:
        u0 = GridFunction(grid, u0.real_values())
    except ValueError:
        raise ConfigError(
            f"initial condition {cfg.initial!r} is not real-valued; the nonlinear "
            "flow needs a real initial state"
        )
    scfg = SolverConfig(
        tau=cfg.tau,
        T=cfg.T,
        prox_tol=cfg.prox_tol,
        newton_tol=cfg.newton_tol,
        mu_min=cfg.mu_min,
        max_newton=cfg.max_newton,
    )
    traj = run(u0, scfg, params, nl)
    _write_csv(_trajectory_rows(traj), _TRAJ_HEADER, out_dir, "trajectory.csv", quiet)
    report = _report_skeleton("solve", cfg, stamp)
    report["results"] = {
        "steps": len(traj.times) - 1,
        "final_time": traj.times[-1],
        "final_l2": traj.l2[-1],
        "final_hminus1": traj.hminus1[-1],
        "final_psi": traj.psi[-1],
        "max_residual": float(np.max(traj.residuals)),
        "max_constraint_gap": float(np.max(traj.constraint_gaps)),
        "psi_monotone": bool(np.all(np.diff(traj.psi) <= TOLERANCES["lyapunov_step"])),
        "failure": traj.failure,
    }
    _write_json(report, out_dir, "solve.json", quiet)
    return EXIT_OK if traj.ok else EXIT_SOLVER_FAILED


def cmd_contraction(cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool) -> int:
    grid = BallGrid(cfg.p, cfg.N, cfg.K)
    params = VladimirovParams(grid, cfg.alpha)
    nl = PowerLawNonlinearity(cfg.m)
    scfg = SolverConfig(tau=cfg.tau, T=cfg.T, prox_tol=cfg.prox_tol)
    rng = np.random.default_rng(cfg.seed)
    gaps = []
    try:
        for _ in range(20):
            u0 = random_function(grid, rng, real=True)
            v0 = random_function(grid, rng, real=True)
            gaps.append(contraction_gap(u0, v0, scfg, params, nl))
    except ProxConvergenceError as exc:
        report = _report_skeleton("contraction", cfg, stamp)
        report["results"] = {"failure": str(exc), "gaps": gaps}
        _write_json(report, out_dir, "contraction.json", quiet)
        return EXIT_SOLVER_FAILED
    worst = max(gaps)
    report = _report_skeleton("contraction", cfg, stamp)
    report["results"] = {
        "pairs": len(gaps),
        "max_step_increase": worst,
        "tolerance": TOLERANCES["contraction"],
        "passed": worst <= TOLERANCES["contraction"],
    }
    _write_json(report, out_dir, "contraction.json", quiet)
    return EXIT_OK if worst <= TOLERANCES["contraction"] else EXIT_VERIFY_FAILED


def cmd_convergence(cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool) -> int:
    grid = BallGrid(cfg.p, cfg.N, cfg.K)
    params = VladimirovParams(grid, cfg.alpha)
    rng = np.random.default_rng(cfg.seed)
    u0 = random_function(grid, rng, real=True)
    nl = PowerLawNonlinearity(1.0)
    taus = [cfg.tau / 2**i for i in range(4)]
    rows = []
    errors = []
    for tau in taus:
        scfg = SolverConfig(tau=tau, T=cfg.T, prox_tol=cfg.prox_tol)
        traj = run(u0, scfg, params, nl)
        if not traj.ok:
            return EXIT_SOLVER_FAILED
        err = float(np.max(np.abs(traj.states[-1].values - linear_exact(u0, cfg.T, params).values)))
        errors.append(err)
        rows.append([f"{tau:.17g}", f"{err:.17g}"])
    slope = float(np.polyfit(np.log(taus), np.log(errors), 1)[0])
    _write_csv(rows, ["tau", "max_error_vs_exact"], out_dir, "convergence.csv", quiet)
    report = _report_skeleton("convergence", cfg, stamp)
    ok = TOLERANCES["order_low"] <= slope <= TOLERANCES["order_high"]
    report["results"] = {
        "taus": taus,
        "errors": errors,
        "measured_order": slope,
        "order_window": [TOLERANCES["order_low"], TOLERANCES["order_high"]],
        "passed": ok,
    }
    _write_json(report, out_dir, "convergence.json", quiet)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_verify(
    cfg: ExperimentConfig, out_dir: Path, quiet: bool, stamp: bool, corruption: str | None
) -> int:
    battery = run_battery(
        cfg.p,
        cfg.N,
        cfg.K,
        cfg.alpha,
        cfg.m,
        cfg.tau,
        cfg.T,
        seed=cfg.seed,
        corruption=corruption,
        suites=cfg.suites,
    )
    report = _report_skeleton("verify", cfg, stamp)
    report["results"] = battery
    _write_json(report, out_dir, "verify.json", quiet)
    if not quiet:
        for suite in battery["suites"]:
            status = "pass" if suite["passed"] else "FAIL"
            print(f"[{status}] {suite['suite']}")
            if not suite["passed"]:
                for check in suite["checks"]:
                    if not check["passed"]:
                        print(
                            f"    {check['name']}: measured {check['measured']:g} "
                            f"vs tolerance {check['tolerance']:g}"
                        )
    return EXIT_OK if battery["all_passed"] else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicpme",
        description="Fractional diffusion laboratory on a p-adic ball grid.",
    )
    parser.add_argument("--config", type=str, default=None, help="TOML config file")
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    parser.add_argument("--stamp", action="store_true", help="embed a wall-clock timestamp")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("grid-info", help="print grid, spectrum and shell census")
    sub.add_parser("symbol-verify", help="arbitrate the multiplier closed forms")
    sub.add_parser("norms", help="all norm families of the configured function")
    sub.add_parser("solve", help="integrate the nonlinear flow")
    sub.add_parser("contraction", help="contraction gap over random trajectory pairs")
    sub.add_parser("convergence", help="step-refinement study against the exact linear flow")
    verify = sub.add_parser("verify", help="run the full verification battery")
    verify.add_argument(
        "--corrupt",
        choices=["symbol", "haar"],
        default=None,
        help="negative control: corrupt a table by 1%% and expect failure",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        out_dir = Path(cfg.out)
        if args.command == "grid-info":
            return cmd_grid_info(cfg, out_dir, args.quiet, args.stamp)
        if args.command == "symbol-verify":
            return cmd_symbol_verify(cfg, out_dir, args.quiet, args.stamp)
        if args.command == "norms":
            return cmd_norms(cfg, out_dir, args.quiet, args.stamp)
        if args.command == "solve":
            return cmd_solve(cfg, out_dir, args.quiet, args.stamp)
        if args.command == "contraction":
            return cmd_contraction(cfg, out_dir, args.quiet, args.stamp)
        if args.command == "convergence":
            return cmd_convergence(cfg, out_dir, args.quiet, args.stamp)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir, args.quiet, args.stamp, args.corrupt)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except ProxConvergenceError as exc:
        print(f"solver failed to converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILED


if __name__ == "__main__":
    sys.exit(main())
