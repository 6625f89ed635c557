"""Command-line front end: scenario files, presets, artifact emission.

Subcommands::

    graphon-lqr run scenario.json [--compare-oracle] [--dt ...] [--out DIR]
    graphon-lqr example-vii [--dt ...] [--out DIR]
    graphon-lqr truncation-study scenario.json [--levels 0,1] [--out DIR]
    graphon-lqr oracle-check scenario.json [--out DIR]

Artifacts are plot-ready CSV/JSON files: ``gains.csv`` (t, L, M_1..M_d),
``trajectory.csv`` (t, x_1..x_n, u_1..u_n), ``cost.json`` and, for the
truncation study, ``truncation.csv``.  Runs are reproducible: the same
scenario and seed yield byte-identical artifacts, and the resolved
scenario is echoed next to them.

Exit codes: 0 success, 2 scenario/validation failure, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .graphon import StepGraphon, graphon_from_spec, sample_step_entries
from .lqr import (GainSchedule, LqrProblem, feedback_controller, synthesize_gains,
                  truncate_problem)
from .poly import CoeffPoly
from .sim import (build_step_system, evaluate_cost, initial_state, oracle_compare,
                  simulate, truncation_study)

_FLOAT_FMT = "%.17g"


@dataclass
class Scenario:
    """One experiment: problem data, kernel, network size and run options."""

    alpha0: float
    poly_b: list
    poly_q: list
    poly_p0: list
    horizon: float
    dt: float
    graphon: dict
    n: int | None = None
    controller: str = "optimal"
    seed: int = 0
    out: str = "out"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _field(raw: dict, name: str, kind, required: bool = True, default=None):
    if name not in raw:
        if required:
            raise ValueError(f"scenario field '{name}': missing")
        return default
    try:
        return kind(raw[name])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"scenario field '{name}': {exc}") from exc


def scenario_from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ValueError("scenario must be a JSON object")
    dt = _field(raw, "dt", float, required=False)
    scn = Scenario(
        alpha0=_field(raw, "alpha0", float),
        poly_b=[float(c) for c in raw.get("poly_b", [1.0])],
        poly_q=[float(c) for c in raw.get("poly_q", [1.0])],
        poly_p0=[float(c) for c in raw.get("poly_p0", [1.0])],
        horizon=_field(raw, "horizon", float),
        dt=0.0 if dt is None else dt,
        graphon=_field(raw, "graphon", dict),
        n=_field(raw, "n", int, required=False),
        controller=str(raw.get("controller", "optimal")),
        seed=_field(raw, "seed", int, required=False, default=0),
        out=str(raw.get("out", "out")),
    )
    if scn.dt < 0.0:
        raise ValueError(f"scenario field 'dt': must be positive, got {scn.dt}")
    if scn.dt == 0.0:
        scn.dt = 1e-3 * scn.horizon
    for name in ("alpha0", "horizon", "dt"):
        if not np.isfinite(getattr(scn, name)):
            raise ValueError(f"scenario field '{name}': must be finite")
    if scn.horizon <= 0.0:
        raise ValueError(f"scenario field 'horizon': must be positive, got {scn.horizon}")
    if scn.dt >= scn.horizon:
        raise ValueError(
            f"scenario field 'dt': must be smaller than the horizon, got {scn.dt}")
    return scn


def load_scenario(path: str) -> Scenario:
    if not os.path.exists(path):
        raise ValueError(f"scenario file not found: {path}")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw)


def parse_controller(mode: str, rank: int) -> int:
    """Truncation level encoded by the controller mode string."""
    if mode == "optimal":
        return rank
    if mode == "auxiliary_only":
        return 0
    match = re.fullmatch(r"truncated\((\d+)\)", mode.strip())
    if match:
        level = int(match.group(1))
        if level > rank:
            raise ValueError(
                f"scenario field 'controller': truncation level {level} "
                f"exceeds the kernel rank {rank}")
        return level
    raise ValueError(
        "scenario field 'controller': expected optimal | truncated(L) | "
        f"auxiliary_only, got {mode!r}")


def preset_example_vii() -> Scenario:
    """Sinusoidal-kernel showcase: 40 nodes, rank-2 coupling, horizon 1.

    Self drift 2, input polynomial 1 + s/2, state and terminal weights
    (1 - s)^2; the synthesis needs two distinct scalar Riccati solves.
    """
    return Scenario(
        alpha0=2.0,
        poly_b=[1.0, 0.5],
        poly_q=[1.0, -2.0, 1.0],
        poly_p0=[1.0, -2.0, 1.0],
        horizon=1.0,
        dt=1e-3,
        graphon={"type": "sinusoidal"},
        n=40,
        controller="optimal",
        seed=7,
        out="out",
    )


def build_experiment(scn: Scenario, base_dir: str = "."):
    """Materialize a scenario: problem, step system and initial state."""
    g = graphon_from_spec(scn.graphon, base_dir)
    if isinstance(g, StepGraphon):
        if scn.n is not None and scn.n != g.n:
            raise ValueError(
                f"scenario field 'n': {scn.n} does not match the "
                f"{g.n}x{g.n} coupling matrix")
        entries = g.entries
        kernel = g.spectral_decompose()
    else:
        if scn.n is None or scn.n < 1:
            raise ValueError("scenario field 'n': required for analytic graphons")
        kernel = g
        entries = sample_step_entries(g, scn.n)
    problem = LqrProblem(scn.alpha0, CoeffPoly(scn.poly_b), CoeffPoly(scn.poly_q),
                         CoeffPoly(scn.poly_p0), kernel, scn.horizon)
    system = build_step_system(entries, problem)
    x0 = initial_state(system.n, scn.seed)
    return problem, system, x0


# -- artifact writers ---------------------------------------------------------


def _write_csv(path: str, header: list[str], columns: np.ndarray):
    np.savetxt(path, columns, fmt=_FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")


def write_gains_csv(path: str, gains: GainSchedule):
    header = ["t", "L"] + [f"M_{l + 1}" for l in range(len(gains.eigen))]
    cols = np.column_stack([gains.grid, gains.aux.values]
                           + [c.values for c in gains.eigen])
    _write_csv(path, header, cols)


def write_trajectory_csv(path: str, traj):
    n = traj.states.shape[1]
    header = (["t"] + [f"x_{i + 1}" for i in range(n)]
              + [f"u_{i + 1}" for i in range(n)])
    _write_csv(path, header, np.column_stack([traj.grid, traj.states, traj.controls]))


def write_truncation_csv(path: str, rows):
    d = rows[0].measured_ratio.size if rows else 0
    header = (["L", "J_truncated", "J_optimal"]
              + [f"ratio_meas_{h + 1}" for h in range(d)]
              + [f"ratio_pred_{h + 1}" for h in range(d)])
    cols = np.array([[r.level, r.j_truncated, r.j_optimal,
                      *r.measured_ratio, *r.predicted_ratio] for r in rows])
    _write_csv(path, header, cols)


def write_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- subcommands --------------------------------------------------------------


def _prepare_out(scn: Scenario, out_override: str | None) -> str:
    out_dir = out_override or scn.out
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def run_scenario(scn: Scenario, base_dir: str = ".",
                 out_override: str | None = None,
                 compare_oracle: bool = False) -> dict:
    """Synthesize, simulate and emit all artifacts for one scenario."""
    problem, system, x0 = build_experiment(scn, base_dir)
    level = parse_controller(scn.controller, problem.d)
    gains = synthesize_gains(problem, scn.dt)
    if level == problem.d:
        controller = feedback_controller(problem, gains)
    else:
        trimmed = GainSchedule(aux=gains.aux, eigen=gains.eigen[:level])
        controller = feedback_controller(truncate_problem(problem, level), trimmed)
    traj = simulate(system, controller, x0, scn.horizon, scn.dt)
    cost = evaluate_cost(traj, system)
    payload = {
        "total": cost.total,
        "aux": cost.aux,
        "eigen": [float(v) for v in cost.eigen],
    }
    if compare_oracle:
        report = oracle_compare(system, problem, x0, scn.horizon, scn.dt)
        payload.update({
            "oracle_rel_gap": report.cost_rel_gap,
            "oracle_p_gap": report.p_gap,
            "oracle_state_gap": report.state_gap,
            "j_oracle": report.j_oracle,
        })
    out_dir = _prepare_out(scn, out_override)
    write_gains_csv(os.path.join(out_dir, "gains.csv"), gains)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), traj)
    write_json(os.path.join(out_dir, "cost.json"), payload)
    write_json(os.path.join(out_dir, "scenario.json"), scn.to_dict())
    line = (f"J={cost.total:.6f} (aux={cost.aux:.6f}, "
            f"eigen={float(cost.eigen.sum()):.6f}) n={system.n} d={problem.d} "
            f"controller={scn.controller}")
    if compare_oracle:
        line += f" oracle_rel_gap={payload['oracle_rel_gap']:.3e}"
    print(line)
    return payload


def run_truncation_study(scn: Scenario, levels, base_dir: str = ".",
                         out_override: str | None = None) -> list:
    problem, system, x0 = build_experiment(scn, base_dir)
    gains = synthesize_gains(problem, scn.dt)
    if levels is None:
        levels = list(range(problem.d + 1))
    rows = truncation_study(system, problem, x0, levels, scn.horizon, scn.dt)
    out_dir = _prepare_out(scn, out_override)
    write_truncation_csv(os.path.join(out_dir, "truncation.csv"), rows)
    write_gains_csv(os.path.join(out_dir, "gains.csv"), gains)
    write_json(os.path.join(out_dir, "scenario.json"), scn.to_dict())
    for r in rows:
        print(f"L={r.level} J={r.j_truncated:.6f} "
              f"(optimal {r.j_optimal:.6f}, inflation "
              f"{r.j_truncated - r.j_optimal:.3e})")
    return rows


def run_oracle_check(scn: Scenario, base_dir: str = ".",
                     out_override: str | None = None):
    problem, system, x0 = build_experiment(scn, base_dir)
    report = oracle_compare(system, problem, x0, scn.horizon, scn.dt)
    out_dir = _prepare_out(scn, out_override)
    write_json(os.path.join(out_dir, "cost.json"), {
        "total": report.j_decoupled,
        "j_oracle": report.j_oracle,
        "oracle_rel_gap": report.cost_rel_gap,
        "oracle_p_gap": report.p_gap,
        "oracle_state_gap": report.state_gap,
    })
    write_json(os.path.join(out_dir, "scenario.json"), scn.to_dict())
    print(f"J_dec={report.j_decoupled:.8f} J_oracle={report.j_oracle:.8f} "
          f"rel_gap={report.cost_rel_gap:.3e} P_gap={report.p_gap:.3e} "
          f"state_gap={report.state_gap:.3e}")
    return report


# -- argument parsing ---------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--dt", type=float, default=None, help="integration step")
    sub.add_argument("--horizon", type=float, default=None, help="time horizon T")
    sub.add_argument("--seed", type=int, default=None, help="initial-state seed")
    sub.add_argument("--out", type=str, default=None, help="artifact directory")


def _apply_overrides(scn: Scenario, args) -> Scenario:
    updates = {}
    if args.horizon is not None:
        updates["horizon"] = args.horizon
        if args.dt is None and scn.dt >= args.horizon:
            updates["dt"] = 1e-3 * args.horizon
    if args.dt is not None:
        updates["dt"] = args.dt
    if args.seed is not None:
        updates["seed"] = args.seed
    scn = dataclasses.replace(scn, **updates)
    if scn.dt >= scn.horizon:
        raise ValueError("scenario field 'dt': must be smaller than the horizon")
    return scn


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphon-lqr",
        description="LQR on kernel-coupled networks via spectral decoupling")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario", help="path to scenario JSON")
    p_run.add_argument("--compare-oracle", action="store_true",
                       help="also solve the matrix Riccati oracle and report gaps")
    _add_common(p_run)

    p_vii = subs.add_parser("example-vii",
                            help="run the sinusoidal 40-node preset")
    p_vii.add_argument("--compare-oracle", action="store_true")
    _add_common(p_vii)

    p_trunc = subs.add_parser("truncation-study",
                              help="sweep truncation levels for a scenario")
    p_trunc.add_argument("scenario", help="path to scenario JSON")
    p_trunc.add_argument("--levels", type=str, default=None,
                         help="comma-separated truncation levels (default: all)")
    _add_common(p_trunc)

    p_oracle = subs.add_parser("oracle-check",
                               help="compare decoupled synthesis with the matrix oracle")
    p_oracle.add_argument("scenario", help="path to scenario JSON")
    _add_common(p_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example-vii":
            scn = _apply_overrides(preset_example_vii(), args)
            run_scenario(scn, base_dir=".", out_override=args.out,
                         compare_oracle=args.compare_oracle)
        elif args.command == "run":
            scn = _apply_overrides(load_scenario(args.scenario), args)
            run_scenario(scn, base_dir=os.path.dirname(os.path.abspath(args.scenario)),
                         out_override=args.out, compare_oracle=args.compare_oracle)
        elif args.command == "truncation-study":
            scn = _apply_overrides(load_scenario(args.scenario), args)
            levels = ([int(v) for v in args.levels.split(",")]
                      if args.levels else None)
            run_truncation_study(scn, levels,
                                 base_dir=os.path.dirname(os.path.abspath(args.scenario)),
                                 out_override=args.out)
        elif args.command == "oracle-check":
            scn = _apply_overrides(load_scenario(args.scenario), args)
            run_oracle_check(scn, base_dir=os.path.dirname(os.path.abspath(args.scenario)),
                             out_override=args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
