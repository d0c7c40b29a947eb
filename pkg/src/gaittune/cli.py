"""Command-line front end: single plans and rollouts, the tuning loop, the
grid-search oracle and plot-data emission.

Exit codes: 0 on success, 2 on usage or configuration errors, 3 on runtime
numerical failures.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, ExperimentConfig, default_config, parse_config, with_overrides
from .footsteps import nominal_footsteps
from .gaitqp import Weights, build_qp, extract_plan
from .gp import GpFitError
from .harness import (desired_velocity_series, emit_plot_data, grid_search, make_objective,
                      read_history_csv, run_scenario, write_trajectory_csv, _write_csv)
from .lipm import LipState
from .plant import rollout
from .qpsolver import QpStatus, solve_qp
from .tuner import ObjectiveSample, TuneHistory


def _load_config(args) -> ExperimentConfig:
    config = parse_config(args.config) if args.config else default_config()
    if getattr(args, "out", None):
        config = ExperimentConfig(
            sim=config.sim, scenarios=config.scenarios, tuner=config.tuner,
            bounds=config.bounds, output_dir=args.out)
    return config


def _weights(args) -> Weights:
    return Weights(1.0, args.beta, args.gamma)


def _cmd_plan(args) -> int:
    config = _load_config(args)
    sim = config.sim
    geom, params = sim.geom, sim.params
    support_pos = np.array([0.0, geom.side0.lateral_sign * geom.step_width / 2.0])
    template = nominal_footsteps(np.asarray(sim.v_des), geom, (support_pos, geom.side0),
                                 sim.horizon_samples, params.dt_plan)
    v_ref = np.tile(np.asarray(sim.v_des), (sim.horizon_samples, 1))
    init = LipState.rest(tuple(support_pos))
    problem = build_qp(_weights(args), init, v_ref, template, geom,
                       params, sim.mu_design)
    solution = solve_qp(problem)
    if solution.status is QpStatus.INFEASIBLE:
        print("plan QP infeasible", file=sys.stderr)
        return 3
    plan = extract_plan(solution, problem, init, params)
    os.makedirs(config.output_dir, exist_ok=True)
    plan_path = os.path.join(config.output_dir, "plan.csv")
    feet_path = os.path.join(config.output_dir, "plan_footsteps.csv")
    rows = (
        (
            (i + 1) * params.dt_plan,
            plan.jerks[i, 0], plan.jerks[i, 1],
            s.pos[0], s.pos[1], s.vel[0], s.vel[1], s.acc[0], s.acc[1],
            plan.predicted_zmp[i, 0], plan.predicted_zmp[i, 1], plan.predicted_rcof[i],
        )
        for i, s in enumerate(plan.predicted_com)
    )
    _write_csv(plan_path,
               ["t", "jx", "jy", "cx", "cy", "vx", "vy", "ax", "ay", "zx", "zy", "rcof"],
               rows)
    _write_csv(feet_path, ["step", "x", "y"],
               ((k, f[0], f[1]) for k, f in enumerate(plan.footsteps)))
    print(f"objective {solution.objective!r}, kkt {solution.kkt_residual:.2e}, "
          f"wrote {plan_path} and {feet_path}")
    return 0


def _cmd_rollout(args) -> int:
    config = _load_config(args)
    scenario = config.scenarios[args.scenario]
    result = rollout(_weights(args), scenario, config.sim)
    from .tuner import outer_cost  # local import avoids cycles at module load
    cost = outer_cost(result, desired_velocity_series(config), config.tuner.lam,
                      config.h_des, config.tuner.threshold)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, f"traj_{args.scenario}.csv")
    write_trajectory_csv(result, config.sim.params.dt_plant, path)
    fate = f"fell at t={result.fall_time!r}" if result.fell else "completed"
    print(f"scenario {args.scenario}: {fate}, J={cost!r}, slip={result.slip_accum!r}, "
          f"wrote {path}")
    return 0


def _cmd_tune(args) -> int:
    config = _load_config(args)
    overrides = {}
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = with_overrides(config, **overrides)
    report = run_scenario(args.scenario, config)
    print(f"scenario {args.scenario}: best J={report.best_cost!r} at "
          f"beta={report.best_delta[0]!r} gamma={report.best_delta[1]!r} "
          f"({len(report.history.samples)} calls, {report.wallclock_sec:.1f}s)")
    for path in report.artifacts:
        print(f"  wrote {path}")
    return 0


def _cmd_grid(args) -> int:
    config = _load_config(args)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, f"grid_{args.scenario}.csv")
    best_delta, best_cost, table = grid_search(args.scenario, config, args.grid_n, path)
    print(f"scenario {args.scenario}: grid best J={best_cost!r} at "
          f"beta={best_delta[0]!r} gamma={best_delta[1]!r} "
          f"({len(table)} evaluations), wrote {path}")
    return 0


def _cmd_report(args) -> int:
    cols = read_history_csv(args.history)
    n = len(cols["call_index"])
    if n == 0:
        print("history file is empty", file=sys.stderr)
        return 3
    samples = tuple(
        ObjectiveSample(
            delta=np.array([cols["beta"][i], cols["gamma"][i]]),
            cost=float(cols["J"][i]), fell=bool(cols["fell"][i]), eval_index=i)
        for i in range(n)
    )
    best = int(np.argmin([s.cost for s in samples]))
    history = TuneHistory(samples=samples, min_so_far=cols["min_so_far"],
                          best_delta=samples[best].delta)
    out = args.out or os.path.dirname(args.history) or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "plot_data.csv")
    emit_plot_data(history, path)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaittune",
        description="Walking-gait QP with simulation-in-the-loop weight tuning")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True, weights=False):
        p.add_argument("--config", help="config file (defaults apply if omitted)")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        if scenario:
            p.add_argument("--scenario", choices=["a", "b", "c", "d"], default="a")
        if weights:
            p.add_argument("--beta", type=float, default=0.0)
            p.add_argument("--gamma", type=float, default=0.0)

    p = sub.add_parser("plan", help="solve one gait QP and dump the plan")
    common(p, scenario=False, weights=True)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("rollout", help="simulate one scenario rollout")
    common(p, weights=True)
    p.set_defaults(func=_cmd_rollout)

    p = sub.add_parser("tune", help="run the weight search for a scenario")
    common(p)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("grid", help="brute-force objective grid (oracle)")
    common(p)
    p.add_argument("--grid-n", type=int, default=21)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("report", help="emit plot data from a history CSV")
    p.add_argument("--history", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, GpFitError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
