"""Experiment harness: scenario objectives, the tuning run with its output
files, the brute-force grid oracle, and plot-data emission.

All CSV output is written with repr-formatted floats so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, serialize_config
from .gaitqp import Weights
from .plant import RolloutResult, rollout
from .tuner import Objective, TuneHistory, outer_cost, tune


def desired_velocity_series(config: ExperimentConfig) -> np.ndarray:
    return np.tile(np.asarray(config.sim.v_des), (config.sim.n_plant_samples, 1))


def make_objective(label: str, config: ExperimentConfig) -> Objective:
    """Outer cost J(beta, gamma) for one disturbance scenario."""
    if label not in config.scenarios:
        raise ValueError(f"unknown scenario {label!r}")
    scenario = config.scenarios[label]
    sim = config.sim
    series = desired_velocity_series(config)
    lam, h_des, threshold = config.tuner.lam, config.h_des, config.tuner.threshold

    def objective(beta: float, gamma: float) -> tuple[float, bool]:
        result = rollout(Weights(1.0, beta, gamma), scenario, sim)
        return outer_cost(result, series, lam, h_des, threshold), result.fell

    return objective


@dataclass(frozen=True)
class RunReport:
    """Everything needed to audit one tuning run."""

    label: str
    history: TuneHistory
    best_delta: tuple[float, float]
    best_cost: float
    wallclock_sec: float
    artifacts: tuple[str, ...]
    config_text: str


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path, header: list[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_history_csv(history: TuneHistory, path) -> None:
    rows = (
        (s.eval_index, s.delta[0], s.delta[1], s.cost, s.fell, history.min_so_far[i])
        for i, s in enumerate(history.samples)
    )
    _write_csv(path, ["call_index", "beta", "gamma", "J", "fell", "min_so_far"], rows)


def read_history_csv(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [line.strip().split(",") for line in fh if line.strip()]
    cols = np.array(data, dtype=float).T if data else np.zeros((len(header), 0))
    return {name: cols[i] for i, name in enumerate(header)}


def write_trajectory_csv(result: RolloutResult, dt: float, path) -> None:
    rows = (
        (
            i * dt,
            result.com_traj[i, 0], result.com_traj[i, 1],
            result.measured_vel[i, 0], result.measured_vel[i, 1],
            result.zmp_traj[i, 0], result.zmp_traj[i, 1],
            result.rcof_traj[i], result.slip_traj[i], result.fell,
        )
        for i in range(len(result.com_traj))
    )
    _write_csv(path, ["t", "cx", "cy", "vx", "vy", "zx", "zy", "rcof", "slip", "fell"], rows)


def emit_plot_data(history: TuneHistory, path) -> None:
    """Cost per call and the running minimum, ready for the two usual panels."""
    if not history.samples:
        raise ValueError("history is empty")
    rows = (
        (s.eval_index, s.cost, history.min_so_far[i])
        for i, s in enumerate(history.samples)
    )
    _write_csv(path, ["call_index", "J", "min_so_far"], rows)


def run_scenario(label: str, config: ExperimentConfig, out_dir=None) -> RunReport:
    """Tune one scenario and persist history, best trajectory and report."""
    if label not in config.scenarios:
        raise ValueError(f"unknown scenario {label!r}; expected one of a, b, c, d")
    out_dir = config.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    history = tune(
        make_objective(label, config),
        budget=config.tuner.budget,
        seed=config.tuner.seed,
        init_points=config.tuner.init_points,
        bounds=config.bounds,
    )
    wallclock = time.perf_counter() - t0

    history_path = os.path.join(out_dir, f"history_{label}.csv")
    traj_path = os.path.join(out_dir, f"best_traj_{label}.csv")
    report_path = os.path.join(out_dir, f"report_{label}.json")
    write_history_csv(history, history_path)
    best = rollout(
        Weights(1.0, float(history.best_delta[0]), float(history.best_delta[1])),
        config.scenarios[label], config.sim)
    write_trajectory_csv(best, config.sim.params.dt_plant, traj_path)

    report = RunReport(
        label=label,
        history=history,
        best_delta=(float(history.best_delta[0]), float(history.best_delta[1])),
        best_cost=history.best_cost,
        wallclock_sec=wallclock,
        artifacts=(history_path, traj_path, report_path),
        config_text=serialize_config(config),
    )
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump({
            "label": report.label,
            "best_delta": list(report.best_delta),
            "best_cost": report.best_cost,
            "n_calls": len(history.samples),
            "wallclock_sec": report.wallclock_sec,
            "artifacts": list(report.artifacts),
            "config": report.config_text,
        }, fh, indent=2)
        fh.write("\n")
    return report


def grid_search(
    label: str, config: ExperimentConfig, grid_n: int, out_path=None
) -> tuple[np.ndarray, float, np.ndarray]:
    """Exhaustive objective evaluation on a grid_n x grid_n weight grid.

    Returns (best_delta, best_cost, table) with table rows
    (beta, gamma, J, fell) in row-major grid order.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    objective = make_objective(label, config)
    betas = np.linspace(config.bounds[0][0], config.bounds[0][1], grid_n)
    gammas = np.linspace(config.bounds[1][0], config.bounds[1][1], grid_n)
    table = np.empty((grid_n * grid_n, 4))
    for i, beta in enumerate(betas):
        for j, gamma in enumerate(gammas):
            cost, fell = objective(float(beta), float(gamma))
            table[i * grid_n + j] = (beta, gamma, cost, float(fell))
    k = int(np.argmin(table[:, 2]))
    if out_path is not None:
        _write_csv(out_path, ["beta", "gamma", "J", "fell"],
                   ((r[0], r[1], r[2], bool(r[3])) for r in table))
    return table[k, :2].copy(), float(table[k, 2]), table
