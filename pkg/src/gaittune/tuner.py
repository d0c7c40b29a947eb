"""Outer tuning loop: evaluate the plant cost at the max-margin corner and a
small Latin hypercube, then follow expected improvement until the budget is
spent. Also defines the plant cost itself (velocity tracking error plus the
fall penalty on terminal CoM height)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gp import Bounds2, DEFAULT_BOUNDS, denormalize_inputs, gp_fit, propose_next
from .plant import RolloutResult

# Recorded when an objective evaluation returns a non-finite cost.
PENALTY_CAP = 1e6

Objective = Callable[[float, float], tuple[float, bool]]


@dataclass(frozen=True)
class ObjectiveSample:
    """One evaluation of the outer cost at weights delta = (beta, gamma)."""

    delta: np.ndarray
    cost: float
    fell: bool
    eval_index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float).reshape(2))


@dataclass(frozen=True)
class TuneHistory:
    """Evaluation sequence with its running minimum."""

    samples: tuple[ObjectiveSample, ...]
    min_so_far: np.ndarray
    best_delta: np.ndarray

    @property
    def best_cost(self) -> float:
        return float(self.min_so_far[-1])


def outer_cost(
    result: RolloutResult,
    v_des_series: np.ndarray,
    lam: float,
    h_des: float,
    threshold: float,
) -> float:
    """Sum of squared velocity-tracking errors plus the fall penalty.

    Samples past a fall count the full desired velocity as error (the robot
    is down, measured velocity zero). The penalty is
    lam * max(|h_terminal - h_des| - threshold, 0).
    """
    if lam < 0.0 or threshold < 0.0:
        raise ValueError("lam and threshold must be nonnegative")
    series = np.asarray(v_des_series, dtype=float).reshape(-1, 2)
    meas = result.measured_vel
    k = min(len(meas), len(series))
    diff = meas[:k] - series[:k]
    err = float(np.sum(diff * diff)) + float(np.sum(series[k:] * series[k:]))
    phi = max(abs(result.h_terminal - h_des) - threshold, 0.0)
    return err + lam * phi


def latin_hypercube(n: int, rng: np.random.Generator) -> np.ndarray:
    """n stratified points in the unit square, one per row/column cell."""
    pts = np.empty((n, 2))
    for d in range(2):
        pts[:, d] = (rng.permutation(n) + rng.random(n)) / n
    return pts


def _call_rng(seed: int, call_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, call_index))))


def tune(
    objective: Objective,
    budget: int,
    seed: int,
    init_points: int = 5,
    bounds: Bounds2 = DEFAULT_BOUNDS,
) -> TuneHistory:
    """Run the weight search: the high-margin corner first, init_points - 1
    Latin-hypercube points, then expected-improvement proposals; exactly
    `budget` objective calls."""
    if init_points < 1:
        raise ValueError("init_points must be >= 1")
    if budget < init_points + 1:
        raise ValueError("budget must exceed init_points")

    samples: list[ObjectiveSample] = []
    min_so_far: list[float] = []
    best_idx = 0

    def evaluate(delta: np.ndarray) -> None:
        idx = len(samples)
        cost, fell = objective(float(delta[0]), float(delta[1]))
        cost = float(cost)
        if not np.isfinite(cost):
            cost, fell = PENALTY_CAP, True
        samples.append(ObjectiveSample(delta=delta, cost=cost, fell=bool(fell), eval_index=idx))
        nonlocal best_idx
        if cost < samples[best_idx].cost:
            best_idx = idx
        min_so_far.append(samples[best_idx].cost)

    # Start where both margins are widest, then space out the initial design.
    evaluate(np.array([bounds[0][1], bounds[1][1]]))
    if init_points > 1:
        lhs = latin_hypercube(init_points - 1, _call_rng(seed, 0))
        for row in denormalize_inputs(lhs, bounds):
            evaluate(row)

    while len(samples) < budget:
        deltas = np.array([s.delta for s in samples])
        costs = np.array([s.cost for s in samples])
        model = gp_fit(deltas, costs, bounds)
        x = propose_next(model, _call_rng(seed, len(samples)))
        evaluate(denormalize_inputs(x, bounds).reshape(2))

    return TuneHistory(
        samples=tuple(samples),
        min_so_far=np.asarray(min_so_far),
        best_delta=samples[best_idx].delta.copy(),
    )
