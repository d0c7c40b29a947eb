"""Linear inverted pendulum dynamics: a jerk-driven triple integrator per
horizontal axis, with output maps for the zero moment point and the required
coefficient of friction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LipParams:
    """Pendulum and discretization constants shared by planner and plant."""

    com_height: float = 0.8
    gravity: float = 9.81
    dt_plan: float = 0.1
    dt_plant: float = 0.01

    def __post_init__(self) -> None:
        if self.com_height <= 0.0:
            raise ValueError(f"com_height must be positive, got {self.com_height}")
        if self.gravity <= 0.0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        if not 0.0 < self.dt_plant <= self.dt_plan:
            raise ValueError(
                f"need 0 < dt_plant <= dt_plan, got {self.dt_plant}, {self.dt_plan}"
            )
        ratio = self.dt_plan / self.dt_plant
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("dt_plan must be an integer multiple of dt_plant")

    @property
    def omega(self) -> float:
        """Natural frequency sqrt(g/h) of the pendulum."""
        return math.sqrt(self.gravity / self.com_height)

    @property
    def substeps_per_plan(self) -> int:
        return round(self.dt_plan / self.dt_plant)


@dataclass(frozen=True)
class LipState:
    """CoM position, velocity and acceleration in the horizontal plane."""

    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray

    def __post_init__(self) -> None:
        for name in ("pos", "vel", "acc"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(2)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @staticmethod
    def rest(pos: tuple[float, float] = (0.0, 0.0)) -> "LipState":
        return LipState(np.asarray(pos, dtype=float), np.zeros(2), np.zeros(2))

    def as_axes(self) -> np.ndarray:
        """State as a 3x2 array, one column [pos, vel, acc] per axis."""
        return np.stack([self.pos, self.vel, self.acc])

    @staticmethod
    def from_axes(x: np.ndarray) -> "LipState":
        return LipState(x[0].copy(), x[1].copy(), x[2].copy())


@dataclass(frozen=True)
class AxisTransition:
    """Exact zero-order-hold discretization of one triple-integrator axis.

    state_matrix and input_vector advance [pos, vel, acc] under a jerk held
    constant over dt; zmp_row maps the state to the zero moment point.
    """

    dt: float
    state_matrix: np.ndarray
    input_vector: np.ndarray
    zmp_row: np.ndarray


def discretize(params: LipParams, dt: float) -> AxisTransition:
    """Closed-form transition of the jerk-driven triple integrator over dt."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    a = np.array([
        [1.0, dt, 0.5 * dt * dt],
        [0.0, 1.0, dt],
        [0.0, 0.0, 1.0],
    ])
    b = np.array([dt ** 3 / 6.0, 0.5 * dt * dt, dt])
    c = np.array([1.0, 0.0, -params.com_height / params.gravity])
    return AxisTransition(dt=dt, state_matrix=a, input_vector=b, zmp_row=c)


def step_state(state: LipState, jerk: np.ndarray, transition: AxisTransition) -> LipState:
    """Propagate both axes one step under piecewise-constant jerk (exact)."""
    jerk = np.asarray(jerk, dtype=float).reshape(2)
    x = transition.state_matrix @ state.as_axes() + np.outer(transition.input_vector, jerk)
    return LipState.from_axes(x)


def zmp_of(state: LipState, params: LipParams) -> np.ndarray:
    """Zero moment point z = c - (h/g) * c_ddot per axis."""
    return state.pos - (params.com_height / params.gravity) * state.acc


def rcof_of(state: LipState, params: LipParams) -> float:
    """Required coefficient of friction on flat ground: |c_ddot| / g.

    The tangential contact force under the pendulum model is m * c_ddot and
    the normal force is m * g, so this is the friction coefficient needed to
    realize the commanded CoM acceleration without slipping.
    """
    return float(np.linalg.norm(state.acc) / params.gravity)


def capture_point(state: LipState, params: LipParams) -> np.ndarray:
    """Instantaneous capture point pos + vel * sqrt(h/g)."""
    return state.pos + state.vel * math.sqrt(params.com_height / params.gravity)
