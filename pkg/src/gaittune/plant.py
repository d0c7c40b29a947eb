"""Receding-horizon rollout of the gait QP against a perturbed pendulum plant.

The plant integrates the planned jerk exactly between replans and deviates
from the plan only through injected disturbances: external pushes add force
over mass to the commanded CoM acceleration, the true ground friction clamps
what the contact can transmit (the deficit integrates into support-foot
slip), and a capture-point test detects falls. Everything downstream of the
scenario seed is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .footsteps import FootGeometry, nominal_footsteps
from .gaitqp import Weights, build_qp
from .lipm import LipParams, LipState, capture_point, discretize
from .qpsolver import QpStatus, solve_qp

_LABELS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class Push:
    """One external push: a horizontal force held over a time window."""

    t_start: float
    duration: float
    force: np.ndarray

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError(f"push duration must be positive, got {self.duration}")
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(2))


@dataclass(frozen=True)
class DisturbanceScenario:
    """Timed pushes, the actual ground friction and the noise seed."""

    pushes: tuple[Push, ...] = ()
    mu_actual: float = 1.0
    sensor_noise_std: float = 0.01
    seed: int = 0
    label: str = "a"

    def __post_init__(self) -> None:
        if self.mu_actual < 0.0:
            raise ValueError(f"mu_actual must be nonnegative, got {self.mu_actual}")
        if self.sensor_noise_std < 0.0:
            raise ValueError("sensor_noise_std must be nonnegative")
        if self.label not in _LABELS:
            raise ValueError(f"label must be one of {_LABELS}, got {self.label!r}")
        starts = [p.t_start for p in self.pushes]
        if starts != sorted(starts):
            raise ValueError("pushes must be sorted by t_start")
        object.__setattr__(self, "pushes", tuple(self.pushes))


@dataclass(frozen=True)
class SimConfig:
    """Rollout horizon, plant constants and the planner settings it drives."""

    total_time: float = 8.0
    replan_period: float = 0.1
    mass: float = 80.0
    fall_distance: float = 0.5
    params: LipParams = field(default_factory=LipParams)
    geom: FootGeometry = field(default_factory=FootGeometry)
    v_des: tuple[float, float] = (0.3, 0.0)
    horizon_samples: int = 16
    mu_design: float = 1.0

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.fall_distance <= 0.0:
            raise ValueError("fall_distance must be positive")
        for base in (self.params.dt_plant, self.params.dt_plan):
            ratio = self.replan_period / base
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError(f"replan_period must be a positive multiple of {base}")
        spt = self.geom.samples_per_step(self.params.dt_plan)
        if self.horizon_samples <= spt:
            raise ValueError(
                "horizon_samples must exceed one step so the plan always "
                "contains an upcoming footstep")
        object.__setattr__(self, "v_des", (float(self.v_des[0]), float(self.v_des[1])))

    @property
    def n_plant_samples(self) -> int:
        return round(self.total_time / self.params.dt_plant)


@dataclass(frozen=True)
class RolloutResult:
    """Recorded plant trace. Arrays are truncated at the fall, if any."""

    measured_vel: np.ndarray
    com_traj: np.ndarray
    zmp_traj: np.ndarray
    rcof_traj: np.ndarray
    slip_traj: np.ndarray
    slip_accum: float
    fell: bool
    fall_time: float | None
    h_terminal: float


def apply_disturbance(t: float, scenario: DisturbanceScenario, mass: float) -> np.ndarray:
    """Push acceleration F/m summed over all windows containing t."""
    acc = np.zeros(2)
    for push in scenario.pushes:
        if push.t_start <= t < push.t_start + push.duration:
            acc += push.force / mass
    return acc


def friction_clamp(
    acc_cmd: np.ndarray, mu_actual: float, gravity: float
) -> tuple[np.ndarray, np.ndarray]:
    """Clamp the commanded CoM acceleration to what friction can transmit.

    Returns (achieved, deficit); the deficit is the unrealized part that the
    rollout integrates twice into support-foot slip.
    """
    acc_cmd = np.asarray(acc_cmd, dtype=float).reshape(2)
    limit = mu_actual * gravity
    norm = float(np.linalg.norm(acc_cmd))
    if norm <= limit:
        return acc_cmd.copy(), np.zeros(2)
    achieved = acc_cmd * (limit / norm) if norm > 0.0 else np.zeros(2)
    return achieved, acc_cmd - achieved


def detect_fall(state: LipState, support_pos: np.ndarray, config: SimConfig) -> bool:
    """True once the CoM or the capture point leaves the support vicinity
    (max-norm distance strictly beyond fall_distance)."""
    support_pos = np.asarray(support_pos, dtype=float).reshape(2)
    if np.max(np.abs(state.pos - support_pos)) > config.fall_distance:
        return True
    cp = capture_point(state, config.params)
    return bool(np.max(np.abs(cp - support_pos)) > config.fall_distance)


def rollout(weights: Weights, scenario: DisturbanceScenario, config: SimConfig) -> RolloutResult:
    """Closed-loop MPC rollout, deterministic in (weights, scenario, config).

    Every replan solves the gait QP from the current plant position and
    velocity with the command acceleration as control memory; between
    replans the planned jerk sequence is integrated exactly, so with no
    disturbance the plant reproduces the plan. Sensor noise perturbs only
    the recorded velocity, never the simulation. An infeasible QP counts as
    a fall at the replan time.
    """
    params, geom = config.params, config.geom
    dt = params.dt_plant
    n_sub = config.n_plant_samples
    replan_every = round(config.replan_period / dt)
    subs_per_plan = params.substeps_per_plan
    step_subs = geom.samples_per_step(params.dt_plan) * subs_per_plan
    n_plan = config.horizon_samples
    v_des = np.asarray(config.v_des, dtype=float)
    v_ref = np.tile(v_des, (n_plan, 1))
    tr = discretize(params, dt)
    a_sub, b_sub = tr.state_matrix, tr.input_vector
    hg = params.com_height / params.gravity

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(scenario.seed)))

    side = geom.side0
    # Slip is unobserved (the friction drop is unknown), so the planner keeps
    # using the support position it commanded while the true foot drifts by
    # the integrated deficit; swing feet land through the kinematic chain and
    # inherit the offset. Falls are judged against the true foot.
    support_belief = np.array([0.0, side.lateral_sign * geom.step_width / 2.0])
    drift = np.zeros(2)
    # The CoM starts over the stance foot: a centered start would force the
    # ZMP off the midline for the whole first step, which no plan can hold.
    cmd = LipState.rest(tuple(support_belief)).as_axes()  # command state, columns per axis
    dpos = np.zeros(2)               # true-state offsets accumulated since replan
    dvel = np.zeros(2)
    slip_vel = np.zeros(2)
    slip_accum = 0.0
    phase_sub = 0
    plan_jerks = None
    plan_feet = None
    plan_start = 0

    com_rec: list[np.ndarray] = []
    vel_rec: list[np.ndarray] = []
    zmp_rec: list[np.ndarray] = []
    rcof_rec: list[float] = []
    slip_rec: list[float] = []
    fell = False
    fall_time: float | None = None

    for i in range(n_sub):
        t = i * dt
        if i % replan_every == 0:
            init_state = LipState(cmd[0] + dpos, cmd[1] + dvel, cmd[2])
            template = nominal_footsteps(
                v_des, geom, (support_belief, side), n_plan, params.dt_plan,
                phase_samples=phase_sub // subs_per_plan)
            problem = build_qp(weights, init_state, v_ref, template, geom,
                               params, config.mu_design)
            solution = solve_qp(problem)
            if solution.status is QpStatus.INFEASIBLE:
                fell = True
                fall_time = t
                break
            plan_jerks, plan_feet = problem.var_map.decode(solution.x)
            plan_start = i
            cmd = init_state.as_axes()
            dpos = np.zeros(2)
            dvel = np.zeros(2)

        push = apply_disturbance(t, scenario, config.mass)
        acc_cmd = cmd[2] + push
        acc_ach, deficit = friction_clamp(acc_cmd, scenario.mu_actual, params.gravity)

        pos_true = cmd[0] + dpos
        vel_true = cmd[1] + dvel
        com_rec.append(pos_true)
        vel_rec.append(vel_true + scenario.sensor_noise_std * rng.standard_normal(2))
        zmp_rec.append(pos_true - hg * acc_ach)
        rcof_rec.append(float(np.linalg.norm(acc_cmd)) / params.gravity)
        slip_rec.append(slip_accum)

        # Exact command propagation plus a constant-acceleration correction
        # for whatever the disturbances changed this substep.
        delta_a = acc_ach - cmd[2]
        j = min((i - plan_start) // subs_per_plan, n_plan - 1)
        new_cmd = a_sub @ cmd + np.outer(b_sub, plan_jerks[j])
        dpos = dpos + dvel * dt + 0.5 * delta_a * dt * dt
        dvel = dvel + delta_a * dt
        cmd = new_cmd

        if deficit[0] != 0.0 or deficit[1] != 0.0:
            slip_inc = slip_vel * dt + 0.5 * deficit * dt * dt
            slip_vel = slip_vel + deficit * dt
            drift = drift + slip_inc
            slip_accum += float(np.linalg.norm(slip_inc))
        else:
            slip_vel = np.zeros(2)

        phase_sub += 1
        if phase_sub == step_subs:
            support_belief = plan_feet[0].copy()
            side = side.other
            phase_sub = 0

        after = LipState(cmd[0] + dpos, cmd[1] + dvel, cmd[2])
        if detect_fall(after, support_belief + drift, config):
            fell = True
            fall_time = (i + 1) * dt
            break

    return RolloutResult(
        measured_vel=np.array(vel_rec).reshape(-1, 2),
        com_traj=np.array(com_rec).reshape(-1, 2),
        zmp_traj=np.array(zmp_rec).reshape(-1, 2),
        rcof_traj=np.asarray(rcof_rec, dtype=float),
        slip_traj=np.asarray(slip_rec, dtype=float),
        slip_accum=slip_accum,
        fell=fell,
        fall_time=fall_time,
        h_terminal=0.0 if fell else params.com_height,
    )
