"""Nominal footstep references, per-sample support timeline, reachable-area
boxes for upcoming steps, and foot-centered ZMP references.

Support exchange is instantaneous (single-foot rectangles, no double-support
phase); the first step of every plan is the current stance foot and is never
a decision variable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT

    @property
    def lateral_sign(self) -> float:
        """+1 for the left foot, -1 for the right (y points left)."""
        return 1.0 if self is Side.LEFT else -1.0


@dataclass(frozen=True)
class FootGeometry:
    """Foot rectangle, lateral spacing, step timing and reach limits."""

    half_length: float = 0.10
    half_width: float = 0.05
    step_width: float = 0.2
    step_time: float = 0.8
    side0: Side = Side.RIGHT
    reach_half_x: float = 0.4
    reach_half_y: float = 0.15

    def __post_init__(self) -> None:
        for name in ("half_length", "half_width", "step_width", "step_time",
                     "reach_half_x", "reach_half_y"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    def samples_per_step(self, dt_plan: float) -> int:
        ratio = self.step_time / dt_plan
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("step_time must be an integer multiple of dt_plan")
        return round(ratio)


@dataclass(frozen=True)
class FootstepSlot:
    """One support interval: nominal position, side and sample range."""

    pos: np.ndarray
    side: Side
    start_index: int
    end_index: int  # exclusive

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float).reshape(2))


@dataclass(frozen=True)
class FootstepPlanTemplate:
    """Ordered support intervals tiling [0, n_samples); sides alternate.

    steps[0] is the current stance foot; steps[1:] are the upcoming steps
    whose positions become QP decision variables.
    """

    steps: tuple[FootstepSlot, ...]
    n_samples: int

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("template needs at least one step")
        cursor = 0
        for k, s in enumerate(self.steps):
            if s.start_index != cursor or s.end_index <= s.start_index:
                raise ValueError("support intervals must tile the horizon without gaps")
            if k > 0 and s.side is self.steps[k - 1].side:
                raise ValueError("consecutive steps must alternate sides")
            cursor = s.end_index
        if cursor != self.n_samples:
            raise ValueError("support intervals must cover exactly n_samples")

    @property
    def n_upcoming(self) -> int:
        """Number of footstep decision variables (everything past the stance)."""
        return len(self.steps) - 1


@dataclass(frozen=True)
class ReachableBox:
    """Axis-aligned box bounding the next footstep position."""

    center: np.ndarray
    half_extent: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        object.__setattr__(self, "half_extent",
                           np.asarray(self.half_extent, dtype=float).reshape(2))
        if not np.all(self.half_extent > 0.0):
            raise ValueError("half_extent must be positive componentwise")

    def contains(self, point: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(np.asarray(point) - self.center) <= self.half_extent + tol))


def nominal_footsteps(
    v_des: np.ndarray,
    geom: FootGeometry,
    current_support: tuple[np.ndarray, Side],
    n_samples: int,
    dt_plan: float,
    phase_samples: int = 0,
) -> FootstepPlanTemplate:
    """Tile the horizon with support intervals and nominal step positions.

    The stance interval covers whatever remains of the current step
    (step_time minus phase); later steps advance by v_des * step_time
    sagittally and alternate +-step_width/2 about the CoM path laterally.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    v_des = np.asarray(v_des, dtype=float).reshape(2)
    spt = geom.samples_per_step(dt_plan)
    if not 0 <= phase_samples < spt:
        raise ValueError(f"phase_samples must lie in [0, {spt})")

    pos0, side0 = current_support
    pos0 = np.asarray(pos0, dtype=float).reshape(2)
    # CoM path reference: stance foot sits lateral_sign * step_width/2 off it.
    path_y0 = pos0[1] - side0.lateral_sign * geom.step_width / 2.0

    steps: list[FootstepSlot] = []
    start = 0
    end = min(spt - phase_samples, n_samples)
    steps.append(FootstepSlot(pos0, side0, start, end))
    side = side0
    pos = pos0
    k = 0
    while end < n_samples:
        k += 1
        side = side.other
        pos = np.array([
            pos0[0] + k * v_des[0] * geom.step_time,
            path_y0 + k * v_des[1] * geom.step_time + side.lateral_sign * geom.step_width / 2.0,
        ])
        start = end
        end = min(start + spt, n_samples)
        steps.append(FootstepSlot(pos, side, start, end))
    return FootstepPlanTemplate(steps=tuple(steps), n_samples=n_samples)


def support_timeline(
    template: FootstepPlanTemplate, geom: FootGeometry
) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """Per-sample (step ordinal, nominal support position, box half-extents).

    Ordinal 0 is the fixed stance foot; ordinal k >= 1 refers to upcoming
    step k (decision variable k-1).
    """
    half = np.array([geom.half_length, geom.half_width])
    timeline: list[tuple[int, np.ndarray, np.ndarray]] = []
    for ordinal, slot in enumerate(template.steps):
        for _ in range(slot.start_index, slot.end_index):
            timeline.append((ordinal, slot.pos, half))
    return timeline


def support_selection(template: FootstepPlanTemplate) -> tuple[np.ndarray, np.ndarray]:
    """Linear maps from footstep variables to the per-sample support position.

    Returns (stance_mask, selector): support_pos[i] = stance_mask[i] * stance
    + selector[i] @ upcoming_steps, with stance_mask an (n,) 0/1 vector and
    selector an (n, n_upcoming) 0/1 matrix.
    """
    n = template.n_samples
    m = template.n_upcoming
    stance_mask = np.zeros(n)
    selector = np.zeros((n, m))
    for ordinal, slot in enumerate(template.steps):
        if ordinal == 0:
            stance_mask[slot.start_index:slot.end_index] = 1.0
        else:
            selector[slot.start_index:slot.end_index, ordinal - 1] = 1.0
    return stance_mask, selector


def reachable_bounds(prev_step: np.ndarray, side: Side, geom: FootGeometry) -> ReachableBox:
    """Reachable box for a step of `side`, placed from the previous stance."""
    prev_step = np.asarray(prev_step, dtype=float).reshape(2)
    center = prev_step + np.array([0.0, side.lateral_sign * geom.step_width])
    return ReachableBox(center, np.array([geom.reach_half_x, geom.reach_half_y]))


def zmp_reference(template: FootstepPlanTemplate) -> np.ndarray:
    """Per-sample desired ZMP at the center of the nominal support foot."""
    ref = np.zeros((template.n_samples, 2))
    for slot in template.steps:
        ref[slot.start_index:slot.end_index] = slot.pos
    return ref
