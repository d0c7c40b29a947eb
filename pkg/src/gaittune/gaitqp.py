"""Condensed walking QP over per-axis jerk sequences and footstep positions.

The cost trades velocity tracking against two robustness margins: keeping the
ZMP at the support-foot center and keeping the required friction low. States
are eliminated through exact prediction matrices, so the decision vector is
x = [jerk_x (N), jerk_y (N), foot_x (M), foot_y (M)].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .footsteps import FootGeometry, FootstepPlanTemplate, reachable_bounds, support_selection
from .lipm import LipParams, LipState, discretize, rcof_of, step_state, zmp_of
from .qpsolver import QpProblem, QpSolution, QpStatus

# Keeps the Hessian positive definite when beta = gamma = 0 leaves the
# footstep variables otherwise unweighted.
_HESSIAN_REG = 1e-9


@dataclass(frozen=True)
class Weights:
    """Cost weights: alpha on velocity tracking (fixed to 1 when tuning),
    beta on ZMP centering, gamma on squared required friction."""

    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.beta <= 1000.0:
            raise ValueError(f"beta must lie in [0, 1000], got {self.beta}")
        if not 0.0 <= self.gamma <= 1000.0:
            raise ValueError(f"gamma must lie in [0, 1000], got {self.gamma}")


@dataclass(frozen=True)
class VarMap:
    """Layout of the decision vector and the constraint rows."""

    n_samples: int
    n_steps: int

    @property
    def jerk_x(self) -> slice:
        return slice(0, self.n_samples)

    @property
    def jerk_y(self) -> slice:
        return slice(self.n_samples, 2 * self.n_samples)

    @property
    def foot_x(self) -> slice:
        return slice(2 * self.n_samples, 2 * self.n_samples + self.n_steps)

    @property
    def foot_y(self) -> slice:
        return slice(2 * self.n_samples + self.n_steps,
                     2 * self.n_samples + 2 * self.n_steps)

    @property
    def n_vars(self) -> int:
        return 2 * self.n_samples + 2 * self.n_steps

    def decode(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Split a solution vector into jerks (N, 2) and footsteps (M, 2)."""
        jerks = np.stack([x[self.jerk_x], x[self.jerk_y]], axis=1)
        feet = np.stack([x[self.foot_x], x[self.foot_y]], axis=1)
        return jerks, feet


@dataclass(frozen=True)
class PredictionMatrices:
    """Free response (S) and forced response (U) of stacked samples 1..N."""

    s_pos: np.ndarray
    s_vel: np.ndarray
    s_acc: np.ndarray
    s_zmp: np.ndarray
    u_pos: np.ndarray
    u_vel: np.ndarray
    u_acc: np.ndarray
    u_zmp: np.ndarray


@lru_cache(maxsize=32)
def prediction_matrices(params: LipParams, n_samples: int) -> PredictionMatrices:
    """Condensation matrices for the jerk-driven triple integrator."""
    tr = discretize(params, params.dt_plan)
    a, b = tr.state_matrix, tr.input_vector
    powers = np.empty((n_samples, 3, 3))
    powers[0] = a
    for i in range(1, n_samples):
        powers[i] = a @ powers[i - 1]
    forced = np.empty((n_samples, 3))
    forced[0] = b
    for i in range(1, n_samples):
        forced[i] = powers[i - 1] @ b

    s_pos, s_vel, s_acc = powers[:, 0, :], powers[:, 1, :], powers[:, 2, :]
    u_pos = np.tril(toeplitz(forced[:, 0]))
    u_vel = np.tril(toeplitz(forced[:, 1]))
    u_acc = np.tril(toeplitz(forced[:, 2]))
    k = params.com_height / params.gravity
    return PredictionMatrices(
        s_pos=s_pos, s_vel=s_vel, s_acc=s_acc, s_zmp=s_pos - k * s_acc,
        u_pos=u_pos, u_vel=u_vel, u_acc=u_acc, u_zmp=u_pos - k * u_acc,
    )


@dataclass(frozen=True)
class GaitPlan:
    """Decoded QP solution with its forward-propagated predictions."""

    jerks: np.ndarray
    footsteps: np.ndarray
    predicted_com: tuple[LipState, ...]
    predicted_zmp: np.ndarray
    predicted_rcof: np.ndarray


def build_qp(
    weights: Weights,
    init: LipState,
    v_ref: np.ndarray,
    template: FootstepPlanTemplate,
    geom: FootGeometry,
    params: LipParams,
    mu_design: float = 1.0,
) -> QpProblem:
    """Assemble the condensed gait QP.

    Inequalities: an inscribed friction box |acc| <= mu_design*g/sqrt(2) per
    axis and sample, the ZMP inside the support-foot rectangle (coupled
    linearly to the footstep variables), and each footstep inside the
    reachable box chained to its predecessor.
    """
    n = template.n_samples
    v_ref = np.asarray(v_ref, dtype=float)
    if v_ref.shape != (n, 2):
        raise ValueError(f"v_ref must have shape ({n}, 2), got {v_ref.shape}")
    if mu_design <= 0.0:
        raise ValueError(f"mu_design must be positive, got {mu_design}")

    pm = prediction_matrices(params, n)
    mask, sel = support_selection(template)
    m_steps = template.n_upcoming
    stance = template.steps[0].pos
    vmap = VarMap(n_samples=n, n_steps=m_steps)
    nv = vmap.n_vars

    x0 = init.as_axes()
    sv = pm.s_vel @ x0   # (n, 2) free-response per axis
    sa = pm.s_acc @ x0
    sz = pm.s_zmp @ x0

    g2 = params.gravity ** 2
    h_uu = 2.0 * (weights.alpha * pm.u_vel.T @ pm.u_vel
                  + weights.beta * pm.u_zmp.T @ pm.u_zmp
                  + (weights.gamma / g2) * pm.u_acc.T @ pm.u_acc)
    h_uf = -2.0 * weights.beta * pm.u_zmp.T @ sel
    h_ff = 2.0 * weights.beta * sel.T @ sel

    hess = np.zeros((nv, nv))
    grad = np.zeros(nv)
    offset = 0.0
    axis_u = (vmap.jerk_x, vmap.jerk_y)
    axis_f = (vmap.foot_x, vmap.foot_y)
    for a in range(2):
        su, sf = axis_u[a], axis_f[a]
        hess[su, su] = h_uu
        hess[su, sf] = h_uf
        hess[sf, su] = h_uf.T
        hess[sf, sf] = h_ff
        bv = v_ref[:, a] - sv[:, a]
        bz = mask * stance[a] - sz[:, a]
        grad[su] = (-2.0 * weights.alpha * pm.u_vel.T @ bv
                    - 2.0 * weights.beta * pm.u_zmp.T @ bz
                    + 2.0 * (weights.gamma / g2) * pm.u_acc.T @ sa[:, a])
        grad[sf] = 2.0 * weights.beta * sel.T @ bz
        offset += (weights.alpha * bv @ bv + weights.beta * bz @ bz
                   + (weights.gamma / g2) * sa[:, a] @ sa[:, a])
    hess += _HESSIAN_REG * np.eye(nv)

    n_rows = 4 * n + 2 * m_steps
    rows = np.zeros((n_rows, nv))
    lower = np.zeros(n_rows)
    upper = np.zeros(n_rows)

    # Friction box (inscribed in the circular cone of radius mu_design * g).
    acc_bound = mu_design * params.gravity / np.sqrt(2.0)
    for a in range(2):
        sl = slice(a * n, (a + 1) * n)
        rows[sl, axis_u[a]] = pm.u_acc
        lower[sl] = -acc_bound - sa[:, a]
        upper[sl] = acc_bound - sa[:, a]

    # ZMP inside the support rectangle around the (possibly decided) foot.
    half = (geom.half_length, geom.half_width)
    for a in range(2):
        sl = slice(2 * n + a * n, 2 * n + (a + 1) * n)
        rows[sl, axis_u[a]] = pm.u_zmp
        rows[sl, axis_f[a]] = -sel
        const = sz[:, a] - mask * stance[a]
        lower[sl] = -half[a] - const
        upper[sl] = half[a] - const

    # Footstep k inside the reachable box chained to step k - 1.
    for k in range(m_steps):
        side = template.steps[k + 1].side
        box = reachable_bounds(np.zeros(2), side, geom)
        for a in range(2):
            i = 4 * n + a * m_steps + k
            rows[i, axis_f[a].start + k] = 1.0
            center = box.center[a]
            if k == 0:
                center += stance[a]
            else:
                rows[i, axis_f[a].start + k - 1] = -1.0
            lower[i] = center - box.half_extent[a]
            upper[i] = center + box.half_extent[a]

    return QpProblem(
        hessian=hess, gradient=grad, ineq_matrix=rows,
        ineq_lower=lower, ineq_upper=upper, var_map=vmap, offset=offset,
    )


def extract_plan(
    solution: QpSolution, problem: QpProblem, init: LipState, params: LipParams
) -> GaitPlan:
    """Decode a solved gait QP and forward-propagate its predictions."""
    if solution.status is QpStatus.INFEASIBLE:
        raise ValueError("cannot extract a plan from an infeasible solve")
    vmap: VarMap = problem.var_map
    jerks, feet = vmap.decode(solution.x)
    tr = discretize(params, params.dt_plan)
    states: list[LipState] = []
    state = init
    for i in range(vmap.n_samples):
        state = step_state(state, jerks[i], tr)
        states.append(state)
    zmp = np.array([zmp_of(s, params) for s in states])
    rcof = np.array([rcof_of(s, params) for s in states])
    return GaitPlan(
        jerks=jerks, footsteps=feet, predicted_com=tuple(states),
        predicted_zmp=zmp, predicted_rcof=rcof,
    )
