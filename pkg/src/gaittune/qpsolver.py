"""Dense strictly convex QP solver returning KKT-certified solutions.

Solves   min 0.5 x'Hx + g'x   s.t.   lower <= A x <= upper

with H symmetric positive definite. Rows may be one-sided (+-inf bounds).

The method is a dual active-set scheme: start at the unconstrained minimum,
pick the most violated constraint, and take primal-dual steps that keep all
multipliers nonnegative, dropping blocking constraints along the way. Each
added constraint strictly increases the dual objective, so no feasible-point
phase is required and an unbounded dual step is an exact infeasibility
certificate. A final equality-constrained KKT polish tightens the returned
residuals well below the certified bounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import cho_factor, cho_solve

# Violation threshold on unit-normalized constraint rows.
_VIOL_TOL = 1e-10
# n'z <= span_tol * n'H^-1 n means the normal lies in the span of the
# active set (the projected direction vanished).
_SPAN_TOL = 1e-12
_BLOCK_TOL = 1e-12


class QpStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class QpProblem:
    """Dense QP data. `offset` is the constant cost term so that reported
    objectives match the original (uncondensed) cost function."""

    hessian: np.ndarray
    gradient: np.ndarray
    ineq_matrix: np.ndarray
    ineq_lower: np.ndarray
    ineq_upper: np.ndarray
    var_map: Any = None
    offset: float = 0.0

    def __post_init__(self) -> None:
        h = np.asarray(self.hessian, dtype=float)
        g = np.asarray(self.gradient, dtype=float).reshape(-1)
        n = g.shape[0]
        if h.shape != (n, n):
            raise ValueError(f"hessian shape {h.shape} does not match gradient size {n}")
        scale = max(np.abs(h).max(), 1.0)
        if np.abs(h - h.T).max() > 1e-8 * scale:
            raise ValueError("hessian must be symmetric")
        a = np.asarray(self.ineq_matrix, dtype=float).reshape(-1, n) \
            if np.size(self.ineq_matrix) else np.zeros((0, n))
        lo = np.asarray(self.ineq_lower, dtype=float).reshape(-1)
        up = np.asarray(self.ineq_upper, dtype=float).reshape(-1)
        if lo.shape[0] != a.shape[0] or up.shape[0] != a.shape[0]:
            raise ValueError("constraint bounds do not match the constraint matrix")
        both = np.isfinite(lo) & np.isfinite(up)
        if np.any(lo[both] > up[both]):
            raise ValueError("ineq_lower must not exceed ineq_upper")
        object.__setattr__(self, "hessian", 0.5 * (h + h.T))
        object.__setattr__(self, "gradient", g)
        object.__setattr__(self, "ineq_matrix", a)
        object.__setattr__(self, "ineq_lower", lo)
        object.__setattr__(self, "ineq_upper", up)

    @property
    def n_vars(self) -> int:
        return self.gradient.shape[0]

    @property
    def n_rows(self) -> int:
        return self.ineq_matrix.shape[0]


@dataclass(frozen=True)
class QpSolution:
    """Primal-dual result with its KKT residual.

    active_set indexes one-sided constraints: j in [0, m) is the upper side
    of row j, j in [m, 2m) the lower side of row j - m. multipliers holds
    the matching nonnegative duals (for unit-normalized rows).
    """

    x: np.ndarray
    active_set: tuple[int, ...]
    objective: float
    kkt_residual: float
    iterations: int
    status: QpStatus
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))


def solve_qp(problem: QpProblem, max_iter: int | None = None) -> QpSolution:
    """Solve the QP; never raises on infeasible data (see QpStatus)."""
    h, g = problem.hessian, problem.gradient
    n, m = problem.n_vars, problem.n_rows
    if max_iter is None:
        max_iter = max(50, 10 * (n + m))

    try:
        cho = cho_factor(h, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("hessian must be positive definite") from exc

    # One-sided expansion on unit-normalized rows: j < m is a_j x <= u_j,
    # j >= m is -a_j x <= -l_j. Infinite bounds are never violated.
    if m:
        norms = np.linalg.norm(problem.ineq_matrix, axis=1)
        safe = np.where(norms > 0.0, norms, 1.0)
        a_norm = problem.ineq_matrix / safe[:, None]
        cons = np.vstack([a_norm, -a_norm])
        bounds = np.concatenate([problem.ineq_upper / safe, -problem.ineq_lower / safe])
    else:
        cons = np.zeros((0, n))
        bounds = np.zeros(0)

    x = -cho_solve(cho, g)
    active: list[int] = []
    lam: list[float] = []
    iterations = 0
    status = QpStatus.OPTIMAL

    while True:
        slack = cons @ x - bounds if cons.size else np.zeros(0)
        if slack.size == 0 or np.max(slack) <= _VIOL_TOL:
            break
        p = int(np.argmax(slack))
        n_p = cons[p]
        u_acc = 0.0

        while True:
            iterations += 1
            if iterations > max_iter:
                status = QpStatus.MAX_ITER
                break
            hi_np = cho_solve(cho, n_p)
            nhn = float(n_p @ hi_np)
            if active:
                nmat = cons[active].T
                hi_n = cho_solve(cho, nmat)
                small = nmat.T @ hi_n
                r = np.linalg.solve(small, nmat.T @ hi_np)
                z = hi_np - hi_n @ r
            else:
                r = np.zeros(0)
                z = hi_np
            npz = float(n_p @ z)
            z_zero = npz <= _SPAN_TOL * max(nhn, _SPAN_TOL)

            t1 = np.inf
            j_block = -1
            for jj in range(len(active)):
                rv = r[jj]
                if rv > _BLOCK_TOL:
                    cand = lam[jj] / rv
                    if cand < t1:
                        t1, j_block = cand, jj
            slack_p = float(n_p @ x - bounds[p])
            t2 = np.inf if z_zero else slack_p / npz
            t = min(t1, t2)
            if not np.isfinite(t):
                status = QpStatus.INFEASIBLE
                break

            for jj in range(len(active)):
                lam[jj] = max(lam[jj] - t * r[jj], 0.0)
            u_acc += t
            if not z_zero:
                x = x - t * z
            if t2 <= t1 and not z_zero:
                active.append(p)
                lam.append(u_acc)
                break
            active.pop(j_block)
            lam.pop(j_block)

        if status is not QpStatus.OPTIMAL:
            break

    if status is QpStatus.OPTIMAL and active:
        x, lam = _polish(h, g, cons, bounds, x, active, lam)

    lam_full = np.zeros(cons.shape[0])
    for j, v in zip(active, lam):
        lam_full[j] = v
    kkt = _kkt_residual(problem, cons, bounds, x, lam_full) \
        if status is not QpStatus.INFEASIBLE else np.inf
    objective = float(0.5 * x @ h @ x + g @ x + problem.offset)
    return QpSolution(
        x=x,
        active_set=tuple(sorted(active)),
        objective=objective,
        kkt_residual=kkt,
        iterations=iterations,
        status=status,
        multipliers=lam_full,
    )


def _polish(h, g, cons, bounds, x, active, lam):
    """Re-solve the equality-constrained KKT system on the final active set;
    keep the iterate if the polished point is not clearly better."""
    k = len(active)
    nmat = cons[active]
    kkt = np.zeros((h.shape[0] + k, h.shape[0] + k))
    kkt[: h.shape[0], : h.shape[0]] = h
    kkt[: h.shape[0], h.shape[0]:] = nmat.T
    kkt[h.shape[0]:, : h.shape[0]] = nmat
    rhs = np.concatenate([-g, bounds[active]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return x, lam
    x_pol = sol[: h.shape[0]]
    lam_pol = sol[h.shape[0]:]
    slack = cons @ x_pol - bounds
    if np.min(lam_pol) < -1e-9 or np.max(slack) > 10.0 * _VIOL_TOL:
        return x, lam
    return x_pol, list(np.maximum(lam_pol, 0.0))


def _kkt_residual(problem: QpProblem, cons, bounds, x, lam_full) -> float:
    """max of stationarity, primal feasibility and complementarity errors."""
    stationarity = problem.hessian @ x + problem.gradient + cons.T @ lam_full
    res = float(np.abs(stationarity).max()) if stationarity.size else 0.0
    slack = cons @ x - bounds
    finite = np.isfinite(bounds)
    if np.any(finite):
        res = max(res, float(np.max(slack[finite].clip(min=0.0))))
        res = max(res, float(np.abs(lam_full[finite] * slack[finite]).max()))
    return res
