"""Gaussian-process surrogate over the weight space plus the expected-
improvement acquisition used to pick the next weights to evaluate.

Inputs are normalized to the unit square and targets are warped with
log(1 + J) so the surrogate stays well conditioned across the orders of
magnitude separating fallen and clean rollouts; the warp is strictly
increasing, so minimizers are unaffected. The kernel is an anisotropic
squared exponential with a fixed noise floor; hyperparameters maximize the
log marginal likelihood from a fixed table of starts, keeping fits
bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_solve, cholesky
from scipy.optimize import minimize

Bounds2 = tuple[tuple[float, float], tuple[float, float]]
DEFAULT_BOUNDS: Bounds2 = ((0.0, 1000.0), (0.0, 1000.0))

_LENGTHSCALE_RANGE = (0.02, 5.0)
# (signal_var factor on the target variance, lengthscale x, lengthscale y)
_FIT_STARTS = (
    (1.0, 0.30, 0.30),
    (1.0, 1.00, 1.00),
    (1.0, 0.10, 0.10),
    (1.0, 0.50, 0.15),
    (1.0, 0.15, 0.50),
    (4.0, 0.70, 0.70),
    (0.25, 0.20, 0.20),
    (1.0, 2.00, 2.00),
)


class GpFitError(RuntimeError):
    """Raised when the kernel matrix stays indefinite after jitter retries."""


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def norm_cdf(x):
    """Standard normal CDF via the Hastings rational tail approximation
    (Zelen & Severo constants), |error| < 7.5e-8; no special functions."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    t = 1.0 / (1.0 + 0.2316419 * ax)
    poly = t * (0.319381530 + t * (-0.356563782 + t * (
        1.781477937 + t * (-1.821255978 + t * 1.330274429))))
    tail = norm_pdf(ax) * poly
    return np.where(x >= 0.0, 1.0 - tail, tail)


def warp_cost(j):
    """Strictly increasing target warp log(1 + J)."""
    return np.log1p(np.asarray(j, dtype=float))


def normalize_inputs(deltas: np.ndarray, bounds: Bounds2) -> np.ndarray:
    deltas = np.asarray(deltas, dtype=float).reshape(-1, 2)
    lo = np.array([bounds[0][0], bounds[1][0]])
    hi = np.array([bounds[0][1], bounds[1][1]])
    return (deltas - lo) / (hi - lo)


def denormalize_inputs(x: np.ndarray, bounds: Bounds2) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    lo = np.array([bounds[0][0], bounds[1][0]])
    hi = np.array([bounds[0][1], bounds[1][1]])
    return lo + x * (hi - lo)


@dataclass(frozen=True)
class GpModel:
    """Fitted surrogate: normalized inputs, warped targets and the kernel
    with its cached Cholesky factor and weight vector."""

    inputs: np.ndarray
    targets: np.ndarray
    prior_mean: float
    signal_var: float
    lengthscales: np.ndarray
    noise_var: float
    chol_factor: np.ndarray
    alpha_weights: np.ndarray
    bounds: Bounds2 = DEFAULT_BOUNDS

    @property
    def n_points(self) -> int:
        return self.inputs.shape[0]

    @property
    def incumbent(self) -> float:
        """Best (lowest) warped target seen so far."""
        return float(np.min(self.targets))


def _sq_dists(xa: np.ndarray, xb: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension squared distances, shapes (na, nb)."""
    d0 = xa[:, 0:1] - xb[None, :, 0]
    d1 = xa[:, 1:2] - xb[None, :, 1]
    return d0 * d0, d1 * d1

def _kernel(xa, xb, signal_var, lengthscales):
    s0, s1 = _sq_dists(xa, xb)
    return signal_var * np.exp(-0.5 * (s0 / lengthscales[0] ** 2 + s1 / lengthscales[1] ** 2))


def assemble_model(
    inputs: np.ndarray,
    targets: np.ndarray,
    signal_var: float,
    lengthscales: np.ndarray,
    noise_var: float,
    bounds: Bounds2 = DEFAULT_BOUNDS,
) -> GpModel:
    """Build a GpModel at given hyperparameters, escalating the noise floor
    tenfold (three retries) if the kernel Cholesky fails."""
    inputs = np.asarray(inputs, dtype=float).reshape(-1, 2)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    lengthscales = np.asarray(lengthscales, dtype=float).reshape(2)
    prior_mean = float(np.mean(targets))
    kmat = _kernel(inputs, inputs, signal_var, lengthscales)
    nv = noise_var
    for attempt in range(4):
        try:
            lfac = cholesky(kmat + nv * np.eye(len(targets)), lower=True)
            break
        except np.linalg.LinAlgError:
            if attempt == 3:
                raise GpFitError(
                    f"kernel matrix not positive definite (noise_var up to {nv})")
            nv = 10.0 * max(nv, 1e-12)
    else:  # pragma: no cover
        raise GpFitError("unreachable")
    alpha = cho_solve((lfac, True), targets - prior_mean)
    return GpModel(
        inputs=inputs, targets=targets, prior_mean=prior_mean,
        signal_var=float(signal_var), lengthscales=lengthscales,
        noise_var=float(nv), chol_factor=lfac, alpha_weights=alpha,
        bounds=bounds,
    )


def _nll_and_grad(theta: np.ndarray, inputs, resid, noise_var):
    """Negative log evidence and gradient wrt (log sv, log l0, log l1)."""
    sv = math.exp(theta[0])
    ls = (math.exp(theta[1]), math.exp(theta[2]))
    s0, s1 = _sq_dists(inputs, inputs)
    kraw = sv * np.exp(-0.5 * (s0 / ls[0] ** 2 + s1 / ls[1] ** 2))
    n = len(resid)
    try:
        lfac = cholesky(kraw + noise_var * np.eye(n), lower=True)
    except np.linalg.LinAlgError:
        return 1e25, np.zeros(3)
    alpha = cho_solve((lfac, True), resid)
    val = (-0.5 * resid @ alpha
           - np.sum(np.log(np.diag(lfac)))
           - 0.5 * n * math.log(2.0 * math.pi))
    kinv = cho_solve((lfac, True), np.eye(n))
    gmat = np.outer(alpha, alpha) - kinv
    grads = np.array([
        0.5 * np.sum(gmat * kraw),
        0.5 * np.sum(gmat * kraw * (s0 / ls[0] ** 2)),
        0.5 * np.sum(gmat * kraw * (s1 / ls[1] ** 2)),
    ])
    return -val, -grads


def log_marginal_likelihood(model: GpModel) -> tuple[float, np.ndarray]:
    """Evidence of the model's data at its hyperparameters, with the
    analytic gradient wrt (log signal_var, log l0, log l1)."""
    theta = np.log([model.signal_var, model.lengthscales[0], model.lengthscales[1]])
    nll, ngrad = _nll_and_grad(theta, model.inputs,
                               model.targets - model.prior_mean, model.noise_var)
    return -nll, -ngrad


def gp_fit(
    deltas: np.ndarray,
    costs: np.ndarray,
    bounds: Bounds2 = DEFAULT_BOUNDS,
) -> GpModel:
    """Fit the surrogate to raw (beta, gamma) points and raw costs J."""
    deltas = np.asarray(deltas, dtype=float).reshape(-1, 2)
    costs = np.asarray(costs, dtype=float).reshape(-1)
    if len(costs) < 2:
        raise ValueError("gp_fit needs at least two samples")
    inputs = normalize_inputs(deltas, bounds)
    targets = warp_cost(costs)
    resid = targets - float(np.mean(targets))
    var_r = max(float(np.var(resid)), 1e-10)
    noise_var = 1e-8 * max(1.0, var_r)

    lo, hi = _LENGTHSCALE_RANGE
    opt_bounds = [
        (math.log(var_r * 1e-3), math.log(var_r * 1e3)),
        (math.log(lo), math.log(hi)),
        (math.log(lo), math.log(hi)),
    ]
    best = None
    for sv_fac, l0, l1 in _FIT_STARTS:
        theta0 = np.log([max(var_r * sv_fac, 1e-12), l0, l1])
        theta0 = np.clip(theta0, [b[0] for b in opt_bounds], [b[1] for b in opt_bounds])
        res = minimize(
            _nll_and_grad, theta0, args=(inputs, resid, noise_var),
            method="L-BFGS-B", jac=True, bounds=opt_bounds,
        )
        if best is None or res.fun < best.fun:
            best = res
    sv = math.exp(best.x[0])
    ls = np.exp(best.x[1:3])
    return assemble_model(inputs, targets, sv, ls, noise_var, bounds)


def _posterior_batch(model: GpModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    kstar = _kernel(x, model.inputs, model.signal_var, model.lengthscales)
    mean = model.prior_mean + kstar @ model.alpha_weights
    w = cho_solve((model.chol_factor, True), kstar.T)
    var = model.signal_var - np.einsum("ij,ji->i", kstar, w)
    return mean, np.maximum(var, 0.0)


def gp_posterior(model: GpModel, x: np.ndarray) -> tuple[float, float]:
    """Posterior mean and (nonnegative) variance at one normalized point."""
    mean, var = _posterior_batch(model, np.asarray(x, dtype=float).reshape(1, 2))
    return float(mean[0]), float(var[0])


def _ei_batch(model: GpModel, x: np.ndarray, best: float) -> np.ndarray:
    mean, var = _posterior_batch(model, x)
    sd = np.sqrt(var)
    gap = best - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0.0, gap / np.where(sd > 0.0, sd, 1.0), 0.0)
        ei = np.where(sd > 0.0, gap * norm_cdf(z) + sd * norm_pdf(z), np.maximum(gap, 0.0))
    return np.maximum(ei, 0.0)


def expected_improvement(model: GpModel, x: np.ndarray, best: float) -> float:
    """EI for minimization; at zero variance it degenerates to max(best - mean, 0)."""
    return float(_ei_batch(model, np.asarray(x, dtype=float).reshape(1, 2), best)[0])


@lru_cache(maxsize=4)
def _halton_grid(n: int) -> np.ndarray:
    """First n points of the (2, 3) Halton sequence, index starting at 1."""
    grid = np.empty((n, 2))
    for col, base in enumerate((2, 3)):
        for i in range(n):
            f, r, k = 1.0, 0.0, i + 1
            while k > 0:
                f /= base
                r += f * (k % base)
                k //= base
            grid[i, col] = r
    return grid


def propose_next(
    model: GpModel, rng: np.random.Generator, n_candidates: int = 4096
) -> np.ndarray:
    """Maximize EI over shifted Halton candidates, then refine coordinatewise
    (50 halving steps from 0.05). Returns a point in the unit square.

    If every candidate has zero EI (degenerate posterior) the candidate
    farthest from the data is returned instead.
    """
    shift = rng.random(2)
    cand = (_halton_grid(n_candidates) + shift) % 1.0
    best = model.incumbent
    ei = _ei_batch(model, cand, best)
    if ei.max() <= 0.0:
        d0, d1 = _sq_dists(cand, model.inputs)
        nearest = np.min(d0 + d1, axis=1)
        return cand[int(np.argmax(nearest))].copy()

    x = cand[int(np.argmax(ei))].copy()
    val = float(ei.max())
    step = 0.05
    for _ in range(50):
        probes = np.clip(
            x + step * np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float),
            0.0, 1.0)
        pvals = _ei_batch(model, probes, best)
        k = int(np.argmax(pvals))
        if pvals[k] > val:
            x, val = probes[k], float(pvals[k])
        else:
            step *= 0.5
    return x
