"""Shared builders for randomized gait QP instances and scenario configs."""

import numpy as np
import pytest

from gaittune.footsteps import FootGeometry, Side, nominal_footsteps
from gaittune.gaitqp import Weights, build_qp
from gaittune.lipm import LipParams, LipState

PARAMS = LipParams()
GEOM = FootGeometry()
N_SAMPLES = 16


def random_gait_instance(rng, weights=None):
    """A gait QP from a randomly disturbed state, the way replans see them."""
    if weights is None:
        weights = Weights(1.0, float(rng.random() * 1000.0), float(rng.random() * 1000.0))
    side = Side.RIGHT if rng.random() < 0.5 else Side.LEFT
    support = np.array([rng.standard_normal() * 0.1,
                        side.lateral_sign * GEOM.step_width / 2.0])
    phase = int(rng.integers(0, GEOM.samples_per_step(PARAMS.dt_plan)))
    # Perturbations sized to stay within the capturable envelope: larger ones
    # (checked against an exhaustive feasibility LP) are genuinely infeasible,
    # which rollouts treat as falls rather than solvable instances.
    init = LipState(
        support + rng.standard_normal(2) * np.array([0.015, 0.008]),
        rng.standard_normal(2) * np.array([0.08, 0.03]),
        rng.standard_normal(2) * 0.25,
    )
    v_des = np.array([rng.uniform(-0.2, 0.4), rng.uniform(-0.1, 0.1)])
    template = nominal_footsteps(v_des, GEOM, (support, side), N_SAMPLES,
                                 PARAMS.dt_plan, phase_samples=phase)
    v_ref = np.tile(v_des, (N_SAMPLES, 1))
    problem = build_qp(weights, init, v_ref, template, GEOM, PARAMS, mu_design=1.0)
    return problem, init, template, v_ref, weights


@pytest.fixture(scope="session")
def default_experiment():
    from gaittune.config import default_config
    return default_config()
