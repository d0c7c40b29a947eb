"""gaittune: LIPM walking-gait QP with simulation-in-the-loop Bayesian
tuning of its robustness weights."""

from .config import ConfigError, ExperimentConfig, default_config, parse_config, serialize_config
from .footsteps import (FootGeometry, FootstepPlanTemplate, ReachableBox, Side,
                        nominal_footsteps, reachable_bounds, support_timeline, zmp_reference)
from .gaitqp import GaitPlan, Weights, build_qp, extract_plan, prediction_matrices
from .gp import (GpFitError, GpModel, expected_improvement, gp_fit, gp_posterior,
                 log_marginal_likelihood, propose_next)
from .harness import emit_plot_data, grid_search, make_objective, run_scenario
from .lipm import AxisTransition, LipParams, LipState, capture_point, discretize, rcof_of, \
    step_state, zmp_of
from .plant import (DisturbanceScenario, Push, RolloutResult, SimConfig, apply_disturbance,
                    detect_fall, friction_clamp, rollout)
from .qpsolver import QpProblem, QpSolution, QpStatus, solve_qp
from .tuner import ObjectiveSample, TuneHistory, latin_hypercube, outer_cost, tune

__version__ = "0.1.0"
