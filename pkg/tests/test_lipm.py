"""Dynamics-level checks: exact discretization, output maps, invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaittune.lipm import (AxisTransition, LipParams, LipState, capture_point, discretize,
                           rcof_of, step_state, zmp_of)

PARAMS = LipParams()


def substep_oracle(state: LipState, jerk: np.ndarray, dt: float, n_sub: int = 1000) -> LipState:
    """Independent fine-grained integrator: plain constant-jerk kinematics
    applied over n_sub small slices."""
    pos, vel, acc = state.pos.copy(), state.vel.copy(), state.acc.copy()
    h = dt / n_sub
    for _ in range(n_sub):
        pos = pos + vel * h + 0.5 * acc * h * h + jerk * h ** 3 / 6.0
        vel = vel + acc * h + 0.5 * jerk * h * h
        acc = acc + jerk * h
    return LipState(pos, vel, acc)


class TestDiscretize:
    def test_input_vector_closed_form(self):
        tr = discretize(PARAMS, 0.1)
        np.testing.assert_allclose(tr.input_vector, [1.6667e-4, 5.0e-3, 0.1], rtol=1e-4)

    def test_state_matrix_closed_form(self):
        tr = discretize(PARAMS, 0.1)
        expected = np.array([[1.0, 0.1, 0.005], [0.0, 1.0, 0.1], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(tr.state_matrix, expected, atol=1e-15)

    def test_zmp_row(self):
        tr = discretize(LipParams(com_height=0.8, gravity=9.81), 0.1)
        np.testing.assert_allclose(tr.zmp_row, [1.0, 0.0, -0.081549], atol=1e-6)

    def test_small_dt_limit_is_identity(self):
        tr = discretize(PARAMS, 1e-9)
        np.testing.assert_allclose(tr.state_matrix, np.eye(3), atol=1e-8)

    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_nonpositive_dt_rejected(self, dt):
        with pytest.raises(ValueError):
            discretize(PARAMS, dt)

    def test_composition_semigroup(self):
        tr1 = discretize(PARAMS, 0.07)
        tr2 = discretize(PARAMS, 0.14)
        np.testing.assert_allclose(tr1.state_matrix @ tr1.state_matrix,
                                   tr2.state_matrix, atol=1e-12)
        # same jerk held over both halves composes to the doubled step
        u = 0.37
        via_two = tr1.state_matrix @ (tr1.input_vector * u) + tr1.input_vector * u
        np.testing.assert_allclose(via_two, tr2.input_vector * u, atol=1e-12)


class TestStepState:
    def test_unit_jerk_from_rest(self):
        tr = discretize(PARAMS, 0.1)
        out = step_state(LipState.rest(), np.array([1.0, 0.0]), tr)
        np.testing.assert_allclose(out.pos, [1.6667e-4, 0.0], rtol=1e-4)
        np.testing.assert_allclose(out.vel, [5.0e-3, 0.0], rtol=1e-12)
        np.testing.assert_allclose(out.acc, [0.1, 0.0], rtol=1e-12)

    def test_ballistic_case(self):
        tr = discretize(PARAMS, 0.1)
        state = LipState(np.array([1.0, 1.0]), np.array([0.5, 0.5]), np.zeros(2))
        out = step_state(state, np.zeros(2), tr)
        np.testing.assert_allclose(out.pos, [1.05, 1.05], atol=1e-15)
        np.testing.assert_allclose(out.vel, [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(out.acc, [0.0, 0.0], atol=1e-15)

    def test_matches_substepped_integration(self):
        rng = np.random.default_rng(7)
        tr = discretize(PARAMS, 0.1)
        for _ in range(20):
            state = LipState(rng.standard_normal(2), rng.standard_normal(2),
                             rng.standard_normal(2))
            jerk = rng.standard_normal(2) * 5.0
            exact = step_state(state, jerk, tr)
            ref = substep_oracle(state, jerk, 0.1)
            for name in ("pos", "vel", "acc"):
                np.testing.assert_allclose(getattr(exact, name), getattr(ref, name),
                                           atol=1e-10)

    def test_exact_for_constant_jerk_polynomials(self):
        dt = 0.23
        tr = discretize(PARAMS, dt)
        state = LipState(np.array([0.3, -0.2]), np.array([-1.0, 0.4]), np.array([2.0, -3.0]))
        jerk = np.array([1.7, -0.9])
        out = step_state(state, jerk, tr)
        pos = state.pos + state.vel * dt + 0.5 * state.acc * dt ** 2 + jerk * dt ** 3 / 6
        vel = state.vel + state.acc * dt + 0.5 * jerk * dt ** 2
        acc = state.acc + jerk * dt
        np.testing.assert_allclose(out.pos, pos, atol=1e-12)
        np.testing.assert_allclose(out.vel, vel, atol=1e-12)
        np.testing.assert_allclose(out.acc, acc, atol=1e-12)


class TestOutputMaps:
    def test_zmp_zero_acceleration_identity(self):
        state = LipState(np.array([0.4, -0.7]), np.zeros(2), np.zeros(2))
        np.testing.assert_array_equal(zmp_of(state, PARAMS), state.pos)

    def test_zmp_arithmetic(self):
        state = LipState(np.zeros(2), np.zeros(2), np.array([1.0, 0.0]))
        np.testing.assert_allclose(zmp_of(state, PARAMS), [-0.081549, 0.0], atol=1e-6)

    def test_rcof_static(self):
        assert rcof_of(LipState.rest(), PARAMS) == 0.0

    def test_rcof_arithmetic(self):
        state = LipState(np.zeros(2), np.zeros(2), np.array([0.981, 0.0]))
        assert rcof_of(state, PARAMS) == pytest.approx(0.1, rel=1e-12)
        state = LipState(np.zeros(2), np.zeros(2), np.array([3.0, 4.0]))
        assert rcof_of(state, PARAMS) == pytest.approx(5.0 / 9.81, rel=1e-12)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10),
           st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_zmp_linearity(self, p1, p2, a1, a2, ca, cb):
        s1 = LipState(np.array([p1, p2]), np.zeros(2), np.array([a1, a2]))
        s2 = LipState(np.array([p2, a1]), np.zeros(2), np.array([a2, p1]))
        combo = LipState(ca * s1.pos + cb * s2.pos, np.zeros(2), ca * s1.acc + cb * s2.acc)
        np.testing.assert_allclose(
            zmp_of(combo, PARAMS),
            ca * zmp_of(s1, PARAMS) + cb * zmp_of(s2, PARAMS), atol=1e-9)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-100, 100))
    @settings(max_examples=50, deadline=None)
    def test_rcof_absolutely_homogeneous(self, ax, ay, k):
        base = LipState(np.zeros(2), np.zeros(2), np.array([ax, ay]))
        scaled = LipState(np.zeros(2), np.zeros(2), k * base.acc)
        assert rcof_of(scaled, PARAMS) == pytest.approx(abs(k) * rcof_of(base, PARAMS),
                                                        rel=1e-9, abs=1e-12)

    def test_capture_point(self):
        state = LipState(np.array([1.0, 0.0]), np.array([0.5, -0.5]), np.zeros(2))
        w = np.sqrt(0.8 / 9.81)
        np.testing.assert_allclose(capture_point(state, PARAMS),
                                   [1.0 + 0.5 * w, -0.5 * w], atol=1e-12)


class TestValidation:
    def test_param_invariants(self):
        with pytest.raises(ValueError):
            LipParams(com_height=-1.0)
        with pytest.raises(ValueError):
            LipParams(gravity=0.0)
        with pytest.raises(ValueError):
            LipParams(dt_plan=0.1, dt_plant=0.2)
        with pytest.raises(ValueError):
            LipParams(dt_plan=0.1, dt_plant=0.03)

    def test_state_requires_finite(self):
        with pytest.raises(ValueError):
            LipState(np.array([np.nan, 0.0]), np.zeros(2), np.zeros(2))

    def test_substeps_per_plan(self):
        assert PARAMS.substeps_per_plan == 10
