"""Glucose engine: equilibrium, oracle agreement, monotonicity, prediction."""
from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from glucoplan.domain import (
    HealthFlag,
    GlucoseReading,
    make_dose_event,
    make_health_flag_event,
    make_meal_event,
)
from glucoplan.engine import (
    MMOL_PER_G,
    CarbIntake,
    ExerciseBout,
    InsulinBolus,
    ModelParameters,
    NonFiniteState,
    SimulationState,
    StaleData,
    StressWindow,
    basal_state,
    inputs_from_events,
    predict,
    simulate,
    state_from_history,
    stress_windows_from_events,
)

T0 = datetime(2026, 8, 7, 12, 0, 0, tzinfo=timezone.utc)


def reference_trajectory(initial, params, t_eval, stress=1.0, exercise=0.0):
    """Independent oracle: scipy adaptive RK45 at tight tolerance on the same
    right-hand side, with meal/bolus mass placed in the initial compartments."""
    p = params

    def rhs(_t, y):
        G, X, I, D1, D2, S1, S2 = y
        Ra = D2 / p.t_maxG
        U = S2 / p.t_maxI
        return [
            -(p.p1 * stress + X + exercise) * G + p.p1 * stress * p.G_b
            + Ra * MMOL_PER_G / (p.V_G * p.BW),
            -p.p2 * X + p.p3 * (I - p.I_b),
            U * 1000.0 / (p.V_I * p.BW) - p.k_e * (I - p.I_b),
            -D1 / p.t_maxG,
            (D1 - D2) / p.t_maxG,
            -S1 / p.t_maxI,
            (S1 - S2) / p.t_maxI,
        ]

    y0 = [initial.G, initial.X, initial.I, initial.D1, initial.D2,
          initial.S1, initial.S2]
    sol = solve_ivp(rhs, (t_eval[0], t_eval[-1]), y0, t_eval=t_eval,
                    rtol=1e-10, atol=1e-12)
    assert sol.success
    return sol.y[0]


class TestSimulate:
    def test_equilibrium_is_exact(self, params):
        traj = simulate(basal_state(params), params, [], 24 * 60.0)
        assert np.max(np.abs(traj.G - params.G_b)) < 1e-6

    def test_matches_scipy_oracle_for_meal_and_bolus(self, params):
        initial = SimulationState(
            G=params.G_b, I=params.I_b,
            D1=params.Bio * 40.0, S1=4.0,
        )
        traj = simulate(initial, params, [], 120.0, 1.0)
        # an impulse at t=0 is equivalent to pre-loading the compartments
        traj_impulse = simulate(
            basal_state(params), params,
            [CarbIntake(0.0, 40.0), InsulinBolus(0.0, 4.0)], 120.0, 1.0,
        )
        assert np.array_equal(traj.G, traj_impulse.G)

        oracle = reference_trajectory(initial, params, traj.times_min)
        assert np.max(np.abs(traj.G - oracle)) < 1e-5

    def test_meal_rises_peaks_and_returns(self, params):
        traj = simulate(basal_state(params), params,
                        [CarbIntake(0.0, 40.0)], 240.0)
        g = traj.G
        peak_idx = int(np.argmax(g))
        assert g[peak_idx] > params.G_b + 1.0
        assert 15.0 < traj.times_min[peak_idx] < 120.0
        assert g[-1] < g[peak_idx]  # heading back toward basal
        assert g[-1] > params.G_b - 0.5

    def test_bolus_decreases_monotonically_below_basal(self, params):
        traj = simulate(basal_state(params), params,
                        [InsulinBolus(0.0, 4.0)], 120.0)
        g = traj.G
        assert np.all(np.diff(g) <= 1e-12)
        assert g[-1] < params.G_b - 1.0

    def test_rk4_convergence_on_refinement(self, params):
        inputs = [CarbIntake(0.0, 60.0), InsulinBolus(0.0, 5.0)]
        coarse = simulate(basal_state(params), params, inputs, 120.0, 1.0)
        fine = simulate(basal_state(params), params, inputs, 120.0, 0.5)
        diff = np.max(np.abs(coarse.G - fine.G[::2]))
        assert diff < 0.01

    def test_midhorizon_impulse_applied_on_grid(self, params):
        traj = simulate(basal_state(params), params,
                        [CarbIntake(30.0, 50.0)], 180.0)
        i30 = int(np.where(traj.times_min == 30.0)[0][0])
        assert np.allclose(traj.G[: i30 + 1], params.G_b, atol=1e-9)
        assert traj.states[i30, 3] == pytest.approx(params.Bio * 50.0)
        assert traj.G[i30 + 20] > params.G_b + 0.3

    def test_exercise_lowers_glucose_with_tail(self, params):
        quiet = simulate(basal_state(params), params, [], 180.0)
        active = simulate(basal_state(params), params,
                          [ExerciseBout(0.0, 45.0, intensity=2)], 180.0)
        assert np.all(active.G[1:] < quiet.G[1:] + 1e-12)
        # effect persists beyond the bout (60-minute half-gain tail)
        assert active.G[100] < params.G_b - 0.1

    def test_stress_weakens_insulin_action(self, params):
        inputs = [InsulinBolus(0.0, 4.0)]
        plain = simulate(basal_state(params), params, inputs, 120.0)
        stressed = simulate(basal_state(params), params,
                            inputs + [StressWindow(0.0, math.inf)], 120.0)
        assert stressed.G[-1] > plain.G[-1]

    def test_stress_alone_keeps_equilibrium(self, params):
        traj = simulate(basal_state(params), params,
                        [StressWindow(0.0, math.inf)], 240.0)
        assert np.max(np.abs(traj.G - params.G_b)) < 1e-9

    def test_compartments_stay_nonnegative(self, params):
        traj = simulate(
            basal_state(params), params,
            [CarbIntake(0.0, 120.0), InsulinBolus(10.0, 8.0),
             ExerciseBout(60.0, 60.0, 3), CarbIntake(90.0, 30.0)],
            360.0,
        )
        assert np.min(traj.states) >= 0.0

    def test_determinism_bit_identical(self, params):
        inputs = [CarbIntake(7.0, 33.0), InsulinBolus(7.0, 3.5)]
        a = simulate(basal_state(params), params, inputs, 120.0)
        b = simulate(basal_state(params), params, inputs, 120.0)
        assert np.array_equal(a.states, b.states)

    def test_dt_must_divide_horizon(self, params):
        with pytest.raises(ValueError, match="divide"):
            simulate(basal_state(params), params, [], 120.0, 7.0)

    def test_nonfinite_state_detected(self, params):
        # absurd elimination rate makes explicit RK4 blow up
        bad = ModelParameters(k_e=1e6)
        with pytest.raises(NonFiniteState):
            simulate(SimulationState(G=6.5, I=500.0), bad, [], 120.0)


class TestMonotonicity:
    def test_carb_monotone_pointwise(self, params):
        rng = np.random.default_rng(5)
        for _ in range(20):
            dose = float(rng.uniform(0, 8))
            c1 = float(rng.uniform(0, 80))
            c2 = c1 + float(rng.uniform(1, 60))
            at = float(rng.integers(0, 30))
            lo = simulate(basal_state(params), params,
                          [CarbIntake(at, c1), InsulinBolus(at, dose)], 180.0)
            hi = simulate(basal_state(params), params,
                          [CarbIntake(at, c2), InsulinBolus(at, dose)], 180.0)
            after = lo.times_min >= at
            assert np.all(hi.G[after] >= lo.G[after] - 1e-9)

    def test_dose_antitone_pointwise(self, params):
        rng = np.random.default_rng(6)
        for _ in range(20):
            carbs = float(rng.uniform(0, 100))
            d1 = float(rng.uniform(0, 5))
            d2 = d1 + float(rng.uniform(0.5, 5))
            at = float(rng.integers(0, 30))
            lo = simulate(basal_state(params), params,
                          [CarbIntake(at, carbs), InsulinBolus(at, d1)], 180.0)
            hi = simulate(basal_state(params), params,
                          [CarbIntake(at, carbs), InsulinBolus(at, d2)], 180.0)
            after = lo.times_min >= at
            assert np.all(hi.G[after] <= lo.G[after] + 1e-9)


class TestStateFromHistory:
    def _readings(self, value=6.5, end=T0, count=3):
        return [
            GlucoseReading(end - timedelta(minutes=5 * k), value)
            for k in reversed(range(count))
        ]

    def test_empty_history_is_anchored_basal(self, params):
        state = state_from_history(self._readings(7.2), [], params)
        assert state == SimulationState(G=7.2, X=0.0, I=params.I_b)

    def test_bolus_residual_matches_closed_form(self, params):
        # two equal-rate compartments: S1+S2 = d * exp(-t/tau) * (1 + t/tau)
        dose_event = make_dose_event(T0 - timedelta(hours=2), 4.0)
        state = state_from_history(self._readings(), [dose_event], params)
        t, tau = 120.0, params.t_maxI
        expected = 4.0 * math.exp(-t / tau) * (1 + t / tau)
        assert state.S1 + state.S2 == pytest.approx(expected, abs=1e-6)
        assert state.I > params.I_b
        assert state.X > 0.0

    def test_event_just_outside_window_ignored(self, params):
        old_meal = make_meal_event(T0 - timedelta(hours=8, minutes=1), 60.0)
        state = state_from_history(self._readings(), [old_meal], params)
        assert state.D1 == 0.0 and state.D2 == 0.0

    def test_no_readings_is_stale(self, params):
        with pytest.raises(StaleData):
            state_from_history([], [], params)


class TestPredict:
    def _flat_readings(self, value=6.5, end=T0, hours=9.0):
        n = int(hours * 12)
        return [
            GlucoseReading(end - timedelta(minutes=5 * k), value)
            for k in reversed(range(n + 1))
        ]

    def test_quiescent_prediction_is_flat_with_widening_band(self, params):
        readings = self._flat_readings(6.5)
        result = predict(T0, readings, [], params)
        assert result.points[0] == 6.5
        assert np.allclose(result.points, 6.5, atol=1e-9)
        widths = result.upper - result.points
        assert widths[0] == 0.0
        assert np.all(np.diff(widths) >= 0.0)
        assert len(result.points) == 25
        expected = params.z * params.sigma0 * np.sqrt(np.arange(25))
        assert np.allclose(widths, expected, atol=1e-12)

    def test_initial_point_equals_latest_reading(self, params):
        readings = self._flat_readings(6.5)[:-1] + [GlucoseReading(T0, 9.13)]
        result = predict(T0, readings, [], params)
        assert result.points[0] == 9.13
        assert result.start_time == T0

    def test_candidate_matches_simulate_oracle(self, params):
        readings = self._flat_readings(6.5)
        result = predict(T0, readings, [], params,
                         candidate_carbs=40.0, candidate_dose=4.0)
        oracle = simulate(
            SimulationState(G=6.5, I=params.I_b), params,
            [CarbIntake(0.0, 40.0), InsulinBolus(0.0, 4.0)], 120.0, 1.0,
        )
        assert np.array_equal(result.points, oracle.G[::5])

    def test_stale_reading_rejected(self, params):
        readings = self._flat_readings(6.5, end=T0 - timedelta(minutes=16))
        with pytest.raises(StaleData):
            predict(T0, readings, [], params)
        # 15 minutes exactly is still acceptable
        predict(T0, self._flat_readings(6.5, end=T0 - timedelta(minutes=15)),
                [], params)

    def test_open_stress_window_carries_into_prediction(self, params):
        readings = self._flat_readings(6.5)
        flag = make_health_flag_event(T0 - timedelta(hours=3), HealthFlag.STRESS_ON)
        plain = predict(T0, readings, [], params, candidate_dose=4.0)
        stressed = predict(T0, readings, [flag], params, candidate_dose=4.0)
        assert stressed.points[-1] > plain.points[-1]

    def test_logged_dose_at_anchor_not_double_counted(self, params):
        readings = self._flat_readings(6.5)
        dose = make_dose_event(T0, 4.0)
        with_event = predict(T0, readings, [dose], params)
        with_candidate = predict(T0, readings, [], params, candidate_dose=4.0)
        assert np.allclose(with_event.points, with_candidate.points, atol=1e-9)


class TestEventConversion:
    def test_stress_windows_pair_on_off(self):
        events = [
            make_health_flag_event(T0, HealthFlag.STRESS_ON),
            make_health_flag_event(T0 + timedelta(hours=2), HealthFlag.STRESS_OFF),
            make_health_flag_event(T0 + timedelta(hours=5), HealthFlag.ILLNESS_ON),
        ]
        spans = stress_windows_from_events(events)
        assert spans == [
            ("stress", T0, T0 + timedelta(hours=2)),
            ("illness", T0 + timedelta(hours=5), None),
        ]

    def test_inputs_conversion_clips_and_offsets(self):
        events = [
            make_meal_event(T0 + timedelta(minutes=30), 40.0),
            make_dose_event(T0 + timedelta(minutes=30), 4.0),
            make_meal_event(T0 + timedelta(minutes=200), 99.0),  # beyond horizon
            make_meal_event(T0 - timedelta(minutes=10), 50.0),   # before start
        ]
        inputs = inputs_from_events(events, T0, 120.0)
        assert inputs == [CarbIntake(30.0, 40.0), InsulinBolus(30.0, 4.0)]

    def test_exclusive_start_drops_anchor_impulses(self):
        events = [make_dose_event(T0, 4.0), make_meal_event(T0, 40.0)]
        assert inputs_from_events(events, T0, 120.0, exclusive_start=True) == []
        assert len(inputs_from_events(events, T0, 120.0)) == 2
