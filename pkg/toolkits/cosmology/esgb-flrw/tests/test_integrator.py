#!/usr/bin/env python3
"""
Test Suite for the Integrator

Stepper core on scalar comparison equations, full-system runs over the
singularity-free beta grid, dense output, monitoring and terminal statuses.
"""

import logging
import os
import sys
import tempfile
import unittest

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from envelopes import EnvelopeSet, H_bounds
from errors import ConfigError, DenominatorTooSmall, OutOfRange
from field_equations import CosmoState, z2_mirror
from initial_data import FreeData, make_initial_state
from integrator import (
    Direction,
    IntegratorConfig,
    TerminalStatus,
    integrate,
    monitor,
    sample_at,
    solve_system,
)

# Suppress logging during tests unless debugging
logging.getLogger().setLevel(logging.CRITICAL)

BETA_GRID = (0.1, 0.2, 1.0 / 3.0, 0.43, 0.45, 0.55)


def launch(beta: float, alpha: float = 0.0, s: int = 1) -> CosmoState:
    return make_initial_state(FreeData(a0=1.0, beta=beta, alpha=alpha, s=s))


def riccati(t: float, y: np.ndarray) -> np.ndarray:
    return -y * y


class TestIntegratorConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = IntegratorConfig()
        self.assertEqual(cfg.rtol, 1e-10)
        self.assertEqual(cfg.atol, 1e-12)
        self.assertIsNone(cfg.fixed_step)

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            IntegratorConfig(rtol=0.0)
        with self.assertRaises(ConfigError):
            IntegratorConfig(h_init=2.0, h_max=1.0)
        with self.assertRaises(ConfigError):
            IntegratorConfig(fixed_step=-0.1)

    def test_from_mapping_casts_and_rejects_unknown(self):
        cfg = IntegratorConfig.from_mapping({"rtol": "1e-8", "max_steps": "1000"})
        self.assertEqual(cfg.rtol, 1e-8)
        self.assertEqual(cfg.max_steps, 1000)
        with self.assertRaises(ConfigError):
            IntegratorConfig.from_mapping({"tolerance": 1e-8})

    def test_from_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "cfg.yaml")
            with open(path, "w") as f:
                f.write("integrator:\n  rtol: 1.0e-9\n  h_max: 0.5\n")
            cfg = IntegratorConfig.from_yaml(path)
        self.assertEqual(cfg.rtol, 1e-9)
        self.assertEqual(cfg.h_max, 0.5)
        self.assertEqual(cfg.to_dict()["atol"], 1e-12)


class TestSolveSystem(unittest.TestCase):
    """The stepper core on one-dimensional systems."""

    def test_riccati_closed_form(self):
        solution = solve_system(riccati, 0.0, [1.0 / 3.0], 3.0, IntegratorConfig())
        self.assertEqual(solution.status, TerminalStatus.REACHED_T_END)
        self.assertAlmostEqual(solution.t[-1], 3.0, delta=1e-12)
        self.assertAlmostEqual(solution.y[-1, 0], 1.0 / 6.0, delta=1e-8)
        exact = 1.0 / (solution.t + 3.0)
        self.assertLess(np.max(np.abs(solution.y[:, 0] - exact)), 1e-8)

    def test_backward_reflection(self):
        solution = solve_system(riccati, 0.0, [1.0 / 3.0], -1.0, IntegratorConfig())
        self.assertTrue(np.all(np.diff(solution.t) < 0))
        self.assertAlmostEqual(solution.y[-1, 0], 1.0 / 2.0, delta=1e-8)
        # derivatives are d/dt, not d/dtau
        np.testing.assert_allclose(solution.dy[:, 0], -solution.y[:, 0] ** 2, rtol=1e-12)

    def test_fixed_step_convergence_order(self):
        def error_at(h: float) -> float:
            cfg = IntegratorConfig(fixed_step=h, h_init=h)
            solution = solve_system(riccati, 0.0, [1.0 / 3.0], 3.0, cfg)
            return abs(solution.y[-1, 0] - 1.0 / 6.0)

        coarse, fine = error_at(0.2), error_at(0.1)
        self.assertGreater(coarse, 0.0)
        self.assertGreaterEqual(coarse / fine, 16.0)

    def test_domain_boundary_is_located(self):
        def ramp(t: float, y: np.ndarray) -> np.ndarray:
            if t > 1.0:
                raise DenominatorTooSmall(0.0, 1e-10)
            return np.ones_like(y)

        solution = solve_system(ramp, 0.0, [0.0], 5.0, IntegratorConfig())
        self.assertEqual(solution.status, TerminalStatus.DENOMINATOR_EVENT)
        self.assertAlmostEqual(solution.event_time, 1.0, delta=1e-6)
        self.assertLessEqual(solution.t[-1], 1.0)
        self.assertAlmostEqual(solution.y[-1, 0], solution.t[-1], delta=1e-9)

    def test_step_budget(self):
        solution = solve_system(riccati, 0.0, [1.0 / 3.0], 100.0, IntegratorConfig(max_steps=5, h_max=0.01))
        self.assertEqual(solution.status, TerminalStatus.STEP_BUDGET_EXHAUSTED)
        self.assertLess(solution.t[-1], 100.0)

    def test_same_start_and_end_rejected(self):
        with self.assertRaises(ConfigError):
            solve_system(riccati, 1.0, [1.0], 1.0, IntegratorConfig())

    def test_projection_hook_applied_after_each_step(self):
        seen = []

        def clamp(t: float, y: np.ndarray) -> np.ndarray:
            seen.append(t)
            return np.minimum(y, 0.3)

        solution = solve_system(riccati, 0.0, [1.0 / 3.0], 3.0, IntegratorConfig(), project=clamp)
        self.assertEqual(len(seen), len(solution.t) - 1)
        self.assertTrue(np.all(solution.y[1:, 0] <= 0.3))
        # derivatives are refreshed from the projected state
        np.testing.assert_allclose(solution.dy[1:, 0], -solution.y[1:, 0] ** 2, rtol=1e-12)


class TestProjection(unittest.TestCase):
    """Re-solving Phi on the launch branch after every step removes constraint drift."""

    @classmethod
    def setUpClass(cls):
        cfg = IntegratorConfig(rtol=1e-6, constraint_abort=1e-3)
        state0 = launch(1.0 / 3.0)
        cls.free = integrate(state0, -20.0, cfg)
        cls.projected = integrate(state0, -20.0, cfg, project=True)

    def test_both_reach_end(self):
        self.assertEqual(self.free.terminal_status, TerminalStatus.REACHED_T_END)
        self.assertEqual(self.projected.terminal_status, TerminalStatus.REACHED_T_END)

    def test_drift_is_attributed_to_integration_error(self):
        free_drift = float(np.max(self.free.constraint_residuals))
        projected_drift = float(np.max(self.projected.constraint_residuals))
        self.assertLess(projected_drift, 1e-12)
        self.assertGreater(free_drift, 1e-9)
        self.assertGreater(free_drift, 1e3 * projected_drift)

    def test_projected_run_keeps_branch(self):
        self.assertEqual(self.projected.branch, 1)
        self.assertTrue(np.all(self.projected.column("phidot") > 0.0))


class TestIntegrate(unittest.TestCase):
    """Full-system runs from singularity-free data."""

    @classmethod
    def setUpClass(cls):
        cls.forward = integrate(launch(1.0 / 3.0), 100.0)

    def test_reference_run_reaches_end(self):
        self.assertEqual(self.forward.terminal_status, TerminalStatus.REACHED_T_END)
        self.assertEqual(self.forward.direction, Direction.FORWARD)
        self.assertEqual(self.forward.times[-1], 100.0)
        H_end = self.forward.final_state.H
        self.assertTrue(1.0 / 503.0 < H_end < 1.0 / 103.0)

    def test_residual_budget(self):
        report = monitor(self.forward)
        self.assertLessEqual(report.max_constraint_residual, 1e-8)
        self.assertLessEqual(report.max_power_residual, 1e-8)
        self.assertGreater(report.min_denominator, 1.0)
        self.assertEqual(report.terminal_status, TerminalStatus.REACHED_T_END)

    def test_sample_at_exact_sample(self):
        index = len(self.forward) // 2
        state = sample_at(self.forward, float(self.forward.times[index]))
        self.assertEqual(state, self.forward.state(index))

    def test_sample_at_within_envelope(self):
        state = sample_at(self.forward, 50.0)
        lower, upper = H_bounds(EnvelopeSet(beta=1.0 / 3.0), 50.0)
        self.assertTrue(lower < state.H < upper)

    def test_sample_at_out_of_range(self):
        with self.assertRaises(OutOfRange):
            sample_at(self.forward, -1.0)
        with self.assertRaises(OutOfRange):
            sample_at(self.forward, 100.5)

    def test_column_access(self):
        np.testing.assert_array_equal(self.forward.column("H"), self.forward.states[:, 1])
        with self.assertRaises(KeyError):
            self.forward.column("bogus")

    def test_fixed_point(self):
        static = CosmoState(t=0.0, a=1.0, H=0.0, phi=0.0, Phi=0.0)
        traj = integrate(static, 5.0)
        self.assertEqual(traj.terminal_status, TerminalStatus.REACHED_T_END)
        self.assertTrue(np.all(traj.states == static.as_vector()))
        report = monitor(traj)
        self.assertEqual(report.max_constraint_residual, 0.0)
        self.assertEqual(report.max_power_residual, 0.0)
        midpoint = 0.5 * (traj.times[1] + traj.times[2])
        mid = sample_at(traj, midpoint)
        self.assertEqual((mid.a, mid.H, mid.phi, mid.Phi), (1.0, 0.0, 0.0, 0.0))

    def test_constraint_drift_on_perturbed_launch(self):
        state = launch(1.0 / 3.0)
        perturbed = CosmoState(t=0.0, a=1.0, H=state.H, phi=state.phi, Phi=state.Phi + 1e-3)
        traj = integrate(perturbed, 10.0)
        self.assertEqual(traj.terminal_status, TerminalStatus.CONSTRAINT_DRIFT)
        self.assertEqual(len(traj), 1)

    def test_time_reversal(self):
        state0 = launch(1.0 / 3.0)
        out = integrate(state0, 10.0)
        back = integrate(out.final_state, 0.0, branch=1)
        self.assertEqual(back.direction, Direction.BACKWARD)
        np.testing.assert_allclose(back.final_state.as_vector(), state0.as_vector(), rtol=0.0, atol=1e-7)

    def test_long_time_asymptotics(self):
        traj = integrate(launch(1.0 / 3.0), 1000.0)
        self.assertEqual(traj.terminal_status, TerminalStatus.REACHED_T_END)
        final = traj.final_state
        self.assertTrue(0.2 < 1000.0 * final.H < 1.0)
        self.assertTrue((5.0 / 3.0 * 1000.0 + 1.0) ** 0.2 < final.a < 1000.0 / 3.0 + 1.0)

    def test_mirrored_trajectory(self):
        state0 = launch(1.0 / 3.0)
        original = integrate(state0, 50.0)
        mirrored = integrate(z2_mirror(state0), 50.0, branch=-1)
        self.assertEqual(len(original), len(mirrored))
        self.assertLessEqual(np.max(np.abs(mirrored.column("phi") + original.column("phi"))), 1e-9)
        self.assertLessEqual(np.max(np.abs(mirrored.column("H") - original.column("H"))), 1e-9)


class TestGlobalExistence(unittest.TestCase):
    """Runs over [-20, 100] for the singularity-free beta grid."""

    @classmethod
    def setUpClass(cls):
        cls.runs = {}
        for beta in BETA_GRID:
            state0 = launch(beta)
            cls.runs[beta] = (integrate(state0, -20.0), integrate(state0, 100.0))

    def test_both_halves_complete(self):
        for beta, halves in self.runs.items():
            for traj in halves:
                self.assertEqual(traj.terminal_status, TerminalStatus.REACHED_T_END, msg=f"beta={beta}")

    def test_denominator_stays_above_one(self):
        for beta, halves in self.runs.items():
            self.assertGreater(min(traj.min_denominator for traj in halves), 1.0, msg=f"beta={beta}")

    def test_constraint_and_power_conservation(self):
        for beta, (backward, forward) in self.runs.items():
            report = monitor(backward).merge(monitor(forward))
            self.assertLessEqual(report.max_constraint_residual, 1e-8, msg=f"beta={beta}")
            self.assertLessEqual(report.max_power_residual, 1e-8, msg=f"beta={beta}")

    def test_backward_samples_decrease(self):
        for beta, (backward, _) in self.runs.items():
            self.assertTrue(np.all(np.diff(backward.times) < 0), msg=f"beta={beta}")
            self.assertEqual(backward.covered_interval, (-20.0, 0.0))


if __name__ == '__main__':
    unittest.main()
