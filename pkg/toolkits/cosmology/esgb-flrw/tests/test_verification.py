#!/usr/bin/env python3
"""
Test Suite for Envelope Verification

End-to-end sandwich checks for singularity-free and scalarization data,
precondition gating and report serialization.
"""

import json
import logging
import os
import sys
import time
import unittest

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from envelopes import EnvelopeMode
from errors import PreconditionError
from initial_data import FreeData
from integrator import Direction
from verification import BoundCheck, check_envelopes, sample_grid, side_scale, verify_run

# Suppress logging during tests unless debugging
logging.getLogger().setLevel(logging.CRITICAL)

BETA_GRID = (0.1, 0.2, 1.0 / 3.0, 0.43, 0.45, 0.55)
SUITE_SECONDS = 10.0


class TestSampleGrid(unittest.TestCase):

    def test_forward_grid(self):
        times = sample_grid(100.0)
        self.assertEqual(len(times), 400)
        self.assertAlmostEqual(times[0], 1e-3, places=15)
        self.assertAlmostEqual(times[-1], 100.0, places=10)
        self.assertTrue(np.all(np.diff(times) > 0))

    def test_backward_grid(self):
        times = sample_grid(-20.0, 50)
        self.assertEqual(len(times), 50)
        self.assertTrue(np.all(times < 0))
        self.assertAlmostEqual(times[-1], -20.0, places=10)

    def test_short_interval(self):
        times = sample_grid(1e-4, 10)
        self.assertTrue(np.allclose(times, 1e-4))


class TestBoundCheck(unittest.TestCase):

    def test_tracks_worst_relative_margin(self):
        check = BoundCheck("H", "lower", Direction.FORWARD, "default", gating=True)
        check.update(1.0, 0.5, 1.0)
        check.update(2.0, 0.01, 0.1)
        check.update(3.0, 0.02, 1.0)
        self.assertEqual(check.worst_t, 3.0)
        self.assertEqual(check.n_samples, 3)
        self.assertTrue(check.passed)

    def test_touching_bound_fails(self):
        check = BoundCheck("phi", "upper", Direction.BACKWARD, "default", gating=True)
        check.update(-1.0, 0.0, 0.6)
        self.assertFalse(check.passed)
        self.assertIn("phi upper (backward, default)", check.label)

    def test_side_scale_ignores_opposite_bound(self):
        # phi at t = -20 for beta = 1/3: the lower bound sits ~94 orders below the upper one
        value, lower, upper = -5.36e9, -2.46e103, -218.0
        self.assertEqual(side_scale(value, upper), 5.36e9)
        self.assertEqual(side_scale(value, lower), 2.46e103)
        upper_check = BoundCheck("phi", "upper", Direction.BACKWARD, "default", gating=True)
        upper_check.update(-20.0, upper - value, side_scale(value, upper))
        self.assertTrue(upper_check.passed)
        self.assertAlmostEqual(upper_check.worst_relative_margin, 1.0, delta=1e-6)
        lower_check = BoundCheck("phi", "lower", Direction.BACKWARD, "default", gating=True)
        lower_check.update(-20.0, value - lower, side_scale(value, lower))
        self.assertTrue(lower_check.passed)

    def test_side_scale_floor(self):
        self.assertGreater(side_scale(0.0, 0.0), 0.0)


class TestSingularityFreeVerification(unittest.TestCase):
    """Every bound and sign holds over [-20, 100] on the beta grid."""

    @classmethod
    def setUpClass(cls):
        started = time.perf_counter()
        cls.reports = {beta: verify_run(FreeData(a0=1.0, beta=beta, alpha=0.0)) for beta in BETA_GRID}
        cls.elapsed = time.perf_counter() - started

    def test_all_runs_pass(self):
        for beta, report in self.reports.items():
            self.assertTrue(report.passed, msg=f"beta={beta}: {report.first_failure()}")
            self.assertIsNone(report.first_failure())

    def test_suite_runtime(self):
        self.assertLess(self.elapsed, SUITE_SECONDS)

    def test_proven_past_lower_bound_holds(self):
        for beta, report in self.reports.items():
            self.assertTrue(report.variant_summary("H", "lower")["h_lower:comparison"], msg=f"beta={beta}")

    def test_both_directions_checked(self):
        report = self.reports[1.0 / 3.0]
        self.assertEqual(set(report.trajectories), {Direction.FORWARD, Direction.BACKWARD})
        directions = {check.direction for check in report.checks}
        self.assertEqual(directions, {Direction.FORWARD, Direction.BACKWARD})

    def test_informational_variants_present(self):
        report = self.reports[0.45]
        self.assertIn("phi_lower:display", report.variant_summary("phi", "lower"))
        h_lower = report.variant_summary("H", "lower")
        self.assertIn("h_lower:comparison", h_lower)
        self.assertIn("h_lower:transcendental", h_lower)
        self.assertIn("h_lower:simple", h_lower)
        for check in report.checks:
            if check.variant != "default":
                self.assertFalse(check.gating)

    def test_sampled_grid_counts(self):
        report = self.reports[0.2]
        for check in report.checks:
            self.assertEqual(check.n_samples, 400, msg=check.label)

    def test_report_serializes(self):
        payload = json.loads(json.dumps(self.reports[1.0 / 3.0].to_dict()))
        self.assertTrue(payload["passed"])
        self.assertEqual(payload["mode"], "thm21")
        self.assertEqual(payload["terminal_status"], {"forward": "reached_t_end", "backward": "reached_t_end"})
        self.assertAlmostEqual(payload["kappa"], -7.0 / 27.0, places=14)
        self.assertEqual(payload["monitor"]["envelope_violations"], [])


class TestScalarizationVerification(unittest.TestCase):
    """Forward-only checks for alpha >= 0 data in the admissible set."""

    def test_reference_points_pass(self):
        for alpha, beta in ((1.0, 0.5), (0.5, 0.3)):
            report = verify_run(FreeData(a0=1.0, beta=beta, alpha=alpha), t_min=-5.0, t_max=200.0,
                                mode=EnvelopeMode.THM12)
            self.assertTrue(report.passed, msg=f"alpha={alpha} beta={beta}: {report.first_failure()}")
            self.assertEqual(set(report.trajectories), {Direction.FORWARD})
            summary = report.variant_summary("phi", "lower")
            self.assertIn("default", summary)
            self.assertIn("phi_lower:display", summary)

    def test_scalar_lower_bounds_informational(self):
        report = verify_run(FreeData(a0=1.0, beta=0.5, alpha=1.0), t_max=50.0, mode=EnvelopeMode.THM12)
        for check in report.checks:
            if check.quantity in ("phi", "phidot") and check.side == "lower":
                self.assertFalse(check.gating)
            if check.quantity in ("H", "a"):
                self.assertTrue(check.gating)


class TestPreconditions(unittest.TestCase):

    def test_beta_out_of_range(self):
        with self.assertRaises(PreconditionError):
            verify_run(FreeData(a0=1.0, beta=0.7, alpha=0.0))

    def test_nonzero_alpha_in_singularity_free_mode(self):
        with self.assertRaises(PreconditionError):
            verify_run(FreeData(a0=1.0, beta=0.3, alpha=0.5))

    def test_negative_branch(self):
        with self.assertRaises(PreconditionError) as ctx:
            verify_run(FreeData(a0=1.0, beta=0.3, alpha=0.0, s=-1))
        self.assertIn("not positive", str(ctx.exception))

    def test_ungated_run_reports_instead(self):
        report = verify_run(FreeData(a0=1.0, beta=0.3, alpha=0.0, s=-1), t_min=-1.0, t_max=5.0, gate=False)
        self.assertFalse(report.passed)
        self.assertIsNotNone(report.first_failure())

    def test_empty_interval(self):
        with self.assertRaises(PreconditionError):
            verify_run(FreeData(a0=1.0, beta=0.3, alpha=0.0), t_min=0.0, t_max=0.0)


class TestCheckEnvelopes(unittest.TestCase):

    def test_direct_call_matches_report(self):
        from initial_data import make_initial_state
        from integrator import integrate

        data = FreeData(a0=2.0, beta=0.3, alpha=0.0)
        traj = integrate(make_initial_state(data), 10.0)
        checks = check_envelopes(traj, 0.3, 0.0, EnvelopeMode.THM21, sample_grid(10.0, 40))
        self.assertTrue(all(check.passed for check in checks if check.gating))
        scale_checks = [check for check in checks if check.quantity == "a"]
        self.assertEqual(len(scale_checks), 2)


if __name__ == '__main__':
    unittest.main()
