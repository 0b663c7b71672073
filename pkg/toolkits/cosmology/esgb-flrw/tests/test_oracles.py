#!/usr/bin/env python3
"""
Test Suite for the Oracles

B-function values and sign verdicts, agreement of every comparison closed
form with a direct integration of its defining equation, and the auxiliary
inequalities behind the bounds.
"""

import json
import logging
import math
import os
import sys
import unittest

import numpy as np

# Add the src directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import envelopes
from envelopes import BETA_SPLIT, EnvelopeSet, S, S_inv
from errors import DomainError
from field_equations import rhs
from initial_data import FreeData, make_initial_state
from integrator import integrate, monitor
from oracles import (
    COMPARISON_REGISTRY,
    BName,
    ComparisonKind,
    ExpectedSign,
    auxiliary_inequalities,
    b5_coefficient,
    check_signs,
    comparison_discrepancy,
    comparison_solution,
    eval_B,
    high_regime_polynomial,
    integrate_comparison,
    low_regime_polynomial,
)

# Suppress logging during tests unless debugging
logging.getLogger().setLevel(logging.CRITICAL)

BETA_GRID = (0.1, 0.2, 1.0 / 3.0, 0.43, 0.45, 0.55)


def launch_values(beta: float):
    state = make_initial_state(FreeData(a0=1.0, beta=beta, alpha=0.0))
    return state, rhs(state).dH


class TestBFunctions(unittest.TestCase):

    def test_launch_values(self):
        for beta in (0.1, 1.0 / 3.0, 0.5):
            state, dH = launch_values(beta)
            self.assertAlmostEqual(eval_B(BName.B1, state, dH, beta), 6 * beta ** 4 + 2 * beta ** 2, places=14)
            self.assertAlmostEqual(eval_B(BName.B2, state, dH, beta), -9 * beta ** 2, places=14)
            self.assertAlmostEqual(eval_B(BName.B3, state, dH, beta), 6 * beta ** 4 - 2 * beta ** 2, places=14)

    def test_b4_b5_reference(self):
        beta = 1.0 / 3.0
        state, dH = launch_values(beta)
        b4 = eval_B(BName.B4, state, dH, beta)
        self.assertAlmostEqual(b4, 6 / 81 - 6 / 9 + 1.5, places=14)
        self.assertGreater(b4, 1.0 / 6.0)
        b5 = eval_B(BName.B5, state, dH, beta)
        self.assertAlmostEqual(b5, 6 * beta ** 4 - 131 * beta ** 2 / 45, places=14)
        self.assertAlmostEqual(b5, -0.2494, places=4)

    def test_b5_coefficient_by_regime(self):
        self.assertAlmostEqual(b5_coefficient(1.0 / 3.0), 454.0 / 135.0, places=15)
        self.assertEqual(b5_coefficient(BETA_SPLIT), 454.0 * BETA_SPLIT / 45.0)
        self.assertEqual(b5_coefficient(0.45), 4.0)


class TestSignVerdicts(unittest.TestCase):
    """B-sign suite over the singularity-free beta grid."""

    @classmethod
    def setUpClass(cls):
        cls.verdicts = {}
        for beta in BETA_GRID:
            state0 = make_initial_state(FreeData(a0=1.0, beta=beta, alpha=0.0))
            backward, forward = integrate(state0, -20.0), integrate(state0, 100.0)
            cls.verdicts[beta] = check_signs(backward, beta) + check_signs(forward, beta)

    def test_all_five_signs_hold(self):
        for beta, verdicts in self.verdicts.items():
            self.assertEqual({v.name for v in verdicts}, set(BName), msg=f"beta={beta}")
            for verdict in verdicts:
                self.assertFalse(verdict.violated, msg=f"beta={beta} {verdict.name.value}")
                self.assertGreaterEqual(verdict.min_abs_margin, -1e-9)
                self.assertGreater(verdict.n_samples, 0)

    def test_expected_signs(self):
        rules = {v.name: v.expected_sign for v in self.verdicts[1.0 / 3.0]}
        self.assertIs(rules[BName.B1], ExpectedSign.POSITIVE)
        self.assertIs(rules[BName.B4], ExpectedSign.POSITIVE)
        for name in (BName.B2, BName.B3, BName.B5):
            self.assertIs(rules[name], ExpectedSign.NEGATIVE)

    def test_verdicts_serialize(self):
        payload = json.dumps([v.to_dict() for v in self.verdicts[0.45]])
        self.assertIn('"B5"', payload)

    def test_launch_sample_excluded(self):
        state0 = make_initial_state(FreeData(a0=1.0, beta=0.3, alpha=0.0))
        traj = integrate(state0, 1.0)
        verdicts = check_signs(traj, 0.3)
        self.assertEqual({v.name for v in verdicts}, {BName.B1, BName.B3})
        self.assertEqual(verdicts[0].n_samples, len(traj) - 1)

    def test_monitor_hands_off_signs(self):
        state0 = make_initial_state(FreeData(a0=1.0, beta=0.3, alpha=0.0))
        report = monitor(integrate(state0, 5.0), beta=0.3)
        self.assertTrue(report.signs_hold)
        self.assertEqual(len(report.sign_verdicts), 2)

    def test_lower_hubble_envelope_follows_b1(self):
        beta = 0.2
        state0 = make_initial_state(FreeData(a0=1.0, beta=beta, alpha=0.0))
        traj = integrate(state0, 50.0)
        positive = traj.times > 0.0
        lower = np.array([envelopes.hubble_lower_future(beta, t) for t in traj.times[positive]])
        self.assertTrue(np.all(traj.column("H")[positive] > lower))


class TestComparisonRegistry(unittest.TestCase):

    def test_every_kind_registered(self):
        self.assertEqual(set(COMPARISON_REGISTRY), set(ComparisonKind))

    def test_closed_forms_match_integration(self):
        for kind in ComparisonKind:
            for beta in (1.0 / 3.0, 0.5):
                gap = comparison_discrepancy(kind, beta)
                self.assertLessEqual(gap, 1e-8, msg=f"{kind.value} beta={beta}")

    def test_shifted_phi_upper(self):
        self.assertLessEqual(comparison_discrepancy(ComparisonKind.PHI_UPPER_FUTURE, 0.3, alpha=0.5), 1e-8)

    def test_coherent_with_envelopes(self):
        beta = 1.0 / 3.0
        env = EnvelopeSet(beta=beta)
        for t in np.linspace(0.0, 20.0, 100):
            lower, upper = env.bounds("H", t)
            self.assertEqual(comparison_solution(ComparisonKind.HUBBLE_LOWER_FUTURE, beta, t), lower)
            self.assertEqual(comparison_solution(ComparisonKind.HUBBLE_UPPER_FUTURE, beta, t), upper)
        for t in np.linspace(-10.0, 0.0, 100)[:-1]:
            lower, upper = env.bounds("phi", t)
            self.assertEqual(comparison_solution(ComparisonKind.PHI_LOWER_PAST, beta, t), lower)
            self.assertEqual(comparison_solution(ComparisonKind.PHI_UPPER_PAST, beta, t), upper)

    def test_reference_values(self):
        self.assertAlmostEqual(comparison_solution(ComparisonKind.HUBBLE_UPPER_FUTURE, 1.0 / 3.0, 3.0),
                               1.0 / 6.0, places=15)
        self.assertEqual(comparison_solution(ComparisonKind.PHI_LOWER_PAST, 1.0 / 3.0, 0.0), 0.0)

    def test_implicit_lower_bound(self):
        x = S_inv(S(3.0) + 6.0)
        value = comparison_solution(ComparisonKind.HUBBLE_LOWER_PAST_TRANSCENDENTAL, 1.0 / 3.0, -1.0)
        self.assertAlmostEqual(value, 1.0 / x, places=15)
        self.assertLessEqual(abs(1.0 / value + math.atan(1.0 / value) - (6.0 + 3.0 + math.atan(3.0))), 1e-10)

    def test_exact_past_lower_bound(self):
        # 1/H + arctan(H) = -6t + 1/beta + arctan(beta)
        beta = 1.0 / 3.0
        for t in (-0.01, -1.0, -10.0):
            value = comparison_solution(ComparisonKind.HUBBLE_LOWER_PAST, beta, t)
            target = -6.0 * t + 3.0 + math.atan(beta)
            self.assertLessEqual(abs(1.0 / value + math.atan(value) - target), 1e-10 * target)

    def test_exact_past_lower_bound_reference(self):
        value = comparison_solution(ComparisonKind.HUBBLE_LOWER_PAST, 1.0 / 3.0, -10.0)
        self.assertAlmostEqual(value, 0.0157963, delta=1e-6)
        self.assertLess(value, comparison_solution(ComparisonKind.HUBBLE_LOWER_PAST_TRANSCENDENTAL, 1.0 / 3.0, -10.0))

    def test_transcendental_entry_solves_its_own_equation(self):
        entry = COMPARISON_REGISTRY[ComparisonKind.HUBBLE_LOWER_PAST_TRANSCENDENTAL]
        self.assertIn("(1 + 2H^2)", entry.description)
        solution = integrate_comparison(ComparisonKind.HUBBLE_LOWER_PAST_TRANSCENDENTAL, 1.0 / 3.0)
        self.assertAlmostEqual(float(solution.y[-1, 0]), 0.0159504, delta=1e-6)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            comparison_solution(ComparisonKind.HUBBLE_UPPER_PAST, 1.0 / 3.0, 1.0)
        with self.assertRaises(DomainError):
            comparison_solution(ComparisonKind.HUBBLE_UPPER_FUTURE, 1.0 / 3.0, -3.0)


class TestAuxiliaryInequalities(unittest.TestCase):

    def test_root_inequalities(self):
        rng = np.random.default_rng(123)
        x = 10.0 ** rng.uniform(-6.0, 6.0, 100000)
        for name, holds in auxiliary_inequalities(x).items():
            self.assertTrue(np.all(holds), msg=name)

    def test_low_regime_polynomial(self):
        for beta in np.linspace(0.0, BETA_SPLIT, 101)[1:]:
            x = np.linspace(beta, 1.0, 2001)[1:-1]
            self.assertLessEqual(float(np.max(low_regime_polynomial(x, beta))), 1e-12, msg=f"beta={beta}")

    def test_high_regime_polynomial(self):
        x = np.linspace(0.4, 1.0, 10001)[1:-1]
        self.assertTrue(np.all(high_regime_polynomial(x) < 0.0))


if __name__ == '__main__':
    unittest.main()
