#!/usr/bin/env python3
"""
Envelope Verification

Integrates a run in both directions, samples it on a log-spaced grid and
checks that H, phi, dphi/dt and a lie strictly inside their analytic
envelopes, together with the B-function sign verdicts. Each lower/upper side
of each bound variant is a separate BoundCheck so reports can name the first
violated bound.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from envelopes import EnvelopeMode, EnvelopeSet, HLowerPast, PhiLowerVariant, QUANTITIES
from errors import PreconditionError
from initial_data import DataClassification, FreeData, classify, make_initial_state
from integrator import (
    Direction,
    IntegratorConfig,
    MonitorReport,
    TerminalStatus,
    Trajectory,
    integrate,
    monitor,
    sample_at,
)

logger = logging.getLogger(__name__)

MARGIN_TOLERANCE = 1e-9
SCALE_FLOOR = 1e-300
GRID_START = 1e-3
DEFAULT_GRID_POINTS = 400


@dataclass
class BoundCheck:
    """Outcome of one side of one envelope over the samples of one direction."""
    quantity: str
    side: str
    direction: Direction
    variant: str
    gating: bool
    worst_margin: float = math.inf
    worst_relative_margin: float = math.inf
    worst_t: float = math.nan
    n_samples: int = 0

    @property
    def passed(self) -> bool:
        return self.worst_relative_margin > MARGIN_TOLERANCE

    @property
    def label(self) -> str:
        return f"{self.quantity} {self.side} ({self.direction.value}, {self.variant})"

    def update(self, t: float, margin: float, scale: float) -> None:
        relative = margin / scale if scale > 0.0 else margin
        self.n_samples += 1
        if relative < self.worst_relative_margin:
            self.worst_relative_margin = relative
            self.worst_margin = margin
            self.worst_t = t

    def to_dict(self) -> Dict[str, Any]:
        return {
            "quantity": self.quantity,
            "side": self.side,
            "direction": self.direction.value,
            "variant": self.variant,
            "gating": self.gating,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_relative_margin": self.worst_relative_margin,
            "worst_t": self.worst_t,
            "n_samples": self.n_samples,
        }


@dataclass
class VerificationReport:
    """Everything cmd_verify prints or writes for one run."""
    data: FreeData
    mode: EnvelopeMode
    classification: DataClassification
    checks: List[BoundCheck]
    monitor: MonitorReport
    trajectories: Dict[Direction, Trajectory] = field(default_factory=dict, repr=False)

    @property
    def integrations_complete(self) -> bool:
        return all(traj.terminal_status is TerminalStatus.REACHED_T_END for traj in self.trajectories.values())

    @property
    def passed(self) -> bool:
        gating_ok = all(check.passed for check in self.checks if check.gating)
        return self.integrations_complete and gating_ok and self.monitor.signs_hold

    def first_failure(self) -> Optional[str]:
        for direction, traj in self.trajectories.items():
            if traj.terminal_status is not TerminalStatus.REACHED_T_END:
                return f"{direction.value} integration ended with {traj.terminal_status.value}"
        for check in self.checks:
            if check.gating and not check.passed:
                return (f"{check.label} violated at t={check.worst_t:.6g} "
                        f"(margin {check.worst_margin:.3e})")
        for verdict in self.monitor.sign_verdicts:
            if verdict.violated:
                return (f"{verdict.name.value} sign violated at t={verdict.worst_t:.6g} "
                        f"(margin {verdict.min_abs_margin:.3e})")
        return None

    def variant_summary(self, quantity: str, side: str) -> Dict[str, bool]:
        """Per-variant pass/fail of one bound side, across directions."""
        summary: Dict[str, bool] = {}
        for check in self.checks:
            if check.quantity == quantity and check.side == side:
                summary[check.variant] = summary.get(check.variant, True) and check.passed
        return summary

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.data.beta,
            "alpha": self.data.alpha,
            "a0": self.data.a0,
            "s": self.data.s,
            "mode": self.mode.value,
            "kappa": self.classification.kappa,
            "passed": self.passed,
            "first_failure": self.first_failure(),
            "terminal_status": {d.value: traj.terminal_status.value for d, traj in self.trajectories.items()},
            "monitor": self.monitor.to_dict(),
            "checks": [check.to_dict() for check in self.checks],
        }


def side_scale(value: float, bound: float) -> float:
    """Scale of one envelope side: the larger of the value and that side's bound only."""
    return max(abs(value), abs(bound), SCALE_FLOOR)


def sample_grid(t_end: float, grid_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Log-spaced sample times in |t| from min(1e-3, |t_end|) to |t_end|, signed like t_end."""
    span = abs(t_end)
    start = min(GRID_START, span)
    return math.copysign(1.0, t_end) * np.geomspace(start, span, grid_points)


def _bound_families(beta: float, alpha: float, mode: EnvelopeMode,
                    direction: Direction) -> List[Tuple[EnvelopeSet, str, Dict[str, Tuple[bool, Optional[bool]]]]]:
    """
    Envelope variants to check in one direction, each with the quantities it
    covers and (lower gating, upper gating) flags.
    """
    primary = EnvelopeSet(beta=beta, alpha=alpha, mode=mode)
    scalarization = mode is EnvelopeMode.THM12
    gates = {
        "H": (True, True),
        "phi": (not scalarization, True),
        "phidot": (not scalarization, True),
        "a": (True, True),
    }
    families = [(primary, "default", gates)]
    if direction is Direction.FORWARD:
        display = EnvelopeSet(beta=beta, alpha=alpha, mode=mode, phi_lower=PhiLowerVariant.DISPLAY)
        families.append((display, "phi_lower:display", {"phi": (False, None)}))
    else:
        for variant in (HLowerPast.COMPARISON, HLowerPast.TRANSCENDENTAL, HLowerPast.SIMPLE):
            alternative = EnvelopeSet(beta=beta, alpha=alpha, mode=mode, h_lower_past=variant)
            families.append((alternative, f"h_lower:{variant.value}", {"H": (False, None)}))
    return families


def check_envelopes(traj: Trajectory, beta: float, alpha: float, mode: EnvelopeMode,
                    times: Iterable[float]) -> List[BoundCheck]:
    """Strict sandwich checks of a trajectory at the given sample times."""
    a0 = float(traj.states[0, 0])
    states = [sample_at(traj, float(t)) for t in times]
    checks: List[BoundCheck] = []
    for env, variant, gates in _bound_families(beta, alpha, mode, traj.direction):
        for quantity in QUANTITIES:
            if quantity not in gates:
                continue
            lower_gate, upper_gate = gates[quantity]
            lower_check = BoundCheck(quantity, "lower", traj.direction, variant, gating=bool(lower_gate))
            upper_check = BoundCheck(quantity, "upper", traj.direction, variant, gating=bool(upper_gate))
            for state in states:
                value = {"H": state.H, "phi": state.phi, "phidot": state.Phi, "a": state.a}[quantity]
                lower, upper = env.bounds(quantity, state.t, a0)
                lower_check.update(state.t, value - lower, side_scale(value, lower))
                if upper_gate is not None:
                    upper_check.update(state.t, upper - value, side_scale(value, upper))
            checks.append(lower_check)
            if upper_gate is not None:
                checks.append(upper_check)
    return checks


def verify_run(data: FreeData, cfg: Optional[IntegratorConfig] = None, t_min: float = -20.0,
               t_max: float = 100.0, mode: EnvelopeMode = EnvelopeMode.THM21,
               grid_points: int = DEFAULT_GRID_POINTS, gate: bool = True) -> VerificationReport:
    """
    Integrate, sample and check one run against its theorem's envelopes.

    Raises:
        PreconditionError: if gate is set and the data fails the theorem's hypotheses
    """
    cfg = cfg or IntegratorConfig()
    classification = classify(data)
    admitted = classification.theorem21_ok if mode is EnvelopeMode.THM21 else classification.theorem12_ok
    if gate and not admitted:
        failed = [reason for reason in classification.reasons if not reason.endswith(": ok")]
        raise PreconditionError(f"data (beta={data.beta}, alpha={data.alpha}, s={data.s}) "
                                f"fails the {mode.value} hypotheses: {'; '.join(failed)}")
    if mode is EnvelopeMode.THM12:
        t_min = 0.0

    state0 = make_initial_state(data)
    trajectories: Dict[Direction, Trajectory] = {}
    checks: List[BoundCheck] = []
    report: Optional[MonitorReport] = None

    for t_end in (t_min, t_max):
        if t_end == 0.0:
            continue
        traj = integrate(state0, t_end, cfg, branch=data.s)
        trajectories[traj.direction] = traj
        part = monitor(traj, data.beta)
        report = part if report is None else report.merge(part)
        lower, upper = traj.covered_interval
        times = [t for t in sample_grid(t_end, grid_points) if lower <= t <= upper]
        checks.extend(check_envelopes(traj, data.beta, data.alpha, mode, times))

    if report is None:
        raise PreconditionError("nothing to verify: t_min = t_max = 0")
    report.envelope_violations = [check.label for check in checks if check.gating and not check.passed]

    result = VerificationReport(data=data, mode=mode, classification=classification,
                                checks=checks, monitor=report, trajectories=trajectories)
    logger.info(f"verify beta={data.beta:g} alpha={data.alpha:g} mode={mode.value}: "
                f"{'pass' if result.passed else 'FAIL'}")
    return result
