#!/usr/bin/env python3
"""
Adaptive Integrator for the Reduced ESGB System

An explicit Dormand-Prince 5(4) embedded pair with PI step-size control,
usable for any n-dimensional autonomous or non-autonomous system (the scalar
comparison equations run through the same core). Integration towards earlier
times is realised by the reflection tau = -t with a negated right-hand side,
so a single stepper serves both directions.

The ESGB-specific layer (integrate, Trajectory, sample_at, monitor) records the
normalized constraint and power-identity residuals at every accepted step and
stops with a terminal status, never an exception, when the physics leaves the
well-posed region.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
import yaml
from scipy.interpolate import CubicHermiteSpline

from errors import ConfigError, DenominatorTooSmall, OutOfRange
from field_equations import (
    CosmoState,
    branch_of,
    constraint_branch,
    gb_denominator,
    normalized_constraint_residual,
    normalized_power_residual,
    rhs_vector,
)

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau; the last row of A is the 5th-order weight vector (FSAL)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
# difference between the 5th- and 4th-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

PI_ALPHA = 0.17
PI_BETA = 0.04
EVENT_STEP_FLOOR = 1e-8

DerivativeFn = Callable[[float, np.ndarray], np.ndarray]


class Direction(Enum):
    """Time direction of an integration."""
    FORWARD = "forward"
    BACKWARD = "backward"


class TerminalStatus(Enum):
    """How an integration ended."""
    REACHED_T_END = "reached_t_end"
    DENOMINATOR_EVENT = "denominator_event"
    CONSTRAINT_DRIFT = "constraint_drift"
    STEP_BUDGET_EXHAUSTED = "step_budget_exhausted"


@dataclass
class IntegratorConfig:
    """Tolerances, step limits and abort thresholds for one integration."""
    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float = 1e-3
    h_max: float = 1.0
    max_steps: int = 10_000_000
    denom_floor: float = 1e-10
    constraint_abort: float = 1e-6
    fixed_step: Optional[float] = None  # test-only: disables error control
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 10.0
    event_tolerance: float = 1e-10

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigError(f"tolerances must be positive (rtol={self.rtol}, atol={self.atol})")
        if not 0 < self.h_init <= self.h_max:
            raise ConfigError(f"need 0 < h_init <= h_max (h_init={self.h_init}, h_max={self.h_max})")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.denom_floor < 0 or self.constraint_abort <= 0:
            raise ConfigError("denom_floor must be >= 0 and constraint_abort > 0")
        if self.fixed_step is not None and self.fixed_step <= 0:
            raise ConfigError(f"fixed_step must be positive, got {self.fixed_step}")
        if not 0 < self.min_factor < 1 < self.max_factor or not 0 < self.safety <= 1:
            raise ConfigError("step controller factors must satisfy 0 < min_factor < 1 < max_factor, 0 < safety <= 1")

    @classmethod
    def from_mapping(cls, mapping: Dict[str, Any]) -> "IntegratorConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"Unknown integrator settings: {sorted(unknown)}")
        values = dict(mapping)
        if "max_steps" in values:
            values["max_steps"] = int(float(values["max_steps"]))
        for name in known - {"max_steps", "fixed_step"}:
            if name in values:
                values[name] = float(values[name])
        if values.get("fixed_step") is not None:
            values["fixed_step"] = float(values["fixed_step"])
        return cls(**values)

    @classmethod
    def from_yaml(cls, path: Union[str, Path], section: str = "integrator") -> "IntegratorConfig":
        with open(path, "r") as f:
            document = yaml.safe_load(f) or {}
        return cls.from_mapping(document.get(section) or {})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class OdeSolution:
    """Raw output of the stepper core: accepted samples in integration order."""
    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    status: TerminalStatus
    n_steps: int
    n_rejected: int
    event_time: Optional[float] = None


def _dopri_stage(g: DerivativeFn, tau: float, y: np.ndarray, k1: np.ndarray,
                 h: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = np.empty((7, y.size))
    k[0] = k1
    y_stage = y
    for i in range(1, 7):
        y_stage = y + h * (_A[i, :i] @ k[:i])
        k[i] = g(tau + _C[i] * h, y_stage)
    error = h * (_E @ k)
    return y_stage, k[6], error


def _error_norm(error: np.ndarray, y: np.ndarray, y_new: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    norm = float(np.sqrt(np.mean((error / scale) ** 2)))
    return norm if math.isfinite(norm) else math.inf


def solve_system(f: DerivativeFn, t0: float, y0: Sequence[float], t_end: float,
                 cfg: IntegratorConfig,
                 accept_hook: Optional[Callable[[float, np.ndarray, np.ndarray], Optional[TerminalStatus]]] = None,
                 project: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
                 domain_errors: Tuple[Type[Exception], ...] = (DenominatorTooSmall,)) -> OdeSolution:
    """
    Integrate dy/dt = f(t, y) from t0 to t_end with the Dormand-Prince 5(4) pair.

    t_end < t0 integrates g(tau, y) = -f(-tau, y) forward in tau = -t. Step
    magnitudes in cfg are direction-free.

    Args:
        f: right-hand side, may raise one of domain_errors outside its domain
        accept_hook: called with (t, y, dy/dt) after every accepted step; a
            returned TerminalStatus ends the run after recording the sample
        project: maps an accepted (t, y) to a replacement y (diagnostic runs)
        domain_errors: exceptions from f that mark a domain boundary; the
            boundary is located by step bisection to cfg.event_tolerance

    Returns:
        OdeSolution with samples in integration order (t decreasing backward)
    """
    if t_end == t0:
        raise ConfigError("t_end must differ from the initial time")
    sign = 1.0 if t_end > t0 else -1.0

    def g(tau: float, y: np.ndarray) -> np.ndarray:
        return sign * np.asarray(f(sign * tau, y), dtype=float)

    tau = sign * t0
    tau_end = sign * t_end
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    k1 = g(tau, y)

    ts: List[float] = [t0]
    ys: List[np.ndarray] = [y.copy()]
    dys: List[np.ndarray] = [sign * k1]
    status = TerminalStatus.REACHED_T_END
    event_time: Optional[float] = None
    n_attempts = 0
    n_rejected = 0
    previous_error = 1e-4
    last_rejected = False
    h = min(cfg.fixed_step or cfg.h_init, cfg.h_max)
    end_slack = 1e-14 * max(1.0, abs(tau_end))

    if accept_hook is not None:
        early = accept_hook(t0, y, sign * k1)
        if early is not None:
            return OdeSolution(np.array(ts), np.array(ys), np.array(dys), early, 0, 0)

    while tau_end - tau > end_slack:
        if n_attempts >= cfg.max_steps:
            status = TerminalStatus.STEP_BUDGET_EXHAUSTED
            logger.warning(f"Step budget of {cfg.max_steps} exhausted at t={sign * tau:.6g}")
            break
        n_attempts += 1

        last_step = h >= tau_end - tau
        if last_step:
            h = tau_end - tau

        try:
            y_new, k7, error = _dopri_stage(g, tau, y, k1, h)
        except domain_errors as exc:
            n_rejected += 1
            if cfg.fixed_step is None and h > EVENT_STEP_FLOOR:
                logger.debug(f"Domain error at t={sign * tau:.6g} with h={h:.3e}: {exc}; shrinking step")
                h *= 0.25
                last_rejected = True
                continue
            # bisection on the step length for the last admissible point
            lower, upper = 0.0, h
            admissible = None
            while upper - lower > cfg.event_tolerance:
                middle = 0.5 * (lower + upper)
                try:
                    admissible = _dopri_stage(g, tau, y, k1, middle)
                    lower = middle
                except domain_errors:
                    upper = middle
            if admissible is not None:
                tau += lower
                y, k1 = admissible[0], admissible[1]
                ts.append(sign * tau)
                ys.append(y.copy())
                dys.append(sign * k1)
            event_time = sign * (tau + (upper - lower))
            status = TerminalStatus.DENOMINATOR_EVENT
            logger.warning(f"Denominator event located at t={event_time:.12g}")
            break

        if cfg.fixed_step is not None:
            err = 0.0
        else:
            err = _error_norm(error, y, y_new, cfg.rtol, cfg.atol)

        if err <= 1.0:
            tau = tau_end if last_step else tau + h
            y = y_new
            k1 = k7
            if project is not None:
                projected = np.asarray(project(sign * tau, y), dtype=float)
                if not np.array_equal(projected, y):
                    y = projected
                    k1 = g(tau, y)
            ts.append(sign * tau)
            ys.append(y.copy())
            dys.append(sign * k1)

            if accept_hook is not None:
                verdict = accept_hook(sign * tau, y, sign * k1)
                if verdict is not None:
                    status = verdict
                    break

            if cfg.fixed_step is not None:
                h = cfg.fixed_step
            else:
                if err == 0.0:
                    factor = cfg.max_factor
                else:
                    factor = cfg.safety * err ** -PI_ALPHA * previous_error ** PI_BETA
                    factor = min(cfg.max_factor, max(cfg.min_factor, factor))
                if last_rejected:
                    factor = min(factor, 1.0)
                previous_error = max(err, 1e-4)
                h = min(h * factor, cfg.h_max)
            last_rejected = False
        else:
            n_rejected += 1
            factor = cfg.safety * err ** -0.2 if math.isfinite(err) else cfg.min_factor
            h *= max(cfg.min_factor, min(1.0, factor))
            last_rejected = True

    return OdeSolution(t=np.array(ts), y=np.array(ys), dy=np.array(dys), status=status,
                       n_steps=n_attempts, n_rejected=n_rejected, event_time=event_time)


TRAJECTORY_COLUMNS = ("t", "a", "H", "phi", "phidot", "constraint", "power", "denominator")


@dataclass
class Trajectory:
    """
    Time-ordered samples of one integration with per-sample diagnostics.

    Samples run away from the launch time: increasing t forward, decreasing t
    backward. derivatives hold d/dt of (a, H, phi, Phi) at each sample.
    """
    times: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    direction: Direction
    terminal_status: TerminalStatus
    constraint_residuals: np.ndarray
    power_residuals: np.ndarray
    denominators: np.ndarray
    branch: int = 1
    n_steps: int = 0
    n_rejected: int = 0
    event_time: Optional[float] = None
    _spline: Optional[CubicHermiteSpline] = field(default=None, init=False, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def samples(self) -> List[CosmoState]:
        return [self.state(i) for i in range(len(self))]

    def state(self, index: int) -> CosmoState:
        return CosmoState.from_vector(self.times[index], self.states[index])

    @property
    def final_state(self) -> CosmoState:
        return self.state(len(self) - 1)

    @property
    def covered_interval(self) -> Tuple[float, float]:
        return float(np.min(self.times)), float(np.max(self.times))

    @property
    def max_constraint_residual(self) -> float:
        return float(np.max(self.constraint_residuals))

    @property
    def max_power_residual(self) -> float:
        return float(np.max(self.power_residuals))

    @property
    def min_denominator(self) -> float:
        return float(np.min(self.denominators))

    def column(self, name: str) -> np.ndarray:
        columns = {
            "t": self.times,
            "a": self.states[:, 0],
            "H": self.states[:, 1],
            "phi": self.states[:, 2],
            "phidot": self.states[:, 3],
            "dH": self.derivatives[:, 1],
            "constraint": self.constraint_residuals,
            "power": self.power_residuals,
            "denominator": self.denominators,
        }
        if name not in columns:
            raise KeyError(f"Unknown trajectory column: {name}")
        return columns[name]

    def hermite(self) -> CubicHermiteSpline:
        if self._spline is None:
            order = np.argsort(self.times)
            self._spline = CubicHermiteSpline(self.times[order], self.states[order],
                                              self.derivatives[order], axis=0)
        return self._spline


def _sample_diagnostics(t: float, y: np.ndarray, dy: np.ndarray) -> Tuple[float, float, float]:
    state = CosmoState.from_vector(t, y)
    constraint = normalized_constraint_residual(state)
    power = 0.0 if state.H == 0.0 or not math.isfinite(dy[1]) else normalized_power_residual(state, dy[1])
    return constraint, power, gb_denominator(state)


def integrate(state0: CosmoState, t_end: float, cfg: Optional[IntegratorConfig] = None,
              branch: Optional[int] = None, project: bool = False) -> Trajectory:
    """
    Integrate the reduced ESGB system from state0 to t_end.

    A launch whose normalized constraint residual already exceeds
    cfg.constraint_abort returns a one-sample trajectory with status
    CONSTRAINT_DRIFT. project=True re-solves Phi on the launch branch after
    every accepted step (diagnostic mode only).
    """
    cfg = cfg or IntegratorConfig()
    if t_end == state0.t:
        raise ConfigError("t_end must differ from the launch time")
    direction = Direction.FORWARD if t_end > state0.t else Direction.BACKWARD
    branch = branch if branch is not None else branch_of(state0)

    diagnostics: List[Tuple[float, float, float]] = []

    def record(t: float, y: np.ndarray, dy: np.ndarray) -> Optional[TerminalStatus]:
        sample = _sample_diagnostics(t, y, dy)
        diagnostics.append(sample)
        if sample[0] > cfg.constraint_abort:
            logger.warning(f"Constraint drift {sample[0]:.3e} > {cfg.constraint_abort:.1e} at t={t:.6g}")
            return TerminalStatus.CONSTRAINT_DRIFT
        return None

    def derivative(t: float, y: np.ndarray) -> np.ndarray:
        return rhs_vector(t, y, cfg.denom_floor)

    def reproject(t: float, y: np.ndarray) -> np.ndarray:
        y = y.copy()
        y[3] = constraint_branch(y[1], y[2], branch)
        return y

    y0 = state0.as_vector()
    try:
        solution = solve_system(derivative, state0.t, y0, t_end, cfg, accept_hook=record,
                                project=reproject if project else None)
    except DenominatorTooSmall as exc:
        logger.warning(f"Launch state is outside the well-posed region: {exc}")
        solution = OdeSolution(t=np.array([state0.t]), y=y0[np.newaxis, :],
                               dy=np.full((1, 4), np.nan), status=TerminalStatus.DENOMINATOR_EVENT,
                               n_steps=0, n_rejected=0, event_time=state0.t)
        diagnostics = [(normalized_constraint_residual(state0), math.nan, gb_denominator(state0))]

    if len(diagnostics) < len(solution.t):
        # samples appended by event bisection bypass the acceptance hook
        for i in range(len(diagnostics), len(solution.t)):
            diagnostics.append(_sample_diagnostics(solution.t[i], solution.y[i], solution.dy[i]))
    residuals = np.array(diagnostics, dtype=float).reshape(-1, 3)

    trajectory = Trajectory(
        times=solution.t,
        states=solution.y,
        derivatives=solution.dy,
        direction=direction,
        terminal_status=solution.status,
        constraint_residuals=residuals[:, 0],
        power_residuals=residuals[:, 1],
        denominators=residuals[:, 2],
        branch=branch,
        n_steps=solution.n_steps,
        n_rejected=solution.n_rejected,
        event_time=solution.event_time,
    )
    logger.info(f"{direction.value} run to t={t_end:g}: {len(trajectory)} samples, "
                f"{solution.n_rejected} rejected, status={solution.status.value}")
    return trajectory


def sample_at(traj: Trajectory, t: float) -> CosmoState:
    """
    Dense output: cubic Hermite interpolation on (value, derivative) pairs.

    Raises:
        OutOfRange: if t lies outside the trajectory's covered interval
    """
    lower, upper = traj.covered_interval
    if not lower <= t <= upper:
        raise OutOfRange(f"t={t} outside covered interval [{lower}, {upper}]")
    exact = np.flatnonzero(traj.times == t)
    if exact.size:
        return traj.state(int(exact[0]))
    return CosmoState.from_vector(t, traj.hermite()(t))


@dataclass
class MonitorReport:
    """Certification record for one trajectory (or a merged pair of halves)."""
    max_constraint_residual: float
    max_power_residual: float
    min_denominator: float
    terminal_status: TerminalStatus
    sign_verdicts: List[Any] = field(default_factory=list)
    envelope_violations: List[str] = field(default_factory=list)

    @property
    def signs_hold(self) -> bool:
        return not any(verdict.violated for verdict in self.sign_verdicts)

    def merge(self, other: "MonitorReport") -> "MonitorReport":
        status = self.terminal_status
        if status is TerminalStatus.REACHED_T_END:
            status = other.terminal_status
        return MonitorReport(
            max_constraint_residual=max(self.max_constraint_residual, other.max_constraint_residual),
            max_power_residual=max(self.max_power_residual, other.max_power_residual),
            min_denominator=min(self.min_denominator, other.min_denominator),
            terminal_status=status,
            sign_verdicts=self.sign_verdicts + other.sign_verdicts,
            envelope_violations=self.envelope_violations + other.envelope_violations,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_constraint_residual": self.max_constraint_residual,
            "max_power_residual": self.max_power_residual,
            "min_denominator": self.min_denominator,
            "terminal_status": self.terminal_status.value,
            "sign_verdicts": [verdict.to_dict() for verdict in self.sign_verdicts],
            "envelope_violations": list(self.envelope_violations),
        }


def monitor(traj: Trajectory, beta: Optional[float] = None) -> MonitorReport:
    """
    Scan a trajectory's diagnostics; with the launch beta, also evaluate the
    B-function sign verdicts.
    """
    verdicts: List[Any] = []
    if beta is not None:
        from oracles import check_signs
        verdicts = check_signs(traj, beta)
    return MonitorReport(
        max_constraint_residual=float(np.nanmax(traj.constraint_residuals)),
        max_power_residual=float(np.nanmax(traj.power_residuals)) if np.any(np.isfinite(traj.power_residuals)) else math.nan,
        min_denominator=float(np.nanmin(traj.denominators)),
        terminal_status=traj.terminal_status,
        sign_verdicts=verdicts,
    )
