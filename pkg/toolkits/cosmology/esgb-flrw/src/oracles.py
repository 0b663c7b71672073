#!/usr/bin/env python3
"""
Proof-Side Oracles

The auxiliary combinations B1..B5 of H and dH/dt whose signs decouple the
Hubble evolution into solvable differential inequalities, sign verdicts of
those combinations along integrated trajectories, and a registry of the scalar
comparison equations whose closed-form solutions are the envelopes.

Each registry entry carries its defining equation and initial value, so every
closed form can be cross-checked against a direct numerical integration with
the same stepper that integrates the full system.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

import envelopes as env
from envelopes import BetaRegime
from field_equations import CosmoState

logger = logging.getLogger(__name__)

TOL_SIGN = 1e-9
ArrayLike = Union[float, np.ndarray]


class BName(Enum):
    """Auxiliary B-functions."""
    B1 = "B1"  # dH + 5H^2
    B2 = "B2"  # dH - 6H^4 - 6H^2
    B3 = "B3"  # dH + H^2
    B4 = "B4"  # dH - 3H^2 + 3/2
    B5 = "B5"  # dH - 10H^2 + c(beta) H


class ExpectedSign(Enum):
    POSITIVE = 1
    NEGATIVE = -1


class SignInterval(Enum):
    T_POS = "t_pos"
    T_NEG = "t_neg"


SIGN_RULES: Dict[BName, Tuple[ExpectedSign, SignInterval]] = {
    BName.B1: (ExpectedSign.POSITIVE, SignInterval.T_POS),
    BName.B2: (ExpectedSign.NEGATIVE, SignInterval.T_NEG),
    BName.B3: (ExpectedSign.NEGATIVE, SignInterval.T_POS),
    BName.B4: (ExpectedSign.POSITIVE, SignInterval.T_NEG),
    BName.B5: (ExpectedSign.NEGATIVE, SignInterval.T_NEG),
}


def b5_coefficient(beta: float) -> float:
    """Linear coefficient of B5, fixed by the launch beta for the whole run."""
    return 454.0 * beta / 45.0 if BetaRegime.of(beta) is BetaRegime.LOW else 4.0


def _b_values(name: BName, H: ArrayLike, dH: ArrayLike, beta: float) -> ArrayLike:
    H2 = H * H
    if name is BName.B1:
        return dH + 5.0 * H2
    if name is BName.B2:
        return dH - 6.0 * H2 * H2 - 6.0 * H2
    if name is BName.B3:
        return dH + H2
    if name is BName.B4:
        return dH - 3.0 * H2 + 1.5
    return dH - 10.0 * H2 + b5_coefficient(beta) * H


def eval_B(name: BName, state: CosmoState, dH: float, beta: float) -> float:
    """Evaluate a B-function at a state, with dH taken from rhs(state)."""
    return float(_b_values(name, state.H, dH, beta))


@dataclass
class BSignVerdict:
    """Sign check of one B-function over the samples of one time direction.

    min_abs_margin is the smallest expected_sign * B over the samples; it is
    positive when the sign holds everywhere.
    """
    name: BName
    expected_sign: ExpectedSign
    interval: SignInterval
    min_abs_margin: float
    violated: bool
    worst_t: float
    n_samples: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name.value,
            "expected_sign": self.expected_sign.name.lower(),
            "interval": self.interval.value,
            "min_margin": self.min_abs_margin,
            "violated": self.violated,
            "worst_t": self.worst_t,
            "n_samples": self.n_samples,
        }


def check_signs(traj: Any, beta: float, tol_sign: float = TOL_SIGN) -> List[BSignVerdict]:
    """
    Check B1 > 0 and B3 < 0 on the t > 0 samples and B2 < 0, B4 > 0, B5 < 0 on
    the t < 0 samples of a trajectory. The launch sample t = 0 is excluded
    (the signs are claimed on open intervals).
    """
    times = np.asarray(traj.times)
    H = np.asarray(traj.states)[:, 1]
    dH = np.asarray(traj.derivatives)[:, 1]
    verdicts: List[BSignVerdict] = []
    for name, (expected, interval) in SIGN_RULES.items():
        mask = times > 0.0 if interval is SignInterval.T_POS else times < 0.0
        if not np.any(mask):
            continue
        margins = expected.value * _b_values(name, H[mask], dH[mask], beta)
        worst = int(np.argmin(margins))
        min_margin = float(margins[worst])
        verdict = BSignVerdict(
            name=name,
            expected_sign=expected,
            interval=interval,
            min_abs_margin=min_margin,
            violated=min_margin < -tol_sign,
            worst_t=float(times[mask][worst]),
            n_samples=int(np.count_nonzero(mask)),
        )
        if verdict.violated:
            logger.warning(f"{name.value} sign violated: margin {min_margin:.3e} at t={verdict.worst_t:.6g}")
        verdicts.append(verdict)
    return verdicts


class ComparisonKind(Enum):
    """Scalar comparison equations with closed-form solutions."""
    HUBBLE_LOWER_FUTURE = "hubble_lower_future"
    HUBBLE_UPPER_FUTURE = "hubble_upper_future"
    HUBBLE_UPPER_PAST = "hubble_upper_past"
    HUBBLE_LOWER_PAST = "hubble_lower_past"
    HUBBLE_LOWER_PAST_TRANSCENDENTAL = "hubble_lower_past_transcendental"
    HUBBLE_LOWER_PAST_IMPROVED = "hubble_lower_past_improved"
    PHI_LOWER_PAST = "phi_lower_past"
    PHI_UPPER_PAST = "phi_upper_past"
    PHI_UPPER_FUTURE = "phi_upper_future"
    PHI_LOWER_FUTURE = "phi_lower_future"
    SCALE_FACTOR_LOWER_FUTURE = "scale_factor_lower_future"
    SCALE_FACTOR_UPPER_FUTURE = "scale_factor_upper_future"
    SCALE_FACTOR_LOWER_PAST = "scale_factor_lower_past"
    SCALE_FACTOR_UPPER_PAST = "scale_factor_upper_past"


@dataclass(frozen=True)
class ComparisonEntry:
    """Defining equation dy/dt = rhs(t, y, beta, alpha), y(0) = initial(beta, alpha), and its solution."""
    kind: ComparisonKind
    description: str
    rhs: Callable[[float, float, float, float], float]
    initial: Callable[[float, float], float]
    closed_form: Callable[[float, float, float], float]
    interval: Tuple[float, float]

    @property
    def t_end(self) -> float:
        lower, upper = self.interval
        return upper if upper != 0.0 else lower


def _phi_upper_past_rhs(t: float, y: float, beta: float, alpha: float) -> float:
    if BetaRegime.of(beta) is BetaRegime.LOW:
        return env.SQRT3 * beta - 6.0 * beta ** 3 * y
    return 2.0 * env.SQRT3 / 5.0 - 48.0 * y / 125.0


def _improved_rhs(t: float, y: float, beta: float, alpha: float) -> float:
    return 10.0 * y * y - b5_coefficient(beta) * y


def _start_at_beta(beta: float, alpha: float) -> float:
    return beta


def _start_at_zero(beta: float, alpha: float) -> float:
    return 0.0


def _start_at_one(beta: float, alpha: float) -> float:
    return 1.0


COMPARISON_REGISTRY: Dict[ComparisonKind, ComparisonEntry] = {
    entry.kind: entry for entry in (
        ComparisonEntry(
            ComparisonKind.HUBBLE_LOWER_FUTURE, "dH/dt = -5H^2",
            lambda t, y, b, a: -5.0 * y * y, _start_at_beta,
            lambda b, t, a: env.hubble_lower_future(b, t), (0.0, 20.0)),
        ComparisonEntry(
            ComparisonKind.HUBBLE_UPPER_FUTURE, "dH/dt = -H^2",
            lambda t, y, b, a: -y * y, _start_at_beta,
            lambda b, t, a: env.hubble_upper_future(b, t), (0.0, 20.0)),
        ComparisonEntry(
            ComparisonKind.HUBBLE_UPPER_PAST, "dH/dt = 3H^2 - 3/2",
            lambda t, y, b, a: 3.0 * y * y - 1.5, _start_at_beta,
            lambda b, t, a: env.hubble_upper_past(b, t), (-10.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.HUBBLE_LOWER_PAST, "dH/dt = 6H^4 + 6H^2",
            lambda t, y, b, a: 6.0 * y ** 4 + 6.0 * y * y, _start_at_beta,
            lambda b, t, a: env.comparison_hubble_lower_past(b, t), (-10.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.HUBBLE_LOWER_PAST_TRANSCENDENTAL, "dH/dt = 6H^2 (1 + H^2)/(1 + 2H^2)",
            lambda t, y, b, a: 6.0 * y * y * (1.0 + y * y) / (1.0 + 2.0 * y * y), _start_at_beta,
            lambda b, t, a: env.transcendental_hubble_lower_past(b, t), (-10.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.HUBBLE_LOWER_PAST_IMPROVED, "dH/dt = 10H^2 - c(beta) H",
            _improved_rhs, _start_at_beta,
            lambda b, t, a: env.improved_hubble_lower_past(b, t), (-10.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.PHI_LOWER_PAST, "dphi/dt = -12 phi + sqrt(3)",
            lambda t, y, b, a: -12.0 * y + env.SQRT3, _start_at_zero,
            lambda b, t, a: env.phi_lower_past(t), (-2.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.PHI_UPPER_PAST, "dphi/dt = w(beta) - r(beta) phi",
            _phi_upper_past_rhs, _start_at_zero,
            lambda b, t, a: env.phi_upper_past(b, t), (-10.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.PHI_UPPER_FUTURE, "dphi/dt = sqrt(3)/(t + 1/beta), phi(0) = alpha",
            lambda t, y, b, a: env.SQRT3 / (t + 1.0 / b), lambda b, a: a,
            lambda b, t, a: env.phi_upper_future(b, t, a), (0.0, 50.0)),
        ComparisonEntry(
            ComparisonKind.PHI_LOWER_FUTURE, "dphi/dt = sqrt(3)/((5t + 1/beta)(1 + 4 sqrt(3) beta^2 phi))",
            lambda t, y, b, a: env.SQRT3 / ((5.0 * t + 1.0 / b) * (1.0 + 4.0 * env.SQRT3 * b * b * y)),
            _start_at_zero,
            lambda b, t, a: env.phi_lower_future(b, t), (0.0, 50.0)),
        ComparisonEntry(
            ComparisonKind.SCALE_FACTOR_LOWER_FUTURE, "da/dt = a/(5t + 1/beta)",
            lambda t, y, b, a: y * env.hubble_lower_future(b, t), _start_at_one,
            lambda b, t, a: env.scale_factor_lower_future(b, t), (0.0, 20.0)),
        ComparisonEntry(
            ComparisonKind.SCALE_FACTOR_UPPER_FUTURE, "da/dt = a/(t + 1/beta)",
            lambda t, y, b, a: y * env.hubble_upper_future(b, t), _start_at_one,
            lambda b, t, a: env.scale_factor_upper_future(b, t), (0.0, 20.0)),
        ComparisonEntry(
            ComparisonKind.SCALE_FACTOR_LOWER_PAST, "da/dt = a * upper past H bound",
            lambda t, y, b, a: y * env.hubble_upper_past(b, min(t, 0.0)), _start_at_one,
            lambda b, t, a: env.scale_factor_lower_past(b, t), (-10.0, 0.0)),
        ComparisonEntry(
            ComparisonKind.SCALE_FACTOR_UPPER_PAST, "da/dt = a * improved past H lower bound",
            lambda t, y, b, a: y * env.improved_hubble_lower_past(b, min(t, 0.0)), _start_at_one,
            lambda b, t, a: env.scale_factor_upper_past(b, t), (-10.0, 0.0)),
    )
}


def comparison_solution(kind: ComparisonKind, beta: float, t: float, alpha: float = 0.0) -> float:
    """
    Evaluate the closed-form solution of a registry entry.

    Raises:
        DomainError: outside the solution's validity range
    """
    return COMPARISON_REGISTRY[kind].closed_form(beta, t, alpha)


def integrate_comparison(kind: ComparisonKind, beta: float, alpha: float = 0.0,
                         cfg: Optional[Any] = None, t_end: Optional[float] = None):
    """Integrate a registry entry's defining equation numerically from t = 0."""
    from integrator import IntegratorConfig, solve_system

    entry = COMPARISON_REGISTRY[kind]
    cfg = cfg or IntegratorConfig()
    t_end = entry.t_end if t_end is None else t_end

    def derivative(t: float, y: np.ndarray) -> np.ndarray:
        return np.array([entry.rhs(t, y[0], beta, alpha)])

    return solve_system(derivative, 0.0, [entry.initial(beta, alpha)], t_end, cfg, domain_errors=())


def comparison_discrepancy(kind: ComparisonKind, beta: float, alpha: float = 0.0,
                           cfg: Optional[Any] = None) -> float:
    """Largest relative gap max|y_num - y_closed| / max(1, |y_closed|) over the accepted steps."""
    solution = integrate_comparison(kind, beta, alpha, cfg)
    worst = 0.0
    for t, y in zip(solution.t, solution.y[:, 0]):
        exact = comparison_solution(kind, beta, float(t), alpha)
        worst = max(worst, abs(y - exact) / max(1.0, abs(exact)))
    return worst


# Auxiliary inequalities used in the bound derivations, as numeric predicates

def root_below_linear(x: ArrayLike) -> ArrayLike:
    """sqrt(1 + x^2) < 1 + x for x > 0."""
    return np.hypot(1.0, x) < 1.0 + x


def root_gap_above_reciprocal(x: ArrayLike) -> ArrayLike:
    """sqrt(1 + x^2) - x > 1/(1 + 2x) for x > 0, with the gap written as 1/(x + sqrt(1 + x^2))."""
    return 1.0 / (x + np.hypot(1.0, x)) > 1.0 / (1.0 + 2.0 * x)


def root_above_one(x: ArrayLike) -> ArrayLike:
    """sqrt(1 + x^2) > 1 for x > 0 (resolvable while x^2 exceeds machine epsilon)."""
    return np.hypot(1.0, x) > 1.0


def low_regime_polynomial(x: ArrayLike, beta: float) -> ArrayLike:
    """2x^2 + 454 beta/(135 x) - 56/15; non-positive for beta < x < 1, 0 < beta <= sqrt(5/27)."""
    return 2.0 * x * x + 454.0 * beta / (135.0 * x) - 56.0 / 15.0


def high_regime_polynomial(x: ArrayLike) -> ArrayLike:
    """2x^2 + 4/(3x) - 100/27; negative for 2/5 < x < 1."""
    return 2.0 * x * x + 4.0 / (3.0 * x) - 100.0 / 27.0


def auxiliary_inequalities(x: ArrayLike) -> Dict[str, ArrayLike]:
    return {
        "root_below_linear": root_below_linear(x),
        "root_gap_above_reciprocal": root_gap_above_reciprocal(x),
        "root_above_one": root_above_one(x),
    }
