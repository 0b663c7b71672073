#!/usr/bin/env python3
"""
Analytic Envelopes for H, phi, dphi/dt and a

Closed-form lower/upper bounds that bracket every solution launched from the
theorem data, for both time directions and both beta regimes. The named
closed forms below double as the solutions of the comparison equations in the
oracles registry, so each formula lives here exactly once.

Regimes: low for 0 < beta <= sqrt(5/27), high for sqrt(5/27) < beta < sqrt(3)/3.
The scalarization mode (thm12) only covers t >= 0.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Tuple

from scipy.optimize import brentq, newton

from errors import ConfigError, DomainError, ModeRangeError, NonConvergenceError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
BETA_SPLIT = math.sqrt(5.0 / 27.0)
BETA_MAX = SQRT3 / 3.0
QUANTITIES = ("H", "phi", "phidot", "a")

Bounds = Tuple[float, float]


class BetaRegime(Enum):
    """Case split of the past-time bounds on the launch Hubble rate."""
    LOW = "low"
    HIGH = "high"

    @classmethod
    def of(cls, beta: float) -> "BetaRegime":
        if not 0.0 < beta < BETA_MAX:
            raise DomainError(f"beta={beta} outside (0, sqrt(3)/3)")
        return cls.LOW if beta <= BETA_SPLIT else cls.HIGH


class EnvelopeMode(Enum):
    """Which theorem's bounds are evaluated."""
    THM21 = "thm21"  # singularity-free, alpha = 0, both directions
    THM12 = "thm12"  # scalarization, alpha >= 0, t >= 0 only


class PhiLowerVariant(Enum):
    """Coefficient under the square root of the future phi lower bound."""
    PROOF = "proof"
    DISPLAY = "display"

    @property
    def coefficient(self) -> float:
        return 24.0 / 5.0 if self is PhiLowerVariant.PROOF else 48.0 / 5.0


class HLowerPast(Enum):
    """Lower bound used for H at t < 0."""
    IMPROVED = "improved"
    TRANSCENDENTAL = "transcendental"
    COMPARISON = "comparison"
    SIMPLE = "simple"


def S(x: float) -> float:
    """S(x) = x + arctan(x), strictly increasing with S'(x) in (1, 2]."""
    return x + math.atan(x)


def S_inv(y: float, tol: float = 1e-12, max_iter: int = 100) -> float:
    """
    Invert S by Newton's method from x0 = y - sign(y) min(|y|, pi/2).

    The root always lies in [y - pi/2, y + pi/2]; if Newton fails to settle,
    Brent's method on that bracket takes over.

    Raises:
        NonConvergenceError: if |S(x) - y| > tol * max(1, |y|) after max_iter iterations
    """
    if y == 0.0:
        return 0.0
    x0 = y - math.copysign(min(abs(y), math.pi / 2.0), y)

    def residual(x: float) -> float:
        return S(x) - y

    def slope(x: float) -> float:
        return 1.0 + 1.0 / (1.0 + x * x)

    try:
        x = newton(residual, x0, fprime=slope, tol=1e-14, rtol=1e-15, maxiter=max_iter)
    except RuntimeError:
        logger.debug(f"Newton did not settle for S_inv({y}); bracketing")
        try:
            x = brentq(residual, y - math.pi / 2.0, y + math.pi / 2.0, xtol=1e-15, maxiter=max_iter)
        except RuntimeError as exc:
            raise NonConvergenceError(f"S_inv({y}) did not converge: {exc}") from exc
    x = float(x)
    if abs(residual(x)) > tol * max(1.0, abs(y)):
        raise NonConvergenceError(f"S_inv({y}) residual {residual(x):.3e} above {tol}")
    return x


def Q(x: float) -> float:
    """Q(x) = x + arctan(1/x) for x > 0, strictly increasing from pi/2 with Q'(x) = x^2/(1 + x^2)."""
    if not x > 0.0:
        raise DomainError(f"Q needs x > 0, got {x}")
    return x + math.atan(1.0 / x)


def Q_inv(y: float, tol: float = 1e-12, max_iter: int = 100) -> float:
    """
    Invert Q by Newton's method from x0 = y.

    Q is convex, so Newton started right of the root decreases monotonically
    onto it. The root lies in (y - pi/2, y); Brent's method on that bracket
    takes over if Newton stalls.

    Raises:
        DomainError: if y <= pi/2 (outside the range of Q)
        NonConvergenceError: if |Q(x) - y| > tol * max(1, |y|) after max_iter iterations
    """
    if not y > math.pi / 2.0:
        raise DomainError(f"Q_inv needs y > pi/2, got {y}")

    def residual(x: float) -> float:
        return Q(x) - y

    def slope(x: float) -> float:
        return x * x / (1.0 + x * x)

    try:
        x = newton(residual, y, fprime=slope, tol=1e-14, rtol=1e-15, maxiter=max_iter)
        if not x > 0.0:
            raise RuntimeError(f"Newton left the domain at x={x}")
    except RuntimeError:
        logger.debug(f"Newton did not settle for Q_inv({y}); bracketing")
        try:
            x = brentq(residual, max(y - math.pi / 2.0, 1e-300), y, xtol=1e-15, maxiter=max_iter)
        except RuntimeError as exc:
            raise NonConvergenceError(f"Q_inv({y}) did not converge: {exc}") from exc
    x = float(x)
    if abs(residual(x)) > tol * max(1.0, abs(y)):
        raise NonConvergenceError(f"Q_inv({y}) residual {residual(x):.3e} above {tol}")
    return x


def _require_beta(beta: float) -> None:
    if not beta > 0.0:
        raise DomainError(f"closed forms need beta > 0, got {beta}")


def _require_past(t: float) -> None:
    if t > 0.0:
        raise DomainError(f"past-time closed form evaluated at t={t} > 0")


# Future (t >= 0) closed forms

def hubble_lower_future(beta: float, t: float) -> float:
    """1/(5t + 1/beta): solution of dH/dt = -5H^2, H(0) = beta."""
    _require_beta(beta)
    if 5.0 * t + 1.0 / beta <= 0.0:
        raise DomainError(f"t={t} at or before the pole -1/(5 beta)")
    return 1.0 / (5.0 * t + 1.0 / beta)


def hubble_upper_future(beta: float, t: float) -> float:
    """1/(t + 1/beta): solution of dH/dt = -H^2, H(0) = beta."""
    _require_beta(beta)
    if t + 1.0 / beta <= 0.0:
        raise DomainError(f"t={t} at or before the pole -1/beta")
    return 1.0 / (t + 1.0 / beta)


def phi_upper_future(beta: float, t: float, alpha: float = 0.0) -> float:
    """sqrt(3) ln(beta t + 1) + alpha."""
    _require_beta(beta)
    if beta * t <= -1.0:
        raise DomainError(f"t={t} outside the logarithm's domain")
    return SQRT3 * math.log1p(beta * t) + alpha


def phi_lower_future(beta: float, t: float, coefficient: float = 24.0 / 5.0) -> float:
    """(-1 + sqrt(1 + c beta^2 ln(1 + 5 beta t))) / (4 sqrt(3) beta^2)."""
    _require_beta(beta)
    if 5.0 * beta * t <= -1.0:
        raise DomainError(f"t={t} outside the logarithm's domain")
    u = coefficient * beta * beta * math.log1p(5.0 * beta * t)
    if u <= -1.0:
        raise DomainError(f"t={t} makes the square root argument negative")
    # -1 + sqrt(1 + u) without cancellation
    return (u / (1.0 + math.sqrt(1.0 + u))) / (4.0 * SQRT3 * beta * beta)


def phidot_upper_future(beta: float, t: float) -> float:
    """sqrt(3)/(t + 1/beta)."""
    return SQRT3 * hubble_upper_future(beta, t)


def phidot_lower_future(beta: float, t: float, alpha: float = 0.0) -> float:
    """sqrt(3)/(5t + 1/beta) / sqrt(1 + 12 beta^2 (ln(beta t + 1) + alpha))."""
    _require_beta(beta)
    spread = 1.0 + 12.0 * beta * beta * (math.log1p(beta * t) + alpha)
    return SQRT3 * hubble_lower_future(beta, t) / math.sqrt(spread)


def scale_factor_lower_future(beta: float, t: float, a0: float = 1.0) -> float:
    """a0 (5 beta t + 1)^(1/5)."""
    _require_beta(beta)
    return a0 * (5.0 * beta * t + 1.0) ** 0.2


def scale_factor_upper_future(beta: float, t: float, a0: float = 1.0) -> float:
    """a0 (beta t + 1)."""
    _require_beta(beta)
    return a0 * (beta * t + 1.0)


# Past (t <= 0) closed forms

def hubble_upper_past(beta: float, t: float) -> float:
    """Solution of dH/dt = 3H^2 - 3/2, H(0) = beta; increases to 1/sqrt(2) as t -> -inf."""
    _require_beta(beta)
    _require_past(t)
    growth = (SQRT2 - 2.0 * beta) * math.exp(3.0 * SQRT2 * t)
    return (2.0 * beta + SQRT2 - growth) / (SQRT2 * (2.0 * beta + SQRT2 + growth))


def improved_hubble_lower_past(beta: float, t: float) -> float:
    """
    Solution of dH/dt = 10H^2 - c H, H(0) = beta, with c = 454 beta/45 in the
    low regime and c = 4 in the high regime.
    """
    _require_past(t)
    if BetaRegime.of(beta) is BetaRegime.LOW:
        return 227.0 * beta / (2.0 * math.exp(454.0 * beta * t / 45.0) + 225.0)
    return 2.0 * beta / (5.0 * beta - (5.0 * beta - 2.0) * math.exp(4.0 * t))


def transcendental_hubble_lower_past(beta: float, t: float) -> float:
    """
    1/S_inv(S(1/beta) - 6t): solution of dH/dt = 6H^2 (1 + H^2)/(1 + 2H^2), H(0) = beta.

    This is not the comparison solution for B2 < 0; it lies above it for t < 0
    and is carried as a non-gating diagnostic only.
    """
    _require_beta(beta)
    _require_past(t)
    return 1.0 / S_inv(S(1.0 / beta) - 6.0 * t)


def comparison_hubble_lower_past(beta: float, t: float) -> float:
    """
    1/Q_inv(Q(1/beta) - 6t): solution of dH/dt = 6H^4 + 6H^2, H(0) = beta,
    i.e. 1/H + arctan(H) = -6t + 1/beta + arctan(beta).
    """
    _require_beta(beta)
    _require_past(t)
    return 1.0 / Q_inv(Q(1.0 / beta) - 6.0 * t)


def simple_hubble_lower_past(beta: float, t: float) -> float:
    """1/(1/beta - 6t)."""
    _require_beta(beta)
    _require_past(t)
    return 1.0 / (1.0 / beta - 6.0 * t)


def phi_lower_past(t: float) -> float:
    """sqrt(3)/12 (1 - e^(-12t)): solution of dphi/dt = -12 phi + sqrt(3), phi(0) = 0."""
    _require_past(t)
    return -SQRT3 / 12.0 * math.expm1(-12.0 * t)


def phi_upper_past(beta: float, t: float) -> float:
    """Low regime sqrt(3)/(6 beta^2)(1 - e^(-6 beta^3 t)); high regime 25 sqrt(3)/24 (1 - e^(-48t/125))."""
    _require_past(t)
    if BetaRegime.of(beta) is BetaRegime.LOW:
        return -SQRT3 / (6.0 * beta * beta) * math.expm1(-6.0 * beta ** 3 * t)
    return -25.0 * SQRT3 / 24.0 * math.expm1(-48.0 * t / 125.0)


def phidot_lower_past(beta: float, t: float) -> float:
    """Low regime sqrt(3) beta e^(-6 beta^3 t); high regime 2 sqrt(3)/5 e^(-48t/125)."""
    _require_past(t)
    if BetaRegime.of(beta) is BetaRegime.LOW:
        return SQRT3 * beta * math.exp(-6.0 * beta ** 3 * t)
    return 2.0 * SQRT3 / 5.0 * math.exp(-48.0 * t / 125.0)


def phidot_upper_past(t: float) -> float:
    """sqrt(3) e^(-12t)."""
    _require_past(t)
    return SQRT3 * math.exp(-12.0 * t)


def scale_factor_lower_past(beta: float, t: float, a0: float = 1.0) -> float:
    """a0 (2/((sqrt(2) beta + 1) + (1 - sqrt(2) beta) e^(3 sqrt(2) t)))^(1/3) e^(sqrt(2) t/2)."""
    _require_beta(beta)
    _require_past(t)
    base = 2.0 / ((SQRT2 * beta + 1.0) + (1.0 - SQRT2 * beta) * math.exp(3.0 * SQRT2 * t))
    return a0 * base ** (1.0 / 3.0) * math.exp(SQRT2 * t / 2.0)


def scale_factor_upper_past(beta: float, t: float, a0: float = 1.0) -> float:
    """a0 G(t): the scale factor carried by the improved H lower bound."""
    _require_past(t)
    if BetaRegime.of(beta) is BetaRegime.LOW:
        return a0 * (227.0 / (225.0 * math.exp(-454.0 * beta * t / 45.0) + 2.0)) ** 0.1
    return a0 * (2.0 / (5.0 * beta * math.exp(-4.0 * t) - (5.0 * beta - 2.0))) ** 0.1


_H_LOWER_PAST: Dict[HLowerPast, Callable[[float, float], float]] = {
    HLowerPast.IMPROVED: improved_hubble_lower_past,
    HLowerPast.TRANSCENDENTAL: transcendental_hubble_lower_past,
    HLowerPast.COMPARISON: comparison_hubble_lower_past,
    HLowerPast.SIMPLE: simple_hubble_lower_past,
}


@dataclass(frozen=True)
class EnvelopeSet:
    """Parameters selecting one family of bounds."""
    beta: float
    alpha: float = 0.0
    mode: EnvelopeMode = EnvelopeMode.THM21
    phi_lower: PhiLowerVariant = PhiLowerVariant.PROOF
    h_lower_past: HLowerPast = HLowerPast.IMPROVED

    def __post_init__(self):
        if not 0.0 < self.beta < BETA_MAX:
            raise ConfigError(f"envelopes need beta in (0, sqrt(3)/3), got {self.beta}")
        if self.mode is EnvelopeMode.THM21 and self.alpha != 0.0:
            raise ConfigError(f"thm21 envelopes need alpha = 0, got {self.alpha}")
        if self.mode is EnvelopeMode.THM12 and self.alpha < 0.0:
            raise ConfigError(f"thm12 envelopes need alpha >= 0, got {self.alpha}")

    @property
    def regime(self) -> BetaRegime:
        return BetaRegime.of(self.beta)

    def _check_time(self, t: float) -> None:
        if self.mode is EnvelopeMode.THM12 and t < 0.0:
            raise ModeRangeError(f"scalarization bounds cover t >= 0 only, got t={t}")

    def bounds(self, quantity: str, t: float, a0: float = 1.0) -> Bounds:
        """Dispatch on quantity name: one of H, phi, phidot, a."""
        if quantity == "H":
            return H_bounds(self, t)
        if quantity == "phi":
            return phi_bounds(self, t)
        if quantity == "phidot":
            return phidot_bounds(self, t)
        if quantity == "a":
            return a_bounds(self, t, a0)
        raise KeyError(f"No envelope for quantity '{quantity}'")


def H_bounds(env: EnvelopeSet, t: float) -> Bounds:
    env._check_time(t)
    if t >= 0.0:
        return hubble_lower_future(env.beta, t), hubble_upper_future(env.beta, t)
    return _H_LOWER_PAST[env.h_lower_past](env.beta, t), hubble_upper_past(env.beta, t)


def phi_bounds(env: EnvelopeSet, t: float) -> Bounds:
    env._check_time(t)
    if t >= 0.0:
        return (phi_lower_future(env.beta, t, env.phi_lower.coefficient),
                phi_upper_future(env.beta, t, env.alpha))
    return phi_lower_past(t), phi_upper_past(env.beta, t)


def phidot_bounds(env: EnvelopeSet, t: float) -> Bounds:
    env._check_time(t)
    if t >= 0.0:
        return phidot_lower_future(env.beta, t, env.alpha), phidot_upper_future(env.beta, t)
    return phidot_lower_past(env.beta, t), phidot_upper_past(t)


def a_bounds(env: EnvelopeSet, t: float, a0: float) -> Bounds:
    if not a0 > 0.0:
        raise DomainError(f"a0 must be positive, got {a0}")
    env._check_time(t)
    if t >= 0.0:
        return scale_factor_lower_future(env.beta, t, a0), scale_factor_upper_future(env.beta, t, a0)
    return scale_factor_lower_past(env.beta, t, a0), scale_factor_upper_past(env.beta, t, a0)
