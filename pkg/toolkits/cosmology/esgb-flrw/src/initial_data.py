#!/usr/bin/env python3
"""
Initial Data Construction and Classification

Builds constraint-satisfying initial states from the free data (a0, beta, alpha)
and a branch sign s, computes kappa = dH/dt(0) and gamma = dphi/dt(0) on the
+ branch, and classifies the data against the hypotheses of the
singularity-free theorem (alpha = 0, 0 < beta < sqrt(3)/3) and the
scalarization theorem (admissible set A: -5 beta^2 < kappa < -beta^2).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

from errors import DegenerateDenominator, InvalidInitialData
from field_equations import CosmoState, constraint_branch

logger = logging.getLogger(__name__)

BETA_MAX = math.sqrt(3.0) / 3.0
KAPPA_REFERENCE_VALUE = -0.6899
KAPPA_REFERENCE_POINT = (0.5, 1.0)


@dataclass(frozen=True)
class FreeData:
    """Free initial data (a0, beta, alpha) and the constraint branch s."""
    a0: float
    beta: float
    alpha: float
    s: int = 1

    def __post_init__(self):
        if not self.a0 > 0:
            raise InvalidInitialData(f"a0 must be positive, got {self.a0}")
        if self.s not in (1, -1):
            raise InvalidInitialData(f"branch sign must be +1 or -1, got {self.s}")


@dataclass
class DataClassification:
    """Verdicts of FreeData against both theorems' hypotheses."""
    kappa: float
    gamma: float
    phidot0: float
    theorem21_ok: bool
    theorem12_ok: bool
    reasons: List[str] = field(default_factory=list)


def solve_phidot(beta: float, alpha: float, s: int) -> float:
    """Initial scalar velocity on branch s: -6 alpha beta^3 + s sqrt((6 alpha beta^3)^2 + 3 beta^2)."""
    return constraint_branch(beta, alpha, s)


def gamma_of(beta: float, alpha: float) -> float:
    """Initial scalar velocity on the + branch."""
    return solve_phidot(beta, alpha, 1)


def kappa_of(beta: float, alpha: float) -> float:
    """
    Initial Hubble rate of change on the + branch:

        kappa = (-4 b^3 a g - g^2 + 4 b^2 g^2 - 24 b^6 a^2 - 3 b^2) / (2 - 8 b a g + 24 b^4 a^2)

    with b = beta, a = alpha, g = gamma_of(beta, alpha).

    Raises:
        DegenerateDenominator: if the denominator vanishes
    """
    gamma = gamma_of(beta, alpha)
    b2 = beta * beta
    b3 = b2 * beta
    numerator = (-4.0 * b3 * alpha * gamma - gamma * gamma + 4.0 * b2 * gamma * gamma
                 - 24.0 * b3 * b3 * alpha * alpha - 3.0 * b2)
    denominator = 2.0 - 8.0 * beta * alpha * gamma + 24.0 * b2 * b2 * alpha * alpha
    if denominator == 0.0:
        raise DegenerateDenominator(f"kappa denominator vanishes at beta={beta}, alpha={alpha}")
    kappa = numerator / denominator
    if (beta, alpha) == KAPPA_REFERENCE_POINT and abs(kappa - KAPPA_REFERENCE_VALUE) > 1e-4:
        logger.warning(f"kappa(1, 1/2) = {kappa:.6f} disagrees with the reference value {KAPPA_REFERENCE_VALUE}")
    return kappa


def _beta_verdict(beta: float) -> Tuple[bool, str]:
    if 0.0 < beta < BETA_MAX:
        return True, "beta in (0, sqrt(3)/3): ok"
    if beta == 0.0 or beta == BETA_MAX:
        return False, "beta on the boundary of (0, sqrt(3)/3)"
    return False, "beta outside (0, sqrt(3)/3)"


def _kappa_verdict(kappa: float, beta: float) -> Tuple[bool, str]:
    lower, upper = -5.0 * beta * beta, -beta * beta
    if lower < kappa < upper:
        return True, "-5 beta^2 < kappa < -beta^2: ok"
    if kappa == lower or kappa == upper:
        return False, "kappa on the boundary of (-5 beta^2, -beta^2)"
    return False, "kappa outside (-5 beta^2, -beta^2)"


def admissible_point(alpha: float, beta: float) -> Tuple[float, bool, str]:
    """
    Membership of (alpha, beta) in the admissible set A.

    Returns:
        (kappa, in_A, reason) where reason names the first failed condition,
        or "ok". kappa is NaN when it cannot be evaluated.
    """
    beta_ok, beta_reason = _beta_verdict(beta)
    try:
        kappa = kappa_of(beta, alpha)
    except DegenerateDenominator:
        return math.nan, False, "kappa undefined (degenerate denominator)"
    if not beta_ok:
        return kappa, False, beta_reason
    if alpha < 0.0:
        return kappa, False, "alpha < 0"
    kappa_ok, kappa_reason = _kappa_verdict(kappa, beta)
    if not kappa_ok:
        return kappa, False, kappa_reason
    return kappa, True, "ok"


def classify(data: FreeData) -> DataClassification:
    """Classify free data against both theorems with strict inequalities."""
    gamma = gamma_of(data.beta, data.alpha)
    phidot0 = solve_phidot(data.beta, data.alpha, data.s)
    reasons: List[str] = []

    beta_ok, beta_reason = _beta_verdict(data.beta)
    reasons.append(beta_reason)

    if data.alpha == 0.0:
        reasons.append("alpha = 0: ok")
    else:
        reasons.append(f"alpha = {data.alpha:g} != 0 (singularity-free theorem needs alpha = 0)")
    alpha_nonnegative = data.alpha >= 0.0
    if not alpha_nonnegative:
        reasons.append("alpha < 0 (admissible set needs alpha >= 0)")

    phidot_ok = phidot0 > 0.0
    reasons.append("dphi/dt(0) > 0: ok" if phidot_ok else f"dphi/dt(0) = {phidot0:.6g} is not positive")

    try:
        kappa = kappa_of(data.beta, data.alpha)
        kappa_ok, kappa_reason = _kappa_verdict(kappa, data.beta)
    except DegenerateDenominator:
        kappa, kappa_ok, kappa_reason = math.nan, False, "kappa undefined (degenerate denominator)"
    reasons.append(kappa_reason)

    theorem21_ok = data.alpha == 0.0 and beta_ok and phidot_ok
    theorem12_ok = alpha_nonnegative and beta_ok and kappa_ok and phidot_ok
    return DataClassification(kappa=kappa, gamma=gamma, phidot0=phidot0,
                              theorem21_ok=theorem21_ok, theorem12_ok=theorem12_ok,
                              reasons=reasons)


def make_initial_state(data: FreeData) -> CosmoState:
    """Initial state (0, a0, beta, alpha, solve_phidot(beta, alpha, s)) on the constraint surface."""
    return CosmoState(t=0.0, a=data.a0, H=data.beta, phi=data.alpha,
                      Phi=solve_phidot(data.beta, data.alpha, data.s), on_constraint=True)
