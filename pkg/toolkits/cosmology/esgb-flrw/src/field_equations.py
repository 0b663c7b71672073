#!/usr/bin/env python3
"""
Field Equations for the FLRW-reduced ESGB Cosmology

Pure evaluation of the reduced Einstein-scalar-Gauss-Bonnet system with
quadratic coupling f(phi) = phi^2/2, vanishing potential and unit coupling:

    3H^2 = Phi^2 + 12 H^3 phi Phi                      (Hamiltonian constraint)
    dH/dt = F1(H, phi, Phi) = N / D
    dPhi/dt = F2 = -3 Phi H - 6 H^2 phi (H^2 + F1)

with D = 2 - 8 H phi Phi + 24 H^4 phi^2 the Gauss-Bonnet denominator and
N = -4 H^3 phi Phi - Phi^2 + 4 H^2 Phi^2 - 24 H^6 phi^2 - 3 H^2.

Everything here is a pure function of its arguments.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from errors import DenominatorTooSmall, InvalidStateError, ZeroHubble

logger = logging.getLogger(__name__)

DENOM_FLOOR = 1e-10
STATE_FIELDS = ("a", "H", "phi", "Phi")


@dataclass(frozen=True)
class CosmoState:
    """Instantaneous state (t, a, H, phi, Phi = dphi/dt) of the reduced system."""
    t: float
    a: float
    H: float
    phi: float
    Phi: float
    on_constraint: bool = False

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidStateError(f"scale factor must be positive, got a={self.a}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.a, self.H, self.phi, self.Phi], dtype=float)

    @classmethod
    def from_vector(cls, t: float, y: np.ndarray, on_constraint: bool = False) -> "CosmoState":
        return cls(t=float(t), a=float(y[0]), H=float(y[1]), phi=float(y[2]), Phi=float(y[3]),
                   on_constraint=on_constraint)


@dataclass(frozen=True)
class RhsValue:
    """Time derivatives of (a, H, phi, Phi)."""
    da: float
    dH: float
    dphi: float
    dPhi: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.da, self.dH, self.dphi, self.dPhi], dtype=float)


def _denominator(H: float, phi: float, Phi: float) -> float:
    H2 = H * H
    return 2.0 - 8.0 * H * phi * Phi + 24.0 * H2 * H2 * phi * phi


def _hubble_numerator(H: float, phi: float, Phi: float) -> float:
    H2 = H * H
    H3 = H2 * H
    Phi2 = Phi * Phi
    return (-4.0 * H3 * phi * Phi - Phi2 + 4.0 * H2 * Phi2
            - 24.0 * H3 * H3 * phi * phi - 3.0 * H2)


def _derivatives(a: float, H: float, phi: float, Phi: float,
                 denom_floor: float) -> Tuple[float, float, float, float]:
    D = _denominator(H, phi, Phi)
    if D <= denom_floor:
        raise DenominatorTooSmall(D, denom_floor)
    F1 = _hubble_numerator(H, phi, Phi) / D
    # F2 reuses F1 rather than re-deriving dH
    F2 = -3.0 * Phi * H - 6.0 * H * H * phi * (H * H + F1)
    return a * H, F1, Phi, F2


def gb_denominator(state: CosmoState) -> float:
    """Return D = 2 - 8 H phi Phi + 24 H^4 phi^2 (no sign guarantee off-constraint)."""
    return _denominator(state.H, state.phi, state.Phi)


def constraint_residual(state: CosmoState) -> float:
    """Return C = 3H^2 - Phi^2 - 12 H^3 phi Phi; zero on the constraint surface."""
    H, phi, Phi = state.H, state.phi, state.Phi
    return 3.0 * H * H - Phi * Phi - 12.0 * H ** 3 * phi * Phi


def constraint_scale(state: CosmoState) -> float:
    """Largest term magnitude of the constraint, floored at 1."""
    H, phi, Phi = state.H, state.phi, state.Phi
    return max(1.0, 3.0 * H * H, Phi * Phi, abs(12.0 * H ** 3 * phi * Phi))


def normalized_constraint_residual(state: CosmoState) -> float:
    return abs(constraint_residual(state)) / constraint_scale(state)


def rhs(state: CosmoState, denom_floor: float = DENOM_FLOOR) -> RhsValue:
    """
    Evaluate the right-hand side of the first-order system.

    Raises:
        DenominatorTooSmall: if gb_denominator(state) <= denom_floor
    """
    da, dH, dphi, dPhi = _derivatives(state.a, state.H, state.phi, state.Phi, denom_floor)
    return RhsValue(da=da, dH=dH, dphi=dphi, dPhi=dPhi)


def rhs_vector(t: float, y: np.ndarray, denom_floor: float = DENOM_FLOOR) -> np.ndarray:
    """Vector form of rhs for the stepper; t is unused (autonomous system)."""
    return np.array(_derivatives(y[0], y[1], y[2], y[3], denom_floor), dtype=float)


def _power_terms(state: CosmoState, dH: float) -> Tuple[float, ...]:
    H, phi, Phi = state.H, state.phi, state.Phi
    if H == 0.0:
        raise ZeroHubble("power identity is singular at H = 0")
    H2 = H * H
    Phi2 = Phi * Phi
    return (
        2.0 * H * H2 * Phi2,
        -H * Phi2,
        -dH / (3.0 * H) * Phi2,
        -8.0 * H2 * H2 * phi * Phi,
        -12.0 * H2 * H2 * H2 * H * phi * phi,
        -12.0 * H2 * H2 * H * dH * phi * phi,
    )


def power_identity(state: CosmoState, dH: float) -> float:
    """
    Evaluate the power identity

        P = H ((2H^2 - 1 - dH/(3H^2)) Phi^2 - 8 H^3 phi Phi - 12 H^6 (1 + dH/H^2) phi^2)

    which vanishes along solutions on the constraint surface. dH must be the
    value the caller obtained from rhs.

    Raises:
        ZeroHubble: if H == 0
    """
    return math.fsum(_power_terms(state, dH))


def power_scale(state: CosmoState, dH: float) -> float:
    """Largest absolute term of the power identity, at least max(1, |H| Phi^2)."""
    terms = _power_terms(state, dH)
    return max(1.0, abs(state.H) * state.Phi * state.Phi, *(abs(term) for term in terms))


def normalized_power_residual(state: CosmoState, dH: float) -> float:
    return abs(power_identity(state, dH)) / power_scale(state, dH)


def z2_mirror(state: CosmoState) -> CosmoState:
    """Apply the Z2 symmetry (phi, Phi) -> (-phi, -Phi); a and H are unchanged."""
    return replace(state, phi=-state.phi, Phi=-state.Phi)


def constraint_branch(H: float, phi: float, s: int) -> float:
    """
    Root of the constraint in Phi on branch s:

        Phi = -6 phi H^3 + s * sqrt((6 phi H^3)^2 + 3 H^2)

    The root that would subtract two nearly equal numbers is rewritten through
    the product of the roots, -3H^2.
    """
    x = 6.0 * phi * H ** 3
    r = math.hypot(x, math.sqrt(3.0) * H)
    if s > 0:
        if x > 0.0:
            return 3.0 * H * H / (x + r)
        return r - x
    if x < 0.0:
        return -3.0 * H * H / (r - x)
    return -x - r


def branch_of(state: CosmoState) -> int:
    """Constraint branch a state sits on: +1 above the midpoint -6 phi H^3, else -1."""
    return 1 if state.Phi >= -6.0 * state.phi * state.H ** 3 else -1
