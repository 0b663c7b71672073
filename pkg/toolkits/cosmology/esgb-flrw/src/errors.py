#!/usr/bin/env python3
"""
Exception hierarchy for the ESGB FLRW toolkit.

Every error raised by the toolkit derives from ESGBError so callers can catch
the whole family at once. Physics events that end an integration (denominator
event, constraint drift, step budget) are not exceptions: they travel in the
trajectory's terminal status.
"""


class ESGBError(Exception):
    """Base exception for the toolkit."""
    pass


class InvalidStateError(ESGBError, ValueError):
    """Raised when a CosmoState violates a field invariant (a > 0)."""
    pass


class DenominatorTooSmall(ESGBError):
    """Raised when the Gauss-Bonnet denominator drops to the floor.

    Cannot happen on the constraint surface, so it signals drift or data far
    outside the proven regime.
    """

    def __init__(self, denominator: float, floor: float):
        super().__init__(f"Gauss-Bonnet denominator {denominator:.3e} <= floor {floor:.1e}")
        self.denominator = denominator
        self.floor = floor


class ZeroHubble(ESGBError):
    """Raised when the power identity is requested at H = 0."""
    pass


class InvalidInitialData(ESGBError, ValueError):
    """Raised for free data with a0 <= 0 or a branch sign outside {+1, -1}."""
    pass


class DegenerateDenominator(ESGBError):
    """Raised when kappa's denominator 2 - 8*beta*alpha*gamma + 24*beta^4*alpha^2 vanishes."""
    pass


class ConfigError(ESGBError, ValueError):
    """Raised for invalid integrator, envelope or run configuration."""
    pass


class OutOfRange(ESGBError):
    """Raised when a trajectory is sampled outside its covered interval."""
    pass


class DomainError(ESGBError, ValueError):
    """Raised when a closed form is evaluated outside its validity range."""
    pass


class ModeRangeError(DomainError):
    """Raised when scalarization-mode bounds are requested for t < 0."""
    pass


class NonConvergenceError(ESGBError):
    """Raised when an iterative solver exhausts its iteration budget."""
    pass


class MalformedCSV(ESGBError, ValueError):
    """Raised when a CSV file does not follow the expected layout."""
    pass


class UnknownColumn(ESGBError, ValueError):
    """Raised when a plot or lookup names a column the trajectory lacks."""
    pass


class PreconditionError(ESGBError):
    """Raised when data fails the theorem gate a verification requires."""
    pass
