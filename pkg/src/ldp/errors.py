# src/ldp/errors.py
from __future__ import annotations


class LdpError(ValueError):
    """Base class for every error raised by the ldp packages."""


class ParameterError(LdpError):
    """Invalid epsilon, domain size, probabilities, theta, g or alpha."""


class DomainError(LdpError):
    """A user value outside [0, d)."""


class VariantMismatchError(LdpError):
    """Reports of the wrong variant (or shape) for the protocol aggregating them."""


class NotPureError(LdpError):
    """Pure-protocol parameters requested for a protocol that has none (SHE)."""
