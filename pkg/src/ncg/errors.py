"""Exception types shared across the package."""

from __future__ import annotations


class NcgError(Exception):
    """Base class for package errors."""


class ProfileFormatError(NcgError):
    """A profile document failed validation; ``code`` names the exact defect."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class BudgetExceededError(NcgError):
    """An exhaustive operation would exceed its configured budget."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class EnumerationCapError(NcgError):
    """Profile enumeration was requested above the configured vertex cap."""


class TreeConjectureViolation(NcgError):
    """A non-tree equilibrium was found at alpha > 2n; treated as a hard failure."""
