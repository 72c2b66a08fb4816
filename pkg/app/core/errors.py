"""
Exception types shared by the services and front ends.
"""


class LabError(Exception):
    """Base class for all lab failures."""


class InvalidArgumentError(LabError, ValueError):
    """A precondition on an argument was violated (maps to exit code 2)."""


class NumericalError(LabError, ArithmeticError):
    """A numerical procedure failed or produced an invalid object (exit code 3)."""
