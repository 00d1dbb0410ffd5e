"""
errors_module.py
Exception hierarchy shared by the EOS, state, structure, dynamics and CLI layers.
"""

from __future__ import annotations

from typing import Optional


class ShtcError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ShtcError, ValueError):
    """A density, pressure or state lies outside the admissible set of an EOS."""


class StateAdmissibilityError(DomainError):
    """Volume/mass fraction outside (0, 1) or non-positive mixture density."""


class PreconditionError(ShtcError):
    """An equilibrium-only operation was handed a non-equilibrium state."""


class ConfigError(ShtcError):
    """Malformed or inconsistent configuration file."""


class StepFailure(ShtcError):
    """The time integrator could not produce an admissible state."""

    def __init__(self, message: str, time: Optional[float] = None, cell: Optional[int] = None):
        self.time = time
        self.cell = cell
        where = []
        if time is not None:
            where.append(f"t={time:.6g}")
        if cell is not None:
            where.append(f"cell={cell}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")
