"""Exception types raised by the library.

Faults that terminate a closed-loop run carry the simulation time at which
they occurred so the runner can report a labeled termination cause instead
of an unstructured crash.
"""

from __future__ import annotations


class ContractViolation(ValueError):
    """Non-finite or otherwise inadmissible value at a module boundary."""


class ZeroAirspeed(ValueError):
    """Air velocity too small to define aerodynamic angles or forces."""


class DegenerateFit(ValueError):
    """Coefficient identification has singular normal equations."""


class SimulationFault(RuntimeError):
    """Base class for faults that abort a closed-loop run."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class SingularReference(SimulationFault):
    """Apparent force vanished; the reference thrust direction is undefined."""


class AntipodalAttitude(SimulationFault):
    """Thrust axis reached the antipode of its reference direction."""


class NonFiniteState(SimulationFault):
    """Integrated state left the finite range (controller blow-up)."""
