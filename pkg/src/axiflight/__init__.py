"""Simulator and controllers for thrust-propelled axisymmetric aerial vehicles.

The translational dynamics of a body whose lift and drag coefficients satisfy
the constant-sum condition cd + cl*cot(alpha) = cd0 can be rewritten as a
sphere under an orientation-independent equivalent drag and a modified thrust.
This package implements that transform, the thrust-direction and velocity
feedback laws built on it, a rigid-body plant to fly them against, and a
scenario CLI that reproduces the reference missile experiments, including the
documented failure of the drag-only baseline controller.
"""

from .aero import (
    AeroEnv,
    TableCoeffModel,
    TrigCoeffModel,
    aero_angles,
    check_compatibility,
    fit_trig_model,
    force_body,
    spherical_equivalence,
)
from .ctrl import Controller, CtrlEstimates, CtrlGains, CtrlState, ReferenceSample
from .errors import (
    AntipodalAttitude,
    ContractViolation,
    DegenerateFit,
    NonFiniteState,
    SimulationFault,
    SingularReference,
    ZeroAirspeed,
)
from .plant import ControlInput, VehicleParams, VehicleState
from .sim import (
    ReferenceProfile,
    RunResult,
    Scenario,
    TraceRow,
    kinematic_alignment_run,
    reference_c701,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "AeroEnv",
    "AntipodalAttitude",
    "ContractViolation",
    "ControlInput",
    "Controller",
    "CtrlEstimates",
    "CtrlGains",
    "CtrlState",
    "DegenerateFit",
    "NonFiniteState",
    "ReferenceProfile",
    "ReferenceSample",
    "RunResult",
    "Scenario",
    "SimulationFault",
    "SingularReference",
    "TableCoeffModel",
    "TraceRow",
    "TrigCoeffModel",
    "VehicleParams",
    "VehicleState",
    "ZeroAirspeed",
    "aero_angles",
    "check_compatibility",
    "fit_trig_model",
    "force_body",
    "kinematic_alignment_run",
    "reference_c701",
    "run",
    "spherical_equivalence",
]
