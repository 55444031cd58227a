"""Simulated vehicle: translational Newton dynamics plus attitude kinematics.

The plant is driven by (thrust, body angular velocity) and carries its own
"truth" aerodynamic model, which may differ from the model the controller
assumes.  Moments and inertia are out of scope: the angular velocity is an
ideal input and the attitude propagates kinematically.

State derivative, with k the thrust axis in inertial frame:

    dp/dt = v
    dv/dt = g*e3 + F_a(v - v_wind(t), attitude)/m - (T/m)*k
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import aero, geom
from .errors import ContractViolation, NonFiniteState, ZeroAirspeed
from .geom import Rot, Vec3, ZERO3

GRAVITY_DEFAULT = 9.81  # m/s^2, along +e3 (NED)
MACH = 340.0            # m/s, exact conversion used throughout


# --- wind profiles ----------------------------------------------------------


@dataclass(frozen=True)
class StillAir:
    def value(self, t: float) -> Vec3:
        return ZERO3

    def rate(self, t: float) -> Vec3:
        return ZERO3


@dataclass(frozen=True)
class ConstantWind:
    v: Vec3

    def __post_init__(self):
        object.__setattr__(self, "v", geom.as_vec3(self.v))

    def value(self, t: float) -> Vec3:
        return self.v

    def rate(self, t: float) -> Vec3:
        return ZERO3


@dataclass(frozen=True)
class SinusoidWind:
    """Per-axis v_i(t) = amp_i * sin(omega_i * t + phase_i)."""

    amp: Vec3
    omega: Vec3
    phase: Vec3 = ZERO3

    def __post_init__(self):
        object.__setattr__(self, "amp", geom.as_vec3(self.amp))
        object.__setattr__(self, "omega", geom.as_vec3(self.omega))
        object.__setattr__(self, "phase", geom.as_vec3(self.phase))

    def value(self, t: float) -> Vec3:
        return tuple(
            a * math.sin(w * t + p) for a, w, p in zip(self.amp, self.omega, self.phase)
        )  # type: ignore[return-value]

    def rate(self, t: float) -> Vec3:
        return tuple(
            a * w * math.cos(w * t + p) for a, w, p in zip(self.amp, self.omega, self.phase)
        )  # type: ignore[return-value]


# --- plant ------------------------------------------------------------------


@dataclass(frozen=True)
class VehicleParams:
    m: float
    truth_aero: aero.CoeffModel
    ka: float
    g: float = GRAVITY_DEFAULT
    wind: StillAir | ConstantWind | SinusoidWind = field(default_factory=StillAir)

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0.0):
            raise ContractViolation(f"mass must be positive, got {self.m}")
        if not (math.isfinite(self.g) and self.g > 0.0):
            raise ContractViolation(f"gravity must be positive, got {self.g}")
        if not (math.isfinite(self.ka) and self.ka > 0.0):
            raise ContractViolation(f"ka must be positive, got {self.ka}")


@dataclass(frozen=True)
class VehicleState:
    p: Vec3
    v: Vec3
    att: Rot

    def __post_init__(self):
        object.__setattr__(self, "p", geom.as_vec3(self.p))
        object.__setattr__(self, "v", geom.as_vec3(self.v))
        object.__setattr__(self, "att", geom.attitude(self.att))


@dataclass(frozen=True)
class ControlInput:
    thrust: float
    omega_body: Vec3

    def __post_init__(self):
        if not math.isfinite(self.thrust):
            raise ContractViolation("non-finite thrust")
        object.__setattr__(self, "omega_body", geom.as_vec3(self.omega_body))


def aero_force_inertial(
    params: VehicleParams, att: Rot, v: Vec3, t: float, beta_fallback: float = 0.0
) -> tuple[Vec3, float, float, bool]:
    """Truth-model aerodynamic force in inertial axes.

    Returns (force, alpha, beta, beta_valid); zero force and alpha = 0 when
    the airspeed is below the floor (still air at rest).
    """
    vw = params.wind.value(t)
    va_inertial = (v[0] - vw[0], v[1] - vw[1], v[2] - vw[2])
    va_body = geom.rot_apply_t(att, va_inertial)
    try:
        f_body, alpha, beta, valid = aero.force_body(
            params.truth_aero, params.ka, va_body, beta_fallback
        )
    except ZeroAirspeed:
        return ZERO3, 0.0, beta_fallback, False
    return geom.rot_apply(att, f_body), alpha, beta, valid


def state_derivative(
    params: VehicleParams, state: VehicleState, inp: ControlInput, t: float
) -> tuple[Vec3, Vec3, Vec3]:
    """(dp/dt, dv/dt, omega_body) at the given state and input."""
    f_a, _, _, _ = aero_force_inertial(params, state.att, state.v, t)
    k = geom.body_axis(state.att)
    inv_m = 1.0 / params.m
    a = (
        (f_a[0] - inp.thrust * k[0]) * inv_m,
        (f_a[1] - inp.thrust * k[1]) * inv_m,
        params.g + (f_a[2] - inp.thrust * k[2]) * inv_m,
    )
    return state.v, a, inp.omega_body


def step(
    params: VehicleParams, state: VehicleState, inp: ControlInput, t: float, dt: float
) -> VehicleState:
    """One fixed-step RK4 update with the input held over the step.

    Velocity and position follow classical RK4; the attitude advances by the
    exponential map (exact for the held angular velocity), and stage attitudes
    are evaluated at the stage times so aerodynamic forces see a consistent
    orientation.  Raises NonFiniteState when the update leaves the finite
    range.
    """
    if dt <= 0.0:
        raise ContractViolation(f"dt must be positive, got {dt}")
    T = inp.thrust
    w = inp.omega_body
    m_inv = 1.0 / params.m
    g = params.g

    att0 = state.att
    att_half = geom.integrate_attitude(att0, w, 0.5 * dt)
    att_full = geom.integrate_attitude(att0, w, dt)

    def accel(att: Rot, v: Vec3, tau: float) -> Vec3:
        f_a, _, _, _ = aero_force_inertial(params, att, v, tau)
        k = geom.body_axis(att)
        return (
            (f_a[0] - T * k[0]) * m_inv,
            (f_a[1] - T * k[1]) * m_inv,
            g + (f_a[2] - T * k[2]) * m_inv,
        )

    p0, v0 = state.p, state.v
    a1 = accel(att0, v0, t)
    v1 = v0

    v_2 = geom.add(v0, geom.scale(a1, 0.5 * dt))
    a2 = accel(att_half, v_2, t + 0.5 * dt)

    v_3 = geom.add(v0, geom.scale(a2, 0.5 * dt))
    a3 = accel(att_half, v_3, t + 0.5 * dt)

    v_4 = geom.add(v0, geom.scale(a3, dt))
    a4 = accel(att_full, v_4, t + dt)

    sixth = dt / 6.0
    v_new = (
        v0[0] + sixth * (a1[0] + 2.0 * a2[0] + 2.0 * a3[0] + a4[0]),
        v0[1] + sixth * (a1[1] + 2.0 * a2[1] + 2.0 * a3[1] + a4[1]),
        v0[2] + sixth * (a1[2] + 2.0 * a2[2] + 2.0 * a3[2] + a4[2]),
    )
    p_new = (
        p0[0] + sixth * (v1[0] + 2.0 * v_2[0] + 2.0 * v_3[0] + v_4[0]),
        p0[1] + sixth * (v1[1] + 2.0 * v_2[1] + 2.0 * v_3[1] + v_4[1]),
        p0[2] + sixth * (v1[2] + 2.0 * v_2[2] + 2.0 * v_3[2] + v_4[2]),
    )

    if not (geom.is_finite(p_new) and geom.is_finite(v_new)):
        raise NonFiniteState("state left the finite range", t=t + dt)
    return VehicleState(p=p_new, v=v_new, att=att_full)
