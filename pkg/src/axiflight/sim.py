"""Scenario runner: plant + controller over a timeline, traces and monitors.

The closed loop is integrated as one coupled ODE: position, velocity, the
nine attitude entries and the error integral advance together under classical
RK4, with the control law re-evaluated at every stage.  That keeps the full
loop fourth-order accurate, which the step-halving acceptance check relies
on.  An optional hold mode (``ctrl_every`` > 1) recomputes the controller
only every few plant steps for rate-robustness studies.

Runs never raise on controller faults; they return a labeled termination
cause with everything logged up to the fault.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ctrl as ctrl_mod
from . import geom, plant
from .ctrl import Controller, CtrlEstimates, CtrlGains, ReferenceSample
from .errors import (
    AntipodalAttitude,
    ContractViolation,
    NonFiniteState,
    SimulationFault,
    SingularReference,
)
from .geom import Rot, Vec3, ZERO3
from .plant import MACH, VehicleParams

_JUMP_TOL = 1e-9  # m/s, velocity mismatch across a boundary that counts as a jump


# --- reference profiles -------------------------------------------------------


@dataclass(frozen=True)
class ConstantSegment:
    t0: float
    t1: float
    vr: Vec3

    def eval(self, t: float) -> tuple[Vec3, Vec3, Vec3]:
        return self.vr, ZERO3, ZERO3


@dataclass(frozen=True)
class SinusoidSegment:
    """Per-axis vr_i(t) = amp_i * sin(omega_i * t + phase_i), absolute time."""

    t0: float
    t1: float
    amp: Vec3
    omega: Vec3
    phase: Vec3 = ZERO3

    def eval(self, t: float) -> tuple[Vec3, Vec3, Vec3]:
        vr = []
        ar = []
        jr = []
        for a, w, p in zip(self.amp, self.omega, self.phase):
            s = math.sin(w * t + p)
            c = math.cos(w * t + p)
            vr.append(a * s)
            ar.append(a * w * c)
            jr.append(-a * w * w * s)
        return tuple(vr), tuple(ar), tuple(jr)  # type: ignore[return-value]


Segment = ConstantSegment | SinusoidSegment


@dataclass(frozen=True)
class ReferenceProfile:
    """Contiguous segments covering [0, duration); right-continuous at jumps."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ContractViolation("profile needs at least one segment")
        prev_end = 0.0
        for seg in self.segments:
            if abs(seg.t0 - prev_end) > 1e-12 or seg.t1 <= seg.t0:
                raise ContractViolation("segments must be contiguous and forward in time")
            prev_end = seg.t1

    @property
    def duration(self) -> float:
        return self.segments[-1].t1

    def segment_at(self, t: float) -> Segment:
        for seg in self.segments:
            if t < seg.t1:
                return seg
        return self.segments[-1]

    def jump_times(self) -> tuple[float, ...]:
        """Interior boundaries where the reference velocity is discontinuous."""
        jumps = []
        for a, b in zip(self.segments, self.segments[1:]):
            va = a.eval(a.t1)[0]
            vb = b.eval(a.t1)[0]
            if geom.norm(geom.sub(va, vb)) > _JUMP_TOL:
                jumps.append(a.t1)
        return tuple(jumps)

    def sample(self, t: float, step_dt: float = 0.0) -> ReferenceSample:
        """Reference at t; flags the sample non-smooth when a discontinuity
        lies in [t, t + step_dt)."""
        vr, ar, jr = self.segment_at(t).eval(t)
        smooth = True
        if step_dt > 0.0:
            for tj in self.jump_times():
                if t <= tj < t + step_dt or abs(t - tj) < 1e-12:
                    smooth = False
                    break
        return ReferenceSample(vr=vr, ar=ar, jr=jr, smooth=smooth)


def constant_reference(vr: Vec3, duration: float) -> ReferenceProfile:
    return ReferenceProfile(segments=(ConstantSegment(0.0, duration, geom.as_vec3(vr)),))


def reference_c701() -> ReferenceProfile:
    """The 60 s benchmark profile: four piecewise-constant Mach legs followed
    by a 20 s three-axis sinusoid."""
    m = MACH
    return ReferenceProfile(
        segments=(
            ConstantSegment(0.0, 10.0, (0.7 * m, 0.0, 0.0)),
            ConstantSegment(10.0, 20.0, (0.0, -0.7 * m, 0.0)),
            ConstantSegment(20.0, 30.0, (0.0, 0.0, -0.7 * m)),
            ConstantSegment(30.0, 40.0, (-0.7 * m, 0.0, 0.0)),
            SinusoidSegment(
                40.0,
                60.0,
                amp=(-0.5 * m, 0.6 * m, 0.6 * m),
                omega=(math.pi / 5.0, math.pi / 10.0, math.pi / 10.0),
                phase=(0.0, 0.0, 0.5 * math.pi),
            ),
        )
    )


# --- scenario and results -------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    duration: float
    dt: float
    vehicle: VehicleParams
    estimates: CtrlEstimates
    gains: CtrlGains
    reference: ReferenceProfile
    initial_v: Vec3          # m/s
    initial_euler: Vec3      # rad: roll, pitch, yaw
    controller_mode: str = "fp"
    decimation: int = 10
    ctrl_every: int = 1
    kind: str = "closed-loop"  # or "attitude-only"

    def __post_init__(self):
        if not (self.duration > 0.0 and self.dt > 0.0 and self.dt <= self.duration):
            raise ContractViolation("need duration > 0, 0 < dt <= duration")
        if self.decimation < 1 or self.ctrl_every < 1:
            raise ContractViolation("decimation and ctrl_every must be >= 1")
        if self.controller_mode not in ("fp", "fa"):
            raise ContractViolation(f"unknown controller mode {self.controller_mode!r}")
        if self.kind not in ("closed-loop", "attitude-only"):
            raise ContractViolation(f"unknown run kind {self.kind!r}")
        if self.reference.duration < self.duration - 1e-9:
            raise ContractViolation("reference profile shorter than the run")
        object.__setattr__(self, "initial_v", geom.as_vec3(self.initial_v))
        object.__setattr__(self, "initial_euler", geom.as_vec3(self.initial_euler))


@dataclass(frozen=True)
class TraceRow:
    """One logged sample; velocities in Mach, angles in degrees."""

    t: float
    vr: Vec3
    v: Vec3
    alpha_deg: float
    omega: Vec3
    T_over_mg: float
    f_over_mg: float
    theta_tilde_deg: float
    V1: float
    Iv: Vec3
    sat_thrust: bool
    sat_omega: bool


@dataclass(frozen=True)
class Termination:
    kind: str  # completed | singular_reference | antipodal | nonfinite
    t: float

    @property
    def completed(self) -> bool:
        return self.kind == "completed"


@dataclass(frozen=True)
class SegmentStats:
    kind: str
    t0: float
    t1: float
    first_mean_mach: float
    terminal_mean_mach: float
    last_half_max_mach: float
    decayed: bool
    truncated: bool


@dataclass(frozen=True)
class LyapunovReport:
    checked: int
    violations: int
    worst_ratio: float
    excluded_saturated: int
    excluded_jump: int
    excluded_floor: int
    k1_min: float
    eps_bound_ok: bool
    eps_bound_worst: float


@dataclass(frozen=True)
class Monitors:
    min_f_over_mg: float
    lyapunov: LyapunovReport
    segments: tuple[SegmentStats, ...]


@dataclass(frozen=True)
class LoopState:
    """Checkpoint of the coupled loop, for resuming a run mid-flight."""

    t: float
    p: Vec3
    v: Vec3
    att: Rot
    Iv: Vec3


@dataclass(frozen=True)
class RunResult:
    trace: tuple[TraceRow, ...]
    termination: Termination
    monitors: Monitors
    final: LoopState | None = None


# --- runner ---------------------------------------------------------------------


def _make_row(
    t: float,
    sample: ReferenceSample,
    v: Vec3,
    wb: Vec3,
    thrust: float,
    diag: ctrl_mod.Diagnostics,
    iv: Vec3,
    mg: float,
) -> TraceRow:
    inv = 1.0 / MACH
    return TraceRow(
        t=t,
        vr=geom.scale(sample.vr, inv),
        v=geom.scale(v, inv),
        alpha_deg=math.degrees(diag.alpha),
        omega=wb,
        T_over_mg=thrust / mg,
        f_over_mg=diag.f_dir_norm / mg,
        theta_tilde_deg=math.degrees(diag.theta_tilde),
        V1=diag.V1,
        Iv=iv,
        sat_thrust=diag.sat_thrust,
        sat_omega=diag.sat_omega,
    )


def run(scenario: Scenario, resume: LoopState | None = None) -> RunResult:
    """Execute one scenario deterministically.

    Controller faults become labeled terminations, never exceptions; all rows
    logged before a fault are preserved.  ``resume`` continues a previous
    closed-loop run from its checkpoint until ``scenario.duration`` (absolute
    time); only the default coupled mode supports it.
    """
    if scenario.kind == "attitude-only":
        if resume is not None:
            raise ContractViolation("resume is only supported for closed-loop runs")
        return _run_attitude_only(scenario)
    if scenario.ctrl_every > 1:
        if resume is not None:
            raise ContractViolation("resume is only supported at ctrl_every = 1")
        return _run_held(scenario)
    return _run_coupled(scenario, resume)


def _finish(
    scenario: Scenario,
    rows: list[TraceRow],
    termination: Termination,
    min_f_over_mg: float,
    final: "LoopState | None" = None,
) -> RunResult:
    report = lyapunov_monitor(
        rows, scenario.gains, scenario.reference.jump_times(),
        mg=scenario.vehicle.m * scenario.vehicle.g,
    )
    segs = segment_error_summary(rows, scenario.reference)
    return RunResult(
        trace=tuple(rows),
        termination=termination,
        monitors=Monitors(min_f_over_mg=min_f_over_mg, lyapunov=report, segments=segs),
        final=final,
    )


def _run_coupled(scenario: Scenario, resume: LoopState | None = None) -> RunResult:
    """Closed loop as one coupled ODE in (p, v, attitude, Iv), classical RK4
    with the control law re-evaluated at every stage.  Hand-unrolled: this
    loop dominates the cost of every experiment."""
    params = scenario.vehicle
    gains = scenario.gains
    controller = Controller(scenario.estimates, gains, params.g, scenario.controller_mode)
    profile = scenario.reference
    wind = params.wind
    dt = scenario.dt
    h = 0.5 * dt
    sixth = dt / 6.0
    mg = params.m * params.g
    inv_m = 1.0 / params.m
    g = params.g
    kI = gains.kI
    delta = gains.delta_sat
    fp_mode = scenario.controller_mode == "fp"
    jumps = profile.jump_times()
    segments = profile.segments

    if resume is None:
        t0 = 0.0
        p = (0.0, 0.0, 0.0)
        v = scenario.initial_v
        att: Rot = geom.rot_from_euler_zyx(*scenario.initial_euler)
        iv: Vec3 = ZERO3
    else:
        t0 = resume.t
        p = geom.as_vec3(resume.p)
        v = geom.as_vec3(resume.v)
        att = geom.attitude(resume.att)
        iv = geom.as_vec3(resume.Iv)
        if t0 >= scenario.duration:
            raise ContractViolation("resume time is past the scenario end")
    n_steps = max(1, round((scenario.duration - t0) / dt))
    beta_prev = 0.0

    rows: list[TraceRow] = []
    min_f = math.inf
    decim = scenario.decimation
    seg_idx = 0

    def derive(ts, vs, Rs, ivs, sample, ff, want_diag):
        """Coupled derivative: (dv, dR, dIv, thrust, wb, diag)."""
        vw = wind.value(ts)
        vwr = wind.rate(ts)
        thrust, wb, diag = controller.command(
            ts, vs, Rs, ivs, sample, vw, vwr, ff=ff, want_diag=want_diag
        )
        f_a, _, beta_eff, beta_ok = plant.aero_force_inertial(params, Rs, vs, ts, beta_prev)
        dv = (
            (f_a[0] - thrust * Rs[2]) * inv_m,
            (f_a[1] - thrust * Rs[5]) * inv_m,
            g + (f_a[2] - thrust * Rs[8]) * inv_m,
        )
        # saturated-integrator law, inlined
        vr = sample.vr
        sx = ivs[0] + (vs[0] - vr[0]) / kI
        sy = ivs[1] + (vs[1] - vr[1]) / kI
        sz = ivs[2] + (vs[2] - vr[2]) / kI
        n4 = (sx * sx + sy * sy + sz * sz) ** 2
        sc = delta / (delta**4 + n4) ** 0.25
        div = (kI * (sx * sc - ivs[0]), kI * (sy * sc - ivs[1]), kI * (sz * sc - ivs[2]))
        dR = geom.rot_rate(Rs, wb)
        return dv, dR, div, thrust, wb, diag, beta_eff, beta_ok

    try:
        for step_idx in range(n_steps):
            t = t0 + step_idx * dt
            while t >= segments[seg_idx].t1 and seg_idx + 1 < len(segments):
                seg_idx += 1
            seg = segments[seg_idx]
            smooth = True
            for tj in jumps:
                if t - 1e-12 <= tj < t + dt:
                    smooth = False
                    break
            seval = seg.eval

            vr, ar, jr = seval(t)
            s1 = ReferenceSample(vr=vr, ar=ar, jr=jr, smooth=smooth)
            vr, ar, jr = seval(t + h)
            sm = ReferenceSample(vr=vr, ar=ar, jr=jr, smooth=smooth)
            vr, ar, jr = seval(t + dt)
            se = ReferenceSample(vr=vr, ar=ar, jr=jr, smooth=smooth)
            if fp_mode:
                ff1 = controller.feedforward_fast(s1, wind.value(t), wind.rate(t))
                ffm = controller.feedforward_fast(sm, wind.value(t + h), wind.rate(t + h))
                ffe = controller.feedforward_fast(se, wind.value(t + dt), wind.rate(t + dt))
            else:
                ff1 = ffm = ffe = None

            dv1, dR1, di1, thrust1, wb1, diag1, beta_eff, beta_ok = derive(
                t, v, att, iv, s1, ff1, True
            )
            if beta_ok:
                beta_prev = beta_eff
            if diag1.f_dir_norm < min_f:
                min_f = diag1.f_dir_norm
            if step_idx % decim == 0:
                rows.append(_make_row(t, s1, v, wb1, thrust1, diag1, iv, mg))

            v2 = (v[0] + h * dv1[0], v[1] + h * dv1[1], v[2] + h * dv1[2])
            R2 = (
                att[0] + h * dR1[0], att[1] + h * dR1[1], att[2] + h * dR1[2],
                att[3] + h * dR1[3], att[4] + h * dR1[4], att[5] + h * dR1[5],
                att[6] + h * dR1[6], att[7] + h * dR1[7], att[8] + h * dR1[8],
            )
            i2 = (iv[0] + h * di1[0], iv[1] + h * di1[1], iv[2] + h * di1[2])
            dv2, dR2, di2, *_ = derive(t + h, v2, R2, i2, sm, ffm, False)

            v3 = (v[0] + h * dv2[0], v[1] + h * dv2[1], v[2] + h * dv2[2])
            R3 = (
                att[0] + h * dR2[0], att[1] + h * dR2[1], att[2] + h * dR2[2],
                att[3] + h * dR2[3], att[4] + h * dR2[4], att[5] + h * dR2[5],
                att[6] + h * dR2[6], att[7] + h * dR2[7], att[8] + h * dR2[8],
            )
            i3 = (iv[0] + h * di2[0], iv[1] + h * di2[1], iv[2] + h * di2[2])
            dv3, dR3, di3, *_ = derive(t + h, v3, R3, i3, sm, ffm, False)

            v4 = (v[0] + dt * dv3[0], v[1] + dt * dv3[1], v[2] + dt * dv3[2])
            R4 = (
                att[0] + dt * dR3[0], att[1] + dt * dR3[1], att[2] + dt * dR3[2],
                att[3] + dt * dR3[3], att[4] + dt * dR3[4], att[5] + dt * dR3[5],
                att[6] + dt * dR3[6], att[7] + dt * dR3[7], att[8] + dt * dR3[8],
            )
            i4 = (iv[0] + dt * di3[0], iv[1] + dt * di3[1], iv[2] + dt * di3[2])
            dv4, dR4, di4, *_ = derive(t + dt, v4, R4, i4, se, ffe, False)

            p = (
                p[0] + sixth * (v[0] + 2.0 * (v2[0] + v3[0]) + v4[0]),
                p[1] + sixth * (v[1] + 2.0 * (v2[1] + v3[1]) + v4[1]),
                p[2] + sixth * (v[2] + 2.0 * (v2[2] + v3[2]) + v4[2]),
            )
            v = (
                v[0] + sixth * (dv1[0] + 2.0 * (dv2[0] + dv3[0]) + dv4[0]),
                v[1] + sixth * (dv1[1] + 2.0 * (dv2[1] + dv3[1]) + dv4[1]),
                v[2] + sixth * (dv1[2] + 2.0 * (dv2[2] + dv3[2]) + dv4[2]),
            )
            att = geom.renormalize((
                att[0] + sixth * (dR1[0] + 2.0 * (dR2[0] + dR3[0]) + dR4[0]),
                att[1] + sixth * (dR1[1] + 2.0 * (dR2[1] + dR3[1]) + dR4[1]),
                att[2] + sixth * (dR1[2] + 2.0 * (dR2[2] + dR3[2]) + dR4[2]),
                att[3] + sixth * (dR1[3] + 2.0 * (dR2[3] + dR3[3]) + dR4[3]),
                att[4] + sixth * (dR1[4] + 2.0 * (dR2[4] + dR3[4]) + dR4[4]),
                att[5] + sixth * (dR1[5] + 2.0 * (dR2[5] + dR3[5]) + dR4[5]),
                att[6] + sixth * (dR1[6] + 2.0 * (dR2[6] + dR3[6]) + dR4[6]),
                att[7] + sixth * (dR1[7] + 2.0 * (dR2[7] + dR3[7]) + dR4[7]),
                att[8] + sixth * (dR1[8] + 2.0 * (dR2[8] + dR3[8]) + dR4[8]),
            ))
            iv = (
                iv[0] + sixth * (di1[0] + 2.0 * (di2[0] + di3[0]) + di4[0]),
                iv[1] + sixth * (di1[1] + 2.0 * (di2[1] + di3[1]) + di4[1]),
                iv[2] + sixth * (di1[2] + 2.0 * (di2[2] + di3[2]) + di4[2]),
            )
            if not (geom.is_finite(p) and geom.is_finite(v) and geom.is_finite(iv)):
                raise NonFiniteState("state left the finite range", t=t + dt)

        termination = Termination(kind="completed", t=t0 + n_steps * dt)
    except SimulationFault as fault:
        termination = Termination(kind=_fault_kind(fault), t=fault.t if fault.t is not None else 0.0)

    mg_min = min_f / mg if math.isfinite(min_f) else math.inf
    final = LoopState(t=t0 + n_steps * dt, p=p, v=v, att=att, Iv=iv) if termination.completed else None
    return _finish(scenario, rows, termination, mg_min, final)


def _run_held(scenario: Scenario) -> RunResult:
    """Hold mode: controller every ctrl_every plant steps, inputs held."""
    params = scenario.vehicle
    controller = Controller(scenario.estimates, scenario.gains, params.g, scenario.controller_mode)
    profile = scenario.reference
    wind = params.wind
    dt = scenario.dt
    dt_ctrl = dt * scenario.ctrl_every
    n_steps = max(1, round(scenario.duration / dt))
    mg = params.m * params.g

    state = plant.VehicleState(
        p=ZERO3,
        v=scenario.initial_v,
        att=geom.rot_from_euler_zyx(*scenario.initial_euler),
    )
    cstate = ctrl_mod.CtrlState()
    held: tuple[float, Vec3, ctrl_mod.Diagnostics] | None = None
    last_sample = profile.sample(0.0, dt)
    rows: list[TraceRow] = []
    min_f = math.inf

    try:
        for step_idx in range(n_steps):
            t = step_idx * dt
            if step_idx % scenario.ctrl_every == 0:
                sample = profile.sample(t, dt_ctrl)
                last_sample = sample
                thrust, wb, cstate, diag = controller.step(
                    cstate, t, state.v, state.att, sample, dt_ctrl,
                    wind.value(t), wind.rate(t),
                )
                held = (thrust, wb, diag)
                if diag.f_dir_norm < min_f:
                    min_f = diag.f_dir_norm
            assert held is not None
            thrust, wb, diag = held
            if step_idx % scenario.decimation == 0:
                rows.append(_make_row(t, last_sample, state.v, wb, thrust, diag, cstate.Iv, mg))
            state = plant.step(
                params, state, plant.ControlInput(thrust=thrust, omega_body=wb), t, dt
            )
        termination = Termination(kind="completed", t=n_steps * dt)
    except SimulationFault as fault:
        termination = Termination(kind=_fault_kind(fault), t=fault.t if fault.t is not None else 0.0)

    mg_min = min_f / mg if math.isfinite(min_f) else math.inf
    return _finish(scenario, rows, termination, mg_min)


def _run_attitude_only(scenario: Scenario) -> RunResult:
    """Attitude loop in isolation: the thrust axis tracks the direction that
    the reference trajectory demands, with no translational dynamics."""
    params = scenario.vehicle
    gains = scenario.gains
    est = scenario.estimates
    profile = scenario.reference
    wind = params.wind
    dt = scenario.dt
    n_steps = max(1, round(scenario.duration / dt))
    mg = params.m * params.g

    att: Rot = geom.rot_from_euler_zyx(*scenario.initial_euler)
    rows: list[TraceRow] = []
    min_f = math.inf

    def ff_at(ts: float, smooth: bool):
        sample = profile.sample(ts)
        sample = ReferenceSample(vr=sample.vr, ar=sample.ar, jr=sample.jr, smooth=smooth)
        return ctrl_mod.reference_feedforward(est, gains, sample, wind.value(ts), wind.rate(ts), params.g)

    try:
        for step_idx in range(n_steps):
            t = step_idx * dt
            smooth = profile.sample(t, dt).smooth

            def derive(ts: float, Rs: Rot):
                ff = ff_at(ts, smooth)
                k = (Rs[2], Rs[5], Rs[8])
                w = ctrl_mod.omega_feedback(
                    gains, k, ff.kr, ff.omega_r, ff.gamma_dot / ff.gamma, t=ts
                )
                wb, sat_w = ctrl_mod.clamp_body_rates(Rs, w, gains.omega_max)
                return geom.rot_rate(Rs, wb), wb, sat_w, ff

            dR1, wb1, sat1, ff1 = derive(t, att)
            f_ref = math.sqrt(max(ff1.gamma**2 - gains.c2, 0.0))
            if f_ref < min_f:
                min_f = f_ref
            if step_idx % scenario.decimation == 0:
                k = geom.body_axis(att)
                v1 = ctrl_mod.alignment_energy(ff1.gamma, k, ff1.kr)
                sample = profile.sample(t)
                rows.append(
                    TraceRow(
                        t=t,
                        vr=geom.scale(sample.vr, 1.0 / MACH),
                        v=geom.scale(sample.vr, 1.0 / MACH),
                        alpha_deg=0.0,
                        omega=wb1,
                        T_over_mg=0.0,
                        f_over_mg=f_ref / mg,
                        theta_tilde_deg=math.degrees(geom.angle_between(k, ff1.kr)),
                        V1=v1,
                        Iv=ZERO3,
                        sat_thrust=False,
                        sat_omega=sat1,
                    )
                )
            h = 0.5 * dt
            R2 = tuple(r + h * d for r, d in zip(att, dR1))
            dR2, *_ = derive(t + h, R2)
            R3 = tuple(r + h * d for r, d in zip(att, dR2))
            dR3, *_ = derive(t + h, R3)
            R4 = tuple(r + dt * d for r, d in zip(att, dR3))
            dR4, *_ = derive(t + dt, R4)
            sixth = dt / 6.0
            att = geom.renormalize(
                tuple(
                    a + sixth * (b + 2.0 * c + 2.0 * d + e)
                    for a, b, c, d, e in zip(att, dR1, dR2, dR3, dR4)
                )
            )
        termination = Termination(kind="completed", t=n_steps * dt)
    except SimulationFault as fault:
        termination = Termination(kind=_fault_kind(fault), t=fault.t if fault.t is not None else 0.0)

    mg_min = min_f / mg if math.isfinite(min_f) else math.inf
    return _finish(scenario, rows, termination, mg_min)


def _fault_kind(fault: SimulationFault) -> str:
    if isinstance(fault, SingularReference):
        return "singular_reference"
    if isinstance(fault, AntipodalAttitude):
        return "antipodal"
    return "nonfinite"


# --- monitors --------------------------------------------------------------------


def lyapunov_monitor(
    trace,
    gains: CtrlGains,
    jump_times: tuple[float, ...],
    mg: float,
    decay_tol: float = 1e-3,
    v1_floor: float = 1e-12,
) -> LyapunovReport:
    """Decay and perturbation-bound checks over a logged trace.

    The alignment energy must contract at least at twice the smallest
    attitude gain seen over the run, on intervals where no saturation was
    active and the reference was smooth.  Because the logged energy uses the
    live force-dependent gain, closed-loop traces may legitimately show
    growth where the apparent force magnitude swells; this check is strict
    only for kinematic runs.

    The perturbation bound |F| * sin(theta) <= sqrt(8 V1) must hold on every
    row regardless.
    """
    rows = list(trace)
    if not rows:
        return LyapunovReport(0, 0, 0.0, 0, 0, 0, math.inf, True, 0.0)

    k1_min = math.inf
    eps_worst = 0.0
    for row in rows:
        c = math.cos(math.radians(row.theta_tilde_deg))
        k1_min = min(k1_min, ctrl_mod.attitude_gain(gains, c))
        lhs = row.f_over_mg * mg * math.sin(math.radians(row.theta_tilde_deg))
        rhs = math.sqrt(8.0 * max(row.V1, 0.0))
        if rhs > 0.0:
            eps_worst = max(eps_worst, lhs / rhs)
        elif lhs > 0.0:
            eps_worst = math.inf

    checked = violations = ex_sat = ex_jump = ex_floor = 0
    worst = 0.0
    for a, b in zip(rows, rows[1:]):
        if a.sat_omega or a.sat_thrust or b.sat_omega or b.sat_thrust:
            ex_sat += 1
            continue
        if any(a.t <= tj <= b.t for tj in jump_times):
            ex_jump += 1
            continue
        if a.V1 < v1_floor:
            ex_floor += 1
            continue
        bound = a.V1 * math.exp(-2.0 * k1_min * (b.t - a.t)) * (1.0 + decay_tol)
        checked += 1
        ratio = b.V1 / bound if bound > 0.0 else math.inf
        worst = max(worst, ratio)
        if b.V1 > bound:
            violations += 1
    return LyapunovReport(
        checked=checked,
        violations=violations,
        worst_ratio=worst,
        excluded_saturated=ex_sat,
        excluded_jump=ex_jump,
        excluded_floor=ex_floor,
        k1_min=k1_min,
        eps_bound_ok=eps_worst <= 1.0 + 1e-6,
        eps_bound_worst=eps_worst,
    )


def segment_error_summary(trace, profile: ReferenceProfile) -> tuple[SegmentStats, ...]:
    """Per-segment tracking error statistics, in Mach."""
    rows = list(trace)
    stats = []
    for seg in profile.segments:
        in_seg = [r for r in rows if seg.t0 - 1e-12 <= r.t < seg.t1 - 1e-12]
        kind = "constant" if isinstance(seg, ConstantSegment) else "sinusoid"
        if not in_seg:
            stats.append(
                SegmentStats(kind, seg.t0, seg.t1, math.nan, math.nan, math.nan, False, True)
            )
            continue
        t_end = in_seg[-1].t
        truncated = t_end < seg.t1 - 2.0 * (rows[1].t - rows[0].t if len(rows) > 1 else 0.0)
        errs = [(r.t, geom.norm(geom.sub(r.v, r.vr))) for r in in_seg]
        first = [e for t, e in errs if t <= seg.t0 + 1.0]
        last = [e for t, e in errs if t >= t_end - 1.0]
        half = [e for t, e in errs if t >= (seg.t0 + seg.t1) / 2.0]
        first_mean = sum(first) / len(first) if first else math.nan
        term_mean = sum(last) / len(last) if last else math.nan
        half_max = max(half) if half else math.nan
        stats.append(
            SegmentStats(
                kind=kind,
                t0=seg.t0,
                t1=seg.t1,
                first_mean_mach=first_mean,
                terminal_mean_mach=term_mean,
                last_half_max_mach=half_max,
                decayed=bool(term_mean <= first_mean) if first and last else False,
                truncated=truncated,
            )
        )
    return tuple(stats)


# --- batched kinematic harness -----------------------------------------------


@dataclass(frozen=True)
class KinematicResult:
    """Alignment-loop trajectories for a batch of initial axes."""

    times: np.ndarray       # (n_steps + 1,)
    cos_err: np.ndarray     # (n_steps + 1, n_batch) k . kr history
    v1: np.ndarray          # (n_steps + 1, n_batch)
    k1: np.ndarray          # (n_steps + 1, n_batch) attitude gain history
    k_final: np.ndarray = field(repr=False, default=None)  # (n_batch, 3)


def kinematic_alignment_run(
    k0: np.ndarray,
    kr_fn,
    kr_dot_fn,
    gamma_fn,
    gamma_dot_fn,
    gains: CtrlGains,
    dt: float,
    duration: float,
    max_stage_angle: float = 0.2,
) -> KinematicResult:
    """Integrate the pure alignment loop dk/dt = w x k for a batch of axes.

    The unclamped command law is evaluated at every RK4 stage; steps whose
    initial rate would rotate by more than ``max_stage_angle`` radians are
    internally substepped, so trajectories that start close to the antipode
    (where the gain is huge) remain accurate.  All trajectories share the
    reference direction kr_fn(t) and the gain schedule gamma_fn(t).
    """
    k = np.array(k0, dtype=float)
    if k.ndim != 2 or k.shape[1] != 3:
        raise ContractViolation("k0 must be (n, 3)")
    k /= np.sqrt(np.sum(k * k, axis=1, keepdims=True))
    n_steps = max(1, round(duration / dt))
    eps1 = gains.eps1
    k10 = gains.k10
    power = gains.k1_power

    def deriv(t: float, kb: np.ndarray) -> np.ndarray:
        """dk/dt = w(k, t) x k for the whole batch, componentwise."""
        krx, kry, krz = (float(x) for x in kr_fn(t))
        kdx, kdy, kdz = (float(x) for x in kr_dot_fn(t))
        wrx = kry * kdz - krz * kdy
        wry = krz * kdx - krx * kdz
        wrz = krx * kdy - kry * kdx
        ratio = float(gamma_dot_fn(t)) / float(gamma_fn(t))
        kx = kb[:, 0]
        ky = kb[:, 1]
        kz = kb[:, 2]
        c = kx * krx + ky * kry + kz * krz
        if np.any(c <= -1.0 + ctrl_mod.ANTIPODE_MARGIN):
            raise AntipodalAttitude("batch member at the antipode", t=t)
        k1 = k10 / (1.0 + c + eps1) ** power
        lam = -(kx * wrx + ky * wry + kz * wrz)
        a = k1 + ratio
        wx = a * (ky * krz - kz * kry) + wrx + lam * kx
        wy = a * (kz * krx - kx * krz) + wry + lam * ky
        wz = a * (kx * kry - ky * krx) + wrz + lam * kz
        return np.column_stack((wy * kz - wz * ky, wz * kx - wx * kz, wx * ky - wy * kx))

    times = np.empty(n_steps + 1)
    cos_hist = np.empty((n_steps + 1, k.shape[0]))
    v1_hist = np.empty_like(cos_hist)
    k1_hist = np.empty_like(cos_hist)

    def record(idx: int, t: float):
        kr = np.asarray(kr_fn(t), dtype=float)
        gamma = float(gamma_fn(t))
        c = np.clip(k @ kr, -1.0, 1.0)
        cxk = np.column_stack((
            k[:, 1] * kr[2] - k[:, 2] * kr[1],
            k[:, 2] * kr[0] - k[:, 0] * kr[2],
            k[:, 0] * kr[1] - k[:, 1] * kr[0],
        ))
        s2 = np.sum(cxk * cxk, axis=1)
        times[idx] = t
        cos_hist[idx] = c
        v1_hist[idx] = 0.5 * gamma * gamma * s2 / (1.0 + c) ** 2
        k1_hist[idx] = k10 / (1.0 + c + eps1) ** power

    record(0, 0.0)
    for i in range(n_steps):
        t = i * dt
        d1 = deriv(t, k)
        w_max = math.sqrt(float(np.max(np.sum(d1 * d1, axis=1))))
        n_sub = min(1000, max(1, math.ceil(w_max * dt / max_stage_angle)))
        h = dt / n_sub
        for j in range(n_sub):
            ts = t + j * h
            if j > 0:
                d1 = deriv(ts, k)
            d2 = deriv(ts + 0.5 * h, k + (0.5 * h) * d1)
            d3 = deriv(ts + 0.5 * h, k + (0.5 * h) * d2)
            d4 = deriv(ts + h, k + h * d3)
            k = k + (h / 6.0) * (d1 + 2.0 * (d2 + d3) + d4)
            k /= np.sqrt(np.sum(k * k, axis=1, keepdims=True))
        record(i + 1, (i + 1) * dt)
    return KinematicResult(times=times, cos_err=cos_hist, v1=v1_hist, k1=k1_hist, k_final=k)
