"""Two-layer flight controller.

Outer loop: from the velocity error and a bounded error integral, build an
apparent force vector whose direction is where the thrust axis should point
and whose alignment-weighted magnitude sets the thrust.  Two variants exist:

  * ``fp`` mode uses the equivalent-drag apparent force (orientation
    independent, so the commanded direction is well defined whenever the
    vehicle moves); this is the primary design.
  * ``fa`` mode is the drag-only baseline: the raw aerodynamic apparent force
    is used for the direction.  Because that vector depends on the vehicle's
    orientation and is much smaller in cruise, it can cross zero during
    aggressive transients, which aborts the run with SingularReference.

Inner loop: the angular velocity command

    w = (k1 + gamma_dot/gamma) * (k x k_r) + w_r + lambda * k

drives the thrust axis k exponentially onto k_r from every initial condition
except the antipode.  With lambda = -w_r . k the command never spins the body
about its own axis.  The feedforward pair (w_r, gamma_dot) is evaluated along
the reference trajectory, which is the practical substitute for the unknown
time derivative of the live apparent force.

The error integral obeys a smoothly saturated update law,

    dIv/dt = -kI*Iv + kI*sat_delta(Iv + v_err/kI),

which integrates the velocity error in the small regime while keeping |Iv|
bounded by delta without windup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import aero, geom
from .errors import AntipodalAttitude, ContractViolation, SingularReference, ZeroAirspeed
from .geom import Rot, Vec3, ZERO3

ANTIPODE_MARGIN = 1e-9
# The composed loop only aborts on an exact antipode hit: the eps1-regularized
# gain keeps the law bounded there, and transversal passages through the
# neighborhood are survivable (and do occur in the baseline-controller runs).
ANTIPODE_MARGIN_LOOP = 1e-12
_VA_TINY = 1e-12


@dataclass(frozen=True)
class CtrlEstimates:
    """Parameter estimates used in the control computation."""

    m_hat: float   # kg
    ka_hat: float  # kg/m
    c0_hat: float
    c1_hat: float

    def __post_init__(self):
        if not (math.isfinite(self.m_hat) and self.m_hat > 0.0):
            raise ContractViolation(f"m_hat must be positive, got {self.m_hat}")
        if not (math.isfinite(self.ka_hat) and self.ka_hat > 0.0):
            raise ContractViolation(f"ka_hat must be positive, got {self.ka_hat}")
        if self.cd0_hat <= 0.0:
            raise ContractViolation("c0_hat + 2*c1_hat must be positive")

    @property
    def cd0_hat(self) -> float:
        return self.c0_hat + 2.0 * self.c1_hat

    @property
    def model(self) -> aero.TrigCoeffModel:
        return aero.TrigCoeffModel(c0=self.c0_hat, c1=self.c1_hat)


@dataclass(frozen=True)
class CtrlGains:
    """Gains and saturation limits.

    ``eps_singular`` is the absolute force magnitude (N) below which the
    apparent force is declared vanished and the run aborts; ``delta_sat``
    bounds the velocity-error integral; ``k1_power`` selects the exponent of
    the alignment-dependent attitude gain (2 reproduces the reference
    experiments, 1 is the plain repulsive form).
    """

    kv: float = 5.0            # 1/s
    ki: float = 6.25           # 1/s^2
    kI: float = 50.0           # 1/s, integrator desaturation rate
    k10: float = 10.0          # 1/s
    eps1: float = 0.01
    c2: float = 6159.7         # N^2
    delta_sat: float = 25.0    # m/s * s
    T_max_factor: float = 10.0
    omega_max: float = 2.0 * math.pi  # rad/s, per body component
    eps_singular: float = 392.4       # N, 0.5 * (80 kg) * g
    k1_power: int = 2

    def __post_init__(self):
        for name in ("kv", "ki", "kI", "k10", "eps1", "c2", "delta_sat", "omega_max"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ContractViolation(f"{name} must be positive, got {val}")
        if self.k1_power not in (1, 2):
            raise ContractViolation("k1_power must be 1 or 2")


@dataclass(frozen=True)
class CtrlState:
    """Controller memory between steps: the saturated velocity-error integral."""

    Iv: Vec3 = ZERO3


@dataclass(frozen=True)
class ReferenceSample:
    """Reference velocity and its first two derivatives at one instant.

    ``smooth`` is cleared on steps that contain a reference discontinuity;
    derivative-based feedforward is suppressed there.
    """

    vr: Vec3
    ar: Vec3 = ZERO3
    jr: Vec3 = ZERO3
    smooth: bool = True


@dataclass(frozen=True)
class Feedforward:
    """Quantities evaluated along the reference trajectory."""

    kr: Vec3
    kr_dot: Vec3
    omega_r: Vec3
    gamma: float
    gamma_dot: float


@dataclass(frozen=True)
class Diagnostics:
    alpha: float        # rad, angle of attack (0 when airspeed is zero)
    theta_tilde: float  # rad, angle between thrust axis and its reference
    f_dir_norm: float   # N, magnitude of the direction-defining apparent force
    V1: float           # N^2, alignment Lyapunov value at the controller's gamma
    gamma: float        # N
    k1: float           # 1/s
    sat_thrust: bool
    sat_omega: bool


# --- elementary operations ---------------------------------------------------


def smooth_sat(x: Vec3, delta: float) -> Vec3:
    """Smooth vector saturation: identity to third order near zero, norm
    asymptotically bounded by delta."""
    n4 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) ** 2
    s = delta / (delta**4 + n4) ** 0.25
    return (x[0] * s, x[1] * s, x[2] * s)


def iv_derivative(gains: CtrlGains, iv: Vec3, v_err: Vec3) -> Vec3:
    kI = gains.kI
    s = smooth_sat(
        (iv[0] + v_err[0] / kI, iv[1] + v_err[1] / kI, iv[2] + v_err[2] / kI),
        gains.delta_sat,
    )
    return (kI * (s[0] - iv[0]), kI * (s[1] - iv[1]), kI * (s[2] - iv[2]))


def update_iv(gains: CtrlGains, iv: Vec3, v_err: Vec3, dt: float) -> Vec3:
    """One RK4 step of the saturated integrator with the error held."""
    if dt <= 0.0:
        raise ContractViolation(f"dt must be positive, got {dt}")
    d1 = iv_derivative(gains, iv, v_err)
    d2 = iv_derivative(gains, geom.add(iv, geom.scale(d1, 0.5 * dt)), v_err)
    d3 = iv_derivative(gains, geom.add(iv, geom.scale(d2, 0.5 * dt)), v_err)
    d4 = iv_derivative(gains, geom.add(iv, geom.scale(d3, dt)), v_err)
    sixth = dt / 6.0
    return (
        iv[0] + sixth * (d1[0] + 2.0 * d2[0] + 2.0 * d3[0] + d4[0]),
        iv[1] + sixth * (d1[1] + 2.0 * d2[1] + 2.0 * d3[1] + d4[1]),
        iv[2] + sixth * (d1[2] + 2.0 * d2[2] + 2.0 * d3[2] + d4[2]),
    )


def velocity_feedback(gains: CtrlGains, iv: Vec3, v_err: Vec3) -> Vec3:
    """Auxiliary acceleration command from error and integral."""
    return (
        -gains.kv * v_err[0] - gains.ki * iv[0],
        -gains.kv * v_err[1] - gains.ki * iv[1],
        -gains.kv * v_err[2] - gains.ki * iv[2],
    )


def equivalent_drag(ka: float, cd0: float, v_air: Vec3) -> Vec3:
    """Orientation-independent equivalent drag -ka*cd0*|v|*v (any frame)."""
    va = math.sqrt(v_air[0] ** 2 + v_air[1] ** 2 + v_air[2] ** 2)
    s = -ka * cd0 * va
    return (s * v_air[0], s * v_air[1], s * v_air[2])


def apparent_force_drag(
    est: CtrlEstimates, v_air: Vec3, ar: Vec3, xi: Vec3, g: float
) -> Vec3:
    """Equivalent-drag apparent force (inertial frame), estimates applied."""
    fp = equivalent_drag(est.ka_hat, est.cd0_hat, v_air)
    mh = est.m_hat
    return (
        fp[0] + mh * (-ar[0] - xi[0]),
        fp[1] + mh * (-ar[1] - xi[1]),
        fp[2] + mh * (g - ar[2] - xi[2]),
    )


def apparent_force_aero(
    est: CtrlEstimates, att: Rot, v_air: Vec3, ar: Vec3, xi: Vec3, g: float
) -> Vec3:
    """Raw-aero apparent force (inertial frame): the model lift-and-drag force
    at the current attitude plus the same gravity/reference/feedback terms."""
    va_body = geom.rot_apply_t(att, v_air)
    try:
        f_body, _, _, _ = aero.force_body(est.model, est.ka_hat, va_body)
        f_a = geom.rot_apply(att, f_body)
    except ZeroAirspeed:
        f_a = ZERO3
    mh = est.m_hat
    return (
        f_a[0] + mh * (-ar[0] - xi[0]),
        f_a[1] + mh * (-ar[1] - xi[1]),
        f_a[2] + mh * (g - ar[2] - xi[2]),
    )


def reference_direction(force: Vec3, eps_singular: float, t: float | None = None) -> Vec3:
    """Unit vector along the apparent force; aborts when it has vanished."""
    n = geom.norm(force)
    if n < eps_singular:
        raise SingularReference(
            f"apparent force magnitude {n:.6g} N below threshold {eps_singular:.6g} N", t=t
        )
    return (force[0] / n, force[1] / n, force[2] / n)


def direction_gain(force: Vec3, force_dot: Vec3, c2: float) -> tuple[float, float]:
    """gamma = sqrt(c2 + |F|^2) and its time derivative given dF/dt."""
    if c2 <= 0.0:
        raise ContractViolation(f"c2 must be positive, got {c2}")
    gamma = math.sqrt(c2 + geom.dot(force, force))
    return gamma, geom.dot(force, force_dot) / gamma


def attitude_gain(gains: CtrlGains, cos_err: float) -> float:
    """Alignment-dependent gain; grows near the antipode to repel it."""
    base = 1.0 + cos_err + gains.eps1
    if gains.k1_power == 2:
        return gains.k10 / (base * base)
    return gains.k10 / base


def alignment_energy(gamma: float, k: Vec3, kr: Vec3) -> float:
    """Alignment Lyapunov value (gamma^2/2) tan^2(angle/2) for unit vectors.

    Uses |k x kr|^2 / (1 + k.kr)^2, which stays accurate at small angles
    where 1 - k.kr would cancel catastrophically.
    """
    c = geom.dot(k, kr)
    e = geom.cross(k, kr)
    s2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2]
    return 0.5 * gamma * gamma * s2 / ((1.0 + c) * (1.0 + c))


def omega_feedback(
    gains: CtrlGains,
    k: Vec3,
    kr: Vec3,
    omega_r: Vec3,
    gamma_ratio: float,
    t: float | None = None,
    antipode_margin: float = ANTIPODE_MARGIN,
) -> Vec3:
    """Unclamped angular velocity command (inertial frame).

    The axial term keeps w . k = 0, so the command never induces rotation
    about the thrust axis.  Raises AntipodalAttitude on the boundary of the
    attraction domain.
    """
    c = geom.dot(k, kr)
    if c <= -1.0 + antipode_margin:
        raise AntipodalAttitude(f"thrust axis at the antipode of its reference (k.kr={c})", t=t)
    k1 = attitude_gain(gains, c)
    e = geom.cross(k, kr)
    lam = -geom.dot(omega_r, k)
    a = k1 + gamma_ratio
    return (
        a * e[0] + omega_r[0] + lam * k[0],
        a * e[1] + omega_r[1] + lam * k[1],
        a * e[2] + omega_r[2] + lam * k[2],
    )


def omega_cmd(
    gains: CtrlGains,
    k: Vec3,
    kr: Vec3,
    kr_dot: Vec3,
    gamma: float,
    gamma_dot: float,
) -> Vec3:
    """Angular velocity command for a consistently known (kr, kr_dot) pair.

    Rate saturation is applied separately (see clamp_body_rates) where the
    attitude is available, since the limits act on body components.
    """
    omega_r = geom.cross(kr, kr_dot)
    return omega_feedback(gains, k, kr, omega_r, gamma_dot / gamma)


def clamp_body_rates(att: Rot, omega_inertial: Vec3, omega_max: float) -> tuple[Vec3, bool]:
    """Express the command in body axes and clamp each component."""
    wb = geom.rot_apply_t(att, omega_inertial)
    lim = omega_max
    clamped = (
        min(lim, max(-lim, wb[0])),
        min(lim, max(-lim, wb[1])),
        min(lim, max(-lim, wb[2])),
    )
    return clamped, clamped != wb


def thrust_command(
    apparent_force: Vec3, k: Vec3, t_min: float, t_max: float
) -> tuple[float, bool]:
    """Thrust = apparent force resolved along the thrust axis, kept inside
    the strict (0, T_max) actuator interval."""
    raw = geom.dot(apparent_force, k)
    clamped = min(t_max, max(t_min, raw))
    return clamped, clamped != raw


def reference_feedforward(
    est: CtrlEstimates,
    gains: CtrlGains,
    sample: ReferenceSample,
    v_wind: Vec3,
    v_wind_rate: Vec3,
    g: float,
) -> Feedforward:
    """Reference direction, its rate, and the gain pair along the reference.

    Evaluates the equivalent-drag apparent force on the reference trajectory
    (zero feedback) and differentiates it analytically through the chain
    rule.  On samples flagged non-smooth, all derivative terms are zeroed.
    Raises SingularReference when the reference apparent force has vanished
    (the reference trajectory itself is infeasible for this control).
    """
    u = geom.sub(sample.vr, v_wind)
    un = geom.norm(u)
    kd = est.ka_hat * est.cd0_hat
    mh = est.m_hat
    f = (
        -kd * un * u[0] - mh * sample.ar[0],
        -kd * un * u[1] - mh * sample.ar[1],
        -kd * un * u[2] + mh * (g - sample.ar[2]),
    )
    fn = geom.norm(f)
    if fn < gains.eps_singular:
        raise SingularReference(
            f"reference apparent force {fn:.6g} N below threshold; reference infeasible"
        )
    kr = (f[0] / fn, f[1] / fn, f[2] / fn)
    if not sample.smooth:
        return Feedforward(kr=kr, kr_dot=ZERO3, omega_r=ZERO3,
                           gamma=math.sqrt(gains.c2 + fn * fn), gamma_dot=0.0)

    udot = geom.sub(sample.ar, v_wind_rate)
    if un > _VA_TINY:
        coeff = geom.dot(u, udot) / un
        drag_dot = (
            -kd * (un * udot[0] + coeff * u[0]),
            -kd * (un * udot[1] + coeff * u[1]),
            -kd * (un * udot[2] + coeff * u[2]),
        )
    else:
        drag_dot = ZERO3
    f_dot = (
        drag_dot[0] - mh * sample.jr[0],
        drag_dot[1] - mh * sample.jr[1],
        drag_dot[2] - mh * sample.jr[2],
    )
    # unit-vector derivative: projection of f_dot orthogonal to kr, then /|f|
    proj = geom.dot(kr, f_dot)
    kr_dot = (
        (f_dot[0] - proj * kr[0]) / fn,
        (f_dot[1] - proj * kr[1]) / fn,
        (f_dot[2] - proj * kr[2]) / fn,
    )
    omega_r = geom.cross(kr, kr_dot)
    gamma, gamma_dot = direction_gain(f, f_dot, gains.c2)
    return Feedforward(kr=kr, kr_dot=kr_dot, omega_r=omega_r, gamma=gamma, gamma_dot=gamma_dot)


# --- composed controller ------------------------------------------------------


class Controller:
    """Prepared control law for one scenario.

    ``mode`` selects the direction-defining apparent force: "fp" for the
    equivalent-drag design, "fa" for the drag-only baseline (feedforward
    disabled).  Instances are immutable aside from nothing at all: the error
    integral lives in CtrlState and is owned by the caller.
    """

    def __init__(self, est: CtrlEstimates, gains: CtrlGains, g: float, mode: str = "fp"):
        if mode not in ("fp", "fa"):
            raise ContractViolation(f"controller mode must be 'fp' or 'fa', got {mode!r}")
        self.est = est
        self.gains = gains
        self.g = g
        self.mode = mode
        self.t_min = 1e-6 * est.m_hat * g
        self.t_max = gains.T_max_factor * est.m_hat * g * (1.0 - 1e-9)
        # hot-loop constants
        self._model = est.model
        self._kd = est.ka_hat * est.cd0_hat

    def feedforward_fast(
        self, sample: ReferenceSample, v_wind: Vec3, v_wind_rate: Vec3
    ) -> tuple[Vec3, float]:
        """(omega_r, gamma_dot/gamma) along the reference; the trimmed form of
        reference_feedforward used inside the loop (see tests for the
        cross-check between the two)."""
        vr, ar, jr = sample.vr, sample.ar, sample.jr
        g = self.g
        mh = self.est.m_hat
        kd = self._kd
        ux = vr[0] - v_wind[0]
        uy = vr[1] - v_wind[1]
        uz = vr[2] - v_wind[2]
        un = math.sqrt(ux * ux + uy * uy + uz * uz)
        fx = -kd * un * ux - mh * ar[0]
        fy = -kd * un * uy - mh * ar[1]
        fz = -kd * un * uz + mh * (g - ar[2])
        fn2 = fx * fx + fy * fy + fz * fz
        if fn2 < self.gains.eps_singular**2:
            raise SingularReference(
                f"reference apparent force {math.sqrt(fn2):.6g} N below threshold; "
                "reference infeasible"
            )
        if not sample.smooth:
            return ZERO3, 0.0
        dx = ar[0] - v_wind_rate[0]
        dy = ar[1] - v_wind_rate[1]
        dz = ar[2] - v_wind_rate[2]
        if un > _VA_TINY:
            coeff = (ux * dx + uy * dy + uz * dz) / un
            gx = -kd * (un * dx + coeff * ux) - mh * jr[0]
            gy = -kd * (un * dy + coeff * uy) - mh * jr[1]
            gz = -kd * (un * dz + coeff * uz) - mh * jr[2]
        else:
            gx, gy, gz = -mh * jr[0], -mh * jr[1], -mh * jr[2]
        # omega_r = (f x df/dt)/|f|^2; the radial part of df/dt drops out
        omega_r = (
            (fy * gz - fz * gy) / fn2,
            (fz * gx - fx * gz) / fn2,
            (fx * gy - fy * gx) / fn2,
        )
        gamma2 = self.gains.c2 + fn2
        ratio = (fx * gx + fy * gy + fz * gz) / gamma2
        return omega_r, ratio

    def command(
        self,
        t: float,
        v: Vec3,
        att: Rot,
        iv: Vec3,
        sample: ReferenceSample,
        v_wind: Vec3 = ZERO3,
        v_wind_rate: Vec3 = ZERO3,
        ff: tuple[Vec3, float] | None = None,
        want_diag: bool = True,
    ) -> tuple[float, Vec3, Diagnostics | None]:
        """Control outputs at one instant (no state update).

        ``ff`` lets the caller reuse the reference feedforward across
        integrator stages that share a stage time; diagnostics are skipped on
        stages that are never logged.
        """
        gains = self.gains
        g = self.g
        mh = self.est.m_hat
        vr, ar = sample.vr, sample.ar
        vex = v[0] - vr[0]
        vey = v[1] - vr[1]
        vez = v[2] - vr[2]
        xix = -gains.kv * vex - gains.ki * iv[0]
        xiy = -gains.kv * vey - gains.ki * iv[1]
        xiz = -gains.kv * vez - gains.ki * iv[2]
        vax = v[0] - v_wind[0]
        vay = v[1] - v_wind[1]
        vaz = v[2] - v_wind[2]
        # mid-integration attitudes are not exactly orthonormal; the axis must
        # be unit or k.kr can leave [-1, 1] and fake an antipode hit
        kx, ky, kz = att[2], att[5], att[8]
        kn = math.sqrt(kx * kx + ky * ky + kz * kz)
        kx /= kn
        ky /= kn
        kz /= kn

        # gravity/reference/feedback group, shared by both apparent forces
        gmx = mh * (-ar[0] - xix)
        gmy = mh * (-ar[1] - xiy)
        gmz = mh * (g - ar[2] - xiz)

        # model aerodynamic force at the current attitude (body frame eval)
        bx = att[0] * vax + att[3] * vay + att[6] * vaz
        by = att[1] * vax + att[4] * vay + att[7] * vaz
        bz = att[2] * vax + att[5] * vay + att[8] * vaz
        try:
            f_body, alpha, _, _ = aero.force_body(self._model, self.est.ka_hat, (bx, by, bz))
            fax = att[0] * f_body[0] + att[1] * f_body[1] + att[2] * f_body[2] + gmx
            fay = att[3] * f_body[0] + att[4] * f_body[1] + att[5] * f_body[2] + gmy
            faz = att[6] * f_body[0] + att[7] * f_body[1] + att[8] * f_body[2] + gmz
        except ZeroAirspeed:
            alpha = 0.0
            fax, fay, faz = gmx, gmy, gmz

        if self.mode == "fp":
            van = math.sqrt(vax * vax + vay * vay + vaz * vaz)
            s = -self._kd * van
            fdx = s * vax + gmx
            fdy = s * vay + gmy
            fdz = s * vaz + gmz
            if ff is None:
                ff = self.feedforward_fast(sample, v_wind, v_wind_rate)
            omega_r, gamma_ratio = ff
        else:
            fdx, fdy, fdz = fax, fay, faz
            omega_r = ZERO3
            gamma_ratio = 0.0

        f_norm = math.sqrt(fdx * fdx + fdy * fdy + fdz * fdz)
        if f_norm < gains.eps_singular:
            raise SingularReference(
                f"apparent force {f_norm:.6g} N below threshold {gains.eps_singular:.6g} N",
                t=t,
            )
        krx = fdx / f_norm
        kry = fdy / f_norm
        krz = fdz / f_norm

        c = kx * krx + ky * kry + kz * krz
        if c <= -1.0 + ANTIPODE_MARGIN_LOOP:
            raise AntipodalAttitude(
                f"thrust axis at the antipode of its reference (k.kr={c})", t=t
            )
        base = 1.0 + c + gains.eps1
        k1 = gains.k10 / (base * base) if gains.k1_power == 2 else gains.k10 / base
        lam = -(omega_r[0] * kx + omega_r[1] * ky + omega_r[2] * kz)
        a = k1 + gamma_ratio
        wx = a * (ky * krz - kz * kry) + omega_r[0] + lam * kx
        wy = a * (kz * krx - kx * krz) + omega_r[1] + lam * ky
        wz = a * (kx * kry - ky * krx) + omega_r[2] + lam * kz

        # body components, clamped per axis
        wbx = att[0] * wx + att[3] * wy + att[6] * wz
        wby = att[1] * wx + att[4] * wy + att[7] * wz
        wbz = att[2] * wx + att[5] * wy + att[8] * wz
        lim = gains.omega_max
        cbx = lim if wbx > lim else (-lim if wbx < -lim else wbx)
        cby = lim if wby > lim else (-lim if wby < -lim else wby)
        cbz = lim if wbz > lim else (-lim if wbz < -lim else wbz)
        sat_w = (cbx != wbx) or (cby != wby) or (cbz != wbz)
        wb = (cbx, cby, cbz)

        raw_thrust = fax * kx + fay * ky + faz * kz
        thrust = min(self.t_max, max(self.t_min, raw_thrust))
        sat_t = thrust != raw_thrust

        if not want_diag:
            return thrust, wb, None
        kr = (krx, kry, krz)
        k = (kx, ky, kz)
        gamma_live = math.sqrt(gains.c2 + f_norm * f_norm)
        diag = Diagnostics(
            alpha=alpha,
            theta_tilde=geom.angle_between(k, kr),
            f_dir_norm=f_norm,
            V1=alignment_energy(gamma_live, k, kr),
            gamma=gamma_live,
            k1=k1,
            sat_thrust=sat_t,
            sat_omega=sat_w,
        )
        return thrust, wb, diag

    def step(
        self,
        state: CtrlState,
        t: float,
        v: Vec3,
        att: Rot,
        sample: ReferenceSample,
        dt: float,
        v_wind: Vec3 = ZERO3,
        v_wind_rate: Vec3 = ZERO3,
    ) -> tuple[float, Vec3, CtrlState, Diagnostics]:
        """Discrete controller step: advance the error integral, then command."""
        v_err = geom.sub(v, sample.vr)
        iv = update_iv(self.gains, state.Iv, v_err, dt)
        thrust, wb, diag = self.command(t, v, att, iv, sample, v_wind, v_wind_rate)
        return thrust, wb, replace(state, Iv=iv), diag
