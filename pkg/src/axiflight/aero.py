"""Aerodynamic coefficient models and force evaluation for axisymmetric bodies.

Two coefficient families are supported.  The trigonometric family

    cd(a) = c0 + 2*c1*sin(a)**2        cl(a) = c1*sin(2*a)

satisfies cd(a) + cl(a)*cot(a) = c0 + 2*c1 for every angle of attack, which
is exactly the condition under which the equations of motion can be rewritten
with an orientation-independent equivalent drag and a modified thrust (see
:func:`spherical_equivalence`).  Measured characteristics enter as linearly
interpolated tables; bisymmetric tables given on [0, 90] degrees are extended
by the fold cd(pi - a) = cd(a), cl(pi - a) = -cl(a).

Angle conventions: the angle of attack ``a`` in [0, pi] is measured between
the negative thrust axis and the air velocity; the azimuth ``b`` in (-pi, pi]
locates the air velocity around the symmetry axis and is undefined on it.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegenerateFit, ZeroAirspeed
from .geom import Vec3, ZERO3, as_vec3

AIRSPEED_FLOOR = 1e-9       # below this, angles and forces are undefined [m/s]
AXIS_SIN_ALPHA = 1e-9       # below this, the azimuth angle is undefined


@dataclass(frozen=True)
class TrigCoeffModel:
    """Two-parameter trigonometric coefficient model."""

    c0: float
    c1: float

    def __post_init__(self):
        if not (math.isfinite(self.c0) and math.isfinite(self.c1)):
            raise ContractViolation("non-finite coefficients")

    @property
    def cd0(self) -> float:
        """Equivalent drag constant c0 + 2*c1."""
        return self.c0 + 2.0 * self.c1

    def cd(self, alpha: float) -> float:
        s = math.sin(alpha)
        return self.c0 + 2.0 * self.c1 * s * s

    def cl(self, alpha: float) -> float:
        return self.c1 * math.sin(2.0 * alpha)


@dataclass(frozen=True)
class TableCoeffModel:
    """Linearly interpolated measured coefficients, clamped at the ends.

    ``alpha`` is strictly ascending in radians.  A bisymmetric table must
    cover [0, pi/2] and is evaluated through the bisymmetric fold; a plain
    table should cover [0, pi].
    """

    alpha: tuple[float, ...]
    cl_values: tuple[float, ...]
    cd_values: tuple[float, ...]
    bisymmetric: bool = False

    def __post_init__(self):
        n = len(self.alpha)
        if n < 2 or len(self.cl_values) != n or len(self.cd_values) != n:
            raise ContractViolation("table needs >= 2 rows of equal length")
        if any(not math.isfinite(a) for a in self.alpha + self.cl_values + self.cd_values):
            raise ContractViolation("non-finite table entries")
        if any(b <= a for a, b in zip(self.alpha, self.alpha[1:])):
            raise ContractViolation("alpha column must be strictly ascending")
        if self.alpha[0] < -1e-12 or self.alpha[-1] > math.pi + 1e-12:
            raise ContractViolation("alpha must lie in [0, pi] radians")
        if any(c < 0.0 for c in self.cd_values):
            raise ContractViolation("drag coefficients must be >= 0")

    @classmethod
    def from_degrees(cls, alpha_deg, cl, cd, symmetry: str = "none") -> "TableCoeffModel":
        if symmetry not in ("none", "bisymmetric"):
            raise ContractViolation(f"unknown symmetry {symmetry!r}")
        return cls(
            alpha=tuple(math.radians(float(a)) for a in alpha_deg),
            cl_values=tuple(float(v) for v in cl),
            cd_values=tuple(float(v) for v in cd),
            bisymmetric=(symmetry == "bisymmetric"),
        )

    def _fold(self, alpha: float) -> tuple[float, float]:
        """Map alpha into the tabulated range; returns (angle, lift sign)."""
        if not self.bisymmetric:
            return alpha, 1.0
        a = math.fmod(alpha, math.pi)
        if a < 0.0:
            a += math.pi
        if a > 0.5 * math.pi:
            return math.pi - a, -1.0
        return a, 1.0

    def _interp(self, values: tuple[float, ...], a: float) -> float:
        grid = self.alpha
        if a <= grid[0]:
            return values[0]
        if a >= grid[-1]:
            return values[-1]
        i = bisect_right(grid, a)
        a0, a1 = grid[i - 1], grid[i]
        w = (a - a0) / (a1 - a0)
        return values[i - 1] * (1.0 - w) + values[i] * w

    def cd(self, alpha: float) -> float:
        a, _ = self._fold(alpha)
        return self._interp(self.cd_values, a)

    def cl(self, alpha: float) -> float:
        a, sign = self._fold(alpha)
        return sign * self._interp(self.cl_values, a)

    def coeffs(self, alpha: float) -> tuple[float, float]:
        """(cl, cd) with one grid lookup; the hot path for force evaluation."""
        a, sign = self._fold(alpha)
        grid = self.alpha
        if a <= grid[0]:
            return sign * self.cl_values[0], self.cd_values[0]
        if a >= grid[-1]:
            return sign * self.cl_values[-1], self.cd_values[-1]
        i = bisect_right(grid, a)
        a0, a1 = grid[i - 1], grid[i]
        w = (a - a0) / (a1 - a0)
        u = 1.0 - w
        return (
            sign * (self.cl_values[i - 1] * u + self.cl_values[i] * w),
            self.cd_values[i - 1] * u + self.cd_values[i] * w,
        )


CoeffModel = TrigCoeffModel | TableCoeffModel


@dataclass(frozen=True)
class AeroEnv:
    """Ambient parameters: force scale ka = rho*area/2 and a constant wind."""

    ka: float
    v_wind: Vec3 = ZERO3

    def __post_init__(self):
        if not (math.isfinite(self.ka) and self.ka > 0.0):
            raise ContractViolation(f"ka must be positive, got {self.ka}")
        object.__setattr__(self, "v_wind", as_vec3(self.v_wind))


@dataclass(frozen=True)
class AeroAngles:
    """Angle of attack and azimuth of the air velocity in the body frame."""

    alpha: float
    beta: float
    valid_beta: bool


def aero_angles(v_air_body: Vec3) -> AeroAngles:
    """Angles of the body-frame air velocity.

    Raises ZeroAirspeed below the airspeed floor.  On the symmetry axis the
    azimuth is undefined and flagged invalid (it is returned as 0).
    """
    va = math.sqrt(v_air_body[0] ** 2 + v_air_body[1] ** 2 + v_air_body[2] ** 2)
    if va < AIRSPEED_FLOOR:
        raise ZeroAirspeed(f"|v_air| = {va} below floor")
    ca = -v_air_body[2] / va
    ca = min(1.0, max(-1.0, ca))
    alpha = math.acos(ca)
    if math.sin(alpha) < AXIS_SIN_ALPHA:
        return AeroAngles(alpha=alpha, beta=0.0, valid_beta=False)
    return AeroAngles(alpha=alpha, beta=math.atan2(v_air_body[1], v_air_body[0]), valid_beta=True)


def force_body(
    model: CoeffModel, ka: float, v_air_body: Vec3, beta_fallback: float = 0.0
) -> tuple[Vec3, float, float, bool]:
    """Aerodynamic force on the body in body axes.

    Lift acts along r(b) x v_air with r(b) = (-sin b, cos b, 0); drag opposes
    the air velocity.  Away from the symmetry axis, sin b and cos b come
    straight from the transverse velocity components, so no trigonometry
    beyond one acos is needed.  On the axis the azimuth is taken from
    ``beta_fallback`` (the lift coefficient vanishes there for any physical
    table, so the choice only fixes the direction of a zero vector).

    Returns (force, alpha, beta_effective, beta_valid).
    """
    vx, vy, vz = v_air_body
    va = math.sqrt(vx * vx + vy * vy + vz * vz)
    if va < AIRSPEED_FLOOR:
        raise ZeroAirspeed(f"|v_air| = {va} below floor")
    ca = -vz / va
    ca = min(1.0, max(-1.0, ca))
    alpha = math.acos(ca)
    sa = math.sqrt(max(0.0, 1.0 - ca * ca))
    if sa < AXIS_SIN_ALPHA:
        beta = beta_fallback
        valid = False
        sb, cb = math.sin(beta), math.cos(beta)
    else:
        # v_air = |v|(sin a cos b, sin a sin b, -cos a)
        denom = va * sa
        cb = vx / denom
        sb = vy / denom
        beta = math.atan2(vy, vx)
        valid = True
    if type(model) is TrigCoeffModel:
        cd = model.c0 + 2.0 * model.c1 * sa * sa
        cl = 2.0 * model.c1 * sa * ca  # sin(2a) = 2 sin(a) cos(a)
    else:
        cl, cd = model.coeffs(alpha)
    drag = -ka * va * cd
    lift = ka * va * cl
    # r(b) x v_air expanded with r = (-sin b, cos b, 0)
    return (
        (drag * vx + lift * cb * vz, drag * vy + lift * sb * vz,
         drag * vz - lift * (cb * vx + sb * vy)),
        alpha,
        beta,
        valid,
    )


def check_compatibility(model: CoeffModel, alpha_grid) -> "CompatReport":
    """Residual of the constant-sum condition cd + cl*cot(alpha) over a grid.

    The reference constant is the grid mean, so for the trigonometric family
    the maximum residual is at rounding level.
    """
    grid = [float(a) for a in alpha_grid]
    if not grid or min(grid) <= 0.0 or max(grid) >= math.pi:
        raise ContractViolation("alpha grid must lie strictly inside (0, pi)")
    sums = [model.cd(a) + model.cl(a) / math.tan(a) for a in grid]
    cd0_est = sum(sums) / len(sums)
    max_residual = max(abs(s - cd0_est) for s in sums)
    return CompatReport(cd0_est=cd0_est, max_residual=max_residual, n_grid=len(grid))


@dataclass(frozen=True)
class CompatReport:
    cd0_est: float
    max_residual: float
    n_grid: int


def spherical_equivalence(
    model: TrigCoeffModel, ka: float, v_air_body: Vec3, thrust: float
) -> tuple[Vec3, float]:
    """Equivalent drag force and modified thrust intensity.

    Rewrites the applied force so the body behaves like a sphere: returns
    (F_p, T_p) with F_p = -ka*(c0+2c1)*|v_a|*v_a (body axes here, but the
    formula is frame-independent) and T_p = T + 2*c1*ka*|v_a|^2*cos(alpha),
    guaranteeing F_a - T*k == F_p - T_p*k identically.

    Zero airspeed is tolerated: F_p = 0 and T_p = T.
    """
    vx, vy, vz = v_air_body
    va = math.sqrt(vx * vx + vy * vy + vz * vz)
    if va < AIRSPEED_FLOOR:
        return ZERO3, float(thrust)
    k = -ka * model.cd0 * va
    # |v_a|^2 cos(alpha) = -|v_a| * v_a3, so T_p needs no trig calls
    tp = thrust - 2.0 * model.c1 * ka * va * vz
    return (k * vx, k * vy, k * vz), tp


# --- coefficient identification --------------------------------------------


@dataclass(frozen=True)
class FitReport:
    c0: float
    c1: float
    rms_cd: float
    rms_cl: float
    n_samples: int
    compat_residual: float


def fit_trig_model(
    alpha, cl, cd, weights: tuple[float, float] = (1.0, 1.0)
) -> tuple[TrigCoeffModel, FitReport]:
    """Joint linear least squares for (c0, c1) over both coefficient channels.

    Stacks the residuals cd_i - c0 - 2*c1*sin^2(a_i) and cl_i - c1*sin(2 a_i),
    each scaled by the inverse sample magnitude (floored at 1e-3 of the
    channel maximum).  Measured coefficients carry noise that grows with the
    value, and without the scaling the small-angle drag level is drowned out
    by the absolute scatter of the large-angle points.  ``weights`` applies
    extra per-channel factors (drag, lift) on top.

    Raises DegenerateFit when the two parameters are not identifiable from
    the sampled angles.
    """
    a = np.asarray(alpha, dtype=float)
    cl_arr = np.asarray(cl, dtype=float)
    cd_arr = np.asarray(cd, dtype=float)
    if a.ndim != 1 or a.shape != cl_arr.shape or a.shape != cd_arr.shape:
        raise ContractViolation("alpha, cl, cd must be 1-d arrays of equal length")
    if a.size < 2:
        raise DegenerateFit("need at least two samples")
    if not (np.isfinite(a).all() and np.isfinite(cl_arr).all() and np.isfinite(cd_arr).all()):
        raise ContractViolation("non-finite fit samples")

    floor_cd = max(1e-3 * float(np.max(np.abs(cd_arr))), 1e-12)
    floor_cl = max(1e-3 * float(np.max(np.abs(cl_arr))), 1e-12)
    w_cd = math.sqrt(weights[0]) / np.maximum(np.abs(cd_arr), floor_cd)
    w_cl = math.sqrt(weights[1]) / np.maximum(np.abs(cl_arr), floor_cl)

    s2 = np.sin(a) ** 2
    s2a = np.sin(2.0 * a)
    # identifiability is a property of the sampled angles alone; do not let
    # inverse-magnitude weights amplify trigonometric rounding into fake rank
    if max(float(np.max(np.abs(s2))), float(np.max(np.abs(s2a)))) < 1e-9:
        raise DegenerateFit("all samples on the symmetry axis; c1 not observable")
    design = np.vstack(
        [
            np.column_stack([np.ones_like(a), 2.0 * s2]) * w_cd[:, None],
            np.column_stack([np.zeros_like(a), s2a]) * w_cl[:, None],
        ]
    )
    rhs = np.concatenate([cd_arr * w_cd, cl_arr * w_cl])
    solution, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    if rank < 2:
        raise DegenerateFit("normal equations are singular; c1 not observable")
    c0, c1 = float(solution[0]), float(solution[1])

    model = TrigCoeffModel(c0=c0, c1=c1)
    rms_cd = float(np.sqrt(np.mean((cd_arr - (c0 + 2.0 * c1 * s2)) ** 2)))
    rms_cl = float(np.sqrt(np.mean((cl_arr - c1 * s2a) ** 2)))
    compat = _raw_table_compat(a, cl_arr, cd_arr)
    report = FitReport(
        c0=c0, c1=c1, rms_cd=rms_cd, rms_cl=rms_cl, n_samples=int(a.size), compat_residual=compat
    )
    return model, report


def _raw_table_compat(a: np.ndarray, cl: np.ndarray, cd: np.ndarray) -> float:
    """Constant-sum residual of the raw samples, poles excluded."""
    mask = (a > math.radians(5.0)) & (a < math.radians(175.0))
    if mask.sum() < 2:
        return float("nan")
    sums = cd[mask] + cl[mask] / np.tan(a[mask])
    return float(np.max(np.abs(sums - sums.mean())))


def table_cd0_estimate(model: TableCoeffModel, step_deg: float = 1.0) -> float:
    """Grid-mean equivalent drag constant over [5, 175] degrees.

    The cotangent blows up numerically at the poles even when the product is
    finite, so a 5-degree band around each pole is excluded.
    """
    grid = np.arange(5.0, 175.0 + 1e-9, step_deg)
    vals = [model.cd(math.radians(a)) + model.cl(math.radians(a)) / math.tan(math.radians(a))
            for a in grid]
    return float(np.mean(vals))


def load_coeff_table_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a coefficient table CSV with header ``alpha_deg,cl,cd``.

    Lines starting with '#' are comments.  Returns (alpha_deg, cl, cd);
    raises ContractViolation on format errors including an unsorted alpha
    column.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                if header != ["alpha_deg", "cl", "cd"]:
                    raise ContractViolation(
                        f"{path}:{lineno}: expected header 'alpha_deg,cl,cd', got {line!r}"
                    )
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ContractViolation(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
            try:
                rows.append(tuple(float(p) for p in parts))
            except ValueError as exc:
                raise ContractViolation(f"{path}:{lineno}: {exc}") from exc
    if header is None or len(rows) < 2:
        raise ContractViolation(f"{path}: no data rows")
    alpha = np.array([r[0] for r in rows])
    if np.any(np.diff(alpha) <= 0.0):
        raise ContractViolation(f"{path}: alpha_deg column must be strictly ascending")
    return alpha, np.array([r[1] for r in rows]), np.array([r[2] for r in rows])
