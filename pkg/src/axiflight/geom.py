"""Minimal 3-vector algebra and rotation kernel for the flight loop.

Vectors are plain float triples and rotations are row-major 9-tuples mapping
body axes to the inertial frame.  The closed-loop integrator calls into this
module tens of thousands of times per simulated second, so everything here is
branch-light scalar arithmetic; batch work elsewhere uses numpy.

Conventions:
  * inertial frame is North-East-Down, gravity along +e3
  * the body thrust axis is the third column of the rotation matrix
  * Euler angles follow the aerospace Z-Y-X order, R = Rz(yaw) Ry(pitch) Rx(roll)
"""

from __future__ import annotations

import math

from .errors import ContractViolation

Vec3 = tuple[float, float, float]
Rot = tuple[float, float, float, float, float, float, float, float, float]

ZERO3: Vec3 = (0.0, 0.0, 0.0)
EX: Vec3 = (1.0, 0.0, 0.0)
EY: Vec3 = (0.0, 1.0, 0.0)
EZ: Vec3 = (0.0, 0.0, 1.0)
ROT_IDENTITY: Rot = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)


def vec3(x: float, y: float, z: float) -> Vec3:
    """Validated vector constructor; rejects NaN/Inf components."""
    v = (float(x), float(y), float(z))
    if not (math.isfinite(v[0]) and math.isfinite(v[1]) and math.isfinite(v[2])):
        raise ContractViolation(f"non-finite vector components {v}")
    return v


def as_vec3(v) -> Vec3:
    """Coerce any length-3 sequence into a validated Vec3."""
    x, y, z = v
    return vec3(x, y, z)


def is_finite(v: Vec3) -> bool:
    return math.isfinite(v[0]) and math.isfinite(v[1]) and math.isfinite(v[2])


def dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(v: Vec3, s: float) -> Vec3:
    return (v[0] * s, v[1] * s, v[2] * s)


def norm(v: Vec3) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def unit(v: Vec3, tol: float = 1e-12) -> Vec3:
    """Normalize to unit length; raises on (near-)zero input."""
    n = norm(v)
    if n < tol:
        raise ContractViolation(f"cannot normalize near-zero vector, |v|={n}")
    return (v[0] / n, v[1] / n, v[2] / n)


def angle_between(a: Vec3, b: Vec3) -> float:
    """Angle in [0, pi] between two unit vectors, robust near 0 and pi."""
    return math.atan2(norm(cross(a, b)), dot(a, b))


# --- rotations -------------------------------------------------------------


def attitude(entries) -> Rot:
    """Validated rotation constructor: orthonormal, det +1 within 1e-9."""
    r = tuple(float(e) for e in entries)
    if len(r) != 9:
        raise ContractViolation("rotation needs 9 entries, row-major")
    if not all(math.isfinite(e) for e in r):
        raise ContractViolation("non-finite rotation entries")
    defect, det_err = orthonormality_defect(r)
    if defect > 1e-9 or det_err > 1e-9:
        raise ContractViolation(
            f"not a rotation: orthonormality defect {defect:.3e}, det error {det_err:.3e}"
        )
    return r  # type: ignore[return-value]


def rot_apply(R: Rot, v: Vec3) -> Vec3:
    """Body frame to inertial frame."""
    return (
        R[0] * v[0] + R[1] * v[1] + R[2] * v[2],
        R[3] * v[0] + R[4] * v[1] + R[5] * v[2],
        R[6] * v[0] + R[7] * v[1] + R[8] * v[2],
    )


def rot_apply_t(R: Rot, v: Vec3) -> Vec3:
    """Inertial frame to body frame (transpose apply)."""
    return (
        R[0] * v[0] + R[3] * v[1] + R[6] * v[2],
        R[1] * v[0] + R[4] * v[1] + R[7] * v[2],
        R[2] * v[0] + R[5] * v[1] + R[8] * v[2],
    )


def rot_compose(A: Rot, B: Rot) -> Rot:
    """Matrix product A @ B."""
    return (
        A[0] * B[0] + A[1] * B[3] + A[2] * B[6],
        A[0] * B[1] + A[1] * B[4] + A[2] * B[7],
        A[0] * B[2] + A[1] * B[5] + A[2] * B[8],
        A[3] * B[0] + A[4] * B[3] + A[5] * B[6],
        A[3] * B[1] + A[4] * B[4] + A[5] * B[7],
        A[3] * B[2] + A[4] * B[5] + A[5] * B[8],
        A[6] * B[0] + A[7] * B[3] + A[8] * B[6],
        A[6] * B[1] + A[7] * B[4] + A[8] * B[7],
        A[6] * B[2] + A[7] * B[5] + A[8] * B[8],
    )


def rot_transpose(R: Rot) -> Rot:
    return (R[0], R[3], R[6], R[1], R[4], R[7], R[2], R[5], R[8])


def body_axis(R: Rot) -> Vec3:
    """Thrust axis: third body axis expressed in the inertial frame."""
    return (R[2], R[5], R[8])


def rot_from_axis_angle(axis: Vec3, angle: float) -> Rot:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    C = 1.0 - c
    return (
        c + x * x * C, x * y * C - z * s, x * z * C + y * s,
        y * x * C + z * s, c + y * y * C, y * z * C - x * s,
        z * x * C - y * s, z * y * C + x * s, c + z * z * C,
    )


def rot_exp(w: Vec3) -> Rot:
    """Exponential map of a rotation vector (axis * angle)."""
    theta = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    if theta == 0.0:
        return ROT_IDENTITY
    inv = 1.0 / theta
    return rot_from_axis_angle((w[0] * inv, w[1] * inv, w[2] * inv), theta)


def integrate_attitude(R: Rot, omega_body: Vec3, dt: float) -> Rot:
    """Advance the attitude under constant body-frame angular velocity.

    Exact for constant omega: composes with the exponential of omega*dt and
    re-orthonormalizes, so the unit-thrust-axis invariant survives any number
    of steps.
    """
    if omega_body == ZERO3:
        return R
    step = rot_exp((omega_body[0] * dt, omega_body[1] * dt, omega_body[2] * dt))
    return renormalize(rot_compose(R, step))


def rot_rate(R: Rot, omega_body: Vec3) -> Rot:
    """Attitude kinematics dR/dt = R @ skew(omega_body), as a flat 9-tuple."""
    wx, wy, wz = omega_body
    return (
        R[1] * wz - R[2] * wy, -R[0] * wz + R[2] * wx, R[0] * wy - R[1] * wx,
        R[4] * wz - R[5] * wy, -R[3] * wz + R[5] * wx, R[3] * wy - R[4] * wx,
        R[7] * wz - R[8] * wy, -R[6] * wz + R[8] * wx, R[6] * wy - R[7] * wx,
    )


def renormalize(R: Rot) -> Rot:
    """Project back onto the rotation group via Gram-Schmidt on the columns."""
    c0 = unit((R[0], R[3], R[6]))
    c1 = (R[1], R[4], R[7])
    d = dot(c1, c0)
    c1 = unit((c1[0] - d * c0[0], c1[1] - d * c0[1], c1[2] - d * c0[2]))
    c2 = cross(c0, c1)
    return (c0[0], c1[0], c2[0], c0[1], c1[1], c2[1], c0[2], c1[2], c2[2])


def rot_from_euler_zyx(roll: float, pitch: float, yaw: float) -> Rot:
    """Aerospace Euler angles to rotation: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return (
        cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
        sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
        -sp, cp * sr, cp * cr,
    )


def orthonormality_defect(R) -> tuple[float, float]:
    """(max |R^T R - I| entry, |det(R) - 1|) for invariant checks."""
    rows = ((R[0], R[1], R[2]), (R[3], R[4], R[5]), (R[6], R[7], R[8]))
    defect = 0.0
    for i in range(3):
        for j in range(3):
            g = rows[0][i] * rows[0][j] + rows[1][i] * rows[1][j] + rows[2][i] * rows[2][j]
            defect = max(defect, abs(g - (1.0 if i == j else 0.0)))
    det = (
        R[0] * (R[4] * R[8] - R[5] * R[7])
        - R[1] * (R[3] * R[8] - R[5] * R[6])
        + R[2] * (R[3] * R[7] - R[4] * R[6])
    )
    return defect, abs(det - 1.0)
