"""Truth-side plant models: generic linear plants and rigid-body dynamics.

The generic plant is x_dot = A x + B (u + f(y)) + xi(t) with measured output
y = C x + delta(t); the matched uncertainty f is evaluated at the noisy
output, which is also what the observer sees. The rigid-body translational
plant is this with double-integrator matrices. The rotational plant keeps
Euler angles (3-2-1 sequence) as kinematic states driven by the body rates,
with the rate dynamics in the generic matched-uncertainty form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DesignError, DimensionError, KinematicSingularityError

PITCH_GUARD = 1e-3  # |theta| must stay below pi/2 - PITCH_GUARD


@dataclass(frozen=True)
class PlantModel:
    """Linear plant with matched uncertainty, unmatched disturbance, and output noise.

    `f_true` maps the measured output to the matched channel; `xi` and
    `delta` are time signals (vector-valued); `delta_bar` is the declared
    bound on ||delta(t)||, verified after a simulation rather than trusted.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    f_true: Callable[[np.ndarray], np.ndarray]
    xi: Callable[[float], np.ndarray] = None
    delta: Callable[[float], np.ndarray] = None
    delta_bar: float = 0.0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        n = A.shape[0]
        m = C.shape[0]
        if A.shape != (n, n) or B.shape != (n, m) or C.shape != (m, n):
            raise DimensionError("plant matrices have inconsistent shapes")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        if self.xi is None:
            object.__setattr__(self, "xi", lambda t, n=n: np.zeros(n))
        if self.delta is None:
            object.__setattr__(self, "delta", lambda t, m=m: np.zeros(m))
        if self.delta_bar < 0:
            raise DesignError("delta_bar must be nonnegative")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def output(self, x, t: float) -> np.ndarray:
        """Measured output y = C x + delta(t)."""
        return self.C @ np.asarray(x, dtype=float) + self.delta(t)


def plant_rhs(plant: PlantModel, x, u, t: float) -> np.ndarray:
    """A x + B (u + f(C x + delta(t))) + xi(t); f sees the noisy output."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x.shape != (plant.n,):
        raise DimensionError(f"x must have shape ({plant.n},)")
    if u.shape != (plant.m,):
        raise DimensionError(f"u must have shape ({plant.m},)")
    y = plant.output(x, t)
    return plant.A @ x + plant.B @ (u + np.asarray(plant.f_true(y), dtype=float)) + plant.xi(t)


# ---------------------------------------------------------------------------
# rigid-body translational pieces
# ---------------------------------------------------------------------------

def translational_matrices(mass: float):
    """Double integrator: positions integrate velocities, forces scaled by 1/mass.

    Measured output is the velocity: C = [0 I3].
    """
    if mass <= 0:
        raise DesignError("mass must be positive")
    A = np.zeros((6, 6))
    A[0:3, 3:6] = np.eye(3)
    B = np.vstack([np.zeros((3, 3)), np.eye(3) / mass])
    C = np.hstack([np.zeros((3, 3)), np.eye(3)])
    return A, B, C


def translational_reference(t: float):
    """Reference state and its derivative for the tracking controller."""
    x_r = np.array([
        math.sin(t), math.cos(t), math.sin(2 * t),
        math.cos(t), -math.sin(t), 2 * math.cos(2 * t),
    ])
    xdot_r = np.array([
        math.cos(t), -math.sin(t), 2 * math.cos(2 * t),
        -math.sin(t), -math.cos(t), -4 * math.sin(2 * t),
    ])
    return x_r, xdot_r


K_P_TRANSLATIONAL = np.hstack([np.eye(3), np.eye(3)])


def translational_controller(t: float, x, B_pinv) -> np.ndarray:
    """u = -K_P (x - x_r) + B^+ xdot_r with K_P = [I3 I3]."""
    x = np.asarray(x, dtype=float).reshape(6)
    x_r, xdot_r = translational_reference(t)
    return -K_P_TRANSLATIONAL @ (x - x_r) + B_pinv @ xdot_r


def trig_composite_force(y) -> np.ndarray:
    """Velocity-dependent force [cos(v1^2), sin(v2^2) + sin(v1), cos(v3) + sin(v2)]."""
    v = np.asarray(y, dtype=float).reshape(3)
    return np.array([
        math.cos(v[0] ** 2),
        math.sin(v[1] ** 2) + math.sin(v[0]),
        math.cos(v[2]) + math.sin(v[1]),
    ])


# ---------------------------------------------------------------------------
# rigid-body rotational pieces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RigidBodyRotational:
    """Rotational rigid body: SPD inertia, 3-2-1 Euler angles, body rates."""

    inertia: np.ndarray
    eta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape != (3, 3):
            raise DimensionError("inertia must be 3 x 3")
        if np.max(np.abs(inertia - inertia.T)) > 1e-10 * max(1.0, np.max(np.abs(inertia))):
            raise DesignError("inertia must be symmetric")
        if np.linalg.eigvalsh(0.5 * (inertia + inertia.T))[0] <= 0:
            raise DesignError("inertia must be positive-definite")
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float).reshape(3))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float).reshape(3))


def euler_kinematics_matrix(eta) -> np.ndarray:
    """Body-rate to Euler-rate map J(eta) for the 3-2-1 sequence.

    Singular at pitch +/- pi/2; queries within PITCH_GUARD of the
    singularity abort with a state snapshot.
    """
    eta = np.asarray(eta, dtype=float).reshape(3)
    phi, theta = eta[0], eta[1]
    if abs(theta) >= math.pi / 2 - PITCH_GUARD:
        raise KinematicSingularityError(
            f"pitch angle {theta:.6f} rad is within {PITCH_GUARD:g} of the kinematic singularity",
            snapshot=eta.copy(),
        )
    sphi, cphi = math.sin(phi), math.cos(phi)
    tth, cth = math.tan(theta), math.cos(theta)
    return np.array([
        [1.0, sphi * tth, cphi * tth],
        [0.0, cphi, -sphi],
        [0.0, sphi / cth, cphi / cth],
    ])


def cross_matrix(w) -> np.ndarray:
    """Skew matrix such that cross_matrix(w) @ v == np.cross(w, v)."""
    w = np.asarray(w, dtype=float).reshape(3)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def rotational_rhs(body: RigidBodyRotational, eta, omega, u, t: float,
                   f_true=None, xi=None, delta=None):
    """(eta_dot, omega_dot) for the rotational equations of motion.

    eta_dot = J(eta) omega;
    omega_dot = I^-1 (u - omega x (I omega) + f(y)) + xi(t), y = omega + delta(t).

    The gyroscopic torque uses the true rate; the matched uncertainty is
    evaluated at the measured (noisy) rate, mirroring what the observer sees.
    """
    eta = np.asarray(eta, dtype=float).reshape(3)
    omega = np.asarray(omega, dtype=float).reshape(3)
    u = np.asarray(u, dtype=float).reshape(3)
    inertia = body.inertia
    y = omega + (delta(t) if delta is not None else np.zeros(3))
    f_val = np.asarray(f_true(y), dtype=float).reshape(3) if f_true is not None else np.zeros(3)
    eta_dot = euler_kinematics_matrix(eta) @ omega
    torque = u - np.cross(omega, inertia @ omega) + f_val
    omega_dot = np.linalg.solve(inertia, torque)
    if xi is not None:
        omega_dot = omega_dot + np.asarray(xi(t), dtype=float).reshape(3)
    return eta_dot, omega_dot


def rotational_reference(t: float):
    """Reference body rate and its derivative."""
    omega_r = np.array([
        0.1 * math.cos(0.1 * t),
        0.1 * math.sin(0.1 * t),
        0.1 * math.tanh(0.1 * t),
    ])
    sech2 = 1.0 / math.cosh(0.1 * t) ** 2
    omegadot_r = np.array([
        -0.01 * math.sin(0.1 * t),
        0.01 * math.cos(0.1 * t),
        0.01 * sech2,
    ])
    return omega_r, omegadot_r


K_P_ROTATIONAL = 10.0


def rotational_controller(t: float, omega) -> np.ndarray:
    """u = -10 (omega - omega_r) + omegadot_r, exactly as the excitation law is stated."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    omega_r, omegadot_r = rotational_reference(t)
    return -K_P_ROTATIONAL * (omega - omega_r) + omegadot_r


def quadratic_drag(coeff: float):
    """f(y) = -coeff * ||y|| y, the rate-dependent drag torque."""
    def f(y):
        y = np.asarray(y, dtype=float).reshape(-1)
        return -coeff * np.linalg.norm(y) * y
    return f


def wrap_angles(eta) -> np.ndarray:
    """Wrap roll/yaw to [0, 2 pi) for reporting; integration carries unwrapped angles."""
    eta = np.asarray(eta, dtype=float).reshape(3).copy()
    eta[0] %= 2 * math.pi
    eta[2] %= 2 * math.pi
    return eta
