"""Adaptive observer: dead-zone gates, design radii, and the coupled ODE right-hand sides.

The observer estimates the state of a linear plant with a matched
uncertainty learned online as a kernel expansion. Two gate modes control
the coefficient update:

* "smooth": the update is multiplied by the C^1 ramp sigma0(||e||, d, eps),
  zero inside radius d, quadratic across the buffer, linear beyond. This is
  the dead-zone law used by the production scenarios.
* "step": the update is multiplied by the 0/1 step mu_step(||e||, E0) with
  E0 the disturbance-derived radius (zero when the measurement error bound
  is zero). This is the idealized law whose Lyapunov function decreases
  strictly outside the ball, and is what the asymptotic-convergence and
  monotonicity fixtures exercise.

The gate argument is the true state-estimation error norm, which only a
simulation can provide; the API takes it as an explicit signal so a
deployment can substitute a measurable surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DesignError, DimensionError, InputDomainError
from .kernels import CenterSet, KernelModel, kernel_values
from .linalg import LureSolution, is_hurwitz, lambda_min, spectral_norm


def sigma0(e_norm: float, d: float, eps: float) -> float:
    """Smooth dead-zone ramp: 0 on [0, d], quadratic blend across the buffer,
    then linear with unit slope.

    The linear branch is e_norm - d - eps/2, the unique continuation that
    keeps the function C^1 at the buffer edge (value eps/2, slope 1 there).
    """
    if eps <= 0:
        raise InputDomainError("buffer width eps must be positive")
    if d < 0 or e_norm < 0:
        raise InputDomainError("e_norm and d must be nonnegative")
    if e_norm <= d:
        return 0.0
    if e_norm <= d + eps:
        return (e_norm - d) ** 2 / (2.0 * eps)
    return e_norm - d - 0.5 * eps


def sigma0_derivative(e_norm: float, d: float, eps: float) -> float:
    """Derivative of sigma0 in its first argument; piecewise 0, ramp, 1."""
    if eps <= 0:
        raise InputDomainError("buffer width eps must be positive")
    if d < 0 or e_norm < 0:
        raise InputDomainError("e_norm and d must be nonnegative")
    if e_norm <= d:
        return 0.0
    if e_norm <= d + eps:
        return (e_norm - d) / eps
    return 1.0


def mu_step(e, E0: float) -> int:
    """0/1 gate: 1 iff e lies outside the open ball of radius E0.

    The boundary ||e|| = E0 counts as outside, so with E0 = 0 the gate is
    always on.
    """
    if E0 < 0:
        raise InputDomainError("E0 must be nonnegative")
    e = np.asarray(e, dtype=float)
    e_norm = float(np.linalg.norm(e)) if e.ndim else float(abs(e))
    return 1 if e_norm >= E0 else 0


@dataclass(frozen=True)
class DeadZone:
    """Dead-zone configuration: width d, buffer eps, and the gate mode."""

    d: float
    eps_buffer: float
    mode: str = "smooth"  # "smooth" | "step"
    step_radius: float = 0.0  # E0 used by the step gate

    def __post_init__(self):
        if self.d < 0:
            raise DesignError("dead-zone width d must be nonnegative")
        if self.eps_buffer <= 0:
            raise DesignError("buffer width eps_buffer must be positive")
        if self.mode not in ("smooth", "step"):
            raise DesignError(f"unknown dead-zone mode {self.mode!r}")
        if self.step_radius < 0:
            raise DesignError("step_radius must be nonnegative")

    def gate(self, e_norm: float) -> float:
        if self.mode == "smooth":
            return sigma0(e_norm, self.d, self.eps_buffer)
        return float(mu_step(e_norm, self.step_radius))


@dataclass(frozen=True)
class ObserverDesign:
    """Validated observer design: plant triple, gain, Lur'e data, kernel machinery.

    A - L C is required to be Hurwitz at construction and Gamma_f symmetric
    positive-definite. Gamma_f is m x m and acts blockwise on stacked
    coefficient vectors (block-diagonal I_N kron Gamma_f); that commutes
    with the diagonal-kernel Grammian, whose blocks are scalar multiples
    of I_m.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    L: np.ndarray
    gamma_f: np.ndarray
    lure: LureSolution
    deadzone: DeadZone
    delta_bar: float
    kernel: KernelModel
    centers: CenterSet

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        L = np.asarray(self.L, dtype=float)
        G = np.asarray(self.gamma_f, dtype=float)
        n = A.shape[0]
        m = C.shape[0]
        if A.shape != (n, n) or B.shape != (n, m) or C.shape != (m, n) or L.shape != (n, m):
            raise DimensionError("observer matrices have inconsistent shapes")
        if m != self.kernel.output_dim:
            raise DimensionError("kernel output_dim must match the measured output dimension")
        ok, worst = is_hurwitz(A - L @ C)
        if not ok:
            raise DesignError(
                f"A - L C is not Hurwitz: eigenvalue {worst:.6g} has nonnegative real part"
            )
        if G.shape != (m, m):
            raise DimensionError(f"gamma_f must be {m} x {m}")
        if np.max(np.abs(G - G.T)) > 1e-10 * max(1.0, np.max(np.abs(G))):
            raise DesignError("gamma_f must be symmetric")
        if np.linalg.eigvalsh(0.5 * (G + G.T))[0] <= 0:
            raise DesignError("gamma_f must be positive-definite")
        if self.delta_bar < 0:
            raise DesignError("delta_bar must be nonnegative")
        for name, val in (("A", A), ("B", B), ("C", C), ("L", L), ("gamma_f", G)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def A_e(self) -> np.ndarray:
        return self.A - self.L @ self.C

    @property
    def coeff_dim(self) -> int:
        return self.centers.coeff_dim

    def gamma_inv(self) -> np.ndarray:
        return np.linalg.inv(self.gamma_f)


@dataclass
class AdaptiveObserverState:
    """Evolving observer state: estimate x_hat and stacked kernel coefficients."""

    x_hat: np.ndarray
    alpha_hat: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x_hat = np.asarray(self.x_hat, dtype=float).reshape(-1)
        self.alpha_hat = np.asarray(self.alpha_hat, dtype=float).reshape(-1)


def compute_E0(design: ObserverDesign) -> float:
    """Disturbance-driven dead-zone radius delta_bar ||L^T P|| / (eps lmin(P) + lmin(W^T W)).

    Spectral norm throughout. Zero measurement-error bound gives E0 = 0,
    the asymptotic-convergence regime.
    """
    P = design.lure.P
    W = design.lure.W
    denom = design.lure.epsilon * lambda_min(P) + lambda_min(W.T @ W)
    if denom <= 0:
        raise DesignError("eps * lambda_min(P) + lambda_min(W^T W) must be positive")
    return float(design.delta_bar * spectral_norm(design.L.T @ P) / denom)


def compute_min_deadzone(design: ObserverDesign, sup_power: float, residual_norm_estimate: float) -> float:
    """Advisory lower bound on the dead-zone width for the finite expansion.

    d_N = 2 ||C||_2 (sup_power * residual_norm_estimate + ||P L||_2 delta_bar)
          / lambda_min(W^T W + eps P)

    `sup_power` should come from sup_power_function over the declared
    operating box; `residual_norm_estimate` stands in for the native-space
    norm of the unrepresented part of the uncertainty, which is not
    computable for a black-box function. The result is advisory: configured
    dead-zones at or below it get a warning, not an error.
    """
    if sup_power < 0 or residual_norm_estimate < 0:
        raise InputDomainError("sup_power and residual_norm_estimate must be nonnegative")
    P = design.lure.P
    W = design.lure.W
    denom = lambda_min(W.T @ W + design.lure.epsilon * P)
    if denom <= 0:
        raise DesignError("lambda_min(W^T W + eps P) must be positive")
    num = 2.0 * spectral_norm(design.C) * (
        sup_power * residual_norm_estimate + spectral_norm(P @ design.L) * design.delta_bar
    )
    return float(num / denom)


def adaptive_law_rhs(design: ObserverDesign, state: AdaptiveObserverState, y, e_norm_signal: float) -> np.ndarray:
    """Gated coefficient update, stacked center-major.

    alpha_dot = gate * (I_N kron Gamma_f) Gram^-1 K_row(y)^T (y - C x_hat)

    For the diagonal kernel this reduces exactly to
    (K_scalar^-1 k(y)) kron (Gamma_f (y - C x_hat)), which is how it is
    evaluated; the Grammian inverse always goes through the stored Cholesky
    factor. Inside the dead zone the result is exactly zero.
    """
    m = design.m
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (m,):
        raise DimensionError(f"y must have shape ({m},)")
    if state.x_hat.shape != (design.n,):
        raise DimensionError(f"x_hat must have shape ({design.n},)")
    if state.alpha_hat.shape != (design.coeff_dim,):
        raise DimensionError(f"alpha_hat must have shape ({design.coeff_dim},)")
    if e_norm_signal < 0:
        raise InputDomainError("e_norm_signal must be nonnegative")

    gate = design.deadzone.gate(e_norm_signal)
    if gate == 0.0:
        return np.zeros(design.coeff_dim)
    z = y - design.C @ state.x_hat
    kvec = kernel_values(design.kernel, design.centers.centers, y)
    weights = design.centers.solve_scalar(kvec)
    return gate * np.outer(weights, design.gamma_f @ z).reshape(-1)


def observer_rhs(design: ObserverDesign, state: AdaptiveObserverState, y, u) -> np.ndarray:
    """State-estimate derivative A x_hat + L (y - C x_hat) + B (u + f_hat(y))."""
    m = design.m
    y = np.asarray(y, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if y.shape != (m,) or u.shape != (m,):
        raise DimensionError(f"y and u must have shape ({m},)")
    if state.x_hat.shape != (design.n,):
        raise DimensionError(f"x_hat must have shape ({design.n},)")
    f_hat = evaluate_coeffs(design, state.alpha_hat, y)
    return design.A @ state.x_hat + design.L @ (y - design.C @ state.x_hat) + design.B @ (u + f_hat)


def evaluate_coeffs(design: ObserverDesign, alpha: np.ndarray, y) -> np.ndarray:
    """Evaluate the kernel expansion with stacked coefficients alpha at y."""
    kvec = kernel_values(design.kernel, design.centers.centers, y)
    a = np.asarray(alpha, dtype=float).reshape(design.centers.n_centers, design.m)
    return a.T @ kvec


def lyapunov_value(design: ObserverDesign, e, alpha_err) -> float:
    """Diagnostic V = e^T P e + alpha_err^T (I_N kron Gamma_f^-1) Gram alpha_err.

    The second term is the Gamma-weighted native-space norm of the
    coefficient error, i.e. the part of the ideal Lyapunov function that is
    representable on the finite center set. It is a diagnostic: for runs
    whose true uncertainty is not in the span, alpha_err is measured against
    a configured reference, not the (nonexistent) true coefficients.
    """
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.shape != (design.n,):
        raise DimensionError(f"e must have shape ({design.n},)")
    a = np.asarray(alpha_err, dtype=float).reshape(-1)
    if a.shape != (design.coeff_dim,):
        raise DimensionError(f"alpha_err must have shape ({design.coeff_dim},)")
    quad_e = float(e @ (design.lure.P @ e))
    ab = a.reshape(design.centers.n_centers, design.m)
    gram_ab = design.centers.scalar_gram @ ab  # (N, m): Gram acting blockwise
    ginv = np.linalg.solve(design.gamma_f, ab.T).T  # Gamma_f^-1 applied to each block
    quad_a = float(np.sum(gram_ab * ginv))
    return quad_e + quad_a
