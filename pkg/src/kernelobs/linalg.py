"""Dense linear-algebra services for the observer design stage.

Everything here targets small systems (n <= 12), so the continuous-time
Lyapunov equation is solved by Kronecker vectorization rather than a
Schur-based method; the O(n^6) cost is irrelevant at these sizes and the
code stays transparent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DesignError, DimensionError, InputDomainError

LYAPUNOV_RESIDUAL_RTOL = 1e-8
PB_CT_DEFAULT_TOL = 1e-6


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise InputDomainError(f"{name} contains non-finite entries")
    return M


def spectral_norm(M) -> float:
    """Largest singular value."""
    M = _as_matrix(M)
    return float(np.linalg.norm(M, 2))


def pseudo_inverse(B) -> np.ndarray:
    """Moore-Penrose pseudo-inverse (SVD-based)."""
    return np.linalg.pinv(_as_matrix(B, "B"))


def lambda_min(M) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    The input is symmetrized as (M + M^T)/2; asymmetry beyond 1e-10
    (relative to the max entry) is rejected as a usage error.
    """
    M = _as_matrix(M, "M")
    n, p = M.shape
    if n != p:
        raise DimensionError("lambda_min requires a square matrix")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > 1e-10 * scale:
        raise InputDomainError("matrix is not symmetric to 1e-10")
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def is_hurwitz(A) -> tuple[bool, complex]:
    """Check all eigenvalues have negative real part; returns (ok, worst eig)."""
    eigs = np.linalg.eigvals(_as_matrix(A, "A"))
    worst = eigs[np.argmax(eigs.real)]
    return bool(worst.real < 0.0), complex(worst)


def solve_lyapunov(A, Q) -> np.ndarray:
    """Solve A^T P + P A = -Q for symmetric P via Kronecker vectorization.

    A must be Hurwitz; Q symmetric (positive semi-definiteness is the
    caller's concern). The returned P is explicitly symmetrized and its
    residual is verified against LYAPUNOV_RESIDUAL_RTOL * ||P||_max.
    """
    A = _as_matrix(A, "A")
    Q = _as_matrix(Q, "Q")
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise DimensionError("A and Q must be square with matching sizes")
    ok, worst = is_hurwitz(A)
    if not ok:
        raise DesignError(f"A is not Hurwitz: eigenvalue {worst:.6g} has nonnegative real part")

    eye = np.eye(n)
    # vec (column-major) of A^T P + P A = (I (x) A^T + A^T (x) I) vec(P)
    op = np.kron(eye, A.T) + np.kron(A.T, eye)
    p_vec = np.linalg.solve(op, -Q.reshape(-1, order="F"))
    P = p_vec.reshape(n, n, order="F")
    P = 0.5 * (P + P.T)

    resid = np.max(np.abs(A.T @ P + P @ A + Q))
    if resid > LYAPUNOV_RESIDUAL_RTOL * max(1.0, np.max(np.abs(P))):
        raise DesignError(f"Lyapunov solve residual {resid:.3e} exceeds tolerance")
    return P


@dataclass(frozen=True)
class LureSolution:
    """Outcome of the Lur'e design equations for an error matrix A_e.

    P solves (A_e + eps/2 I)^T P + P (A_e + eps/2 I) = -W^T W, equivalently
    A_e^T P + P A_e = -W^T W - eps P. `pb_ct_residual` reports how far
    P B - C^T is from zero; `certified` is True when that residual is within
    tolerance, i.e. the triple behaves as strictly positive real and the
    dead-zone guarantees apply. Non-certified designs are usable but their
    dead-zone radii are advisory only.
    """

    P: np.ndarray
    W: np.ndarray
    epsilon: float
    lyapunov_residual: float
    pb_ct_residual: float
    certified: bool
    guidance: str = ""

    @property
    def lambda_min_P(self) -> float:
        return float(np.linalg.eigvalsh(self.P)[0])


def design_lure(A_e, B, C, epsilon: float, W, pb_tol: float = PB_CT_DEFAULT_TOL) -> LureSolution:
    """Solve the shifted Lyapunov equation and check the SPR coupling P B = C^T.

    A_e must be Hurwitz and epsilon small enough that A_e + (eps/2) I stays
    Hurwitz. W^T W may be singular; P must still come out positive-definite
    (the eps shift usually ensures this), otherwise a DesignError is raised.
    The P B = C^T condition is checked, never enforced: designs failing it
    are returned flagged with guidance instead of rejected.
    """
    A_e = _as_matrix(A_e, "A_e")
    B = _as_matrix(B, "B")
    C = _as_matrix(C, "C")
    W = _as_matrix(W, "W")
    n = A_e.shape[0]
    if A_e.shape != (n, n):
        raise DimensionError("A_e must be square")
    if B.shape[0] != n or C.shape[1] != n or W.shape[1] != n:
        raise DimensionError("B, C, W dimensions inconsistent with A_e")
    if not (epsilon > 0):
        raise DesignError("epsilon must be positive")

    ok, worst = is_hurwitz(A_e)
    if not ok:
        raise DesignError(f"A_e is not Hurwitz: eigenvalue {worst:.6g} has nonnegative real part")
    shifted = A_e + 0.5 * epsilon * np.eye(n)
    ok, worst = is_hurwitz(shifted)
    if not ok:
        raise DesignError(
            f"A_e + (epsilon/2) I is not Hurwitz (eigenvalue {worst:.6g}); reduce epsilon"
        )

    P = solve_lyapunov(shifted, W.T @ W)
    lam = float(np.linalg.eigvalsh(P)[0])
    if lam <= 0.0:
        raise DesignError(f"Lur'e P is not positive-definite (lambda_min = {lam:.3e}); "
                          "W^T W is too degenerate for this A_e")

    # residuals recomputed from the returned matrices, not trusted from the solver
    lyap_resid = float(np.max(np.abs(A_e.T @ P + P @ A_e + W.T @ W + epsilon * P)))
    pb_resid = float(np.max(np.abs(P @ B - C.T)))
    certified = pb_resid <= pb_tol
    guidance = "" if certified else (
        f"P B - C^T deviates by {pb_resid:.3e} (> {pb_tol:g}); the triple is not "
        "strictly positive real as designed. Dead-zone radii remain advisory; "
        "adjust L, W, or the output map to restore P B = C^T."
    )
    return LureSolution(
        P=P,
        W=W.copy(),
        epsilon=float(epsilon),
        lyapunov_residual=lyap_resid,
        pb_ct_residual=pb_resid,
        certified=certified,
        guidance=guidance,
    )
