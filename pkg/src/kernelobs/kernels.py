"""Scalar Mercer kernels, diagonal operator-valued kernels, and center sets.

A scalar radial kernel k(y1, y2) = sigma(||y1 - y2||) induces the diagonal
operator-valued kernel K(y1, y2) = k(y1, y2) * I_m on R^m. Finite expansions
over a set of N centers are represented by stacked coefficient vectors in
R^(m*N), ordered center-major: alpha = [alpha_1; ...; alpha_N] with each
alpha_j in R^m. The block Grammian of a diagonal kernel is the Kronecker
product K_scalar (x) I_m, which lets every linear solve against it reduce to
the N x N scalar Grammian; both the full and the scalar factorizations are
kept so callers can use whichever form they need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import kv

from .errors import DesignError, DimensionError, IllConditionedCentersError, InputDomainError

JITTER_INITIAL = 1e-10
JITTER_MAX = 1e-6


@dataclass(frozen=True)
class SobolevMatern:
    """Sobolev-Matern radial profile with smoothness nu = k - dim/2.

    Normalized so sigma(0) = 1:

        sigma(r) = 2^(1-nu) / Gamma(nu) * (r/l)^nu * K_nu(r/l)

    where K_nu is the modified Bessel function of the second kind. For
    half-integer nu the usual closed forms (exp times polynomial) are used.
    Requires k > dim/2 so the kernel is continuous.
    """

    k: int
    dim: int
    length_scale: float = 1.0

    def __post_init__(self):
        if self.k <= 0 or self.dim <= 0:
            raise InputDomainError("SobolevMatern order k and dimension must be positive")
        if self.k <= self.dim / 2:
            raise InputDomainError(
                f"SobolevMatern requires k > dim/2 for a continuous kernel; got k={self.k}, dim={self.dim}"
            )
        if not (self.length_scale > 0 and math.isfinite(self.length_scale)):
            raise InputDomainError("length_scale must be positive and finite")

    @property
    def nu(self) -> float:
        return self.k - self.dim / 2

    def profile(self, r):
        """Evaluate sigma at nonnegative radii (scalar or array)."""
        s = np.asarray(r, dtype=float) / self.length_scale
        nu = self.nu
        if nu == 0.5:
            out = np.exp(-s)
        elif nu == 1.5:
            out = (1.0 + s) * np.exp(-s)
        elif nu == 2.5:
            out = (1.0 + s + s * s / 3.0) * np.exp(-s)
        elif nu == 3.5:
            out = (1.0 + s + 2.0 * s * s / 5.0 + s**3 / 15.0) * np.exp(-s)
        else:
            # generic Bessel evaluation; the s -> 0 limit of the normalized
            # profile is exactly 1
            with np.errstate(invalid="ignore"):
                out = np.where(
                    s > 0,
                    2.0 ** (1.0 - nu) / gamma_fn(nu) * s**nu * kv(nu, np.where(s > 0, s, 1.0)),
                    1.0,
                )
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian radial profile sigma(r) = exp(-r^2 / (2 l^2))."""

    length_scale: float = 1.0

    def __post_init__(self):
        if not (self.length_scale > 0 and math.isfinite(self.length_scale)):
            raise InputDomainError("length_scale must be positive and finite")

    def profile(self, r):
        s = np.asarray(r, dtype=float) / self.length_scale
        out = np.exp(-0.5 * s * s)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelModel:
    """A radial scalar kernel family together with the output dimension m.

    The operator-valued kernel is K(y1, y2) = sigma(||y1 - y2||) * I_m.
    """

    family: SobolevMatern | Gaussian
    output_dim: int

    def __post_init__(self):
        if self.output_dim < 1:
            raise InputDomainError("output_dim must be a positive integer")


def _check_point(y, m, name="y"):
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (m,):
        raise DimensionError(f"{name} must have shape ({m},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputDomainError(f"{name} contains non-finite entries")
    return y


def kernel_scalar(model: KernelModel, y1, y2) -> float:
    """Scalar kernel value sigma(||y1 - y2||); symmetric and maximal at y1 = y2."""
    m = model.output_dim
    y1 = _check_point(y1, m, "y1")
    y2 = _check_point(y2, m, "y2")
    return float(model.family.profile(np.linalg.norm(y1 - y2)))


def kernel_values(model: KernelModel, points, y) -> np.ndarray:
    """Vector of scalar kernel values [sigma(||y - p_i||)]_i for an (N, m) point array."""
    pts = np.asarray(points, dtype=float)
    y = _check_point(y, model.output_dim)
    return np.asarray(model.family.profile(np.linalg.norm(pts - y[None, :], axis=1)))


@dataclass(frozen=True)
class CenterSet:
    """Ordered kernel centers with their factorized block Grammian.

    The full Grammian is (m*N) x (m*N) with block (i, j) equal to
    sigma(||xi_i - xi_j||) * I_m; `grammian_factor` is its lower Cholesky
    factor. `jitter` records any diagonal regularization that was needed.
    The scalar N x N Grammian and its factor are kept for fast solves.
    """

    model: KernelModel
    centers: np.ndarray
    grammian: np.ndarray
    grammian_factor: np.ndarray
    jitter: float
    scalar_gram: np.ndarray = field(repr=False, default=None)
    scalar_factor: np.ndarray = field(repr=False, default=None)

    @property
    def n_centers(self) -> int:
        return self.centers.shape[0]

    @property
    def coeff_dim(self) -> int:
        return self.centers.shape[0] * self.model.output_dim

    @classmethod
    def empty(cls, model: KernelModel) -> "CenterSet":
        z = np.zeros((0, 0))
        return cls(model, np.zeros((0, model.output_dim)), z, z, 0.0, z, z)

    def solve_scalar(self, rhs: np.ndarray) -> np.ndarray:
        """Solve K_scalar x = rhs through the stored Cholesky factor."""
        from scipy.linalg import cho_solve

        return cho_solve((self.scalar_factor, True), rhs, check_finite=False)

    def condition_estimate(self) -> float:
        """lambda_max / lambda_min of the (jittered) scalar Grammian."""
        w = np.linalg.eigvalsh(self.scalar_gram)
        return float(w[-1] / w[0])


def assemble_grammian(model: KernelModel, centers) -> CenterSet:
    """Build a CenterSet with an SPD-factorized Grammian.

    Centers must be pairwise distinct. If the Cholesky factorization fails,
    diagonal jitter starting at 1e-10 and escalating tenfold up to 1e-6 is
    added and recorded; failure past that raises IllConditionedCentersError
    with the smallest-eigenvalue estimate.
    """
    pts = np.asarray(centers, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    m = model.output_dim
    if pts.ndim != 2 or pts.shape[1] != m:
        raise DimensionError(f"centers must be (N, {m}), got {pts.shape}")
    n = pts.shape[0]
    if n < 1:
        raise DesignError("at least one center is required")
    if not np.all(np.isfinite(pts)):
        raise InputDomainError("centers contain non-finite entries")

    dists = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    off_diag = dists + np.diag(np.full(n, np.inf))
    if np.min(off_diag) == 0.0:
        i, j = np.unravel_index(np.argmin(off_diag), off_diag.shape)
        raise DesignError(f"duplicate centers at indices {i} and {j}")

    gram_s = np.asarray(model.family.profile(dists))
    gram_s = 0.5 * (gram_s + gram_s.T)  # symmetric by construction; enforce exactly

    jitter = 0.0
    trial = JITTER_INITIAL
    while True:
        try:
            factor_s = np.linalg.cholesky(gram_s + jitter * np.eye(n))
            break
        except np.linalg.LinAlgError:
            if jitter >= JITTER_MAX:
                lam = float(np.linalg.eigvalsh(gram_s)[0])
                raise IllConditionedCentersError(
                    f"Grammian not positive-definite after jitter {jitter:g}; "
                    f"smallest eigenvalue ~ {lam:.3e}",
                    smallest_eigenvalue=lam,
                ) from None
            jitter = trial
            trial *= 10.0

    gram_jittered = gram_s + jitter * np.eye(n)
    full = np.kron(gram_jittered, np.eye(m))
    full_factor = np.kron(factor_s, np.eye(m))
    return CenterSet(model, pts, full, full_factor, jitter, gram_jittered, factor_s)


def kernel_matrix(model: KernelModel, centers, y) -> np.ndarray:
    """The m x (m*N) row of kernel blocks [K(y, xi_1), ..., K(y, xi_N)].

    Block j is sigma(||y - xi_j||) * I_m; blocks are laid out center-major so
    that multiplying by a stacked coefficient vector respects the alpha
    ordering documented in the module docstring.
    """
    pts = centers.centers if isinstance(centers, CenterSet) else np.asarray(centers, dtype=float)
    if pts.shape[0] == 0:
        raise DesignError("kernel_matrix requires a non-empty center set")
    vals = kernel_values(model, pts, y)
    m = model.output_dim
    return np.kron(vals[None, :], np.eye(m))


@dataclass(frozen=True)
class RkhsElement:
    """A finite kernel expansion sum_j K(xi_j, .) alpha_j.

    `coeffs` is the stacked center-major coefficient vector in R^(m*N).
    """

    center_set: CenterSet
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if c.shape != (self.center_set.coeff_dim,):
            raise DimensionError(
                f"coeffs must have length {self.center_set.coeff_dim}, got {c.shape[0]}"
            )
        object.__setattr__(self, "coeffs", c)

    def evaluate(self, y) -> np.ndarray:
        return evaluate_element(self, y)

    def native_norm_sq(self) -> float:
        """alpha^T K alpha, the squared native-space norm of the expansion."""
        cs = self.center_set
        a = self.coeffs.reshape(cs.n_centers, cs.model.output_dim)
        return float(np.sum((cs.scalar_gram @ a) * a))


def evaluate_element(element: RkhsElement, y) -> np.ndarray:
    """Evaluate the expansion at y: returns K_row(y) @ alpha in R^m."""
    cs = element.center_set
    m = cs.model.output_dim
    vals = kernel_values(cs.model, cs.centers, y)
    a = element.coeffs.reshape(cs.n_centers, m)
    return a.T @ vals


def power_function(model: KernelModel, centers: CenterSet, y) -> float:
    """Pointwise worst-case interpolation error of the center set at y.

    Computes max_i sqrt(|K_ii(y,y) - K_N,ii(y,y)|) with
    K_N(y,y) = K_row(y) Gram^-1 K_row(y)^T evaluated through the stored
    Cholesky factor. For a diagonal kernel all m diagonal entries agree;
    this is asserted and the common value returned. An empty center set
    gives sqrt(sigma(0)) (no projection at all).
    """
    m = model.output_dim
    y = _check_point(y, m)
    diag_val = float(model.family.profile(0.0))
    if centers.n_centers == 0:
        return math.sqrt(diag_val)
    kmat = kernel_matrix(model, centers, y)  # m x mN
    s = np.linalg.solve(centers.grammian_factor, kmat.T)  # mN x m
    diag_kn = np.sum(s * s, axis=0)  # m diagonal entries of K_N(y, y)
    vals = np.abs(diag_val - diag_kn)
    if np.ptp(vals) > 1e-12 * max(1.0, diag_val):
        raise AssertionError("diagonal kernel gave inconsistent power-function entries")
    return float(np.sqrt(np.max(vals)))


def _power_squared_batch(model: KernelModel, centers: CenterSet, points: np.ndarray) -> np.ndarray:
    """sigma(0) - k(y)^T K_s^-1 k(y) for a batch of points, scalar path."""
    diag_val = float(model.family.profile(0.0))
    if centers.n_centers == 0:
        return np.full(points.shape[0], diag_val)
    d = np.linalg.norm(points[:, None, :] - centers.centers[None, :, :], axis=2)
    kv_ = np.asarray(model.family.profile(d))  # (G, N)
    sol = np.linalg.solve(centers.scalar_factor, kv_.T)  # (N, G)
    return diag_val - np.sum(sol * sol, axis=0)


def tensor_grid(bounds, points_per_axis: int) -> np.ndarray:
    """Axis-aligned tensor grid over a box given as [(lo, hi), ...]."""
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def sup_power_function(model: KernelModel, centers: CenterSet, probe_domain, grid_points_per_axis: int) -> float:
    """Max of the power function over a tensor grid on the probe box.

    This is a lower bound of the true supremum; resolution is whatever the
    caller chose via grid_points_per_axis (>= 2 per axis required unless the
    box is collapsed to a point).
    """
    bounds = [(float(lo), float(hi)) for lo, hi in probe_domain]
    if len(bounds) != model.output_dim:
        raise DimensionError("probe_domain must provide one (lo, hi) pair per output dimension")
    for lo, hi in bounds:
        if hi < lo:
            raise InputDomainError("probe_domain has hi < lo")
    degenerate = all(hi == lo for lo, hi in bounds)
    if grid_points_per_axis < 2 and not degenerate:
        raise InputDomainError("grid_points_per_axis must be >= 2")
    pts = tensor_grid(bounds, 1 if degenerate else grid_points_per_axis)
    p2 = _power_squared_batch(model, centers, pts)
    return float(np.sqrt(np.max(np.abs(p2))))


@dataclass(frozen=True)
class ProjectionResult:
    """Least-squares fit of a target map into the span of kernel sections."""

    element: RkhsElement
    max_residual: float
    rms_residual: float
    jitter: float


def project_into_span(model: KernelModel, centers: CenterSet, target, sample_grid) -> ProjectionResult:
    """Fit `target` (callable R^m -> R^m) on the grid in the span of the centers.

    This is a computable surrogate for the orthogonal projection onto the
    finite-dimensional space: regularized pointwise least squares on the
    sample grid. The residual report carries the max pointwise (vector-norm)
    error, which downstream dead-zone sizing treats as an estimate only.
    """
    grid = np.asarray(sample_grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if grid.shape[0] == 0:
        raise InputDomainError("sample_grid must be non-empty")
    m = model.output_dim
    if grid.shape[1] != m:
        raise DimensionError(f"sample_grid must be (G, {m})")

    d = np.linalg.norm(grid[:, None, :] - centers.centers[None, :, :], axis=2)
    phi = np.asarray(model.family.profile(d))  # (G, N)
    f_vals = np.array([np.asarray(target(y), dtype=float).reshape(m) for y in grid])  # (G, m)

    gram = phi.T @ phi
    rhs = phi.T @ f_vals
    n = gram.shape[0]
    jitter = 0.0
    trial = JITTER_INITIAL
    while True:
        try:
            fac = np.linalg.cholesky(gram + jitter * np.eye(n))
            break
        except np.linalg.LinAlgError:
            if jitter >= JITTER_MAX:
                lam = float(np.linalg.eigvalsh(gram)[0])
                raise IllConditionedCentersError(
                    f"normal equations not positive-definite after jitter {jitter:g}; "
                    f"smallest eigenvalue ~ {lam:.3e}",
                    smallest_eigenvalue=lam,
                ) from None
            jitter = trial
            trial *= 10.0
    a = np.linalg.solve(fac.T, np.linalg.solve(fac, rhs))  # (N, m)

    resid = phi @ a - f_vals
    resid_norms = np.linalg.norm(resid, axis=1)
    element = RkhsElement(centers, a.reshape(-1))
    return ProjectionResult(
        element=element,
        max_residual=float(np.max(resid_norms)),
        rms_residual=float(np.sqrt(np.mean(resid_norms**2))),
        jitter=jitter,
    )


def lattice_centers(bounds, points_per_axis) -> np.ndarray:
    """Regular lattice of centers over a box; points_per_axis may be per-axis."""
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if isinstance(points_per_axis, int):
        points_per_axis = [points_per_axis] * len(bounds)
    if len(points_per_axis) != len(bounds):
        raise DimensionError("points_per_axis must match the number of axes")
    axes = []
    for (lo, hi), p in zip(bounds, points_per_axis):
        if p < 1:
            raise InputDomainError("points_per_axis entries must be >= 1")
        axes.append(np.linspace(lo, hi, p) if p > 1 else np.array([(lo + hi) / 2.0]))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)
