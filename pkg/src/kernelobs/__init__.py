"""Kernel-based adaptive state observation with dead-zone robust adaptation."""

from .errors import (
    ConfigError,
    DesignError,
    DimensionError,
    DivergenceError,
    IllConditionedCentersError,
    InputDomainError,
    KernelObsError,
    KinematicSingularityError,
)
from .kernels import (
    CenterSet,
    Gaussian,
    KernelModel,
    RkhsElement,
    SobolevMatern,
    assemble_grammian,
    evaluate_element,
    kernel_matrix,
    kernel_scalar,
    lattice_centers,
    power_function,
    project_into_span,
    sup_power_function,
)
from .linalg import LureSolution, design_lure, lambda_min, pseudo_inverse, solve_lyapunov, spectral_norm
from .observer import (
    AdaptiveObserverState,
    DeadZone,
    ObserverDesign,
    adaptive_law_rhs,
    compute_E0,
    compute_min_deadzone,
    lyapunov_value,
    mu_step,
    observer_rhs,
    sigma0,
    sigma0_derivative,
)
from .scenario import Scenario, build_scenario, load_config, validate_config
from .sim import RunSummary, SimConfig, SimResult, integrate

__version__ = "0.1.0"
