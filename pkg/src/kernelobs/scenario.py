"""Scenario files: schema validation, defaults, and construction of runnable scenarios.

A scenario file is a TOML document with sections [plant], [kernel],
[centers], [observer], [deadzone], [sim], [output]. Validation is strict:
unknown keys anywhere are errors, so typos cannot silently fall back to
defaults. `load_config` + `build_scenario` turn a file into a `Scenario`
holding the truth-side dynamics, the validated observer design, initial
conditions, and the bookkeeping the simulator and reports need.

Plant families
--------------
rigid_translational
    Six-state truth [position; velocity] with double-integrator matrices and
    measured velocity. The observer design lives on the measured velocity
    subsystem (A = 0, B = I/mass, C = I), which is the triple that can
    satisfy the positive-real coupling P B = C^T; the position estimate is
    the auxiliary integral of the velocity estimate. Position is not
    observable from velocity, so the recorded e_norm (and the dead-zone gate
    signal) is the velocity-estimation error; the position columns still
    carry the full estimate for reporting.
rigid_rotational
    Truth carries body rates and 3-2-1 Euler angles; the measured rate
    subsystem (A = 0, B = inertia^-1, C = I) is the observer design, and the
    estimated angles are the auxiliary integral of the estimated-rate
    kinematics. e_norm is the rate error; angle columns are appended to the
    records.
generic_linear
    Truth and observer share the configured (A, B, C); e_norm is the full
    state error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import (
    PlantModel,
    RigidBodyRotational,
    euler_kinematics_matrix,
    quadratic_drag,
    rotational_controller,
    rotational_reference,
    translational_controller,
    translational_matrices,
    translational_reference,
    trig_composite_force,
)
from .errors import ConfigError, DesignError, DimensionError
from .kernels import (
    CenterSet,
    Gaussian,
    KernelModel,
    RkhsElement,
    SobolevMatern,
    assemble_grammian,
    lattice_centers,
    sup_power_function,
)
from .linalg import design_lure, pseudo_inverse
from .observer import DeadZone, ObserverDesign, compute_E0, compute_min_deadzone
from .signals import ZERO_SIGNAL, signal_from_terms

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml


# ---------------------------------------------------------------------------
# raw config loading and strict validation
# ---------------------------------------------------------------------------

_TERM_KEYS = {"shape", "amplitude", "frequency", "phase"}

_SCHEMA = {
    "name": None,
    "plant": {
        "family", "mass", "inertia_diag", "inertia", "A", "B", "C",
        "uncertainty", "measurement_noise", "unmatched", "control",
    },
    "kernel": {"family", "k", "dimension", "length_scale"},
    "centers": {"kind", "bounds", "points_per_axis", "points"},
    "observer": {
        "l_gain", "L", "w_mode", "w_value", "W", "epsilon",
        "gamma", "gamma_matrix", "alpha0", "alpha_ref", "pb_tolerance",
    },
    "deadzone": {
        "width", "buffer", "mode", "residual_norm_estimate",
        "sup_power_grid", "domain_box",
    },
    "sim": {"t0", "t_final", "h", "record_stride", "x0", "x_hat0", "eta0", "eta_hat0"},
    "output": {"timeseries"},
}

_SUBTABLE_KEYS = {
    ("plant", "uncertainty"): {"type", "coeff", "coeffs"},
    ("plant", "measurement_noise"): {"terms", "components", "bound", "scale"},
    ("plant", "unmatched"): {"components"},
    ("plant", "control"): {"type", "components"},
}


def load_config(path) -> dict:
    """Read a TOML scenario file into a plain dict (no validation yet)."""
    with open(path, "rb") as fh:
        try:
            return _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: not valid TOML: {exc}") from None


def apply_override(cfg: dict, dotted_key: str, value_text: str) -> None:
    """Apply a `section.key=value` override in place; value parsed as TOML."""
    parts = dotted_key.split(".")
    if not all(parts):
        raise ConfigError(f"bad override key {dotted_key!r}")
    try:
        value = _toml.loads(f"v = {value_text}")["v"]
    except _toml.TOMLDecodeError:
        value = value_text  # bare string
    node = cfg
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"override path {dotted_key!r} crosses a non-table value")
        node = nxt
    node[parts[-1]] = value


def _reject_unknown(table: dict, allowed, path: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in [{path}]")


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"missing required key {key!r} in [{path}]")
    return table[key]


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer")
    return value


def _as_matrix_rows(value, path: str) -> np.ndarray:
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a list of row lists of numbers") from None
    if M.ndim != 2:
        raise ConfigError(f"{path} must be a list of row lists of numbers")
    return M


def _as_vector(value, path: str) -> np.ndarray:
    try:
        v = np.array(value, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a list of numbers") from None
    return v


def validate_config(cfg: dict) -> dict:
    """Strict-schema validation; returns the fully-resolved effective config.

    Defaults are filled in, so the returned dict can be serialized and
    re-run to reproduce the same scenario byte for byte.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("configuration root must be a table")
    _reject_unknown(cfg, set(_SCHEMA), "<root>")
    for section in ("plant", "kernel", "centers", "observer", "deadzone", "sim"):
        if section not in cfg:
            raise ConfigError(f"missing required section [{section}]")
        if not isinstance(cfg[section], dict):
            raise ConfigError(f"[{section}] must be a table")
        _reject_unknown(cfg[section], _SCHEMA[section], section)
    if "output" in cfg:
        if not isinstance(cfg["output"], dict):
            raise ConfigError("[output] must be a table")
        _reject_unknown(cfg["output"], _SCHEMA["output"], "output")
    for (sec, sub), allowed in _SUBTABLE_KEYS.items():
        tbl = cfg.get(sec, {}).get(sub)
        if tbl is not None:
            if not isinstance(tbl, dict):
                raise ConfigError(f"[{sec}.{sub}] must be a table")
            _reject_unknown(tbl, allowed, f"{sec}.{sub}")

    eff = {"name": str(cfg.get("name", "scenario"))}

    # ---- plant ----
    plant = cfg["plant"]
    family = _require(plant, "family", "plant")
    if family not in ("rigid_translational", "rigid_rotational", "generic_linear"):
        raise ConfigError(f"plant.family must be one of rigid_translational, "
                          f"rigid_rotational, generic_linear; got {family!r}")
    p_eff = {"family": family}
    if family == "rigid_translational":
        p_eff["mass"] = _as_float(_require(plant, "mass", "plant"), "plant.mass")
        if p_eff["mass"] <= 0:
            raise ConfigError("plant.mass must be positive")
    elif family == "rigid_rotational":
        if "inertia" in plant:
            p_eff["inertia"] = _as_matrix_rows(plant["inertia"], "plant.inertia").tolist()
        elif "inertia_diag" in plant:
            diag = _as_vector(plant["inertia_diag"], "plant.inertia_diag")
            if diag.shape != (3,):
                raise ConfigError("plant.inertia_diag must have 3 entries")
            p_eff["inertia_diag"] = diag.tolist()
        else:
            raise ConfigError("rotational plant needs inertia or inertia_diag")
    else:
        for key in ("A", "B", "C"):
            p_eff[key] = _as_matrix_rows(_require(plant, key, "plant"), f"plant.{key}").tolist()

    unc = plant.get("uncertainty", {"type": "zero"})
    utype = _require(unc, "type", "plant.uncertainty")
    if utype not in ("zero", "trig_composite", "quadratic_drag", "rkhs_element"):
        raise ConfigError(f"unknown plant.uncertainty.type {utype!r}")
    u_eff = {"type": utype}
    if utype == "quadratic_drag":
        u_eff["coeff"] = _as_float(_require(unc, "coeff", "plant.uncertainty"),
                                   "plant.uncertainty.coeff")
    if utype == "rkhs_element":
        u_eff["coeffs"] = _as_vector(_require(unc, "coeffs", "plant.uncertainty"),
                                     "plant.uncertainty.coeffs").tolist()
    p_eff["uncertainty"] = u_eff

    noise = plant.get("measurement_noise")
    if noise is None:
        n_eff = {"terms": [], "bound": 0.0, "scale": 1.0}
    else:
        n_eff = {"scale": _as_float(noise.get("scale", 1.0), "plant.measurement_noise.scale")}
        if "components" in noise:
            if "terms" in noise:
                raise ConfigError("measurement_noise: give terms or components, not both")
            comps = noise["components"]
            if not isinstance(comps, list) or not comps:
                raise ConfigError("measurement_noise.components must be a non-empty list")
            n_eff["components"] = [_norm_terms(c, "plant.measurement_noise.components")
                                   for c in comps]
        else:
            n_eff["terms"] = _norm_terms(noise.get("terms", []), "plant.measurement_noise.terms")
        n_eff["bound"] = _as_float(_require(noise, "bound", "plant.measurement_noise"),
                                   "plant.measurement_noise.bound")
        if n_eff["bound"] < 0:
            raise ConfigError("measurement_noise.bound must be nonnegative")
    p_eff["measurement_noise"] = n_eff

    unmatched = plant.get("unmatched")
    if unmatched is None:
        p_eff["unmatched"] = {"components": []}
    else:
        comps = _require(unmatched, "components", "plant.unmatched")
        if not isinstance(comps, list):
            raise ConfigError("plant.unmatched.components must be a list of term lists")
        p_eff["unmatched"] = {
            "components": [_norm_terms(c, "plant.unmatched.components") for c in comps]
        }

    control = plant.get("control")
    default_control = {
        "rigid_translational": "translational_tracking",
        "rigid_rotational": "rotational_tracking",
        "generic_linear": "signal",
    }[family]
    if control is None:
        c_eff = {"type": default_control}
        if default_control == "signal":
            c_eff["components"] = []
    else:
        ctype = _require(control, "type", "plant.control")
        if ctype not in ("translational_tracking", "rotational_tracking", "signal"):
            raise ConfigError(f"unknown plant.control.type {ctype!r}")
        c_eff = {"type": ctype}
        if ctype == "signal":
            comps = control.get("components", [])
            if not isinstance(comps, list):
                raise ConfigError("plant.control.components must be a list of term lists")
            c_eff["components"] = [_norm_terms(c, "plant.control.components") for c in comps]
    p_eff["control"] = c_eff
    eff["plant"] = p_eff

    # ---- kernel ----
    kern = cfg["kernel"]
    kfam = _require(kern, "family", "kernel")
    if kfam not in ("sobolev_matern", "gaussian"):
        raise ConfigError(f"kernel.family must be sobolev_matern or gaussian, got {kfam!r}")
    k_eff = {"family": kfam,
             "length_scale": _as_float(kern.get("length_scale", 1.0), "kernel.length_scale")}
    if kfam == "sobolev_matern":
        k_eff["k"] = _as_int(_require(kern, "k", "kernel"), "kernel.k")
        k_eff["dimension"] = _as_int(_require(kern, "dimension", "kernel"), "kernel.dimension")
    eff["kernel"] = k_eff

    # ---- centers ----
    cent = cfg["centers"]
    kind = cent.get("kind", "lattice")
    if kind not in ("lattice", "explicit"):
        raise ConfigError(f"centers.kind must be lattice or explicit, got {kind!r}")
    if kind == "lattice":
        bounds = _require(cent, "bounds", "centers")
        bmat = _as_matrix_rows(bounds, "centers.bounds")
        if bmat.shape[1] != 2:
            raise ConfigError("centers.bounds must be a list of [lo, hi] pairs")
        ppa = _require(cent, "points_per_axis", "centers")
        if isinstance(ppa, int) and not isinstance(ppa, bool):
            ppa_eff = ppa
        else:
            ppa_eff = [_as_int(p, "centers.points_per_axis") for p in ppa]
        ct_eff = {"kind": "lattice", "bounds": bmat.tolist(), "points_per_axis": ppa_eff}
    else:
        pts = _as_matrix_rows(_require(cent, "points", "centers"), "centers.points")
        ct_eff = {"kind": "explicit", "points": pts.tolist()}
    eff["centers"] = ct_eff

    # ---- observer ----
    obs = cfg["observer"]
    o_eff = {}
    if "L" in obs:
        o_eff["L"] = _as_matrix_rows(obs["L"], "observer.L").tolist()
        if "l_gain" in obs:
            raise ConfigError("observer: give L or l_gain, not both")
    else:
        o_eff["l_gain"] = _as_float(_require(obs, "l_gain", "observer"), "observer.l_gain")
    w_mode = obs.get("w_mode", "spr_match")
    if w_mode not in ("spr_match", "diagonal", "matrix"):
        raise ConfigError(f"observer.w_mode must be spr_match, diagonal or matrix, got {w_mode!r}")
    o_eff["w_mode"] = w_mode
    if w_mode == "diagonal":
        o_eff["w_value"] = _as_float(_require(obs, "w_value", "observer"), "observer.w_value")
    if w_mode == "matrix":
        o_eff["W"] = _as_matrix_rows(_require(obs, "W", "observer"), "observer.W").tolist()
    o_eff["epsilon"] = _as_float(_require(obs, "epsilon", "observer"), "observer.epsilon")
    if "gamma_matrix" in obs:
        o_eff["gamma_matrix"] = _as_matrix_rows(obs["gamma_matrix"], "observer.gamma_matrix").tolist()
    else:
        o_eff["gamma"] = _as_float(_require(obs, "gamma", "observer"), "observer.gamma")
    for key in ("alpha0", "alpha_ref"):
        val = obs.get(key, "zero")
        if isinstance(val, str):
            allowed = ("zero",) if key == "alpha0" else ("zero", "true_uncertainty")
            if val not in allowed:
                raise ConfigError(f"observer.{key} must be one of {allowed} or a list")
            o_eff[key] = val
        else:
            o_eff[key] = _as_vector(val, f"observer.{key}").tolist()
    o_eff["pb_tolerance"] = _as_float(obs.get("pb_tolerance", 1e-6), "observer.pb_tolerance")
    eff["observer"] = o_eff

    # ---- deadzone ----
    dz = cfg["deadzone"]
    d_eff = {
        "width": _as_float(_require(dz, "width", "deadzone"), "deadzone.width"),
        "buffer": _as_float(_require(dz, "buffer", "deadzone"), "deadzone.buffer"),
        "mode": dz.get("mode", "smooth"),
        "residual_norm_estimate": _as_float(dz.get("residual_norm_estimate", 0.0),
                                            "deadzone.residual_norm_estimate"),
        "sup_power_grid": _as_int(dz.get("sup_power_grid", 21), "deadzone.sup_power_grid"),
    }
    if d_eff["mode"] not in ("smooth", "step"):
        raise ConfigError("deadzone.mode must be smooth or step")
    if "domain_box" in dz:
        box = _as_matrix_rows(dz["domain_box"], "deadzone.domain_box")
        if box.shape[1] != 2:
            raise ConfigError("deadzone.domain_box must be a list of [lo, hi] pairs")
        d_eff["domain_box"] = box.tolist()
    eff["deadzone"] = d_eff

    # ---- sim ----
    sim = cfg["sim"]
    s_eff = {
        "t0": _as_float(sim.get("t0", 0.0), "sim.t0"),
        "t_final": _as_float(_require(sim, "t_final", "sim"), "sim.t_final"),
        "h": _as_float(_require(sim, "h", "sim"), "sim.h"),
        "record_stride": _as_int(sim.get("record_stride", 1), "sim.record_stride"),
    }
    if s_eff["h"] <= 0:
        raise ConfigError("sim.h must be positive")
    if s_eff["t_final"] <= s_eff["t0"]:
        raise ConfigError("sim.t_final must exceed sim.t0")
    if s_eff["record_stride"] < 1:
        raise ConfigError("sim.record_stride must be >= 1")
    for key, allowed in (("x0", ("reference", "zero")), ("x_hat0", ("zero", "truth"))):
        val = sim.get(key, allowed[0] if key == "x0" else "zero")
        if isinstance(val, str):
            if val not in allowed:
                raise ConfigError(f"sim.{key} must be one of {allowed} or a list")
            s_eff[key] = val
        else:
            s_eff[key] = _as_vector(val, f"sim.{key}").tolist()
    if family == "rigid_rotational":
        for key in ("eta0", "eta_hat0"):
            vec = _as_vector(sim.get(key, [0.0, 0.0, 0.0]), f"sim.{key}")
            if vec.shape != (3,):
                raise ConfigError(f"sim.{key} must have 3 entries")
            s_eff[key] = vec.tolist()
    elif "eta0" in sim or "eta_hat0" in sim:
        raise ConfigError("sim.eta0 / sim.eta_hat0 only apply to rotational scenarios")
    eff["sim"] = s_eff

    out = cfg.get("output", {})
    eff["output"] = {"timeseries": bool(out.get("timeseries", True))}
    return eff


def _norm_terms(terms, path: str) -> list:
    if not isinstance(terms, list):
        raise ConfigError(f"{path} must be a list of term tables")
    normd = []
    for i, td in enumerate(terms):
        if not isinstance(td, dict):
            raise ConfigError(f"{path}[{i}] must be a table")
        _reject_unknown(td, _TERM_KEYS, f"{path}[{i}]")
        if "shape" not in td or "amplitude" not in td:
            raise ConfigError(f"{path}[{i}] needs 'shape' and 'amplitude'")
        normd.append({
            "shape": str(td["shape"]),
            "amplitude": _as_float(td["amplitude"], f"{path}[{i}].amplitude"),
            "frequency": _as_float(td.get("frequency", 0.0), f"{path}[{i}].frequency"),
            "phase": _as_float(td.get("phase", 0.0), f"{path}[{i}].phase"),
        })
    return normd


# ---------------------------------------------------------------------------
# scenario construction
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    """Everything a run needs: truth dynamics, observer design, ICs, metadata."""

    name: str
    family: str
    design: ObserverDesign
    truth_rhs: Callable
    measure: Callable
    controller: Callable
    f_true: Callable
    truth0: np.ndarray
    x_hat0_obs: np.ndarray
    alpha0: np.ndarray
    aux0: np.ndarray
    alpha_ref: np.ndarray
    state_labels: list
    aux_labels: list
    delta_signal: Callable
    delta_bound: float
    sup_power: float
    min_deadzone_advisory: float
    e0_radius: float
    warnings: list = field(default_factory=list)
    effective_config: dict = field(default_factory=dict)

    @property
    def n_state_cols(self) -> int:
        return len(self.state_labels)

    def gate_error_norm(self, truth, x_hat_obs) -> float:
        """Norm of the observer-design state error; this is what the dead zone sees."""
        return float(np.linalg.norm(self.observer_error(truth, x_hat_obs)))

    def column_states(self, truth, x_hat_obs, aux):
        """(truth columns, estimate columns) as recorded in the CSV."""
        if self.family == "rigid_translational":
            return truth, np.concatenate([aux, x_hat_obs])
        if self.family == "rigid_rotational":
            return truth[:3], x_hat_obs
        return truth, x_hat_obs

    def observer_error(self, truth, x_hat_obs) -> np.ndarray:
        """Error in the observer-design state (what P and V act on)."""
        if self.family == "rigid_translational":
            return truth[3:6] - x_hat_obs
        if self.family == "rigid_rotational":
            return truth[:3] - x_hat_obs
        return truth - x_hat_obs

    def aux_rhs(self, x_hat_obs, aux) -> np.ndarray:
        if self.family == "rigid_translational":
            return x_hat_obs  # estimated position integrates estimated velocity
        if self.family == "rigid_rotational":
            return euler_kinematics_matrix(aux) @ x_hat_obs
        return np.zeros(0)


def _build_kernel(k_eff: dict, m: int) -> KernelModel:
    if k_eff["family"] == "sobolev_matern":
        fam = SobolevMatern(k=k_eff["k"], dim=k_eff["dimension"],
                            length_scale=k_eff["length_scale"])
    else:
        fam = Gaussian(length_scale=k_eff["length_scale"])
    return KernelModel(family=fam, output_dim=m)


def _build_centers(ct_eff: dict, model: KernelModel) -> CenterSet:
    if ct_eff["kind"] == "lattice":
        pts = lattice_centers(ct_eff["bounds"], ct_eff["points_per_axis"])
    else:
        pts = np.array(ct_eff["points"], dtype=float)
    if pts.shape[1] != model.output_dim:
        raise ConfigError(
            f"centers have dimension {pts.shape[1]} but the measured output has "
            f"dimension {model.output_dim}"
        )
    return assemble_grammian(model, pts)


def _vector_signal(components, m: int, path: str):
    """Per-component SignalSums -> callable t -> R^m (zero if no components)."""
    if not components:
        return lambda t: np.zeros(m), 0.0
    if len(components) != m:
        raise ConfigError(f"{path} must list one term table per output component ({m})")
    sums = [signal_from_terms(c) for c in components]
    bound = math.sqrt(sum(s.amplitude_bound() ** 2 for s in sums))

    def sig(t):
        return np.array([s(t) for s in sums])

    return sig, bound


def _noise_signal(n_eff: dict, m: int):
    """delta(t) callable plus the declared bound, honoring broadcast or per-channel."""
    scale = n_eff["scale"]
    bound = n_eff["bound"] * abs(scale)
    if "components" in n_eff:
        sig, _ = _vector_signal(n_eff["components"], m, "plant.measurement_noise.components")
        return (lambda t: scale * sig(t)), bound
    terms = n_eff.get("terms", [])
    if not terms:
        return (lambda t: np.zeros(m)), bound
    scalar = signal_from_terms(terms)
    ones = np.ones(m)

    def sig(t):
        return scale * scalar(t) * ones

    return sig, bound


def build_scenario(cfg: dict) -> Scenario:
    """Validate a raw config dict and construct the runnable Scenario."""
    eff = validate_config(cfg)
    family = eff["plant"]["family"]

    # observable output dimension per family
    if family in ("rigid_translational", "rigid_rotational"):
        m = 3
    else:
        m = np.array(eff["plant"]["C"], dtype=float).shape[0]

    kernel = _build_kernel(eff["kernel"], m)
    centers = _build_centers(eff["centers"], kernel)

    delta_signal, delta_bound = _noise_signal(eff["plant"]["measurement_noise"], m)

    # matched uncertainty
    u_eff = eff["plant"]["uncertainty"]
    if u_eff["type"] == "zero":
        f_true = lambda y: np.zeros(m)
        true_alpha = None
    elif u_eff["type"] == "trig_composite":
        if m != 3:
            raise ConfigError("trig_composite uncertainty needs a 3-dimensional output")
        f_true = trig_composite_force
        true_alpha = None
    elif u_eff["type"] == "quadratic_drag":
        f_true = quadratic_drag(u_eff["coeff"])
        true_alpha = None
    else:
        coeffs = np.array(u_eff["coeffs"], dtype=float)
        if coeffs.shape != (centers.coeff_dim,):
            raise ConfigError(
                f"plant.uncertainty.coeffs must have length {centers.coeff_dim}"
            )
        element = RkhsElement(centers, coeffs)
        f_true = element.evaluate
        true_alpha = coeffs

    xi_signal, _ = _vector_signal(eff["plant"]["unmatched"]["components"],
                                  {"rigid_translational": 6, "rigid_rotational": 3}.get(
                                      family, np.array(eff["plant"].get("A", [[0]])).shape[0]),
                                  "plant.unmatched.components")

    has_xi = bool(eff["plant"]["unmatched"]["components"])

    # family-specific truth dynamics, observer triple, controller, measurement;
    # truth_rhs takes the already-computed noisy measurement y so the hot loop
    # evaluates each disturbance signal once per stage
    if family == "rigid_translational":
        mass = eff["plant"]["mass"]
        A6, B6, C6 = translational_matrices(mass)
        plant = PlantModel(A6, B6, C6, f_true, xi=xi_signal, delta=delta_signal,
                           delta_bar=delta_bound)
        b_pinv = pseudo_inverse(B6)
        A_o, B_o, C_o = np.zeros((3, 3)), np.eye(3) / mass, np.eye(3)
        n_obs = 3

        def truth_rhs(t, xc, u, y):
            dxc = np.empty(6)
            dxc[:3] = xc[3:]
            dxc[3:] = (u + f_true(y)) / mass
            if has_xi:
                dxc += xi_signal(t)
            return dxc

        def measure(t, xc):
            return xc[3:] + delta_signal(t)

        ctype = eff["plant"]["control"]["type"]
        if ctype == "translational_tracking":
            controller = lambda t, xc: translational_controller(t, xc, b_pinv)
        elif ctype == "signal":
            csig, _ = _vector_signal(eff["plant"]["control"]["components"], 3,
                                     "plant.control.components")
            controller = lambda t, xc: csig(t)
        else:
            raise ConfigError("rotational_tracking control does not fit a translational plant")

        state_labels = [f"x{i}" for i in range(1, 7)]
        aux_labels = []
        truth_dim, aux_dim = 6, 3

    elif family == "rigid_rotational":
        if "inertia" in eff["plant"]:
            inertia = np.array(eff["plant"]["inertia"], dtype=float)
        else:
            inertia = np.diag(eff["plant"]["inertia_diag"])
        body = RigidBodyRotational(inertia)
        inertia_inv = np.linalg.inv(inertia)
        A_o, B_o, C_o = np.zeros((3, 3)), inertia_inv, np.eye(3)
        n_obs = 3

        def truth_rhs(t, xc, u, y):
            omega, eta = xc[:3], xc[3:6]
            torque = u - np.cross(omega, inertia @ omega) + f_true(y)
            omega_dot = inertia_inv @ torque
            if has_xi:
                omega_dot = omega_dot + xi_signal(t)
            dxc = np.empty(6)
            dxc[:3] = omega_dot
            dxc[3:] = euler_kinematics_matrix(eta) @ omega
            return dxc

        def measure(t, xc):
            return xc[:3] + delta_signal(t)

        ctype = eff["plant"]["control"]["type"]
        if ctype == "rotational_tracking":
            controller = lambda t, xc: rotational_controller(t, xc[:3])
        elif ctype == "signal":
            csig, _ = _vector_signal(eff["plant"]["control"]["components"], 3,
                                     "plant.control.components")
            controller = lambda t, xc: csig(t)
        else:
            raise ConfigError("translational_tracking control does not fit a rotational plant")

        state_labels = [f"x{i}" for i in range(1, 4)]
        aux_labels = ["eta1", "eta2", "eta3", "etahat1", "etahat2", "etahat3"]
        truth_dim, aux_dim = 6, 3

    else:  # generic_linear
        A = np.array(eff["plant"]["A"], dtype=float)
        B = np.array(eff["plant"]["B"], dtype=float)
        C = np.array(eff["plant"]["C"], dtype=float)
        plant = PlantModel(A, B, C, f_true, xi=xi_signal, delta=delta_signal,
                           delta_bar=delta_bound)
        A_o, B_o, C_o = A, B, C
        n_obs = A.shape[0]

        def truth_rhs(t, xc, u, y):
            dxc = A @ xc + B @ (u + np.asarray(f_true(y), dtype=float))
            if has_xi:
                dxc = dxc + xi_signal(t)
            return dxc

        def measure(t, xc):
            return C @ xc + delta_signal(t)

        ctype = eff["plant"]["control"]["type"]
        if ctype != "signal":
            raise ConfigError("generic_linear plants use plant.control.type = 'signal'")
        csig, _ = _vector_signal(eff["plant"]["control"]["components"], m,
                                 "plant.control.components")
        controller = lambda t, xc: csig(t)

        state_labels = [f"x{i}" for i in range(1, n_obs + 1)]
        aux_labels = []
        truth_dim, aux_dim = n_obs, 0

    # observer gain
    o_eff = eff["observer"]
    if "L" in o_eff:
        L = np.array(o_eff["L"], dtype=float)
        if L.shape != (n_obs, m):
            raise ConfigError(f"observer.L must be {n_obs} x {m}")
    else:
        if n_obs != m:
            raise ConfigError("observer.l_gain needs a square design; give observer.L instead")
        L = o_eff["l_gain"] * np.eye(n_obs)

    A_e = A_o - L @ C_o
    epsilon = o_eff["epsilon"]

    # W resolution
    if o_eff["w_mode"] == "spr_match":
        W = _spr_match_w(A_e, B_o, C_o, epsilon)
    elif o_eff["w_mode"] == "diagonal":
        W = o_eff["w_value"] * np.eye(n_obs)
    else:
        W = np.array(o_eff["W"], dtype=float)
        if W.shape[1] != n_obs:
            raise ConfigError(f"observer.W must have {n_obs} columns")

    lure = design_lure(A_e, B_o, C_o, epsilon, W, pb_tol=o_eff["pb_tolerance"])

    if "gamma_matrix" in o_eff:
        gamma_f = np.array(o_eff["gamma_matrix"], dtype=float)
    else:
        gamma_f = o_eff["gamma"] * np.eye(m)

    dz_eff = eff["deadzone"]
    deadzone = DeadZone(
        d=dz_eff["width"],
        eps_buffer=dz_eff["buffer"],
        mode=dz_eff["mode"],
        step_radius=0.0,  # patched below once E0 is known
    )
    design = ObserverDesign(
        A=A_o, B=B_o, C=C_o, L=L, gamma_f=gamma_f, lure=lure,
        deadzone=deadzone, delta_bar=delta_bound, kernel=kernel, centers=centers,
    )
    e0 = compute_E0(design)
    if dz_eff["mode"] == "step":
        design = ObserverDesign(
            A=A_o, B=B_o, C=C_o, L=L, gamma_f=gamma_f, lure=lure,
            deadzone=DeadZone(d=dz_eff["width"], eps_buffer=dz_eff["buffer"],
                              mode="step", step_radius=e0),
            delta_bar=delta_bound, kernel=kernel, centers=centers,
        )

    # dead-zone advisory over the declared operating box
    box = dz_eff.get("domain_box")
    if box is None:
        if eff["centers"]["kind"] == "lattice":
            box = eff["centers"]["bounds"]
        else:
            pts = centers.centers
            box = [[float(pts[:, j].min()), float(pts[:, j].max())] for j in range(m)]
    sup_p = sup_power_function(kernel, centers, box, dz_eff["sup_power_grid"])
    d_n = compute_min_deadzone(design, sup_p, dz_eff["residual_norm_estimate"])

    warnings = []
    if not lure.certified:
        warnings.append(f"design not SPR-certified: {lure.guidance}")
    if dz_eff["width"] <= d_n:
        warnings.append(
            f"configured dead-zone width {dz_eff['width']:g} does not exceed the "
            f"advisory minimum d_N = {d_n:.6g}"
        )

    # initial conditions
    s_eff = eff["sim"]
    truth0 = _resolve_truth0(family, s_eff, eff)
    x_hat0_full = _resolve_xhat0(family, s_eff, truth0, n_obs)
    if family == "rigid_translational":
        aux0 = x_hat0_full[:3].copy()
        x_hat0_obs = x_hat0_full[3:].copy()
    elif family == "rigid_rotational":
        aux0 = np.array(s_eff["eta_hat0"], dtype=float)
        x_hat0_obs = x_hat0_full
    else:
        aux0 = np.zeros(0)
        x_hat0_obs = x_hat0_full

    alpha0 = _resolve_alpha(o_eff["alpha0"], centers, "observer.alpha0")
    if o_eff["alpha_ref"] == "true_uncertainty":
        if true_alpha is None:
            raise ConfigError(
                "observer.alpha_ref = 'true_uncertainty' needs plant.uncertainty.type "
                "= 'rkhs_element'"
            )
        alpha_ref = true_alpha.copy()
    else:
        alpha_ref = _resolve_alpha(o_eff["alpha_ref"], centers, "observer.alpha_ref")

    return Scenario(
        name=eff["name"],
        family=family,
        design=design,
        truth_rhs=truth_rhs,
        measure=measure,
        controller=controller,
        f_true=f_true,
        truth0=truth0,
        x_hat0_obs=x_hat0_obs,
        alpha0=alpha0,
        aux0=aux0,
        alpha_ref=alpha_ref,
        state_labels=state_labels,
        aux_labels=aux_labels,
        delta_signal=delta_signal,
        delta_bound=delta_bound,
        sup_power=sup_p,
        min_deadzone_advisory=d_n,
        e0_radius=e0,
        warnings=warnings,
        effective_config=eff,
    )


def _spr_match_w(A_e, B, C, epsilon) -> np.ndarray:
    """W such that the Lur'e solve lands on the P solving P B = C^T exactly.

    Requires square invertible B and C with C^T B^-1 symmetric
    positive-definite; then W^T W = -(shifted A_e)^T P - P (shifted A_e)
    must also be positive-definite.
    """
    n = A_e.shape[0]
    if B.shape != (n, n) or C.shape != (n, n):
        raise ConfigError("w_mode = 'spr_match' needs square B and C; give W explicitly")
    try:
        p_target = C.T @ np.linalg.inv(B)
    except np.linalg.LinAlgError:
        raise ConfigError("w_mode = 'spr_match' needs invertible B") from None
    if np.max(np.abs(p_target - p_target.T)) > 1e-10 * max(1.0, np.max(np.abs(p_target))):
        raise ConfigError("spr_match target P = C^T B^-1 is not symmetric; give W explicitly")
    if np.linalg.eigvalsh(0.5 * (p_target + p_target.T))[0] <= 0:
        raise ConfigError("spr_match target P = C^T B^-1 is not positive-definite")
    shifted = A_e + 0.5 * epsilon * np.eye(n)
    M = -(shifted.T @ p_target + p_target @ shifted)
    M = 0.5 * (M + M.T)
    w_eigs = np.linalg.eigvalsh(M)
    if w_eigs[0] <= 0:
        raise ConfigError(
            "spr_match found no positive-definite W^T W for this A_e and epsilon; "
            "reduce epsilon or strengthen L"
        )
    return np.linalg.cholesky(M).T


def _resolve_truth0(family: str, s_eff: dict, eff: dict) -> np.ndarray:
    x0 = s_eff["x0"]
    if family == "rigid_translational":
        if x0 == "reference":
            vec = translational_reference(eff["sim"]["t0"])[0]
        elif x0 == "zero":
            vec = np.zeros(6)
        else:
            vec = np.array(x0, dtype=float)
        if vec.shape != (6,):
            raise ConfigError("sim.x0 must have 6 entries for the translational plant")
        return vec
    if family == "rigid_rotational":
        if x0 == "reference":
            omega0 = rotational_reference(eff["sim"]["t0"])[0]
        elif x0 == "zero":
            omega0 = np.zeros(3)
        else:
            omega0 = np.array(x0, dtype=float)
        if omega0.shape != (3,):
            raise ConfigError("sim.x0 must have 3 entries for the rotational plant")
        eta0 = np.array(s_eff["eta0"], dtype=float)
        return np.concatenate([omega0, eta0])
    n = np.array(eff["plant"]["A"], dtype=float).shape[0]
    if x0 == "zero":
        return np.zeros(n)
    if x0 == "reference":
        raise ConfigError("sim.x0 = 'reference' only applies to rigid-body families")
    vec = np.array(x0, dtype=float)
    if vec.shape != (n,):
        raise ConfigError(f"sim.x0 must have {n} entries")
    return vec


def _resolve_xhat0(family: str, s_eff: dict, truth0: np.ndarray, n_obs: int) -> np.ndarray:
    want = 6 if family == "rigid_translational" else n_obs
    val = s_eff["x_hat0"]
    if val == "zero":
        return np.zeros(want)
    if val == "truth":
        if family == "rigid_rotational":
            return truth0[:3].copy()
        return truth0[:want].copy()
    vec = np.array(val, dtype=float)
    if vec.shape != (want,):
        raise ConfigError(f"sim.x_hat0 must have {want} entries")
    return vec


def _resolve_alpha(val, centers: CenterSet, path: str) -> np.ndarray:
    if val == "zero":
        return np.zeros(centers.coeff_dim)
    vec = np.array(val, dtype=float).reshape(-1)
    if vec.shape != (centers.coeff_dim,):
        raise ConfigError(f"{path} must have length {centers.coeff_dim}")
    return vec
