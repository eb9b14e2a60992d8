import copy

import numpy as np
import pytest

from kernelobs.cli import bundled_scenario_path
from kernelobs.scenario import build_scenario, load_config
from kernelobs.sim import SimConfig, integrate


def bundled_config(name):
    return load_config(bundled_scenario_path(name))


def run_scenario(cfg):
    scn = build_scenario(cfg)
    simcfg = SimConfig.from_effective(scn.effective_config["sim"])
    return scn, integrate(scn, simcfg)


def scalar_bias_config(gamma=10.0, l_gain=2.0, bias=0.5, d=0.0, mode="step",
                       t_final=10.0, h=1e-3, stride=10):
    """Scalar plant pinned at equilibrium with a constant matched bias.

    Plant: x_dot = -x + u + f(y), y = x, with u = 1 - bias so x stays at 1;
    the single Gaussian center sits at y = 1 where the kernel value is 1, so
    the coupled (e, alpha_err) system is linear time-invariant.
    """
    return {
        "name": "scalar_bias",
        "plant": {
            "family": "generic_linear",
            "A": [[-1.0]], "B": [[1.0]], "C": [[1.0]],
            "uncertainty": {"type": "rkhs_element", "coeffs": [bias]},
            "control": {"type": "signal",
                        "components": [[{"shape": "const", "amplitude": 1.0 - bias}]]},
        },
        "kernel": {"family": "gaussian", "length_scale": 1.0},
        "centers": {"kind": "explicit", "points": [[1.0]]},
        "observer": {"l_gain": l_gain, "w_mode": "spr_match", "epsilon": 1.0,
                     "gamma": gamma, "alpha_ref": "true_uncertainty"},
        "deadzone": {"width": d, "buffer": 0.01, "mode": mode},
        "sim": {"t_final": t_final, "h": h, "record_stride": stride,
                "x0": [1.0], "x_hat0": "zero"},
    }


def noise_free_span_config():
    """Translational scenario, noise-free, with the uncertainty inside the span.

    Criterion fixture: delta = 0, f is a known kernel expansion, dead-zone
    width 0 with the step gate (radius E0 = 0, so adaptation always on).
    """
    cfg = copy.deepcopy(bundled_config("translational"))
    n = 27
    alpha = []
    for j in range(n):
        alpha.extend([0.3 * np.sin(0.7 * j), 0.2 * np.cos(0.9 * j), 0.1 * np.sin(0.3 * j + 1.0)])
    cfg["plant"]["uncertainty"] = {"type": "rkhs_element",
                                   "coeffs": [round(a, 12) for a in alpha]}
    cfg["plant"]["measurement_noise"] = {"terms": [], "bound": 0.0, "scale": 1.0}
    cfg["observer"]["l_gain"] = 2.0
    cfg["observer"]["epsilon"] = 1.0
    cfg["observer"]["gamma"] = 100.0
    cfg["observer"]["alpha_ref"] = "true_uncertainty"
    cfg["deadzone"]["width"] = 0.0
    cfg["deadzone"]["mode"] = "step"
    return cfg


@pytest.fixture(scope="session")
def noise_free_run():
    """Shared run for the asymptotic-convergence and V-monotonicity criteria."""
    return run_scenario(noise_free_span_config())
