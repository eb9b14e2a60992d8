"""Command-line entry points: run, design-report, sweep.

Exit codes: 0 success, 2 configuration or design validation failure,
3 numerical divergence or kinematic singularity during integration.
"""

from __future__ import annotations

import argparse
import copy
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DesignError,
    DivergenceError,
    DimensionError,
    InputDomainError,
    KernelObsError,
    KinematicSingularityError,
)
from .output import (
    format_float,
    summary_lines,
    write_effective_config,
    write_summary,
    write_timeseries_csv,
)
from .scenario import apply_override, build_scenario, load_config, validate_config
from .sim import SimConfig, integrate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3

_VALIDATION_ERRORS = (ConfigError, DesignError, DimensionError, InputDomainError)
_RUNTIME_ERRORS = (DivergenceError, KinematicSingularityError)


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario file shipped with the package (e.g. 'translational')."""
    return Path(__file__).parent / "scenarios" / f"{name}.toml"


def _resolve_config_path(text: str) -> Path:
    p = Path(text)
    if p.exists():
        return p
    candidate = bundled_scenario_path(p.stem)
    if candidate.exists():
        return candidate
    raise ConfigError(f"config file not found: {text}")


def _load(args) -> dict:
    cfg = load_config(_resolve_config_path(args.config))
    for item in args.override or []:
        if "=" not in item:
            raise ConfigError(f"--override must look like key=value, got {item!r}")
        key, value = item.split("=", 1)
        apply_override(cfg, key.strip(), value.strip())
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    scenario = build_scenario(cfg)
    simcfg = SimConfig.from_effective(scenario.effective_config["sim"])
    result = integrate(scenario, simcfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_sha = None
    if scenario.effective_config["output"]["timeseries"]:
        csv_sha = write_timeseries_csv(out / "timeseries.csv", result.columns, result.data)
    overrides = [tuple(item.split("=", 1)) for item in (args.override or [])]
    write_summary(out / "summary.txt",
                  summary_lines(scenario, result.summary, simcfg, overrides, csv_sha))
    write_effective_config(out / "effective_config.toml", scenario.effective_config)
    print(f"wrote {out / 'timeseries.csv'} and {out / 'summary.txt'}")
    return EXIT_OK


def cmd_design_report(args) -> int:
    cfg = _load(args)
    scenario = build_scenario(cfg)
    design = scenario.design
    lure = design.lure
    eigs = np.linalg.eigvals(design.A_e)
    eig_text = ", ".join(
        f"{ev.real:.6g}{ev.imag:+.6g}j" if abs(ev.imag) > 1e-12 else f"{ev.real:.6g}"
        for ev in sorted(eigs, key=lambda v: v.real)
    )
    from .linalg import lambda_min, spectral_norm

    rows = [
        ("scenario", scenario.name),
        ("A_e_eigenvalues", eig_text),
        ("lyapunov_residual", format_float(lure.lyapunov_residual)),
        ("pb_ct_residual", format_float(lure.pb_ct_residual)),
        ("spr_certified", str(lure.certified).lower()),
        ("lambda_min_P", format_float(lure.lambda_min_P)),
        ("lambda_min_WtW_plus_epsP",
         format_float(lambda_min(lure.W.T @ lure.W + lure.epsilon * lure.P))),
        ("norm_PL", format_float(spectral_norm(lure.P @ design.L))),
        ("norm_C", format_float(spectral_norm(design.C))),
        ("sup_power", format_float(scenario.sup_power)),
        ("e0_radius", format_float(scenario.e0_radius)),
        ("min_deadzone_advisory", format_float(scenario.min_deadzone_advisory)),
        ("deadzone_width", format_float(design.deadzone.d)),
        ("deadzone_exceeds_advisory",
         str(design.deadzone.d > scenario.min_deadzone_advisory).lower()),
        ("grammian_condition_estimate", format_float(design.centers.condition_estimate())),
        ("warnings_count", str(len(scenario.warnings))),
    ]
    for i, w in enumerate(scenario.warnings):
        rows.append((f"warning_{i}", w))
    for key, val in rows:
        print(f"{key} = {val}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = [v for v in (args.values or "").split(",") if v != ""]
    if not values:
        raise ConfigError("sweep needs a non-empty --values list")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["value", "n_centers", "sup_power", "min_deadzone_advisory",
              "ultimate_bound", "t_enter"]
    table_lines = [",".join(header)]
    for value_text in values:
        sub_cfg = copy.deepcopy(cfg)
        apply_override(sub_cfg, args.axis, value_text)
        scenario = build_scenario(sub_cfg)
        simcfg = SimConfig.from_effective(scenario.effective_config["sim"])
        result = integrate(scenario, simcfg)
        run_dir = out / f"{args.axis.replace('.', '_')}_{value_text}"
        run_dir.mkdir(parents=True, exist_ok=True)
        csv_sha = write_timeseries_csv(run_dir / "timeseries.csv", result.columns, result.data)
        write_summary(run_dir / "summary.txt",
                      summary_lines(scenario, result.summary, simcfg, csv_sha=csv_sha))
        t_enter = result.summary.t_enter
        table_lines.append(",".join([
            value_text,
            str(scenario.design.centers.n_centers),
            format_float(scenario.sup_power),
            format_float(scenario.min_deadzone_advisory),
            format_float(result.summary.ultimate_bound),
            result.summary.NOT_REACHED if t_enter is None else format_float(t_enter),
        ]))
    blob = "\n".join(table_lines) + "\n"
    (out / "sweep.csv").write_text(blob, encoding="ascii")
    print(blob, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernelobs",
        description="Kernel-based adaptive observer simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="scenario TOML path or bundled name")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; current signals are deterministic")

    p_run = sub.add_parser("run", help="integrate a scenario and write CSV + summary")
    add_common(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("design-report", help="print design quantities without simulating")
    add_common(p_rep)
    p_rep.set_defaults(func=cmd_design_report)

    p_sw = sub.add_parser("sweep", help="run the scenario across a list of parameter values")
    add_common(p_sw)
    p_sw.add_argument("--out", required=True, help="output directory")
    p_sw.add_argument("--axis", required=True, help="dotted config key, e.g. centers.points_per_axis")
    p_sw.add_argument("--values", required=True, help="comma-separated values")
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except KernelObsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
