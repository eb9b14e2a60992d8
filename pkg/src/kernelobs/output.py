"""Deterministic output formatting: CSV records, summary blocks, TOML configs.

Floats are rendered with 17 significant digits ('%.17g'), which round-trips
IEEE doubles exactly, so re-running an identical scenario reproduces the
output files byte for byte.
"""

from __future__ import annotations

import hashlib

import numpy as np


def format_float(v: float) -> str:
    return f"{float(v):.17g}"


def write_timeseries_csv(path, columns, data) -> str:
    """Write the record columns as CSV; returns the SHA-256 of the bytes."""
    lines = [",".join(columns)]
    n = len(data[columns[0]])
    cols = [data[c] for c in columns]
    for i in range(n):
        lines.append(",".join(format_float(col[i]) for col in cols))
    blob = ("\n".join(lines) + "\n").encode("ascii")
    with open(path, "wb") as fh:
        fh.write(blob)
    return hashlib.sha256(blob).hexdigest()


def summary_lines(scenario, summary, simcfg, overrides=(), csv_sha=None) -> list:
    """Flat key = value lines describing the design and the run metrics."""
    design = scenario.design
    lure = design.lure
    lines = [
        ("scenario", scenario.name),
        ("family", scenario.family),
        ("gate_mode", design.deadzone.mode),
        ("t0", format_float(simcfg.t0)),
        ("t_final", format_float(simcfg.t_final)),
        ("h", format_float(simcfg.h)),
        ("record_stride", str(simcfg.record_stride)),
        ("n_centers", str(design.centers.n_centers)),
        ("grammian_jitter", format_float(design.centers.jitter)),
        ("grammian_condition_estimate", format_float(design.centers.condition_estimate())),
        ("spr_certified", str(lure.certified).lower()),
        ("pb_ct_residual", format_float(lure.pb_ct_residual)),
        ("lyapunov_residual", format_float(lure.lyapunov_residual)),
        ("epsilon", format_float(lure.epsilon)),
        ("delta_bar", format_float(scenario.delta_bound)),
        ("deadzone_width", format_float(design.deadzone.d)),
        ("deadzone_buffer", format_float(design.deadzone.eps_buffer)),
        ("e0_radius", format_float(scenario.e0_radius)),
        ("min_deadzone_advisory", format_float(scenario.min_deadzone_advisory)),
        ("sup_power", format_float(scenario.sup_power)),
        ("warnings_count", str(len(scenario.warnings))),
    ]
    for i, w in enumerate(scenario.warnings):
        lines.append((f"warning_{i}", w))
    if summary is not None:
        t_enter = summary.t_enter
        lines += [
            ("t_enter", summary.NOT_REACHED if t_enter is None else format_float(t_enter)),
            ("ultimate_bound", format_float(summary.ultimate_bound)),
            ("final_half_max_e_norm", format_float(summary.final_half_max_e_norm)),
            ("final_e_norm", format_float(summary.final_e_norm)),
            ("delta_bound_observed", format_float(summary.delta_bound_observed)),
        ]
        for j, v in enumerate(summary.steady_state_error_means):
            lines.append((f"steady_state_error_mean_{j + 1}", format_float(v)))
        if summary.max_lyap_increase_active is not None:
            lines.append(("max_lyapunov_increase_active", format_float(summary.max_lyap_increase_active)))
        else:
            lines.append(("max_lyapunov_increase_active", "n/a"))
        if summary.angle_error_max is not None:
            lines.append(("angle_error_max", format_float(summary.angle_error_max)))
    for key, val in overrides:
        lines.append((f"override_{key}", val))
    if csv_sha is not None:
        lines.append(("timeseries_sha256", csv_sha))
    return [f"{k} = {v}" for k, v in lines]


def write_summary(path, lines) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# minimal TOML emission for effective configs
# ---------------------------------------------------------------------------

def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    if isinstance(v, dict):
        inner = ", ".join(f"{k} = {_toml_scalar(val)}" for k, val in v.items())
        return "{" + inner + "}"
    raise TypeError(f"cannot serialize {type(v).__name__} to TOML")


def dump_toml(cfg: dict) -> str:
    """Serialize a (nested) dict of plain values; subtables become [a.b] sections."""
    lines = []

    def emit_table(table, prefix):
        subs = {k: v for k, v in table.items() if isinstance(v, dict)}
        plain = {k: v for k, v in table.items() if not isinstance(v, dict)}
        for k, v in plain.items():
            lines.append(f"{k} = {_toml_scalar(v)}")
        for k, v in subs.items():
            lines.append("")
            lines.append(f"[{'.'.join(prefix + [k])}]")
            emit_table(v, prefix + [k])

    top_plain = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    for k, v in top_plain.items():
        lines.append(f"{k} = {_toml_scalar(v)}")
    for k, v in cfg.items():
        if isinstance(v, dict):
            lines.append("")
            lines.append(f"[{k}]")
            emit_table(v, [k])
    return "\n".join(lines) + "\n"


def write_effective_config(path, cfg: dict) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dump_toml(cfg))
