"""Deterministic scalar signals built from coefficient tables.

A signal is a sum of terms a * shape(w * t + p) with shape one of sin, cos,
tanh, or const (const ignores w and p). Scenario files describe custom
disturbances and inputs this way; everything stays reproducible because no
randomness is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

_SHAPES = {
    "sin": math.sin,
    "cos": math.cos,
    "tanh": math.tanh,
}


@dataclass(frozen=True)
class SignalTerm:
    shape: str
    amplitude: float
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.shape not in _SHAPES and self.shape != "const":
            raise ConfigError(f"unknown signal shape {self.shape!r}")

    def __call__(self, t: float) -> float:
        if self.shape == "const":
            return self.amplitude
        return self.amplitude * _SHAPES[self.shape](self.frequency * t + self.phase)


@dataclass(frozen=True)
class SignalSum:
    terms: tuple[SignalTerm, ...]

    def __call__(self, t: float) -> float:
        return sum(term(t) for term in self.terms)

    def amplitude_bound(self) -> float:
        """sum of |a_i|, a conservative sup bound on |signal|."""
        return sum(abs(term.amplitude) for term in self.terms)


def signal_from_terms(term_dicts) -> SignalSum:
    """Build a SignalSum from a list of {shape, amplitude, frequency, phase} tables."""
    terms = []
    for i, td in enumerate(term_dicts):
        if not isinstance(td, dict):
            raise ConfigError(f"signal term {i} must be a table")
        unknown = set(td) - {"shape", "amplitude", "frequency", "phase"}
        if unknown:
            raise ConfigError(f"signal term {i} has unknown keys: {sorted(unknown)}")
        if "shape" not in td or "amplitude" not in td:
            raise ConfigError(f"signal term {i} needs 'shape' and 'amplitude'")
        terms.append(
            SignalTerm(
                shape=str(td["shape"]),
                amplitude=float(td["amplitude"]),
                frequency=float(td.get("frequency", 0.0)),
                phase=float(td.get("phase", 0.0)),
            )
        )
    return SignalSum(tuple(terms))


ZERO_SIGNAL = SignalSum(())
