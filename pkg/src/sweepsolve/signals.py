"""Built-in scalar input signals u(t) for driven constraint sets.

Every signal is callable, returns a float, and exposes what the rest of the
library needs to reason about it: an analytic sup-norm bound when one exists,
a Lipschitz constant (None for discontinuous signals), and a continuity flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Sine:
    """u(t) = amplitude * sin(2*pi*frequency*t) + offset."""

    amplitude: float
    frequency: float
    offset: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t) + self.offset

    def bound(self) -> float:
        return abs(self.amplitude) + abs(self.offset)

    def lipschitz(self) -> float:
        return abs(self.amplitude) * 2.0 * math.pi * abs(self.frequency)

    @property
    def is_continuous(self) -> bool:
        return True


@dataclass(frozen=True)
class SignOfSine:
    """u(t) = sign(sin(2*pi*frequency*t)); discontinuous square wave."""

    frequency: float

    def __call__(self, t: float) -> float:
        return float(np.sign(math.sin(2.0 * math.pi * self.frequency * t)))

    def bound(self) -> float:
        return 1.0

    def lipschitz(self):
        return None

    @property
    def is_continuous(self) -> bool:
        return False


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t: float) -> float:
        return self.value

    def bound(self) -> float:
        return abs(self.value)

    def lipschitz(self) -> float:
        return 0.0

    @property
    def is_continuous(self) -> bool:
        return True


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation of a (times, values) table; clamped outside the table."""

    times: tuple
    values: tuple

    def __post_init__(self):
        if len(self.times) != len(self.values) or len(self.times) < 2:
            raise ValueError("piecewise-linear table needs matching times/values, length >= 2")
        if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise ValueError("piecewise-linear times must be strictly increasing")

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.times, self.values))

    def bound(self) -> float:
        return max(abs(v) for v in self.values)

    def lipschitz(self) -> float:
        slopes = [
            abs((v1 - v0) / (t1 - t0))
            for (t0, v0), (t1, v1) in zip(
                zip(self.times, self.values), zip(self.times[1:], self.values[1:])
            )
        ]
        return max(slopes)

    @property
    def is_continuous(self) -> bool:
        return True


def signal_bound(u, horizon: float, samples: int = 1000) -> float:
    """Sup-norm of a signal on [0, horizon]: analytic when available, sampled otherwise."""
    bound = getattr(u, "bound", None)
    if bound is not None:
        value = bound()
        if value is not None:
            return float(value)
    ts = np.linspace(0.0, horizon, samples)
    return float(max(abs(u(t)) for t in ts))


def signal_lipschitz(u, horizon: float, samples: int = 1000):
    """Lipschitz constant on [0, horizon], or None when unavailable/discontinuous.

    The sampled fallback is a finite-difference estimate, only used for Custom
    callables that do not declare their own constant.
    """
    lip = getattr(u, "lipschitz", None)
    if lip is not None:
        return lip()
    if not getattr(u, "is_continuous", True):
        return None
    ts = np.linspace(0.0, horizon, samples)
    vals = np.array([u(t) for t in ts])
    dt = ts[1] - ts[0]
    return float(np.max(np.abs(np.diff(vals))) / dt)
