"""Parameter container and index conventions for the asymmetric Rabi model.

    H = (delta/2) sz + omega a^dag a + g sx (a^dag + a) + (epsilon/2) sx

Every other module takes a :class:`ModelParams`; ``omega`` is always explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


class ParameterError(ValueError):
    """Raised for physically invalid model parameters."""


@dataclass(frozen=True)
class ModelParams:
    delta: float
    omega: float
    g: float
    epsilon: float

    @property
    def bias_index(self) -> int:
        return nearest_bias_index(self.epsilon, self.omega)

    @property
    def epsilon_sign(self) -> int:
        return -1 if self.epsilon < 0 else 1

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def folded(self) -> "ModelParams":
        """Copy with epsilon mapped to |epsilon| (the spectrum is even in epsilon)."""
        return replace(self, epsilon=abs(self.epsilon))


@dataclass(frozen=True)
class BlockIndex:
    """Coupled level pair ``n`` for bias index ``l``.

    Pair ``n`` couples |n_+, +> with |(n+l)_-, ->.
    """

    n: int
    l: int

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise ParameterError("block indices must be non-negative")


def validate(params: ModelParams) -> ModelParams:
    for name in ("delta", "omega", "g", "epsilon"):
        value = getattr(params, name)
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")
    if params.omega <= 0:
        raise ParameterError("omega must be positive")
    if params.delta < 0:
        raise ParameterError("delta must be non-negative")
    if params.g < 0:
        raise ParameterError("g must be non-negative")
    return params


def nearest_bias_index(epsilon: float, omega: float) -> int:
    """Integer closest to |epsilon|/omega, ties to even."""
    if omega <= 0:
        raise ParameterError("omega must be positive")
    # Python's round() is round-half-even.
    return int(round(abs(epsilon) / omega))


def rescaled_energy(energy, g, omega):
    """E + g^2/omega, the shift that puts crossing energies on (n + l/2) omega."""
    return energy + g * g / omega


def juddian_energy(n: int, l: int, g: float, omega: float) -> float:
    """Energy of the degenerate pair ``n`` at an exact crossing."""
    return (n + 0.5 * l) * omega - g * g / omega
