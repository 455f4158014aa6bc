"""Displaced-oscillator picture and the adiabatic approximation (AA).

Pair ``n`` couples |n_+, +> and |(n+l)_-, ->; in that two-state basis the
block is

    (n + l/2) w - g^2/w + (eps - l w)/2 sx + Omega/2 sz

with the tunnelling Omega set by a displaced-Fock overlap (a Laguerre
polynomial for the AA, a normalised constraint polynomial for the GAA).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import BlockIndex, ModelParams, validate


@dataclass(frozen=True)
class BlockEigenpair:
    n: int
    l: int
    e_plus: float
    e_minus: float
    theta: float
    omega_nl: float
    method: str

    @property
    def gap(self) -> float:
        return self.e_plus - self.e_minus

    def amplitudes(self, band="plus"):
        """Coefficients on (|n_+,+>, |(n+l)_-,->) for the requested band."""
        c, s = math.cos(0.5 * self.theta), math.sin(0.5 * self.theta)
        if band == "plus":
            return c, s
        if band == "minus":
            return -s, c
        raise ValueError(f"band must be 'plus' or 'minus', got {band!r}")


def laguerre(n: int, alpha, x):
    """Generalised Laguerre polynomial L_n^alpha(x) by forward recurrence.

    Works elementwise on arrays for ``alpha`` and ``x``.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    prev = np.ones(np.broadcast(x, alpha).shape)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    cur = np.broadcast_to(cur, prev.shape).copy()
    return cur if cur.ndim else float(cur)


def overlap_prefactor(g, omega, n: int, l: int):
    """exp(-2g^2/w^2) (-2g/w)^l sqrt(n!/(n+l)!), the Laguerre-free part of Omega.

    The factorial ratio is accumulated as a product of (n+j)^(-1/2) so large
    ``n + l`` never overflows.
    """
    g = np.asarray(g, dtype=float)
    x = g / omega
    out = np.exp(-2.0 * x * x)
    for j in range(1, l + 1):
        out = out * (-2.0 * x) / math.sqrt(n + j)
    return out if out.ndim else float(out)


def aa_tunneling(params: ModelParams, idx: BlockIndex) -> float:
    x = 4.0 * params.g ** 2 / params.omega ** 2
    return params.delta * overlap_prefactor(params.g, params.omega, idx.n, idx.l) * laguerre(idx.n, idx.l, x)


def block_shift(params: ModelParams, idx: BlockIndex) -> float:
    return (idx.n + 0.5 * idx.l) * params.omega - params.g ** 2 / params.omega


def block_matrix(params: ModelParams, idx: BlockIndex, tunneling: float) -> np.ndarray:
    """2x2 real block in the (|n_+,+>, |(n+l)_-,->) basis.

    Uses the signed bias; the public entry points fold epsilon to |epsilon|.
    """
    shift = block_shift(params, idx)
    detuning = 0.5 * (params.epsilon - idx.l * params.omega)
    half = 0.5 * tunneling
    return np.array([[shift + detuning, half], [half, shift - detuning]])


def aa_block(params: ModelParams, idx: BlockIndex) -> np.ndarray:
    params = validate(params).folded()
    return block_matrix(params, idx, aa_tunneling(params, idx))


def block_eigenpair(params: ModelParams, idx: BlockIndex, tunneling: float, method: str) -> BlockEigenpair:
    detuning = params.epsilon - idx.l * params.omega
    shift = block_shift(params, idx)
    half_gap = 0.5 * math.hypot(tunneling, detuning)
    return BlockEigenpair(
        n=idx.n, l=idx.l,
        e_plus=shift + half_gap, e_minus=shift - half_gap,
        theta=math.atan2(tunneling, detuning),
        omega_nl=tunneling, method=method,
    )


def aa_eigenpair(params: ModelParams, idx: BlockIndex) -> BlockEigenpair:
    params = validate(params).folded()
    return block_eigenpair(params, idx, aa_tunneling(params, idx), "aa")


def unpaired_energies(params: ModelParams, l: int | None = None) -> list[float]:
    """The lowest ``l`` displaced levels of the |-> oscillator, k w - g^2/w - |eps|/2."""
    if l is None:
        l = params.bias_index
    w = params.omega
    return [k * w - params.g ** 2 / w - 0.5 * abs(params.epsilon) for k in range(l)]


def block_spectrum(params: ModelParams, k_levels: int, eigenpair):
    """Sorted lowest ``k_levels`` energies from the unpaired levels plus pairs.

    Pairs ``n = 0 .. ceil((k_levels - l)/2) + 1`` are assembled; the two spare
    pairs absorb reordering between neighbouring pairs.
    """
    l = params.bias_index
    energies = list(unpaired_energies(params, l))
    n_pairs = max(0, -(-(k_levels - l) // 2)) + 2
    for n in range(n_pairs):
        pair = eigenpair(params, BlockIndex(n, l))
        energies.extend((pair.e_minus, pair.e_plus))
    return np.sort(np.array(energies))[:k_levels]


def spectrum_aa(params: ModelParams, k_levels: int):
    from .exactdiag import SpectrumResult

    params = validate(params).folded()
    energies = block_spectrum(params, k_levels, aa_eigenpair)
    return SpectrumResult(params=params, method="aa", energies=energies)
