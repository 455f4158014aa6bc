"""Generalised adiabatic approximation (GAA).

The AA tunnelling keeps its exponential, power and factorial prefactor but the
Laguerre factor is replaced by the normalised constraint polynomial
K_n^eps(g, delta), so pair gaps close exactly at the Juddian points.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import constraints
from .adiabatic import block_eigenpair, block_matrix, block_shift, block_spectrum, overlap_prefactor
from .model import BlockIndex, ModelParams, juddian_energy, validate

VALIDITY_WINDOW = 0.25


class ValidityWarning(UserWarning):
    """Bias far from an integer multiple of omega; pairing assumption is poor."""


@dataclass(frozen=True)
class ConicalIntersection:
    n: int
    l: int
    g_star: float
    epsilon_star: float
    energy: float
    rescaled_energy: float


def constraint_factor(params: ModelParams, n: int, kbar: bool = False):
    fn = constraints.kbar if kbar else constraints.normalized_constraint
    return fn(n, params.g, params.delta, params.epsilon, params.omega)


def gaa_tunneling(params: ModelParams, idx: BlockIndex, kbar: bool = False) -> float:
    """Omega_nl^GAA. ``kbar`` swaps K_n for (1/2) arctan P_n^n.

    Uses the signed bias as given; energy-level entry points fold it first.
    """
    pref = overlap_prefactor(params.g, params.omega, idx.n, idx.l)
    return params.delta * pref * constraint_factor(params, idx.n, kbar)


def check_validity(params: ModelParams) -> bool:
    off = abs(abs(params.epsilon) / params.omega - params.bias_index)
    if off > VALIDITY_WINDOW:
        warnings.warn(
            f"|eps/w - l| = {off:.3f} > {VALIDITY_WINDOW}: displaced-oscillator pairing degrades",
            ValidityWarning, stacklevel=3)
        return False
    return True


def gaa_eigenpair(params: ModelParams, idx: BlockIndex, kbar: bool = False):
    params = validate(params).folded()
    method = "gaa-kbar" if kbar else "gaa"
    return block_eigenpair(params, idx, gaa_tunneling(params, idx, kbar), method)


def effective_hamiltonian(params: ModelParams, idx: BlockIndex, kbar: bool = False):
    """``(shift, m)``: the pair block is shift * I + m, m traceless.

    The sz-like coefficient is the full Omega^GAA, so the eigenvalues are the
    GAA pair energies.
    """
    params = validate(params).folded()
    h = block_matrix(params, idx, gaa_tunneling(params, idx, kbar))
    shift = block_shift(params, idx)
    return shift, h - shift * np.eye(2)


def locate_cis(n: int, l: int, delta: float, omega: float = 1.0, g_max: float | None = None,
               certify: bool = False) -> list[ConicalIntersection]:
    roots = constraints.juddian_roots(n, l, delta, omega, g_max, certify=certify)
    out = []
    for r in roots:
        if certify and not r.certified:
            continue
        energy = juddian_energy(n, l, r.g_star, omega)
        out.append(ConicalIntersection(
            n=n, l=l, g_star=r.g_star, epsilon_star=l * omega, energy=energy,
            rescaled_energy=energy + r.g_star ** 2 / omega))
    return out


def spectrum_gaa(params: ModelParams, k_levels: int, kbar: bool = False, warn: bool = True):
    from .exactdiag import SpectrumResult

    params = validate(params).folded()
    diagnostics = []
    if warn and not check_validity(params):
        diagnostics.append("validity")
    energies = block_spectrum(params, k_levels, lambda p, i: gaa_eigenpair(p, i, kbar))
    return SpectrumResult(params=params, method="gaa-kbar" if kbar else "gaa",
                          energies=energies, diagnostics=diagnostics)
