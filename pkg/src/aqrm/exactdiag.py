"""Truncated Fock x spin exact diagonalisation.

Basis ordering: index ``2*m + s`` for Fock number ``m`` and spin ``s`` with
``s = 0`` the sz = +1 state and ``s = 1`` the sz = -1 state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .adiabatic import laguerre
from .model import BlockIndex, ModelParams, ParameterError, validate

N_MAX_GUARD = 10 ** 6
DEGENERACY_TOL = 1e-6


class ConvergenceError(ArithmeticError):
    """Truncation or eigensolver failed to converge."""


@dataclass(frozen=True)
class TruncationConfig:
    n_max: int = 512
    tol: float = 1e-5
    k_levels: int = 14

    def __post_init__(self):
        if self.k_levels < 1:
            raise ParameterError("k_levels must be positive")
        if self.n_max < self.k_levels:
            raise ParameterError("n_max must be at least k_levels")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")


@dataclass
class SpectrumResult:
    params: ModelParams
    method: str
    energies: np.ndarray
    eigenvectors: np.ndarray | None = None
    n_max_used: int | None = None
    diagnostics: list = field(default_factory=list)

    @property
    def rescaled(self) -> np.ndarray:
        return self.energies + self.params.g ** 2 / self.params.omega


def build_hamiltonian(params: ModelParams, n_max: int) -> np.ndarray:
    validate(params)
    if n_max < 0:
        raise ParameterError("n_max must be non-negative")
    if n_max > N_MAX_GUARD:
        raise ParameterError(f"n_max={n_max} exceeds the guard {N_MAX_GUARD}")
    dim = 2 * (n_max + 1)
    h = np.zeros((dim, dim))
    m = np.arange(n_max + 1)
    up, dn = 2 * m, 2 * m + 1
    h[up, up] = m * params.omega + 0.5 * params.delta
    h[dn, dn] = m * params.omega - 0.5 * params.delta
    h[up, dn] = h[dn, up] = 0.5 * params.epsilon
    # g sx (a + a^dag): <m+1, s'| ... |m, s> = g sqrt(m+1), s' != s
    ladder = params.g * np.sqrt(m[:-1] + 1.0)
    h[up[:-1], dn[1:]] = ladder
    h[dn[1:], up[:-1]] = ladder
    h[dn[:-1], up[1:]] = ladder
    h[up[1:], dn[:-1]] = ladder
    return h


def parity_operator(n_max: int) -> np.ndarray:
    """Diagonal sz (-1)^{a^dag a}; commutes with H exactly when epsilon = 0."""
    m = np.repeat(np.arange(n_max + 1), 2)
    spin = np.tile([1.0, -1.0], n_max + 1)
    return np.diag(spin * (-1.0) ** m)


def eigen_spectrum(h, k: int | None = None, vectors: bool = True, check: bool = True):
    """Lowest ``k`` eigenpairs of a real symmetric matrix.

    Returns ``(energies, vecs)`` with eigenvectors as columns (None when
    ``vectors`` is False).
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(np.abs(h).max(), 1.0) if h.size else 1.0
    if check and np.abs(h - h.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    dim = h.shape[0]
    k = dim if k is None else min(k, dim)
    try:
        w, v = kernels.eigh(h, vectors)
    except kernels.EigenConvergenceError as exc:
        raise ConvergenceError(str(exc)) from exc
    w = w[:k]
    if v is None:
        return w, None
    v = v[:, :k]
    if check:
        norm = np.linalg.norm(h, 2) if dim <= 400 else np.abs(h).sum(axis=1).max()
        resid = np.linalg.norm(h @ v - v * w, axis=0).max(initial=0.0)
        if resid > 1e-10 * max(norm, 1.0):
            raise ConvergenceError(f"eigenpair residual {resid:.3e} too large")
    return w, v


def initial_cutoff(params: ModelParams, k_levels: int) -> int:
    return max(16, k_levels + math.ceil(8.0 * (params.g / params.omega) ** 2))


def spectrum_at(params: ModelParams, n_max: int, k_levels: int, vectors: bool = False) -> SpectrumResult:
    h = build_hamiltonian(params, n_max)
    w, v = eigen_spectrum(h, k_levels, vectors=vectors)
    return SpectrumResult(params=params, method="exact", energies=w, eigenvectors=v, n_max_used=n_max)


def converged_spectrum(params: ModelParams, cfg: TruncationConfig = TruncationConfig(),
                       vectors: bool = False) -> SpectrumResult:
    """Double the Fock cutoff until the lowest ``k_levels`` move by < ``tol``."""
    validate(params)
    n_max = min(initial_cutoff(params, cfg.k_levels), cfg.n_max)
    prev = spectrum_at(params, n_max, cfg.k_levels)
    while n_max < cfg.n_max:
        n_next = min(2 * n_max, cfg.n_max)
        cur = spectrum_at(params, n_next, cfg.k_levels, vectors=vectors)
        if np.abs(cur.energies - prev.energies).max() < cfg.tol:
            return cur
        prev, n_max = cur, n_next
    raise ConvergenceError(
        f"lowest {cfg.k_levels} levels not converged to {cfg.tol} by n_max={cfg.n_max}")


def displaced_fock(n: int, alpha: float, n_max: int) -> np.ndarray:
    """Components <m| exp(alpha (a^dag - a)) |n>, m = 0..n_max, for real alpha."""
    x = alpha * alpha
    pref = math.exp(-0.5 * x)
    out = np.empty(n_max + 1)
    for m in range(n_max + 1):
        lo, hi = min(m, n), max(m, n)
        base = alpha if m >= n else -alpha
        mag = math.exp(0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)))
        out[m] = pref * mag * base ** (hi - lo) * laguerre(lo, hi - lo, x)
    return out


def displaced_state(n: int, sign: int, params: ModelParams, n_max: int) -> np.ndarray:
    """|n_sign, sign> = exp(-sign g (a^dag - a)/w)|n> (x) |sx = sign>."""
    fock = displaced_fock(n, -sign * params.g / params.omega, n_max)
    spin = np.array([1.0, float(sign)]) / math.sqrt(2.0)
    return np.kron(fock, spin)


def pair_weights(vecs: np.ndarray, params: ModelParams, idx: BlockIndex, n_max: int) -> np.ndarray:
    """Weight of each eigenvector in span{|n_+,+>, |(n+l)_-,->}."""
    a = displaced_state(idx.n, +1, params, n_max)
    b = displaced_state(idx.n + idx.l, -1, params, n_max)
    return (a @ vecs) ** 2 + (b @ vecs) ** 2


def pair_levels(params: ModelParams, idx: BlockIndex, cfg: TruncationConfig = TruncationConfig(),
                identify: str = "index") -> tuple[float, float]:
    """Exact energies (lower, upper) of the coupled pair ``idx``.

    ``identify="index"`` takes ascending levels ``2n+l`` and ``2n+l+1``;
    ``"overlap"`` picks the two eigenvectors with the largest weight on the
    pair's displaced-oscillator states.
    """
    lo = 2 * idx.n + idx.l
    k = max(cfg.k_levels, lo + 2 + (4 if identify == "overlap" else 0))
    cfg = TruncationConfig(n_max=max(cfg.n_max, k), tol=cfg.tol, k_levels=k)
    spec = converged_spectrum(params, cfg, vectors=(identify == "overlap"))
    if identify == "index":
        return float(spec.energies[lo]), float(spec.energies[lo + 1])
    if identify != "overlap":
        raise ValueError(f"unknown identification rule {identify!r}")
    w = pair_weights(spec.eigenvectors, params, idx, spec.n_max_used)
    top = np.sort(np.argsort(w)[-2:])
    return float(spec.energies[top[0]]), float(spec.energies[top[1]])


def level_gap(params: ModelParams, idx: BlockIndex, cfg: TruncationConfig = TruncationConfig(),
              identify: str = "index") -> float:
    lower, upper = pair_levels(params, idx, cfg, identify)
    return upper - lower
