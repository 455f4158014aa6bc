"""Constraint polynomials for exceptional (Juddian) points.

    P_0 = 1
    P_1 = 4 g^2 + D^2/4 - w^2 - eps w
    P_k = (4 k g^2 + D^2/4 - k^2 w^2 - k eps w) P_{k-1} - 4 k (k-1) (n-k+1) g^2 P_{k-2}

P_n^n vanishes exactly where pair ``n`` crosses; K_n^eps = P_n^n / P_n^n(0,0,0).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .model import juddian_energy

RAW_N_LIMIT = 60
CELLS_PER_UNIT_G2 = 512
ROOT_TOL = 1e-12


class ConstraintOverflowError(OverflowError):
    pass


class GridResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ConstraintEval:
    n: int
    k: int
    value: float
    kind: str  # "raw", "normalized" or "arctan"
    at: tuple


@dataclass
class JuddianRoot:
    n: int
    l: int
    g_star: float
    energy: float
    certified: bool = False
    gap: float | None = None


@dataclass
class GrazingPoint:
    """Near-zero minimum of |K| without a sign change (possible double root)."""
    n: int
    l: int
    g: float
    value: float


def constraint_sequence(n: int, g, delta, epsilon, omega=1.0):
    """Raw iterates P_0^n .. P_n^n, elementwise in ``g``."""
    if n > RAW_N_LIMIT:
        raise ConstraintOverflowError(
            f"raw constraint polynomial limited to n <= {RAW_N_LIMIT}; use normalized_constraint")
    g2 = np.asarray(g, dtype=float) ** 2
    dq = 0.25 * delta * delta
    seq = [np.ones_like(g2)]
    prev = np.zeros_like(g2)
    for k in range(1, n + 1):
        coef = 4.0 * k * g2 + dq - k * k * omega * omega - k * epsilon * omega
        cur = coef * seq[-1] - 4.0 * k * (k - 1) * (n - k + 1) * g2 * prev
        prev = seq[-1]
        seq.append(cur)
    return seq


def constraint_poly(n: int, g, delta, epsilon, omega=1.0):
    out = constraint_sequence(n, g, delta, epsilon, omega)[-1]
    return out if np.ndim(out) else float(out)


def norm_factor(n: int, omega=1.0) -> float:
    """P_n^n(0, 0, 0) = (-1)^n (n!)^2 w^(2n), from the recurrence itself."""
    return float(constraint_poly(n, 0.0, 0.0, 0.0, omega))


def normalized_constraint(n: int, g, delta, epsilon, omega=1.0):
    """K_n^eps(g, delta).

    For n <= 60 this is the literal ratio P_n^n / P_n^n(0,0,0); beyond that
    the recurrence runs on normalised iterates.
    """
    if n <= RAW_N_LIMIT:
        out = constraint_poly(n, g, delta, epsilon, omega) / norm_factor(n, omega)
    else:
        out = kernels.normalized_constraint_grid(n, g, float(delta), float(epsilon), float(omega))
    return out if np.ndim(out) else float(out)


def log_abs_norm_factor(n: int, omega=1.0) -> float:
    return 2.0 * math.lgamma(n + 1) + 2.0 * n * math.log(omega)


def kbar(n: int, g, delta, epsilon, omega=1.0):
    """(1/2) arctan P_n^n: same zero set as K, bounded by pi/4."""
    if n <= RAW_N_LIMIT:
        out = 0.5 * np.arctan(constraint_poly(n, g, delta, epsilon, omega))
    else:
        # P = K * norm with |norm| = exp(log_abs_norm_factor) far beyond double range
        k_val = np.asarray(kernels.normalized_constraint_grid(
            n, g, float(delta), float(epsilon), float(omega)))
        sign = (-1.0) ** n
        with np.errstate(divide="ignore"):
            log_p = np.log(np.abs(k_val)) + log_abs_norm_factor(n, omega)
        big = log_p > 700.0
        p = sign * np.sign(k_val) * np.exp(np.where(big, 0.0, log_p))
        out = np.where(big, 0.25 * math.pi * np.sign(sign * k_val), 0.5 * np.arctan(p))
    return out if np.ndim(out) else float(out)


def evaluate(n: int, g, delta, epsilon, omega=1.0, kind="normalized") -> ConstraintEval:
    fn = {"raw": constraint_poly, "normalized": normalized_constraint, "arctan": kbar}[kind]
    return ConstraintEval(n=n, k=n, value=float(fn(n, g, delta, epsilon, omega)), kind=kind,
                          at=(float(g), float(delta), float(epsilon), float(omega)))


def k2_closed_form(g, delta, epsilon):
    """Expanded K_2^eps(g, delta) at w = 1."""
    g2 = np.asarray(g, dtype=float) ** 2
    return (1 - 8 * g2 + 8 * g2 ** 2 + 1.5 * epsilon - 4 * g2 * epsilon + 0.5 * epsilon ** 2
            + delta ** 2 * (-5 / 16 + 0.75 * g2 - 3 * epsilon / 16) + delta ** 4 / 64)


def coefficients_in_g2(n: int, delta, epsilon, omega=1.0) -> np.ndarray:
    """Coefficients (low to high) of P_n^n as a polynomial in x = g^2."""
    dq = 0.25 * delta * delta
    prev = np.zeros(1)
    cur = np.ones(1)
    for k in range(1, n + 1):
        coef = np.array([dq - k * k * omega * omega - k * epsilon * omega, 4.0 * k])
        nxt = npoly.polysub(npoly.polymul(coef, cur),
                            npoly.polymulx(prev) * (4.0 * k * (k - 1) * (n - k + 1)))
        prev, cur = cur, nxt
    return cur


def root_bound_g(n: int, delta, epsilon, omega=1.0) -> float:
    """Cauchy upper bound on positive roots g of P_n^n."""
    if n == 0:
        return 0.0
    c = coefficients_in_g2(n, delta, epsilon, omega)
    x_max = 1.0 + np.max(np.abs(c[:-1] / c[-1]))
    return math.sqrt(x_max)


def _bisect(f, a, b, fa, tol=ROOT_TOL, max_iter=200):
    for _ in range(max_iter):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def scan_roots(f, g_max: float, cells_per_unit: int = CELLS_PER_UNIT_G2):
    """Sign-change roots of ``f`` on (0, g_max] from a grid uniform in g^2.

    Returns ``(roots, grazing)`` where ``grazing`` lists interior local
    minima of |f| that come close to zero without a sign change.
    """
    cells = max(8, int(math.ceil(cells_per_unit * g_max * g_max)))
    g = np.sqrt(np.linspace(0.0, g_max * g_max, cells + 1))
    vals = np.asarray(f(g), dtype=float)
    roots = []
    for i in range(cells):
        a, b = g[i], g[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fb == 0.0 and b > 0:
            roots.append(float(b))
        elif fa != 0.0 and (fa > 0) != (fb > 0):
            roots.append(_bisect(lambda x: float(f(x)), a, b, fa))
    grazing = []
    mag = np.abs(vals)
    scale = max(mag.max(initial=0.0), 1.0)
    for i in range(1, cells):
        if mag[i] < mag[i - 1] and mag[i] < mag[i + 1] and mag[i] < 1e-6 * scale:
            if (vals[i - 1] > 0) == (vals[i + 1] > 0) and vals[i] != 0.0:
                grazing.append((float(g[i]), float(vals[i])))
    return roots, grazing


def juddian_roots(n: int, l: int, delta: float, omega: float = 1.0, g_max: float | None = None,
                  certify: bool = False, cfg=None, with_diagnostics: bool = False):
    """Positive roots of g -> K_n^{l w}(g, delta), i.e. crossings of pair (n, l).

    ``g_max`` defaults to a Cauchy bound on the roots, so every root is found.
    With ``certify`` each root is checked against exact diagonalisation.
    """
    epsilon = l * omega
    if g_max is None:
        g_max = root_bound_g(n, delta, epsilon, omega) * 1.01 if n > 0 else 1.0
    roots, grazing = scan_roots(lambda g: normalized_constraint(n, g, delta, epsilon, omega), g_max)
    roots = [r for r in roots if r > 0]
    if n > 0 and n <= RAW_N_LIMIT:
        c = coefficients_in_g2(n, delta, epsilon, omega)
        x = np.roots(c[::-1])
        expected = sum(1 for r in x if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and 0 < r.real <= g_max ** 2)
        if expected != len(roots):
            warnings.warn(
                f"pair (n={n}, l={l}): {len(roots)} sign changes but {expected} real roots in window; "
                "grid may be too coarse", GridResolutionWarning, stacklevel=2)
    out = [JuddianRoot(n=n, l=l, g_star=float(r), energy=float(juddian_energy(n, l, r, omega)))
           for r in roots]
    if certify:
        for root in out:
            certify_root(root, delta, omega, cfg)
    diag = [GrazingPoint(n, l, g, v) for g, v in grazing]
    if with_diagnostics:
        return out, diag
    return out


def certify_root(root: JuddianRoot, delta: float, omega: float = 1.0, cfg=None, tol: float = 1e-6) -> JuddianRoot:
    """Set ``root.certified`` from an exact-diagonalisation gap check."""
    from .exactdiag import TruncationConfig, pair_levels
    from .model import BlockIndex, ModelParams

    params = ModelParams(delta=delta, omega=omega, g=root.g_star, epsilon=root.l * omega)
    idx = BlockIndex(root.n, root.l)
    if cfg is None:
        cfg = TruncationConfig(k_levels=2 * root.n + root.l + 2, tol=1e-10)
    lower, upper = pair_levels(params, idx, cfg, identify="overlap")
    root.gap = float(upper - lower)
    root.certified = bool(root.gap < tol and abs(0.5 * (upper + lower) - root.energy) < 1e-5)
    return root
