"""Geometric phases of a level pair around conical intersections.

In the complexified basis phi_pm = (|n_+,+> +- i|(n+l)_-,->)/sqrt(2) the pair
block has off-diagonal element (eps - l w)/2 - i Omega/2 = (R/2) exp(-i theta)
with theta = atan2(Omega, eps - l w). Around a closed loop theta winds by
2 pi m and the two bands pick up -m pi (upper) and +m pi (lower).

Loops are traversed clockwise in the (g, eps) plane by default: that is the
sense in which the upper state of pair (n=2, l=0) at delta = w = 1 acquires
+pi around its lower-g crossing and -pi around the upper one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constraints
from .adiabatic import laguerre, overlap_prefactor
from .model import BlockIndex, ModelParams

METHODS = ("aa", "gaa", "gaa-kbar")
PROXIMITY = 1e-6
MAX_TURN = 0.5 * math.pi
MAX_REFINE_DEPTH = 40


class DegeneracyError(ArithmeticError):
    """The mixing angle is undefined (the point sits on a crossing)."""


class ProximityError(ArithmeticError):
    def __init__(self, message, ci=None):
        super().__init__(message)
        self.ci = ci


class ResolutionError(ArithmeticError):
    pass


@dataclass
class LoopTrajectory:
    points: np.ndarray  # (N+1, 2) columns g, eps; first row == last row
    orientation: str
    steps: int

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) < 4:
            raise ValueError("loop needs at least three distinct (g, eps) points")
        if not np.array_equal(self.points[0], self.points[-1]):
            raise ValueError("loop is not closed")

    def reversed(self) -> "LoopTrajectory":
        flip = {"clockwise": "counterclockwise", "counterclockwise": "clockwise"}
        return LoopTrajectory(self.points[::-1].copy(), flip.get(self.orientation, self.orientation), self.steps)

    def signed_area(self) -> float:
        g, e = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(g[:-1] * e[1:] - g[1:] * e[:-1]))

    def encloses(self, g: float, eps: float) -> int:
        """Winding number of the polygon about (g, eps): +1 ccw, -1 cw, 0 outside."""
        rel = self.points - np.array([g, eps])
        ang = np.arctan2(rel[:, 1], rel[:, 0])
        d = np.diff(ang)
        d = (d + math.pi) % (2 * math.pi) - math.pi
        return int(round(d.sum() / (2 * math.pi)))


@dataclass(frozen=True)
class BerryPhaseResult:
    n: int
    l: int
    band: str
    winding: int
    phase: float
    method: str

    @property
    def phase_over_pi(self) -> float:
        return self.phase / math.pi


def rectangle_loop(g_range, eps_range, steps: int = 2000, orientation: str = "clockwise") -> LoopTrajectory:
    """Closed rectangle starting at (g_min, eps_min), step lengths equal along the perimeter."""
    g0, g1 = map(float, g_range)
    e0, e1 = map(float, eps_range)
    if not (g0 < g1 and e0 < e1):
        raise ValueError("rectangle ranges must satisfy min < max")
    corners = [(g0, e0), (g1, e0), (g1, e1), (g0, e1), (g0, e0)]
    if orientation == "clockwise":
        corners = corners[::-1]
    elif orientation != "counterclockwise":
        raise ValueError(f"unknown orientation {orientation!r}")
    lengths = [math.dist(corners[i], corners[i + 1]) for i in range(4)]
    perimeter = sum(lengths)
    counts = [max(1, round(steps * L / perimeter)) for L in lengths]
    pts = []
    for i in range(4):
        a, b = np.array(corners[i]), np.array(corners[i + 1])
        t = np.arange(counts[i]) / counts[i]
        pts.append(a + t[:, None] * (b - a))
    pts.append(np.array([corners[0]]))
    return LoopTrajectory(np.vstack(pts), orientation, int(sum(counts)))


def tunneling_field(g, eps, idx: BlockIndex, delta: float, omega: float = 1.0, method: str = "gaa"):
    """Omega_nl at arrays of (g, eps) with the signed bias."""
    g = np.asarray(g, dtype=float)
    eps = np.asarray(eps, dtype=float)
    pref = delta * overlap_prefactor(g, omega, idx.n, idx.l)
    if method == "aa":
        return pref * laguerre(idx.n, idx.l, 4.0 * g * g / omega ** 2)
    if method == "gaa":
        fn = constraints.normalized_constraint
    elif method == "gaa-kbar":
        fn = constraints.kbar
    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if idx.n <= constraints.RAW_N_LIMIT:
        return pref * fn(idx.n, g, delta, eps, omega)
    vec = np.vectorize(lambda gg, ee: fn(idx.n, gg, delta, ee, omega))
    return pref * vec(g, eps)


def theta_field(point, idx: BlockIndex, delta: float, omega: float = 1.0, method: str = "gaa") -> float:
    g, eps = point
    omega_nl = float(tunneling_field(g, eps, idx, delta, omega, method))
    detuning = eps - idx.l * omega
    if omega_nl == 0.0 and detuning == 0.0:
        raise DegeneracyError(f"mixing angle undefined at crossing (g={g}, eps={eps})")
    return math.atan2(omega_nl, detuning)


def complexified_block(params: ModelParams, idx: BlockIndex, method: str = "gaa") -> np.ndarray:
    shift = (idx.n + 0.5 * idx.l) * params.omega - params.g ** 2 / params.omega
    omega_nl = float(tunneling_field(params.g, params.epsilon, idx, params.delta, params.omega, method))
    h12 = 0.5 * (params.epsilon - idx.l * params.omega) - 0.5j * omega_nl
    return np.array([[shift, h12], [np.conj(h12), shift]], dtype=complex)


def _segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(a + t * ab - p))


def crossings_near(loop: LoopTrajectory, idx: BlockIndex, delta: float, omega: float = 1.0):
    """Crossings of pair ``idx`` that could matter for the loop (eps = l w line)."""
    g_hi = float(loop.points[:, 0].max())
    roots = constraints.juddian_roots(idx.n, idx.l, delta, omega, g_max=max(g_hi, 1e-12) * 1.0001)
    return [(r.g_star, idx.l * omega) for r in roots]


def check_proximity(loop: LoopTrajectory, idx: BlockIndex, delta: float, omega: float = 1.0,
                    min_distance: float = PROXIMITY, method: str = "gaa"):
    if method == "aa":
        zs = _aa_zeros(idx, float(loop.points[:, 0].max()), omega)
        cis = [(z, idx.l * omega) for z in zs]
    else:
        cis = crossings_near(loop, idx, delta, omega)
    pts = loop.points / omega
    for ci in cis:
        c = np.array(ci) / omega
        for i in range(len(pts) - 1):
            if _segment_distance(c, pts[i], pts[i + 1]) < min_distance:
                raise ProximityError(
                    f"loop passes within {min_distance} of crossing at g={ci[0]:.12g}, eps={ci[1]:.12g}", ci)
    return cis


def _aa_zeros(idx: BlockIndex, g_max: float, omega: float):
    roots, _ = constraints.scan_roots(lambda g: laguerre(idx.n, idx.l, 4.0 * g * g / omega ** 2), g_max)
    return [r for r in roots if r > 0]


def _wrap(d):
    return (d + math.pi) % (2.0 * math.pi) - math.pi


def accumulated_angle(loop: LoopTrajectory, idx: BlockIndex, delta: float, omega: float = 1.0,
                      method: str = "gaa") -> float:
    """Total change of theta along the loop, refining segments that turn by > pi/2."""
    pts = loop.points
    omega_nl = tunneling_field(pts[:, 0], pts[:, 1], idx, delta, omega, method)
    det = pts[:, 1] - idx.l * omega
    if np.any((omega_nl == 0.0) & (det == 0.0)):
        raise DegeneracyError("loop point lies exactly on a crossing")
    theta = np.arctan2(omega_nl, det)
    total = 0.0
    for i in range(len(pts) - 1):
        d = _wrap(theta[i + 1] - theta[i])
        if abs(d) > MAX_TURN:
            d = _refined_turn(pts[i], pts[i + 1], theta[i], theta[i + 1], idx, delta, omega, method, 0)
        total += d
    return total


def _refined_turn(a, b, ta, tb, idx, delta, omega, method, depth):
    if depth > MAX_REFINE_DEPTH:
        raise ProximityError(f"segment {a} -> {b} passes too close to a crossing")
    mid = 0.5 * (a + b)
    tm = theta_field(mid, idx, delta, omega, method)
    total = 0.0
    for p, q, tp, tq in ((a, mid, ta, tm), (mid, b, tm, tb)):
        d = _wrap(tq - tp)
        if abs(d) > MAX_TURN:
            d = _refined_turn(p, q, tp, tq, idx, delta, omega, method, depth + 1)
        total += d
    return total


def winding_number(loop: LoopTrajectory, idx: BlockIndex, delta: float, omega: float = 1.0,
                   method: str = "gaa", guard: bool = True) -> int:
    if guard:
        check_proximity(loop, idx, delta, omega, method=method)
    total = accumulated_angle(loop, idx, delta, omega, method)
    m = int(round(total / (2.0 * math.pi)))
    if abs(total - 2.0 * math.pi * m) > 1e-6:
        raise ResolutionError(f"accumulated angle {total} is not a multiple of 2 pi")
    return m


def _band_sign(band: str) -> int:
    if band == "plus":
        return -1
    if band == "minus":
        return 1
    raise ValueError(f"band must be 'plus' or 'minus', got {band!r}")


def berry_phase(loop: LoopTrajectory, idx: BlockIndex, band: str, delta: float, omega: float = 1.0,
                method: str = "gaa", guard: bool = True) -> BerryPhaseResult:
    """Analytic phase -m pi (upper band) or +m pi (lower band)."""
    sign = _band_sign(band)
    m = winding_number(loop, idx, delta, omega, method, guard)
    return BerryPhaseResult(n=idx.n, l=idx.l, band=band, winding=m, phase=sign * m * math.pi,
                            method="analytic_winding")


def block_state_provider(idx: BlockIndex, delta: float, omega: float = 1.0, method: str = "gaa"):
    """Eigenvectors of the complexified block by numerical diagonalisation.

    The returned callable maps ``((g, eps), band)`` to a unit 2-vector in the
    (phi_+, phi_-) basis, gauge-fixed so the phi_+ component (upper band) or the
    phi_- component (lower band) is real and positive.
    """
    def provider(point, band):
        g, eps = point
        h = complexified_block(ModelParams(delta=delta, omega=omega, g=g, epsilon=eps), idx, method)
        w, v = np.linalg.eigh(h)
        if abs(w[1] - w[0]) < 1e-14 * max(1.0, abs(w[0])):
            raise DegeneracyError(f"bands degenerate at (g={g}, eps={eps})")
        if band == "plus":
            vec = v[:, 1]
            ref = vec[0]
        else:
            vec = v[:, 0]
            ref = vec[1]
        if abs(ref) < 1e-12:
            raise DegeneracyError("gauge reference component vanishes")
        return vec * (abs(ref) / ref)

    return provider


def wilson_loop_phase(loop: LoopTrajectory, state_provider, band: str, n: int = 0, l: int = 0,
                      min_overlap: float = 0.5) -> BerryPhaseResult:
    """Discrete Berry phase -sum_k arg <psi_k|psi_{k+1}> around the loop.

    With a single-valued gauge the sum equals -arg prod_k <psi_k|psi_{k+1}>
    modulo 2 pi, and summing the small local phases keeps the +-pi branch.
    """
    _band_sign(band)
    states = [state_provider(tuple(p), band) for p in loop.points]
    total = 0.0
    for a, b in zip(states[:-1], states[1:]):
        ov = np.vdot(a, b)
        if abs(ov) < min_overlap:
            raise ResolutionError(f"overlap {abs(ov):.3g} between neighbouring loop points; refine the loop")
        total += math.atan2(ov.imag, ov.real)
    phase = -total
    m = int(round(_band_sign(band) * phase / math.pi))
    return BerryPhaseResult(n=n, l=l, band=band, winding=m, phase=phase, method="wilson_loop")


def berry_phase_wilson(loop: LoopTrajectory, idx: BlockIndex, band: str, delta: float, omega: float = 1.0,
                       method: str = "gaa") -> BerryPhaseResult:
    provider = block_state_provider(idx, delta, omega, method)
    return wilson_loop_phase(loop, provider, band, idx.n, idx.l)
