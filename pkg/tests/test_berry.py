import math

import numpy as np
import pytest

from aqrm.berry import (DegeneracyError, LoopTrajectory, ProximityError, ResolutionError, berry_phase,
                        berry_phase_wilson, complexified_block, rectangle_loop, theta_field, winding_number,
                        wilson_loop_phase, block_state_provider)
from aqrm.gaa import gaa_eigenpair, locate_cis
from aqrm.model import BlockIndex, ModelParams

PAIR = BlockIndex(2, 0)
LOOPS = {
    "blue": ((0.2, 0.5), (-0.1, 0.1), 1),
    "green": ((0.8, 1.0), (-0.1, 0.1), -1),
    "red": ((0.55, 0.7), (-0.1, 0.1), 0),
    "black": ((0.25, 1.1), (-0.15, 0.15), 0),
}
G1 = 0.3323281463907254


@pytest.mark.parametrize("name", LOOPS)
def test_reported_phases(name):
    g, e, expected = LOOPS[name]
    loop = rectangle_loop(g, e, 2000)
    res = berry_phase(loop, PAIR, "plus", 1.0)
    assert res.phase == expected * math.pi
    assert res.method == "analytic_winding"
    wil = berry_phase_wilson(loop, PAIR, "plus", 1.0)
    assert abs(wil.phase - expected * math.pi) < 1e-3 * math.pi


@pytest.mark.parametrize("method", ["aa", "gaa-kbar"])
def test_other_tunnelling_models_same_topology(method):
    # AA zeros (0.383, 0.924) sit in the same rectangles as the exact crossings
    for g, e, expected in LOOPS.values():
        res = berry_phase(rectangle_loop(g, e, 2000), PAIR, "plus", 1.0, method=method)
        assert res.phase_over_pi == expected


def test_reversal_negates_phase():
    loop = rectangle_loop((0.2, 0.5), (-0.1, 0.1), 800)
    a = berry_phase_wilson(loop, PAIR, "plus", 1.0)
    b = berry_phase_wilson(loop.reversed(), PAIR, "plus", 1.0)
    assert a.phase == pytest.approx(-b.phase, abs=1e-12)
    assert berry_phase(loop.reversed(), PAIR, "plus", 1.0).phase == -berry_phase(loop, PAIR, "plus", 1.0).phase


def test_bands_sum_to_zero():
    loop = rectangle_loop((0.8, 1.0), (-0.1, 0.1), 800)
    for fn in (berry_phase, berry_phase_wilson):
        plus, minus = fn(loop, PAIR, "plus", 1.0), fn(loop, PAIR, "minus", 1.0)
        assert plus.phase + minus.phase == pytest.approx(0.0, abs=1e-9)


def test_counterclockwise_flips_signs():
    loop = rectangle_loop((0.2, 0.5), (-0.1, 0.1), 400, orientation="counterclockwise")
    assert berry_phase(loop, PAIR, "plus", 1.0).phase == -math.pi
    assert loop.signed_area() > 0
    assert rectangle_loop((0.2, 0.5), (-0.1, 0.1), 400).signed_area() < 0


def test_theta_examples():
    # Omega vanishes at g = 0 for l >= 1; detuning eps - l w = +0.1
    assert theta_field((0.0, 1.1), BlockIndex(0, 1), 0.5) == 0.0
    # pair n=0, l=1 at eps = w has Omega < 0 for g > 0
    assert theta_field((0.3, 1.0), BlockIndex(0, 1), 0.5) == pytest.approx(-math.pi / 2)
    with pytest.raises(DegeneracyError):
        theta_field((0.0, 1.0), BlockIndex(0, 1), 0.5)


def test_small_circle_around_ci_winds_once():
    t = np.linspace(0, 2 * math.pi, 400)
    theta = np.array([theta_field((G1 + 1e-3 * math.cos(s), 1e-3 * math.sin(s)), PAIR, 1.0) for s in t])
    total = np.sum((np.diff(theta) + math.pi) % (2 * math.pi) - math.pi)
    assert abs(abs(total) - 2 * math.pi) < 1e-9


def test_complexified_block_properties():
    p = ModelParams(1.0, 1.0, 0.45, 0.07)
    h = complexified_block(p, PAIR)
    assert h[1, 0] == np.conj(h[0, 1])
    e = gaa_eigenpair(p, PAIR)
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [e.e_minus, e.e_plus], atol=1e-13)
    hc = complexified_block(ModelParams(1.0, 1.0, G1, 0.0), PAIR)
    assert abs(hc[0, 1]) < 1e-9 and hc[0, 0] == hc[1, 1]


def test_contractible_loop_has_zero_winding():
    assert winding_number(rectangle_loop((1.2, 1.5), (-0.2, 0.2), 200), PAIR, 1.0) == 0
    assert winding_number(rectangle_loop((0.2, 0.5), (0.05, 0.2), 200), PAIR, 1.0) == 0


def test_odd_even_rule():
    for g, e, _ in LOOPS.values():
        loop = rectangle_loop(g, e, 600)
        enclosed = sum(1 for ci in locate_cis(2, 0, 1.0) if loop.encloses(ci.g_star, ci.epsilon_star))
        phase = berry_phase(loop, PAIR, "plus", 1.0).phase
        assert (abs(phase) == math.pi) == (enclosed % 2 == 1)


def test_adjacent_crossings_opposite_signs():
    cis = locate_cis(3, 1, 0.8)
    assert len(cis) >= 2
    signs = []
    for ci in cis[:2]:
        loop = rectangle_loop((ci.g_star - 0.02, ci.g_star + 0.02), (0.98, 1.02), 400)
        signs.append(berry_phase(loop, BlockIndex(3, 1), "plus", 0.8).phase_over_pi)
    assert sorted(signs) == [-1, 1]


def test_proximity_guard_reports_ci():
    loop = rectangle_loop((G1, 0.5), (-0.1, 0.1), 400)
    with pytest.raises(ProximityError) as info:
        berry_phase(loop, PAIR, "plus", 1.0)
    assert info.value.ci[0] == pytest.approx(G1)


def test_wilson_flags_coarse_loop():
    loop = rectangle_loop((0.2, 0.5), (-0.1, 0.1), 4)

    def spinning(point, band):
        # state rotates by a right angle between neighbouring corners
        a = math.atan2(point[1], point[0] - 0.35)
        return np.array([math.cos(a), math.sin(a)], dtype=complex)

    with pytest.raises(ResolutionError):
        wilson_loop_phase(loop, spinning, "plus")


def test_wilson_is_gauge_invariant():
    loop = rectangle_loop((0.2, 0.5), (-0.1, 0.1), 600)
    base = block_state_provider(PAIR, 1.0)
    rng = np.random.default_rng(7)
    cache = {}

    def regauged(point, band):
        phase = cache.setdefault(point, np.exp(1j * rng.uniform(0, 2 * math.pi)))
        return base(point, band) * phase

    ref = wilson_loop_phase(loop, base, "plus").phase
    got = wilson_loop_phase(loop, regauged, "plus").phase
    # arbitrary pointwise phases cancel around the closed product
    assert (got - ref + math.pi) % (2 * math.pi) - math.pi == pytest.approx(0.0, abs=1e-9)


def test_loop_validation():
    with pytest.raises(ValueError):
        rectangle_loop((0.5, 0.2), (-0.1, 0.1))
    with pytest.raises(ValueError):
        LoopTrajectory(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]), "clockwise", 4)
    with pytest.raises(ValueError):
        berry_phase(rectangle_loop((0.2, 0.5), (-0.1, 0.1), 100), PAIR, "up", 1.0)
