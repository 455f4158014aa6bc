import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqrm.adiabatic import aa_tunneling, spectrum_aa
from aqrm.exactdiag import TruncationConfig, converged_spectrum, level_gap
from aqrm.gaa import (ValidityWarning, effective_hamiltonian, gaa_eigenpair, gaa_tunneling, locate_cis,
                      spectrum_gaa)
from aqrm.model import BlockIndex, ModelParams

G1, G2 = 0.3323281463907254, 0.8920807155836832  # n=2, l=0, D=1 (quadratic formula in g^2)


def test_tunneling_examples():
    assert gaa_tunneling(ModelParams(1, 1, 0, 0), BlockIndex(2, 0)) == pytest.approx(45 / 64, rel=1e-15)
    assert abs(gaa_tunneling(ModelParams(1, 1, G1, 0), BlockIndex(2, 0))) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.integers(0, 3), st.floats(0.05, 1.5))
def test_small_delta_ratio_to_aa(n, l, g):
    p = ModelParams(1e-7, 1.0, g, float(l))
    aa = aa_tunneling(p, BlockIndex(n, l))
    if abs(aa) < 1e-12:
        return
    assert gaa_tunneling(p, BlockIndex(n, l)) / aa == pytest.approx(1.0, abs=1e-6)


def test_eigenpair_at_juddian_point():
    g = math.sqrt(1.9775) / 2
    e = gaa_eigenpair(ModelParams(0.3, 1.0, g, 1.0), BlockIndex(1, 1))
    assert e.e_plus == pytest.approx(1.005625, abs=1e-12)
    assert e.e_minus == pytest.approx(1.005625, abs=1e-12)
    assert e.method == "gaa"


def test_delta_zero_paired_energies():
    e = gaa_eigenpair(ModelParams(0.0, 1.0, 0.4, 2.3), BlockIndex(3, 2))
    assert (e.e_plus, e.e_minus) == pytest.approx((4 - 0.16 + 0.15, 4 - 0.16 - 0.15))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2), st.floats(0, 1.5), st.floats(-2.5, 2.5), st.integers(0, 5))
def test_amplitudes_normalized_and_effective_hamiltonian(delta, g, eps, n):
    p = ModelParams(delta, 1.0, g, eps)
    idx = BlockIndex(n, p.bias_index)
    e = gaa_eigenpair(p, idx)
    c, s = e.amplitudes("plus")
    assert c * c + s * s == pytest.approx(1.0)
    shift, m = effective_hamiltonian(p, idx)
    assert np.trace(m) == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(shift + np.linalg.eigvalsh(m), [e.e_minus, e.e_plus], atol=1e-12)


def test_effective_hamiltonian_at_ci_and_delta_zero():
    shift, m = effective_hamiltonian(ModelParams(1.0, 1.0, G1, 0.0), BlockIndex(2, 0))
    assert shift == pytest.approx(2 - G1 ** 2)
    assert np.abs(m).max() < 1e-9
    shift, m = effective_hamiltonian(ModelParams(0.0, 1.0, 0.5, 1.0), BlockIndex(1, 1))
    assert np.array_equal(m, np.zeros((2, 2)))


def test_locate_cis_examples():
    cis = locate_cis(2, 0, 1.0)
    assert [c.g_star for c in cis] == pytest.approx([G1, G2], abs=1e-11)
    assert all(c.rescaled_energy == pytest.approx(2.0, abs=1e-14) and c.epsilon_star == 0 for c in cis)
    assert locate_cis(0, 3, 0.8) == []
    (ci,) = locate_cis(1, 1, 0.3)
    assert ci.rescaled_energy == pytest.approx(1.5, abs=1e-14)
    assert ci.rescaled_energy == pytest.approx(ci.energy + ci.g_star ** 2)


@pytest.mark.parametrize("n, l, delta", [(2, 0, 1.0), (3, 1, 0.7), (1, 2, 1.2)])
def test_cis_are_exact_crossings(n, l, delta):
    cis = locate_cis(n, l, delta, certify=True)
    assert cis
    for ci in cis:
        gap = level_gap(ModelParams(delta, 1.0, ci.g_star, ci.epsilon_star), BlockIndex(n, l),
                        TruncationConfig(k_levels=2 * n + l + 2, tol=1e-10))
        assert gap < 1e-6


def test_kbar_mode_keeps_crossings():
    for g in (G1, G2):
        assert abs(gaa_tunneling(ModelParams(1, 1, g, 0), BlockIndex(2, 0), kbar=True)) < 1e-9
    e = gaa_eigenpair(ModelParams(1, 1, 0.6, 0), BlockIndex(2, 0), kbar=True)
    assert e.method == "gaa-kbar" and e.gap > 0


def test_validity_warning():
    with pytest.warns(ValidityWarning):
        res = spectrum_gaa(ModelParams(0.5, 1.0, 0.3, 0.4), 6)
    assert "validity" in res.diagnostics
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spectrum_gaa(ModelParams(0.5, 1.0, 0.3, 1.1), 6)


def test_spectrum_sorted_and_delta_zero_exact():
    res = spectrum_gaa(ModelParams(0.0, 1.0, 0.8, 1.0), 10)
    expected = sorted(n - 0.64 + s * 0.5 for n in range(12) for s in (-1, 1))[:10]
    np.testing.assert_allclose(res.energies, expected, atol=1e-14)
    res = spectrum_gaa(ModelParams(0.9, 1.0, 1.1, 2.0), 12)
    assert np.all(np.diff(res.energies) >= 0)


def test_gaa_closer_to_exact_near_roots():
    # crossing-bearing pair n=1, l=1 at D=0.5, eps=1 around its root
    g_star = locate_cis(1, 1, 0.5)[0].g_star
    gaa_err, aa_err = 0.0, 0.0
    for g in np.linspace(g_star - 0.05, g_star + 0.05, 11):
        p = ModelParams(0.5, 1.0, g, 1.0)
        ex = converged_spectrum(p, TruncationConfig(k_levels=5, tol=1e-9)).energies[3:5]
        gaa_err = max(gaa_err, np.abs(spectrum_gaa(p, 5).energies[3:5] - ex).max())
        aa_err = max(aa_err, np.abs(spectrum_aa(p, 5).energies[3:5] - ex).max())
    assert gaa_err <= aa_err
