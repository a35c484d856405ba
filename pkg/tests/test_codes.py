import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prespa.codes import (CARDINAL_STATES, EXPERIMENTAL, OPTIMAL, CatParams, CodeWords,
                          LogicalAmplitudes, cat_state, cavity_moments, encode, optimal_codewords,
                          t4c_words)
from prespa.errors import InvalidDimension, InvalidInput
from prespa.qalg import fock_operators


def moments(psi):
    n = np.arange(len(psi))
    p = abs(psi) ** 2
    return p @ n, p @ n ** 2


def test_experimental_word_moments():
    z, o = t4c_words(EXPERIMENTAL, 10)
    assert moments(z) == pytest.approx((3.6, 16.6), abs=1e-12)
    assert moments(o) == pytest.approx((3.4, 13.0), abs=1e-12)
    assert np.vdot(z, o) == 0


def test_words_need_eight_levels():
    with pytest.raises(InvalidDimension):
        t4c_words(EXPERIMENTAL, 7)


def test_optimal_codewords():
    cw = optimal_codewords()
    assert np.allclose(cw.as_array(), [0.5, np.sqrt(3) / 2, np.sqrt(3) / 2, 0.5], atol=1e-15)
    assert cavity_moments(cw) == pytest.approx((4, 4, 19, 19), abs=1e-12)


def test_moments_table():
    assert cavity_moments(EXPERIMENTAL) == pytest.approx((3.6, 3.4, 16.6, 13), abs=1e-12)
    assert cavity_moments(CodeWords(1.0, 1.0, 0.0, 0.0)) \
        == pytest.approx((1, 3, 1, 9))


def test_codewords_validation():
    with pytest.raises(InvalidInput):
        CodeWords(0.5, 0.5, 0.5, 0.5)
    with pytest.raises(InvalidInput):
        CodeWords(-1.0, 1.0, 0.0, 0.0)
    with pytest.raises(InvalidInput):
        LogicalAmplitudes(1.0, 1.0)


def test_encode_examples():
    dim = 10
    z, _ = t4c_words(EXPERIMENTAL, dim)
    assert np.allclose(encode(EXPERIMENTAL, CARDINAL_STATES["pZ"], dim), z)
    par = fock_operators(dim)[3]
    psi = encode(EXPERIMENTAL, CARDINAL_STATES["pX"], dim)
    assert np.vdot(psi, par @ psi).real == pytest.approx(-1)
    psi = encode(EXPERIMENTAL, CARDINAL_STATES["pY"], dim)
    assert moments(psi)[0] == pytest.approx(3.5, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_encode_normalized(theta, phi):
    xy = LogicalAmplitudes(np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2))
    for cw in (EXPERIMENTAL, OPTIMAL):
        assert abs(np.linalg.norm(encode(cw, xy, 12)) - 1) < 1e-12


def test_odd_cat_support_and_limit():
    psi = cat_state(CatParams(1.3, 1), 24)
    assert np.allclose(psi[0::2], 0)
    small = cat_state(CatParams(1e-4, 1), 10)
    assert abs(abs(small[1]) - 1) < 1e-7


def test_cat_overlap():
    # frozen from a brute-force sum of coherent-state Fock series on 80 levels;
    # equals 2 e^{-x} abs(sin x) / (1 - e^{-2x}) at x = 3.5
    a = np.sqrt(3.5)
    ov = abs(np.vdot(cat_state(CatParams(1j * a, 1), 40), cat_state(CatParams(a, 1), 40)))
    assert ov == pytest.approx(0.0212048075308944, abs=1e-12)
    x = 3.5
    assert ov == pytest.approx(2 * np.exp(-x) * abs(np.sin(x)) / (1 - np.exp(-2 * x)), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.5), st.floats(0, 2 * np.pi), st.sampled_from([1, -1]))
def test_cat_parity(r, th, sign):
    psi = cat_state(CatParams(r * np.exp(1j * th), sign), 24)
    par = fock_operators(24)[3]
    assert abs(np.vdot(psi, par @ psi).real + sign) < 1e-10
