import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prespa.circuitmodel import (KHZ, MHZ, XI_CALIBRATED, CombConfig, DeviceParams, PrespaDrive,
                                 calibrate_comb, comb_frequencies, dispersive_hamiltonian,
                                 drive_hamiltonian, mixing_rates, optimal_comb, prespa_hamiltonian,
                                 stark_shift, transmon_rates)
from prespa.errors import InvalidDimension, InvalidInput
from prespa.qalg import HilbertSpace

P = DeviceParams()


def test_device_params():
    assert P.reservoir_consistency() < 0.05
    with pytest.raises(InvalidInput):
        DeviceParams(t1_cavity_us=-1)
    with pytest.raises(InvalidInput):
        DeviceParams(t2_transmon_us=100.0)


def test_dispersive_levels():
    sp = HilbertSpace((6, 2))
    H = np.diag(dispersive_hamiltonian(P, sp)).real
    n = np.arange(6)
    g = H[[sp.index(k, 0) for k in n]]
    e = H[[sp.index(k, 1) for k in n]]
    assert np.allclose(np.diff(g), -KHZ * P.kerr_khz * n[:-1])
    kerr = -0.5 * KHZ * P.kerr_khz * n * (n - 1)
    assert np.allclose(e - kerr, -MHZ * P.chi_q_mhz * n - 0.5 * KHZ * P.chi_q_prime_khz * n * (n - 1))
    # e-g gap steps by chi_q per photon when chi' = 0
    p0 = DeviceParams(chi_q_prime_khz=0.0)
    H0 = np.diag(dispersive_hamiltonian(p0, sp)).real
    gap = H0[[sp.index(k, 1) for k in n]] - H0[[sp.index(k, 0) for k in n]]
    assert np.allclose(np.diff(gap) / MHZ, -1.313)
    with pytest.raises(InvalidDimension):
        dispersive_hamiltonian(P, HilbertSpace((6,)))


def test_drive_hamiltonian():
    sp = HilbertSpace((8, 2, 2))
    H = drive_hamiltonian(28.0, 90.0, sp)
    assert np.allclose(H, H.conj().T)
    for n in range(4):
        assert H[sp.index(2 * n, 1, 0), sp.index(2 * n, 0, 0)] == pytest.approx(KHZ * 28.0)
        assert H[sp.index(2 * n + 1, 0, 1), sp.index(2 * n, 1, 0)] == pytest.approx(KHZ * 90.0)
    H0 = drive_hamiltonian(0.0, 90.0, sp)
    nz = np.argwhere(np.abs(H0) > 0)
    for i, j in nz:
        levels = {np.unravel_index(i, sp.dims)[2], np.unravel_index(j, sp.dims)[2]}
        assert levels == {0, 1}


def test_drive_parity_symmetry():
    # each Raman term moves one photon between cavity and reservoir and
    # flips the transmon, so the parity of n_A + n_r is conserved
    sp = HilbertSpace((8, 2, 2))
    H = drive_hamiltonian(np.array([28, 27, 26, 25.0]), np.array([90, 88, 87, 85.0]), sp)
    levels = np.array(np.unravel_index(np.arange(sp.total), sp.dims))
    par = np.diag((-1.0) ** (levels[0] + levels[2]))
    assert np.abs(H @ par - par @ H).max() < 1e-12


def test_table_s2_mixing_rates():
    comb, _ = calibrate_comb()
    om = mixing_rates(comb)
    target = np.array([-125, 127, 127, 124])
    assert np.all(np.abs(om.real - target) <= 0.05 * np.abs(target))
    assert np.all(np.abs(om.imag) < 1e-9 * np.abs(om))
    assert om[0].real < 0 and comb.xi[0].real < 0


def test_table_s2_transmon_rates():
    comb, _ = calibrate_comb()
    lam = transmon_rates(comb)
    target = np.array([-27 * np.exp(-0.37j), 28 * np.exp(0.04j), 28 * np.exp(0.07j), 27 * np.exp(-0.34j)])
    assert np.all(np.abs(np.abs(lam) - np.abs(target)) <= 0.05 * np.abs(target))
    assert np.all(np.abs(np.angle(lam / target)) <= 0.05)


def test_rate_limits():
    zero = CombConfig(xi=(0, 0, 0, 0), lambda_bare_khz=(1, 2j, 3, 4), prefactor_mix_khz=3.0)
    assert np.allclose(mixing_rates(zero), 0)
    assert np.allclose(transmon_rates(zero), [1, 2j, 3, 4])
    for n in range(4):
        xi = [0, 0, 0, 0]
        xi[n] = 0.05 * np.exp(0.3j)
        c = CombConfig(xi=tuple(xi), prefactor_mix_khz=2.0)
        om = mixing_rates(c)
        expect = np.zeros(4, dtype=complex)
        expect[n] = -2.0 * np.sqrt(2 * n + 1) * xi[n]
        assert np.allclose(om, expect, atol=1e-15)
        lam = [0j] * 4
        lam[n] = 1.0
        assert np.count_nonzero(np.abs(transmon_rates(CombConfig(xi=(0, 0, 0, 0), lambda_bare_khz=tuple(lam))))) == 1
    with pytest.raises(InvalidInput):
        CombConfig(xi=(0.3, 0, 0, 0))
    with pytest.raises(InvalidInput):
        CombConfig(eta_mhz=0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10), st.lists(st.complex_numbers(max_magnitude=0.1), min_size=4, max_size=4))
def test_mixing_rates_linear_in_prefactor(k, xi):
    c = CombConfig(xi=tuple(xi), prefactor_mix_khz=1.0)
    ck = CombConfig(xi=tuple(xi), prefactor_mix_khz=k)
    assert np.allclose(mixing_rates(ck), k * mixing_rates(c), rtol=1e-12, atol=1e-15)


def test_stark_shift():
    assert stark_shift(0, P) == 0
    assert stark_shift(0.058, P) == pytest.approx(2 * 201.22 * 0.058 ** 2, abs=1e-12)
    assert stark_shift(0.058, P) == pytest.approx(1.354, abs=1e-3)
    total = sum(stark_shift(x, P) for x in XI_CALIBRATED)
    assert 2.9 / 1.5 <= total <= 2.9 * 1.5


def test_comb_zero_residual():
    p = DeviceParams(chi_q_prime_khz=0.0, kerr_khz=0.0)
    res = comb_frequencies(p, 2 * p.chi_q_mhz, 0.0)
    assert np.allclose(res.transmon_khz, 0) and np.allclose(res.mixing_khz, 0)


def _grid_minimax(p, eta=None):
    # brute-force oracle over (eta, delta) on a fine grid
    etas = [eta] if eta is not None else np.linspace(2.60, 2.70, 1001)
    best = np.inf
    for e in etas:
        d = np.linspace(-0.1, 0.1, 2001)
        n = np.arange(4)
        q = 2 * n * 1e3 * p.chi_q_mhz + p.chi_q_prime_khz * n * (2 * n - 1)
        eps = 1e3 * d[:, None] - 1e3 * e * n[None, :] + q[None, :]
        best = min(best, np.abs(eps).max(axis=1).min())
    return best


def test_optimal_comb_against_grid():
    eta, delta, res = optimal_comb(P)
    tmax = np.abs(res.transmon_khz).max()
    assert tmax == pytest.approx(_grid_minimax(P), abs=0.1)
    # the residual of a quadratic sequence after an affine fit equioscillates
    s = np.sign(res.transmon_khz)
    assert list(s) in ([1, -1, -1, 1], [-1, 1, 1, -1])
    assert np.allclose(np.abs(res.transmon_khz), tmax, atol=1e-6)


def test_optimal_comb_residual_size():
    # the transmon transitions have second difference 4 chi' = 22 kHz, i.e.
    # 11 n^2 plus a linear part; the best line through 11 n^2 on n = 0..3
    # leaves +-11 kHz
    _, _, res = optimal_comb(P)
    assert np.abs(res.transmon_khz).max() == pytest.approx(11.0, abs=1e-6)
    _, _, fixed = optimal_comb(P, eta_mhz=2.679)
    assert np.abs(fixed.transmon_khz).max() == pytest.approx(_grid_minimax(P, 2.679), abs=0.1)


@settings(max_examples=25, deadline=None)
@given(st.floats(2.0, 3.0), st.floats(-1, 1), st.floats(-50, 50))
def test_comb_offset_invariance(eta, delta, off):
    a = comb_frequencies(P, eta, delta)
    b = comb_frequencies(P, eta, delta, offset_mhz=off)
    assert np.allclose(a.transmon_khz, b.transmon_khz, atol=1e-6)
    assert np.allclose(a.mixing_khz, b.mixing_khz, atol=1e-6)


def test_prespa_hamiltonian_hermitian():
    sp = HilbertSpace((9, 2, 2))
    for spurious in (True, False):
        H = prespa_hamiltonian(P, sp, PrespaDrive.uniform(spurious=spurious))
        assert np.allclose(H, H.conj().T)
