import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prespa.circuitmodel import DeviceParams, PrespaDrive, prespa_hamiltonian
from prespa.codes import CARDINAL_STATES, EXPERIMENTAL, LogicalAmplitudes, encode
from prespa.dissipator import JumpProcess, averaged_density, monte_carlo_unravel
from prespa.errors import FitError, InvalidDimension, InvalidInput, NonUniqueSteadyState
from prespa.opensystem import (MasterEqProblem, NoiseModel, conversion_halftime, device_noise,
                               heating_rate_estimate, heating_scan, heating_steady_state,
                               ideal_prespa_noise, lindblad_evolve, liouvillian,
                               raman_fit, raman_path_populations, steady_state)
from prespa.qalg import HilbertSpace, expm, fock_operators, trace_distance

P = DeviceParams()
DIM = 12


def _random_herm(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (A + A.conj().T)


def _random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def test_noise_model_validation_and_helpers():
    a = fock_operators(3)[0]
    with pytest.raises(InvalidInput):
        NoiseModel((("x", a, -1.0),))
    nm = NoiseModel((("x", a, 2.0), ("y", a.T, 0.0)))
    assert len(nm.collapse_ops()) == 1
    assert nm.without("x").names == ("y",)
    assert nm.scaled(x=0.5).channels[0][2] == 1.0
    assert (nm + nm).names == ("x", "y", "x", "y")
    with pytest.raises(InvalidDimension):
        MasterEqProblem(np.zeros((3, 3)), nm, np.zeros((2, 2)))


def test_amplitude_damping():
    a = fock_operators(2)[0]
    t = np.linspace(0, 3, 7)
    rho0 = np.diag([0, 1.0]).astype(complex)
    rhos = lindblad_evolve(MasterEqProblem(np.zeros((2, 2)), NoiseModel((("decay", a, 0.8),)), rho0, t))
    assert np.allclose(rhos[:, 1, 1].real, np.exp(-0.8 * t), atol=1e-8)


def test_prespa_channel_matches_analytic_mixture():
    jp = JumpProcess.prespa(DIM, 1.0)
    for key in ("pX", "mY"):
        psi = encode(EXPERIMENTAL, CARDINAL_STATES[key], DIM)
        rho = lindblad_evolve(MasterEqProblem(np.zeros((DIM, DIM)), ideal_prespa_noise(DIM, 1.0),
                                              np.outer(psi, psi.conj()), [0.0, 0.3]))[-1]
        mix, _ = averaged_density(psi, 0.3, 20, jp)
        assert trace_distance(rho, mix) <= 1e-6


def test_conversion_halftime_about_8us():
    assert conversion_halftime(P, PrespaDrive.uniform()) == pytest.approx(8.0, rel=0.3)


def test_steady_state_pure_decay_is_vacuum():
    a = fock_operators(5)[0]
    rho = steady_state(np.zeros((5, 5)), NoiseModel((("decay", a, 1.0),)))
    assert rho[0, 0].real == pytest.approx(1, abs=1e-10)


def test_steady_state_non_unique():
    with pytest.raises(NonUniqueSteadyState):
        steady_state(np.zeros((3, 3)), NoiseModel())


def test_prespa_steady_state_is_odd():
    sp = HilbertSpace((8, 2, 2))
    H = prespa_hamiltonian(P, sp, PrespaDrive.uniform())
    nm = device_noise(P, sp, heating=False)
    rho = steady_state(H, nm)
    pops = np.einsum("ii->i", rho).real.reshape(sp.dims).sum(axis=(1, 2))
    assert pops[1::2].sum() >= 0.95
    L = liouvillian(H, nm)
    assert np.abs(L @ rho.reshape(-1)).max() <= 1e-10


def test_heating_detailed_balance():
    # single mixing tone, gamma_up = 1.4 /ms, 1/T1A = 1.8 /ms: deep in the
    # plateau the vacuum escape rate is gamma_up, so P1/P0 -> gamma_up T1A
    p = DeviceParams(t1_cavity_us=1e3 / 1.8)
    sp, rho = heating_steady_state(400.0, p)
    pops = np.einsum("ii->i", rho).real.reshape(sp.dims).sum(axis=(1, 2))
    ratio = pops[1] / pops[0]
    assert ratio == pytest.approx(1.4 / 1.8, rel=0.05)
    # and the bottlenecked rate-equation value through the whole range
    for om in (20.0, 90.0, 400.0):
        est = heating_rate_estimate(om, p) * p.t1_cavity_us
        assert heating_scan([om], p)[0] * p.t1_cavity_us == pytest.approx(est, rel=0.06)


def test_heating_scan_shape():
    oms = [0.0, 5.0, 10.0, 20.0, 40.0, 80.0, 300.0]
    g = heating_scan(oms, P)
    assert g[0] == 0
    assert np.all(np.diff(g) > 0)
    assert g[-1] == pytest.approx(P.gamma_up(False), rel=0.06)
    assert np.all(g[1:-1] < P.gamma_up(False))


def test_raman_fit_round_trip():
    t = np.linspace(0, 30, 31)
    for om, lam in ((90.0, 28.0), (92.0, 28.0)):
        pe, pt = raman_path_populations(om, lam, t, P)
        fit = raman_fit(t, pe, pt, P)
        assert fit.omega_khz == pytest.approx(om, rel=0.05)
        assert fit.lam_khz == pytest.approx(lam, rel=0.05)
        assert fit.scale == pytest.approx(1, rel=0.05)


def test_raman_fit_zero_lambda():
    t = np.linspace(0, 30, 31)
    pe, pt = raman_path_populations(90.0, 0.0, t, P)
    assert np.allclose(pe, 0) and np.allclose(pt, 0)
    fit = raman_fit(t, pe, pt, P)
    assert fit.lam_khz * fit.scale < 0.5


def test_raman_fit_rejects_unrelated_curves():
    t = np.linspace(0, 30, 31)
    with pytest.raises(FitError):
        raman_fit(t, 0.5 + 0.5 * np.cos(t), 0.5 - 0.5 * np.cos(t), P)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_evolution_preserves_density_properties(seed):
    rng = np.random.default_rng(seed)
    d = 4
    H = _random_herm(rng, d)
    ops = [("c%d" % k, rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)), rng.uniform(0, 0.5))
           for k in range(2)]
    psi = _random_state(rng, d)
    rhos = lindblad_evolve(MasterEqProblem(H, NoiseModel(tuple(ops)), np.outer(psi, psi.conj()),
                                           np.linspace(0, 2, 5)))
    for r in rhos:
        assert abs(np.trace(r) - 1) <= 1e-8
        assert np.allclose(r, r.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() >= -1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_zero_rates_match_unitary(seed):
    rng = np.random.default_rng(seed)
    d = 5
    H = _random_herm(rng, d)
    psi = _random_state(rng, d)
    t = np.linspace(0, 1.5, 4)
    nm = NoiseModel((("off", fock_operators(d)[0], 0.0),))
    rhos = lindblad_evolve(MasterEqProblem(H, nm, np.outer(psi, psi.conj()), t))
    for tk, r in zip(t, rhos):
        v = expm(-1j * H * tk) @ psi
        assert np.abs(r - np.outer(v, v.conj())).max() <= 1e-8


def test_expm_method_matches_rk45():
    rng = np.random.default_rng(4)
    d = 4
    H = _random_herm(rng, d)
    nm = NoiseModel((("c", fock_operators(d)[0], 0.3),))
    psi = _random_state(rng, d)
    prob = MasterEqProblem(H, nm, np.outer(psi, psi.conj()), np.linspace(0, 2, 9))
    assert np.allclose(lindblad_evolve(prob), lindblad_evolve(prob, method="expm"), atol=1e-8)
    with pytest.raises(InvalidInput):
        lindblad_evolve(MasterEqProblem(H, nm, prob.rho0, [0, 1, 3]), method="expm")


def test_monte_carlo_agrees_with_lindblad():
    jp = JumpProcess.prespa(DIM, 1.0)
    xy = LogicalAmplitudes(np.cos(0.4), np.exp(0.7j) * np.sin(0.4))
    psi = encode(EXPERIMENTAL, xy, DIM)
    ntraj = 2000
    mc = monte_carlo_unravel(psi, 0.5, ntraj, 21, jp)
    rho = lindblad_evolve(MasterEqProblem(np.zeros((DIM, DIM)), ideal_prespa_noise(DIM, 1.0),
                                          np.outer(psi, psi.conj()), [0.0, 0.5]))[-1]
    assert trace_distance(mc.density(), rho) <= 5 / np.sqrt(ntraj)
