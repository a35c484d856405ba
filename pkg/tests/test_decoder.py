import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prespa.codes import CARDINAL_STATES, EXPERIMENTAL, OPTIMAL, LogicalAmplitudes, encode
from prespa.decoder import (CARDINAL_ORDER, DecodedQubit, DecodingBasis, decode_density, decode_mixture,
                            decoding_angles, decoding_unitary, fit_decay, process_fidelity,
                            state_fidelity, subspace_decompose)
from prespa.dissipator import JumpProcess, trajectory_mixture, trajectory_state
from prespa.errors import FitError, InvalidInput, LeakageError
from prespa.experiments.lifetime import free_fock_process, lifetime_experiment
from prespa.opensystem import MasterEqProblem, ideal_prespa_noise, lindblad_evolve
from prespa.qalg import partial_trace

DIM = 12


def test_subspace_decompose():
    z = encode(EXPERIMENTAL, CARDINAL_STATES["pZ"], DIM)
    d = subspace_decompose(z, CARDINAL_STATES["pZ"])
    assert d.n15 == pytest.approx(1) and d.n37 == 0
    leak = z.copy()
    leak[2] = 0.1
    with pytest.raises(LeakageError):
        subspace_decompose(leak)


@pytest.mark.parametrize("kt", [0.05, 0.1, 0.2])
def test_optimal_weights_second_order(kt):
    jp = JumpProcess.prespa(DIM, 1.0)
    xy = CARDINAL_STATES["pX"]
    psi = trajectory_state(encode(OPTIMAL, xy, DIM), 0, kt, jp)
    d = subspace_decompose(psi, xy)
    assert abs(d.n15 - 1) <= 0.5 * kt ** 2 and abs(d.n37 - 1) <= 0.5 * kt ** 2


def test_experimental_weights_closed_form():
    kt = 0.2
    jp = JumpProcess.prespa(DIM, 1.0)
    xy = CARDINAL_STATES["pX"]
    psi = trajectory_state(encode(EXPERIMENTAL, xy, DIM), 0, kt, jp)
    d = subspace_decompose(psi, xy)
    c1, c3, c5, c7 = EXPERIMENTAL.as_array()
    w15 = c1 ** 2 * np.exp(-kt) + c5 ** 2 * np.exp(-5 * kt)
    w37 = c3 ** 2 * np.exp(-3 * kt) + c7 ** 2 * np.exp(-7 * kt)
    norm = np.sqrt(0.5 * (w15 + w37))
    assert d.n15 == pytest.approx(np.sqrt(w15) / norm, rel=1e-12)
    assert d.n37 == pytest.approx(np.sqrt(w37) / norm, rel=1e-12)


def test_decoding_angles():
    assert decoding_angles(EXPERIMENTAL, 0, 0.0) == pytest.approx((0, 0), abs=1e-15)
    # expanding tan(theta) and tan(phi) for the optimal words gives
    # theta - phi = -(sqrt(3)/2) (kappa t)^2 + O((kappa t)^3)
    for kt in (0.0125, 0.05, 0.1, 0.2):
        th, ph = decoding_angles(OPTIMAL, 0, kt)
        coeff = (th - ph) / kt ** 2
        assert coeff == pytest.approx(-np.sqrt(3) / 2, abs=2 * kt)
    # j = 1, kt = 0.1 from explicit inner products with the code words
    jp = JumpProcess.prespa(DIM, 1.0)
    th, ph = decoding_angles(EXPERIMENTAL, 1, 0.1)
    for key, ang, word in (("pZ", th, 0), ("mZ", ph, 1)):
        w = encode(EXPERIMENTAL, CARDINAL_STATES[key], DIM)
        s = trajectory_state(w, 1, 0.1, jp)
        assert np.cos(ang) == pytest.approx(abs(np.vdot(w, s)), abs=1e-12)


def test_fidelity_metrics():
    xy = CARDINAL_STATES["pX"]
    psi = xy.ket()
    assert state_fidelity(DecodedQubit(np.outer(psi, psi.conj())), xy) == pytest.approx(1)
    orth = CARDINAL_STATES["mX"].ket()
    assert state_fidelity(DecodedQubit(np.outer(orth, orth.conj())), xy) == pytest.approx(0, abs=1e-15)
    assert state_fidelity(DecodedQubit(np.eye(2) / 2), xy) == pytest.approx(0.5)
    assert process_fidelity([1] * 6) == 1
    assert process_fidelity([0.5] * 6) == 0.25
    assert process_fidelity([0.75] * 6) == pytest.approx(0.625)
    with pytest.raises(InvalidInput):
        process_fidelity([1] * 5)


def test_decode_mixture_basics():
    jp = JumpProcess.prespa(DIM, 1.0)
    basis = DecodingBasis.from_codewords(EXPERIMENTAL, DIM)
    for key in CARDINAL_ORDER:
        xy = CARDINAL_STATES[key]
        mix = trajectory_mixture(encode(EXPERIMENTAL, xy, DIM), 0.0, 20, jp)
        assert state_fidelity(decode_mixture(mix, basis), xy) == pytest.approx(1, abs=1e-12)
    for kt in (0.1, 0.5, 1.0):
        mix = trajectory_mixture(encode(EXPERIMENTAL, CARDINAL_STATES["pZ"], DIM), kt, 20, jp)
        rq = decode_mixture(mix, basis).rho_q
        assert rq[0, 0].real == pytest.approx(1, abs=1e-12) and abs(rq[0, 1]) < 1e-12


def test_plus_x_coherence_against_full_hilbert():
    jp = JumpProcess.prespa(DIM, 1.0)
    basis = DecodingBasis.from_codewords(OPTIMAL, DIM)
    psi = encode(OPTIMAL, CARDINAL_STATES["pX"], DIM)
    rq = decode_mixture(trajectory_mixture(psi, 0.3, 20, jp), basis).rho_q
    rho = lindblad_evolve(MasterEqProblem(np.zeros((DIM, DIM)), ideal_prespa_noise(DIM, 1.0),
                                          np.outer(psi, psi.conj()), [0.0, 0.3]))[-1]
    U = decoding_unitary(basis)
    g = np.array([[1, 0], [0, 0]])
    full = U @ np.kron(rho, g) @ U.conj().T
    ref = partial_trace(full, (DIM, 2), [1])
    assert abs(rq[0, 1]) == pytest.approx(abs(ref[0, 1]), abs=1e-8)
    assert np.allclose(rq, ref, atol=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi), st.floats(0, 1.5), st.sampled_from([EXPERIMENTAL, OPTIMAL]))
def test_full_unitary_oracle_and_positivity(theta, phi, kt, cw):
    jp = JumpProcess.prespa(DIM, 1.0)
    basis = DecodingBasis.from_codewords(cw, DIM)
    xy = LogicalAmplitudes(np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2))
    mix = trajectory_mixture(encode(cw, xy, DIM), kt, 30, jp)
    rq = decode_mixture(mix, basis).rho_q
    assert np.linalg.eigvalsh(rq).min() >= -1e-10
    for completion in ("g_first", "e_first"):
        U = decoding_unitary(basis, completion)
        assert np.allclose(U.conj().T @ U, np.eye(2 * DIM), atol=1e-12)
        assert np.allclose(decode_density(mix.density(), basis, completion).rho_q, rq, atol=1e-8)


def test_pole_states_protected_with_optimal_code():
    jp = JumpProcess.prespa(DIM, 1.0)
    basis = DecodingBasis.from_codewords(OPTIMAL, DIM)
    for key in ("pZ", "mZ"):
        xy = CARDINAL_STATES[key]
        for kt in np.linspace(0, 1, 6):
            mix = trajectory_mixture(encode(OPTIMAL, xy, DIM), kt, 20, jp)
            assert state_fidelity(decode_mixture(mix, basis), xy) >= 1 - mix.deficit - 1e-12


def test_fit_decay_round_trip():
    t = np.linspace(0, 1000, 21)
    A, tau = fit_decay(t, 0.25 + 0.75 * np.exp(-t / 288.0))
    assert A == pytest.approx(0.75, abs=1e-6) and tau == pytest.approx(288, abs=1e-6)
    with pytest.raises(InvalidInput):
        fit_decay(t[:3], t[:3])


def test_fit_decay_rejects_bad_data():
    t = np.linspace(0, 10, 20)
    with pytest.raises(FitError):
        fit_decay(t, 0.25 + 0.5 * np.sin(3 * t) ** 2)


def test_free_fock_tau_matches_amplitude_damping():
    t = np.linspace(0, 2000, 21)
    res = lifetime_experiment("free-fock", t)
    assert np.allclose(res.process, free_fock_process(t, 520.0), atol=1e-8)
    _, tau_ref = fit_decay(t, free_fock_process(t, 520.0))
    assert res.tau() == pytest.approx(tau_ref, rel=0.02)


def test_ideal_prespa_tau_about_5ms():
    res = lifetime_experiment("ideal-prespa", np.linspace(0, 2000, 21), dim=DIM)
    assert 3750 <= res.tau() <= 6250
