"""Logical-qubit storage experiment: fidelity of the six cardinal states versus time."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..circuitmodel import DeviceParams, PrespaDrive, prespa_hamiltonian
from ..codes import CARDINAL_STATES, EXPERIMENTAL, OPTIMAL, encode
from ..decoder import (CARDINAL_ORDER, DecodedQubit, DecodingBasis, decode_density,
                       decode_mixture, fit_decay, process_fidelity, state_fidelity)
from ..dissipator import JumpProcess, trajectory_mixture
from ..errors import FitError, InvalidInput
from ..opensystem import MasterEqProblem, NoiseModel, device_noise, lindblad_evolve, liouvillian
from ..qalg import HilbertSpace, expm, fock_operators, partial_trace

MODES = ("free", "free-fock", "ideal-prespa", "full", "full-idle")


@dataclass
class LifetimeResult:
    times: np.ndarray
    fidelities: dict
    fits: dict = field(default_factory=dict)

    @property
    def process(self):
        return self.fidelities["process"]

    def tau(self, which="process"):
        return self.fits[which][1]

    def table(self):
        """Columns time_us, F_pZ ... F_mY, F_process."""
        cols = [self.times] + [self.fidelities[k] for k in CARDINAL_ORDER] + [self.process]
        return np.column_stack(cols)


def kerr_phase(dim, kerr_khz, t):
    """Diagonal of exp(-i H_K t) for H_K = -K/2 n(n-1)."""
    n = np.arange(dim)
    return np.exp(1j * 2 * np.pi * 1e-3 * kerr_khz / 2 * n * (n - 1) * t)


def _fit_all(times, fids):
    fits = {}
    pole = 0.5 * (fids["pZ"] + fids["mZ"])
    equator = 0.25 * (fids["pX"] + fids["mX"] + fids["pY"] + fids["mY"])
    for name, curve, floor in (("process", fids["process"], 0.25), ("pole", pole, 0.5),
                               ("equator", equator, 0.5)):
        if np.ptp(curve) < 1e-9:
            fits[name] = (0.0, np.inf)
            continue
        try:
            fits[name] = fit_decay(times, curve, floor=floor)
        except FitError:
            fits[name] = (np.nan, np.nan)
    return fits


def _assemble(times, per_state):
    fids = {k: np.asarray(per_state[k]) for k in CARDINAL_ORDER}
    fids["process"] = np.array([process_fidelity([fids[k][i] for k in CARDINAL_ORDER])
                                for i in range(len(times))])
    return LifetimeResult(np.asarray(times, dtype=float), fids, _fit_all(times, fids))


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def lifetime_experiment(mode, times, code=EXPERIMENTAL, p=None, drive=None, dim=10,
                        kerr=True, jmax=40, threads=1, noise_off=(), decoder_unitary=None):
    """Cardinal-state and process fidelities of a stored logical qubit.

    Parameters
    ----------
    mode : str
        ``"free"``: T4C words under cavity loss and Kerr, no correction.
        ``"free-fock"``: qubit in Fock levels 0 and 1 under cavity loss.
        ``"ideal-prespa"``: T4C words under instantaneous parity recovery at
        rate 1/T1A (analytic trajectory mixture).
        ``"full"``: driven cavity-transmon-reservoir model with device
        noise. ``"full-idle"``: same device with the drives switched off.
    times : array
        Hold times in us; the fits need at least four.
    code : CodeWords or "experimental" / "optimal"
    noise_off : iterable of str
        Channel-name prefixes to drop from the device noise in the full modes.
    decoder_unitary : ndarray, optional
        Physical decoding unitary on (cavity, transmon) used instead of the
        ideal decoder, e.g. an optimized pulse propagator.
    """
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}; choose from {MODES}")
    if isinstance(code, str):
        code = {"experimental": EXPERIMENTAL, "optimal": OPTIMAL}[code]
    p = DeviceParams() if p is None else p
    times = np.asarray(times, dtype=float)
    if mode == "free-fock":
        return _free_fock(times, p)
    basis = DecodingBasis.from_codewords(code, dim)

    def decode(rho_cav):
        if decoder_unitary is None:
            return decode_density(rho_cav, basis)
        W = decoder_unitary[:, 0::2]
        return DecodedQubit(partial_trace(W @ rho_cav @ W.conj().T, (dim, 2), [1]))

    if mode == "ideal-prespa":
        jp = JumpProcess.prespa(dim, p.gamma_cavity)

        def run(key):
            xy = CARDINAL_STATES[key]
            psi = encode(code, xy, dim)
            out = []
            for t in times:
                if decoder_unitary is None:
                    dq = decode_mixture(trajectory_mixture(psi, t, jmax, jp), basis)
                else:
                    dq = decode(trajectory_mixture(psi, t, jmax, jp).density())
                out.append(state_fidelity(dq, xy))
            return out

        return _assemble(times, dict(zip(CARDINAL_ORDER, _map(run, CARDINAL_ORDER, threads))))

    if mode == "free":
        a, _, num, _ = fock_operators(dim)
        H = -0.5 * 2 * np.pi * 1e-3 * p.kerr_khz * (num @ num - num) if kerr else np.zeros((dim, dim))
        noise = NoiseModel((("cavity_decay", a, p.gamma_cavity),))
        per = _evolve_cardinals(H, noise, (dim,), code, dim, times, CARDINAL_ORDER, decode, p, kerr, threads)
        return _assemble(times, per)
    if mode == "full-idle":
        drive = PrespaDrive(np.zeros(4), np.zeros(4), spurious=False)
    per = full_model_fidelities(drive, times, CARDINAL_ORDER, code, p, dim, kerr, noise_off,
                                driven=(mode == "full"), decode=decode, threads=threads)
    return _assemble(times, per)


def full_model_fidelities(drive, times, keys=CARDINAL_ORDER, code=EXPERIMENTAL, p=None, dim=10,
                          kerr=True, noise_off=(), driven=True, decode=None, threads=1):
    """Cardinal-state fidelities of the driven device model at the given hold times.

    Returns a dict keyed like ``keys`` with one fidelity per time.
    """
    p = DeviceParams() if p is None else p
    drive = PrespaDrive.uniform() if drive is None else drive
    times = np.asarray(times, dtype=float)
    if decode is None:
        basis = DecodingBasis.from_codewords(code, dim)
        decode = lambda rc: decode_density(rc, basis)
    space = HilbertSpace((dim, 2, 2))
    H = prespa_hamiltonian(p, space, drive, kerr=kerr)
    noise = device_noise(p, space, driven=driven)
    if noise_off:
        noise = NoiseModel(tuple(c for c in noise.channels
                                 if not any(c[0].startswith(s) for s in noise_off)))
    return _evolve_cardinals(H, noise, space.dims, code, dim, times, keys, decode, p, kerr, threads)


def _evolve_cardinals(H, noise, space_dims, code, dim, times, keys, decode, p, kerr, threads):
    anc = np.zeros(int(np.prod(space_dims[1:])))
    anc[0] = 1.0
    # one propagator per uniform step, shared by all input states
    evo_t = times if times[0] == 0 else np.concatenate([[0.0], times])
    steps = np.diff(evo_t)
    uniform = len(steps) > 0 and np.ptp(steps) <= 1e-9 * evo_t[-1]
    prop = expm(liouvillian(H, noise) * steps[0]) if uniform else None
    phase = (lambda t: kerr_phase(dim, p.kerr_khz, t)) if kerr else (lambda t: np.ones(dim))

    def run(key):
        xy = CARDINAL_STATES[key]
        psi = np.kron(encode(code, xy, dim), anc)
        rho0 = np.outer(psi, psi.conj())
        if uniform:
            v = rho0.reshape(-1)
            rhos = [rho0]
            for _ in steps:
                v = prop @ v
                rhos.append(v.reshape(rho0.shape))
        else:
            rhos = lindblad_evolve(MasterEqProblem(H, noise, rho0, evo_t))
        out = []
        for t, rho in zip(times, rhos[len(evo_t) - len(times):]):
            rc = partial_trace(rho, space_dims, [0]) if len(space_dims) > 1 else rho
            u = phase(t)
            rc = u.conj()[:, None] * rc * u[None, :]     # undo the deterministic Kerr rotation
            out.append(state_fidelity(decode(rc), xy))
        return np.array(out)

    return dict(zip(keys, _map(run, keys, threads)))


def free_fock_process(times, t1):
    """Process fidelity of an amplitude-damped qubit, (1 + exp(-t/2T1))^2 / 4."""
    return (1 + np.exp(-np.asarray(times) / (2 * t1))) ** 2 / 4


def _free_fock(times, p):
    a = fock_operators(2)[0]
    noise = NoiseModel((("cavity_decay", a, p.gamma_cavity),))
    per = {}
    for key in CARDINAL_ORDER:
        xy = CARDINAL_STATES[key]
        psi = xy.ket()
        rhos = lindblad_evolve(MasterEqProblem(np.zeros((2, 2)), noise, np.outer(psi, psi.conj()), times))
        per[key] = [state_fidelity(DecodedQubit(r), xy) for r in rhos]
    return _assemble(times, per)
