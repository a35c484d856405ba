"""Lindblad dynamics: integrator, steady states, Raman-path fits and heating.

Density matrices are vectorized row-major, vec(rho) = rho.reshape(-1), so
vec(A rho B) = kron(A, B.T) vec(rho).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, least_squares
from scipy.sparse.linalg import eigs

from .circuitmodel import KHZ, PrespaDrive, prespa_hamiltonian
from .errors import (FitError, IntegrationError, InvalidDimension, InvalidInput,
                     NonUniqueSteadyState)
from .qalg import CAVITY, RESERVOIR, TRANSMON, HilbertSpace, expm, fock_operators


@dataclass(frozen=True)
class NoiseModel:
    """Named collapse channels; each entry is (name, operator, rate).

    The Lindblad collapse operator of an entry is sqrt(rate) * operator.
    """

    channels: tuple = ()

    def __post_init__(self):
        for name, op, rate in self.channels:
            if rate < 0 or not np.isfinite(rate):
                raise InvalidInput(f"rate of channel {name!r} must be finite and nonnegative")

    def collapse_ops(self):
        return [np.sqrt(rate) * op for _, op, rate in self.channels if rate > 0]

    def without(self, *names):
        return NoiseModel(tuple(c for c in self.channels if c[0] not in names))

    def scaled(self, **factors):
        """Copy with the rates of the named channels multiplied by the given factors."""
        return NoiseModel(tuple((n, op, r * factors.get(n, 1.0)) for n, op, r in self.channels))

    @property
    def names(self):
        return tuple(c[0] for c in self.channels)

    def __add__(self, other):
        return NoiseModel(self.channels + other.channels)


@dataclass(frozen=True)
class MasterEqProblem:
    H: np.ndarray
    noise: NoiseModel
    rho0: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.array([0.0]))

    def __post_init__(self):
        d = self.H.shape[0]
        if self.H.shape != (d, d) or self.rho0.shape != (d, d):
            raise InvalidDimension("H and rho0 must be square with matching size")
        for _, op, _ in self.noise.channels:
            if op.shape != (d, d):
                raise InvalidDimension("collapse operator size does not match H")
        if d > 200:
            raise InvalidDimension("dense Liouvillian limited to 200 states")
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))


def liouvillian(H, noise):
    """Dense generator L with d vec(rho)/dt = L vec(rho)."""
    d = H.shape[0]
    I = np.eye(d)
    L = -1j * (np.kron(H, I) - np.kron(I, H.T))
    for c in noise.collapse_ops():
        cdc = c.conj().T @ c
        L += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, I) - 0.5 * np.kron(I, cdc.T)
    return L


def lindblad_evolve(prob, method="RK45", rtol=1e-10, atol=1e-12):
    """rho(t) on ``prob.times``, shape (len(times), d, d).

    ``method`` is an explicit Runge-Kutta scheme name ("RK45", "DOP853")
    or "expm", which exponentiates the generator once per distinct time
    step; that path needs a uniform grid and is much faster for long runs
    with fast reservoir dynamics.
    """
    d = prob.H.shape[0]
    L = liouvillian(prob.H, prob.noise)
    times = prob.times
    y0 = prob.rho0.reshape(-1).astype(complex)
    if method == "expm":
        steps = np.diff(times)
        if len(steps) and np.ptp(steps) > 1e-9 * max(abs(steps).max(), 1):
            raise InvalidInput("expm propagation needs a uniform time grid")
        out = np.empty((len(times), d * d), dtype=complex)
        y = y0 if times[0] == 0 else expm(L * times[0]) @ y0
        out[0] = y
        if len(steps):
            P = expm(L * steps[0])
            for i in range(1, len(times)):
                y = P @ y
                out[i] = y
        return out.reshape(len(times), d, d)
    if len(times) == 1 and times[0] == 0:
        return prob.rho0[None].astype(complex)
    sol = solve_ivp(lambda t, y: L @ y, (0.0, float(times[-1])), y0, method=method,
                    t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")
    return sol.y.T.reshape(len(times), d, d)


def steady_state(H, noise, tol=1e-10):
    """Unique fixed point of the Lindblad generator.

    Uniqueness is checked from the two eigenvalues of L closest to zero
    (shift-invert near zero); the state itself comes from a linear solve with one row
    of L replaced by the trace condition.
    """
    d = H.shape[0]
    L = liouvillian(H, noise)
    scale = max(np.abs(L).max(), 1.0)
    if d > 1:
        # shift slightly off zero so the factorization exists even when L is singular
        vals = eigs(L, k=2, sigma=-1e-6 * scale, which="LM", return_eigenvectors=False)
        vals = np.sort(np.abs(vals))
        if vals[1] < 1e3 * tol * scale:
            raise NonUniqueSteadyState(f"generator has a degenerate null space (|lambda_2| = {vals[1]:.2e})")
    A = L.copy()
    A[0, :] = np.eye(d).reshape(-1)
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    rho = np.linalg.solve(A, b).reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# device noise on the (cavity, transmon, reservoir) space

def _projector(dim, n):
    P = np.zeros((dim, dim), dtype=complex)
    P[n, n] = 1.0
    return P


def device_noise(p, space, cavity=True, transmon=True, heating=True, reservoir=True,
                 driven=True, secular=True, cavity_dephasing="fock"):
    """Collapse channels for the driven device.

    With ``secular=True`` transmon emission and absorption are split by
    cavity photon number, and cavity loss by transmon state, since the
    emitted photons are spectrally resolved by chi_q. Transmon pure
    dephasing uses sqrt(2 gamma_phi) q^dag q.

    Cavity dephasing: the measured cavity T2 already contains the full
    dephasing caused by idle transmon heating, which this model produces
    explicitly. ``"fock"`` (default) keeps only the remainder
    1/T2 - 1/2T1 - gamma_up(idle) and applies it as photon-number-resolved
    projector jumps, so every coherence rho_nm decays at that rate.
    ``"number"`` applies sqrt(2 gamma_phi) n with the full 1/T2 - 1/2T1.
    """
    dims = space.dims
    dA, dq = dims[CAVITY], dims[TRANSMON]
    aA = fock_operators(dA)[0]
    aq = fock_operators(dq)[0]
    ch = []
    if reservoir and len(dims) > RESERVOIR:
        ch.append(("reservoir_decay", space.embed(fock_operators(dims[RESERVOIR])[0], RESERVOIR), p.kappa_r))
    if cavity:
        if secular:
            for k in range(dq):
                op = space.embed(aA, CAVITY) @ space.embed(_projector(dq, k), TRANSMON)
                ch.append((f"cavity_decay_q{k}", op, p.gamma_cavity))
        else:
            ch.append(("cavity_decay", space.embed(aA, CAVITY), p.gamma_cavity))
        if cavity_dephasing == "fock":
            rate = p.gamma_phi_cavity_residual
            for n in range(dA):
                ch.append((f"cavity_dephasing_n{n}", space.embed(_projector(dA, n), CAVITY), rate))
        elif cavity_dephasing == "number":
            ch.append(("cavity_dephasing", space.embed(aA.conj().T @ aA, CAVITY), 2 * p.gamma_phi_cavity))
        elif cavity_dephasing is not None:
            raise InvalidInput(f"unknown cavity dephasing model {cavity_dephasing!r}")
    if transmon or heating:
        blocks = range(dA) if secular else [None]
        for n in blocks:
            proj = np.eye(space.total) if n is None else space.embed(_projector(dA, n), CAVITY)
            sfx = "" if n is None else f"_n{n}"
            if transmon:
                ch.append(("transmon_decay" + sfx, proj @ space.embed(aq, TRANSMON), p.gamma_transmon))
            if heating:
                ch.append(("transmon_heating" + sfx, proj @ space.embed(aq.conj().T, TRANSMON), p.gamma_up(driven)))
    if transmon:
        ch.append(("transmon_dephasing", space.embed(aq.conj().T @ aq, TRANSMON), 2 * p.gamma_phi_transmon))
    return NoiseModel(tuple(ch))


def ideal_prespa_noise(dim, kappa, kerr=False):
    """Single channel sqrt(kappa) Pi_eo a on a bare cavity."""
    from .dissipator import prespa_truncated
    a = fock_operators(dim)[0]
    return NoiseModel((("prespa", prespa_truncated(dim) @ a, kappa),))


# ---------------------------------------------------------------------------
# even -> odd conversion in the full model

def conversion_curve(p, drive, times, start_level=0, dims=(4, 2, 2), noise=True, kerr=True):
    """Population of cavity level start_level+1 versus time, starting in |start,g,0>."""
    space = HilbertSpace(dims)
    H = prespa_hamiltonian(p, space, drive, kerr=kerr)
    nm = device_noise(p, space, heating=False) if noise else device_noise(
        p, space, cavity=False, transmon=False, heating=False)
    rho0 = np.zeros((space.total,) * 2, dtype=complex)
    i0 = space.index(start_level, 0, 0)
    rho0[i0, i0] = 1.0
    rhos = lindblad_evolve(MasterEqProblem(H, nm, rho0, times))
    P = space.embed(_projector(dims[CAVITY], start_level + 1), CAVITY)
    return np.einsum("ij,tji->t", P, rhos).real


def conversion_halftime(p, drive, start_level=0, dims=(4, 2, 2), noise=True, tmax=60.0):
    """First time the target odd level reaches population 1/2 (us)."""
    times = np.linspace(0, tmax, 601)
    pop = conversion_curve(p, drive, times, start_level, dims, noise)
    idx = np.flatnonzero(pop >= 0.5)
    if not len(idx):
        raise FitError(f"target population never reaches 1/2 within {tmax} us")
    i = idx[0]
    return float(np.interp(0.5, pop[i - 1:i + 1], times[i - 1:i + 1]))


# ---------------------------------------------------------------------------
# four-level Raman path model and fit

def raman_path_model(omega_khz, lam_khz, p, path=1, detuning_khz=0.0, mixing_detuning_khz=0.0,
                     noise=True):
    """Hamiltonian and noise of one conversion path.

    Levels: |2n,g,0>, |2n,e,0>, |2n+1,g,1>, |2n+1,g,0> plus a sink that
    collects cavity loss out of |2n>. Path index ``path`` runs 1..4. The
    transmon tone sits ``detuning_khz`` above its transition and the mixing
    tone ``mixing_detuning_khz`` above its own.
    """
    n = 2 * (path - 1)
    H = np.zeros((5, 5), dtype=complex)
    H[1, 0] = KHZ * lam_khz
    H[2, 1] = KHZ * omega_khz
    H = H + H.conj().T
    H[1, 1] = -KHZ * detuning_khz
    H[2, 2] = -KHZ * (detuning_khz + mixing_detuning_khz)
    ch = [("reservoir_decay", _jump(5, 3, 2), p.kappa_r)]
    if noise:
        ch += [("transmon_decay", _jump(5, 0, 1), p.gamma_transmon),
               ("transmon_dephasing", _projector(5, 1), 2 * p.gamma_phi_transmon),
               ("target_loss", _jump(5, 0, 3), (n + 1) * p.gamma_cavity)]
        if n > 0:
            ch.append(("start_loss", _jump(5, 4, 0), n * p.gamma_cavity))
    return H, NoiseModel(tuple(ch))


def raman_path_populations(omega_khz, lam_khz, times, p, path=1, detuning_khz=0.0, noise=True):
    """Transmon P_e(t) and target-level P(t) for one conversion path (see :func:`raman_path_model`)."""
    H, nm = raman_path_model(omega_khz, lam_khz, p, path, detuning_khz, noise=noise)
    rhos = lindblad_evolve(MasterEqProblem(H, nm, _projector(5, 0), times))
    diag = np.einsum("tii->ti", rhos).real
    return diag[:, 1], diag[:, 2] + diag[:, 3]


def _jump(d, to, frm):
    J = np.zeros((d, d), dtype=complex)
    J[to, frm] = 1.0
    return J


@dataclass(frozen=True)
class RamanFit:
    omega_khz: float
    lam_khz: float
    scale: float
    residual: float


def raman_fit(times, pe, ptarget, p, path=1, detuning_khz=0.0, guess=(80.0, 25.0, 1.0), max_residual=0.05):
    """Fit (|Omega|, |lambda|, scale) of the four-level path model to both curves.

    ``scale`` multiplies both model curves (readout contrast).
    """
    times = np.asarray(times, dtype=float)
    data = np.concatenate([pe, ptarget])

    def resid(x):
        om, lam, s = x
        m_pe, m_t = raman_path_populations(om, lam, times, p, path, detuning_khz)
        return s * np.concatenate([m_pe, m_t]) - data

    sol = least_squares(resid, guess, bounds=([0, 0, 0], [np.inf, np.inf, np.inf]),
                        x_scale=(10.0, 10.0, 0.1), xtol=1e-12, ftol=1e-12)
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    if not sol.success or rms > max_residual:
        raise FitError(f"Raman fit residual {rms:.3g}", rms)
    om, lam, s = sol.x
    return RamanFit(float(om), float(lam), float(s), rms)


# ---------------------------------------------------------------------------
# cavity heating by transmon excitation under a single mixing tone

def heating_rate_estimate(omega_khz, p, driven=False):
    """Rate-equation value gamma_up * G / (G + 1/T1q) with G = 4 Omega^2 / kappa."""
    G = 4 * (KHZ * omega_khz) ** 2 / p.kappa_r
    return p.gamma_up(driven) * G / (G + p.gamma_transmon)


def heating_steady_state(omega_khz, p, driven=False, dims=(3, 2, 2), gamma_cavity=None):
    """Steady state with one mixing tone on |0,e,0> <-> |1,g,1> and transmon heating."""
    space = HilbertSpace(dims)
    H = np.zeros((space.total,) * 2, dtype=complex)
    i, j = space.index(1, 0, 1), space.index(0, 1, 0)
    H[i, j] = H[j, i] = KHZ * omega_khz
    nm = device_noise(p, space, driven=driven, secular=True)
    if gamma_cavity is not None:
        nm = nm.scaled(**{n: gamma_cavity / p.gamma_cavity for n in nm.names if n.startswith("cavity_decay")})
    return space, steady_state(H, nm)


def heating_scan(omega_list, p, driven=False, gamma_cavity=None):
    """Effective vacuum escape rate gamma_01 (1/us) for each tone amplitude.

    Uses detailed balance of the cavity populations in steady state,
    gamma_01 P0 = P1 / T1A.
    """
    gc = p.gamma_cavity if gamma_cavity is None else gamma_cavity
    out = []
    for om in omega_list:
        if om == 0:
            out.append(0.0)
            continue
        space, rho = heating_steady_state(om, p, driven, gamma_cavity=gamma_cavity)
        pops = np.einsum("ii->i", rho).real.reshape(space.dims).sum(axis=(1, 2))
        out.append(float(gc * pops[1] / pops[0]))
    return np.array(out)
