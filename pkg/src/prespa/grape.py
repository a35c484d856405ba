"""Piecewise-constant pulse optimization with exact gradients and ADAM descent.

Hamiltonians are in rad/us and pulse samples u_kn in rad/us multiply the
control operators; the step length is given in ns. Every short-time
propagator comes from an eigendecomposition of H_n, and its derivative
uses the divided differences of exp(-i E dt) in that eigenbasis, so the
gradient is exact for the piecewise-constant scheme.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .circuitmodel import MHZ, DeviceParams, dispersive_hamiltonian
from .codes import EXPERIMENTAL, t4c_words
from .decoder import DecodingBasis
from .errors import InvalidInput, OptimizerError
from .qalg import CAVITY, TRANSMON, HilbertSpace, fock_operators


@dataclass
class ControlPulse:
    """Control samples ``u`` of shape (M controls, N steps) with step ``dt_ns``."""

    u: np.ndarray
    dt_ns: float = 1.0

    def __post_init__(self):
        self.u = np.atleast_2d(np.asarray(self.u, dtype=float))
        if not np.all(np.isfinite(self.u)):
            raise InvalidInput("pulse samples must be finite")
        if self.dt_ns <= 0:
            raise InvalidInput("dt must be positive")

    @property
    def n_steps(self):
        return self.u.shape[1]

    @property
    def duration_us(self):
        return self.n_steps * self.dt_ns * 1e-3


@dataclass
class ControlProblem:
    """Drift, controls and a target for pulse synthesis.

    ``inputs`` and ``targets`` are (d, c) matrices: for state transfer c = 1
    and the columns are psi_0 and psi_T; for a unitary target the columns are
    the subspace inputs and their desired images, so the overlap
    sum_k <t_k|U|i_k> equals Tr(U_T^dag U) on that subspace.
    """

    H0: np.ndarray
    controls: tuple
    inputs: np.ndarray
    targets: np.ndarray
    n_steps: int = 1000
    dt_ns: float = 1.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    forbidden: tuple = ()
    eta0: float = 0.5
    beta: float = 1e-3
    adam: tuple = (0.9, 0.999, 1e-8)
    max_iter: int = 2000
    c1_threshold: float = 1e-3
    init_scale: float = 1.0
    control_names: tuple = field(default=())

    def __post_init__(self):
        self.H0 = np.asarray(self.H0, dtype=complex)
        d = self.H0.shape[0]
        self.controls = tuple(np.asarray(h, dtype=complex) for h in self.controls)
        if not self.controls or any(h.shape != (d, d) for h in self.controls):
            raise InvalidInput("control operators must match the drift dimension")
        self.inputs = np.asarray(self.inputs, dtype=complex).reshape(d, -1)
        self.targets = np.asarray(self.targets, dtype=complex).reshape(d, -1)
        if self.inputs.shape != self.targets.shape:
            raise InvalidInput("inputs and targets need the same shape")
        if min(self.alpha2, self.alpha3, self.alpha4) < 0:
            raise InvalidInput("cost weights must be nonnegative")
        if any(not 0 <= f < d for f in self.forbidden):
            raise InvalidInput("forbidden index out of range")

    @property
    def dim(self):
        return self.H0.shape[0]

    @property
    def n_controls(self):
        return len(self.controls)

    def zero_pulse(self):
        return ControlPulse(np.zeros((self.n_controls, self.n_steps)), self.dt_ns)


# ---------------------------------------------------------------------------
# propagation, cost and gradient

def _check(pulse, prob):
    if pulse.u.shape[0] != prob.n_controls:
        raise InvalidInput(f"pulse has {pulse.u.shape[0]} controls, problem has {prob.n_controls}")


def _steps(pulse, prob):
    """Eigen-decompositions and propagators of every step."""
    Hk = np.array(prob.controls)
    Hs = prob.H0[None] + np.einsum("kn,kij->nij", pulse.u, Hk)
    E, V = np.linalg.eigh(Hs)
    dt = pulse.dt_ns * 1e-3
    ph = np.exp(-1j * E * dt)
    U = (V * ph[:, None, :]) @ np.conj(np.swapaxes(V, 1, 2))
    return E, V, ph, U, dt


def propagate(pulse, prob, full=False):
    """U_f = U_{N-1} ... U_0 applied to the inputs, or the full operator if ``full``."""
    _check(pulse, prob)
    _, _, _, U, _ = _steps(pulse, prob)
    out = np.eye(prob.dim, dtype=complex) if full else prob.inputs.copy()
    for Un in U:
        out = Un @ out
    return out


def fidelity(pulse, prob):
    """|sum_k <t_k|U|i_k>|^2 / c^2 with c the number of target columns."""
    psi = propagate(pulse, prob)
    c = prob.inputs.shape[1]
    return float(abs(np.vdot(prob.targets, psi)) ** 2 / c ** 2)


def _forward(pulse, prob):
    E, V, ph, U, dt = _steps(pulse, prob)
    psi = np.empty((pulse.n_steps + 1,) + prob.inputs.shape, dtype=complex)
    psi[0] = prob.inputs
    for n, Un in enumerate(U):
        psi[n + 1] = Un @ psi[n]
    return E, V, ph, U, dt, psi


def _components(pulse, prob, psi):
    c = prob.inputs.shape[1]
    o = np.vdot(prob.targets, psi[-1])
    F = abs(o) ** 2 / c ** 2
    u = pulse.u
    C2 = float(np.sum(np.diff(u, axis=1) ** 2))
    C3 = float(np.sum(u ** 2))
    f = list(prob.forbidden)
    C4 = float(np.sum(np.abs(psi[1:, f, :]) ** 2) / c) if f else 0.0
    return o, F, (1.0 - F, C2, C3, C4)


def cost(pulse, prob):
    """Total cost C1 + a2 C2 + a3 C3 + a4 C4 and the four raw components.

    C1 = 1 - F; C2 = sum of squared sample-to-sample changes; C3 = sum of
    squared samples; C4 = forbidden-level occupation summed over the states
    after every step (averaged over input columns).
    """
    _check(pulse, prob)
    *_, psi = _forward(pulse, prob)
    _, _, comps = _components(pulse, prob, psi)
    total = comps[0] + prob.alpha2 * comps[1] + prob.alpha3 * comps[2] + prob.alpha4 * comps[3]
    return float(total), comps


def gradient(pulse, prob, return_cost=False):
    """dC/du_kn by reverse accumulation through the propagator chain."""
    _check(pulse, prob)
    E, V, ph, U, dt, psi = _forward(pulse, prob)
    o, F, comps = _components(pulse, prob, psi)
    c = prob.inputs.shape[1]
    N = pulse.n_steps
    f = list(prob.forbidden)

    def forb(x):
        out = np.zeros_like(x)
        if f:
            out[f] = prob.alpha4 * x[f] / c
        return out

    # lam_n = dC/d(psi_n^*) for the states after step n-1
    lam = np.empty_like(psi)
    lam[N] = -o * prob.targets / c ** 2 + forb(psi[N])
    for n in range(N - 1, 0, -1):
        lam[n] = U[n].conj().T @ lam[n + 1] + forb(psi[n])
    Vh = np.conj(np.swapaxes(V, 1, 2))
    B = Vh @ psi[:N]
    L = Vh @ lam[1:]
    W = np.conj(L) @ np.swapaxes(B, 1, 2)
    dE = E[:, :, None] - E[:, None, :]
    num = ph[:, :, None] - ph[:, None, :]
    close = np.abs(dE) * dt < 1e-9
    G = np.where(close, -1j * dt * 0.5 * (ph[:, :, None] + ph[:, None, :]),
                 num / np.where(close, 1.0, dE))
    Z = V @ np.swapaxes(G * W, 1, 2) @ Vh
    Hk = np.array(prob.controls)
    M, d = Hk.shape[0], prob.dim
    g = 2 * np.real(Hk.reshape(M, d * d) @ np.swapaxes(Z, 1, 2).reshape(N, d * d).T)
    u = pulse.u
    if prob.alpha2:
        du = np.diff(u, axis=1)
        g2 = np.zeros_like(u)
        g2[:, 1:] += 2 * du
        g2[:, :-1] -= 2 * du
        g += prob.alpha2 * g2
    if prob.alpha3:
        g += prob.alpha3 * 2 * u
    if return_cost:
        total = comps[0] + prob.alpha2 * comps[1] + prob.alpha3 * comps[2] + prob.alpha4 * comps[3]
        return g, float(total), comps, float(F)
    return g


def finite_difference(pulse, prob, h=1e-5, entries=None):
    """Central differences of the total cost at selected (k, n) entries."""
    entries = [(k, n) for k in range(pulse.u.shape[0]) for n in range(pulse.n_steps)] \
        if entries is None else entries
    out = []
    for k, n in entries:
        up = pulse.u.copy()
        dn = pulse.u.copy()
        up[k, n] += h
        dn[k, n] -= h
        out.append((cost(ControlPulse(up, pulse.dt_ns), prob)[0]
                    - cost(ControlPulse(dn, pulse.dt_ns), prob)[0]) / (2 * h))
    return np.array(out)


# ---------------------------------------------------------------------------
# optimizer

@dataclass
class History:
    cost: list = field(default_factory=list)
    fidelity: list = field(default_factory=list)
    components: list = field(default_factory=list)
    best_cost: list = field(default_factory=list)


def optimize(prob, seed=0, initial=None, callback=None):
    """ADAM descent with learning rate eta0 exp(-beta p) from a Gaussian-noise start.

    Stops after ``max_iter`` iterations or once C1 drops below
    ``c1_threshold``; returns the best pulse seen and the iteration history.
    """
    rng = np.random.default_rng(seed)
    u = rng.normal(0.0, prob.init_scale, (prob.n_controls, prob.n_steps)) if initial is None \
        else np.array(initial.u, dtype=float)
    b1, b2, eps = prob.adam
    m = np.zeros_like(u)
    v = np.zeros_like(u)
    hist = History()
    best_u, best = u.copy(), np.inf
    for it in range(prob.max_iter + 1):
        pulse = ControlPulse(u, prob.dt_ns)
        g, C, comps, F = gradient(pulse, prob, return_cost=True)
        if not np.isfinite(C) or not np.all(np.isfinite(g)):
            raise OptimizerError(f"cost diverged at iteration {it}")
        if C < best:
            best, best_u = C, u.copy()
        hist.cost.append(C)
        hist.fidelity.append(F)
        hist.components.append(comps)
        hist.best_cost.append(best)
        if callback is not None:
            callback(it, C, F)
        if comps[0] < prob.c1_threshold or it == prob.max_iter:
            break
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** (it + 1))
        vh = v / (1 - b2 ** (it + 1))
        u = u - prob.eta0 * np.exp(-prob.beta * it) * mh / (np.sqrt(vh) + eps)
    return ControlPulse(best_u, prob.dt_ns), hist


# ---------------------------------------------------------------------------
# device problems

def control_operators(dims):
    """Transmon sigma_x, sigma_y analogues and cavity x, p on (cavity, transmon)."""
    space = HilbertSpace(tuple(dims))
    a = space.embed(fock_operators(dims[CAVITY])[0], CAVITY)
    q = space.embed(fock_operators(dims[TRANSMON])[0], TRANSMON)
    ops = (q + q.conj().T, 1j * (q.conj().T - q), a + a.conj().T, 1j * (a.conj().T - a))
    return ops, ("sigma_x", "sigma_y", "x_A", "p_A")


def drift_hamiltonian(dims=(10, 3), p=None, anharmonic=True):
    """Dispersive drift on (cavity, transmon); optionally the transmon anharmonicity."""
    p = DeviceParams() if p is None else p
    space = HilbertSpace(tuple(dims))
    H = dispersive_hamiltonian(p, space)
    if anharmonic and dims[TRANSMON] > 2:
        q = space.embed(fock_operators(dims[TRANSMON])[0], TRANSMON)
        qd = q.conj().T
        H = H - 0.5 * MHZ * p.alpha_q_mhz * qd @ qd @ q @ q
    return H


def default_forbidden(dims):
    """Transmon top level (when above e) and the two highest cavity levels."""
    space = HilbertSpace(tuple(dims))
    dA, dq = dims
    out = set()
    if dq > 2:
        out |= {space.index(n, dq - 1) for n in range(dA)}
    out |= {space.index(n, k) for n in (dA - 2, dA - 1) for k in range(dq)}
    return tuple(sorted(out))


def prep_problem(target_cavity, dims=(10, 3), duration_us=1.0, dt_ns=1.0, p=None, **kw):
    """|0, g> -> |target, g> state transfer."""
    space = HilbertSpace(tuple(dims))
    tgt = np.asarray(target_cavity, dtype=complex)
    if len(tgt) != dims[CAVITY]:
        raise InvalidInput("target must live on the cavity truncation")
    g = np.eye(dims[TRANSMON])[0]
    ops, names = control_operators(dims)
    kw.setdefault("forbidden", default_forbidden(dims))
    return ControlProblem(drift_hamiltonian(dims, p), ops, space.ket(0, 0), np.kron(tgt, g),
                          n_steps=int(round(duration_us * 1e3 / dt_ns)), dt_ns=dt_ns,
                          control_names=names, **kw)


def decode_target(basis, dims=None):
    """Inputs and images of the decoding target on its seven-state subspace.

    Inputs |g,u0>, |g,u1>, |g,0>, |g,v0>, |g,v1>, |e,0>, |e,1> go to
    |g,0>, |g,1>, |g,5>, |e,0>, |e,1>, |g,v0>, |g,v1>.
    Returns (inputs, targets), each (dim, 7), on (cavity, transmon).
    """
    dA = basis.dim
    dims = (dA, 3) if dims is None else tuple(dims)
    if dims[CAVITY] != dA:
        raise InvalidInput("basis and cavity truncation differ")
    space = HilbertSpace(dims)
    g = np.eye(dims[TRANSMON])[0]
    e = np.eye(dims[TRANSMON])[1]
    fock = np.eye(dA)
    ins = [np.kron(basis.u0, g), np.kron(basis.u1, g), space.ket(0, 0),
           np.kron(basis.v0, g), np.kron(basis.v1, g), space.ket(0, 1), space.ket(1, 1)]
    outs = [space.ket(0, 0), space.ket(1, 0), np.kron(fock[5], g),
            space.ket(0, 1), space.ket(1, 1), np.kron(basis.v0, g), np.kron(basis.v1, g)]
    return np.array(ins).T, np.array(outs).T


def target_operator(inputs, targets):
    """Partial isometry sum_k |t_k><i_k|."""
    return targets @ inputs.conj().T


def decode_problem(code=EXPERIMENTAL, dims=(10, 3), duration_us=2.0, dt_ns=1.0, p=None, **kw):
    basis = DecodingBasis.from_codewords(code, dims[CAVITY])
    ins, outs = decode_target(basis, dims)
    ops, names = control_operators(dims)
    kw.setdefault("forbidden", default_forbidden(dims))
    return ControlProblem(drift_hamiltonian(dims, p), ops, ins, outs,
                          n_steps=int(round(duration_us * 1e3 / dt_ns)), dt_ns=dt_ns,
                          control_names=names, **kw)


def zero_logical(code=EXPERIMENTAL, dim=10):
    return t4c_words(code, dim)[0]


# ---------------------------------------------------------------------------
# pulse files

def save_pulse(pulse, path, meta=None):
    """CSV with columns step, u_1..u_M plus a sidecar ``<path>.json`` with metadata."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + [f"u_{k + 1}" for k in range(pulse.u.shape[0])])
        for n in range(pulse.n_steps):
            w.writerow([n] + [repr(float(x)) for x in pulse.u[:, n]])
    info = {"dt_ns": pulse.dt_ns, "n_controls": pulse.u.shape[0], "n_steps": pulse.n_steps}
    info.update(meta or {})
    with open(str(path) + ".json", "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)


def load_pulse(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    u = np.array([[float(x) for x in r[1:]] for r in rows[1:]]).T
    try:
        with open(str(path) + ".json") as fh:
            dt = json.load(fh).get("dt_ns", 1.0)
    except FileNotFoundError:
        dt = 1.0
    return ControlPulse(u, dt)
