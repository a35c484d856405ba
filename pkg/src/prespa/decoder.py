"""Decoding of T4C cavity states onto a transmon qubit and fidelity metrics.

The decoder maps g|u0> -> g|0>, g|u1> -> g|1>, g|v0> -> e|0>, g|v1> -> e|1>
with u0, v0 the code words and u1, v1 their partners inside the {1,5} and
{3,7} subspaces. After tracing out the cavity, the transmon holds
rho_gg = |x n15|^2, rho_ee = |y n37|^2 and a coherence reduced by the
overlap of the two decoded cavity states, cos(theta - phi) for real states.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import curve_fit

from .codes import CARDINAL_STATES, t4c_words
from .errors import FitError, InvalidInput, LeakageError
from .qalg import HilbertSpace, partial_trace

CARDINAL_ORDER = ("pZ", "mZ", "pX", "mX", "pY", "mY")


@dataclass(frozen=True)
class DecodingBasis:
    u0: np.ndarray
    u1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray

    def __post_init__(self):
        u = np.array([self.u0, self.u1])
        v = np.array([self.v0, self.v1])
        for pair, levels in ((u, (1, 5)), (v, (3, 7))):
            if np.abs(pair.conj() @ pair.T - np.eye(2)).max() > 1e-12:
                raise InvalidInput("decoding basis pair is not orthonormal")
            outside = np.delete(pair, levels, axis=1)
            if np.abs(outside).max(initial=0) > 1e-12:
                raise InvalidInput(f"decoding basis vectors must live on levels {levels}")

    @classmethod
    def from_codewords(cls, cw, dim):
        """Code words plus their orthogonal partners with positive upper-level weight."""
        u0, v0 = t4c_words(cw, dim)
        u1 = np.zeros(dim, dtype=complex)
        v1 = np.zeros(dim, dtype=complex)
        u1[1], u1[5] = -cw.c5, cw.c1
        v1[3], v1[7] = -cw.c7, cw.c3
        return cls(u0, u1, v0, v1)

    @property
    def dim(self):
        return len(self.u0)

    def matrix(self):
        """Rows u0, u1, v0, v1."""
        return np.array([self.u0, self.u1, self.v0, self.v1])


@dataclass(frozen=True)
class DecomposedState:
    n15: float
    n37: float
    psi15: np.ndarray
    psi37: np.ndarray


@dataclass(frozen=True)
class DecodedQubit:
    rho_q: np.ndarray


def _leak_check(psi, tol):
    mask = np.ones(len(psi), dtype=bool)
    mask[[1, 3, 5, 7]] = False
    leaked = float(np.sum(np.abs(psi[mask]) ** 2))
    if leaked > tol:
        raise LeakageError(f"weight {leaked:.3e} outside Fock levels 1, 3, 5, 7", leaked)


def subspace_decompose(psi, xy=None, tol=1e-10):
    """Split psi = x n15 psi15 + y n37 psi37 with normalized psi15, psi37.

    Without ``xy`` the weights are the plain subspace norms (x = y = 1).
    A subspace whose weight vanishes gets a zero vector.
    """
    psi = np.asarray(psi, dtype=complex)
    _leak_check(psi, tol)
    p15 = np.zeros_like(psi)
    p37 = np.zeros_like(psi)
    p15[[1, 5]] = psi[[1, 5]]
    p37[[3, 7]] = psi[[3, 7]]
    x, y = (1.0, 1.0) if xy is None else (xy.x, xy.y)
    out = []
    for part, c in ((p15, x), (p37, y)):
        w = np.linalg.norm(part)
        if w == 0 or c == 0:
            out.append((0.0, np.zeros_like(psi)))
        else:
            n = w / abs(c)
            out.append((n, part / (c * n)))
    (n15, psi15), (n37, psi37) = out
    return DecomposedState(n15, n37, psi15, psi37)


def decoding_angles(cw, j, t, kappa=1.0):
    """Signed rotation angles of the j-jump trajectory inside each subspace.

    theta = atan2(<u1|psi15>, <u0|psi15>) and likewise phi for {3,7}, so
    cos(theta) = <u0|psi15>. With the default ``kappa`` the time is kappa*t.
    """
    kt = kappa * t
    out = []
    for (ca, na), (cb, nb) in (((cw.c1, 1), (cw.c5, 5)), ((cw.c3, 3), (cw.c7, 7))):
        a = ca * na ** (j / 2) * np.exp(-na * kt / 2)
        b = cb * nb ** (j / 2) * np.exp(-nb * kt / 2)
        nrm = np.hypot(a, b)
        a, b = a / nrm, b / nrm
        out.append(np.arctan2(-cb * a + ca * b, ca * a + cb * b))
    return tuple(out)


def _qubit_from_state(psi, basis):
    A, B, C, D = basis.matrix().conj() @ psi
    return np.array([[abs(A) ** 2 + abs(B) ** 2, A * np.conj(C) + B * np.conj(D)],
                     [C * np.conj(A) + D * np.conj(B), abs(C) ** 2 + abs(D) ** 2]])


def decode_mixture(mix, basis, xy=None, tol=1e-10):
    """Transmon state after decoding every trajectory of ``mix``.

    Each term contributes |x n15|^2, |y n37|^2 on the diagonal and
    x y* n15 n37 <c37|c15> off-diagonal, where c15, c37 are the
    coordinates of psi15, psi37 in the decoding bases; for real states this
    overlap is cos(theta - phi). The sum is renormalized to unit trace.
    ``xy`` is accepted for symmetry with the decomposition but is not needed:
    the amplitudes are read directly off each trajectory state.
    """
    rho = np.zeros((2, 2), dtype=complex)
    for p, psi in mix:
        _leak_check(psi, tol)
        rho += p * _qubit_from_state(psi, basis)
    rho = 0.5 * (rho + rho.conj().T)
    return DecodedQubit(rho / np.trace(rho).real)


def decoding_unitary(basis, completion="g_first"):
    """Full decoding unitary on (cavity, transmon) with transmon as slot 1.

    The four specified columns are completed to a unitary by pairing an
    orthonormal basis of the remaining inputs with the remaining outputs.
    ``completion="g_first"`` sends leaked ground-state inputs to transmon g;
    ``"e_first"`` sends them to e. Code-space results do not depend on it.
    """
    dim = basis.dim
    sp = HilbertSpace((dim, 2))
    U = np.zeros((2 * dim, 2 * dim), dtype=complex)
    specified = [(basis.u0, (0, 0)), (basis.u1, (1, 0)), (basis.v0, (0, 1)), (basis.v1, (1, 1))]
    g = np.array([1, 0])
    e = np.array([0, 1])
    for vec, out in specified:
        U += np.outer(sp.ket(*out), np.kron(vec, g).conj())
    comp = null_space(basis.matrix().conj())          # dim x (dim - 4)
    inputs = [np.kron(c, g) for c in comp.T] + [np.kron(np.eye(dim)[k], e) for k in range(dim)]
    g_out = [sp.ket(k, 0) for k in range(2, dim)]
    e_out = [sp.ket(k, 1) for k in range(2, dim)]
    if completion == "g_first":
        outputs = g_out + e_out
    elif completion == "e_first":
        outputs = e_out + g_out
    else:
        raise InvalidInput(f"unknown completion {completion!r}")
    for vin, vout in zip(inputs, outputs):
        U += np.outer(vout, vin.conj())
    return U


def decode_density(rho_cav, basis, completion="g_first"):
    """Transmon state after applying the full decoding unitary to rho_cav (x) |g><g|.

    Unlike :func:`decode_mixture` this accepts cavity states with weight
    outside the code space.
    """
    U = decoding_unitary(basis, completion)
    W = U[:, 0::2]                      # columns with the transmon in g
    full = W @ rho_cav @ W.conj().T
    rho_q = partial_trace(full, (basis.dim, 2), [1])
    return DecodedQubit(0.5 * (rho_q + rho_q.conj().T))


def state_fidelity(dq, xy):
    psi = xy.ket()
    return float(np.real(np.vdot(psi, dq.rho_q @ psi)))


def process_fidelity(fids):
    fids = np.asarray(fids, dtype=float)
    if fids.shape != (6,):
        raise InvalidInput("process fidelity needs exactly six cardinal-state fidelities")
    return 1.5 * fids.mean() - 0.5


def cardinal_fidelities(decode, cardinal=None):
    """Evaluate ``decode(xy) -> DecodedQubit`` on the six cardinal states.

    Returns a dict keyed like ``CARDINAL_ORDER`` plus ``"process"``.
    """
    cardinal = CARDINAL_STATES if cardinal is None else cardinal
    out = {k: state_fidelity(decode(cardinal[k]), cardinal[k]) for k in CARDINAL_ORDER}
    out["process"] = process_fidelity([out[k] for k in CARDINAL_ORDER])
    return out


def fit_decay(times, fidelities, floor=0.25):
    """Least-squares fit of F = floor + A exp(-t/tau).

    Returns
    -------
    A, tau : float
        ``tau`` comes back in the unit of ``times``.
    """
    t = np.asarray(times, dtype=float)
    F = np.asarray(fidelities, dtype=float)
    if len(t) < 4 or np.any(np.diff(t) <= 0):
        raise InvalidInput("fit_decay needs at least 4 points with increasing times")

    def model(t, A, tau):
        return floor + A * np.exp(-t / tau)

    y = F - floor
    A0 = max(y[0], 1e-6)
    good = y > 1e-9
    slope = np.polyfit(t[good], np.log(y[good]), 1)[0] if good.sum() >= 2 else 0.0
    tau0 = -1 / slope if slope < 0 else 10 * (t[-1] - t[0])
    try:
        (A, tau), _ = curve_fit(model, t, F, p0=(A0, tau0), bounds=([0, 1e-12], [np.inf, np.inf]),
                                xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=10000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"decay fit did not converge: {exc}") from exc
    resid = float(np.sqrt(np.mean((model(t, A, tau) - F) ** 2)))
    if not np.isfinite(tau) or resid > 0.05:
        raise FitError(f"decay fit residual {resid:.3g} too large", resid)
    return float(A), float(tau)
