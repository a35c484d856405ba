"""Wigner tomography, density-matrix reconstruction and Fock-basis process matrices."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import eigh

from ..circuitmodel import DeviceParams, PrespaDrive, prespa_hamiltonian
from ..dissipator import prespa_truncated
from ..errors import InvalidInput, ReconstructionError, UndefinedElement
from ..opensystem import device_noise, liouvillian
from ..qalg import HilbertSpace, displacement, expm, partial_trace


def _displaced_parity(alpha, dim, pad):
    """D(alpha) P D(-alpha) restricted to ``dim`` levels, built in ``dim + pad`` levels."""
    big = dim + pad
    D = displacement(alpha, big)
    P = np.diag((-1.0) ** np.arange(big))
    return (D @ P @ D.conj().T)[:dim, :dim]


def wigner(rho, alpha_grid, pad=30):
    """W(alpha) = (2/pi) Tr[D(alpha) P D(-alpha) rho] on an array of complex points.

    The displaced parity is formed in a padded space so truncation at the
    edge of ``rho`` does not leak into the result.
    """
    rho = np.asarray(rho)
    dim = rho.shape[0]
    alphas = np.asarray(alpha_grid, dtype=complex)
    out = np.empty(alphas.shape)
    for idx, a in np.ndenumerate(alphas):
        out[idx] = 2 / np.pi * np.real(np.trace(_displaced_parity(a, dim, pad) @ rho))
    return out


def wigner_design(alpha_grid, dim, pad=30):
    """Linear map from vec(rho) (row-major) to W samples."""
    alphas = np.ravel(np.asarray(alpha_grid, dtype=complex))
    rows = [2 / np.pi * _displaced_parity(a, dim, pad).T.reshape(-1) for a in alphas]
    return np.array(rows)


def project_density(m):
    """Closest unit-trace positive semidefinite matrix in Frobenius norm."""
    m = 0.5 * (m + m.conj().T)
    w, v = eigh(m)
    # project eigenvalues onto the probability simplex
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    k = np.arange(1, len(u) + 1)
    r = np.flatnonzero(u - css / k > 0)[-1]
    w = np.clip(w - css[r] / (r + 1), 0, None)
    return (v * w) @ v.conj().T


@dataclass(frozen=True)
class Reconstruction:
    rho: np.ndarray
    condition: float
    residual: float


def reconstruct_density(w_samples, alpha_grid, dim, pad=30, max_condition=1e8):
    """Invert Wigner samples to a density matrix on ``dim`` Fock levels.

    Least squares over Hermitian matrices with the unit-trace constraint
    eliminated exactly, followed by projection onto the physical set.
    """
    w = np.ravel(np.asarray(w_samples, dtype=float))
    if w.size < dim * dim:
        raise InvalidInput(f"need at least {dim * dim} samples, got {w.size}")
    A = wigner_design(alpha_grid, dim, pad)
    # real parametrization of Hermitian matrices
    basis = []
    for i in range(dim):
        for j in range(i, dim):
            E = np.zeros((dim, dim), dtype=complex)
            if i == j:
                E[i, i] = 1
                basis.append(E)
            else:
                E[i, j] = E[j, i] = 1 / np.sqrt(2)
                basis.append(E.copy())
                F = np.zeros((dim, dim), dtype=complex)
                F[i, j], F[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
                basis.append(F)
    B = np.array([b.reshape(-1) for b in basis]).T
    M = np.real(A @ B)
    # trace constraint: sum of diagonal coefficients = 1
    diag_idx = [k for k, b in enumerate(basis) if np.count_nonzero(b) == 1]
    # eliminate one diagonal coefficient: x = x0 + N z
    x0 = np.zeros(len(basis))
    x0[diag_idx[0]] = 1.0
    N = np.eye(len(basis))
    N[diag_idx[0], diag_idx] = -1.0
    N = np.delete(N, diag_idx[0], axis=1)
    MN = M @ N
    s = np.linalg.svd(MN, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if cond > max_condition:
        raise ReconstructionError(f"Wigner design is ill-conditioned (condition {cond:.2e})", cond)
    z, *_ = np.linalg.lstsq(MN, w - M @ x0, rcond=None)
    x = x0 + N @ z
    rho = (B @ x).reshape(dim, dim)
    resid = float(np.linalg.norm(M @ x - w) / max(np.linalg.norm(w), 1e-300))
    return Reconstruction(project_density(rho), cond, resid)


# ---------------------------------------------------------------------------
# process matrices in the Fock basis

@dataclass(frozen=True)
class ProcessMatrix:
    """Fock-basis transfer elements of a cavity channel.

    ``population[n', n]`` = <n'| E(|n><n|) |n'>. ``coherence[(n, m)]`` is
    rho_out[n+1, m+1] / rho_in[n, m] for even-pair superposition inputs.
    ``cross`` is the largest output coherence from those inputs whose index
    gap differs from m - n, relative to the input coherence: weight that one
    conversion path hands to another. Same-gap elements such as the
    unconverted (n, m) or photon-loss (n-1, m-1) terms are not counted.
    """

    population: np.ndarray
    coherence: dict
    cross: float
    duration: float

    def mean_coherence(self):
        return float(np.mean([abs(v) for v in self.coherence.values()]))


def chi_matrix(channel, duration=25.0, levels=8, pairs=None, dim=None, min_input=1e-6):
    """Population block and pairwise coherence transfer of ``channel``.

    Parameters
    ----------
    channel : callable
        ``channel(rho_in) -> rho_out`` on cavity density matrices of size ``dim``.
    pairs : iterable of (n, m), optional
        Input coherences; defaults to the six pairs of even levels below
        ``levels``. Their outputs are read at (n+1, m+1).
    """
    dim = levels if dim is None else dim
    pairs = list(combinations(range(0, levels, 2), 2)) if pairs is None else list(pairs)
    pop = np.zeros((levels, levels))
    for n in range(levels):
        rho = np.zeros((dim, dim), dtype=complex)
        rho[n, n] = 1.0
        pop[:, n] = np.real(np.diag(channel(rho)))[:levels]
    coh = {}
    cross = 0.0
    for n, m in pairs:
        psi = np.zeros(dim, dtype=complex)
        psi[n] = psi[m] = 1 / np.sqrt(2)
        rin = np.outer(psi, psi.conj())
        if abs(rin[n, m]) < min_input:
            raise UndefinedElement(f"input coherence ({n},{m}) vanishes")
        out = channel(rin)
        tn, tm = (n + 1, m + 1) if n + 1 < dim and m + 1 < dim else (n, m)
        coh[(n, m)] = out[tn, tm] / rin[n, m]
        k, l = np.indices((levels, levels))
        off = np.where((l > k) & (l - k != abs(m - n)), np.abs(out[:levels, :levels]), 0.0)
        cross = max(cross, float(off.max() / abs(rin[n, m])))
    return ProcessMatrix(pop, coh, cross, float(duration))


def ideal_prespa_channel(dim):
    """Complete parity recovery: even n -> n+1, odd levels untouched."""
    P = prespa_truncated(dim)
    Q = np.diag([1.0 if (k % 2 == 1 or k > 7) else 0.0 for k in range(dim)]).astype(complex)

    def channel(rho):
        return P @ rho @ P.conj().T + Q @ rho @ Q

    return channel


def identity_channel(rho):
    return np.array(rho, copy=True)


def noisy_prespa_channel(duration=25.0, p=None, drive=None, dim=9, **noise_kw):
    """Cavity channel of the driven device held for ``duration`` us.

    Input cavity states are padded to ``dim`` levels, paired with |g,0>,
    evolved and traced back to the cavity.
    """
    p = DeviceParams() if p is None else p
    drive = PrespaDrive.uniform() if drive is None else drive
    space = HilbertSpace((dim, 2, 2))
    H = prespa_hamiltonian(p, space, drive)
    nm = device_noise(p, space, **noise_kw)
    prop = expm(liouvillian(H, nm) * duration)
    anc = np.zeros((4, 4))
    anc[0, 0] = 1.0

    def channel(rho):
        r = np.zeros((dim, dim), dtype=complex)
        k = rho.shape[0]
        r[:k, :k] = rho
        full = (prop @ np.kron(r, anc).reshape(-1)).reshape(space.total, space.total)
        return partial_trace(full, space.dims, [0])[:k, :k]

    return channel
