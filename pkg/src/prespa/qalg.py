"""Dense linear algebra on truncated Fock and tensor-product spaces.

Operators and states are plain complex ndarrays. Subsystem bookkeeping is
carried by :class:`HilbertSpace`, whose slot order is fixed as
(cavity, transmon, reservoir).
"""

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.stats import poisson

from .errors import InvalidDimension, InvalidInput, TruncationWarning

CAVITY, TRANSMON, RESERVOIR = 0, 1, 2


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of truncated subsystems."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidDimension(f"invalid subsystem dimensions {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self):
        return int(np.prod(self.dims))

    def index(self, *levels):
        """Flat index of the product basis state ``|levels[0], levels[1], ...>``."""
        if len(levels) != len(self.dims):
            raise InvalidDimension("one level per subsystem is required")
        for lv, d in zip(levels, self.dims):
            if not 0 <= lv < d:
                raise InvalidDimension(f"level {lv} outside dimension {d}")
        return int(np.ravel_multi_index(levels, self.dims))

    def ket(self, *levels):
        v = np.zeros(self.total, dtype=complex)
        v[self.index(*levels)] = 1.0
        return v

    def embed(self, op, slot):
        return tensor_embed(op, self, slot)


def basis(dim, n):
    if not 0 <= n < dim:
        raise InvalidDimension(f"level {n} outside dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def fock_operators(dim):
    """Ladder, number and parity operators on a ``dim``-level oscillator.

    Returns
    -------
    a, adag, num, parity : ndarray
    """
    if dim < 2:
        raise InvalidDimension("an oscillator needs at least two levels")
    n = np.arange(dim)
    a = np.diag(np.sqrt(n[1:]).astype(complex), 1)
    adag = a.conj().T.copy()
    num = np.diag(n.astype(complex))
    parity = np.diag((-1.0) ** n).astype(complex)
    return a, adag, num, parity


def lowering(dim):
    return fock_operators(dim)[0]


def kron(*ops):
    return reduce(np.kron, ops)


def tensor_embed(op, space, slot):
    """Place ``op`` on subsystem ``slot`` with identities elsewhere."""
    op = np.asarray(op)
    if not 0 <= slot < len(space.dims):
        raise InvalidDimension(f"slot {slot} not in space {space.dims}")
    if op.shape != (space.dims[slot],) * 2:
        raise InvalidDimension(f"operator shape {op.shape} does not match dimension {space.dims[slot]}")
    left = int(np.prod(space.dims[:slot]))
    right = int(np.prod(space.dims[slot + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def dag(op):
    return np.conj(np.swapaxes(op, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def ket2dm(psi):
    psi = np.asarray(psi)
    return np.outer(psi, psi.conj())


def expect(op, state):
    """Expectation value for a ket (1-d) or density matrix (2-d)."""
    state = np.asarray(state)
    if state.ndim == 1:
        return np.vdot(state, op @ state)
    return np.trace(op @ state)


def normalize(psi):
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise InvalidInput("cannot normalize the zero vector")
    return psi / nrm


# ---------------------------------------------------------------------------
# matrix exponential

# Pade(13) coefficients and the scaling threshold from Higham (2005)
_B13 = (64764752532480000., 32382376266240000., 7771770303897600.,
        1187353796428800., 129060195264000., 10559470521600.,
        670442572800., 33522128640., 1323241920., 40840800., 960960.,
        16380., 182., 1.)
_THETA13 = 5.371920351148152


def _is_hermitian(m, tol):
    return np.allclose(m, m.conj().T, rtol=0, atol=tol)


def _expm_pade13(A):
    n = A.shape[0]
    norm1 = np.linalg.norm(A, 1)
    s = 0
    if norm1 > _THETA13:
        s = int(np.ceil(np.log2(norm1 / _THETA13)))
    A = A / 2.0 ** s
    b = _B13
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def expm(op):
    """Matrix exponential.

    Hermitian and anti-Hermitian inputs go through an eigendecomposition,
    which keeps unitaries unitary to machine precision. Everything else
    uses Pade(13) scaling and squaring.
    """
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidInput("expm needs a square matrix")
    if not np.all(np.isfinite(op)):
        raise InvalidInput("non-finite entries in matrix")
    scale = max(np.abs(op).max(), 1.0)
    tol = 1e-14 * scale
    if _is_hermitian(op, tol):
        w, v = np.linalg.eigh(0.5 * (op + op.conj().T))
        return (v * np.exp(w)) @ v.conj().T
    if _is_hermitian(1j * op, tol):
        h = 1j * op
        w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
        return (v * np.exp(-1j * w)) @ v.conj().T
    return _expm_pade13(op.astype(complex))


# ---------------------------------------------------------------------------
# oscillator states

def coherent_tail(alpha, dim):
    """Weight of the coherent state |alpha> outside the first ``dim`` levels."""
    return float(poisson.sf(dim - 1, abs(alpha) ** 2))


def displacement(alpha, dim, with_defect=False):
    """Displacement operator exp(alpha a^dag - conj(alpha) a) on ``dim`` levels.

    The truncation defect is the weight the true coherent state |alpha>
    carries above the cutoff. A :class:`TruncationWarning` is emitted when it
    exceeds 1e-6; pass ``with_defect=True`` to get it back as a number.
    """
    a, adag, _, _ = fock_operators(dim)
    D = expm(alpha * adag - np.conj(alpha) * a)
    defect = coherent_tail(alpha, dim)
    if defect > 1e-6:
        warnings.warn(f"displacement alpha={alpha} truncated at {dim} levels "
                      f"loses weight {defect:.2e}", TruncationWarning, stacklevel=2)
    if with_defect:
        return D, defect
    return D


def partial_trace(rho, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Density matrix on the product space with subsystem sizes ``dims``.
    keep : iterable of int
        Subsystems retained, in any order; the output follows ``dims`` order.
    """
    dims = tuple(dims.dims if isinstance(dims, HilbertSpace) else dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise InvalidInput("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise InvalidInput(f"keep {keep} out of range for dims {dims}")
    rho = np.asarray(rho)
    nsub = len(dims)
    t = rho.reshape(dims + dims)
    # trace from the highest slot down so axis numbers stay valid
    for k in reversed(range(nsub)):
        if k in keep:
            continue
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


# ---------------------------------------------------------------------------
# state metrics

def trace_distance(rho, sigma):
    w = np.linalg.eigvalsh(0.5 * ((rho - sigma) + (rho - sigma).conj().T))
    return 0.5 * float(np.abs(w).sum())


def _sqrtm_psd(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    s = _sqrtm_psd(rho)
    w = np.linalg.eigvalsh(s @ sigma @ s)
    return float(np.sqrt(np.clip(w, 0, None)).sum() ** 2)


def check_density(rho, tol_herm=1e-10, tol_trace=1e-10, tol_psd=-1e-9):
    """Return (hermitian, unit_trace, psd) flags for a candidate density matrix."""
    herm = np.abs(rho - rho.conj().T).max() <= tol_herm
    unit = abs(np.trace(rho) - 1) <= tol_trace
    psd = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= tol_psd
    return bool(herm), bool(unit), bool(psd)
