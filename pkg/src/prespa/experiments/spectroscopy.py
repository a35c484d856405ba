"""Number-resolved transmon spectroscopy and two-comb conversion spectroscopy."""

from dataclasses import dataclass

import numpy as np

from ..circuitmodel import DeviceParams
from ..errors import InvalidInput
from ..opensystem import liouvillian, raman_path_model
from ..qalg import expm


@dataclass(frozen=True)
class SpectroscopyResult:
    """Excitation probability on a 1D detuning grid or a (transmon, mixing) 2D grid (MHz)."""

    detunings: np.ndarray
    prob: np.ndarray
    detunings_m: np.ndarray = None

    def __post_init__(self):
        if np.any(self.prob < -1e-9) or np.any(self.prob > 1 + 1e-9):
            raise InvalidInput("probabilities must lie in [0, 1]")


def lorentzian(d_mhz, hwhm_mhz):
    """Unit-peak Lorentzian."""
    return 1.0 / (1.0 + (np.asarray(d_mhz) / hwhm_mhz) ** 2)


def transmon_linewidth(p):
    """Half width at half maximum (MHz) of a line with coherence time T2q*."""
    return 1.0 / (2 * np.pi * p.t2_transmon_us)


def transmon_spectroscopy(rho_cav, detunings_mhz=None, p=None, hwhm_mhz=None):
    """P(d) = sum_n P_n L(d + n chi_q) for a number-selective pi pulse at detuning d.

    Parameters
    ----------
    rho_cav : ndarray
        Cavity density matrix (or population vector).
    detunings_mhz : array, optional
        Probe grid; defaults to a fine grid covering every level of ``rho_cav``.
    """
    p = DeviceParams() if p is None else p
    pops = np.real(np.diag(rho_cav)) if np.ndim(rho_cav) == 2 else np.asarray(rho_cav, dtype=float)
    hw = transmon_linewidth(p) if hwhm_mhz is None else hwhm_mhz
    if detunings_mhz is None:
        detunings_mhz = np.linspace(-(len(pops) - 0.5) * p.chi_q_mhz, 0.5 * p.chi_q_mhz, 4001)
    d = np.asarray(detunings_mhz, dtype=float)
    prob = sum(P * lorentzian(d + n * p.chi_q_mhz, hw) for n, P in enumerate(pops))
    return SpectroscopyResult(d, np.clip(prob, 0.0, 1.0))


def peak_weights(rho_cav, p=None, hwhm_mhz=None):
    """Fock populations recovered from the spectrum sampled at d = -n chi_q.

    The tails of neighbouring lines are removed by solving the linear
    system of line overlaps, so the inversion is exact for Lorentzian lines.
    """
    p = DeviceParams() if p is None else p
    dim = np.shape(rho_cav)[0]
    hw = transmon_linewidth(p) if hwhm_mhz is None else hwhm_mhz
    probe = -np.arange(dim) * p.chi_q_mhz
    sampled = transmon_spectroscopy(rho_cav, probe, p, hw).prob
    n = np.arange(dim)
    M = lorentzian((n[None, :] - n[:, None]) * p.chi_q_mhz, hw)
    return np.linalg.solve(M, sampled)


def spectroscopy_2d(dq_grid, dm_grid, init_fock=0, p=None, omega_khz=90.0, lam_khz=28.0,
                    duration=12.0, wait=1.0):
    """Photon-addition likelihood versus transmon-comb and mixing-comb detunings (MHz).

    Starting from |2n,g,0> the path is driven for ``duration`` us and left
    idle for ``wait`` us so the reservoir relaxes. The likelihood is the
    difference between a protocol with a pi pulse selective on |2n+1> and a
    background run without it, i.e. P(2n+1, g) - P(2n+1, e). The path model
    has no |2n+1, e> level, so this is the target population.
    """
    if init_fock % 2 or not 0 <= init_fock <= 6:
        raise InvalidInput("init_fock must be one of 0, 2, 4, 6")
    p = DeviceParams() if p is None else p
    dq = np.asarray(dq_grid, dtype=float)
    dm = np.asarray(dm_grid, dtype=float)
    if not (np.all(np.isfinite(dq)) and np.all(np.isfinite(dm))):
        raise InvalidInput("detuning grids must be finite")
    path = init_fock // 2 + 1
    rho0 = np.zeros((5, 5), dtype=complex)
    rho0[0, 0] = 1.0
    _, idle = raman_path_model(0.0, 0.0, p, path)
    idle_prop = expm(liouvillian(np.zeros((5, 5)), idle) * wait)
    target = np.zeros(25, dtype=bool)
    target[[2 * 5 + 2, 3 * 5 + 3]] = True
    out = np.zeros((len(dq), len(dm)))
    if omega_khz == 0 and lam_khz == 0:
        return SpectroscopyResult(dq, out, dm)
    for i, a in enumerate(dq):
        for j, b in enumerate(dm):
            H, nm = raman_path_model(omega_khz, lam_khz, p, path, 1e3 * a, 1e3 * b)
            v = idle_prop @ (expm(liouvillian(H, nm) * duration) @ rho0.reshape(-1))
            out[i, j] = np.real(v[target].sum())
    return SpectroscopyResult(dq, np.clip(out, 0.0, 1.0), dm)


def fwhm(x, y):
    """Full width at half maximum of a single peak sampled on ``x``, by linear interpolation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = int(np.argmax(y))
    half = 0.5 * y[k]
    lo = k
    while lo > 0 and y[lo] > half:
        lo -= 1
    hi = k
    while hi < len(y) - 1 and y[hi] > half:
        hi += 1
    if y[lo] > half or y[hi] > half:
        raise InvalidInput("peak is not resolved within the grid")
    left = np.interp(half, [y[lo], y[lo + 1]], [x[lo], x[lo + 1]])
    right = np.interp(half, [y[hi], y[hi - 1]], [x[hi], x[hi - 1]])
    return float(right - left)
