"""Cavity Ramsey under parity recovery: Wigner value at a fixed point versus time."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from ..circuitmodel import DeviceParams, KHZ
from ..errors import FitError, InvalidInput
from ..opensystem import MasterEqProblem, NoiseModel, ideal_prespa_noise, lindblad_evolve
from ..qalg import fock_operators, normalize
from .tomography import wigner


@dataclass(frozen=True)
class RamseyResult:
    times: np.ndarray
    w: np.ndarray
    freq_khz: float
    decay_per_us: float
    fit: tuple


def kerr_frame_khz(n, m, kerr_khz):
    """Frame frequency (kHz per photon) in which |n> and |m> co-rotate under Kerr."""
    return -0.5 * kerr_khz * (n + m - 1)


def damped_sine(t, c, A, gamma, f_khz, phase):
    return c + A * np.exp(-gamma * t) * np.cos(2 * np.pi * 1e-3 * f_khz * t + phase)


def fit_damped_sine(times, w, min_cycles=0.5, max_residual=0.05):
    """Fit W(t) = c + A exp(-gamma t) cos(2 pi f t + phase), f in kHz, t in us.

    Raises FitError when the data do not oscillate: flat input, a fit that
    fails, or fewer than ``min_cycles`` periods within the record.
    """
    t = np.asarray(times, dtype=float)
    w = np.asarray(w, dtype=float)
    if len(t) < 6:
        raise InvalidInput("need at least 6 samples")
    span = t[-1] - t[0]
    if np.ptp(w) < 1e-9:
        raise FitError("Ramsey signal is flat", 0.0)
    y = w - w.mean()
    dt = np.mean(np.diff(t))
    spec = np.abs(np.fft.rfft(y * np.hanning(len(y))))
    freqs = np.fft.rfftfreq(len(y), dt) * 1e3
    f0 = freqs[1 + np.argmax(spec[1:])]
    p0 = (w.mean(), np.ptp(w) / 2, 1.0 / span, f0, 0.0)
    try:
        popt, _ = curve_fit(damped_sine, t, w, p0=p0, maxfev=20000,
                            bounds=([-np.inf, 0, 0, 0, -np.inf], np.inf))
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"damped-sine fit did not converge: {exc}") from exc
    resid = float(np.sqrt(np.mean((damped_sine(t, *popt) - w) ** 2)))
    if resid > max_residual * max(np.ptp(w), 1e-12) or popt[3] * 1e-3 * span < min_cycles:
        raise FitError(f"no oscillation resolved (residual {resid:.3g}, f = {popt[3]:.3g} kHz)", resid)
    return popt


def prespa_ramsey(psi0, alpha_probe, times, p=None, kappa=None, kerr_khz=None, frame_khz=0.0,
                  noise=None, fit=True):
    """Wigner value W(alpha_probe) under Kerr and parity recovery, with a damped-sine fit.

    Parameters
    ----------
    psi0 : ndarray
        Cavity state, a superposition of two Fock levels.
    kappa : float, optional
        Rate (1/us) of the combined loss-and-recovery jump Pi_eo a; defaults
        to 1/T1A. Zero switches the dissipation off.
    frame_khz : float
        The evolution is viewed in a frame rotating at this frequency per
        photon; see :func:`kerr_frame_khz`.
    noise : NoiseModel, optional
        Extra channels on the cavity.
    """
    p = DeviceParams() if p is None else p
    psi0 = normalize(np.asarray(psi0, dtype=complex))
    dim = len(psi0)
    kappa = p.gamma_cavity if kappa is None else kappa
    K = p.kerr_khz if kerr_khz is None else kerr_khz
    _, _, num, _ = fock_operators(dim)
    H = -0.5 * KHZ * K * (num @ num - num) - KHZ * frame_khz * num
    nm = ideal_prespa_noise(dim, kappa) if kappa > 0 else NoiseModel(())
    if noise is not None:
        nm = nm + noise
    times = np.asarray(times, dtype=float)
    rhos = lindblad_evolve(MasterEqProblem(H, nm, np.outer(psi0, psi0.conj()), times))
    w = np.array([wigner(r, np.array([alpha_probe]))[0] for r in rhos])
    if not fit:
        return RamseyResult(times, w, np.nan, np.nan, ())
    popt = fit_damped_sine(times, w)
    return RamseyResult(times, w, float(popt[3]), float(popt[2]), tuple(popt))
