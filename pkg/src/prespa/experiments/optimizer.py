"""Coordinate-descent tuning of comb amplitudes and phases against a simulated fidelity."""

from dataclasses import dataclass, replace

import numpy as np

from ..circuitmodel import CombConfig, DeviceParams, PrespaDrive, mixing_rates, transmon_rates
from ..codes import EXPERIMENTAL
from ..errors import InvalidInput
from .lifetime import full_model_fidelities

EQUATOR = ("pX", "mX", "pY", "mY")


def _fields(obj):
    if isinstance(obj, PrespaDrive):
        return "lam_khz", "omega_khz"
    if isinstance(obj, CombConfig):
        return "lambda_bare_khz", "xi"
    raise InvalidInput(f"cannot tune a {type(obj).__name__}")


def comb_parameters(obj):
    """Flat parameter vector and names: amplitude and phase of every tone.

    Works on a :class:`PrespaDrive` (per-path rates) or a :class:`CombConfig`
    (bare transmon amplitudes and mixing displacements).
    """
    names, vals = [], []
    for f in _fields(obj):
        for k, z in enumerate(np.asarray(getattr(obj, f), dtype=complex)):
            names += [f"{f}[{k}].abs", f"{f}[{k}].arg"]
            vals += [abs(z), np.angle(z)]
    return names, np.array(vals)


def with_parameters(obj, vals):
    """Inverse of :func:`comb_parameters`."""
    vals = np.asarray(vals, dtype=float)
    out = {}
    for i, f in enumerate(_fields(obj)):
        v = vals[8 * i:8 * i + 8]
        z = v[0::2] * np.exp(1j * v[1::2])
        out[f] = z if isinstance(obj, PrespaDrive) else tuple(z)
    return replace(obj, **out)


@dataclass
class OptimizerResult:
    best: object
    cost: float
    initial_cost: float
    history: list


def empirical_optimizer(initial, cost, coords=None, rel_step=0.1, phase_step=0.2, shrink=0.5,
                        min_rel_step=0.01, max_evals=200, tol=1e-6, callback=None):
    """Maximize ``cost(obj)`` by trying one tone parameter at a time.

    Each parameter in ``coords`` (names from :func:`comb_parameters`; all by
    default) is moved up and down by its step; a move is kept only if it
    raises the cost by more than ``tol``. After a sweep with no accepted
    move the steps shrink, until the relative amplitude step drops below
    ``min_rel_step`` or the evaluation budget is spent. Returned cost is
    never below the initial one.

    Parameters
    ----------
    cost : callable
        Maps a configuration of the same type as ``initial`` to a score.
    callback : callable, optional
        Called as ``callback(obj, score)`` on every accepted move.
    """
    names, x = comb_parameters(initial)
    idx = list(range(len(names))) if coords is None else [names.index(c) for c in coords]
    best = float(cost(initial))
    initial_cost = best
    history = [(None, 0.0, best)]
    evals = 1
    rs, ps = rel_step, phase_step
    while rs >= min_rel_step and evals < max_evals:
        improved = False
        for i in idx:
            is_phase = names[i].endswith(".arg")
            for sgn in (1, -1):
                if evals >= max_evals:
                    break
                trial = x.copy()
                if is_phase:
                    trial[i] += sgn * ps
                else:
                    trial[i] *= 1 + sgn * rs
                obj = with_parameters(initial, trial)
                score = float(cost(obj))
                evals += 1
                if score > best + tol:
                    x, best, improved = trial, score, True
                    history.append((names[i], float(trial[i]), best))
                    if callback is not None:
                        callback(obj, best)
                    break
        if not improved:
            rs *= shrink
            ps *= shrink
    return OptimizerResult(with_parameters(initial, x), best, initial_cost, history)


def equator_cost(hold_us=40.0, code=EXPERIMENTAL, p=None, dim=8, comb_to_drive=None, keys=EQUATOR):
    """Mean fidelity of the given cardinal states after ``hold_us`` in the device model.

    The returned callable accepts a :class:`PrespaDrive`, or a
    :class:`CombConfig` which is turned into per-path rates by the
    multi-tone formulas (or by ``comb_to_drive`` when given).
    """
    p = DeviceParams() if p is None else p

    def to_drive(obj):
        if isinstance(obj, PrespaDrive):
            return obj
        if comb_to_drive is not None:
            return comb_to_drive(obj)
        return PrespaDrive(np.asarray(transmon_rates(obj)), np.asarray(mixing_rates(obj)))

    def cost(obj):
        f = full_model_fidelities(to_drive(obj), [hold_us], keys, code, p, dim)
        return float(np.mean([f[k][0] for k in keys]))

    return cost
