"""Ideal parity-recovery dissipation: operators, analytic trajectories, Monte Carlo.

The compound jump (photon loss followed by instantaneous recovery) is
J = Pi_eo a, which is diagonal on odd Fock states with entries sqrt(n).
Because J commutes with the no-jump drift V(t) = exp(-kappa t n / 2), a
trajectory with j jumps in [0, t] depends only on j, not on the jump times.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy.optimize import brentq

from .errors import ImpossibleTrajectory, InvalidDimension, InvalidInput
from .qalg import fock_operators


def prespa_truncated(dim):
    """|1><0| + |3><2| + |5><4| + |7><6| on ``dim`` Fock levels."""
    if dim < 8:
        raise InvalidDimension("parity recovery needs at least 8 Fock levels")
    P = np.zeros((dim, dim), dtype=complex)
    for n in (0, 2, 4, 6):
        P[n + 1, n] = 1.0
    return P


def prespa_infinite(ncut):
    """Sum of |2n+1><2n| over all pairs that fit in ``ncut`` levels."""
    if ncut < 8 or ncut % 2:
        raise InvalidDimension("ncut must be even and at least 8")
    P = np.zeros((ncut, ncut), dtype=complex)
    for n in range(0, ncut - 1, 2):
        P[n + 1, n] = 1.0
    return P


@dataclass(frozen=True)
class JumpProcess:
    """Jump operator J, rate kappa (1/us) and drift generator G.

    The no-jump propagator is exp(-kappa t G); for parity recovery
    G = n/2 so that kappa G = kappa J^dag J / 2 on the code space.
    """

    jump_op: np.ndarray
    kappa: float
    no_jump_generator: np.ndarray
    diag_jump: np.ndarray = field(init=False, repr=False)
    diag_gen: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        J, G = np.asarray(self.jump_op), np.asarray(self.no_jump_generator)
        if self.kappa < 0:
            raise InvalidInput("kappa must be nonnegative")
        if np.abs(J - np.diag(np.diag(J))).max() > 1e-14 or np.abs(G - np.diag(np.diag(G))).max() > 1e-14:
            raise InvalidInput("analytic trajectories need diagonal jump and drift operators")
        if np.abs(J @ G - G @ J).max() > 1e-12:
            raise InvalidInput("jump operator does not commute with the drift")
        object.__setattr__(self, "diag_jump", np.diag(J).copy())
        object.__setattr__(self, "diag_gen", np.diag(G).real.copy())

    @classmethod
    def prespa(cls, dim, kappa, infinite=False):
        """Ideal parity recovery at rate ``kappa`` (= 1/T1 of the cavity)."""
        a, _, num, _ = fock_operators(dim)
        P = prespa_infinite(dim) if infinite else prespa_truncated(dim)
        return cls(P @ a, float(kappa), num / 2)

    @property
    def dim(self):
        return len(self.diag_jump)


def no_jump_propagator(jp, t):
    if t < 0:
        raise InvalidInput("time must be nonnegative")
    return np.diag(np.exp(-jp.kappa * t * jp.diag_gen)).astype(complex)


def _unnormalized(psi0, j, t, jp):
    return psi0 * jp.diag_jump ** j * np.exp(-jp.kappa * t * jp.diag_gen)


def trajectory_state(psi0, j, t, jp):
    """Normalized state after exactly ``j`` jumps in [0, t]."""
    if j < 0 or t < 0:
        raise InvalidInput("j and t must be nonnegative")
    v = _unnormalized(np.asarray(psi0, dtype=complex), j, t, jp)
    nrm = np.linalg.norm(v)
    if nrm < 1e-300:
        raise ImpossibleTrajectory(f"{j} jumps annihilate the initial state")
    return v / nrm


def jump_count_probs(psi0, t, jmax, jp):
    """p_j(t) for j = 0..jmax and the probability deficit 1 - sum p_j.

    p_j = (kappa t)^j / j! * || J^j V(t) psi0 ||^2, evaluated in logs so
    large j does not overflow.
    """
    if jmax < 0:
        raise InvalidInput("jmax must be nonnegative")
    psi0 = np.asarray(psi0, dtype=complex)
    kt = jp.kappa * t
    w = np.abs(psi0) ** 2 * np.exp(-2 * kt * jp.diag_gen)
    jw = np.abs(jp.diag_jump) ** 2
    probs = np.zeros(jmax + 1)
    probs[0] = w.sum()
    if kt > 0:
        mask = (w > 0) & (jw > 0)
        logw, logj = np.log(w[mask]), np.log(jw[mask])
        for j in range(1, jmax + 1):
            probs[j] = np.exp(j * np.log(kt) - lgamma(j + 1) + logw + j * logj).sum()
    deficit = max(0.0, 1.0 - probs.sum())
    return probs, deficit


@dataclass(frozen=True)
class TrajectoryMixture:
    """Weighted pure states sum_j p_j |psi_j><psi_j| at time ``t``.

    ``weights`` are renormalized over the retained terms; ``deficit`` is the
    probability mass dropped by the jump-count cutoff.
    """

    weights: np.ndarray
    states: np.ndarray
    jumps: np.ndarray
    t: float
    deficit: float = 0.0

    def density(self):
        return np.einsum("j,ja,jb->ab", self.weights, self.states, self.states.conj())

    def __iter__(self):
        return iter(zip(self.weights, self.states))


def trajectory_mixture(psi0, t, jmax, jp):
    probs, deficit = jump_count_probs(psi0, t, jmax, jp)
    keep = [j for j in range(jmax + 1) if probs[j] > 0]
    states = np.array([trajectory_state(psi0, j, t, jp) for j in keep])
    w = probs[keep]
    return TrajectoryMixture(w / w.sum(), states, np.array(keep), float(t), deficit)


def averaged_density(psi0, t, jmax, jp):
    """Ensemble density over the retained jump counts, plus the dropped mass."""
    mix = trajectory_mixture(psi0, t, jmax, jp)
    return mix.density(), mix.deficit


# ---------------------------------------------------------------------------
# Monte Carlo unraveling

@dataclass(frozen=True)
class MonteCarloResult:
    jump_counts: np.ndarray
    states: np.ndarray
    seed: int

    def density(self):
        """Ensemble average, accumulated in trajectory order."""
        rho = np.zeros((self.states.shape[1],) * 2, dtype=complex)
        for psi in self.states:
            rho += np.outer(psi, psi.conj())
        return rho / len(self.states)

    def jump_histogram(self, jmax):
        return np.bincount(np.minimum(self.jump_counts, jmax + 1), minlength=jmax + 2)[:jmax + 1]


def _one_trajectory(psi0, t, jp, seed, idx):
    rng = np.random.default_rng([seed, idx])
    psi = psi0.copy()
    rates = 2 * jp.kappa * jp.diag_gen
    jumps = 0
    remaining = float(t)
    while True:
        pops = np.abs(psi) ** 2

        def survival(s):
            return float(np.sum(pops * np.exp(-rates * s)))

        r = rng.random()
        if survival(remaining) > r:
            psi = psi * np.exp(-0.5 * rates * remaining)
            return jumps, psi / np.linalg.norm(psi)
        s = brentq(lambda s: survival(s) - r, 0.0, remaining, xtol=1e-15, rtol=1e-15)
        psi = jp.diag_jump * psi * np.exp(-0.5 * rates * s)
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ImpossibleTrajectory("sampled jump annihilates the state")
        psi = psi / nrm
        jumps += 1
        remaining -= s


def monte_carlo_unravel(psi0, t, ntraj, seed, jp, threads=1):
    """Sample ``ntraj`` jump trajectories of length ``t``.

    Jump times are drawn exactly: the no-jump norm decays as a sum of
    exponentials, and each waiting time solves norm^2 = r for a uniform r.
    Each trajectory owns a generator seeded by (seed, index), so the output
    is identical for any ``threads``.
    """
    if ntraj < 1:
        raise InvalidInput("ntraj must be at least 1")
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)

    def run(idx):
        return _one_trajectory(psi0, t, jp, seed, idx)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(ntraj)))
    else:
        results = [run(i) for i in range(ntraj)]
    counts = np.array([r[0] for r in results])
    states = np.array([r[1] for r in results])
    return MonteCarloResult(counts, states, seed)
