"""Device Hamiltonians and multi-tone parametric rates.

Unit conventions: frequencies are stored as ordinary frequencies (MHz or
kHz, as the field name says) and converted to angular frequency in rad/us
exactly once, when a Hamiltonian matrix is assembled. Times are in us,
decay rates in 1/us unless the name says otherwise.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidDimension, InvalidInput
from .qalg import CAVITY, RESERVOIR, TRANSMON, HilbertSpace, fock_operators

TWO_PI = 2 * np.pi
KHZ = TWO_PI * 1e-3       # kHz -> rad/us
MHZ = TWO_PI              # MHz -> rad/us


@dataclass(frozen=True)
class DeviceParams:
    chi_q_mhz: float = 1.313
    kerr_khz: float = 1.7
    chi_q_prime_khz: float = 5.5
    alpha_q_mhz: float = 201.22
    t1_cavity_us: float = 520.0
    t2_cavity_us: float = 380.0
    t1_transmon_us: float = 39.0
    t2_transmon_us: float = 17.0
    t1_reservoir_us: float = 0.27
    kappa_reservoir_mhz: float = 0.58
    gamma_up_idle_per_ms: float = 1.4
    gamma_up_driven_per_ms: float = 1.8
    thermal_e_q: float = 0.05
    thermal_1_a: float = 0.01
    nbar: float = 3.5

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not np.isfinite(val) or val < 0:
                raise InvalidInput(f"{name} must be finite and nonnegative")
        for name in ("chi_q_mhz", "t1_cavity_us", "t2_cavity_us", "t1_transmon_us",
                     "t2_transmon_us", "t1_reservoir_us", "kappa_reservoir_mhz"):
            if getattr(self, name) <= 0:
                raise InvalidInput(f"{name} must be positive")
        if self.t2_cavity_us > 2 * self.t1_cavity_us or self.t2_transmon_us > 2 * self.t1_transmon_us:
            raise InvalidInput("T2 cannot exceed 2 T1")

    @property
    def kappa_r(self):
        """Reservoir energy decay rate (1/us) from the quoted linewidth."""
        return TWO_PI * self.kappa_reservoir_mhz

    @property
    def gamma_cavity(self):
        return 1 / self.t1_cavity_us

    @property
    def gamma_phi_cavity(self):
        return 1 / self.t2_cavity_us - 0.5 / self.t1_cavity_us

    @property
    def gamma_phi_cavity_residual(self):
        """Cavity pure dephasing not explained by idle transmon heating (1/us)."""
        return max(0.0, self.gamma_phi_cavity - self.gamma_up(driven=False))

    @property
    def gamma_transmon(self):
        return 1 / self.t1_transmon_us

    @property
    def gamma_phi_transmon(self):
        return 1 / self.t2_transmon_us - 0.5 / self.t1_transmon_us

    def gamma_up(self, driven=True):
        """Transmon heating rate in 1/us."""
        return 1e-3 * (self.gamma_up_driven_per_ms if driven else self.gamma_up_idle_per_ms)

    def reservoir_consistency(self):
        """Relative mismatch between the quoted linewidth and 1/(2 pi T1r)."""
        return abs(self.kappa_reservoir_mhz * TWO_PI * self.t1_reservoir_us - 1)


# Mixing-tone displacements and bare transmon-tone amplitudes (arbitrary
# units, complex) as calibrated for the four conversion paths.
XI_CALIBRATED = (-0.058, 0.048, 0.030, 0.023)
LAMBDA_BARE_AU = (-0.98 * np.exp(-0.43j), 1.52 + 0j, 1.27 * np.exp(0.02j), 1.14 * np.exp(-0.35j))
ETA_CALIBRATED_MHZ = 2.679
DELTA_CALIBRATED_MHZ = 2.9


@dataclass(frozen=True)
class CombConfig:
    """Amplitudes of the two four-tone combs.

    ``prefactor_mix_khz`` and ``stark_coeff_mhz`` stand in for the junction
    energy times zero-point phase factors, which only ever appear in these
    two combinations.
    """

    xi: tuple = XI_CALIBRATED
    lambda_bare_khz: tuple = (0j, 0j, 0j, 0j)
    eta_mhz: float = ETA_CALIBRATED_MHZ
    delta_mhz: float = DELTA_CALIBRATED_MHZ
    prefactor_mix_khz: float = 1.0
    stark_coeff_mhz: float = 201.22

    def __post_init__(self):
        xi = tuple(complex(v) for v in self.xi)
        lam = tuple(complex(v) for v in self.lambda_bare_khz)
        if len(xi) != 4 or len(lam) != 4:
            raise InvalidInput("both combs have exactly four tones")
        if any(abs(v) >= 0.2 for v in xi):
            raise InvalidInput("mixing displacements must stay below 0.2")
        if not self.eta_mhz > 0:
            raise InvalidInput("tone spacing eta must be positive")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "lambda_bare_khz", lam)


# ---------------------------------------------------------------------------
# Hamiltonians

def _space_ops(space):
    a = space.embed(fock_operators(space.dims[CAVITY])[0], CAVITY)
    q = space.embed(fock_operators(space.dims[TRANSMON])[0], TRANSMON)
    return a, q


def dispersive_hamiltonian(p, space):
    """-chi q^dag q n - K/2 a^dag^2 a^2 - chi'/2 q^dag q a^dag^2 a^2 in rad/us."""
    if len(space.dims) < 2:
        raise InvalidDimension("needs cavity and transmon slots")
    a, q = _space_ops(space)
    nq = q.conj().T @ q
    n = a.conj().T @ a
    a2 = a.conj().T @ a.conj().T @ a @ a
    return (-MHZ * p.chi_q_mhz * nq @ n - 0.5 * KHZ * p.kerr_khz * a2
            - 0.5 * KHZ * p.chi_q_prime_khz * nq @ a2)


def _per_path(v, name):
    arr = np.broadcast_to(np.asarray(v, dtype=complex), (4,))
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} must be finite")
    return arr


def drive_hamiltonian(lam, omega, space):
    """Two-stage Raman drive on the four even photon numbers, rad/us.

    sum_n lam_n |2n,e,0><2n,g,0| + omega_n |2n+1,g,1><2n,e,0| + h.c.
    ``lam`` and ``omega`` are kHz, scalar or one value per path. Paths
    whose odd level does not fit in the cavity truncation are dropped.
    """
    if len(space.dims) != 3 or space.dims[CAVITY] < 2:
        raise InvalidDimension("drive needs (cavity, transmon, reservoir) slots")
    lam, omega = _per_path(lam, "lam"), _per_path(omega, "omega")
    H = np.zeros((space.total,) * 2, dtype=complex)
    for n in range(min(4, space.dims[CAVITY] // 2)):
        g0 = space.index(2 * n, 0, 0)
        e0 = space.index(2 * n, 1, 0)
        g1 = space.index(2 * n + 1, 0, 1)
        H[e0, g0] += KHZ * lam[n]
        H[g1, e0] += KHZ * omega[n]
    return H + H.conj().T


# ---------------------------------------------------------------------------
# multi-tone rate formulas

def mixing_rates(c):
    """Complex Rabi rates (kHz) of the four |2n,e,0> -> |2n+1,g,1> transitions.

    Direct drive by tone n plus the three-tone parametric term in which a
    beat between two mixing tones modulates the transmon frequency and a
    third tone supplies the remaining energy.
    """
    if c.eta_mhz == 0:
        raise InvalidInput("eta must be nonzero")
    xi = np.asarray(c.xi)
    r = c.stark_coeff_mhz / c.eta_mhz
    out = np.zeros(4, dtype=complex)
    for n in range(1, 5):
        corr = 0j
        for m in range(1, 5):
            for k in range(1, 5):
                for l in range(1, 5):
                    if l == k:
                        continue
                    term = 0j
                    if n - m == l - k:
                        term += xi[k - 1] * np.conj(xi[l - 1])
                    if n - m == k - l:
                        term -= np.conj(xi[k - 1]) * xi[l - 1]
                    corr += xi[m - 1] / (l - k) * term
        out[n - 1] = -c.prefactor_mix_khz * np.sqrt(2 * n - 1) * (xi[n - 1] - r * corr)
    return out


def transmon_rates(c):
    """Complex Rabi rates (kHz) of the four |2n,g> -> |2n,e> transitions.

    The transmon comb is laid out with spacing -eta (same magnitude as the
    mixing comb, opposite sign), which is what enters the parametric term.
    """
    if c.eta_mhz == 0:
        raise InvalidInput("eta must be nonzero")
    xi = np.asarray(c.xi)
    lam = np.asarray(c.lambda_bare_khz)
    r = 2 * c.stark_coeff_mhz / (-c.eta_mhz)
    out = lam.copy()
    for n in range(1, 5):
        corr = 0j
        for m in range(1, 5):
            if m == n:
                continue
            for k in range(1, 5):
                for l in range(1, 5):
                    if l != k and n - m == k - l:
                        corr += lam[m - 1] * xi[k - 1] * xi[l - 1] / (m - n)
        out[n - 1] -= r * corr
    return out


def calibrate_comb(xi=XI_CALIBRATED, lambda_bare_au=LAMBDA_BARE_AU, omega_target_khz=127.0,
                   lambda_target_khz=28.0, path=2, eta_mhz=ETA_CALIBRATED_MHZ,
                   stark_coeff_mhz=201.22, delta_mhz=DELTA_CALIBRATED_MHZ):
    """Fix the two global scale factors so path ``path`` hits the target rates.

    The mixing prefactor is chosen so Omega_path is real and positive with
    magnitude ``omega_target_khz``; the transmon tone amplitudes are scaled
    by a common kHz-per-unit factor so |lambda_path| = ``lambda_target_khz``.
    Rates are linear in both factors, so one evaluation suffices.
    """
    base = CombConfig(xi=xi, lambda_bare_khz=lambda_bare_au, eta_mhz=eta_mhz,
                      delta_mhz=delta_mhz, prefactor_mix_khz=1.0, stark_coeff_mhz=stark_coeff_mhz)
    om = mixing_rates(base)[path - 1]
    pref = omega_target_khz / om.real if abs(om.imag) < 1e-12 * abs(om) else omega_target_khz / abs(om)
    lam = transmon_rates(base)[path - 1]
    scale = lambda_target_khz / abs(lam)
    return replace(base, prefactor_mix_khz=float(pref),
                   lambda_bare_khz=tuple(scale * np.asarray(lambda_bare_au))), scale


def stark_shift(xi, p):
    """Single-tone transmon Stark shift 2 alpha_q |xi|^2 in MHz."""
    if abs(xi) >= 0.2:
        raise InvalidInput("Stark formula only holds for |xi| < 0.2")
    return 2 * p.alpha_q_mhz * abs(xi) ** 2


# ---------------------------------------------------------------------------
# comb placement

@dataclass(frozen=True)
class CombResiduals:
    """Tone minus transition frequency (kHz) for each path n = 0..3."""

    transmon_khz: np.ndarray
    mixing_khz: np.ndarray

    @property
    def max_abs_khz(self):
        return float(max(np.abs(self.transmon_khz).max(), np.abs(self.mixing_khz).max()))


def comb_frequencies(p, eta_mhz, delta_mhz, stark_mhz=0.0, offset_mhz=0.0):
    """Residual detunings of evenly spaced combs from the four target transitions.

    Transmon transition n (|2n,g> -> |2n,e>) sits at
    w_q + stark - 2n chi - chi' n (2n-1); its tone at w_q + delta - n eta.
    Mixing transition n (|2n,e,0> -> |2n+1,g,1>) sits at
    w_a + w_r - w_q - stark + 2n chi + chi' n (2n-1) - 2n K; its tone at
    w_a + w_r - w_q - delta + n eta. ``offset_mhz`` shifts every transition
    and tone of the transmon comb together (and the mixing comb oppositely).
    """
    n = np.arange(4)
    chi = 1e3 * p.chi_q_mhz
    chip = p.chi_q_prime_khz
    off = 1e3 * offset_mhz
    shift_t = 1e3 * stark_mhz - 2 * n * chi - chip * n * (2 * n - 1)
    tone_t = 1e3 * delta_mhz - 1e3 * eta_mhz * n
    eps_t = (tone_t + off) - (shift_t + off)
    trans_m = -1e3 * stark_mhz + 2 * n * chi + chip * n * (2 * n - 1) - 2 * n * p.kerr_khz
    tone_m = -1e3 * delta_mhz + 1e3 * eta_mhz * n
    eps_m = (tone_m - off) - (trans_m - off)
    return CombResiduals(eps_t, eps_m)


def optimal_comb(p, stark_mhz=0.0, eta_mhz=None):
    """Minimax placement of the transmon comb.

    Minimizes max_n |eps_t,n| over the offset (and over eta unless fixed).
    The residual is an affine function of (eta, delta) at every n, so this
    is a small linear program.

    Returns
    -------
    eta_mhz, delta_mhz, CombResiduals
    """
    from scipy.optimize import linprog

    n = np.arange(4)
    q = -(2 * n * 1e3 * p.chi_q_mhz + p.chi_q_prime_khz * n * (2 * n - 1))
    # eps_t,n = 1e3 delta - 1e3 eta n - 1e3 stark - q_n ; variables (D, E, s) in kHz
    if eta_mhz is None:
        A = np.column_stack([np.ones(4), -n])
    else:
        A = np.ones((4, 1))
    const = -1e3 * stark_mhz - q - (0 if eta_mhz is None else 1e3 * eta_mhz * n)
    nv = A.shape[1]
    c = np.zeros(nv + 1)
    c[-1] = 1.0
    A_ub = np.vstack([np.column_stack([A, -np.ones(4)]), np.column_stack([-A, -np.ones(4)])])
    b_ub = np.concatenate([-const, const])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * nv + [(0, None)], method="highs")
    delta = res.x[0] / 1e3
    eta = res.x[1] / 1e3 if eta_mhz is None else eta_mhz
    return eta, delta, comb_frequencies(p, eta, delta, stark_mhz)


# ---------------------------------------------------------------------------
# effective static model of the driven tripartite system

@dataclass(frozen=True)
class PrespaDrive:
    """Per-path rates (kHz) and residual detunings used by the static model."""

    lam_khz: np.ndarray
    omega_khz: np.ndarray
    transmon_detuning_khz: np.ndarray = field(default_factory=lambda: np.zeros(4))
    spurious: bool = True

    @classmethod
    def uniform(cls, lam_khz=28.0, omega_khz=90.0, **kw):
        return cls(np.full(4, lam_khz, dtype=complex), np.full(4, omega_khz, dtype=complex), **kw)


def spurious_coupling_khz(omega_khz, level):
    """Effective mixing amplitude on |level,e,0> -> |level+1,g,1> for odd ``level``.

    The two neighbouring mixing tones (paths (level-1)/2 and (level+1)/2)
    each sit about chi_q away from this transition. Their matrix elements
    scale as sqrt(level+1)/sqrt(2m+1) of the calibrated rates; the two
    off-resonant contributions add in quadrature.
    """
    omega = _per_path(omega_khz, "omega")
    tot = 0.0
    for m in ((level - 1) // 2, (level + 1) // 2):
        if 0 <= m < 4:
            tot += abs(omega[m]) ** 2 * (level + 1) / (2 * m + 1)
    return np.sqrt(tot)


def prespa_hamiltonian(p, space, drive, kerr=True):
    """Static Hamiltonian (rad/us) of the driven cavity-transmon-reservoir system.

    The frame co-rotates with each comb tone so that the four Raman paths
    are resonant up to the residual transmon-tone detunings. Cavity Kerr is
    kept explicitly on every level, which supplies the two-photon detuning
    2nK of path n. Optionally includes the off-resonant mixing of
    |odd,e,0> into |odd+1,g,1> that turns transmon heating into a two-photon
    gain.
    """
    dA = space.dims[CAVITY]
    H = drive_hamiltonian(drive.lam_khz, drive.omega_khz, space)
    if kerr:
        a = space.embed(fock_operators(dA)[0], CAVITY)
        ad = a.conj().T
        H = H - 0.5 * KHZ * p.kerr_khz * (ad @ ad @ a @ a)
    for n in range(min(4, (dA + 1) // 2)):
        i = space.index(2 * n, 1, 0)
        H[i, i] += -KHZ * drive.transmon_detuning_khz[n]
    if drive.spurious:
        for level in (1, 3, 5, 7):
            if level + 1 >= dA:
                break
            gk = spurious_coupling_khz(drive.omega_khz, level)
            src = space.index(level, 1, 0)
            dst = space.index(level + 1, 0, 1)
            H[dst, src] += KHZ * gk
            H[src, dst] += KHZ * gk
            H[dst, dst] += MHZ * p.chi_q_mhz
    return H
