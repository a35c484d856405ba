"""T4C code words, logical encodings and odd-parity cat states."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidDimension, InvalidInput, TruncationError

CODE_LEVELS = (1, 3, 5, 7)


@dataclass(frozen=True)
class CodeWords:
    """Real amplitudes of |0_L> = c1|1> + c5|5> and |1_L> = c3|3> + c7|7>."""

    c1: float
    c3: float
    c5: float
    c7: float

    def __post_init__(self):
        vals = self.as_array()
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise InvalidInput(f"code-word amplitudes must be finite and nonnegative, got {vals}")
        if abs(self.c1 ** 2 + self.c5 ** 2 - 1) > 1e-12 or abs(self.c3 ** 2 + self.c7 ** 2 - 1) > 1e-12:
            raise InvalidInput("code words are not normalized")

    def as_array(self):
        """Amplitudes in config order (c1, c3, c5, c7)."""
        return np.array([self.c1, self.c3, self.c5, self.c7], dtype=float)

    @classmethod
    def from_array(cls, vals):
        vals = [float(v) for v in vals]
        if len(vals) != 4:
            raise InvalidInput("codewords need four amplitudes (c1, c3, c5, c7)")
        return cls(*vals)

    def fock_amplitudes(self):
        """Map Fock level -> amplitude for both words, levels 1, 3, 5, 7."""
        return {1: self.c1, 3: self.c3, 5: self.c5, 7: self.c7}


EXPERIMENTAL = CodeWords(np.sqrt(0.35), np.sqrt(0.9), np.sqrt(0.65), np.sqrt(0.1))


@dataclass(frozen=True)
class LogicalAmplitudes:
    x: complex
    y: complex

    def __post_init__(self):
        if abs(abs(self.x) ** 2 + abs(self.y) ** 2 - 1) > 1e-12:
            raise InvalidInput("logical amplitudes must satisfy |x|^2 + |y|^2 = 1")

    def ket(self):
        return np.array([self.x, self.y], dtype=complex)


_S = 1 / np.sqrt(2)
CARDINAL_STATES = {
    "pZ": LogicalAmplitudes(1.0, 0.0),
    "mZ": LogicalAmplitudes(0.0, 1.0),
    "pX": LogicalAmplitudes(_S, _S),
    "mX": LogicalAmplitudes(_S, -_S),
    "pY": LogicalAmplitudes(_S, 1j * _S),
    "mY": LogicalAmplitudes(_S, -1j * _S),
}


@dataclass(frozen=True)
class CatParams:
    alpha: complex
    parity_sign: int = 1

    def __post_init__(self):
        if self.parity_sign not in (1, -1):
            raise InvalidInput("parity_sign must be +1 or -1")


def optimal_codewords():
    """Amplitudes that equalize the first two photon-number moments of both words.

    With a = c1^2 and b = c3^2 the conditions <n>_15 = <n>_37 and
    <n^2>_15 = <n^2>_37 read 5 - 4a = 7 - 4b and 25 - 24a = 49 - 40b,
    i.e. b - a = 1/2 and 40b - 24a = 24, giving a = 1/4, b = 3/4.
    """
    # substitute b = a + 1/2 into the second condition, in exact rationals
    a = (Fraction(24) - 40 * Fraction(1, 2)) / (40 - 24)
    b = a + Fraction(1, 2)
    return CodeWords(np.sqrt(float(a)), np.sqrt(float(b)), np.sqrt(float(1 - a)), np.sqrt(float(1 - b)))


OPTIMAL = optimal_codewords()


def t4c_words(cw, dim):
    """Logical words as vectors on ``dim`` Fock levels."""
    if dim < 8:
        raise InvalidDimension("the T4C code needs at least 8 Fock levels")
    zero = np.zeros(dim, dtype=complex)
    one = np.zeros(dim, dtype=complex)
    zero[1], zero[5] = cw.c1, cw.c5
    one[3], one[7] = cw.c3, cw.c7
    return zero, one


def encode(cw, xy, dim):
    zero, one = t4c_words(cw, dim)
    psi = xy.x * zero + xy.y * one
    return psi / np.linalg.norm(psi)


def cavity_moments(cw):
    """First and second photon-number moments of both words.

    Returns
    -------
    n15, n37, n2_15, n2_37 : float
    """
    p1, p3, p5, p7 = cw.c1 ** 2, cw.c3 ** 2, cw.c5 ** 2, cw.c7 ** 2
    return (p1 + 5 * p5, 3 * p3 + 7 * p7, p1 + 25 * p5, 9 * p3 + 49 * p7)


def coherent_amplitudes(alpha, dim):
    """Fock amplitudes exp(-|a|^2/2) a^n / sqrt(n!) for n < dim, built recursively."""
    amp = np.empty(dim, dtype=complex)
    amp[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amp[n] = amp[n - 1] * alpha / np.sqrt(n)
    return amp


def cat_state(p, dim):
    """(|alpha> - parity_sign |-alpha>)/N on ``dim`` Fock levels.

    ``parity_sign=+1`` gives the odd cat. N is computed in the truncated
    space so the result is exactly normalized there.
    """
    if abs(p.alpha) ** 2 >= dim / 3:
        raise TruncationError(f"|alpha|^2={abs(p.alpha) ** 2:.3g} too large for {dim} levels")
    coh = coherent_amplitudes(p.alpha, dim)
    tail = 1.0 - float(np.sum(np.abs(coh) ** 2))
    if tail > 1e-6:
        raise TruncationError(f"coherent state tail {tail:.2e} above 1e-6 at {dim} levels")
    n = np.arange(dim)
    keep = (n % 2 == 1) if p.parity_sign == 1 else (n % 2 == 0)
    psi = np.where(keep, 2 * coh, 0)
    nrm = np.linalg.norm(psi)
    if nrm < 1e-300:
        # alpha -> 0 limit: lowest Fock level of the chosen parity
        psi = np.zeros(dim, dtype=complex)
        psi[1 if p.parity_sign == 1 else 0] = 1.0
        return psi
    return psi / nrm
