"""Parity-recovery error correction of a bosonic logical qubit: simulation toolkit."""

from importlib.metadata import PackageNotFoundError, version

from .circuitmodel import (CombConfig, DeviceParams, PrespaDrive, calibrate_comb, mixing_rates,
                           optimal_comb, prespa_hamiltonian, transmon_rates)
from .codes import CARDINAL_STATES, EXPERIMENTAL, OPTIMAL, CatParams, CodeWords, cat_state, encode
from .decoder import DecodingBasis, decode_density, process_fidelity
from .dissipator import JumpProcess, jump_count_probs, monte_carlo_unravel, trajectory_mixture
from .errors import InvalidInput, PrespaError
from .opensystem import MasterEqProblem, NoiseModel, device_noise, lindblad_evolve, steady_state

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0+unknown"
