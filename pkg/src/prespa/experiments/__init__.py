"""Simulated measurement protocols."""

from .lifetime import (MODES, LifetimeResult, free_fock_process, full_model_fidelities,
                       kerr_phase, lifetime_experiment)
from .optimizer import (OptimizerResult, comb_parameters, empirical_optimizer, equator_cost,
                        with_parameters)
from .ramsey import RamseyResult, fit_damped_sine, kerr_frame_khz, prespa_ramsey
from .spectroscopy import (SpectroscopyResult, fwhm, peak_weights, spectroscopy_2d,
                           transmon_spectroscopy)
from .tomography import (ProcessMatrix, Reconstruction, chi_matrix, identity_channel,
                         ideal_prespa_channel, noisy_prespa_channel, reconstruct_density, wigner)
