"""Trapped-ion simulator for the two-photon quantum Rabi model.

Realizes the model on a single modeled ion driven by second-sideband
lasers, with and without a continuous dynamical-decoupling carrier drive,
under Ornstein-Uhlenbeck magnetic-dephasing noise, and quantifies the
fidelity of the realization against the ideal model.
"""

__version__ = "0.1.0"

from .errors import (CalibrationInfeasibleError, ConfigurationError,
                     DecouplingInfeasibleError, InvalidDimensionError,
                     InvalidScanError, TruncationOverflowError)
from .hilbert import FockSpace, boson_operators, expectation, joint
from .models import (IonBase, IonConfig, LaserDrive, SchemeConfig,
                     TwoPhotonRabiParams, displacement_exponential, h_2pqrm,
                     h_ion_full, h_two_photon_interaction, protected_config,
                     simulated_params, unprotected_config)
from .noise import (NoisePath, OUParams, coherence_curve, diffusion_from_t2,
                    diffusion_from_t2_approx, generate_path, ou_step,
                    spectral_density, xi_integral_variance)
from .evolve import (EnsembleResult, IntegratorSettings, RunSpec,
                     TrajectoryRecord, ensemble, fidelity, frame_align,
                     propagate, reference_states, run_trajectory)
from .spectrum import SpectrumScan, collapse_scan, eigenspectrum

__all__ = [name for name in dir() if not name.startswith("_")]
