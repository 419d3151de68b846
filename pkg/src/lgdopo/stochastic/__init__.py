"""Positive-P ensemble simulation and empirical squeezing spectra."""
from .backend import available as available_backends, get_kernel
from .ensemble import (DivergenceReport, EnsembleResult, QuadratureSeries, SimConfig,
                       default_selectors, run_ensemble, simulate_spectra)
from .model import (MODELS, StateLayout, classical_state, diffusion, drift, noise_matrix,
                    step)
from .rng import CounterStream, trajectory_key
from .spectrum import estimate_spectrum, periodograms, spectrum_from_periodograms
