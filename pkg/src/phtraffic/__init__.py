"""Stochastic port-Hamiltonian car-following model on a ring road.

Vehicles relax towards an optimal velocity, damp relative speed, and are
coupled through a spring-like potential on their spacings; independent
noise drives each vehicle's momentum. The package provides the model, its
linearization and spectrum, the stationary Gaussian law, an Euler-Maruyama
integrator with a reproducible noise layout, and the usual observables.
"""

from .dynamics import build_matrices, drift_carfollowing, drift_matrix, drift_phs
from .errors import (
    ConditioningError,
    ConfigError,
    DegenerateKernelError,
    DomainError,
    InfeasibleError,
    NumericalBlowupError,
    PHTrafficError,
    UndefinedACFError,
    UnsupportedConfigurationError,
)
from .integrator import SimulationConfig, Trajectory, em_step, mean_at, simulate, simulate_ensemble
from .invariant import convergence_bound, covariance_at, stationary_covariance
from .model import (
    ModelParams,
    OVFKind,
    PerturbationState,
    RingState,
    equilibrium_state,
    from_perturbation,
    spacings,
    to_perturbation,
)
from .observables import gaussian_w2, hamiltonian, perturbed_hamiltonian, speed_acf
from .spectral import long_wave_stable, spectrum, stability_margin

__version__ = "0.1.0"

__all__ = [
    "ConditioningError", "ConfigError", "DegenerateKernelError", "DomainError", "InfeasibleError",
    "ModelParams", "NumericalBlowupError", "OVFKind", "PHTrafficError", "PerturbationState",
    "RingState", "SimulationConfig", "Trajectory", "UndefinedACFError",
    "UnsupportedConfigurationError", "build_matrices", "convergence_bound", "covariance_at",
    "drift_carfollowing", "drift_matrix", "drift_phs", "em_step", "equilibrium_state",
    "from_perturbation", "gaussian_w2", "hamiltonian", "long_wave_stable", "mean_at",
    "perturbed_hamiltonian", "simulate", "simulate_ensemble", "spacings", "spectrum",
    "speed_acf", "stability_margin", "stationary_covariance", "to_perturbation",
]
