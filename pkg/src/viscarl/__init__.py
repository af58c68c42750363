"""Viscous collective atomic recoil lasing toolkit.

Simulation and analysis of backscattering instabilities of cold atoms in a
ring cavity under optical molasses: parameter scaling, linear stability,
spectral Fokker-Planck dynamics, stochastic particle ensembles and nonlinear
steady states.
"""

__version__ = "0.1.0"

from .params import (PhysicalParams, PumpParams, ScaledParams, derive_scaled,
                     pump_ratio_to_params, rb87_params, rho_at_threshold)
from .stability import (DispersionResult, InstabilityMap, dispersion_roots,
                        instability_map, threshold_D, threshold_margin,
                        verify_scaling)
from .fpmodes import (FourierState, Trajectory, derivative,
                      instantaneous_frequency, integrate, new_state,
                      reconstruct_density, simulate)
from .ensemble import (EnsembleTrajectory, ParticleEnsemble, ensemble_bunching,
                       init_ensemble, run_full, run_overdamped,
                       step_full, step_overdamped)
from .steady import (RampPoint, SteadyStateSolution, SweepPoint,
                     continued_fraction_ratio, gaussian_approx,
                     perfect_bunching, ramp_scan, solve_steady, sweep_D)

__all__ = [
    "PhysicalParams", "PumpParams", "ScaledParams", "derive_scaled",
    "pump_ratio_to_params", "rb87_params", "rho_at_threshold",
    "DispersionResult", "InstabilityMap", "dispersion_roots",
    "instability_map", "threshold_D", "threshold_margin", "verify_scaling",
    "FourierState", "Trajectory", "derivative", "instantaneous_frequency",
    "integrate", "new_state", "reconstruct_density", "simulate",
    "EnsembleTrajectory", "ParticleEnsemble", "ensemble_bunching",
    "init_ensemble", "run_full", "run_overdamped", "step_full",
    "step_overdamped",
    "RampPoint", "SteadyStateSolution", "SweepPoint",
    "continued_fraction_ratio", "gaussian_approx", "perfect_bunching",
    "ramp_scan", "solve_steady", "sweep_D",
]
