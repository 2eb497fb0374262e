"""Solitary waves of the coupled Schroedinger-Boussinesq system.

Closed-form profiles, the scalar Sturm-Liouville spectra behind their
stability, the Hessian of the reduced action, split-step time integration and
orbital-distance tracking.
"""
from ._accel import HAVE_NUMBA, backend
from .errors import (BlowupDetected, ConvergenceError, DegenerateConstraints, DegeneratePhase, DomainError,
                     SBWaveError, UsageError)
from .evolve import IntegratorConfig, Scheme, State, conservation_drift, init_state, run, step
from .functionals import (HessianMode, HessianReport, InvariantTriple, action_gradient, charge_q1, charge_q2,
                          d_hessian, det_closed, energy, invariants, region_scan)
from .grid import Grid, make_grid
from .orbit import (OrbitalFit, PerturbSpec, StabilityReport, apply_symmetry, optimal_phase, orbital_distance,
                    stability_experiment)
from .params import (DerivedScales, PhysParams, StabilityVerdict, WaveParams, check_existence,
                     check_stability_criterion, compatible_gamma, consistent_phys, derive_scales)
from .spectral import (OpKind, assemble_operator, certify_negative_index, constrained_lowest, eigen_lowest,
                       hform_decomposed, hform_direct, negative_eigenvalue_count, spectral_reports)
from .waveforms import Profile, ResidualReport, build_profile, sample_profile, stationary_residual

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
