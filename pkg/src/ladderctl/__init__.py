"""ladderctl: chirped-pulse adiabatic controls for anharmonic quantum ladders.

Synthesizes single-pulse controls (a monotone chirp plus an amplitude with a
designed zero set) that realize any prescribed permutation of eigenstate
populations on an N-level ladder, and verifies them by integrating the
slow-time propagator over ensembles of systems with uncertain couplings.
"""
from .controls import AmplitudeProfile, ChirpProfile, ControlProfile, Permutation
from .ensemble import (EnsembleReport, SweepResult, epsilon_sweep,
                       run_permutation_campaign, sample_ensemble)
from .errors import (AssumptionViolationError, ConvergenceError,
                     LadderctlError, ScaleSeparationError, SweepWindowError,
                     SynthesisError, TrackingAmbiguityError, ValidationError)
from .ladder import (EnsembleBounds, LadderSystem, build_h, build_h1,
                     build_h_r, is_hermitian)
from .propagator import (LabFrameReport, PropagatorTrajectory,
                         SimulationConfig, adiabatic_propagator, integrate_u,
                         lab_frame_validate, transfer_fidelity)
from .spectral import (BranchDiagram, CrossingRecord, CrossingSet,
                       assert_nondegenerate, branch_slopes_at_crossing,
                       crossing_set, crossing_time, min_eigengap,
                       track_branches, tridiag_char_poly)
from .synthesis import (build_amplitude, calibrate_amplitude,
                        required_amplitude, spread_chirp,
                        synthesize_permutation_control,
                        synthesize_transfer_control, validate_chirp,
                        zero_set_for_permutation, zero_set_for_transfer)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeProfile", "ChirpProfile", "ControlProfile", "Permutation",
    "EnsembleReport", "SweepResult", "epsilon_sweep",
    "run_permutation_campaign", "sample_ensemble",
    "AssumptionViolationError", "ConvergenceError", "LadderctlError",
    "ScaleSeparationError", "SweepWindowError", "SynthesisError",
    "TrackingAmbiguityError", "ValidationError",
    "EnsembleBounds", "LadderSystem", "build_h", "build_h1", "build_h_r",
    "is_hermitian",
    "LabFrameReport", "PropagatorTrajectory", "SimulationConfig",
    "adiabatic_propagator", "integrate_u", "lab_frame_validate",
    "transfer_fidelity",
    "BranchDiagram", "CrossingRecord", "CrossingSet", "assert_nondegenerate",
    "branch_slopes_at_crossing", "crossing_set", "crossing_time",
    "min_eigengap", "track_branches", "tridiag_char_poly",
    "build_amplitude", "calibrate_amplitude", "required_amplitude",
    "spread_chirp", "synthesize_permutation_control",
    "synthesize_transfer_control", "validate_chirp",
    "zero_set_for_permutation", "zero_set_for_transfer",
    "__version__",
]
