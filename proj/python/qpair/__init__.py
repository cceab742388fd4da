"""Cavity-mediated entangled-photon-pair source simulator."""

from qpair._core import (
    CalibrationError,
    ClassificationError,
    EnsembleStats,
    IntegrationError,
    ModelParams,
    PostSelectionError,
    PulseShape,
    StepSizeError,
    analytic_cavity1,
    analytic_cavity2,
    basis_labels,
    calibrate_pulse,
    chsh_fixed,
    chsh_optimal,
    classify_events,
    coherent_populations,
    coupling,
    detunings_from_field,
    fidelity_model,
    merit_figures,
    oracle_populations,
    preset,
    preset_names,
    pulse_area,
    rho_model,
    run_ensemble,
)

__all__ = [
    "CalibrationError",
    "ClassificationError",
    "EnsembleStats",
    "IntegrationError",
    "ModelParams",
    "PostSelectionError",
    "PulseShape",
    "StepSizeError",
    "analytic_cavity1",
    "analytic_cavity2",
    "basis_labels",
    "calibrate_pulse",
    "chsh_fixed",
    "chsh_optimal",
    "classify_events",
    "coherent_populations",
    "coupling",
    "detunings_from_field",
    "fidelity_model",
    "merit_figures",
    "oracle_populations",
    "preset",
    "preset_names",
    "pulse_area",
    "rho_model",
    "run_ensemble",
]

__version__ = "0.1.0"
