"""Monitored free fermions on hypercubic lattices: Gaussian-state trajectories,
observables, finite-size-scaling analysis and sigma-model predictions."""

from ._core import (
    CollapseResult,
    LatticeSpec,
    __version__,
    chord_length,
    covariance,
    critical_quantities,
    crossing,
    density_correlator,
    dispersion,
    energies,
    entanglement_entropy,
    extrapolate_q0,
    fcs_cumulants,
    fit_collapse,
    oracle_check,
    q_tilde,
    quality,
    rg_closed_form,
    rg_flow,
    run_trajectory,
)

__all__ = [
    "CollapseResult",
    "LatticeSpec",
    "__version__",
    "chord_length",
    "covariance",
    "critical_quantities",
    "crossing",
    "density_correlator",
    "dispersion",
    "energies",
    "entanglement_entropy",
    "extrapolate_q0",
    "fcs_cumulants",
    "fit_collapse",
    "oracle_check",
    "q_tilde",
    "quality",
    "rg_closed_form",
    "rg_flow",
    "run_trajectory",
]
