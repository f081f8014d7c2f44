"""Spectral solver and verification lab for the quadratic second-harmonic
Schrodinger system on the 2-sphere."""

__version__ = "0.1.0"

from .errors import BlowUpError, ConfigurationError, NumericalFailure, PicardConvergenceError
from .resonance import SigmaRational
from .spectral import (
    SPHERE2,
    SpectralField,
    SpectrumModel,
    SphereGrid,
    analyze,
    bracket,
    build_grid,
    dyadic_project,
    eigenvalue,
    l2_inner,
    project_degree,
    sobolev_norm,
    synthesize,
)
from .dynamics import (
    EvolutionParams,
    GroupSpec,
    Trajectory,
    group_u,
    group_v,
    linear_propagate,
    nonlinear_terms,
    picard_iterate,
    splitstep_evolve,
)
from .observables import ConservationReport, conservation_report, energy, mass

__all__ = [
    "BlowUpError", "ConfigurationError", "NumericalFailure", "PicardConvergenceError",
    "SigmaRational", "SPHERE2", "SpectralField", "SpectrumModel", "SphereGrid",
    "analyze", "bracket", "build_grid", "dyadic_project", "eigenvalue", "l2_inner",
    "project_degree", "sobolev_norm", "synthesize",
    "EvolutionParams", "GroupSpec", "Trajectory", "group_u", "group_v",
    "linear_propagate", "nonlinear_terms", "picard_iterate", "splitstep_evolve",
    "ConservationReport", "conservation_report", "energy", "mass",
    "__version__",
]
