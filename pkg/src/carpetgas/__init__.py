"""Spectra of generalized Sierpinski carpets and the quantum gases on them.

The pipeline runs carpet description -> level graph -> Laplacian spectrum ->
heat-trace model -> spectral zeta continuation -> thermodynamics, with exact
Euclidean boxes as cross-checks at every stage.
"""

from .errors import (
    CapExceededError,
    CarpetGasError,
    ConvergenceError,
    DIVERGED,
    DomainError,
    FactorizationError,
    InsufficientDataError,
    InvalidCarpetError,
    MalformedSpecError,
    PoleError,
)
from .geometry import (
    CarpetSpec,
    dimension_bounds,
    load_spec,
    preset,
    preset_names,
    validate_spec,
)
from .graph import ApproxGraph, build_graph, laplacian
from .eigensolve import Spectrum, compute_spectrum, load_spectrum, save_spectrum
from .trace import HeatTraceModel, ModelTerm, WeylSeries, analyze, heat_trace
from .zeta import ZetaExtension, build_extension, casimir_energy, zeta_direct, zeta_extended
from .thermo import (
    BECReport,
    GasState,
    bec_diagnose,
    blackbody,
    casimir_waveguide_zero_T,
    critical_densities,
    particle_density,
    solve_fugacity,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxGraph",
    "BECReport",
    "CapExceededError",
    "CarpetGasError",
    "CarpetSpec",
    "ConvergenceError",
    "DIVERGED",
    "DomainError",
    "FactorizationError",
    "GasState",
    "HeatTraceModel",
    "InsufficientDataError",
    "InvalidCarpetError",
    "MalformedSpecError",
    "ModelTerm",
    "PoleError",
    "Spectrum",
    "WeylSeries",
    "ZetaExtension",
    "analyze",
    "bec_diagnose",
    "blackbody",
    "build_extension",
    "build_graph",
    "casimir_energy",
    "casimir_waveguide_zero_T",
    "compute_spectrum",
    "critical_densities",
    "dimension_bounds",
    "heat_trace",
    "laplacian",
    "load_spec",
    "load_spectrum",
    "particle_density",
    "preset",
    "preset_names",
    "save_spectrum",
    "solve_fugacity",
    "validate_spec",
    "zeta_direct",
    "zeta_extended",
]
