"""Simulation and analysis of the joint time-space coherence of high-gain
parametric down-conversion: phase-matched spectra, correlation maps, and a
beam-splitter-scanning interferometer emulator."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    EdgeDecayError,
    EvanescentWaveError,
    MapExtentError,
    PdcohError,
    ResolutionError,
    RootNotFoundError,
    SamplingError,
    WavelengthRangeError,
)
from .dispersion import (
    ORDINARY,
    ExtraordinaryAtAngle,
    Ordinary,
    SellmeierSet,
    SHIPPED_SETS,
    gvd,
    index,
    load_sellmeier,
    wavenumber,
    zero_dispersion_wavelength,
)
from .phasematch import (
    CrystalConfig,
    collinear_degenerate_angle,
    delta_k,
    external_angle,
    phase_matched_locus,
)
from .spectrum import (
    GridSpec,
    SpectralGrid,
    WavelengthAngleGrid,
    build_spectrum,
    auto_grid,
    gain_function,
    spectral_density,
    to_wavelength_angle,
)
from .coherence import (
    CoherenceMap,
    CoherenceMetrics,
    correlation_map,
    direct_correlation,
    factorability_defect,
    instrument_blur,
    metrics,
)
from .interferometer import (
    AssembledMap,
    FringeTrace,
    InterferometerConfig,
    assemble_map,
    detector_signal,
    extract_visibility,
    fringe_period_path_m,
    fringe_period_stage_m,
    synthesize_trace,
)

__all__ = [
    "ConfigurationError",
    "EdgeDecayError",
    "EvanescentWaveError",
    "MapExtentError",
    "PdcohError",
    "ResolutionError",
    "RootNotFoundError",
    "SamplingError",
    "WavelengthRangeError",
    "ORDINARY",
    "ExtraordinaryAtAngle",
    "Ordinary",
    "SellmeierSet",
    "SHIPPED_SETS",
    "gvd",
    "index",
    "load_sellmeier",
    "wavenumber",
    "zero_dispersion_wavelength",
    "CrystalConfig",
    "collinear_degenerate_angle",
    "delta_k",
    "external_angle",
    "phase_matched_locus",
    "GridSpec",
    "SpectralGrid",
    "WavelengthAngleGrid",
    "build_spectrum",
    "auto_grid",
    "gain_function",
    "spectral_density",
    "to_wavelength_angle",
    "CoherenceMap",
    "CoherenceMetrics",
    "correlation_map",
    "direct_correlation",
    "factorability_defect",
    "instrument_blur",
    "metrics",
    "AssembledMap",
    "FringeTrace",
    "InterferometerConfig",
    "assemble_map",
    "detector_signal",
    "extract_visibility",
    "fringe_period_path_m",
    "fringe_period_stage_m",
    "synthesize_trace",
    "__version__",
]
