"""Single-photon-source quality from N-norms of filtered photon correlations.

The library builds Lindblad models for a family of emitter presets, solves
for their steady states, attaches two-level sensors to read out
frequency-filtered k-photon correlations, and condenses the correlation
ladder into N-norm figures of merit plus photon-number probabilities.
"""

__version__ = "0.1.0"

from .analytic import (
    Analytic2lsParams,
    filtered_population_closed,
    gn_recursion,
    hyp1f2,
    pn_closed_form,
)
from .criterion import (
    BenchmarkOrdering,
    NormReport,
    benchmark_compare,
    infinity_norm,
    n_norm,
)
from .errors import (
    DegenerateSteadyStateError,
    DimensionCapError,
    NonConvergentSeriesError,
    ParseError,
    ShapeError,
    TruncationError,
    UndefinedCorrelationError,
    ValidationError,
)
from .hilbert import (
    ComplexOperator,
    DensityMatrix,
    HilbertSpace,
    bosonic_lowering,
    embed,
    expectation,
    identity,
    partial_trace,
    two_level_lowering,
)
from .lindblad import (
    CascadedPair,
    Dissipator,
    LindbladModel,
    Superoperator,
    build_liouvillian,
    steady_state,
    unfiltered_gk,
)
from .models import (
    EmitterPreset,
    biexciton,
    build_preset,
    cascaded_2ls,
    coherent_2ls,
    incoherent_2ls,
    polariton_blockade,
    preset_names,
    twolevel_in_cavity,
    verify_truncation,
)
from .photon_stats import (
    CorrelatorLadder,
    PhotonDistribution,
    distribution_from_correlators,
    filip_mista_bound,
    fock_distribution,
    is_strong_quantum,
    pn_from_correlators,
    pn_with_flag,
    unnormalized_ladder,
)
from .sensors import (
    FilteredCorrelation,
    SensorBank,
    attach_sensors,
    filtered_gk,
    filtered_population,
    frequency_scan,
)

__all__ = [
    "__version__",
    "Analytic2lsParams",
    "BenchmarkOrdering",
    "CascadedPair",
    "ComplexOperator",
    "CorrelatorLadder",
    "DegenerateSteadyStateError",
    "DensityMatrix",
    "DimensionCapError",
    "Dissipator",
    "EmitterPreset",
    "FilteredCorrelation",
    "HilbertSpace",
    "LindbladModel",
    "NonConvergentSeriesError",
    "NormReport",
    "ParseError",
    "PhotonDistribution",
    "SensorBank",
    "ShapeError",
    "Superoperator",
    "TruncationError",
    "UndefinedCorrelationError",
    "ValidationError",
    "attach_sensors",
    "benchmark_compare",
    "biexciton",
    "bosonic_lowering",
    "build_liouvillian",
    "build_preset",
    "cascaded_2ls",
    "coherent_2ls",
    "distribution_from_correlators",
    "embed",
    "expectation",
    "filip_mista_bound",
    "filtered_gk",
    "filtered_population",
    "filtered_population_closed",
    "fock_distribution",
    "frequency_scan",
    "gn_recursion",
    "hyp1f2",
    "identity",
    "incoherent_2ls",
    "infinity_norm",
    "is_strong_quantum",
    "n_norm",
    "partial_trace",
    "pn_closed_form",
    "pn_from_correlators",
    "pn_with_flag",
    "polariton_blockade",
    "preset_names",
    "steady_state",
    "twolevel_in_cavity",
    "two_level_lowering",
    "unfiltered_gk",
    "unnormalized_ladder",
    "verify_truncation",
]
