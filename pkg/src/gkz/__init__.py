"""Exact-arithmetic toolkit for A-hypergeometric (GKZ) systems.

Everything is built on plain integers and fractions: lattices of relations,
facets and regular triangulations of point configurations, truncated series
solution bases (plain and logarithmic), operator application with exact
truncation windows, contiguity inverses with certificates, and resonance
and reducibility diagnostics.
"""

from .errors import (
    ConfigurationError,
    DegenerateGammaError,
    EffortExceededError,
    GenericityError,
    GkzError,
    InconclusiveSearchError,
    InfiniteIndexError,
    InsufficientOrderError,
    InternalConsistencyError,
    PreconditionError,
    ResonanceError,
)
from .intlin import (
    CosetReps,
    LatticeBasis,
    coset_representatives,
    det,
    hermite_normal_form,
    integer_kernel,
    smith_normal_form,
)
from .geom import (
    PointConfig,
    Triangulation,
    deep_face_vector,
    facet_forms,
    is_convergence_direction,
    is_pyramid,
    kernel_lattice,
    normalized_volume,
    point_config,
    point_config_from_matrix,
    regular_triangulation,
    saturation_point,
    some_regular_triangulation,
    supp_membership,
    triangulation_from_direction,
)
from .system import (
    FaceRestriction,
    GkzSystem,
    RankResult,
    ReducibilityWitness,
    ResonanceReport,
    annihilators,
    box_operator,
    build_system,
    euler_annihilator,
    face_restrict,
    is_T_nonresonant,
    is_nonresonant,
    rank,
    reducibility_witness,
)
from .series import (
    EvalResult,
    GammaSeries,
    GammaVector,
    SupportCertificate,
    basis_for_triangulation,
    differentiate,
    evaluate,
    full_support_cone,
    gamma_choices,
    gamma_series,
)
from .logseries import (
    EpsSeries,
    LogSeries,
    choose_generic_direction,
    extract_log_basis,
    full_basis,
    perturbed_solutions,
    resonating_simplices,
)
from .weyl import (
    ContiguityResult,
    DiffOperator,
    annihilation_report,
    apply,
    box_rewrite,
    contiguity_inverse,
    euler_operator,
    raise_valuation,
    series_equal,
    valuation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
