"""Numerical verification of dimensional Brunn-Minkowski inequalities in Gauss space."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    BmGaps,
    entropic_bm_gaps,
    gaussian_relative_entropy,
    power_mean,
    sigma_comparison,
    spd_sqrt,
)
from .errors import (  # noqa: F401
    ConfigError,
    ContractionViolationError,
    DomainError,
    GaussbmError,
    InequalityViolationError,
    InversionRangeError,
    QuadratureError,
    SamplingError,
    UnsupportedFamilyError,
)
from .distributions import (  # noqa: F401
    GaussianZeroMean,
    OneDPotential,
    ProductOfOneD,
    TruncatedGaussian,
    ou_smooth,
    validate,
)
from .transport import (  # noqa: F401
    Coupling,
    LinearMap,
    Monotone1DMap,
    ProductMap,
    ScalarLinear,
    SlopeCertificate,
    brenier_from_gaussian,
    coupling,
    interpolant,
    lipschitz_certificate,
    monotone_from_1d,
    no_crossing_check,
)
from .entropy_flow import (  # noqa: F401
    EntropyCurveReport,
    GapEstimate,
    IntegrationSpec,
    VectorField,
    WeightedContext,
    bochner_identity_check,
    entropy_curve,
    local_inequality_gap,
    pushforward_entropy,
    trace_chain_margins,
)
from .geometry import (  # noqa: F401
    Box,
    Ellipsoid,
    HPolytopeSym,
    KERNEL_BACKEND,
    MinkowskiCombination,
    PNormBall,
    asymmetry_counterexample,
    combo_membership,
    gaussian_measure_exact,
    gaussian_measure_mc,
    geometric_bm_check,
    restricted_measure,
    variational_principle_check,
)
from .functional import (  # noqa: F401
    BodyIndicator,
    DiscreteMeasure,
    DVMember,
    GaussianLine,
    GaussianQuadratic,
    SupConvolutionSpec,
    TabulatedEven1D,
    bbl_check,
    bbl_homogeneous_check,
    dv_duality_check,
    exponent_map,
    holder_chain_check,
    homogeneous_exponent,
    sup_convolution,
)
from .harness import (  # noqa: F401
    DEFAULT_CONFIG,
    SUITES,
    ExperimentConfig,
    SuiteReport,
    emit_plot_data,
    run,
)
