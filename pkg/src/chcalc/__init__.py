"""Exact characteristic-class calculus with machine-checkable certificates."""

from .errors import (
    FunctorParseError,
    HypothesisError,
    InsufficientLevelError,
    UsageError,
)
from .graded import (
    GradedClass,
    Partition,
    gc_exp,
    gc_substitute,
    monomial_str,
    parse_monomial,
)
from .functors import (
    CurvatureBound,
    FunctorExpr,
    VirtualCombination,
    adams_expand,
    bound_constant,
    direct_sum,
    dual,
    functor_to_json,
    identity,
    parse_functor_json,
    substitute,
    tensor,
    trivial,
    virtual_parts,
    wedge,
)
from .bundles import (
    FormalBundle,
    LinearForm,
    PairingData,
    ahat_series,
    ch_from_chern,
    ch_of_virtual,
    chern_character,
    chern_class,
    chern_from_ch,
    chern_in_ch_generators,
    evaluate_functor,
    integrate,
    total_chern_class,
)
from .certificates import (
    DecompositionCertificate,
    FunctorLibrary,
    PipelineResult,
    VandermondeSystem,
    VerificationReport,
    adams_integral_matrix,
    build_library,
    certificate_to_json,
    comparison_pipeline,
    decompose,
    parse_certificate,
    product_split,
    required_level,
    sup_bound_constant,
    vandermonde_det,
    vandermonde_select,
    verify_certificate,
    with_verified_ranks,
)
from .geometry import (
    AcwWitness,
    NormSample,
    SphereLineBundle,
    acw_lower_bound,
    hopf_chern_number,
    hopf_curvature_norm,
    kron_norm_check,
    kron_norm_ratio,
)

__version__ = "0.1.0"
