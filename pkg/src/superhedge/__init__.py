"""Super-martingale calculus relative to convex families of equivalent
measures on finite filtered spaces: optional decomposition, fair pricing of
terminal claims, and self-financed superhedging strategies."""

from .decomposition import (
    Decomposition,
    alpha_coefficient,
    local_regular_witness,
    optional_decomposition_complete,
    validate_decomposition,
)
from .errors import (
    EmptyCell,
    IncompletenessDetected,
    Infeasible,
    InfeasiblePricing,
    InvalidDecomposition,
    InvalidMeasure,
    MathError,
    MeasureDependent,
    NoEquivalentMartingaleMeasure,
    NoRepresentation,
    NotAdapted,
    NotMartingale,
    NotNonincreasing,
    NotPartition,
    NotPredictable,
    NotRefining,
    NotSupermartingale,
    NotUnitClaim,
    ShapeMismatch,
    SuperhedgeError,
    UnboundedObjective,
    ValidationError,
    ZeroInitialValue,
)
from .hedging import (
    TradingStrategy,
    asset_ratio_family,
    martingale_representation,
    strategy_capital,
    superhedge,
    verify_self_financing,
)
from .measures import (
    CompletenessReport,
    CompletionMeasure,
    GeneratorHull,
    MartingalePolytope,
    Measure,
    MeasureSet,
    change_of_measure_conditional,
    completion_measures,
    conditional_expectation,
    ess_sup_conditional,
    increment_process,
    is_complete,
    is_unit_claim,
    restriction_metric,
)
from .pricing import (
    FairPriceResult,
    euro_call_price,
    euro_put_price,
    fair_price_full,
    fair_price_generated,
    sup_expectation,
)
from .processes import (
    KTerm,
    class_k_supermartingale,
    ess_sup_process,
    is_martingale,
    is_supermartingale,
    k_representation,
    unit_claim_martingale,
)
from .spaces import (
    AdaptedProcess,
    FilteredSpace,
    PredictableProcess,
    atom_of,
    build_space,
    check_adapted,
)
from .tolerances import EQ_TOL, FEAS_TOL, MASS_TOL

__version__ = "0.1.0"

__all__ = [
    "AdaptedProcess",
    "CompletenessReport",
    "CompletionMeasure",
    "Decomposition",
    "EQ_TOL",
    "FEAS_TOL",
    "FairPriceResult",
    "FilteredSpace",
    "GeneratorHull",
    "KTerm",
    "MASS_TOL",
    "MartingalePolytope",
    "Measure",
    "MeasureSet",
    "PredictableProcess",
    "TradingStrategy",
    "alpha_coefficient",
    "asset_ratio_family",
    "atom_of",
    "build_space",
    "change_of_measure_conditional",
    "check_adapted",
    "class_k_supermartingale",
    "completion_measures",
    "conditional_expectation",
    "ess_sup_conditional",
    "ess_sup_process",
    "euro_call_price",
    "euro_put_price",
    "fair_price_full",
    "fair_price_generated",
    "increment_process",
    "is_complete",
    "is_martingale",
    "is_supermartingale",
    "is_unit_claim",
    "k_representation",
    "local_regular_witness",
    "martingale_representation",
    "optional_decomposition_complete",
    "restriction_metric",
    "strategy_capital",
    "sup_expectation",
    "superhedge",
    "unit_claim_martingale",
    "validate_decomposition",
    "verify_self_financing",
    # errors
    "SuperhedgeError",
    "ValidationError",
    "MathError",
    "EmptyCell",
    "IncompletenessDetected",
    "Infeasible",
    "InfeasiblePricing",
    "InvalidDecomposition",
    "InvalidMeasure",
    "MeasureDependent",
    "NoEquivalentMartingaleMeasure",
    "NoRepresentation",
    "NotAdapted",
    "NotMartingale",
    "NotNonincreasing",
    "NotPartition",
    "NotPredictable",
    "NotRefining",
    "NotSupermartingale",
    "NotUnitClaim",
    "ShapeMismatch",
    "UnboundedObjective",
    "ZeroInitialValue",
]
