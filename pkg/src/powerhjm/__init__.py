"""Consistent modelling of electricity forward, spot, intraday, and option prices.

The package builds every traded product from one primitive, the forward
kernel: the market noise times the structural conditional mean, recentred
on today's price forward curve. See the README for an overview and the
demos directory for worked examples.
"""

from .curve import PriceForwardCurve, dump_pfc, load_pfc
from .errors import (
    CoverageError,
    CurveFormatError,
    DegenerateModelError,
    DomainError,
    InfeasibleFitError,
)
from .noise import (
    GeneralVolatility,
    NoiseState,
    VolatilityStructure,
    advance_noise,
    simulate_noise,
)
from .options import (
    LognormalFit,
    OptionSpec,
    PriceEstimate,
    call_price,
    conditional_call,
    conditional_put,
    futures_moments,
    futures_variance,
    lognormal_fit,
    mc_option_price,
    moment_matched_price,
    put_price,
)
from .pricing import (
    FlatDiscountCurve,
    MarketState,
    TabulatedDiscountCurve,
    day_ahead_spot,
    discounted_futures,
    forward_kernel,
    futures_price,
    id_index,
    initial_state,
)
from .quadrature import QuadratureSpec
from .sim import (
    ScenarioEnsemble,
    SimulationConfig,
    estimate,
    mean_se,
    simulate_ensemble,
    simulate_state,
)
from .structural import (
    AffineCoefficients,
    CurveConsistentModel,
    LuciaSchwartzModel,
    MeritOrderSinhModel,
    OUFactor,
    OUFactorModel,
    SchwartzSmithModel,
    StructuralModel,
    model_from_config,
    model_from_json,
    wrap_with_pfc,
)

__version__ = "0.1.0"

__all__ = [
    "PriceForwardCurve",
    "load_pfc",
    "dump_pfc",
    "CoverageError",
    "CurveFormatError",
    "DegenerateModelError",
    "DomainError",
    "InfeasibleFitError",
    "GeneralVolatility",
    "NoiseState",
    "VolatilityStructure",
    "advance_noise",
    "simulate_noise",
    "LognormalFit",
    "OptionSpec",
    "PriceEstimate",
    "call_price",
    "conditional_call",
    "conditional_put",
    "futures_moments",
    "futures_variance",
    "lognormal_fit",
    "mc_option_price",
    "moment_matched_price",
    "put_price",
    "FlatDiscountCurve",
    "MarketState",
    "TabulatedDiscountCurve",
    "day_ahead_spot",
    "discounted_futures",
    "forward_kernel",
    "futures_price",
    "id_index",
    "initial_state",
    "QuadratureSpec",
    "ScenarioEnsemble",
    "SimulationConfig",
    "estimate",
    "mean_se",
    "simulate_ensemble",
    "simulate_state",
    "AffineCoefficients",
    "CurveConsistentModel",
    "LuciaSchwartzModel",
    "MeritOrderSinhModel",
    "OUFactor",
    "OUFactorModel",
    "SchwartzSmithModel",
    "StructuralModel",
    "model_from_config",
    "model_from_json",
    "wrap_with_pfc",
]
