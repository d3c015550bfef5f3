"""Networks as matrix-vector sequences, measured in Sobolev norms.

The package studies fixed-architecture networks as explicit lists of
(matrix, bias) pairs: realizing them and their derivatives, concatenating
them, measuring W^{k,p} distances by quadrature, constructing
difference-quotient sequences whose realizations approximate the
activation's derivative, checking the matching error-versus-norm rate
bounds, and training small networks against derivative-supervised losses.
"""

from ._kernels import BACKEND_NAME, available_backends
from .activations import (
    CATALOG,
    Activation,
    DegenerateActivationError,
    MAX_DERIV_ORDER,
    find_z0,
    get_activation,
)
from .calculus import (
    CallableJetSource,
    Jet,
    NetworkJetSource,
    QuadratureEvalError,
    QuadratureGrid,
    SobolevSpec,
    diff_quotient_error,
    lp_error,
    make_grid,
    multi_indices,
    sobolev_error,
)
from .constructions import (
    ChainedDerivativeTarget,
    ConstructionError,
    CoordinateTarget,
    PairRealization,
    ProjectionResult,
    UnboundedTarget,
    coordinate_projection_net,
    derivative_limit_sequence,
    diff_quotient_net,
    diff_quotient_pair,
    range_covering_net,
    unbounded_limit_sequence,
)
from .networks import (
    Architecture,
    InputShapeError,
    NeuralNetwork,
    clamp_weights,
    concat,
    flatten_params,
    load_network,
    network,
    param_count,
    random_init,
    realize,
    realize_batch,
    realize_jet,
    save_network,
    total_norm,
    unflatten_params,
)
from .rates import (
    RateBound,
    RateRecord,
    UnsupportedRateError,
    bound_constant,
    elu_quotient_error,
    fit_decay_slope,
    softsign_quotient_error,
    verify_rate,
)
from .svg import ChartError, Series, render_chart
from .training import (
    ExperimentResult,
    PRESETS,
    PiecewiseLinear,
    PiecewiseQuadratic,
    TrainConfig,
    TrainingSummary,
    TrialResult,
    adam_step,
    loss_gradient,
    preset,
    random_piecewise_linear,
    random_piecewise_quadratic,
    run_experiment,
    run_trial,
    scatter_rows,
    sobolev_loss,
    summary_medians,
)

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "Architecture",
    "BACKEND_NAME",
    "CATALOG",
    "CallableJetSource",
    "ChainedDerivativeTarget",
    "ChartError",
    "ConstructionError",
    "CoordinateTarget",
    "DegenerateActivationError",
    "ExperimentResult",
    "InputShapeError",
    "Jet",
    "MAX_DERIV_ORDER",
    "NetworkJetSource",
    "NeuralNetwork",
    "PRESETS",
    "PairRealization",
    "PiecewiseLinear",
    "PiecewiseQuadratic",
    "ProjectionResult",
    "QuadratureEvalError",
    "QuadratureGrid",
    "RateBound",
    "RateRecord",
    "Series",
    "SobolevSpec",
    "TrainConfig",
    "TrainingSummary",
    "TrialResult",
    "UnboundedTarget",
    "UnsupportedRateError",
    "__version__",
    "adam_step",
    "available_backends",
    "bound_constant",
    "clamp_weights",
    "concat",
    "coordinate_projection_net",
    "derivative_limit_sequence",
    "diff_quotient_error",
    "diff_quotient_net",
    "diff_quotient_pair",
    "elu_quotient_error",
    "find_z0",
    "fit_decay_slope",
    "flatten_params",
    "get_activation",
    "load_network",
    "loss_gradient",
    "lp_error",
    "make_grid",
    "multi_indices",
    "network",
    "param_count",
    "preset",
    "random_init",
    "random_piecewise_linear",
    "random_piecewise_quadratic",
    "range_covering_net",
    "realize",
    "realize_batch",
    "realize_jet",
    "render_chart",
    "run_experiment",
    "run_trial",
    "save_network",
    "scatter_rows",
    "sobolev_error",
    "sobolev_loss",
    "softsign_quotient_error",
    "summary_medians",
    "total_norm",
    "unbounded_limit_sequence",
    "unflatten_params",
    "verify_rate",
]
