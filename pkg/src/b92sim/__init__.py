"""B92 quantum key distribution: simulation and security analysis."""

from .errors import ConsistencyError, DomainError, ParameterError, SingularityError
from .exponent import (
    ExponentPoint,
    ExponentSolution,
    SolverOptions,
    TwoBasisSampling,
    b92_angle_bounds,
    exponent_decomposed,
    exponent_direct,
    iid_probability,
    min_exponent,
    zero_region_contains,
)
from .protocol import (
    B92Record,
    ExpectedRates,
    ProtocolParams,
    Tallies,
    expected_rates,
    reduction_equivalence,
    run_b92,
    run_protocol1,
)
from .quantum import (
    DensityMatrix,
    FilterOp,
    KrausChannel,
    Povm,
    StateVector,
    apply_channel_on_B,
    b92_povm,
    check_pair_basis,
    depolarize,
    depolarizing_channel,
    dual_state,
    error_povm_element,
    filter_op,
    identity_channel,
    measure_sample,
    nonmax_entangled_state,
    signal_state,
)
from .security import (
    BoundResult,
    ObservedRates,
    SlackVector,
    binary_entropy,
    delta_param,
    failure_budget,
    finite_size_bound,
    key_rate,
    phase_error_bound,
    relative_entropy,
    tradeoff_curve,
)

__version__ = "0.1.0"

__all__ = [
    "B92Record",
    "BoundResult",
    "ConsistencyError",
    "DensityMatrix",
    "DomainError",
    "ExpectedRates",
    "ExponentPoint",
    "ExponentSolution",
    "FilterOp",
    "KrausChannel",
    "ObservedRates",
    "ParameterError",
    "Povm",
    "ProtocolParams",
    "SingularityError",
    "SlackVector",
    "SolverOptions",
    "StateVector",
    "Tallies",
    "TwoBasisSampling",
    "apply_channel_on_B",
    "b92_angle_bounds",
    "b92_povm",
    "binary_entropy",
    "check_pair_basis",
    "delta_param",
    "depolarize",
    "depolarizing_channel",
    "dual_state",
    "error_povm_element",
    "expected_rates",
    "exponent_decomposed",
    "exponent_direct",
    "failure_budget",
    "filter_op",
    "finite_size_bound",
    "identity_channel",
    "iid_probability",
    "key_rate",
    "measure_sample",
    "min_exponent",
    "nonmax_entangled_state",
    "phase_error_bound",
    "reduction_equivalence",
    "relative_entropy",
    "run_b92",
    "run_protocol1",
    "signal_state",
    "tradeoff_curve",
    "zero_region_contains",
    "__version__",
]
