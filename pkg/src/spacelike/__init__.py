"""Localized quantum interventions at spacetime events.

The package evaluates sequences of Kraus-map interventions on composite
systems under every chronological ordering a Lorentz frame can induce,
and certifies that spacelike-separated product interventions give
ordering-independent record probabilities and no superluminal signaling.
"""

from .linalg import (
    CMatrix,
    DimensionError,
    dagger,
    is_hermitian,
    is_unitary,
    kron,
    matmul,
    max_abs_diff,
    partial_trace,
    trace,
)
from .spacetime import (
    Event,
    Frame,
    IntervalKind,
    TieReport,
    boost,
    causal_order,
    classify,
    frame_ordering,
    linear_extensions,
)
from .intervention import (
    CommutationReport,
    CompletenessError,
    Intervention,
    LocalIntervention,
    Outcome,
    apply,
    commutes,
    embed,
    povm_elements,
    random_intervention,
)
from .experiment import (
    ConditionalLocal,
    EvaluationResult,
    Evolution,
    InvarianceReport,
    NoSignalingReport,
    Scenario,
    Station,
    TieError,
    check_no_signaling,
    check_order_invariance,
    evaluate_in_frame,
    evaluate_in_order,
    marginal,
    state_at_cut,
)
from .scenarios import (
    AnalyzerDirection,
    builtin_scenarios,
    chsh,
    correlation,
    dimension_change_scenario,
    eprb,
    export_builtin_scenarios,
    noncommuting_counterexample,
    random_product_scenario,
    spin_analyzer,
    teleport_intervention,
)
from .schema import SchemaError, parse_scenario, serialize_scenario

__all__ = [
    "AnalyzerDirection",
    "CMatrix",
    "CommutationReport",
    "CompletenessError",
    "ConditionalLocal",
    "DimensionError",
    "EvaluationResult",
    "Event",
    "Evolution",
    "Frame",
    "IntervalKind",
    "Intervention",
    "InvarianceReport",
    "LocalIntervention",
    "NoSignalingReport",
    "Outcome",
    "Scenario",
    "SchemaError",
    "Station",
    "TieError",
    "TieReport",
    "apply",
    "boost",
    "builtin_scenarios",
    "causal_order",
    "check_no_signaling",
    "check_order_invariance",
    "chsh",
    "classify",
    "commutes",
    "correlation",
    "dagger",
    "dimension_change_scenario",
    "embed",
    "eprb",
    "evaluate_in_frame",
    "evaluate_in_order",
    "export_builtin_scenarios",
    "frame_ordering",
    "is_hermitian",
    "is_unitary",
    "kron",
    "linear_extensions",
    "marginal",
    "matmul",
    "max_abs_diff",
    "noncommuting_counterexample",
    "parse_scenario",
    "partial_trace",
    "povm_elements",
    "random_intervention",
    "random_product_scenario",
    "serialize_scenario",
    "spin_analyzer",
    "state_at_cut",
    "teleport_intervention",
    "trace",
]

__version__ = "0.1.0"
