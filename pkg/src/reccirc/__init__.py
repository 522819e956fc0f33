"""Recurrent arithmetic circuits, recurrent circuit-GNNs, and the compilers between them."""

from reccirc.circuits import (
    Gate,
    ExtendedCircuit,
    CircuitBuilder,
    EvalResult,
    ValidationReport,
    ActivationRegistry,
    DEFAULT_REGISTRY,
    CircuitError,
    EvaluationError,
    validate,
    evaluate,
    size,
    depth,
    gate_depth,
    is_balanced_dag,
    balance,
)
from reccirc.recurrent import (
    RecurrentCircuit,
    CircuitHalting,
    FixedIteration,
    ThresholdCountHalting,
    AlwaysHalt,
    RunResult,
    IterationRecord,
    NonHaltingError,
    validate_recurrent,
    halting_eval,
    run,
    fold_iteration_counter,
    lower_halting_to_circuit,
    as_recurrent,
)
from reccirc.graphs import (
    LabelledGraph,
    SymbolicLabelledGraph,
    encode_graph,
    decode_graph,
    bipartite_encode,
)
from reccirc.gnn import (
    CircuitFamily,
    LayerSpec,
    RecCGnn,
    FixedLayer,
    ThresholdCount,
    CircuitFamilyBacked,
    GnnRunResult,
    GnnNonHaltingError,
    run_gnn,
    ac_to_cgnn,
    hlt_eval_gnn,
)

__all__ = [name for name in dir() if not name.startswith("_")]
