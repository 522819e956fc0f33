"""Recurrent execution of extended circuits.

A recurrent circuit re-runs its underlying circuit, feeding each memory
gate (every input gate and every auxiliary memory gate) the value of its
recurrent-edge source, until a halting function over (iteration number,
halting-gate values) fires.  Iteration numbering starts at 1.  Memory
updates are simultaneous: all feedback values are read from the completed
trace of the finished iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

from reccirc.circuits import (
    ActivationRegistry,
    CircuitBuilder,
    CircuitError,
    EvaluationError,
    ExtendedCircuit,
    Gate,
    AUX,
    ADD,
    CONST,
    validate,
    evaluate,
)

DEFAULT_BUDGET = 10_000
THRESHOLD_TOL = 1e-9


@dataclass(frozen=True)
class CircuitHalting:
    """Halting computed by a circuit with p+1 inputs: (iteration number,
    halting-gate values); the single output fires iff its value > 0.5."""

    circuit: ExtendedCircuit


@dataclass(frozen=True)
class FixedIteration:
    k: int


@dataclass(frozen=True)
class ThresholdCountHalting:
    """Fires iff the count of halting values within 1e-9 of ``target``
    exceeds ``bound``."""

    target: float
    bound: int


@dataclass(frozen=True)
class AlwaysHalt:
    pass


HaltingSpec = Union[CircuitHalting, FixedIteration, ThresholdCountHalting, AlwaysHalt]


@dataclass
class RecurrentCircuit:
    """(underlying, initial aux values, recurrent edges, halting gates, halting).

    ``rec_edges`` maps every memory gate id to its source gate id.
    """

    underlying: ExtendedCircuit
    initial_aux: tuple[float, ...]
    rec_edges: dict[int, int]
    halting_gates: tuple[int, ...]
    halting: HaltingSpec

    def __post_init__(self):
        self.initial_aux = tuple(float(v) for v in self.initial_aux)
        self.halting_gates = tuple(self.halting_gates)

    @property
    def n(self) -> int:
        return self.underlying.n

    @property
    def m(self) -> int:
        return self.underlying.m

    @property
    def ell(self) -> int:
        return self.underlying.ell

    @property
    def p(self) -> int:
        return len(self.halting_gates)

    def memory_gates(self) -> tuple[int, ...]:
        return self.underlying.inputs + self.underlying.aux_memory


class NonHaltingError(CircuitError):
    """Budget exhausted before the halting function fired."""

    def __init__(self, budget: int, trace: list["IterationRecord"]):
        super().__init__(f"non-halting within budget {budget}")
        self.budget = budget
        self.trace = trace


@dataclass
class IterationRecord:
    iteration: int
    memory_in: tuple[float, ...]  # x values then aux values at iteration start
    halting_values: tuple[float, ...]
    halted: int
    outputs: tuple[float, ...]


@dataclass
class RunResult:
    outputs: tuple[float, ...]
    trace: list[IterationRecord]

    @property
    def iterations(self) -> int:
        return len(self.trace)


def validate_recurrent(
    rec: RecurrentCircuit, registry: ActivationRegistry | None = None
):
    """Structural validity of the recurrent parts on top of the underlying."""
    report = validate(rec.underlying, registry)
    v = report.violations
    ngates = len(rec.underlying.gates)
    mem = rec.memory_gates()
    if set(rec.rec_edges.keys()) != set(mem):
        v.append("rec_edges must cover exactly the memory gates")
    for g, s in rec.rec_edges.items():
        if not (0 <= s < ngates):
            v.append(f"rec edge source {s} out of range (memory gate {g})")
    if len(rec.initial_aux) != rec.ell:
        v.append(f"initial_aux length {len(rec.initial_aux)} != {rec.ell}")
    for g in rec.halting_gates:
        if not (0 <= g < ngates):
            v.append(f"halting gate {g} out of range")
    if isinstance(rec.halting, CircuitHalting):
        hc = rec.halting.circuit
        sub = validate(hc, registry)
        if not sub:
            v.extend(f"halting circuit: {x}" for x in sub.violations)
        if hc.m != 1:
            v.append("halting circuit must have exactly one output")
        if hc.n != rec.p + 1:
            v.append(
                f"halting circuit arity {hc.n} != p+1 = {rec.p + 1}"
            )
    report.ok = not v
    return report


def halting_eval(
    spec: HaltingSpec,
    i: int,
    v: tuple[float, ...],
    registry: ActivationRegistry | None = None,
) -> int:
    """Evaluate a halting function at iteration ``i`` on gate values ``v``."""
    if i < 1:
        raise ValueError("iteration numbering starts at 1")
    if isinstance(spec, CircuitHalting):
        if spec.circuit.n != len(v) + 1:
            raise EvaluationError(
                f"halting arity mismatch: circuit wants {spec.circuit.n}, got 1+{len(v)}"
            )
        out = evaluate(spec.circuit, (float(i),) + tuple(v), (), registry).outputs[0]
        return 1 if out > 0.5 else 0
    if isinstance(spec, FixedIteration):
        return 1 if i == spec.k else 0
    if isinstance(spec, ThresholdCountHalting):
        hits = sum(1 for x in v if abs(x - spec.target) <= THRESHOLD_TOL)
        return 1 if hits > spec.bound else 0
    if isinstance(spec, AlwaysHalt):
        return 1
    raise TypeError(f"unknown halting spec {spec!r}")


def run(
    rec: RecurrentCircuit,
    x,
    budget: int = DEFAULT_BUDGET,
    registry: ActivationRegistry | None = None,
    record_trace: bool = True,
) -> RunResult:
    """Iterate the underlying circuit until the halting function fires.

    Raises NonHaltingError (carrying the partial trace) if the budget runs
    out, and propagates evaluation errors with the iteration attached.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if len(x) != rec.n:
        raise EvaluationError(f"input length {len(x)} != {rec.n}")
    mem_x = tuple(float(v) for v in x)
    mem_a = rec.initial_aux
    c = rec.underlying
    trace: list[IterationRecord] = []
    for i in range(1, budget + 1):
        try:
            res = evaluate(c, mem_x, mem_a, registry)
        except EvaluationError as e:
            raise EvaluationError(f"iteration {i}: {e}", gate=e.gate) from e
        gv = res.trace
        hv = tuple(gv[g] for g in rec.halting_gates)
        halted = halting_eval(rec.halting, i, hv, registry)
        if record_trace:
            trace.append(
                IterationRecord(i, mem_x + mem_a, hv, halted, res.outputs)
            )
        if halted:
            return RunResult(res.outputs, trace)
        mem_x = tuple(gv[rec.rec_edges[g]] for g in c.inputs)
        mem_a = tuple(gv[rec.rec_edges[g]] for g in c.aux_memory)
    raise NonHaltingError(budget, trace)


def as_recurrent(
    circuit: ExtendedCircuit,
    initial_aux=(),
    halting: HaltingSpec | None = None,
) -> RecurrentCircuit:
    """Wrap a plain circuit as a recurrent one (default: halt at iteration 1,
    every memory gate feeding back on itself)."""
    rec_edges = {g: g for g in circuit.inputs + circuit.aux_memory}
    return RecurrentCircuit(
        circuit,
        tuple(initial_aux),
        rec_edges,
        (),
        halting if halting is not None else FixedIteration(1),
    )


def _splice_plain(
    bld: CircuitBuilder, frag: ExtendedCircuit, input_map
) -> list[int]:
    """Inline ``frag`` (no aux gates) into ``bld``; its input gates are
    replaced by the given existing builder gates, its output gates are
    dropped.  Returns the new ids of the output predecessors."""
    if frag.ell:
        raise CircuitError("cannot splice a fragment with aux gates")
    if len(input_map) != frag.n:
        raise CircuitError("splice input map arity mismatch")
    remap: dict[int, int] = {}
    for gid, host in zip(frag.inputs, input_map):
        remap[gid] = host
    for gid in frag.topo_order():
        g = frag.gates[gid]
        if g.kind == "input" or g.kind == "output":
            continue
        remap[gid] = bld._push(
            Gate(g.kind, tuple(remap[p] for p in g.preds), g.value, g.activation)
        )
    return [remap[frag.gates[out].preds[0]] for out in frag.outputs]


def _eq_const_gadget(bld: CircuitBuilder, gate: int, value: float) -> int:
    """Sign-based equality with a constant: 1 iff val(gate) == value."""
    from reccirc.gadgets import build_equality_sign

    frag = build_equality_sign().circuit
    c = bld.const(value)
    return _splice_plain(bld, frag, [gate, c])[0]


def lower_halting_to_circuit(rec: RecurrentCircuit) -> RecurrentCircuit:
    """Replace a builtin halting spec by an equivalent halting circuit.

    fixed-iteration(k) becomes a sign-equality test against the iteration
    input; threshold-count counts sign-equality hits.  Circuit-backed
    halting is returned unchanged.
    """
    if isinstance(rec.halting, CircuitHalting):
        return rec
    p = rec.p
    bld = CircuitBuilder()
    i_in = bld.input()
    v_ins = [bld.input() for _ in range(p)]
    if isinstance(rec.halting, FixedIteration):
        out = _eq_const_gadget(bld, i_in, float(rec.halting.k))
    elif isinstance(rec.halting, AlwaysHalt):
        out = bld.const(1.0)
    elif isinstance(rec.halting, ThresholdCountHalting):
        hits = [_eq_const_gadget(bld, v, rec.halting.target) for v in v_ins]
        if hits:
            total = bld.add(*hits) if len(hits) > 1 else hits[0]
        else:
            total = bld.const(0.0)
        shifted = bld.add(total, bld.const(-float(rec.halting.bound)))
        out = bld.sign(shifted)
    else:
        raise TypeError(f"cannot lower halting spec {rec.halting!r}")
    bld.output(out)
    return replace(rec, halting=CircuitHalting(bld.build()))


def fold_iteration_counter(rec: RecurrentCircuit) -> RecurrentCircuit:
    """Internalize the iteration number: add a counter memory gate c that
    starts at 1 and increments every iteration, append it to the halting
    gates, and rewire the halting circuit to read c instead of the external
    iteration input.  Run results agree with the original on all inputs."""
    if not isinstance(rec.halting, CircuitHalting):
        raise CircuitError("fold_iteration_counter needs circuit-backed halting")

    gates = list(rec.underlying.gates)
    c_id = len(gates)
    gates.append(Gate(AUX))
    one_id = len(gates)
    gates.append(Gate(CONST, value=1.0))
    plus_id = len(gates)
    gates.append(Gate(ADD, (c_id, one_id)))

    underlying = ExtendedCircuit(
        tuple(gates),
        rec.underlying.inputs,
        rec.underlying.aux_memory + (c_id,),
        rec.underlying.outputs,
    )
    rec_edges = dict(rec.rec_edges)
    rec_edges[c_id] = plus_id

    # new halting circuit: (i, v_1..v_p, c) -> old circuit on (c, v_1..v_p)
    old = rec.halting.circuit
    bld = CircuitBuilder()
    bld.input()  # external iteration number, now ignored
    v_ins = [bld.input() for _ in range(rec.p)]
    c_in = bld.input()
    out = _splice_plain(bld, old, [c_in] + v_ins)[0]
    bld.output(out)

    return RecurrentCircuit(
        underlying,
        rec.initial_aux + (1.0,),
        rec_edges,
        rec.halting_gates + (c_id,),
        CircuitHalting(bld.build()),
    )


def halting_ignores_iteration(spec: HaltingSpec) -> bool:
    """True iff a circuit-backed halting function never reads its external
    iteration input (the post-fold normal form)."""
    if not isinstance(spec, CircuitHalting):
        return isinstance(spec, (ThresholdCountHalting, AlwaysHalt))
    i_gate = spec.circuit.inputs[0]
    return all(i_gate not in g.preds for g in spec.circuit.gates)
