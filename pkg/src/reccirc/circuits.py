"""Extended arithmetic circuits over the reals.

A circuit is a simple DAG of gates.  Source gates (inputs, auxiliary memory
gates, constants) have indegree 0; addition and multiplication gates have
arbitrary fan-in >= 1 (fan-in 1 acts as the identity); activation gates apply
a registered unary function; output gates copy their single predecessor and
have fan-out 0.  Gates are addressed by dense ordinal ids in declaration
order.  IEEE doubles stand in for the reals throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

INPUT = "input"
AUX = "aux"
CONST = "const"
ADD = "add"
MUL = "mul"
ACT = "act"
OUTPUT = "output"

SOURCE_KINDS = (INPUT, AUX, CONST)
KINDS = (INPUT, AUX, CONST, ADD, MUL, ACT, OUTPUT)


class CircuitError(Exception):
    """Base class for circuit failures."""


class EvaluationError(CircuitError):
    """Evaluation failed; ``gate`` names the offending gate when known."""

    def __init__(self, message: str, gate: int | None = None):
        super().__init__(message)
        self.gate = gate


def _sign(x: float) -> float:
    return 1.0 if x > 0 else 0.0


class ActivationRegistry:
    """Mapping from activation identifiers to total unary real functions."""

    def __init__(self, funcs: dict[str, Callable[[float], float]] | None = None):
        self._funcs: dict[str, Callable[[float], float]] = {
            "sign": _sign,
            "exp": math.exp,
            "id": lambda x: x,
        }
        if funcs:
            self._funcs.update(funcs)

    def register(self, name: str, func: Callable[[float], float]) -> None:
        self._funcs[name] = func

    def __contains__(self, name: str) -> bool:
        return name in self._funcs

    def lookup(self, name: str) -> Callable[[float], float]:
        try:
            return self._funcs[name]
        except KeyError:
            raise EvaluationError(f"unregistered activation {name!r}") from None


DEFAULT_REGISTRY = ActivationRegistry()


@dataclass(frozen=True)
class Gate:
    """One gate: a kind, predecessor ids, and kind-specific payload."""

    kind: str
    preds: tuple[int, ...] = ()
    value: float | None = None  # const gates
    activation: str | None = None  # act gates


@dataclass
class ExtendedCircuit:
    """An extended arithmetic circuit; treat as immutable once built.

    ``inputs``, ``aux_memory`` and ``outputs`` are the ordered role lists;
    their positions define the input/aux/output indices.
    """

    gates: tuple[Gate, ...]
    inputs: tuple[int, ...]
    aux_memory: tuple[int, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        self.gates = tuple(self.gates)
        self.inputs = tuple(self.inputs)
        self.aux_memory = tuple(self.aux_memory)
        self.outputs = tuple(self.outputs)
        self._topo: tuple[int, ...] | None = None
        self._depths: tuple[int, ...] | None = None
        self._succs: tuple[tuple[int, ...], ...] | None = None

    # -- derived structure ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.inputs)

    @property
    def ell(self) -> int:
        return len(self.aux_memory)

    @property
    def m(self) -> int:
        return len(self.outputs)

    def successors(self) -> tuple[tuple[int, ...], ...]:
        if self._succs is None:
            succ: list[list[int]] = [[] for _ in self.gates]
            for gid, g in enumerate(self.gates):
                for p in g.preds:
                    succ[p].append(gid)
            self._succs = tuple(tuple(s) for s in succ)
        return self._succs

    def topo_order(self) -> tuple[int, ...]:
        """Topological order of gate ids; raises on cycles."""
        if self._topo is not None:
            return self._topo
        n = len(self.gates)
        indeg = [len(g.preds) for g in self.gates]
        succ = self.successors()
        ready = [i for i in range(n) if indeg[i] == 0]
        order: list[int] = []
        while ready:
            g = ready.pop()
            order.append(g)
            for s in succ[g]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
        if len(order) != n:
            raise CircuitError("cycle")
        self._topo = tuple(order)
        return self._topo

    def gate_depths(self) -> tuple[int, ...]:
        """Longest-path depth of every gate (sources sit at depth 0)."""
        if self._depths is None:
            d = [0] * len(self.gates)
            for gid in self.topo_order():
                preds = self.gates[gid].preds
                if preds:
                    d[gid] = 1 + max(d[p] for p in preds)
            self._depths = tuple(d)
        return self._depths

    def replace(self, **kw) -> "ExtendedCircuit":
        base = dict(
            gates=self.gates,
            inputs=self.inputs,
            aux_memory=self.aux_memory,
            outputs=self.outputs,
        )
        base.update(kw)
        return ExtendedCircuit(**base)


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate(circuit: ExtendedCircuit, registry: ActivationRegistry | None = None) -> ValidationReport:
    """Check the structural invariants; violations are data, not failures."""
    registry = registry or DEFAULT_REGISTRY
    v: list[str] = []
    ngates = len(circuit.gates)

    for gid, g in enumerate(circuit.gates):
        if g.kind not in KINDS:
            v.append(f"gate {gid}: unknown kind {g.kind!r}")
            continue
        for p in g.preds:
            if not (0 <= p < ngates):
                v.append(f"gate {gid}: predecessor {p} out of range")
        if len(set(g.preds)) != len(g.preds):
            v.append(f"gate {gid}: duplicate predecessor (graph must be simple)")
        k = g.kind
        if k in SOURCE_KINDS and g.preds:
            v.append(f"gate {gid}: {k} gate must have indegree 0")
        if k == OUTPUT and len(g.preds) != 1:
            v.append(f"gate {gid}: output indegree must be 1")
        if k == ACT and len(g.preds) != 1:
            v.append(f"gate {gid}: activation indegree must be 1")
        if k in (ADD, MUL) and len(g.preds) < 1:
            v.append(f"gate {gid}: {k} gate must have indegree >= 1")
        if k == CONST and g.value is None:
            v.append(f"gate {gid}: const gate without value")
        if k == ACT:
            if g.activation is None:
                v.append(f"gate {gid}: activation gate without name")
            elif g.activation not in registry:
                v.append(f"gate {gid}: unresolvable activation {g.activation!r}")

    # output gates must have fan-out 0
    succ = [0] * ngates
    for g in circuit.gates:
        for p in g.preds:
            if 0 <= p < ngates:
                succ[p] += 1
    for gid, g in enumerate(circuit.gates):
        if g.kind == OUTPUT and succ[gid] > 0:
            v.append(f"gate {gid}: output outdegree must be 0")

    # role lists
    for name, lst, kind in (
        ("inputs", circuit.inputs, INPUT),
        ("aux_memory", circuit.aux_memory, AUX),
        ("outputs", circuit.outputs, OUTPUT),
    ):
        for gid in lst:
            if not (0 <= gid < ngates):
                v.append(f"{name}: id {gid} out of range")
            elif circuit.gates[gid].kind != kind:
                v.append(f"{name}: gate {gid} has kind {circuit.gates[gid].kind!r}")
        if len(set(lst)) != len(lst):
            v.append(f"{name}: duplicate entries")
    declared = set(circuit.inputs) | set(circuit.aux_memory) | set(circuit.outputs)
    for gid, g in enumerate(circuit.gates):
        if g.kind in (INPUT, AUX, OUTPUT) and gid not in declared:
            v.append(f"gate {gid}: {g.kind} gate missing from its role list")

    # acyclicity
    try:
        circuit.topo_order()
    except CircuitError:
        v.append("cycle")

    return ValidationReport(ok=not v, violations=v)


@dataclass
class EvalResult:
    """Outputs plus the per-gate value trace of one evaluation pass."""

    outputs: tuple[float, ...]
    trace: list[float]


def evaluate(
    circuit: ExtendedCircuit,
    x: Sequence[float],
    a: Sequence[float] = (),
    registry: ActivationRegistry | None = None,
) -> EvalResult:
    """Evaluate the circuit on input tuple ``x`` and aux-memory tuple ``a``.

    Evaluation walks a topological order; the result is order-independent.
    Non-finite intermediate values raise EvaluationError naming the gate.
    """
    registry = registry or DEFAULT_REGISTRY
    if len(x) != circuit.n:
        raise EvaluationError(f"input length {len(x)} != {circuit.n}")
    if len(a) != circuit.ell:
        raise EvaluationError(f"aux length {len(a)} != {circuit.ell}")

    trace: list[float] = [0.0] * len(circuit.gates)
    gates = circuit.gates
    for gid, val in zip(circuit.inputs, x):
        trace[gid] = float(val)
    for gid, val in zip(circuit.aux_memory, a):
        trace[gid] = float(val)

    for gid in circuit.topo_order():
        g = gates[gid]
        k = g.kind
        if k == ADD:
            val = 0.0
            for p in g.preds:
                val += trace[p]
        elif k == MUL:
            val = 1.0
            for p in g.preds:
                val *= trace[p]
        elif k == ACT:
            val = registry.lookup(g.activation)(trace[g.preds[0]])
        elif k == OUTPUT:
            val = trace[g.preds[0]]
        elif k == CONST:
            val = g.value
        else:  # input / aux: already seeded
            continue
        if not math.isfinite(val):
            raise EvaluationError(f"non-finite value at gate {gid}", gate=gid)
        trace[gid] = val

    return EvalResult(tuple(trace[g] for g in circuit.outputs), trace)


def size(circuit: ExtendedCircuit) -> int:
    """Number of gates."""
    return len(circuit.gates)


def gate_depth(circuit: ExtendedCircuit, gid: int) -> int:
    """Length of the longest path from any source gate to ``gid``."""
    return circuit.gate_depths()[gid]


def depth(circuit: ExtendedCircuit) -> int:
    """Maximum distance between any two gates (extended-circuit convention)."""
    d = circuit.gate_depths()
    return max(d) if d else 0


def is_balanced_dag(circuit: ExtendedCircuit) -> bool:
    """True iff for each gate all source-to-gate paths have equal length.

    Equivalent formulation: every edge spans exactly one depth level.
    """
    d = circuit.gate_depths()
    for gid, g in enumerate(circuit.gates):
        for p in g.preds:
            if d[gid] - d[p] != 1:
                return False
    return True


def balance(circuit: ExtendedCircuit) -> ExtendedCircuit:
    """Insert unary Add pad gates on short edges until the DAG is balanced.

    Semantically the identity (a one-predecessor Add is the identity on
    reals); existing gate ids are preserved, pads are appended.  Idempotent.
    """
    if is_balanced_dag(circuit):
        return circuit
    d = circuit.gate_depths()
    gates = list(circuit.gates)
    new_gates: list[Gate] = []

    def pad_chain(src: int, count: int) -> int:
        gid = src
        for _ in range(count):
            new_gates.append(Gate(ADD, (gid,)))
            gid = len(gates) + len(new_gates) - 1
        return gid

    for gid, g in enumerate(gates):
        if not g.preds:
            continue
        gap = [d[gid] - d[p] for p in g.preds]
        if all(x == 1 for x in gap):
            continue
        preds = tuple(
            pad_chain(p, d[gid] - d[p] - 1) if d[gid] - d[p] > 1 else p
            for p in g.preds
        )
        gates[gid] = Gate(g.kind, preds, g.value, g.activation)

    return ExtendedCircuit(
        tuple(gates) + tuple(new_gates),
        circuit.inputs,
        circuit.aux_memory,
        circuit.outputs,
    )


class CircuitBuilder:
    """Incremental construction of an ExtendedCircuit.

    Methods return the new gate id; ``build()`` freezes the result.
    """

    def __init__(self):
        self._gates: list[Gate] = []
        self._inputs: list[int] = []
        self._aux: list[int] = []
        self._outputs: list[int] = []

    def _push(self, gate: Gate) -> int:
        self._gates.append(gate)
        return len(self._gates) - 1

    def input(self) -> int:
        gid = self._push(Gate(INPUT))
        self._inputs.append(gid)
        return gid

    def aux(self) -> int:
        gid = self._push(Gate(AUX))
        self._aux.append(gid)
        return gid

    def const(self, value: float) -> int:
        return self._push(Gate(CONST, value=float(value)))

    def add(self, *preds: int) -> int:
        return self._push(Gate(ADD, tuple(preds)))

    def mul(self, *preds: int) -> int:
        return self._push(Gate(MUL, tuple(preds)))

    def act(self, name: str, pred: int) -> int:
        return self._push(Gate(ACT, (pred,), activation=name))

    def sign(self, pred: int) -> int:
        return self.act("sign", pred)

    def output(self, pred: int) -> int:
        gid = self._push(Gate(OUTPUT, (pred,)))
        self._outputs.append(gid)
        return gid

    # -- convenience compounds (plain gate sugar, no new semantics) -------

    def neg(self, pred: int) -> int:
        return self.mul(pred, self.const(-1.0))

    def sub(self, a: int, b: int) -> int:
        """a - b, written as a + (b * -1)."""
        return self.add(a, self.neg(b))

    def one_minus(self, pred: int) -> int:
        return self.add(self.const(1.0), self.neg(pred))

    def linear(self, terms: Iterable[tuple[int, float]], constant: float = 0.0) -> int:
        """sum of coeff*gate products plus an optional constant."""
        parts = [self.mul(g, self.const(c)) for g, c in terms]
        if constant != 0.0 or not parts:
            parts.append(self.const(constant))
        return self.add(*parts) if len(parts) > 1 else parts[0]

    def build(self) -> ExtendedCircuit:
        return ExtendedCircuit(
            tuple(self._gates),
            tuple(self._inputs),
            tuple(self._aux),
            tuple(self._outputs),
        )
