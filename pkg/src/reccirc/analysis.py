"""Structural and sampled semantic analyses of circuits."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import TYPE_CHECKING

from reccirc.circuits import (
    ACT,
    ADD,
    MUL,
    OUTPUT,
    SOURCE_KINDS,
    ActivationRegistry,
    ExtendedCircuit,
    evaluate,
)

if TYPE_CHECKING:
    from reccirc.recurrent import RecurrentCircuit


@dataclass
class SymmetryReport:
    """Result of sampled symmetry checking; falsy iff a witness was found."""

    symmetric: bool
    witness: tuple | None = None  # (x, permuted_x, y, y_permuted)

    def __bool__(self) -> bool:
        return self.symmetric


def _close(a: tuple[float, ...], b: tuple[float, ...], tol: float) -> bool:
    return all(
        abs(u - v) <= tol * max(1.0, abs(u), abs(v)) for u, v in zip(a, b)
    )


def _check_permuted(
    circuit: ExtendedCircuit,
    trials: int,
    seed,
    fixed_head: int,
    registry: ActivationRegistry | None,
    tol: float,
) -> SymmetryReport:
    rng = random.Random(seed)
    n = circuit.n
    for _ in range(trials):
        if rng.random() < 0.5:
            x = [float(rng.randint(-4, 4)) for _ in range(n)]
        else:
            x = [rng.uniform(-3.0, 3.0) for _ in range(n)]
        a = [float(rng.randint(-2, 2)) for _ in range(circuit.ell)]
        tail = list(range(fixed_head, n))
        rng.shuffle(tail)
        px = x[:fixed_head] + [x[i] for i in tail]
        y = evaluate(circuit, x, a, registry).outputs
        py = evaluate(circuit, px, a, registry).outputs
        if not _close(y, py, tol):
            return SymmetryReport(False, (tuple(x), tuple(px), y, py))
    return SymmetryReport(True)


def check_symmetric_sampled(
    circuit: ExtendedCircuit,
    trials: int = 100,
    seed=0,
    registry: ActivationRegistry | None = None,
    tol: float = 1e-9,
) -> SymmetryReport:
    """Sampled check that the circuit is invariant under input permutations.

    Truthy means "no counterexample found"; this is sampling, not proof.
    """
    return _check_permuted(circuit, trials, seed, 0, registry, tol)


def check_tail_symmetric_sampled(
    circuit: ExtendedCircuit,
    trials: int = 100,
    seed=0,
    registry: ActivationRegistry | None = None,
    tol: float = 1e-9,
) -> SymmetryReport:
    """Sampled invariance under permutations of all inputs but the first."""
    return _check_permuted(circuit, trials, seed, 1, registry, tol)


def _level_class(gate) -> str | None:
    if gate.kind == ADD:
        return "add"
    if gate.kind == MUL:
        return "mul"
    if gate.kind == ACT:
        return f"act:{gate.activation}"
    return None  # sources and outputs do not constrain homogeneity


def is_predecessor_form(rec: "RecurrentCircuit") -> bool:
    """Balanced DAG, type-homogeneous depth levels, and the deepest
    activation level strictly shallower than every halting gate and every
    memory-gate predecessor (recurrent-edge source)."""
    from reccirc.circuits import is_balanced_dag

    c = rec.underlying
    if not is_balanced_dag(c):
        return False
    depths = c.gate_depths()
    levels: dict[int, set[str]] = {}
    last_act = None
    for gid, g in enumerate(c.gates):
        cls = _level_class(g)
        if cls is None:
            continue
        levels.setdefault(depths[gid], set()).add(cls)
        if g.kind == ACT:
            d = depths[gid]
            last_act = d if last_act is None else max(last_act, d)
    if any(len(classes) > 1 for classes in levels.values()):
        return False
    if last_act is None:
        return True
    guarded = set(rec.halting_gates) | set(rec.rec_edges.values())
    return all(depths[g] > last_act for g in guarded)


def count_gate_kinds(circuit: ExtendedCircuit) -> dict[str, int]:
    """Census of gate kinds; activation gates counted per name."""
    counts: dict[str, int] = {}
    for g in circuit.gates:
        key = f"act:{g.activation}" if g.kind == ACT else g.kind
        counts[key] = counts.get(key, 0) + 1
    return counts


def count_sign_gates(circuit: ExtendedCircuit) -> int:
    return sum(1 for g in circuit.gates if g.kind == ACT and g.activation == "sign")
