"""Dense simulation under an entry budget, then path-integral continuation."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .dense import SparseStateVector, apply_gate, distribution, sample_distribution
from .pathsim import EngineMetrics, InitialCondition, sample_parallel
from .qcore import BasisState, Circuit


@dataclass
class HybridReport:
    switch_pc: int
    snapshot_size: int
    histogram: Counter
    metrics: EngineMetrics = field(default_factory=EngineMetrics)


def dense_prefix(circuit: Circuit, input: BasisState, budget: int) -> tuple[SparseStateVector, int]:
    """Run gates densely while the projected support stays within ``budget`` entries.

    The projection for the next gate is min(len * fanout, 2**width), checked
    before the gate is applied, so the stored vector never exceeds the budget.
    Returns the frozen vector and the index of the first gate not applied.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    sv = SparseStateVector.basis(input)
    full = 1 << circuit.width
    for pc, app in enumerate(circuit.gates):
        if min(len(sv) * app.gate.fanout, full) > budget:
            return sv, pc
        sv = apply_gate(sv, app)
    return sv, len(circuit)


def run_hybrid(
    circuit: Circuit, input: BasisState, budget: int, shots: int, seed: int, jobs: int = 1
) -> HybridReport:
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if input.width != circuit.width:
        raise ValueError(f"input width {input.width} != circuit width {circuit.width}")
    sv, switch_pc = dense_prefix(circuit, input, budget)
    if switch_pc == len(circuit):
        metrics = EngineMetrics()
        hist = sample_distribution(distribution(sv), shots, seed)
    else:
        norm = sv.norm_sqr() ** 0.5
        snap = {k: a / norm for k, a in sv.amps.items()}
        init = InitialCondition.from_snapshot(circuit.width, snap, switch_pc)
        hist, metrics = sample_parallel(circuit, init, shots, seed, jobs)
    return HybridReport(switch_pc, len(sv), hist, metrics)
