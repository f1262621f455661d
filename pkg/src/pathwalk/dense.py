"""Sparse-map state-vector simulation, used as the oracle for the path engine."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .qcore import BasisState, Circuit, GateApplication

PRUNE = 1e-14


@dataclass
class SparseStateVector:
    width: int
    amps: dict[int, complex] = field(default_factory=dict)

    @classmethod
    def basis(cls, state: BasisState) -> SparseStateVector:
        return cls(state.width, {state.bits: 1.0 + 0j})

    def __len__(self) -> int:
        return len(self.amps)

    def amplitude(self, state: BasisState | int) -> complex:
        bits = state.bits if isinstance(state, BasisState) else state
        return self.amps.get(bits, 0j)

    def norm_sqr(self) -> float:
        return sum(abs(a) ** 2 for a in self.amps.values())


def apply_gate(sv: SparseStateVector, app: GateApplication) -> SparseStateVector:
    """Apply ``app`` block by block; entries with magnitude <= PRUNE are dropped."""
    if any(q >= sv.width for q in app.operands):
        raise ValueError(f"operands {app.operands} out of range for width {sv.width}")
    gate = app.gate
    mask = app.mask
    groups: dict[int, list[complex]] = {}
    for bits, a in sv.amps.items():
        base = bits & ~mask
        vec = groups.get(base)
        if vec is None:
            vec = groups[base] = [0j] * gate.dim
        vec[app.local_index(bits)] = a
    out: dict[int, complex] = {}
    for base, vec in groups.items():
        for j, a in enumerate(vec):
            if a == 0:
                continue
            for i, e in gate.columns[j]:
                key = base | app.scatter[i]
                out[key] = out.get(key, 0j) + e * a
    return SparseStateVector(sv.width, {k: a for k, a in out.items() if abs(a) > PRUNE})


def simulate_dense(circuit: Circuit, input: BasisState, stop: int | None = None) -> SparseStateVector:
    """State after gates ``[0, stop)`` (the whole circuit by default) from ``input``."""
    if input.width != circuit.width:
        raise ValueError(f"input width {input.width} != circuit width {circuit.width}")
    sv = SparseStateVector.basis(input)
    for app in circuit.gates[:stop]:
        sv = apply_gate(sv, app)
    return sv


def distribution(sv: SparseStateVector) -> dict[BasisState, float]:
    if not sv.amps:
        raise ValueError("empty state vector has no distribution")
    probs = {k: abs(a) ** 2 for k, a in sv.amps.items()}
    total = sum(probs.values())
    return {BasisState(sv.width, k): p / total for k, p in probs.items()}


def sample_distribution(dist: dict[BasisState, float], shots: int, seed: int) -> Counter:
    """Draw ``shots`` outcomes by inverse CDF over ``dist`` in sorted state order."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    keys = sorted(dist, key=lambda s: s.bits)
    cdf = np.cumsum([dist[k] for k in keys])
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    idx = np.minimum(idx, len(keys) - 1)
    return Counter({keys[i]: int(c) for i, c in zip(*np.unique(idx, return_counts=True))})


def total_variation(p: dict, q: dict) -> float:
    """0.5 * sum |p - q| over the union of keys; inputs need not be normalised."""
    sp = sum(p.values()) or 1
    sq = sum(q.values()) or 1
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0) / sp - q.get(k, 0) / sq) for k in keys)
