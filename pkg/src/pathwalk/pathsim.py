"""Single-trajectory path-integral engine.

A trajectory holds one basis state and its exact amplitude. At a trivial
gate the state moves to its unique successor. At a nontrivial gate the
amplitudes of the block neighbours are recomputed by summing over
predecessor paths back to the initial condition, the gate is applied to
the 2^a block vector, and the successor is drawn from the normalised
squared magnitudes. Nothing is ever sized by 2^width: the recursion keeps
one small frame per gate level on an explicit stack.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from .qcore import EPS_ZERO, BasisState, Circuit, GateApplication


class CorruptedTrajectoryError(RuntimeError):
    """A step found no block output with nonzero probability."""


@dataclass(frozen=True, eq=False)
class InitialCondition:
    """Either a single basis state (``snapshot`` is None) or a sparse snapshot.

    A snapshot is the exact state vector after gates ``[0, start_pc)``.
    """

    width: int
    state: int = 0
    snapshot: Mapping[int, complex] | None = None
    start_pc: int = 0

    @classmethod
    def single(cls, state: BasisState) -> InitialCondition:
        return cls(state.width, state.bits)

    @classmethod
    def from_snapshot(cls, width: int, amps: Mapping[int, complex], start_pc: int) -> InitialCondition:
        amps = dict(amps)
        if not amps:
            raise ValueError("snapshot is empty")
        norm = sum(abs(a) ** 2 for a in amps.values())
        if abs(norm - 1) > 1e-9:
            raise ValueError(f"snapshot norm {norm} differs from 1")
        if any(k < 0 or k >> width for k in amps):
            raise ValueError("snapshot key outside circuit width")
        return cls(width, 0, amps, start_pc)

    def amplitude(self, bits: int) -> complex:
        if self.snapshot is None:
            return 1.0 + 0j if bits == self.state else 0j
        return self.snapshot.get(bits, 0j)

    @cached_property
    def _snapshot_cdf(self) -> tuple[list[int], np.ndarray]:
        keys = list(self.snapshot)
        probs = np.array([abs(self.snapshot[k]) ** 2 for k in keys])
        return keys, np.cumsum(probs / probs.sum())

    def draw_start(self, rng: np.random.Generator) -> tuple[int, complex]:
        if self.snapshot is None:
            return self.state, 1.0 + 0j
        keys, cdf = self._snapshot_cdf
        i = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(keys) - 1)
        return keys[i], self.snapshot[keys[i]]


@dataclass
class EngineMetrics:
    calc_amp_calls: int = 0
    max_depth: int = 0
    peak_frames: int = 0
    largest_alloc: int = 0

    def merge(self, other: EngineMetrics) -> EngineMetrics:
        return EngineMetrics(
            self.calc_amp_calls + other.calc_amp_calls,
            max(self.max_depth, other.max_depth),
            max(self.peak_frames, other.peak_frames),
            max(self.largest_alloc, other.largest_alloc),
        )


@dataclass(frozen=True)
class TraceRecord:
    pc: int
    state: int
    amplitude: complex
    probability: float


@dataclass
class TrajectoryState:
    pc: int
    cur_state: int
    cur_amp: complex
    trace: list[TraceRecord] | None = None


def block_inputs(state: BasisState, app: GateApplication) -> list[BasisState]:
    base = state.bits & ~app.mask
    return [BasisState(state.width, base | dep) for dep in app.scatter]


def _check_init(circuit: Circuit, init: InitialCondition) -> None:
    if init.width != circuit.width:
        raise ValueError(f"initial condition width {init.width} != circuit width {circuit.width}")
    if not 0 <= init.start_pc <= len(circuit):
        raise ValueError(f"start_pc {init.start_pc} outside circuit of {len(circuit)} gates")


def _amplitude(gates, init: InitialCondition, pc: int, cur: int, metrics: EngineMetrics) -> complex:
    """Amplitude of basis state ``cur`` after gates ``[start_pc, pc)``.

    Each frame is [output local index, position in the row support, partial sum].
    ``cur`` is edited in place on descent and restored on return.
    """
    start = init.start_pc
    top = pc
    stack: list[list] = []
    calls = 0
    deepest = 0
    peak = 0
    while True:
        # descend until a base case yields a value
        while True:
            calls += 1
            if pc == start:
                val = init.amplitude(cur)
                break
            app = gates[pc - 1]
            i = app.local_index(cur)
            stack.append([i, 0, 0j])
            if len(stack) > peak:
                peak = len(stack)
            cur = (cur & ~app.mask) | app.scatter[app.gate.rows[i][0][0]]
            pc -= 1
        if top - pc > deepest:
            deepest = top - pc
        # unwind, folding child values into parents
        while stack:
            frame = stack[-1]
            app = gates[pc]
            row = app.gate.rows[frame[0]]
            pos = frame[1]
            frame[2] += row[pos][1] * val
            pos += 1
            if pos < len(row):
                frame[1] = pos
                cur = (cur & ~app.mask) | app.scatter[row[pos][0]]
                break
            val = frame[2]
            stack.pop()
            cur = (cur & ~app.mask) | app.scatter[frame[0]]
            pc += 1
        else:
            metrics.calc_amp_calls += calls
            metrics.max_depth = max(metrics.max_depth, deepest)
            metrics.peak_frames = max(metrics.peak_frames, peak)
            return val


def calc_amp(
    circuit: Circuit,
    init: InitialCondition,
    pc: int,
    state: BasisState,
    metrics: EngineMetrics | None = None,
) -> complex:
    """Exact amplitude of ``state`` after applying gates ``[init.start_pc, pc)``."""
    _check_init(circuit, init)
    if not init.start_pc <= pc <= len(circuit):
        raise ValueError(f"pc {pc} outside [{init.start_pc}, {len(circuit)}]")
    if state.width != circuit.width:
        raise ValueError(f"state width {state.width} != circuit width {circuit.width}")
    return _amplitude(circuit.gates, init, pc, state.bits, metrics or EngineMetrics())


def _pick(probs: list[float], u: float) -> int:
    """Inverse-CDF draw; skips zero-probability outputs and breaks ties low."""
    total = sum(probs)
    acc = 0.0
    last = -1
    target = u * total
    for i, p in enumerate(probs):
        if p <= 0.0:
            continue
        acc += p
        last = i
        if target < acc:
            return i
    return last


def step(
    traj: TrajectoryState,
    circuit: Circuit,
    init: InitialCondition,
    rng: np.random.Generator,
    metrics: EngineMetrics,
) -> TrajectoryState:
    """Advance ``traj`` through gate ``traj.pc``; mutates and returns ``traj``."""
    if not traj.pc < len(circuit):
        raise ValueError(f"trajectory already at end (pc={traj.pc})")
    app = circuit.gates[traj.pc]
    gate = app.gate
    cur = traj.cur_state
    local = app.local_index(cur)
    if gate.is_trivial:
        (i_out, entry), = gate.columns[local]
        new_state = (cur & ~app.mask) | app.scatter[i_out]
        new_amp = traj.cur_amp * entry
        prob = 1.0
    else:
        base = cur & ~app.mask
        dim = gate.dim
        amps = [0j] * dim
        metrics.largest_alloc = max(metrics.largest_alloc, dim)
        for j in range(dim):
            if j == local:
                amps[j] = traj.cur_amp
            else:
                amps[j] = _amplitude(circuit.gates, init, traj.pc, base | app.scatter[j], metrics)
        out = [sum(e * amps[j] for j, e in row) for row in gate.rows]
        probs = [abs(a) ** 2 for a in out]
        if max(probs) < EPS_ZERO**2:
            raise CorruptedTrajectoryError(f"all block outputs vanish at pc={traj.pc}")
        i_out = _pick(probs, float(rng.random()))
        new_state = base | app.scatter[i_out]
        new_amp = out[i_out]
        prob = probs[i_out] / sum(probs)
    traj.pc += 1
    traj.cur_state = new_state
    traj.cur_amp = new_amp
    if abs(new_amp) <= EPS_ZERO:
        raise CorruptedTrajectoryError(f"walker amplitude vanished at pc={traj.pc}")
    if traj.trace is not None:
        traj.trace.append(TraceRecord(traj.pc, new_state, new_amp, prob))
    return traj


@dataclass
class TrajectoryResult:
    final: BasisState
    amplitude: complex
    trace: list[TraceRecord] | None
    metrics: EngineMetrics = field(default_factory=EngineMetrics)


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Independent stream for shot ``shot`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(shot,)))


def run_trajectory(
    circuit: Circuit,
    init: InitialCondition,
    seed: int | np.random.Generator,
    trace: bool = False,
    metrics: EngineMetrics | None = None,
) -> TrajectoryResult:
    _check_init(circuit, init)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    metrics = metrics if metrics is not None else EngineMetrics()
    start_state, start_amp = init.draw_start(rng)
    traj = TrajectoryState(init.start_pc, start_state, start_amp, [] if trace else None)
    if traj.trace is not None:
        traj.trace.append(TraceRecord(traj.pc, start_state, start_amp, 1.0))
    while traj.pc < len(circuit):
        step(traj, circuit, init, rng, metrics)
    return TrajectoryResult(BasisState(circuit.width, traj.cur_state), traj.cur_amp, traj.trace, metrics)


def sample(
    circuit: Circuit,
    init: InitialCondition,
    shots: int,
    seed: int,
    metrics: EngineMetrics | None = None,
    first_shot: int = 0,
) -> Counter:
    """Histogram of final states over ``shots`` independent trajectories.

    Shot i uses ``shot_rng(seed, first_shot + i)``, so splitting the shot range
    across workers and adding the counters gives the same histogram.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    metrics = metrics if metrics is not None else EngineMetrics()
    hist: Counter = Counter()
    for i in range(first_shot, first_shot + shots):
        res = run_trajectory(circuit, init, shot_rng(seed, i), metrics=metrics)
        hist[res.final] += 1
    return hist


def final_amplitude(circuit: Circuit, init: InitialCondition, final: BasisState,
                    metrics: EngineMetrics | None = None) -> complex:
    return calc_amp(circuit, init, len(circuit), final, metrics)


def _sample_chunk(args):
    circuit, init, shots, seed, first = args
    metrics = EngineMetrics()
    return sample(circuit, init, shots, seed, metrics, first_shot=first), metrics


def sample_parallel(
    circuit: Circuit,
    init: InitialCondition,
    shots: int,
    seed: int,
    jobs: int = 1,
) -> tuple[Counter, EngineMetrics]:
    """``sample`` spread over ``jobs`` worker processes; the result does not depend on ``jobs``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    jobs = max(1, min(jobs, shots))
    if jobs == 1:
        metrics = EngineMetrics()
        return sample(circuit, init, shots, seed, metrics), metrics
    from concurrent.futures import ProcessPoolExecutor

    per, extra = divmod(shots, jobs)
    chunks, first = [], 0
    for w in range(jobs):
        n = per + (w < extra)
        chunks.append((circuit, init, n, seed, first))
        first += n
    hist: Counter = Counter()
    metrics = EngineMetrics()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part, m in pool.map(_sample_chunk, chunks):
            hist.update(part)
            metrics = metrics.merge(m)
    return hist, metrics
