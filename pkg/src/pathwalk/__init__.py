"""Space-efficient quantum circuit simulation by single-trajectory path integrals."""
from .dense import SparseStateVector, apply_gate, distribution, simulate_dense
from .gates import (
    build_draper_adder,
    build_qft,
    cphase,
    hadamard,
    inverse,
    phase,
    standard_gate,
)
from .hybrid import HybridReport, run_hybrid
from .pathsim import (
    CorruptedTrajectoryError,
    EngineMetrics,
    InitialCondition,
    calc_amp,
    final_amplitude,
    run_trajectory,
    sample,
)
from .qcio import CircuitParseError, format_result, parse_circuit, serialize_circuit
from .qcore import (
    BasisState,
    Circuit,
    CircuitStats,
    GateApplication,
    GateMatrix,
    branching_factor,
    circuit_stats,
    classify_gate,
    substate_index,
    with_substate,
)

__version__ = "0.1.0"
