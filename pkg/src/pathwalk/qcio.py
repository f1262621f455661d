"""Text circuit format and result formatting.

Circuit grammar, one directive per line, ``#`` starts a comment, keywords
are case-insensitive::

    qubits N
    input BITSTRING              # optional, most-significant qubit first
    defgate NAME ARITY           # followed by 2^ARITY rows of complex entries
    0.5+0.5j 0.5-0.5j
    ...
    endgate
    gate NAME[(PARAM)] q0 q1 ...

Built-in gate names are H, X, CNOT, CCNOT, SWAP, PHASE(q) and CPHASE(q).
Operands are listed in local-bit order: the first listed qubit is operand 0
(the target, for the controlled built-ins).
"""
from __future__ import annotations

import cmath
import json
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gates import cphase, hadamard, phase, standard_gate
from .qcore import (
    MAX_ARITY,
    MAX_WIDTH,
    BasisState,
    Circuit,
    GateApplication,
    GateMatrix,
    check_unitary,
)


class CircuitParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


_BUILTIN_FIXED: dict[str, Callable[[], GateMatrix]] = {
    "H": hadamard,
    "X": lambda: standard_gate("X"),
    "CNOT": lambda: standard_gate("CNOT"),
    "CCNOT": lambda: standard_gate("CCNOT"),
    "SWAP": lambda: standard_gate("SWAP"),
}
_BUILTIN_PARAM: dict[str, Callable[[int], GateMatrix]] = {"PHASE": phase, "CPHASE": cphase}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_GATE_REF = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\(([0-9]+)\))?\Z")
_UINT = re.compile(r"[0-9]+\Z")
_MAX_DIGITS = 8
_MAX_PARAM = 1024


@dataclass
class CircuitDocument:
    circuit: Circuit
    gates: dict[str, GateMatrix] = field(default_factory=dict)
    input: BasisState | None = None
    source: str = ""


def parse_complex(token: str) -> complex:
    """Parse ``re``, ``imj``, ``re+imj`` or ``re-imj``; raises ValueError otherwise."""
    if "(" in token or ")" in token:
        raise ValueError(f"bad complex literal {token!r}")
    value = complex(token)
    if not cmath.isfinite(value):
        raise ValueError(f"non-finite complex literal {token!r}")
    return value


def _int(token: str, lineno: int, what: str) -> int:
    if not _UINT.match(token):
        raise CircuitParseError(lineno, f"{what} must be a non-negative integer, got {token[:40]!r}")
    if len(token) > _MAX_DIGITS:
        raise CircuitParseError(lineno, f"{what} is too large")
    return int(token)


def parse_circuit(text: str) -> CircuitDocument:
    lines = text.splitlines()
    width: int | None = None
    input_state: BasisState | None = None
    custom: dict[str, GateMatrix] = {}
    apps: list[GateApplication] = []
    n = 0
    while n < len(lines):
        lineno = n + 1
        tokens = lines[n].split("#", 1)[0].split()
        n += 1
        if not tokens:
            continue
        key = tokens[0].lower()
        if width is None and key != "qubits":
            raise CircuitParseError(lineno, "first directive must be 'qubits N'")
        if key == "qubits":
            if width is not None:
                raise CircuitParseError(lineno, "duplicate 'qubits' directive")
            if len(tokens) != 2:
                raise CircuitParseError(lineno, "usage: qubits N")
            width = _int(tokens[1], lineno, "qubit count")
            if not 1 <= width <= MAX_WIDTH:
                raise CircuitParseError(lineno, f"qubit count must be in [1, {MAX_WIDTH}]")
        elif key == "input":
            if input_state is not None:
                raise CircuitParseError(lineno, "duplicate 'input' directive")
            if len(tokens) != 2 or any(c not in "01" for c in tokens[1]):
                raise CircuitParseError(lineno, "usage: input BITSTRING")
            if len(tokens[1]) != width:
                raise CircuitParseError(
                    lineno, f"input has {len(tokens[1])} bits, circuit has {width} qubits"
                )
            input_state = BasisState.from_bitstring(tokens[1])
        elif key == "defgate":
            n = _parse_defgate(lines, n, tokens, lineno, custom)
        elif key == "endgate":
            raise CircuitParseError(lineno, "'endgate' without 'defgate'")
        elif key == "gate":
            apps.append(_parse_gate(tokens, lineno, width, custom))
        else:
            raise CircuitParseError(lineno, f"unknown directive {tokens[0]!r}")
    if width is None:
        raise CircuitParseError(len(lines) + 1 if lines else 1, "missing 'qubits' directive")
    return CircuitDocument(Circuit(width, tuple(apps)), custom, input_state, text)


def _parse_defgate(lines, n, tokens, lineno, custom) -> int:
    if len(tokens) != 3:
        raise CircuitParseError(lineno, "usage: defgate NAME ARITY")
    name = tokens[1]
    if not _IDENT.match(name):
        raise CircuitParseError(lineno, f"bad gate name {name!r}")
    upper = name.upper()
    if upper in _BUILTIN_FIXED or upper in _BUILTIN_PARAM:
        raise CircuitParseError(lineno, f"defgate {name!r} shadows a built-in gate")
    if upper in custom:
        raise CircuitParseError(lineno, f"gate {name!r} already defined")
    arity = _int(tokens[2], lineno, "arity")
    if not 1 <= arity <= MAX_ARITY:
        raise CircuitParseError(lineno, f"arity must be in [1, {MAX_ARITY}]")
    dim = 1 << arity
    rows = []
    while True:
        if n >= len(lines):
            raise CircuitParseError(lineno, f"defgate {name!r} not closed by 'endgate'")
        row_no = n + 1
        row = lines[n].split("#", 1)[0].split()
        n += 1
        if not row:
            continue
        if row[0].lower() == "endgate":
            if len(row) != 1:
                raise CircuitParseError(row_no, "'endgate' takes no arguments")
            break
        if len(rows) == dim:
            raise CircuitParseError(row_no, f"defgate {name!r} has more than {dim} rows")
        if len(row) != dim:
            raise CircuitParseError(row_no, f"expected {dim} entries, got {len(row)}")
        try:
            rows.append([parse_complex(tok) for tok in row])
        except ValueError as exc:
            raise CircuitParseError(row_no, str(exc)) from None
    if len(rows) != dim:
        raise CircuitParseError(lineno, f"defgate {name!r} needs {dim} rows, got {len(rows)}")
    matrix = np.array(rows, dtype=complex)
    if not check_unitary(matrix):
        raise CircuitParseError(lineno, f"defgate {name!r} is not unitary")
    custom[upper] = GateMatrix(name, matrix)
    return n


def _parse_gate(tokens, lineno, width, custom) -> GateApplication:
    if len(tokens) < 2:
        raise CircuitParseError(lineno, "usage: gate NAME[(PARAM)] QUBIT...")
    m = _GATE_REF.match(tokens[1])
    if not m:
        raise CircuitParseError(lineno, f"bad gate reference {tokens[1]!r}")
    name, param = m.group(1).upper(), m.group(2)
    if name in _BUILTIN_PARAM:
        if param is None:
            raise CircuitParseError(lineno, f"gate {name} needs a parameter, e.g. {name}(1)")
        if len(param) > _MAX_DIGITS or int(param) > _MAX_PARAM:
            raise CircuitParseError(lineno, f"phase parameter exceeds {_MAX_PARAM}")
        gate = _BUILTIN_PARAM[name](int(param))
    elif param is not None:
        raise CircuitParseError(lineno, f"gate {name} takes no parameter")
    elif name in _BUILTIN_FIXED:
        gate = _BUILTIN_FIXED[name]()
    elif name in custom:
        gate = custom[name]
    else:
        raise CircuitParseError(lineno, f"unknown gate {tokens[1]!r}")
    ops = [_int(tok, lineno, "qubit index") for tok in tokens[2:]]
    if len(ops) != gate.arity:
        raise CircuitParseError(
            lineno, f"gate {tokens[1]} takes {gate.arity} operand(s), got {len(ops)}"
        )
    if len(set(ops)) != len(ops):
        raise CircuitParseError(lineno, f"repeated operand in {ops}")
    for q in ops:
        if q >= width:
            raise CircuitParseError(lineno, f"qubit {q} out of range for {width} qubits")
    return GateApplication(gate, tuple(ops))


def load_circuit(path) -> CircuitDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())


def _builtin_for(gate: GateMatrix) -> str | None:
    """Return the built-in reference reproducing ``gate`` exactly, if any."""
    m = _GATE_REF.match(gate.name)
    if not m:
        return None
    name, param = m.group(1).upper(), m.group(2)
    if name in _BUILTIN_FIXED and param is None:
        ref, candidate = name, _BUILTIN_FIXED[name]()
    elif name in _BUILTIN_PARAM and param is not None:
        ref, candidate = f"{name}({int(param)})", _BUILTIN_PARAM[name](int(param))
    else:
        return None
    return ref if candidate.allclose(gate, atol=1e-15) else None


def _format_complex(z: complex) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{z.real + 0.0!r}{z.imag + 0.0:+}j"


def serialize_circuit(circuit: Circuit, input: BasisState | None = None) -> str:
    """Render ``circuit`` in the text format, emitting defgate blocks as needed."""
    defs: list[str] = []
    registered: list[tuple[str, GateMatrix]] = []
    body: list[str] = []
    for pos, app in enumerate(circuit.gates):
        gate = app.gate
        ref = _builtin_for(gate)
        if ref is None:
            ref = _register(gate, pos, registered, defs)
        body.append(f"gate {ref} " + " ".join(str(q) for q in app.operands))
    head = [f"qubits {circuit.width}"]
    if input is not None:
        head.append(f"input {input.to_bitstring()}")
    return "\n".join(head + defs + body) + "\n"


def _register(gate: GateMatrix, pos: int, registered: list, defs: list[str]) -> str:
    if not gate.name:
        raise ValueError(f"gate {pos} has no name and cannot be serialized")
    base = re.sub(r"\W", "_", gate.name)
    if not _IDENT.match(base):
        base = "G_" + base
    taken = set()
    for ref, other in registered:
        if other.name == gate.name and other.allclose(gate, atol=0):
            return ref
        taken.add(ref.upper())
    ref, k = base, 1
    while ref.upper() in taken or ref.upper() in _BUILTIN_FIXED or ref.upper() in _BUILTIN_PARAM:
        k += 1
        ref = f"{base}_{k}"
    registered.append((ref, gate))
    defs.append(f"defgate {ref} {gate.arity}")
    for row in gate.matrix:
        defs.append(" ".join(_format_complex(complex(z)) for z in row))
    defs.append("endgate")
    return ref


@dataclass
class RunResult:
    engine: str
    shots: int
    seed: int
    histogram: dict[str, int]
    metrics: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("a result needs at least one shot")
        if sum(self.histogram.values()) != self.shots:
            raise ValueError("histogram counts do not sum to shots")


def _ordered(histogram: dict[str, int]) -> list[tuple[str, int]]:
    return sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0]))


def format_result(result: RunResult, mode: str = "text") -> str:
    if mode == "json":
        return json.dumps(
            {
                "engine": result.engine,
                "shots": result.shots,
                "seed": result.seed,
                "histogram": dict(_ordered(result.histogram)),
                "metrics": result.metrics,
                "elapsed_ms": result.elapsed_ms,
            },
            sort_keys=False,
        )
    if mode != "text":
        raise ValueError(f"unknown output mode {mode!r}")
    rows = [(state, str(count), f"{count / result.shots:.6f}") for state, count in _ordered(result.histogram)]
    w0 = max(len("state"), *(len(r[0]) for r in rows))
    w1 = max(len("count"), *(len(r[1]) for r in rows))
    lines = [
        f"# engine={result.engine} shots={result.shots} seed={result.seed} elapsed_ms={result.elapsed_ms:.3f}",
    ]
    for key, val in result.metrics.items():
        lines.append(f"# {key}={val}")
    lines.append(f"{'state':<{w0}} {'count':>{w1}} frequency")
    lines.extend(f"{s:<{w0}} {c:>{w1}} {f}" for s, c, f in rows)
    return "\n".join(lines)
