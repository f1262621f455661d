"""Concrete gates plus QFT / Draper-adder circuit builders."""
from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .qcore import Circuit, GateApplication, GateMatrix

_SQRT2_INV = 1 / math.sqrt(2)


def hadamard() -> GateMatrix:
    return GateMatrix("H", np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV)


def _phase_factor(q: int) -> complex:
    if q < 0:
        raise ValueError(f"phase exponent must be non-negative, got {q}")
    # exact values where floating exp would leave 1e-16 residue
    if q == 0:
        return -1 + 0j
    if q == 1:
        return 1j
    return cmath.exp(1j * math.pi * 2.0**-q)


def phase(q: int) -> GateMatrix:
    """diag(1, exp(i*pi/2**q))."""
    return GateMatrix(f"PHASE({q})", np.diag([1, _phase_factor(q)]))


def cphase(q: int) -> GateMatrix:
    """Controlled phase diag(1, 1, 1, exp(i*pi/2**q)).

    Operand 0 is the target and operand 1 the control; the matrix is symmetric
    in the two so this only matters for reading circuits.
    """
    return GateMatrix(f"CPHASE({q})", np.diag([1, 1, 1, _phase_factor(q)]))


def _permutation(perm: Sequence[int]) -> np.ndarray:
    m = np.zeros((len(perm), len(perm)), dtype=complex)
    for j, i in enumerate(perm):
        m[i, j] = 1
    return m


# target is operand 0, controls follow
_STANDARD = {
    "X": [1, 0],
    "CNOT": [0, 1, 3, 2],
    "SWAP": [0, 2, 1, 3],
    "CCNOT": [0, 1, 2, 3, 4, 5, 7, 6],
}


def standard_gate(name: str) -> GateMatrix:
    key = name.upper()
    if key not in _STANDARD:
        raise ValueError(f"unknown standard gate {name!r}")
    return GateMatrix(key, _permutation(_STANDARD[key]))


def inverse(gate: GateMatrix) -> GateMatrix:
    m = gate.matrix.conj().T
    if np.allclose(m, gate.matrix, rtol=0, atol=1e-15):
        return gate
    name = gate.name[:-3] if gate.name.endswith("_DG") else gate.name + "_DG"
    return GateMatrix(name, m)


def controlled(u: GateMatrix, n_controls: int) -> GateMatrix:
    """C^n U: ``u`` on the low operands, applied when all ``n_controls`` high operands are 1."""
    dim = u.dim << n_controls
    m = np.eye(dim, dtype=complex)
    m[dim - u.dim:, dim - u.dim:] = u.matrix
    prefix = "C" * n_controls
    return GateMatrix(f"{prefix}{u.name}", m)


def random_unitary(arity: int, rng: np.random.Generator, name: str | None = None) -> GateMatrix:
    m = unitary_group.rvs(1 << arity, random_state=rng)
    return GateMatrix(name or f"U{arity}", np.atleast_2d(m))


def build_qft(qubits: Sequence[int]) -> list[GateApplication]:
    """QFT over ``qubits`` (qubits[0] least significant), no terminal swaps.

    Afterwards qubit ``qubits[j]`` carries the relative phase exp(2*pi*i*x / 2**(j+1)).
    """
    qubits = list(qubits)
    if not qubits:
        raise ValueError("QFT needs at least one qubit")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit in {qubits}")
    h = hadamard()
    apps = []
    for j in reversed(range(len(qubits))):
        apps.append(GateApplication(h, (qubits[j],)))
        for m in reversed(range(j)):
            apps.append(GateApplication(cphase(j - m), (qubits[j], qubits[m])))
    return apps


def inverse_sequence(apps: Sequence[GateApplication]) -> list[GateApplication]:
    return [GateApplication(inverse(app.gate), app.operands) for app in reversed(apps)]


def build_draper_adder(n: int) -> Circuit:
    """In-place a := (a + b) mod 2**n. Qubits 0..n-1 hold a, n..2n-1 hold b."""
    if n < 1:
        raise ValueError(f"register width must be >= 1, got {n}")
    a = list(range(n))
    b = list(range(n, 2 * n))
    qft = build_qft(a)
    ladder = [
        GateApplication(cphase(j - m), (a[j], b[m]))
        for j in reversed(range(n))
        for m in reversed(range(j + 1))
    ]
    return Circuit(2 * n, tuple(qft + ladder + inverse_sequence(qft)))


_RANDOM_KINDS = ("H", "X", "CNOT", "CPHASE", "U")


def random_circuit(
    rng: np.random.Generator,
    max_width: int = 6,
    max_gates: int = 12,
    width: int | None = None,
    n_gates: int | None = None,
) -> Circuit:
    """Random circuit over {H, X, CNOT, CPHASE(q<=3), random unitary of arity <= 2}.

    Two-qubit kinds fall back to their one-qubit counterpart on width-1 circuits.
    """
    s = width if width is not None else int(rng.integers(1, max_width + 1))
    t = n_gates if n_gates is not None else int(rng.integers(1, max_gates + 1))
    apps = []
    for _ in range(t):
        kind = _RANDOM_KINDS[int(rng.integers(len(_RANDOM_KINDS)))]
        if kind in ("CNOT", "CPHASE") and s < 2:
            kind = "X" if kind == "CNOT" else "PHASE"
        if kind == "H":
            gate = hadamard()
        elif kind == "X":
            gate = standard_gate("X")
        elif kind == "CNOT":
            gate = standard_gate("CNOT")
        elif kind == "CPHASE":
            gate = cphase(int(rng.integers(0, 4)))
        elif kind == "PHASE":
            gate = phase(int(rng.integers(0, 4)))
        else:
            arity = int(rng.integers(1, min(2, s) + 1))
            gate = random_unitary(arity, rng, name=f"U{len(apps)}")
        ops = rng.choice(s, size=gate.arity, replace=False)
        apps.append(GateApplication(gate, tuple(int(q) for q in ops)))
    return Circuit(s, tuple(apps))
