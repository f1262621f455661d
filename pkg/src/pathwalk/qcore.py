"""Core types: basis states, gate matrices, circuits and gate classification.

Bit convention: qubit 0 is the least significant bit of a basis-state label.
Bitstrings are printed most-significant first, so ``"0110"`` on four qubits
has qubits 2 and 1 set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

EPS_ZERO = 1e-12
UNITARY_TOL = 1e-10
MAX_WIDTH = 1024
MAX_ARITY = 4


class InvalidOperandError(ValueError):
    """An operand list does not fit the state or gate it is used with."""


@dataclass(frozen=True)
class BasisState:
    width: int
    bits: int = 0

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in [1, {MAX_WIDTH}], got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(f"bits {self.bits:#x} do not fit in width {self.width}")

    @classmethod
    def from_bitstring(cls, text: str) -> BasisState:
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"not a bitstring: {text!r}")
        return cls(len(text), int(text, 2))

    def bit(self, qubit: int) -> int:
        return (self.bits >> qubit) & 1

    def to_bitstring(self) -> str:
        return format(self.bits, f"0{self.width}b")

    def __str__(self) -> str:
        return self.to_bitstring()


def _check_operands(width: int, operands: Sequence[int]) -> None:
    if len(operands) == 0:
        raise InvalidOperandError("operand list must be non-empty")
    if len(set(operands)) != len(operands):
        raise InvalidOperandError(f"repeated operand in {list(operands)}")
    for q in operands:
        if not 0 <= q < width:
            raise InvalidOperandError(f"qubit {q} out of range for width {width}")


def substate_index(state: BasisState, operands: Sequence[int]) -> int:
    """Local block index of ``state``: bit j is the value of qubit ``operands[j]``."""
    _check_operands(state.width, operands)
    local = 0
    for j, q in enumerate(operands):
        local |= ((state.bits >> q) & 1) << j
    return local


def with_substate(state: BasisState, operands: Sequence[int], local: int) -> BasisState:
    """Return ``state`` with the operand qubits overwritten by the bits of ``local``."""
    _check_operands(state.width, operands)
    if not 0 <= local < (1 << len(operands)):
        raise ValueError(f"local index {local} out of range for {len(operands)} operands")
    bits = state.bits
    for j, q in enumerate(operands):
        bits = (bits & ~(1 << q)) | (((local >> j) & 1) << q)
    return BasisState(state.width, bits)


def check_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.all(np.isfinite(m)):
        return False
    with np.errstate(over="ignore", invalid="ignore"):
        err = m.conj().T @ m - np.eye(m.shape[0])
        worst = float(np.max(np.abs(err)))
    return bool(np.isfinite(worst) and worst <= tol)


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """A unitary acting on ``arity`` qubits.

    Row index is the output local index, column index the input local index;
    local bit j belongs to operand j of the application.
    """

    name: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"gate {self.name!r}: matrix must be square")
        dim = m.shape[0]
        arity = dim.bit_length() - 1
        if dim != 1 << arity or not 1 <= arity <= MAX_ARITY:
            raise ValueError(f"gate {self.name!r}: dimension {dim} is not 2^a for a in 1..{MAX_ARITY}")
        if not check_unitary(m):
            raise ValueError(f"gate {self.name!r}: matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def support(self) -> np.ndarray:
        return np.abs(self.matrix) > EPS_ZERO

    @cached_property
    def rows(self) -> tuple[tuple[tuple[int, complex], ...], ...]:
        """Per output index, the (input index, entry) pairs with nonzero entry."""
        m = self.matrix
        return tuple(
            tuple((j, complex(m[i, j])) for j in range(self.dim) if self.support[i, j])
            for i in range(self.dim)
        )

    @cached_property
    def columns(self) -> tuple[tuple[tuple[int, complex], ...], ...]:
        """Per input index, the (output index, entry) pairs with nonzero entry."""
        m = self.matrix
        return tuple(
            tuple((i, complex(m[i, j])) for i in range(self.dim) if self.support[i, j])
            for j in range(self.dim)
        )

    @cached_property
    def is_trivial(self) -> bool:
        return bool(np.all(self.support.sum(axis=0) == 1))

    @cached_property
    def fanout(self) -> int:
        """Largest number of outputs reachable from a single input."""
        return int(self.support.sum(axis=0).max())

    def allclose(self, other: GateMatrix, atol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.matrix, other.matrix, rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"GateMatrix({self.name!r}, arity={self.arity})"


TRIVIAL = "trivial"
NONTRIVIAL = "nontrivial"


def classify_gate(gate: GateMatrix) -> str:
    """``TRIVIAL`` for monomial matrices (one nonzero per column), else ``NONTRIVIAL``."""
    return TRIVIAL if gate.is_trivial else NONTRIVIAL


def branching_factor(gate: GateMatrix, local_input: int) -> int:
    """Number of block inputs that share some reachable output with ``local_input``."""
    if not 0 <= local_input < gate.dim:
        raise ValueError(f"local input {local_input} out of range for arity {gate.arity}")
    sup = gate.support
    reachable = sup[:, local_input]
    return int(np.count_nonzero(sup[reachable].any(axis=0)))


@dataclass(frozen=True, eq=False)
class GateApplication:
    gate: GateMatrix
    operands: tuple[int, ...]

    def __post_init__(self):
        ops = tuple(int(q) for q in self.operands)
        object.__setattr__(self, "operands", ops)
        if len(ops) != self.gate.arity:
            raise InvalidOperandError(
                f"gate {self.gate.name!r} has arity {self.gate.arity}, got {len(ops)} operands"
            )
        if len(set(ops)) != len(ops):
            raise InvalidOperandError(f"repeated operand in {list(ops)}")
        if any(q < 0 for q in ops):
            raise InvalidOperandError(f"negative operand in {list(ops)}")

    @cached_property
    def mask(self) -> int:
        m = 0
        for q in self.operands:
            m |= 1 << q
        return m

    @cached_property
    def scatter(self) -> tuple[int, ...]:
        """``scatter[j]`` is local index j deposited onto the operand qubits."""
        out = []
        for local in range(self.gate.dim):
            bits = 0
            for j, q in enumerate(self.operands):
                if (local >> j) & 1:
                    bits |= 1 << q
            out.append(bits)
        return tuple(out)

    def local_index(self, bits: int) -> int:
        local = 0
        for j, q in enumerate(self.operands):
            local |= ((bits >> q) & 1) << j
        return local


@dataclass(frozen=True, eq=False)
class Circuit:
    width: int
    gates: tuple[GateApplication, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width must be in [1, {MAX_WIDTH}], got {self.width}")
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for pos, app in enumerate(gates):
            for q in app.operands:
                if q >= self.width:
                    raise InvalidOperandError(
                        f"gate {pos} ({app.gate.name}): qubit {q} out of range for width {self.width}"
                    )

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, apps: Iterable[GateApplication]) -> Circuit:
        return Circuit(self.width, self.gates + tuple(apps))

    def equivalent(self, other: Circuit, atol: float = 1e-12) -> bool:
        """Gate-by-gate matrix and operand equality."""
        if self.width != other.width or len(self) != len(other):
            return False
        return all(
            a.operands == b.operands and a.gate.allclose(b.gate, atol)
            for a, b in zip(self.gates, other.gates)
        )


@dataclass(frozen=True)
class CircuitStats:
    s: int
    t: int
    k: int
    b_max: int

    @property
    def leaf_bound(self) -> int:
        """Upper bound b_max**k on the leaf count of one amplitude recursion."""
        return self.b_max**self.k


def circuit_stats(circuit: Circuit) -> CircuitStats:
    k = 0
    b_max = 1
    seen: dict[int, int] = {}
    for app in circuit.gates:
        g = app.gate
        if not g.is_trivial:
            k += 1
        if id(g) not in seen:
            seen[id(g)] = max(branching_factor(g, j) for j in range(g.dim))
        b_max = max(b_max, seen[id(g)])
    return CircuitStats(s=circuit.width, t=len(circuit), k=k, b_max=b_max)
