"""Full-array reference simulator, independent of the engines under test.

The state is a numpy tensor with one axis per qubit; gates are contracted in
with einsum. Axis q of the tensor is qubit q.
"""
import numpy as np


def statevector(circuit, input_bits: int) -> np.ndarray:
    s = circuit.width
    psi = np.zeros((2,) * s, dtype=complex)
    psi[tuple((input_bits >> q) & 1 for q in range(s))] = 1.0
    for app in circuit.gates:
        a = app.gate.arity
        # local bit j <-> operand j, so reshape the matrix with operand a-1 as the slowest axis
        u = app.gate.matrix.reshape((2,) * (2 * a))
        out_axes = list(reversed(range(a)))
        in_axes = list(reversed(range(a, 2 * a)))
        letters = "abcdefghijklmnopqrstuvwxyz"
        u_sub = "".join(letters[i] for i in out_axes + in_axes)
        psi_sub = [letters[2 * a + q] for q in range(s)]
        res_sub = list(psi_sub)
        for j, q in enumerate(app.operands):
            psi_sub[q] = letters[a + j]
            res_sub[q] = letters[j]
        psi = np.einsum(f"{u_sub},{''.join(psi_sub)}->{''.join(res_sub)}", u, psi)
    flat = np.zeros(1 << s, dtype=complex)
    for idx in np.ndindex(*psi.shape):
        flat[sum(b << q for q, b in enumerate(idx))] = psi[idx]
    return flat
