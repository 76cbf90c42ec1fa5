"""Dense statevector reference simulator.

Qubit 0 is the most significant bit of the basis index.  Exists for
correctness checks only; registers above ``MAX_QUBITS`` are refused.
"""
import numpy as np

MAX_QUBITS = 14


class ResourceError(RuntimeError):
    pass


def basis_state(bits):
    L = len(bits)
    psi = np.zeros(2**L, dtype=np.complex128)
    psi[int(bits, 2) if L else 0] = 1.0
    return psi


def parity_even(bits):
    return bits.count("1") % 2 == 0


def apply_gate(psi, g, q, L=None):
    """Apply ``g`` on qubits (q, q+1); returns a new vector."""
    if L is None:
        L = int(np.log2(psi.size))
    if not 0 <= q < L - 1:
        raise IndexError(f"gate position q={q} invalid for L={L}")
    u = g.matrix() if hasattr(g, "matrix") else np.asarray(g)
    t = psi.reshape(2**q, 4, 2 ** (L - q - 2))
    return np.einsum("ab,xby->xay", u, t).reshape(-1)


def evolve(circuit, max_qubits=MAX_QUBITS):
    if circuit.L > max_qubits:
        raise ResourceError(f"L={circuit.L} exceeds the oracle cap of {max_qubits} qubits")
    psi = basis_state(circuit.psi_i)
    for _, q, g in circuit.placements():
        psi = apply_gate(psi, g, q, circuit.L)
    return psi


def overlap(circuit, max_qubits=MAX_QUBITS):
    """<psi_f| U |psi_i> by brute force."""
    psi = evolve(circuit, max_qubits)
    return complex(psi[int(circuit.psi_f, 2) if circuit.L else 0])
