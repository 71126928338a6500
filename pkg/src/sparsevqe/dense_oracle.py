"""Full state-vector reference simulator for small systems.

Everything here is built from Kronecker products of the 2x2 Pauli matrices,
so it shares no code path with the bit-mask machinery it is used to check.
Intended for tests and ``--verify`` runs only.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .hamiltonian import PauliSumOperator
from .pauli import PauliString
from .state import ExponentialGate, SparseState

MAX_DENSE_QUBITS = 24
MAX_EIGEN_QUBITS = 10

_PAULI_2X2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_size(n_qubits, limit=MAX_DENSE_QUBITS):
    if n_qubits > limit:
        raise ValueError(f"{n_qubits} qubits exceeds the dense limit of {limit}")


def pauli_matrix(p: PauliString) -> sp.csr_matrix:
    """Sparse ``2**n x 2**n`` matrix of ``p``; qubit 0 is the rightmost Kronecker factor."""
    _check_size(p.n_qubits)
    mat = sp.identity(1, dtype=complex, format="csr")
    for q in reversed(range(p.n_qubits)):
        mat = sp.kron(mat, _PAULI_2X2[p.factor(q)], format="csr")
    return mat * (1j ** p.phase_exponent)


def hamiltonian_matrix(h: PauliSumOperator) -> sp.csr_matrix:
    _check_size(h.n_qubits)
    dim = 1 << h.n_qubits
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for c, p in h:
        out = out + c * pauli_matrix(p)
    return out


def dense_reference(n_qubits: int, occupied: int) -> np.ndarray:
    _check_size(n_qubits)
    vec = np.zeros(1 << n_qubits, dtype=complex)
    vec[occupied] = 1.0
    return vec


def dense_apply_exponential(vec: np.ndarray, gate: ExponentialGate) -> np.ndarray:
    """``cos(theta) v + i sin(theta) P v``."""
    n = gate.pauli.n_qubits
    _check_size(n)
    if len(vec) != 1 << n:
        raise ValueError(f"vector length {len(vec)} does not match {n} qubits")
    return np.cos(gate.theta) * vec + 1j * np.sin(gate.theta) * (pauli_matrix(gate.pauli) @ vec)


def dense_circuit(n_qubits: int, occupied: int, gates) -> np.ndarray:
    vec = dense_reference(n_qubits, occupied)
    for g in gates:
        vec = dense_apply_exponential(vec, g)
    return vec


def dense_energy(vec: np.ndarray, h: PauliSumOperator) -> float:
    if len(vec) != 1 << h.n_qubits:
        raise ValueError(f"vector length {len(vec)} does not match {h.n_qubits} qubits")
    return float(np.real(np.vdot(vec, hamiltonian_matrix(h) @ vec)))


def spectrum(h: PauliSumOperator) -> np.ndarray:
    _check_size(h.n_qubits, MAX_EIGEN_QUBITS)
    return np.linalg.eigvalsh(hamiltonian_matrix(h).toarray())


def ground_energy(h: PauliSumOperator, tol: float = 1e-9) -> float:
    """Smallest eigenvalue, certified by the residual ``||H v - lambda v||``."""
    _check_size(h.n_qubits, MAX_EIGEN_QUBITS)
    mat = hamiltonian_matrix(h).toarray()
    vals, vecs = np.linalg.eigh(mat)
    lam, v = vals[0], vecs[:, 0]
    resid = np.linalg.norm(mat @ v - lam * v)
    scale = max(1.0, np.abs(vals).max())
    if resid > tol * scale:
        raise ArithmeticError(f"eigen-residual {resid:.2e} above tolerance")
    return float(lam)


def to_dense(state: SparseState) -> np.ndarray:
    _check_size(state.n_qubits)
    vec = np.zeros(1 << state.n_qubits, dtype=complex)
    for k, a in state.entries.items():
        vec[k] = a
    return vec


# --- gate-level circuits (basis changes, CNOT ladders, rotations) ---

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _single_qubit_matrix(name, angle):
    if name == "H":
        return _H
    if name == "X":
        return _PAULI_2X2["X"]
    if name == "RX":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "RZ":
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    raise ValueError(f"unknown gate {name!r}")


def _apply_gate(psi: np.ndarray, n: int, gate) -> np.ndarray:
    # tensor axis for qubit q is n-1-q (C order puts the high bit first)
    name, qubits, angle = gate
    t = psi.reshape((2,) * n)
    if name == "CNOT":
        c, tq = qubits
        ac, at = n - 1 - c, n - 1 - tq
        t = t.copy()
        idx = [slice(None)] * n
        idx[ac] = 1
        sub = t[tuple(idx)]
        # axis `at` shifts down by one if it came after the removed control axis
        sub_axis = at - (1 if at > ac else 0)
        t[tuple(idx)] = np.flip(sub, axis=sub_axis)
        return t.reshape(-1)
    (q,) = qubits
    m = _single_qubit_matrix(name, angle)
    t = np.moveaxis(np.tensordot(m, t, axes=([1], [n - 1 - q])), 0, n - 1 - q)
    return t.reshape(-1)


def circuit_unitary(n_qubits: int, gates) -> np.ndarray:
    """Matrix of a gate list of ``(name, qubits, angle)`` applied first to last."""
    _check_size(n_qubits, 12)
    dim = 1 << n_qubits
    cols = []
    for k in range(dim):
        psi = np.zeros(dim, dtype=complex)
        psi[k] = 1.0
        for g in gates:
            psi = _apply_gate(psi, n_qubits, g)
        cols.append(psi)
    return np.stack(cols, axis=1)


def exponential_matrix(gate: ExponentialGate) -> np.ndarray:
    """Dense ``exp(i theta P)`` via ``cos(theta) 1 + i sin(theta) P``."""
    pm = pauli_matrix(gate.pauli).toarray()
    return np.cos(gate.theta) * np.eye(len(pm)) + 1j * np.sin(gate.theta) * pm
