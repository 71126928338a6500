import math

import numpy as np
import pytest
from helpers import random_gates, random_hamiltonian

from sparsevqe.dense_oracle import (
    circuit_unitary,
    dense_apply_exponential,
    dense_reference,
    ground_energy,
    pauli_matrix,
    spectrum,
)
from sparsevqe.hamiltonian import PauliSumOperator
from sparsevqe.pauli import parse_pauli
from sparsevqe.state import ExponentialGate


def test_zero_angle():
    v = dense_reference(3, 5)
    out = dense_apply_exponential(v, ExponentialGate(parse_pauli("X0 Y2", 3), 0.0))
    np.testing.assert_array_equal(out, v)


def test_x_rotation():
    out = dense_apply_exponential(dense_reference(1, 0), ExponentialGate(parse_pauli("X0", 1), 0.3))
    np.testing.assert_allclose(out, [math.cos(0.3), 1j * math.sin(0.3)], atol=1e-15)


def test_norm_preserved(rng):
    v = dense_reference(7, 9)
    for g in random_gates(rng, 7, 20):
        v = dense_apply_exponential(v, g)
        assert abs(np.linalg.norm(v) - 1) < 1e-12


def test_qubit_order():
    # X on qubit 0 flips the least significant bit
    m = pauli_matrix(parse_pauli("X0", 2)).toarray()
    assert m[1, 0] == 1 and m[2, 0] == 0


def test_size_limit():
    with pytest.raises(ValueError):
        dense_reference(25, 0)


class TestGround:
    def test_z(self):
        assert ground_energy(PauliSumOperator(1, [(1.0, parse_pauli("Z0", 1))])) == pytest.approx(-1.0, abs=1e-12)

    def test_x_plus_z(self):
        h = PauliSumOperator(1, [(1.0, parse_pauli("X0", 1)), (1.0, parse_pauli("Z0", 1))])
        assert ground_energy(h) == pytest.approx(-math.sqrt(2), abs=1e-12)

    def test_matches_spectrum(self, rng):
        h = random_hamiltonian(rng, 6, 25)
        assert ground_energy(h) == pytest.approx(spectrum(h)[0], abs=1e-12)

    def test_too_large(self):
        with pytest.raises(ValueError):
            ground_energy(PauliSumOperator(11, [(1.0, parse_pauli("Z0", 11))]))


def test_cnot_unitary():
    u = circuit_unitary(2, [("CNOT", (0, 1), None)])
    # control qubit 0 (bit 0), target qubit 1 (bit 1): |01> -> |11>
    assert u[0b11, 0b01] == 1 and u[0b00, 0b00] == 1 and u[0b10, 0b10] == 1 and u[0b01, 0b11] == 1
