import math

import numpy as np
import pytest
from helpers import random_gates, random_hamiltonian, random_pauli, random_reference

from sparsevqe.dense_oracle import dense_energy, hamiltonian_matrix, pauli_matrix, to_dense
from sparsevqe.errors import NonHermitianError
from sparsevqe.hamiltonian import (
    PauliSumOperator,
    energy,
    load_hamiltonian,
    memory_estimate,
    pauli_expectation,
    projector_expectation,
    prune,
    similarity_transform,
    term_count,
    write_hamiltonian,
)
from sparsevqe.pauli import PauliString, commutes, parse_pauli
from sparsevqe.state import ExponentialGate, SparseState, apply_circuit, from_reference


def op(n, *terms):
    return PauliSumOperator(n, [(c, parse_pauli(t, n)) for c, t in terms])


def brute_expectation(state, p):
    total = 0j
    for x, a in state.entries.items():
        y, c = p.apply_to_basis(x)
        total += state.get_amplitude(y).conjugate() * c * a
    return total


class TestOperator:
    def test_dedup(self):
        h = op(2, (0.5, "Z0"), (0.25, "Z0"), (1.0, "X1"))
        assert len(h) == 2
        assert h.coefficient(parse_pauli("Z0", 2)) == 0.75

    def test_phase_absorbed(self):
        h = PauliSumOperator(1, [(2.0, PauliString(1, 1, 0, 2))])  # 2 * (-X)
        assert h.terms == [(-2.0, parse_pauli("X0", 1))]

    def test_imaginary_rejected(self):
        with pytest.raises(NonHermitianError):
            PauliSumOperator(1, [(1.0, PauliString(1, 1, 0, 1))])

    def test_cancelling_terms_dropped(self):
        assert len(op(1, (0.5, "Z0"), (-0.5, "Z0"))) == 0

    def test_mismatched_term(self):
        with pytest.raises(ValueError):
            PauliSumOperator(2, [(1.0, parse_pauli("X0", 3))])


class TestLoad:
    def test_dedup_from_file(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("0.5 Z0\n0.25 Z0\n")
        h = load_hamiltonian(f)
        assert h.terms == [(0.75, parse_pauli("Z0", 1))]

    def test_identity_only(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("# offset\n\n1.0 I\n")
        h = load_hamiltonian(f, n_qubits=3)
        assert h.terms == [(1.0, PauliString.identity(3))]

    def test_header_sets_qubits(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("n_qubits: 6\n-1.5 X0 Y2  # trailing comment\n")
        h = load_hamiltonian(f)
        assert h.n_qubits == 6 and len(h) == 1

    def test_malformed_line_number(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("0.5 Z0\n0.1 Q3\n")
        with pytest.raises(ValueError, match=":2:"):
            load_hamiltonian(f)

    def test_bad_coefficient(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("abc Z0\n")
        with pytest.raises(ValueError, match=":1:"):
            load_hamiltonian(f)

    def test_non_real_accumulated(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("0.5+0.5j Z0\n0.5-0.25j Z0\n")
        with pytest.raises(NonHermitianError):
            load_hamiltonian(f)

    def test_complex_literals_that_cancel(self, tmp_path):
        f = tmp_path / "h.txt"
        f.write_text("0.5+0.5j Z0\n0.5-0.5j Z0\n")
        assert load_hamiltonian(f).terms == [(1.0, parse_pauli("Z0", 1))]

    def test_round_trip(self, tmp_path, rng):
        h = random_hamiltonian(rng, 9, 40)
        f = tmp_path / "h.txt"
        write_hamiltonian(h, f)
        assert load_hamiltonian(f).as_dict() == h.as_dict()


class TestExpectation:
    def test_z_on_zero(self):
        assert pauli_expectation(from_reference(1, 0), parse_pauli("Z0", 1)) == 1.0

    def test_x_eigenstate(self):
        s = SparseState(1, {0: 1 / math.sqrt(2), 1: 1 / math.sqrt(2)})
        assert pauli_expectation(s, parse_pauli("X0", 1)) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_projector_formula(self, seed):
        rng = np.random.default_rng(seed)
        s = from_reference(8, random_reference(rng, 8))
        apply_circuit(s, random_gates(rng, 8, 10))
        for p in [parse_pauli("X0", 8)] + [random_pauli(rng, 8) for _ in range(5)]:
            assert pauli_expectation(s, p) == pytest.approx(projector_expectation(s, p), abs=1e-12)

    def test_non_hermitian_flagged(self):
        s = SparseState(1, {0: 1 / math.sqrt(2), 1: 1 / math.sqrt(2)})
        with pytest.raises(NonHermitianError):
            pauli_expectation(s, PauliString(1, 1, 0, 1))  # i X

    @pytest.mark.parametrize("n", [30, 70, 100])
    def test_wide_indices(self, n, rng):
        # n > 22 uses sorted search; n > 64 uses 128-bit keys
        s = from_reference(n, random_reference(rng, n))
        apply_circuit(s, random_gates(rng, n, 9))
        for _ in range(10):
            p = random_pauli(rng, n)
            assert pauli_expectation(s, p) == pytest.approx(brute_expectation(s, p).real, abs=1e-12)
        # a Pauli pairing stored indices: reuse an entangler mask
        gates = random_gates(rng, n, 1)
        s2 = from_reference(n, 0)
        apply_circuit(s2, gates)
        g = gates[0].pauli
        low = g.x_mask & -g.x_mask
        # same XY-mask, anticommutes with the gate -> <p> ~ sin(2 theta)
        p = PauliString(n, g.x_mask, g.z_mask ^ low)
        assert abs(pauli_expectation(s2, p)) > 1e-3
        assert pauli_expectation(s2, p) == pytest.approx(brute_expectation(s2, p).real, abs=1e-12)


class TestEnergy:
    def test_z_on_one(self):
        assert energy(from_reference(1, 1), op(1, (1.0, "Z0")), 1)[0] == -1.0

    def test_empty_operator(self):
        assert energy(from_reference(2, 1), PauliSumOperator(2), 2)[0] == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_against_dense(self, seed):
        rng = np.random.default_rng(seed)
        n = 10
        h = random_hamiltonian(rng, n, 80)
        s = from_reference(n, random_reference(rng, n))
        apply_circuit(s, random_gates(rng, n, 14))
        e, t = energy(s, h, 3)
        assert e == pytest.approx(dense_energy(to_dense(s), h), abs=1e-10)
        assert t >= 0

    def test_worker_invariance(self, rng):
        n = 12
        h = random_hamiltonian(rng, n, 300)
        s = from_reference(n, 0)
        apply_circuit(s, random_gates(rng, n, 14))
        values = [energy(s, h, w)[0] for w in (1, 2, 3, 8, 64)]
        for v in values:
            assert v == pytest.approx(values[0], rel=1e-10, abs=1e-14)

    def test_bad_workers(self):
        with pytest.raises(ValueError):
            energy(from_reference(1, 0), op(1, (1.0, "Z0")), 0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            energy(from_reference(2, 0), op(1, (1.0, "Z0")), 1)


class TestPrune:
    def test_zero_threshold(self, rng):
        h = random_hamiltonian(rng, 4, 10)
        pruned, removed = prune(h, 0.0)
        assert pruned.as_dict() == h.as_dict() and removed == 0

    def test_small_term_removed(self):
        pruned, removed = prune(op(1, (1.0, "Z0"), (1e-9, "X0")), 5e-7)
        assert pruned.terms == [(1.0, parse_pauli("Z0", 1))]
        assert removed == pytest.approx(1e-9)

    def test_all_removed(self):
        pruned, _ = prune(op(1, (1e-3, "Z0")), 1.0)
        assert len(pruned) == 0
        assert energy(from_reference(1, 0), pruned, 1)[0] == 0.0

    def test_strict_less_than(self):
        pruned, _ = prune(op(1, (0.5, "Z0")), 0.5)
        assert len(pruned) == 1

    def test_negative_threshold(self):
        with pytest.raises(ValueError):
            prune(op(1, (1.0, "Z0")), -1.0)


class TestSimilarityTransform:
    @pytest.mark.parametrize("beta", [0.3, -1.1, 2.5])
    def test_z_by_x(self, beta):
        h = op(1, (1.0, "Z0"))
        p = parse_pauli("X0", 1)
        t = similarity_transform(h, p, beta)
        expected = {(0, 1): math.cos(beta), (1, 1): math.sin(beta)}
        got = t.as_dict()
        assert got.keys() == expected.keys()
        for k in expected:
            assert got[k] == pytest.approx(expected[k], abs=1e-15)
        # 2x2 conjugation oracle
        u = np.cos(beta / 2) * np.eye(2) - 1j * np.sin(beta / 2) * pauli_matrix(p).toarray()
        conj = u.conj().T @ hamiltonian_matrix(h).toarray() @ u
        np.testing.assert_allclose(hamiltonian_matrix(t).toarray(), conj, atol=1e-15)

    def test_commuting_unchanged(self):
        h = op(3, (0.7, "Z0 Z1"), (-0.2, "X0 X1"), (1.1, "I"))
        t = similarity_transform(h, parse_pauli("Y0 Y1", 3), 0.9)
        assert t.as_dict() == h.as_dict()

    def test_zero_beta(self, rng):
        h = random_hamiltonian(rng, 5, 30)
        t = similarity_transform(h, random_pauli(rng, 5), 0.0)
        assert t.as_dict().keys() >= h.as_dict().keys()
        for k, v in h.as_dict().items():
            assert t.as_dict()[k] == pytest.approx(v, abs=1e-15)
        assert all(v == 0 or k in h.as_dict() for k, v in t.as_dict().items())

    @pytest.mark.parametrize("seed", range(6))
    def test_dense_conjugation(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        h = random_hamiltonian(rng, n, 20)
        p = random_pauli(rng, n)
        beta = float(rng.uniform(-np.pi, np.pi))
        t = similarity_transform(h, p, beta)
        pm = pauli_matrix(p).toarray()
        u = np.cos(beta / 2) * np.eye(len(pm)) - 1j * np.sin(beta / 2) * pm
        ref = u.conj().T @ hamiltonian_matrix(h).toarray() @ u
        np.testing.assert_allclose(hamiltonian_matrix(t).toarray(), ref, atol=1e-12)

    def test_growth_bound(self, rng):
        n = 6
        h = random_hamiltonian(rng, n, 40)
        p = random_pauli(rng, n)
        anti = sum(1 for _, q in h if not commutes(q, p))
        assert len(similarity_transform(h, p, 0.4)) <= len(h) + anti

    @pytest.mark.parametrize("seed", range(5))
    def test_duality(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        h = random_hamiltonian(rng, n, 30)
        p = random_pauli(rng, n)
        beta = float(rng.uniform(-np.pi, np.pi))
        ref = random_reference(rng, n)
        t = similarity_transform(h, p, beta)
        e_t = energy(from_reference(n, ref), t, 1)[0]
        s = from_reference(n, ref)
        s.apply_exponential(ExponentialGate.from_beta(p, beta))
        assert e_t == pytest.approx(energy(s, h, 1)[0], abs=1e-9)


class TestTermCount:
    def test_empty(self):
        h = PauliSumOperator(3)
        assert (term_count(h), h.memory_estimate()) == (0, 0)

    def test_one_term(self):
        assert op(2, (1.0, "X0")).memory_estimate() == 40

    def test_transformed_hamiltonian_size(self):
        # 3 030 709 562 dressed terms need about 121 GB
        assert round(memory_estimate(3_030_709_562) / 1e9) == 121

    def test_bare_hamiltonian_size(self):
        assert round(memory_estimate(3_775_249) / 1e6) == 151
