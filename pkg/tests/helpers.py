import numpy as np

from sparsevqe.hamiltonian import PauliSumOperator
from sparsevqe.pauli import PauliString
from sparsevqe.state import ExponentialGate


def rand_bits(rng, n):
    return int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)


def random_pauli(rng, n, allow_identity=False, max_weight=None):
    while True:
        if max_weight is None:
            x = rand_bits(rng, n)
            z = rand_bits(rng, n)
        else:
            w = int(rng.integers(1, max_weight + 1))
            qs = rng.choice(n, size=min(w, n), replace=False)
            x = z = 0
            for q in qs:
                f = int(rng.integers(1, 4))
                x |= (f & 1) << int(q)
                z |= (f >> 1) << int(q)
        if allow_identity or x or z:
            return PauliString(n, x, z)


def random_gates(rng, n, m, lo=-np.pi, hi=np.pi):
    return [ExponentialGate(random_pauli(rng, n), float(rng.uniform(lo, hi))) for _ in range(m)]


def random_hamiltonian(rng, n, n_terms, with_identity=True):
    terms = [(float(rng.normal()), random_pauli(rng, n)) for _ in range(n_terms)]
    if with_identity:
        terms.append((float(rng.normal()), PauliString.identity(n)))
    return PauliSumOperator(n, terms)


def random_reference(rng, n):
    return rand_bits(rng, n)


def independent_masks(rng, n, r):
    """``r`` GF(2)-independent nonzero masks on ``n`` bits (r <= n)."""
    basis = {}
    out = []
    while len(out) < r:
        v = rand_bits(rng, n)
        w = v
        while w:
            top = w.bit_length() - 1
            if top not in basis:
                basis[top] = w
                out.append(v)
                break
            w ^= basis[top]
    return out


def pauli_with_xmask(rng, n, x_mask):
    """Random Pauli whose XY-mask is ``x_mask`` (random X/Y choice, random Z elsewhere)."""
    return PauliString(n, x_mask, rand_bits(rng, n))


# filled by the acceptance suite, echoed in the pytest terminal summary
ACCEPTANCE_LINES = []
