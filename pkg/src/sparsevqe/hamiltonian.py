"""Real-coefficient Pauli sums: file I/O, expectation values and iQCC dressing."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

import numpy as np

from .errors import NonHermitianError
from .pauli import I_POWERS, PauliString, commutes, multiply, parse_pauli
from .state import SparseState

_MASK64 = (1 << 64) - 1

# imaginary residue allowed when folding i**k phases into real coefficients
COEFF_IMAG_TOL = 1e-12
# imaginary residue allowed on a measured <P>
EXPECTATION_IMAG_TOL = 1e-8
# two 128-bit masks and one double per stored term
BYTES_PER_TERM = 40
# largest qubit count measured through a direct-address index table
DIRECT_TABLE_MAX_QUBITS = 22


class PauliSumOperator:
    """``sum_i h_i P_i`` with real ``h_i`` and one term per distinct Pauli.

    Repeated Paulis are merged on construction, phases ``i**k`` carried by the
    input Paulis are folded into the coefficients, and exact zeros are dropped.
    """

    def __init__(self, n_qubits: int, terms: Iterable[tuple[complex, PauliString]] = ()):
        self.n_qubits = n_qubits
        acc: dict[tuple[int, int], complex] = {}
        for coeff, p in terms:
            if p.n_qubits != n_qubits:
                raise ValueError(f"term {p} acts on {p.n_qubits} qubits, operator has {n_qubits}")
            key = (p.x_mask, p.z_mask)
            acc[key] = acc.get(key, 0j) + complex(coeff) * I_POWERS[p.phase_exponent]
        self._terms: list[tuple[float, PauliString]] = []
        for (x, z), c in acc.items():
            if abs(c.imag) > COEFF_IMAG_TOL:
                raise NonHermitianError(
                    f"coefficient of {PauliString(n_qubits, x, z).render()} has imaginary part {c.imag:.3e}"
                )
            if c.real != 0.0:
                self._terms.append((c.real, PauliString(n_qubits, x, z)))
        self._groups = None

    @property
    def terms(self) -> list[tuple[float, PauliString]]:
        return list(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __repr__(self) -> str:
        return f"PauliSumOperator(n_qubits={self.n_qubits}, terms={len(self)})"

    def coefficient(self, p: PauliString) -> float:
        for c, q in self._terms:
            if q.x_mask == p.x_mask and q.z_mask == p.z_mask:
                return c
        return 0.0

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(p.x_mask, p.z_mask): c for c, p in self._terms}

    def term_count(self) -> int:
        return len(self._terms)

    def memory_estimate(self) -> int:
        return memory_estimate(len(self._terms))

    def _grouped(self):
        # terms sharing an X-mask share the same index lookup during measurement
        if self._groups is None:
            by_x: dict[int, list[int]] = {}
            for i, (_, p) in enumerate(self._terms):
                by_x.setdefault(p.x_mask, []).append(i)
            n = len(self._terms)
            coeffs = np.fromiter((c for c, _ in self._terms), dtype=np.float64, count=n)
            zlo = np.fromiter((p.z_mask & _MASK64 for _, p in self._terms), dtype=np.uint64, count=n)
            zhi = np.fromiter((p.z_mask >> 64 for _, p in self._terms), dtype=np.uint64, count=n)
            ny = np.fromiter((p.y_mask.bit_count() % 4 for _, p in self._terms), dtype=np.int64, count=n)
            groups = [(x, np.asarray(idx, dtype=np.int64)) for x, idx in by_x.items()]
            self._groups = (groups, coeffs, zlo, zhi, ny)
        return self._groups


def memory_estimate(n_terms: int) -> int:
    return BYTES_PER_TERM * n_terms


def term_count(h: PauliSumOperator) -> int:
    return h.term_count()


class _Snapshot:
    """Read-only array view of a sparse state with fast index lookup."""

    def __init__(self, state: SparseState):
        self.n_qubits = state.n_qubits
        self.lo, self.hi, self.amps = state.to_arrays()
        self.wide = state.n_qubits > 64
        if state.n_qubits <= DIRECT_TABLE_MAX_QUBITS:
            self.table = np.full(1 << state.n_qubits, -1, dtype=np.int64)
            self.table[self.lo.astype(np.int64)] = np.arange(len(self.lo))
        else:
            self.table = None
            if self.wide:
                self._keys = self._bytes_key(self.lo, self.hi)
            else:
                self._keys = self.lo
            self._order = np.argsort(self._keys, kind="stable")
            self._sorted = self._keys[self._order]

    @staticmethod
    def _bytes_key(lo, hi):
        # big-endian 16-byte strings sort in numeric order
        buf = np.empty((len(lo), 2), dtype=">u8")
        buf[:, 0], buf[:, 1] = hi, lo
        return buf.view("S16").ravel()

    def positions(self, xlo: int, xhi: int) -> np.ndarray:
        """Index into the snapshot of ``key ^ x_mask`` for every key, -1 if absent."""
        flo = self.lo ^ np.uint64(xlo)
        if self.table is not None:
            return self.table[flo.astype(np.int64)]
        if self.wide:
            q = self._bytes_key(flo, self.hi ^ np.uint64(xhi))
        else:
            q = flo
        where = np.searchsorted(self._sorted, q)
        where[where == len(self._sorted)] = 0
        hit = self._sorted[where] == q
        out = np.full(len(q), -1, dtype=np.int64)
        out[hit] = self._order[where[hit]]
        return out

    def group_weights(self, x_mask: int):
        """``conj(a[x ^ mask]) * a[x]`` on the paired support plus the matching keys."""
        if x_mask == 0:
            return (self.amps.real ** 2 + self.amps.imag ** 2).astype(np.complex128), self.lo, self.hi
        pos = self.positions(x_mask & _MASK64, x_mask >> 64)
        valid = pos >= 0
        w = np.conj(self.amps[pos[valid]]) * self.amps[valid]
        return w, self.lo[valid], self.hi[valid]


def _parity(lo, hi, zlo, zhi, wide) -> np.ndarray:
    bits = np.bitwise_count(lo & zlo)
    if wide:
        bits = bits + np.bitwise_count(hi & zhi)
    return bits & 1


def _signed_sum(w, lo, hi, zlo, zhi, wide) -> complex:
    if zlo == 0 and zhi == 0:
        return complex(w.sum())
    odd = _parity(lo, hi, zlo, zhi, wide).astype(bool)
    return complex(w.sum() - 2.0 * w[odd].sum())


def _expectation_value(raw: complex, n_y: int, label) -> float:
    val = raw * I_POWERS[n_y % 4]
    if abs(val.imag) > EXPECTATION_IMAG_TOL:
        raise NonHermitianError(f"<{label}> has imaginary part {val.imag:.3e}")
    return val.real


def pauli_expectation(state: SparseState, p: PauliString) -> float:
    """``<psi|P|psi>`` from pairing each stored index with its flipped partner."""
    if p.n_qubits != state.n_qubits:
        raise ValueError(f"dimension mismatch: {p.n_qubits} vs {state.n_qubits} qubits")
    snap = _Snapshot(state)
    w, lo, hi = snap.group_weights(p.x_mask)
    z = p.z_mask
    raw = _signed_sum(w, lo, hi, np.uint64(z & _MASK64), np.uint64(z >> 64), snap.wide)
    return _expectation_value(raw * I_POWERS[p.phase_exponent], p.y_mask.bit_count(), p)


def projector_expectation(state: SparseState, p: PauliString) -> float:
    """``2 * p(+1) - 1`` with ``p(+1) = || (1 + P)/2 |psi> ||**2``.

    Builds the projected vector explicitly; kept independent of
    :func:`pauli_expectation` so either can check the other.
    """
    if p.n_qubits != state.n_qubits:
        raise ValueError(f"dimension mismatch: {p.n_qubits} vs {state.n_qubits} qubits")
    proj: dict[int, complex] = {}
    for x, a in state.entries.items():
        proj[x] = proj.get(x, 0j) + 0.5 * a
        y, c = p.apply_to_basis(x)
        proj[y] = proj.get(y, 0j) + 0.5 * c * a
    prob = math.fsum(abs(v) ** 2 for v in proj.values())
    return 2.0 * prob - 1.0


def _partition(groups, n_terms_of, workers: int):
    """Split groups into ``workers`` chunks of roughly equal term count."""
    chunks = [[] for _ in range(workers)]
    loads = [0] * workers
    for g in sorted(groups, key=n_terms_of, reverse=True):
        k = loads.index(min(loads))
        chunks[k].append(g)
        loads[k] += n_terms_of(g)
    return [c for c in chunks if c]


def default_workers() -> int:
    env = os.environ.get("SPARSEVQE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def energy(state: SparseState, h: PauliSumOperator, workers: int | None = None) -> tuple[float, float]:
    """``sum_i h_i <P_i>`` with terms spread over ``workers`` threads.

    Returns ``(energy, seconds)``. Partial sums are reduced in a fixed order
    but their grouping depends on ``workers``, so results agree to rounding.
    """
    if h.n_qubits != state.n_qubits:
        raise ValueError(f"dimension mismatch: operator {h.n_qubits} vs state {state.n_qubits} qubits")
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    t0 = time.perf_counter()
    if len(h) == 0:
        return 0.0, time.perf_counter() - t0
    snap = _Snapshot(state)
    groups, coeffs, zlo, zhi, ny = h._grouped()
    terms = h._terms

    def run(chunk) -> float:
        total = 0.0
        for x_mask, idx in chunk:
            w, lo, hi = snap.group_weights(x_mask)
            if len(w) == 0:
                continue
            for i in idx:
                raw = _signed_sum(w, lo, hi, zlo[i], zhi[i], snap.wide)
                total += coeffs[i] * _expectation_value(raw, int(ny[i]), terms[i][1])
        return total

    chunks = _partition(groups, lambda g: len(g[1]), workers)
    if len(chunks) == 1:
        partials = [run(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            partials = list(pool.map(run, chunks))
    return math.fsum(partials), time.perf_counter() - t0


def prune(h: PauliSumOperator, threshold: float) -> tuple[PauliSumOperator, float]:
    """Drop terms with ``|h_i| < threshold``; returns the operator and the dropped weight."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    kept, removed = [], []
    for c, p in h:
        (kept if abs(c) >= threshold else removed).append((c, p))
    return PauliSumOperator(h.n_qubits, kept), math.fsum(abs(c) for c, _ in removed)


def similarity_transform(h: PauliSumOperator, p: PauliString, beta: float) -> PauliSumOperator:
    """``U^dagger H U`` for the entangler ``U = exp(-i beta P / 2)``.

    Terms commuting with ``P`` are unchanged. An anticommuting term ``Q``
    becomes ``cos(beta) Q - i sin(beta) Q P``.
    """
    if p.n_qubits != h.n_qubits:
        raise ValueError(f"dimension mismatch: {p.n_qubits} vs {h.n_qubits} qubits")
    p = p.without_phase()
    c, s = math.cos(beta), math.sin(beta)
    out: list[tuple[complex, PauliString]] = []
    for coeff, q in h:
        if commutes(q, p):
            out.append((coeff, q))
            continue
        out.append((coeff * c, q))
        # -i * Q P, phase carried by the product and folded on construction
        out.append((-1j * coeff * s, multiply(q, p)))
    return PauliSumOperator(h.n_qubits, out)


def load_hamiltonian(path, n_qubits: int | None = None) -> PauliSumOperator:
    """Read ``<coefficient> <pauli>`` lines; see :func:`parse_terms`."""
    with open(path, encoding="utf-8") as fh:
        header, rows = parse_terms(fh, source=str(path))
    n = n_qubits or header.get("n_qubits") or _infer_qubits(rows)
    return PauliSumOperator(int(n), _build_terms(rows, int(n), str(path)))


def parse_terms(lines, source="<input>"):
    """Split a term file into ``(header, rows)``.

    ``header`` holds ``key: value`` lines (``n_qubits``, ``convention``, ...);
    ``rows`` are ``(line_number, coefficient, pauli_text)``. Comments start
    with ``#``.
    """
    header: dict = {}
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, value = line.partition(":")
        if sep and head.strip().isidentifier():
            key = head.strip().lower()
            value = value.strip()
            header[key] = int(value) if key in ("n_qubits", "step_size") else value
            continue
        coeff_text, _, pauli_text = line.partition(" ")
        try:
            coeff = float(coeff_text)
        except ValueError:
            try:
                coeff = complex(coeff_text)
            except ValueError:
                raise ValueError(f"{source}:{lineno}: bad coefficient {coeff_text!r}") from None
        if not np.isfinite(coeff):
            raise ValueError(f"{source}:{lineno}: non-finite coefficient {coeff_text!r}")
        if not pauli_text.strip():
            raise ValueError(f"{source}:{lineno}: missing Pauli string")
        rows.append((lineno, coeff, pauli_text.strip()))
    return header, rows


def _infer_qubits(rows) -> int:
    top = 0
    for _, _, text in rows:
        for tok in text.split():
            if tok[1:].isdigit():
                top = max(top, int(tok[1:]) + 1)
    return max(top, 1)


def _build_terms(rows, n_qubits: int, source: str):
    out = []
    for lineno, coeff, text in rows:
        try:
            out.append((coeff, parse_pauli(text, n_qubits)))
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    return out


def write_hamiltonian(h: PauliSumOperator, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n_qubits: {h.n_qubits}\n")
        for c, p in h:
            fh.write(f"{c!r} {p.render()}\n")
