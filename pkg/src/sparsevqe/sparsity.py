"""GF(2) analysis of the XY-masks of a Pauli-exponential circuit.

A circuit of exponentials ``exp(i theta_k P_k)`` started from one basis state
can only populate indices ``x ^ (sum_k p_k mask_k)``, so the number of
nonzero amplitudes is bounded by ``2**rank`` of the mask matrix. Bit-vectors
are plain Python ints throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import EnumerationBudgetError
from .state import ExponentialGate

DEFAULT_BUDGET = 1 << 24


@dataclass(frozen=True)
class XYMatrix:
    n_qubits: int
    columns: tuple[int, ...]

    @property
    def n_columns(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class GF2Solution:
    """All ``p`` with ``sum_i p_i col_i = target``: ``particular ^ span(nullspace_basis)``.

    Bit ``i`` of each vector selects column ``i``.
    """

    particular: int
    nullspace_basis: tuple[int, ...] = field(default=())

    @property
    def nullity(self) -> int:
        return len(self.nullspace_basis)

    def solutions(self):
        basis = self.nullspace_basis
        for k in range(1 << len(basis)):
            p = self.particular
            j = 0
            while k:
                if k & 1:
                    p ^= basis[j]
                k >>= 1
                j += 1
            yield p


def xy_matrix(gates: Sequence[ExponentialGate]) -> XYMatrix:
    if not gates:
        raise ValueError("need at least one gate")
    n = gates[0].pauli.n_qubits
    for g in gates:
        if g.pauli.n_qubits != n:
            raise ValueError("gates act on different qubit counts")
    return XYMatrix(n, tuple(g.pauli.x_mask for g in gates))


class _Eliminator:
    """Incremental XOR basis keyed by leading bit, tracking column combinations."""

    def __init__(self):
        self.rows: dict[int, tuple[int, int]] = {}  # pivot bit -> (vector, combination)

    def reduce(self, v: int, combo: int) -> tuple[int, int]:
        while v:
            top = v.bit_length() - 1
            row = self.rows.get(top)
            if row is None:
                break
            v ^= row[0]
            combo ^= row[1]
        return v, combo

    def add(self, v: int, combo: int) -> int | None:
        """Insert; returns the dependency combination if ``v`` was already spanned."""
        v, combo = self.reduce(v, combo)
        if v == 0:
            return combo
        self.rows[v.bit_length() - 1] = (v, combo)
        return None


def gf2_rank(m: XYMatrix | Sequence[int]) -> int:
    cols = m.columns if isinstance(m, XYMatrix) else m
    basis: dict[int, int] = {}
    for v in cols:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def mask_in_span(m: XYMatrix, candidate: int) -> bool:
    """True if adding ``candidate`` as a column would leave the rank unchanged."""
    elim = _Eliminator()
    for v in m.columns:
        elim.add(v, 0)
    return elim.reduce(candidate, 0)[0] == 0


def upper_bound_nonzeros(gates: Sequence[ExponentialGate] | XYMatrix) -> int | None:
    """``2**rank``, or ``None`` once the rank exceeds 127 (bound saturated)."""
    m = gates if isinstance(gates, XYMatrix) else xy_matrix(gates)
    r = gf2_rank(m)
    return None if r > 127 else 1 << r


def solve_gf2(m: XYMatrix, target: int) -> GF2Solution | None:
    """Solve ``sum_i p_i columns[i] = target`` over GF(2); ``None`` if infeasible."""
    elim = _Eliminator()
    null = []
    for i, v in enumerate(m.columns):
        dep = elim.add(v, 1 << i)
        if dep is not None:
            null.append(dep)
    rest, combo = elim.reduce(target, 0)
    if rest:
        return None
    return GF2Solution(combo, tuple(null))


def single_amplitude(gates: Sequence[ExponentialGate], x: int, y: int, budget: int = DEFAULT_BUDGET) -> complex:
    """``<y| U_m ... U_1 |x>`` by summing only over the selections allowed by the masks.

    Each selection ``p`` contributes ``prod_k (cos theta_k if p_k == 0 else
    i sin theta_k * phase_k)`` where the Pauli phases come from applying the
    selected ``P_k`` to ``|x>`` in circuit order.
    """
    m = xy_matrix(gates)
    sol = solve_gf2(m, x ^ y)
    if sol is None:
        return 0j
    if (1 << sol.nullity) > budget:
        raise EnumerationBudgetError(
            f"2**{sol.nullity} selections exceed the enumeration budget {budget}"
        )
    cos = [math.cos(g.theta) for g in gates]
    isin = [1j * math.sin(g.theta) for g in gates]
    paulis = [g.pauli for g in gates]
    total = 0j
    for p in sol.solutions():
        idx = x
        amp = 1 + 0j
        for k, pk in enumerate(paulis):
            if (p >> k) & 1:
                idx, c = pk.apply_to_basis(idx)
                amp *= isin[k] * c
            else:
                amp *= cos[k]
            if amp == 0:
                break
        else:
            assert idx == y
            total += amp
    return total


def rank_profile(gates: Sequence[ExponentialGate], step_size: int):
    """Rank after each block of ``step_size`` gates: rows ``(step, entanglers, rank, log2_bound)``."""
    if step_size < 1:
        raise ValueError("step_size must be >= 1")
    basis: dict[int, int] = {}
    rows = []
    for k, g in enumerate(gates, start=1):
        v = g.pauli.x_mask
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
        if k % step_size == 0 or k == len(gates):
            rows.append((math.ceil(k / step_size), k, len(basis), len(basis)))
    return rows
