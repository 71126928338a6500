"""Gate counts for running the ansatz on hardware with CNOT + single-qubit gates.

Each ``exp(i theta P)`` is compiled as: basis change (H for X, Rx(pi/2) for
Y), a CNOT ladder accumulating parity onto the highest support qubit,
``Rz(-2 theta)`` there, then the ladder and basis change undone.
Gates are ``(name, qubits, angle)`` tuples with names CNOT, H, X, RX, RZ.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields
from typing import Sequence

from .pauli import PauliString, weight_profile
from .state import ExponentialGate

_TWO_PI_TWICE = 4 * math.pi
_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class GateCounts:
    cnot: int = 0
    x: int = 0
    h: int = 0
    rx: int = 0
    rz: int = 0
    n_qubits: int = 0

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(
            self.cnot + other.cnot,
            self.x + other.x,
            self.h + other.h,
            self.rx + other.rx,
            self.rz + other.rz,
            max(self.n_qubits, other.n_qubits),
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_gates(cls, gates, n_qubits: int = 0) -> "GateCounts":
        tally = {"CNOT": 0, "X": 0, "H": 0, "RX": 0, "RZ": 0}
        for name, _, _ in gates:
            tally[name] += 1
        return cls(tally["CNOT"], tally["X"], tally["H"], tally["RX"], tally["RZ"], n_qubits)


def entangler_resources(p: PauliString) -> GateCounts:
    w, n_x, n_y, _ = weight_profile(p)
    if w == 0:
        warnings.warn("identity entangler is a global phase; counted as zero gates", stacklevel=2)
        return GateCounts(n_qubits=p.n_qubits)
    return GateCounts(cnot=2 * (w - 1), h=2 * n_x, rx=2 * n_y, rz=1, n_qubits=p.n_qubits)


def reference_resources(occupied: int, n_qubits: int = 0) -> GateCounts:
    return GateCounts(x=occupied.bit_count(), n_qubits=n_qubits)


def entangler_gates(p: PauliString, theta: float) -> list[tuple]:
    """Gate sequence implementing ``exp(i theta P)`` exactly (no global phase)."""
    support = sorted(p.factors().items())
    if not support:
        return []
    pre, post = [], []
    for q, f in support:
        if f == "X":
            pre.append(("H", (q,), None))
            post.append(("H", (q,), None))
        elif f == "Y":
            pre.append(("RX", (q,), math.pi / 2))
            post.append(("RX", (q,), -math.pi / 2))
    qs = [q for q, _ in support]
    ladder = [("CNOT", (a, b), None) for a, b in zip(qs, qs[1:])]
    rot = [("RZ", (qs[-1],), -2.0 * theta)]
    return pre + ladder + rot + ladder[::-1] + post


def reference_gates(occupied: int) -> list[tuple]:
    out = []
    q = 0
    while occupied >> q:
        if (occupied >> q) & 1:
            out.append(("X", (q,), None))
        q += 1
    return out


def circuit_gates(gates: Sequence[ExponentialGate], occupied: int = 0) -> list[tuple]:
    out = reference_gates(occupied)
    for g in gates:
        out.extend(entangler_gates(g.pauli, g.theta))
    return out


def _is_zero_angle(angle: float) -> bool:
    r = math.remainder(angle, _TWO_PI_TWICE)
    return abs(r) < _ANGLE_TOL


def peephole(gates: Sequence[tuple]) -> list[tuple]:
    """Cancel adjacent inverse pairs and merge adjacent same-axis rotations.

    Adjacency is per qubit: two gates are neighbours when no gate touching
    their qubits sits between them. Rotations by multiples of 4 pi vanish.
    """
    out: list[tuple | None] = []
    last: dict[int, list[int]] = {}

    def remove(j):
        for q in out[j][1]:
            last[q].pop()
        out[j] = None

    for gate in gates:
        pending = gate
        while pending is not None:
            name, qs, angle = pending
            if name in ("RX", "RZ") and _is_zero_angle(angle):
                pending = None
                break
            prev = {last[q][-1] if last.get(q) else None for q in qs}
            j = prev.pop() if len(prev) == 1 else None
            if j is not None:
                pname, pqs, pangle = out[j]
                if pname == name and pqs == qs:
                    if name in ("CNOT", "H", "X"):
                        remove(j)
                        pending = None
                        break
                    remove(j)
                    pending = (name, qs, pangle + angle)
                    continue
            out.append(pending)
            for q in qs:
                last.setdefault(q, []).append(len(out) - 1)
            pending = None
    return [g for g in out if g is not None]


def circuit_resources(gates: Sequence[ExponentialGate], occupied: int = 0, optimize: bool = False) -> GateCounts:
    n = gates[0].pauli.n_qubits if gates else max(occupied.bit_length(), 0)
    if not optimize:
        total = reference_resources(occupied, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for g in gates:
                total = total + entangler_resources(g.pauli)
        return total
    return GateCounts.from_gates(peephole(circuit_gates(gates, occupied)), n)
