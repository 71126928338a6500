"""Pauli strings as X/Z bit-masks.

Factor encoding per qubit j: (x_j, z_j) = (0,0) I, (1,0) X, (1,1) Y, (0,1) Z.
Qubit j lives in bit j of both masks (bit 0 is the least significant bit),
and basis indices use the same convention.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

MAX_QUBITS = 128

# i**k for k mod 4, kept exact.
I_POWERS = (1, 1j, -1, -1j)

_FACTOR_RE = re.compile(r"^([XYZ])(\d+)$")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis times a global factor ``i**phase_exponent``.

    Instances are immutable and hashable; two strings are equal when their
    qubit count, masks and phase all agree.
    """

    n_qubits: int
    x_mask: int
    z_mask: int
    phase_exponent: int = 0

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(f"mask bits above qubit {self.n_qubits - 1} are set")
        object.__setattr__(self, "phase_exponent", self.phase_exponent % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_factors(cls, factors: dict[int, str], n_qubits: int) -> "PauliString":
        """Build from ``{qubit: "X" | "Y" | "Z"}``."""
        x = z = 0
        for q, f in factors.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
            bit = 1 << q
            if f == "X":
                x |= bit
            elif f == "Y":
                x |= bit
                z |= bit
            elif f == "Z":
                z |= bit
            elif f != "I":
                raise ValueError(f"unknown Pauli factor {f!r}")
        return cls(n_qubits, x, z)

    @property
    def y_mask(self) -> int:
        return self.x_mask & self.z_mask

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def factor(self, qubit: int) -> str:
        x = (self.x_mask >> qubit) & 1
        z = (self.z_mask >> qubit) & 1
        return "IZXY"[2 * x + z]

    def factors(self) -> dict[int, str]:
        out = {}
        s = self.support
        while s:
            low = s & -s
            q = low.bit_length() - 1
            out[q] = self.factor(q)
            s ^= low
        return out

    def render(self) -> str:
        """Canonical text form, factors ordered by qubit; the phase is not rendered."""
        if self.is_identity:
            return "I"
        return " ".join(f"{f}{q}" for q, f in self.factors().items())

    def __str__(self) -> str:
        prefix = ("", "i*", "-", "-i*")[self.phase_exponent]
        return prefix + self.render()

    def without_phase(self) -> "PauliString":
        if self.phase_exponent == 0:
            return self
        return PauliString(self.n_qubits, self.x_mask, self.z_mask)

    def apply_to_basis(self, x: int) -> tuple[int, complex]:
        """Return ``(x ^ x_mask, c)`` such that ``P|x> = c|x ^ x_mask>``."""
        k = self.phase_exponent + int.bit_count(self.y_mask) + 2 * int.bit_count(x & self.z_mask)
        return x ^ self.x_mask, I_POWERS[k % 4]

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)


def parse_pauli(text: str, n_qubits: int) -> PauliString:
    """Parse ``"I"`` or whitespace-separated factors such as ``"X0 Y3 Z7"``."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    tokens = text.split()
    if tokens == ["I"]:
        return PauliString.identity(n_qubits)
    if not tokens:
        raise ValueError("empty Pauli string")
    factors: dict[int, str] = {}
    for tok in tokens:
        m = _FACTOR_RE.match(tok)
        if m is None:
            raise ValueError(f"malformed Pauli factor {tok!r}")
        letter, q = m.group(1), int(m.group(2))
        if q in factors:
            raise ValueError(f"duplicate qubit index {q} in {text!r}")
        if q >= n_qubits:
            raise ValueError(f"qubit index {q} >= n_qubits {n_qubits}")
        factors[q] = letter
    return PauliString.from_factors(factors, n_qubits)


def apply_to_basis(p: PauliString, x: int) -> tuple[int, complex]:
    return p.apply_to_basis(x)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact matrix product ``a @ b``.

    Writing each factor as ``i**(x&z) X^x Z^z`` the product picks up
    ``(-1)**popcount(a.z & b.x)`` from moving ``Z^a`` past ``X^b``; the Y
    bookkeeping then converts ``X^x Z^z`` back to the Y-normalized form.
    """
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit-count mismatch: {a.n_qubits} vs {b.n_qubits}")
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    k = (
        a.phase_exponent
        + b.phase_exponent
        + int.bit_count(a.y_mask)
        + int.bit_count(b.y_mask)
        + 2 * int.bit_count(a.z_mask & b.x_mask)
        - int.bit_count(x & z)
    )
    return PauliString(a.n_qubits, x, z, k % 4)


def commutes(a: PauliString, b: PauliString) -> bool:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit-count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return (int.bit_count(a.x_mask & b.z_mask) + int.bit_count(a.z_mask & b.x_mask)) % 2 == 0


def weight_profile(p: PauliString) -> tuple[int, int, int, int]:
    """``(weight, n_x, n_y, n_z)`` counted over non-identity factors."""
    n_y = int.bit_count(p.y_mask)
    n_x = int.bit_count(p.x_mask) - n_y
    n_z = int.bit_count(p.z_mask) - n_y
    return n_x + n_y + n_z, n_x, n_y, n_z
