"""Sparse wavefunction stored as a dict from basis index to amplitude."""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyStateError
from .pauli import I_POWERS, PauliString

_MASK64 = (1 << 64) - 1

DUMP_MAGIC = b"SPVQ"
DUMP_VERSION = 1
_HEADER = struct.Struct("<4sHHQ")
_RECORD = np.dtype([("lo", "<u8"), ("hi", "<u8"), ("re", "<f8"), ("im", "<f8")])

# hash map memory model: 16-byte key + 16-byte amplitude + 1 byte control
ENTRY_BYTES = 33
MAX_LOAD_FACTOR = 0.9375
INITIAL_CAPACITY = 10

# |amplitude|**2 at or below this is rounding residue (|a| <= 1e-15) and is
# dropped even with cutoff 0, e.g. the cos(pi/2) term
ZERO_FLOOR = 1e-30


@dataclass(frozen=True)
class ExponentialGate:
    """``exp(i * theta * pauli)``."""

    pauli: PauliString
    theta: float

    def __post_init__(self):
        if self.pauli.phase_exponent != 0:
            raise ValueError("exponential gates take a bare Pauli (phase_exponent 0)")

    @classmethod
    def from_beta(cls, pauli: PauliString, beta: float) -> "ExponentialGate":
        """QCC entangler ``exp(-i * beta * P / 2)``."""
        return cls(pauli, -beta / 2.0)


class SparseState:
    """Nonzero amplitudes keyed by basis index (qubit j is bit j).

    ``cutoff`` is a threshold on ``|amplitude|**2``; after every gate entries
    below it are dropped and the state is rescaled to unit norm.
    """

    def __init__(self, n_qubits: int, entries: dict[int, complex] | None = None, cutoff: float = 0.0):
        if not 1 <= n_qubits <= 128:
            raise ValueError(f"n_qubits must be in [1, 128], got {n_qubits}")
        if not 0.0 <= cutoff < 1.0:
            raise ValueError(f"cutoff must be in [0, 1), got {cutoff}")
        self.n_qubits = n_qubits
        self.cutoff = float(cutoff)
        self.entries: dict[int, complex] = {}
        limit = 1 << n_qubits
        for k, v in (entries or {}).items():
            if not 0 <= k < limit:
                raise ValueError(f"basis index {k} out of range for {n_qubits} qubits")
            if v != 0:
                self.entries[k] = complex(v)

    @classmethod
    def from_reference(cls, n_qubits: int, occupied: int, cutoff: float = 0.0) -> "SparseState":
        if not 0 <= occupied < (1 << n_qubits):
            raise ValueError(f"reference {occupied} does not fit in {n_qubits} qubits")
        return cls(n_qubits, {occupied: 1.0 + 0j}, cutoff)

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"SparseState(n_qubits={self.n_qubits}, elements={len(self)}, cutoff={self.cutoff:g})"

    def copy(self) -> "SparseState":
        out = SparseState.__new__(SparseState)
        out.n_qubits = self.n_qubits
        out.cutoff = self.cutoff
        out.entries = dict(self.entries)
        return out

    def get_amplitude(self, x: int) -> complex:
        return self.entries.get(x, 0j)

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.entries.values())

    def inner_product(self, other: "SparseState") -> complex:
        """``<self|other>``."""
        if self.n_qubits != other.n_qubits:
            raise ValueError(f"dimension mismatch: {self.n_qubits} vs {other.n_qubits} qubits")
        a, b = self.entries, other.entries
        if len(a) <= len(b):
            return sum((v.conjugate() * b[k] for k, v in a.items() if k in b), 0j)
        return sum((a[k].conjugate() * v for k, v in b.items() if k in a), 0j)

    def apply_exponential(self, gate: ExponentialGate, ordinal: int | None = None) -> int:
        """Apply ``cos(theta) + i sin(theta) P`` in place; returns the new element count."""
        p = gate.pauli
        if p.n_qubits != self.n_qubits:
            raise ValueError(f"gate acts on {p.n_qubits} qubits, state has {self.n_qubits}")
        c = math.cos(gate.theta)
        s = math.sin(gate.theta)
        old = self.entries
        zmask = p.z_mask
        # i * sin(theta) * i**n_y; the remaining Z-sign depends on the index
        isp = 1j * s * I_POWERS[p.y_mask.bit_count() % 4]

        if p.x_mask == 0:
            new = {}
            for x, a in old.items():
                new[x] = a * (c + (-isp if (x & zmask).bit_count() & 1 else isp))
        else:
            mask = p.x_mask
            new = {}
            get = old.get
            for x, a in old.items():
                y = x ^ mask
                b = get(y)
                if b is None:
                    new[x] = c * a
                    new[y] = (-isp if (x & zmask).bit_count() & 1 else isp) * a
                elif x < y:
                    px = -isp if (x & zmask).bit_count() & 1 else isp
                    py = -isp if (y & zmask).bit_count() & 1 else isp
                    new[x] = c * a + py * b
                    new[y] = c * b + px * a

        cutoff = self.cutoff
        floor = ZERO_FLOOR
        kept = {}
        for k, v in new.items():
            mag = v.real * v.real + v.imag * v.imag
            if mag > floor and mag >= cutoff:
                kept[k] = v
        if not kept:
            raise EmptyStateError(ordinal, cutoff)
        norm = math.sqrt(math.fsum(v.real * v.real + v.imag * v.imag for v in kept.values()))
        if norm != 1.0:
            scale = 1.0 / norm
            for k in kept:
                kept[k] *= scale
        self.entries = kept
        return len(kept)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Snapshot as ``(lo, hi, amplitudes)``: 64-bit index halves plus complex128."""
        n = len(self.entries)
        keys = self.entries.keys()
        lo = np.fromiter((k & _MASK64 for k in keys), dtype=np.uint64, count=n)
        if self.n_qubits > 64:
            hi = np.fromiter((k >> 64 for k in keys), dtype=np.uint64, count=n)
        else:
            hi = np.zeros(n, dtype=np.uint64)
        amps = np.fromiter(self.entries.values(), dtype=np.complex128, count=n)
        return lo, hi, amps

    def dump(self, path) -> None:
        """Binary checkpoint: header then (16-byte LE index, re, im) records."""
        lo, hi, amps = self.to_arrays()
        rec = np.empty(len(lo), dtype=_RECORD)
        rec["lo"], rec["hi"], rec["re"], rec["im"] = lo, hi, amps.real, amps.imag
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, self.n_qubits, len(lo)))
            fh.write(rec.tobytes())

    @classmethod
    def load(cls, path, cutoff: float = 0.0) -> "SparseState":
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) != _HEADER.size:
                raise ValueError(f"{path}: truncated header")
            magic, version, n_qubits, count = _HEADER.unpack(head)
            if magic != DUMP_MAGIC:
                raise ValueError(f"{path}: not a state dump (magic {magic!r})")
            if version != DUMP_VERSION:
                raise ValueError(f"{path}: unsupported dump version {version}")
            rec = np.frombuffer(fh.read(), dtype=_RECORD)
        if len(rec) != count:
            raise ValueError(f"{path}: header promises {count} entries, found {len(rec)}")
        entries = {
            (int(h) << 64) | int(lo): complex(re, im)
            for lo, h, re, im in zip(rec["lo"], rec["hi"], rec["re"], rec["im"])
        }
        return cls(n_qubits, entries, cutoff)


def from_reference(n_qubits: int, occupied: int, cutoff: float = 0.0) -> SparseState:
    return SparseState.from_reference(n_qubits, occupied, cutoff)


def apply_exponential(state: SparseState, gate: ExponentialGate, ordinal: int | None = None):
    """Functional form: returns ``(state, elements_after)``; ``state`` is updated in place."""
    n = state.apply_exponential(gate, ordinal)
    return state, n


def apply_circuit(state: SparseState, gates: Sequence[ExponentialGate] | Iterable[ExponentialGate]):
    """Apply gates first-to-last. Returns ``(state, element_counts, seconds)``.

    Gate ordinals in errors are 1-based.
    """
    counts = []
    t0 = time.perf_counter()
    for k, gate in enumerate(gates, start=1):
        counts.append(state.apply_exponential(gate, ordinal=k))
    return state, counts, time.perf_counter() - t0


def inner_product(a: SparseState, b: SparseState) -> complex:
    return a.inner_product(b)


def get_amplitude(state: SparseState, x: int) -> complex:
    return state.get_amplitude(x)


def hashmap_capacity(n_elements: int) -> int:
    """Slot count of a doubling hash map that starts at 10 slots with max load 0.9375."""
    cap = INITIAL_CAPACITY
    while n_elements > cap * MAX_LOAD_FACTOR:
        cap *= 2
    return cap


def hashmap_memory_estimate(n_elements: int) -> int:
    """Bytes needed to hold ``n_elements`` amplitudes under the hash map model."""
    return hashmap_capacity(n_elements) * ENTRY_BYTES
