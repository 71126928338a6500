"""Evaluation driver for iQCC ansatz bundles: cutoff sweeps, traces, cross-checks."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import __version__
from .errors import NumericalError, TermCountGuardError
from .hamiltonian import PauliSumOperator, _build_terms, energy, parse_terms, prune, similarity_transform
from .pauli import PauliString
from .state import ExponentialGate, SparseState, apply_circuit

log = logging.getLogger(__name__)

DEFAULT_STEP_SIZE = 20
DEFAULT_TERM_GUARD = 5_000_000

CSV_COLUMNS = ("steps", "cutoff", "energy_ha", "delta_mha", "sim_time_s", "meas_time_s", "n_elements")


@dataclass
class AnsatzBundle:
    """Reference state plus entanglers ``exp(-i beta P / 2)`` applied first to last."""

    n_qubits: int
    reference: int
    entanglers: list[tuple[PauliString, float]]
    step_size: int = DEFAULT_STEP_SIZE

    def __post_init__(self):
        if not 0 <= self.reference < (1 << self.n_qubits):
            raise ValueError(f"reference does not fit in {self.n_qubits} qubits")
        for p, beta in self.entanglers:
            if p.n_qubits != self.n_qubits:
                raise ValueError(f"entangler {p} acts on {p.n_qubits} qubits, bundle has {self.n_qubits}")
            if not math.isfinite(beta):
                raise ValueError(f"non-finite beta for entangler {p}")
        if self.step_size < 1:
            raise ValueError("step_size must be >= 1")

    def gates(self, prefix: int | None = None) -> list[ExponentialGate]:
        ents = self.entanglers if prefix is None else self.entanglers[:prefix]
        return [ExponentialGate.from_beta(p, beta) for p, beta in ents]

    @property
    def n_steps(self) -> int:
        return math.ceil(len(self.entanglers) / self.step_size)


def parse_reference(spec: str, n_qubits: int) -> int:
    """Reference index from ``"0,1,2,3"`` (occupied qubits) or a bitstring such as ``"0011"``.

    Bitstrings read like kets: the rightmost character is qubit 0. A bare
    token made only of 0/1 is a bitstring; use a trailing comma (``"1,"``)
    for a single occupied index.
    """
    spec = spec.strip()
    if not spec:
        return 0
    if "," in spec:
        idx = [int(t) for t in spec.split(",") if t.strip()]
        value = 0
        for q in idx:
            if not 0 <= q < n_qubits:
                raise ValueError(f"occupied qubit {q} out of range for {n_qubits} qubits")
            value |= 1 << q
        return value
    if set(spec) <= {"0", "1"}:
        if len(spec) > n_qubits:
            raise ValueError(f"bitstring longer than {n_qubits} qubits")
        return int(spec, 2)
    raise ValueError(f"cannot parse reference {spec!r}")


def lowest_orbitals(n_electrons: int) -> int:
    """Hartree-Fock style reference with the lowest ``n_electrons`` qubits set."""
    return (1 << n_electrons) - 1


def load_ansatz(path, n_qubits: int | None = None, reference: str | None = None) -> AnsatzBundle:
    """Read an ansatz file.

    Same line grammar as Hamiltonian files with the angle in the coefficient
    position. A ``convention: theta`` or ``convention: beta`` header is
    required; ``n_qubits``, ``reference`` and ``step_size`` headers are optional.
    """
    with open(path, encoding="utf-8") as fh:
        header, rows = parse_terms(fh, source=str(path))
    convention = header.get("convention")
    if convention not in ("theta", "beta"):
        raise ValueError(f"{path}: missing or invalid 'convention: theta|beta' header")
    n = n_qubits or header.get("n_qubits")
    if n is None:
        raise ValueError(f"{path}: n_qubits not given in header or arguments")
    ref_spec = reference if reference is not None else header.get("reference", "")
    terms = _build_terms(rows, int(n), str(path))
    ents = []
    for (lineno, _, _), (angle, p) in zip(rows, terms):
        if isinstance(angle, complex):
            raise ValueError(f"{path}:{lineno}: angles must be real")
        ents.append((p, angle if convention == "beta" else -2.0 * angle))
    return AnsatzBundle(int(n), parse_reference(ref_spec, int(n)), ents, header.get("step_size", DEFAULT_STEP_SIZE))


def write_ansatz(bundle: AnsatzBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("convention: beta\n")
        fh.write(f"n_qubits: {bundle.n_qubits}\n")
        occ = [q for q in range(bundle.n_qubits) if (bundle.reference >> q) & 1]
        fh.write(f"reference: {','.join(map(str, occ))},\n")
        fh.write(f"step_size: {bundle.step_size}\n")
        for p, beta in bundle.entanglers:
            fh.write(f"{beta!r} {p.render()}\n")


@dataclass
class SweepRow:
    cutoff: float
    energy_ha: float
    n_elements: int
    sim_time_s: float
    meas_time_s: float
    steps: int
    delta_mha: float = 0.0
    error: str | None = None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.steps, f"{r.cutoff:g}", repr(r.energy_ha), f"{r.delta_mha:.6g}",
                        f"{r.sim_time_s:.3g}", f"{r.meas_time_s:.3g}", r.n_elements])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, "rows": [asdict(r) for r in self.rows]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SweepResult":
        data = json.loads(text)
        return cls([SweepRow(**r) for r in data["rows"]], data.get("metadata", {}))


def run_single(h: PauliSumOperator, bundle: AnsatzBundle, cutoff: float, workers: int | None = None) -> SweepRow:
    """Simulate every entangler at ``cutoff`` and measure ``h`` on the result."""
    if h.n_qubits != bundle.n_qubits:
        raise ValueError(f"Hamiltonian has {h.n_qubits} qubits, ansatz {bundle.n_qubits}")
    state = SparseState.from_reference(bundle.n_qubits, bundle.reference, cutoff)
    _, _, sim_time = apply_circuit(state, bundle.gates())
    e, meas_time = energy(state, h, workers)
    return SweepRow(cutoff, e, len(state), sim_time, meas_time, bundle.n_steps)


def finalize_deltas(rows: Sequence[SweepRow]) -> None:
    good = [r.energy_ha for r in rows if r.error is None]
    if not good:
        return
    best = min(good)
    for r in rows:
        r.delta_mha = (r.energy_ha - best) * 1e3 if r.error is None else math.nan


def run_sweep(h, bundle: AnsatzBundle, cutoffs: Sequence[float], workers: int | None = None) -> SweepResult:
    """One row per cutoff, largest cutoff first; failures are recorded per row."""
    if not cutoffs:
        raise ValueError("need at least one cutoff")
    rows = []
    for c in sorted(cutoffs, reverse=True):
        try:
            rows.append(run_single(h, bundle, c, workers))
        except NumericalError as exc:
            log.warning("cutoff %g failed: %s", c, exc)
            rows.append(SweepRow(c, math.nan, 0, 0.0, 0.0, bundle.n_steps, math.nan, str(exc)))
    finalize_deltas(rows)
    meta = {"workers": workers, "version": __version__, "n_qubits": bundle.n_qubits,
            "n_entanglers": len(bundle.entanglers), "n_terms": len(h)}
    return SweepResult(rows, meta)


@dataclass
class TraceRow:
    step: int
    energy_ha: float
    n_elements: int
    meas_time_s: float


def per_step_trace(h, bundle: AnsatzBundle, cutoff: float, workers: int | None = None) -> list[TraceRow]:
    """Energy after 0, 1, ..., n_steps blocks of ``step_size`` entanglers."""
    state = SparseState.from_reference(bundle.n_qubits, bundle.reference, cutoff)
    gates = bundle.gates()
    e, t = energy(state, h, workers)
    out = [TraceRow(0, e, len(state), t)]
    for step in range(1, bundle.n_steps + 1):
        block = gates[(step - 1) * bundle.step_size: step * bundle.step_size]
        for k, g in enumerate(block, start=(step - 1) * bundle.step_size + 1):
            state.apply_exponential(g, ordinal=k)
        e, t = energy(state, h, workers)
        out.append(TraceRow(step, e, len(state), t))
    return out


def reference_energy(h: PauliSumOperator, occupied: int) -> float:
    """``<occupied|H|occupied>``: only diagonal terms contribute."""
    return math.fsum(
        c * (-1.0 if (occupied & p.z_mask).bit_count() & 1 else 1.0) for c, p in h if p.x_mask == 0
    )


@dataclass
class CrossCheck:
    e_transform: float
    e_simulation: float
    difference: float
    n_terms: int
    removed_weight: float


def transform_crosscheck(h, bundle: AnsatzBundle, prefix_len: int, prune_threshold: float = 0.0,
                         max_terms: int = DEFAULT_TERM_GUARD) -> CrossCheck:
    """Compare a dressed-Hamiltonian energy with the simulated energy of the same prefix.

    The state is ``U_k ... U_1 |ref>``, so ``U_k`` is the innermost
    conjugation and is applied to ``h`` first.
    """
    if prefix_len < 0 or prefix_len > len(bundle.entanglers):
        raise ValueError(f"prefix_len must be in [0, {len(bundle.entanglers)}]")
    dressed = h
    removed = 0.0
    for p, beta in reversed(bundle.entanglers[:prefix_len]):
        dressed = similarity_transform(dressed, p, beta)
        if prune_threshold > 0:
            dressed, w = prune(dressed, prune_threshold)
            removed += w
        if len(dressed) > max_terms:
            raise TermCountGuardError(f"dressed Hamiltonian has {len(dressed)} terms (guard {max_terms})")
    e_t = reference_energy(dressed, bundle.reference)
    state = SparseState.from_reference(bundle.n_qubits, bundle.reference, 0.0)
    apply_circuit(state, bundle.gates(prefix_len))
    e_s, _ = energy(state, h, 1)
    return CrossCheck(e_t, e_s, abs(e_t - e_s), len(dressed), removed)


def measurement_timings(h, bundle: AnsatzBundle, cutoffs: Sequence[float], workers: int | None = None):
    """``(n_elements, meas_time_s)`` pairs for a linear-scaling check."""
    out = []
    for c in cutoffs:
        state = SparseState.from_reference(bundle.n_qubits, bundle.reference, c)
        apply_circuit(state, bundle.gates())
        t0 = time.perf_counter()
        energy(state, h, workers)
        out.append((len(state), time.perf_counter() - t0))
    return out
