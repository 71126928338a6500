"""Command-line entry point: ``sparsevqe <subcommand> ...``.

Exit status: 0 success, 1 bad input, 2 numerical failure (empty state,
enumeration budget, term-count guard, failed ``--verify``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .errors import NumericalError
from .hamiltonian import default_workers, load_hamiltonian
from .iqcc import (
    SweepResult,
    finalize_deltas,
    load_ansatz,
    per_step_trace,
    run_single,
    run_sweep,
    transform_crosscheck,
)
from .resources import circuit_resources
from .sparsity import DEFAULT_BUDGET, rank_profile, single_amplitude
from .state import SparseState, apply_circuit, hashmap_memory_estimate

log = logging.getLogger("sparsevqe")

DEFAULT_CUTOFF = 1e-11
VERIFY_TOL = 1e-10


class VerificationError(NumericalError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    hamiltonian_path: str | None = None
    ansatz_path: str | None = None
    reference_spec: str | None = None
    cutoffs: list[float] = field(default_factory=lambda: [DEFAULT_CUTOFF])
    workers: int = 1
    output_path: str | None = None
    output_format: str = "csv"
    verify: bool = False
    enumeration_budget: int = DEFAULT_BUDGET
    prune_threshold: float = 0.0
    n_qubits: int | None = None

    def validate(self):
        for p in (self.hamiltonian_path, self.ansatz_path):
            if p is not None and not os.path.exists(p):
                raise ValueError(f"no such file: {p}")
        for c in self.cutoffs:
            if not 0.0 <= c < 1.0:
                raise ValueError(f"cutoff {c} outside [0, 1)")
        if self.workers < 1:
            raise ValueError("--workers must be >= 1")
        if self.prune_threshold < 0:
            raise ValueError("--prune-threshold must be >= 0")


def _cutoff_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cutoff list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsevqe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, hamiltonian=True, ansatz=True):
        if hamiltonian:
            p.add_argument("--hamiltonian", "-H", required=True, dest="hamiltonian_path")
        if ansatz:
            p.add_argument("--ansatz", "-A", required=True, dest="ansatz_path")
            p.add_argument("--reference", dest="reference_spec",
                           help="occupied qubits '0,1,2' or ket bitstring; overrides the ansatz header")
        p.add_argument("--n-qubits", type=int)
        p.add_argument("--output", "-o", dest="output_path")
        p.add_argument("--format", choices=("csv", "json"), default="csv", dest="output_format")

    def workers(p):
        p.add_argument("--workers", "-j", type=int, default=None,
                       help="measurement threads (default: $SPARSEVQE_WORKERS or CPU count)")

    p = sub.add_parser("simulate", help="simulate one cutoff and measure the energy")
    common(p)
    workers(p)
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    p.add_argument("--verify", action="store_true", help="cross-check against the dense simulator")
    p.add_argument("--dump-state", help="write the final sparse state to this binary file")

    p = sub.add_parser("sweep", help="simulate a list of cutoffs")
    common(p)
    workers(p)
    p.add_argument("--cutoffs", type=_cutoff_list, required=True, help="e.g. '1e-5,5e-8,1e-11'")

    p = sub.add_parser("trace", help="energy after each iQCC step")
    common(p)
    workers(p)
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)

    p = sub.add_parser("rank", help="GF(2) rank and nonzero bound per iQCC step")
    common(p, hamiltonian=False)

    p = sub.add_parser("resources", help="gate counts for the compiled circuit")
    common(p, hamiltonian=False)
    p.add_argument("--hamiltonian", "-H", dest="hamiltonian_path", help="only used for the term count")
    p.add_argument("--label", default="molecule")
    p.add_argument("--optimize", action="store_true", help="apply peephole cancellation")

    p = sub.add_parser("transform", help="dressed-Hamiltonian vs simulated energy for an ansatz prefix")
    common(p)
    p.add_argument("--prefix", type=int, required=True)
    p.add_argument("--prune-threshold", type=float, default=0.0)
    p.add_argument("--max-terms", type=int, default=5_000_000)

    p = sub.add_parser("amplitude", help="one amplitude <y|U|reference> by GF(2) enumeration")
    common(p, hamiltonian=False)
    p.add_argument("--target", required=True, help="basis state, same syntax as --reference")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, dest="enumeration_budget")
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    for name in ("hamiltonian_path", "ansatz_path", "reference_spec", "output_path",
                 "output_format", "n_qubits", "prune_threshold", "enumeration_budget"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "cutoffs", None) is not None:
        cfg.cutoffs = args.cutoffs
    elif getattr(args, "cutoff", None) is not None:
        cfg.cutoffs = [args.cutoff]
    w = getattr(args, "workers", None)
    cfg.workers = default_workers() if w is None else w
    cfg.verify = getattr(args, "verify", False)
    cfg.validate()
    return cfg


def _emit(text: str, cfg: RunConfig):
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _rows_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _peak_rss_bytes():
    try:
        import resource

        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except (ImportError, OSError):
        return None


def _load(cfg: RunConfig, need_h=True):
    bundle = load_ansatz(cfg.ansatz_path, cfg.n_qubits, cfg.reference_spec)
    h = load_hamiltonian(cfg.hamiltonian_path, bundle.n_qubits) if need_h else None
    return h, bundle


def cmd_simulate(cfg: RunConfig, args) -> SweepResult:
    h, bundle = _load(cfg)
    cutoff = cfg.cutoffs[0]
    row = run_single(h, bundle, cutoff, cfg.workers)
    finalize_deltas([row])
    meta = {
        "cutoff": cutoff,
        "workers": cfg.workers,
        "version": __version__,
        "n_qubits": bundle.n_qubits,
        "n_entanglers": len(bundle.entanglers),
        "n_terms": len(h),
        "hashmap_bytes_model": hashmap_memory_estimate(row.n_elements),
        "hamiltonian_bytes_model": h.memory_estimate(),
        "peak_rss_bytes": _peak_rss_bytes(),
    }
    if cfg.verify or args.dump_state:
        state = SparseState.from_reference(bundle.n_qubits, bundle.reference, cutoff)
        apply_circuit(state, bundle.gates())
        if args.dump_state:
            state.dump(args.dump_state)
        if cfg.verify:
            from .dense_oracle import MAX_DENSE_QUBITS, dense_circuit, dense_energy

            if bundle.n_qubits > MAX_DENSE_QUBITS:
                raise ValueError(f"--verify supports at most {MAX_DENSE_QUBITS} qubits")
            e_dense = dense_energy(dense_circuit(bundle.n_qubits, bundle.reference, bundle.gates()), h)
            meta["dense_energy_ha"] = e_dense
            diff = abs(e_dense - row.energy_ha)
            meta["verify_difference"] = diff
            # only meaningful without truncation
            if cutoff == 0.0 and diff > VERIFY_TOL:
                raise VerificationError(f"sparse/dense energies differ by {diff:.3e}")
    return SweepResult([row], meta)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        text = _dispatch(cfg, args)
    except NumericalError as exc:
        print(f"sparsevqe {args.subcommand}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"sparsevqe {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    _emit(text, cfg)
    return 0


def _dispatch(cfg: RunConfig, args) -> str:
    sc = cfg.subcommand
    if sc in ("simulate", "sweep"):
        if sc == "simulate":
            result = cmd_simulate(cfg, args)
        else:
            h, bundle = _load(cfg)
            result = run_sweep(h, bundle, cfg.cutoffs, cfg.workers)
        return result.to_json() if cfg.output_format == "json" else result.to_csv()

    if sc == "trace":
        h, bundle = _load(cfg)
        rows = per_step_trace(h, bundle, cfg.cutoffs[0], cfg.workers)
        if cfg.output_format == "json":
            return json.dumps({"cutoff": cfg.cutoffs[0], "rows": [asdict(r) for r in rows]}, indent=2)
        return _rows_csv(("step", "energy_ha", "n_elements", "meas_time_s"),
                         [(r.step, repr(r.energy_ha), r.n_elements, f"{r.meas_time_s:.3g}") for r in rows])

    if sc == "rank":
        _, bundle = _load(cfg, need_h=False)
        rows = rank_profile(bundle.gates(), bundle.step_size) if bundle.entanglers else []
        if cfg.output_format == "json":
            keys = ("step", "entanglers", "rank", "log2_bound")
            return json.dumps({"rows": [dict(zip(keys, r)) for r in rows]}, indent=2)
        return _rows_csv(("step", "entanglers", "rank", "log2_bound"), rows)

    if sc == "resources":
        _, bundle = _load(cfg, need_h=False)
        n_terms = len(load_hamiltonian(cfg.hamiltonian_path, bundle.n_qubits)) if cfg.hamiltonian_path else ""
        counts = circuit_resources(bundle.gates(), bundle.reference, optimize=args.optimize)
        row = {"molecule": args.label, "steps": bundle.n_steps, "qubits": bundle.n_qubits,
               "cnot": counts.cnot, "x": counts.x, "h": counts.h, "rx": counts.rx, "rz": counts.rz,
               "terms": n_terms}
        if cfg.output_format == "json":
            return json.dumps(row, indent=2)
        return _rows_csv(tuple(row), [tuple(row.values())])

    if sc == "transform":
        h, bundle = _load(cfg)
        chk = transform_crosscheck(h, bundle, args.prefix, cfg.prune_threshold, args.max_terms)
        if cfg.output_format == "json":
            return json.dumps(asdict(chk), indent=2)
        d = asdict(chk)
        return _rows_csv(tuple(d), [tuple(repr(v) for v in d.values())])

    if sc == "amplitude":
        from .iqcc import parse_reference

        _, bundle = _load(cfg, need_h=False)
        y = parse_reference(args.target, bundle.n_qubits)
        amp = single_amplitude(bundle.gates(), bundle.reference, y, cfg.enumeration_budget)
        out = {"target": y, "real": amp.real, "imag": amp.imag, "probability": abs(amp) ** 2}
        if cfg.output_format == "json":
            return json.dumps(out, indent=2)
        return _rows_csv(tuple(out), [tuple(repr(v) for v in out.values())])

    raise ValueError(f"unknown subcommand {sc}")


if __name__ == "__main__":
    sys.exit(main())
