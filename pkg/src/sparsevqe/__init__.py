"""Sparse wavefunction simulation of Pauli-exponential (QCC/iQCC) VQE circuits."""

__version__ = "0.1.0"

from .errors import EmptyStateError, EnumerationBudgetError, NonHermitianError, NumericalError, TermCountGuardError
from .hamiltonian import (
    PauliSumOperator,
    energy,
    load_hamiltonian,
    pauli_expectation,
    projector_expectation,
    prune,
    similarity_transform,
)
from .pauli import PauliString, commutes, multiply, parse_pauli, weight_profile
from .state import ExponentialGate, SparseState, apply_circuit, apply_exponential

__all__ = [
    "EmptyStateError",
    "EnumerationBudgetError",
    "ExponentialGate",
    "NonHermitianError",
    "NumericalError",
    "PauliString",
    "PauliSumOperator",
    "SparseState",
    "TermCountGuardError",
    "apply_circuit",
    "apply_exponential",
    "commutes",
    "energy",
    "load_hamiltonian",
    "multiply",
    "parse_pauli",
    "pauli_expectation",
    "projector_expectation",
    "prune",
    "similarity_transform",
    "weight_profile",
]
