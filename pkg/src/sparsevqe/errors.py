class NumericalError(RuntimeError):
    """Base for failures of the numerics rather than of the inputs."""


class EmptyStateError(NumericalError):
    def __init__(self, gate_ordinal, cutoff):
        self.gate_ordinal = gate_ordinal
        self.cutoff = cutoff
        super().__init__(
            f"state became empty after gate {gate_ordinal} (cutoff {cutoff:g} too aggressive)"
        )


class EnumerationBudgetError(NumericalError):
    pass


class TermCountGuardError(NumericalError):
    pass


class NonHermitianError(ValueError):
    """A coefficient or expectation value that should be real is not."""
