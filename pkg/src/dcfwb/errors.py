"""Exception types shared across the package."""


class DcfwbError(Exception):
    """Base class for all package errors."""


class ScenarioFormatError(DcfwbError):
    """Scenario file is not parseable into the expected structure."""


class InvalidScenario(DcfwbError):
    """Scenario parsed but violates one or more invariants.

    Carries the full list of problems so callers can report every
    violation at once instead of fixing them one by one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DistanceBelowReference(DcfwbError):
    """Link distance is shorter than the path-loss reference distance."""


class NegativeGamma(DcfwbError):
    """SNR-per-bit passed to a BER formula was negative."""


class PeqOutOfRange(DcfwbError):
    """Equivalent failure probability reached 1, chain is degenerate."""


class DegenerateIdle(DcfwbError):
    """Idle-state bookkeeping has no mass to distribute (q = 0, P_I0 = 0)."""


class UnknownClass(DcfwbError):
    """Rate-class id is not present in the scenario's class map."""


class DegenerateScenario(DcfwbError):
    """Operating-point iteration pushed some station's failure probability to 1."""


class NoConvergence(DcfwbError):
    """Fixed-point iteration exhausted its budget.

    Attributes:
        residual: last max-norm step size observed.
        iterations: outer iterations performed.
    """

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"fixed point not converged after {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class NotConverged(DcfwbError):
    """Throughput was requested from an unconverged operating point."""


class InvalidConfig(DcfwbError):
    """Simulation configuration violates its preconditions."""
