"""Exception hierarchy shared by the simulator and the lattice tracker."""


class LoopsimError(Exception):
    """Base class for all package errors."""


class ContractError(LoopsimError, ValueError):
    """An operation was called outside its documented precondition."""


class ImpossibleOutcomeError(LoopsimError, ValueError):
    """A measurement outcome has zero probability (or lies outside the reachable space)."""


class UnsupportedArchitectureError(LoopsimError, ValueError):
    """The requested analysis is not defined for this loop architecture."""


class SupportLimitExceeded(LoopsimError, RuntimeError):
    """The live wavefunction support grew beyond the configured bound."""

    def __init__(self, step: int, size: int, limit: int):
        super().__init__(f"support size {size} exceeds limit {limit} at event {step}")
        self.step = step
        self.size = size
        self.limit = limit
