"""Exception hierarchy shared by all hymas modules."""


class HymasError(Exception):
    """Base class for every error raised by this package."""


class FormulaError(HymasError):
    """Malformed or ill-scoped formula (parse or validation failure)."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


class ModelError(HymasError):
    """Malformed concurrent game structure or model file."""


class AlphabetError(HymasError):
    """A word or automaton does not fit the expected alphabet."""


class BudgetExceeded(HymasError):
    """An automaton construction grew past the configured state budget."""

    def __init__(self, stage, size, budget):
        super().__init__(f"{stage}: {size} states exceeds budget {budget}")
        self.stage = stage
        self.size = size
        self.budget = budget


class OracleError(HymasError):
    """Brute-force oracle cannot evaluate the given input."""
