"""Exception types raised across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where an operation is defined."""


class CutLocusError(DomainError):
    """A logarithm was requested at (or too close to) the cut locus."""


class DegenerateInputError(ValueError):
    """An input is degenerate, e.g. a zero vector that must be normalized."""


class ConsistencyError(RuntimeError):
    """Two computations that must agree do not (e.g. an unconverged reference)."""


class TrainingDiverged(RuntimeError):
    """The training objective became non-finite."""

    def __init__(self, step, value):
        super().__init__(f"non-finite objective {value!r} at step {step}")
        self.step = step
        self.value = value
