"""Error types shared across the package.

Every failure the CLI maps to an exit code lives here, so callers can
catch one family of exceptions instead of chasing module internals.
"""


class LrnnError(Exception):
    """Base class for all package errors."""


class ParseError(LrnnError):
    """Malformed template/example/query/parameter text.

    Carries the 1-based source position so the CLI can point at the
    offending character.
    """

    def __init__(self, message: str, source: str = "<input>", line: int = 0, col: int = 0):
        self.source = source
        self.line = line
        self.col = col
        super().__init__(f"{source}:{line}:{col}: {message}" if line else f"{source}: {message}")


class RecursiveTemplateError(LrnnError):
    """Template predicates form a dependency cycle; carries one witness cycle."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        pretty = " -> ".join(f"{p}/{a}" for p, a in self.cycle)
        super().__init__(f"recursive template, predicate cycle: {pretty}")


class CapacityError(LrnnError):
    """Grounding exceeded the configured ground-atom budget."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"grounding produced more than {cap} ground atoms (reached {count})")


class EmptyInputError(LrnnError):
    """An activation was evaluated on an empty input list."""


class DivergenceError(LrnnError):
    """A parameter became non-finite during gradient descent."""

    def __init__(self, pid: str, epoch: int):
        self.pid = pid
        self.epoch = epoch
        super().__init__(f"parameter {pid!r} became non-finite in epoch {epoch}")


class AllRestartsFailedError(LrnnError):
    """Every training restart diverged; no usable parameters were produced."""
