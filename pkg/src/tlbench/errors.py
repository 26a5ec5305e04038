"""Exception types shared across the toolkit."""


class TlbenchError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(TlbenchError):
    """An argument or configuration violates a documented precondition."""


class DuplicateTaskError(TlbenchError):
    """A task id was registered twice."""


class UnknownTaskError(TlbenchError):
    """A task id is not present in the registry."""


class ParseError(TlbenchError):
    """A data file row could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(prefix + message)


class InsufficientDataError(TlbenchError):
    """A subsample request exceeds the available pool."""


class RunError(TlbenchError):
    """A backend failed during training."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"{message} (step {step})")


class IncompleteCellError(TlbenchError):
    """A significance-matrix cell is missing one method's sample."""

    def __init__(self, cells):
        self.cells = sorted(cells)
        named = ", ".join(f"({t}, {s})" for t, s in self.cells)
        super().__init__(f"incomplete cells: {named}")


class IncompleteError(TlbenchError):
    """An aggregate computation is missing one of its inputs."""


class IntegrityError(TlbenchError):
    """The run store holds conflicting content for the same run id."""
