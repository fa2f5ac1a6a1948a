"""Exception types shared across the toolkit."""


class ThermoporoError(Exception):
    """Base class for all toolkit errors."""


class GeometryError(ThermoporoError):
    """Malformed voxel data or geometry precondition violation.

    ``offset`` is the byte offset into the source file at which the
    problem was detected, when that is known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(ThermoporoError):
    """Bad run configuration (unknown key, missing file, bad value)."""


class LayoutError(ThermoporoError):
    """Grid field layout mismatch (e.g. div applied to a scalar)."""


class ConvergenceError(ThermoporoError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IncompatibleDataError(ThermoporoError):
    """Right-hand side or boundary flux violates a solvability condition."""
