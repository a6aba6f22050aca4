"""Exception types raised across the package."""


class SymVmfError(Exception):
    """Base class for all package errors."""


class AngleOutOfRange(SymVmfError, ValueError):
    """Euler angles outside their closed intervals."""


class NearPiRotation(SymVmfError, ValueError):
    """Rotation too close to pi for a finite Rodrigues vector."""


class UnknownGroup(SymVmfError, KeyError):
    """Requested symmetry group name is not built in."""


class ParseError(SymVmfError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class GroupAxiomViolation(SymVmfError, ValueError):
    """Quaternion table does not form a group (up to sign)."""

    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)


class NoZoneFound(SymVmfError, RuntimeError):
    """No group translate fell inside the fundamental zone."""


class ResultantOutOfRange(SymVmfError, ValueError):
    """Mean resultant length outside [0, 1)."""


class DegenerateResultant(SymVmfError, ArithmeticError):
    """Resultant vector too short to define a mean direction."""


class NonFiniteLikelihood(SymVmfError, ArithmeticError):
    """Log-likelihood evaluated to NaN or infinity."""


class DimensionMismatch(SymVmfError, ValueError):
    """Orientation map records do not tile the declared grid."""
