"""Exception hierarchy shared across the toolkit."""


class LravolError(Exception):
    """Base class for all toolkit errors."""


class SmtParseError(LravolError):
    """Malformed input text. Carries a 1-based (line, col) position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, col {col})"
        super().__init__(message)


class UnsupportedConstructError(SmtParseError):
    """Input is well-formed but outside the supported QF_LRA subset."""


class UndeclaredSymbolError(SmtParseError):
    """A symbol is used before being declared."""


class CubeLimitError(LravolError):
    """Cube enumeration exceeded the configured limit; the blowup is inherent."""

    def __init__(self, limit, cubes):
        self.limit = limit
        self.cubes = cubes
        super().__init__(f"cube enumeration truncated at limit {limit}")


class LpFailureError(LravolError):
    """The LP kernel exceeded its iteration cap (numerical failure)."""


class UnboundedPolytopeError(LravolError):
    """A polytope is unbounded in some direction; its volume is undefined."""


class DegenerateInputError(LravolError):
    """A contract violation involving degenerate/empty polytopes."""


class VolumeConvergenceError(LravolError):
    """Multiphase volume estimation failed to converge; best estimate attached."""

    def __init__(self, message, estimate):
        self.estimate = estimate
        super().__init__(message)


class LatticeTooCoarseError(LravolError):
    """Lattice rounding acceptance collapsed; the precision is too small."""


class PrecisionOverflowError(LravolError):
    """Required precision exceeds the supported cap (18 decimal digits)."""


class SamplerPinchError(LravolError):
    """Hit-and-run could not find a usable chord after retries."""
