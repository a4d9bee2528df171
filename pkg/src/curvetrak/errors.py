"""Exception hierarchy shared across curvetrak modules."""


class CurvetrakError(Exception):
    """Base class for all errors raised by curvetrak."""


class FieldError(CurvetrakError, ValueError):
    """Invalid field definition or non-finite evaluation point."""


class CriticalPointError(FieldError):
    """Gradient norm fell below the floor where a direction is required."""


class DegenerateFrameError(CurvetrakError, ValueError):
    """The two agents coincide, so the formation frame is undefined."""


class DivergenceError(CurvetrakError, ArithmeticError):
    """The simulated state became non-finite or left the sane range."""


class NoEquilibriumError(CurvetrakError, ValueError):
    """The steady-state angle ratio exceeds 1, so no equilibrium exists."""


class ConfigError(CurvetrakError, ValueError):
    """Configuration file is missing, unreadable or violates the schema."""
