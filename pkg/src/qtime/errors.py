"""Exception hierarchy.

Two families matter to callers: a violated precondition (bad input, degenerate
configuration) and a tripped numerical guard (a truncation window or grid that
does not capture the packet). The CLI maps them to different exit codes.
"""


class QTimeError(ValueError):
    """Base class for all library errors."""


class PreconditionError(QTimeError):
    """An input violates an operation's precondition."""


class ZeroFluxError(PreconditionError):
    """The selected flux integrates to zero, so no time measure exists."""


class NumericalGuardError(QTimeError):
    """A truncated integral does not decay at its window edges."""


class HermiticityError(NumericalGuardError):
    """An energy-representation average came out complex beyond tolerance."""
