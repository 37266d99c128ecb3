"""Exception types shared across the package.

Each maps to a distinct process exit code in the CLI so scripted callers
can tell configuration mistakes from resource limits from numerical
failures (see cli.EXIT_CODES).
"""


class ConfigError(ValueError):
    """Invalid experiment configuration (bad flag value, malformed config file)."""


class CapExceededError(RuntimeError):
    """A request exceeded a configured resource cap (table size, ball radius, ...)."""


class SolverConvergenceError(RuntimeError):
    """An iterative linear solve stopped before reaching its tolerance."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its panel budget before reaching tolerance."""


class CoordinateOverflowError(OverflowError):
    """Group coordinate arithmetic left the supported signed 64-bit range."""
