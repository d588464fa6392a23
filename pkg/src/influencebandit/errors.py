"""Exception types shared across the package.

The CLI maps ConfigError to exit code 1 and everything else to exit code 2.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad parameter values, infeasible setup."""


class DataError(ValueError):
    """Malformed or degenerate input data (CSV files, non-finite features)."""


class ProtocolError(RuntimeError):
    """A policy or caller violated the round protocol (wrong cardinality,
    selection outside the pool, out-of-order calls)."""


class InvariantError(RuntimeError):
    """An internal invariant failed (e.g. negative per-round regret)."""
