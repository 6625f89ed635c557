"""Exception types shared across the package.

Validation problems (bad shapes, out-of-range coordinates, malformed
scenarios) are plain ``ValueError``; the classes here mark numerical
failures so callers can tell the two apart.
"""


class NumericError(RuntimeError):
    """A numerical routine failed (eigensolver breakdown, divergence)."""


class BlowUpError(NumericError):
    """Time integration produced a non-finite value."""
