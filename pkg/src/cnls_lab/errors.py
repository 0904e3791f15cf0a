"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates an operation's precondition."""


class IncompatibleGrid(ValueError):
    """Two objects live on grids with different (r_max, n)."""


class DomainTooSmall(ValueError):
    """A requested radius does not fit inside the grid."""


class NumericFailure(RuntimeError):
    """A linear solve broke down or produced non-finite values."""
