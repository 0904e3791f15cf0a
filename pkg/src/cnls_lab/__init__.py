"""Radial numerics for i u_t + Delta u = -|u|^2 u + |u|^{4/3} u on R^4."""

from .errors import DomainTooSmall, IncompatibleGrid, InvalidArgument, NumericFailure
from .grid import Field, RadialGrid, make_grid

__version__ = "0.1.0"

__all__ = [
    "DomainTooSmall",
    "Field",
    "IncompatibleGrid",
    "InvalidArgument",
    "NumericFailure",
    "RadialGrid",
    "make_grid",
]
