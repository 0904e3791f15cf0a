"""The Aubin-Talenti ground state W(x) = (1 + |x|^2/8)^{-1} and the threshold m.

W solves -Delta W = W^3 on R^4.  The reference constants come from Beta
integrals with s = r^2/8 (so r^3 dr = 32 s ds, r^5 dr = 256 s^2 ds):

    ||grad W||^2 = 2 pi^2 * 16 B(3, 1) = 32 pi^2 / 3
    ||W||_4^4    = 2 pi^2 * 32 B(2, 2) = 32 pi^2 / 3
    m            = ||grad W||^2 / 4     = 8 pi^2 / 3

Quadrature is checked against these numbers, never the other way round.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cutoff import c4_cutoff
from .errors import InvalidArgument
from .functionals import field_norms
from .grid import Field, RadialGrid

GRAD_W_SQ_EXACT = 32 * math.pi**2 / 3
M_EXACT = 8 * math.pi**2 / 3
C4_EXACT = GRAD_W_SQ_EXACT ** -0.25
# int_{R^4} W^{10/3} = 2 pi^2 * 32 B(2, 4/3) = 2 pi^2 * 32 * 9/28
W_L10_3_EXACT = 2 * math.pi**2 * 32 * 9 / 28

DEFAULT_REF_GRID = RadialGrid(200.0, 20000)


def w_profile(r):
    return 1.0 / (1.0 + np.asarray(r, dtype=float) ** 2 / 8.0)


def sample_w(grid: RadialGrid) -> Field:
    return Field(grid, w_profile(grid.nodes))


@dataclass(frozen=True)
class GroundStateRefs:
    grad_w_sq: float
    w_l4_4: float
    m: float
    c4: float
    grad_w_sq_exact: float = GRAD_W_SQ_EXACT
    m_exact: float = M_EXACT

    @property
    def grad_w(self) -> float:
        return math.sqrt(self.grad_w_sq)


def compute_refs(grid: RadialGrid = DEFAULT_REF_GRID) -> GroundStateRefs:
    # W ~ 8/r^2 does not vanish at r_max, so integrate over the ball only
    n = field_norms(sample_w(grid), truncate=True)
    return GroundStateRefs(
        grad_w_sq=n.grad_sq,
        w_l4_4=n.l4_4,
        m=n.grad_sq / 4,
        c4=n.l4_4**0.25 / n.grad_sq**0.5,
    )


def pohozaev_residual(grid: RadialGrid) -> float:
    refs = compute_refs(grid)
    return abs(refs.grad_w_sq - refs.w_l4_4) / refs.grad_w_sq


def w_mass(grid: RadialGrid) -> float:
    """Truncated int W^2; W is not in L^2(R^4), so this grows like log r_max."""
    warnings.warn(
        "W is not square integrable on R^4; the mass depends on r_max",
        RuntimeWarning,
        stacklevel=2,
    )
    return field_norms(sample_w(grid), truncate=True).mass


def preset_rescaled_w(grid: RadialGrid, a: float, lam: float, r_cut: float) -> Field:
    """a * lam * W(lam r) * chi(r / r_cut): an H^1-dot preserving concentration of W."""
    if not a > 0:
        raise InvalidArgument(f"amplitude must be positive, got {a}")
    if not lam >= 1:
        raise InvalidArgument(f"concentration must be >= 1, got {lam}")
    if not r_cut > 0:
        raise InvalidArgument(f"r_cut must be positive, got {r_cut}")
    if grid.h > 0.05 / lam:
        warnings.warn(
            f"grid spacing {grid.h:.3g} under-resolves the core of width {1 / lam:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
    r = grid.nodes
    chi = c4_cutoff(r / r_cut) if math.isfinite(r_cut) else 1.0
    return Field(grid, a * lam * w_profile(lam * r) * chi)


def gaussian(grid: RadialGrid, a: float = 1.0, width: float = 1.0) -> Field:
    """a * exp(-r^2 / (2 width^2))."""
    if not width > 0:
        raise InvalidArgument(f"width must be positive, got {width}")
    return Field(grid, a * np.exp(-grid.nodes**2 / (2 * width**2)))
