"""Minimization of the Sobolev quotient J(u) = (1/4) (||grad u|| / ||u||_4)^4.

J is invariant under amplitude scaling and its infimum over nonzero fields is
the threshold m, attained at W.  Plain L^2 gradient descent on the discrete
quotient drifts towards the origin (a single-node spike has a smaller discrete
quotient than any resolved profile), so the descent direction is the
H^1-gradient (I - Delta_h)^{-1} dJ, which damps the high modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import InvalidArgument
from .grid import Field, RadialGrid, grad_sq, laplacian_bands, laplacian4

_MIN_STEP = 1e-14


@dataclass(frozen=True)
class MinimizeConfig:
    max_iters: int = 2000
    step0: float = 1.0
    tol_grad: float = 1e-6
    tol_value: float = 1e-10

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidArgument(f"max_iters must be a positive integer, got {self.max_iters}")
        for name in ("step0", "tol_grad", "tol_value"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    value: float
    grad_norm: float
    step: float


@dataclass(frozen=True)
class MinimizeResult:
    minimizer: Field
    value: float
    iterations: int
    converged: bool
    reason: str
    history: tuple[IterationRecord, ...] = field(default=(), repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.array([rec.value for rec in self.history])


def _l4_4(u: Field) -> float:
    return float(np.dot(u.grid.weights, np.abs(u.values) ** 4))


def _parts(u: Field, truncate: bool = False) -> tuple[float, float]:
    g, q = grad_sq(u, truncate), _l4_4(u)
    if q == 0:
        raise InvalidArgument("the quotient is undefined for the zero field")
    return g, q


def sobolev_quotient(u: Field, truncate: bool = False) -> float:
    """(1/4) (||grad u|| / ||u||_4)^4; see :func:`cnls_lab.grid.grad_sq` for ``truncate``."""
    g, q = _parts(u, truncate)
    return 0.25 * g * g / q


def quotient_gradient(u: Field) -> Field:
    """Weighted-L^2 gradient of J: A (-Delta_h u) - B u^3."""
    if not u.is_real:
        raise InvalidArgument("quotient_gradient is defined for real fields")
    g, q = _parts(u)
    v = u.values.real
    a, b = g / q, g * g / (q * q)
    return u.with_values(-a * laplacian4(u).values.real - b * v**3)


def _h1_solver(grid: RadialGrid):
    lower, diag, upper = laplacian_bands(grid)
    ab = np.zeros((3, grid.size))
    ab[0, 1:] = -upper[:-1]
    ab[1] = 1.0 - diag
    ab[2, :-1] = -lower[1:]
    return lambda rhs: solve_banded((1, 1), ab, rhs)


def minimize_quotient(seed: Field, cfg: MinimizeConfig = MinimizeConfig()) -> MinimizeResult:
    """Projected, preconditioned descent on J with halving line search.

    Every accepted iterate is clipped at zero and rescaled to ||grad u|| = 1,
    and the recorded values are nonincreasing.
    """
    if not seed.is_real:
        raise InvalidArgument("seed must be real")
    if not np.any(seed.values.real):
        raise InvalidArgument("seed must be nonzero")
    grid = seed.grid
    precond = _h1_solver(grid)
    w = grid.weights

    def normalize(v: np.ndarray) -> np.ndarray | None:
        gs = grad_sq(Field(grid, v))
        return v / math.sqrt(gs) if gs > 0 else None

    u = normalize(np.maximum(seed.values.real, 0.0))
    if u is None:
        raise InvalidArgument("seed has no positive part")
    val = sobolev_quotient(Field(grid, u))
    history = [IterationRecord(0, val, math.nan, 0.0)]
    reason, converged = "max_iters", False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = quotient_gradient(Field(grid, u)).values.real
        d = precond(g)
        gnorm = math.sqrt(max(float(np.dot(w, g * d)), 0.0))
        if gnorm < cfg.tol_grad:
            reason, converged = "tol_grad", True
            it -= 1
            break
        step = cfg.step0
        new_val, new_u = val, None
        while step >= _MIN_STEP:
            cand = normalize(np.maximum(u - step * d, 0.0))
            if cand is not None:
                cv = sobolev_quotient(Field(grid, cand))
                if cv < val:
                    new_val, new_u = cv, cand
                    break
            step /= 2
        if new_u is None:
            # no descent at machine precision: the value change is already zero
            reason, converged = "stalled", True
            it -= 1
            break
        change = (val - new_val) / val
        u, val = new_u, new_val
        history.append(IterationRecord(it, val, gnorm, step))
        if change < cfg.tol_value:
            reason, converged = "tol_value", True
            break
    return MinimizeResult(
        minimizer=Field(grid, u),
        value=val,
        iterations=len(history) - 1,
        converged=converged,
        reason=reason,
        history=tuple(history),
    )
