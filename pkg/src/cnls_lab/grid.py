"""Radial grids on R^4, 4D-radial quadrature and difference operators.

Radial functions u(|x|) on R^4 are sampled on the uniform mesh r_i = i*h,
i = 0..n.  Integrals carry the measure |S^3| r^3 dr with |S^3| = 2*pi^2.

The quadrature weights are trapezoidal in the interior.  The two end nodes get
their control volumes instead (r in [0, h/2] at the origin, a full cell at
r_max), which is exactly what makes the flux-form Laplacian self-adjoint in
the weighted inner product.  All unitarity and conservation statements in
:mod:`cnls_lab.evolution` rest on that symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import IncompatibleGrid, InvalidArgument

SPHERE_AREA = 2.0 * math.pi**2
MIN_CELLS = 16


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh on [0, r_max] with ``n`` cells."""

    r_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise InvalidArgument(f"r_max must be positive, got {self.r_max}")
        if int(self.n) != self.n or self.n < MIN_CELLS:
            raise InvalidArgument(f"n must be an integer >= {MIN_CELLS}, got {self.n}")
        object.__setattr__(self, "r_max", float(self.r_max))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.r_max / self.n

    @property
    def size(self) -> int:
        return self.n + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.arange(self.n + 1) * self.h
        r[-1] = self.r_max
        r.flags.writeable = False
        return r

    @cached_property
    def midpoints(self) -> np.ndarray:
        """Cell faces r_{i+1/2}, i = 0..n (the last one lies beyond r_max)."""
        m = (np.arange(self.n + 1) + 0.5) * self.h
        m.flags.writeable = False
        return m

    @cached_property
    def face_areas(self) -> np.ndarray:
        """r_{i+1/2}^3, the flux coefficients of the Laplacian and gradient forms."""
        a = self.midpoints**3
        a.flags.writeable = False
        return a

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights including the 2*pi^2 sphere factor."""
        h = self.h
        w = h * self.nodes**3
        w[0] = h**4 / 64.0
        w *= SPHERE_AREA
        w.flags.writeable = False
        return w

    def compatible(self, other: "RadialGrid") -> bool:
        return self.r_max == other.r_max and self.n == other.n


def make_grid(r_max: float, n: int) -> RadialGrid:
    return RadialGrid(r_max, n)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex radial profile sampled on a :class:`RadialGrid`.

    Values are copied on construction and frozen, so fields can be shared
    freely between threads.
    """

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.size,):
            raise InvalidArgument(
                f"field has {v.size} samples, grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: RadialGrid, f) -> "Field":
        return cls(grid, f(grid.nodes))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "Field":
        return cls(grid, np.zeros(grid.size))

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def _check(self, other: "Field"):
        if not self.grid.compatible(other.grid):
            raise IncompatibleGrid(f"{self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.with_values(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return self.with_values(self.values - other.values)
        return NotImplemented

    def __mul__(self, c):
        if isinstance(c, Field):
            return NotImplemented
        return self.with_values(c * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _samples(grid: RadialGrid, f) -> np.ndarray:
    if isinstance(f, Field):
        if not grid.compatible(f.grid):
            raise IncompatibleGrid(f"{grid} vs {f.grid}")
        return f.values
    f = np.asarray(f)
    if f.shape != (grid.size,):
        raise IncompatibleGrid(f"{f.shape[0] if f.ndim else 0} samples on a grid of {grid.size} nodes")
    return f


def integrate_radial(grid: RadialGrid, f) -> float:
    """Approximate 2*pi^2 * int_0^r_max r^3 f(r) dr."""
    f = _samples(grid, f)
    return float(np.dot(grid.weights, np.real(f)))


def inner(u: Field, v: Field) -> complex:
    """Weighted inner product <u, v>_w = sum w_i u_i conj(v_i)."""
    u._check(v)
    return complex(np.dot(u.grid.weights, u.values * np.conj(v.values)))


def norm_lp(u: Field, p: float) -> float:
    if not p >= 2:
        raise InvalidArgument(f"p must be >= 2, got {p}")
    return integrate_radial(u.grid, np.abs(u.values) ** p) ** (1.0 / p)


def radial_derivative(u: Field) -> Field:
    """Second-order u_r: central inside, even reflection at 0, one-sided at r_max."""
    v, h = u.values, u.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = 0.0
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return u.with_values(d)


def edge_differences(values: np.ndarray, h: float) -> np.ndarray:
    """(u_{i+1} - u_i)/h on the faces r_{i+1/2}, i = 0..n, with u_{n+1} = 0."""
    ext = np.empty(values.size + 1, dtype=values.dtype)
    ext[:-1] = values
    ext[-1] = 0.0
    return np.diff(ext) / h


def face_integral(grid: RadialGrid, g: np.ndarray) -> float:
    """Face rule 2*pi^2 * sum h a_{i+1/2} g_{i+1/2} for int |S^3| r^3 g dr."""
    return float(SPHERE_AREA * grid.h * np.dot(grid.face_areas, np.real(g)))


def grad_sq(u: Field, truncate: bool = False) -> float:
    """Discrete Dirichlet energy, ||grad u||^2 on R^4.

    By default the field is continued by zero beyond r_max, and the result
    equals -<laplacian4(u), u>_w to round-off, so the Crank-Nicolson flow
    conserves it exactly.  ``truncate=True`` drops the jump to zero at the
    outer face and approximates the integral over the ball r <= r_max, which
    is the right quantity for profiles that do not vanish there (such as W).
    """
    du = edge_differences(u.values, u.grid.h)
    g = np.abs(du) ** 2
    if truncate:
        g[-1] = 0.0
    return face_integral(u.grid, g)


def norm_h1dot(u: Field, truncate: bool = False) -> float:
    return math.sqrt(grad_sq(u, truncate))


def laplacian_bands(grid: RadialGrid):
    """Tridiagonal bands (lower, diag, upper) of the flux-form 4D Laplacian.

    Row i is [a_{i+1/2} (u_{i+1} - u_i) - a_{i-1/2} (u_i - u_{i-1})] / (r_i^3 h^2)
    with the face coefficients of :attr:`RadialGrid.face_areas`.

    ``lower[i]`` multiplies u_{i-1} and ``upper[i]`` multiplies u_{i+1} in
    row i; ``lower[0]`` and ``upper[n]`` are unused.  Beyond r_max the field
    is taken to be zero.
    """
    h, r = grid.h, grid.nodes
    a = grid.face_areas
    lower = np.zeros(grid.size)
    upper = np.zeros(grid.size)
    c = np.zeros(grid.size)
    c[1:] = 1.0 / (r[1:] ** 3 * h**2)
    upper[1:] = a[1:] * c[1:]
    lower[1:] = a[:-1] * c[1:]
    diag = -(upper + lower)
    # regular limit at the origin: 4 u''(0) with u''(0) ~ 2(u_1 - u_0)/h^2
    upper[0] = 8.0 / h**2
    diag[0] = -8.0 / h**2
    for a in (lower, diag, upper):
        a.flags.writeable = False
    return lower, diag, upper


def apply_laplacian(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    lower, diag, upper = laplacian_bands(grid)
    out = diag * values
    out[:-1] += upper[:-1] * values[1:]
    out[1:] += lower[1:] * values[:-1]
    return out


def laplacian4(u: Field) -> Field:
    return u.with_values(apply_laplacian(u.grid, u.values))


def boundary_magnitude(u: Field) -> float:
    return float(abs(u.values[-1]))


def write_snapshot(path, u: Field, t: float | None = None) -> None:
    """Write ``# r_max=<v> n=<v>`` then ``r<TAB>re<TAB>im`` per node."""
    header = f"# r_max={u.grid.r_max!r} n={u.grid.n}"
    if t is not None:
        header += f" t={float(t)!r}"
    lines = [header]
    for r, z in zip(u.grid.nodes, u.values):
        lines.append(f"{r:.17g}\t{z.real:.17g}\t{z.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[Field, float | None]:
    """Inverse of :func:`write_snapshot`; returns the field and its time if stored."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise InvalidArgument(f"{path}: missing snapshot header")
    meta = dict(tok.split("=", 1) for tok in text[0][1:].split())
    try:
        grid = RadialGrid(float(meta["r_max"]), int(meta["n"]))
    except KeyError as exc:
        raise InvalidArgument(f"{path}: header lacks {exc}") from None
    data = np.loadtxt(text[1:], ndmin=2)
    if data.shape != (grid.size, 3):
        raise InvalidArgument(f"{path}: expected {grid.size} rows of 3 columns")
    t = float(meta["t"]) if "t" in meta else None
    return Field(grid, data[:, 1] + 1j * data[:, 2]), t
