"""Localized virial, interaction Morawetz potential and Strichartz accumulators.

Virial.  For a radial weight phi_R(r) = R^2 phi(r/R) and a solution u,

    V_R    = int phi_R |u|^2
    V_R'   = 2 int phi_R' Im(conj(u) u_r)
    V_R''  = 4 int phi_R'' |u_r|^2 - int [bilap(phi_R) |u|^2
             + lap(phi_R) (|u|^4 - (4/5) |u|^{10/3})]

The profile phi is r^2 on [0, 1], constant on [3, inf), and C^4 across.
Terms with u_r are evaluated on cell faces with the same one-sided
differences as the discrete energy, which keeps them consistent with the
time stepper.

Morawetz.  With psi a C^4 bump (1 on the unit ball, 0 outside radius 2) and
phi(w) = int psi^2(s) psi^2(s - w) ds on R^4,

    M_R = int int |u(y)|^2 phi(|x - y|/R) (x - y) . Im(conj(u) grad u)(x) dx dy.

For radial u the momentum density is p(r_x) x/|x| with p = Im(conj(u) u_r),
and integrating y over the sphere of radius r_y leaves the kernel

    K_R(r_x, r_y) = 4 pi int_0^pi phi(rho/R) (r_x - r_y cos t) sin^2 t dt,
    rho^2 = r_x^2 + r_y^2 - 2 r_x r_y cos t.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import make_interp_spline

from .cutoff import c4_cutoff
from .errors import DomainTooSmall, IncompatibleGrid, InvalidArgument
from .grid import SPHERE_AREA, Field, RadialGrid, edge_differences, face_integral, radial_derivative

# ---------------------------------------------------------------------------
# virial weight


def _transition_derivative() -> np.polynomial.Polynomial:
    """q = phi' on [1, 3] in s = rho - 1: degree-7 Hermite join of 2 rho to 0."""
    # q(0) = 2, q'(0) = 2, q''(0) = q'''(0) = 0 and q = q' = q'' = q''' = 0 at s = 2
    rows, rhs = [], []
    for s0, vals in ((0.0, (2.0, 2.0, 0.0, 0.0)), (2.0, (0.0, 0.0, 0.0, 0.0))):
        for k, v in enumerate(vals):
            basis = [np.polynomial.Polynomial.basis(j).deriv(k)(s0) for j in range(8)]
            rows.append(basis)
            rhs.append(v)
    return np.polynomial.Polynomial(np.linalg.solve(np.array(rows), np.array(rhs)))


_Q = _transition_derivative()
_PHI_MID = _Q.integ(lbnd=0.0, k=1.0)  # phi on [1, 3], phi(1) = 1
PHI_PLATEAU = float(_PHI_MID(2.0))
PHI_D2_BOUND = float(
    max(2.0, np.max(np.abs(_Q.deriv()(np.linspace(0.0, 2.0, 20001)))))
)


def virial_profile(rho, order: int = 0) -> np.ndarray:
    """phi and its derivatives up to order 4 at rho >= 0."""
    rho = np.asarray(rho, dtype=float)
    inner = [rho**2, 2 * rho, np.full_like(rho, 2.0), np.zeros_like(rho), np.zeros_like(rho)][order]
    s = np.clip(rho - 1.0, 0.0, 2.0)
    mid = _PHI_MID.deriv(order)(s) if order else _PHI_MID(s)
    outer = np.full_like(rho, PHI_PLATEAU if order == 0 else 0.0)
    return np.where(rho <= 1.0, inner, np.where(rho >= 3.0, outer, mid))


@dataclass(frozen=True, eq=False)
class VirialWeight:
    """Samples of phi_R and its derivatives on a grid; ``*_mid`` live on faces."""

    grid: RadialGrid
    R: float
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    lap: np.ndarray
    bilap: np.ndarray
    dphi_mid: np.ndarray
    d2phi_mid: np.ndarray
    c_phi: float = PHI_D2_BOUND


def _radial_lap_bilap(r, R):
    rho = r / R
    d1 = R * virial_profile(rho, 1)
    d2 = virial_profile(rho, 2)
    d3 = virial_profile(rho, 3) / R
    d4 = virial_profile(rho, 4) / R**2
    lap = np.empty_like(r)
    bilap = np.empty_like(r)
    quad = rho <= 1.0
    # r^2 exactly: lap = 8, bilap = 0 (also the regular values at the origin)
    lap[quad] = 8.0
    bilap[quad] = 0.0
    o = ~quad
    ro = r[o]
    lap[o] = d2[o] + 3 * d1[o] / ro
    bilap[o] = d4[o] + 6 * d3[o] / ro + 3 * d2[o] / ro**2 - 3 * d1[o] / ro**3
    return d1, d2, lap, bilap


def build_virial_weight(grid: RadialGrid, R: float) -> VirialWeight:
    if not R >= 1:
        raise InvalidArgument(f"R must be >= 1, got {R}")
    if 3 * R > grid.r_max:
        raise DomainTooSmall(f"3R = {3 * R} exceeds r_max = {grid.r_max}")
    r = grid.nodes
    d1, d2, lap, bilap = _radial_lap_bilap(r, R)
    mid = grid.midpoints
    arrays = dict(
        phi=R**2 * virial_profile(r / R),
        dphi=d1,
        d2phi=d2,
        lap=lap,
        bilap=bilap,
        dphi_mid=R * virial_profile(mid / R, 1),
        d2phi_mid=virial_profile(mid / R, 2),
    )
    for a in arrays.values():
        a.flags.writeable = False
    return VirialWeight(grid=grid, R=float(R), **arrays)


def _check_grid(u: Field, grid: RadialGrid):
    if not u.grid.compatible(grid):
        raise IncompatibleGrid(f"{u.grid} vs {grid}")


def face_momentum(u: Field) -> np.ndarray:
    """Im(conj(u) u_r) on faces: Im(conj(u_i) u_{i+1}) / h, with u_{n+1} = 0."""
    v = u.values
    nxt = np.append(v[1:], 0.0)
    return np.imag(np.conj(v) * nxt) / u.grid.h


def virial(u: Field, w: VirialWeight) -> float:
    _check_grid(u, w.grid)
    return float(np.dot(w.grid.weights, w.phi * np.abs(u.values) ** 2))


def virial_dt(u: Field, w: VirialWeight) -> float:
    _check_grid(u, w.grid)
    return 2.0 * face_integral(w.grid, w.dphi_mid * face_momentum(u))


def virial_dtt(u: Field, w: VirialWeight) -> float:
    _check_grid(u, w.grid)
    a2 = np.abs(u.values) ** 2
    du = edge_differences(u.values, w.grid.h)
    kinetic = 4.0 * face_integral(w.grid, w.d2phi_mid * np.abs(du) ** 2)
    density = w.bilap * a2 + w.lap * (a2 * a2 - 0.8 * a2 ** (5.0 / 3.0))
    return kinetic - float(np.dot(w.grid.weights, density))


# ---------------------------------------------------------------------------
# interaction Morawetz


def _gauss_legendre(a: float, b: float, n: int):
    x, wt = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * wt


def _panels(edges, n_per):
    xs, ws = zip(*(_gauss_legendre(a, b, n_per) for a, b in zip(edges[:-1], edges[1:])))
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=None)
def _phi_table(n_rho: int = 801, n_per: int = 24):
    """phi(rho) on [0, 4] from the autocorrelation of psi^2 on R^4.

    With w = rho e_1 and s = (a, b * omega), ds = 4 pi b^2 db da; psi^2 is
    piecewise smooth on radii [0, 1], [1, 2], so panels of width 1/4 keep the
    Gauss rule accurate.
    """
    a, wa = _panels(np.linspace(-2.0, 2.0, 17), n_per)
    b, wb = _panels(np.linspace(0.0, 2.0, 9), n_per)
    A, B = np.meshgrid(a, b, indexing="ij")
    W = np.outer(wa, wb) * 4 * math.pi * B**2
    psi2_s = c4_cutoff(np.hypot(A, B)) ** 2 * W
    rho = np.linspace(0.0, 4.0, n_rho)
    vals = np.array([np.sum(psi2_s * c4_cutoff(np.hypot(A - p, B)) ** 2) for p in rho])
    vals[-1] = 0.0
    return rho, vals


@lru_cache(maxsize=None)
def _phi_spline():
    rho, vals = _phi_table()
    return make_interp_spline(rho, vals, k=5)


def morawetz_phi(rho) -> np.ndarray:
    rho = np.abs(np.asarray(rho, dtype=float))
    out = np.zeros_like(rho)
    inside = rho < 4.0
    out[inside] = _phi_spline()(rho[inside])
    return np.maximum(out, 0.0)


def morawetz_phi0() -> float:
    """phi(0) = int psi^4 (the maximum of phi, by Cauchy-Schwarz)."""
    return float(morawetz_phi(0.0))


@dataclass(frozen=True, eq=False)
class MorawetzKernel:
    """K_R on a sub-grid of node indices ``index`` with quadrature ``sub_weights``."""

    grid: RadialGrid
    R: float
    index: np.ndarray
    sub_weights: np.ndarray
    table: np.ndarray
    n_theta: int

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes[self.index]


def _sub_index(grid: RadialGrid, max_nodes: int) -> np.ndarray:
    stride = max(1, math.ceil(grid.n / (max_nodes - 1)))
    idx = np.arange(0, grid.n + 1, stride)
    if idx[-1] != grid.n:
        idx = np.append(idx, grid.n)
    return idx


def _trapezoid_r3(r: np.ndarray) -> np.ndarray:
    """Trapezoid weights for int r^3 f dr on a (possibly nonuniform) node set."""
    dr = np.diff(r)
    w = np.zeros_like(r)
    w[:-1] += dr / 2
    w[1:] += dr / 2
    return w * r**3


def build_morawetz_kernel(
    grid: RadialGrid,
    R: float,
    n_theta: int = 256,
    max_nodes: int = 512,
    chunk: int = 64,
) -> MorawetzKernel:
    if not R >= 1:
        raise InvalidArgument(f"R must be >= 1, got {R}")
    if n_theta < 64:
        raise InvalidArgument(f"n_theta must be >= 64, got {n_theta}")
    if max_nodes < 2:
        raise InvalidArgument("max_nodes must be >= 2")
    idx = _sub_index(grid, max_nodes)
    r = grid.nodes[idx]
    theta, wt = _gauss_legendre(0.0, math.pi, n_theta)
    cos, sin2w = np.cos(theta), np.sin(theta) ** 2 * wt * 4 * math.pi
    table = np.empty((r.size, r.size))
    for start in range(0, r.size, chunk):
        rx = r[start : start + chunk, None, None]
        ry = r[None, :, None]
        rho = np.sqrt(np.maximum(rx**2 + ry**2 - 2 * rx * ry * cos, 0.0))
        table[start : start + chunk] = np.sum(
            morawetz_phi(rho / R) * (rx - ry * cos) * sin2w, axis=-1
        )
    table.flags.writeable = False
    weights = _trapezoid_r3(r)
    weights.flags.writeable = False
    return MorawetzKernel(grid, float(R), idx, weights, table, n_theta)


def morawetz_mr(u: Field, k: MorawetzKernel) -> float:
    _check_grid(u, k.grid)
    v = u.values
    p = np.imag(np.conj(v) * radial_derivative(u).values)[k.index]
    if not np.any(p):
        return 0.0
    dens = np.abs(v[k.index]) ** 2
    return float(SPHERE_AREA * (k.sub_weights * p) @ k.table @ (k.sub_weights * dens))


def morawetz_ladder(R0: float, count: int = 16) -> np.ndarray:
    if not R0 >= 1:
        raise InvalidArgument(f"R0 must be >= 1, got {R0}")
    return np.geomspace(1.0, R0, count)


def build_morawetz_ladder(grid: RadialGrid, R0: float, count: int = 16, **kw) -> list[MorawetzKernel]:
    return [build_morawetz_kernel(grid, R, **kw) for R in morawetz_ladder(R0, count)]


def morawetz_m(u: Field, R0: float, kernels) -> float:
    """int_1^R0 M_R dR / R by the trapezoid rule in log R over the kernel ladder."""
    if not R0 >= 1:
        raise InvalidArgument(f"R0 must be >= 1, got {R0}")
    if R0 == 1:
        return 0.0
    kernels = list(kernels)
    if len(kernels) < 2:
        raise InvalidArgument("need a ladder of at least two kernels")
    Rs = np.array([k.R for k in kernels])
    if not (np.all(np.diff(Rs) > 0) and math.isclose(Rs[0], 1.0) and math.isclose(Rs[-1], R0)):
        raise InvalidArgument(f"kernel ladder {Rs} does not span [1, {R0}]")
    vals = np.array([morawetz_mr(u, k) for k in kernels])
    return float(np.trapezoid(vals, np.log(Rs)))


def morawetz_bound(mass: float, grad_sup: float) -> float:
    """C with |M_R| / R^4 <= C for all R >= 1.

    |(x - y) phi(|x - y|/R)| <= 4 R phi(0), so Cauchy-Schwarz gives
    |M_R| <= 4 R phi(0) M^{3/2} ||grad u||.
    """
    return 4.0 * morawetz_phi0() * mass**1.5 * grad_sup


# ---------------------------------------------------------------------------
# Strichartz accumulators


@dataclass(frozen=True)
class StrichartzAccumulator:
    """Running int dt ||u||_p^p for p = 6, 4, 3 over [t_a, t_b]."""

    t_a: float = 0.0
    t_b: float = 0.0
    s6: float = 0.0
    s4: float = 0.0
    s3: float = 0.0

    def finalize(self) -> dict:
        w1, w2, v0 = self.s6 ** (1 / 6), self.s4 ** (1 / 4), self.s3 ** (1 / 3)
        return {"W1": w1, "W2": w2, "V0": v0, "ST": (w1, w2)}


def strichartz_update(acc: StrichartzAccumulator, u: Field, dt: float) -> StrichartzAccumulator:
    if not dt > 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    a = np.abs(u.values)
    w = u.grid.weights
    return replace(
        acc,
        t_b=acc.t_b + dt,
        s6=acc.s6 + dt * float(np.dot(w, a**6)),
        s4=acc.s4 + dt * float(np.dot(w, a**4)),
        s3=acc.s3 + dt * float(np.dot(w, a**3)),
    )


# ---------------------------------------------------------------------------
# time series

SERIES_COLUMNS = (
    "t", "mass", "energy", "energy_c", "grad_l2", "l4", "l10_3",
    "k_2m1", "label", "dt", "boundary_mag",
)


@dataclass
class TimeSeries:
    """Records (t, {name: value}) with strictly increasing t."""

    records: list = field(default_factory=list)
    snapshots: list | None = field(default=None, repr=False)

    def append(self, t: float, values: dict) -> None:
        if self.records and not t > self.records[-1][0]:
            raise InvalidArgument(f"time {t} does not advance past {self.records[-1][0]}")
        self.records.append((float(t), dict(values)))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def t(self) -> np.ndarray:
        return np.array([t for t, _ in self.records])

    def column(self, name: str) -> np.ndarray:
        if name == "t":
            return self.t
        vals = [rec[name] for _, rec in self.records]
        return np.array(vals, dtype=object if name == "label" else float)

    def columns(self) -> list[str]:
        extra = []
        for _, rec in self.records:
            extra.extend(k for k in rec if k not in SERIES_COLUMNS and k not in extra)
        return list(SERIES_COLUMNS) + extra

    def to_csv(self, outcome=None, meta: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in (meta or {}).items():
            buf.write(f"# {k}={v}\n")
        cols = self.columns()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for t, rec in self.records:
            row = []
            for c in cols:
                v = t if c == "t" else rec.get(c, "")
                row.append(format(v, ".17g") if isinstance(v, float) else str(v))
            writer.writerow(row)
        if outcome is not None:
            buf.write(json.dumps(outcome if isinstance(outcome, dict) else outcome.to_dict()) + "\n")
        return buf.getvalue()
