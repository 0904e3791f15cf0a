"""Mass, energies, scaling derivatives and the sub-threshold region classifier.

Every functional is a combination of four quadratures of a field:

    mass     M   = int |u|^2
    grad_sq  G   = int |grad u|^2
    l4_4     Q   = int |u|^4
    l10_3    P   = int |u|^{10/3}

The two-parameter dilation u -> e^{a*lam} u(e^{-b*lam} x) multiplies G by
e^{2(a+b)lam}, Q by e^{4(a+b)lam} and P by e^{(10a/3 + 4b)lam} in four
dimensions, which is all that the closed forms below use.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import InvalidArgument
from .grid import Field, grad_sq


class RegionLabel(str, enum.Enum):
    K_PLUS = "K_PLUS"
    K_MINUS = "K_MINUS"
    ABOVE_THRESHOLD = "ABOVE_THRESHOLD"


@dataclass(frozen=True)
class ScalingPair:
    alpha: float
    beta: float

    @property
    def in_omega(self) -> bool:
        a, b = self.alpha, self.beta
        return a >= 0 and 5 * a + 6 * b >= 0 and (a, b) != (0, 0)

    def require_omega(self) -> "ScalingPair":
        if not self.in_omega:
            raise InvalidArgument(f"({self.alpha}, {self.beta}) is not in Omega")
        return self

    # exponential growth rates of G, Q and P along the dilation
    def rate_grad(self) -> float:
        return 2 * (self.alpha + self.beta)

    def rate_l4(self) -> float:
        return 4 * (self.alpha + self.beta)

    def rate_l10_3(self) -> float:
        return 10 * self.alpha / 3 + 4 * self.beta


CANONICAL_PAIR = ScalingPair(2.0, -1.0)


@dataclass(frozen=True)
class Norms:
    mass: float
    grad_sq: float
    l4_4: float
    l10_3: float

    @property
    def energy(self) -> float:
        return self.grad_sq / 2 - self.l4_4 / 4 + 0.3 * self.l10_3

    @property
    def energy_c(self) -> float:
        return self.grad_sq / 2 - self.l4_4 / 4

    @property
    def energy_scale(self) -> float:
        """Sum of the absolute energy terms; >= |energy|."""
        return self.grad_sq / 2 + self.l4_4 / 4 + 0.3 * self.l10_3


def field_norms(u: Field, truncate: bool = False) -> Norms:
    a2 = np.abs(u.values) ** 2
    w = u.grid.weights
    return Norms(
        mass=float(np.dot(w, a2)),
        grad_sq=grad_sq(u, truncate),
        l4_4=float(np.dot(w, a2 * a2)),
        l10_3=float(np.dot(w, a2 ** (5.0 / 3.0))),
    )


def _norms(u) -> Norms:
    return u if isinstance(u, Norms) else field_norms(u)


def mass(u: Field) -> float:
    return _norms(u).mass


def energy(u: Field) -> float:
    return _norms(u).energy


def energy_c(u: Field) -> float:
    return _norms(u).energy_c


def mu_bar(p: ScalingPair) -> float:
    return max(p.rate_grad(), p.rate_l10_3())


def k_functional(u, p: ScalingPair) -> float:
    n = _norms(u)
    a, b = p.alpha, p.beta
    return (a + b) * (n.grad_sq - n.l4_4) + (a + 1.2 * b) * n.l10_3


def k_c_functional(u, p: ScalingPair) -> float:
    n = _norms(u)
    return (p.alpha + p.beta) * (n.grad_sq - n.l4_4)


def _h_pieces(n: Norms, p: ScalingPair, with_l10_3: bool) -> tuple[float, float]:
    """Both branches of (1 - L/mu_bar) applied to E (or E_c)."""
    a, b = p.alpha, p.beta
    low = n.l4_4 / 4
    if with_l10_3:
        low -= (2 * a + 3 * b) / (10 * (a + b)) * n.l10_3
    high = (2 * a + 3 * b) / (10 * a + 12 * b) * n.grad_sq + a / (20 * a + 24 * b) * n.l4_4
    return low, high


def h_functional(u, p: ScalingPair) -> float:
    p.require_omega()
    low, high = _h_pieces(_norms(u), p, with_l10_3=True)
    return low if 2 * p.alpha + 3 * p.beta < 0 else high


def h_c_functional(u, p: ScalingPair) -> float:
    p.require_omega()
    low, high = _h_pieces(_norms(u), p, with_l10_3=False)
    return low if 2 * p.alpha + 3 * p.beta < 0 else high


def h_branches(u, p: ScalingPair, compensated: bool = False) -> tuple[float, float]:
    """(low branch, high branch) of H (or H^c if ``compensated``); for consistency checks."""
    return _h_pieces(_norms(u), p, with_l10_3=not compensated)


def second_scaling_identity(u, p: ScalingPair) -> float:
    """Closed form of L(mu_bar - L)E, piecewise in the sign of 2a + 3b."""
    n = _norms(u)
    a, b = p.alpha, p.beta
    if 2 * a + 3 * b <= 0:
        return 2 * (a + b) ** 2 * n.l4_4 - 2.0 / 15.0 * (2 * a + 3 * b) * (5 * a + 6 * b) * n.l10_3
    return (2 * a / 3 + b) * (2 * a + 2 * b) * n.grad_sq + 2 * a / 3 * (a + b) * n.l4_4


def first_scaling_identity(u, p: ScalingPair) -> float:
    """Closed form of (mu_bar - L)E."""
    n = _norms(u)
    a, b = p.alpha, p.beta
    if 2 * a + 3 * b <= 0:
        return (a + b) / 2 * n.l4_4 - (2 * a + 3 * b) / 5 * n.l10_3
    return (2 * a / 3 + b) * n.grad_sq + a / 6 * n.l4_4


def scale_field(u: Field, p: ScalingPair, lam: float) -> Field:
    """v(r) = e^{a*lam} u(e^{-b*lam} r), zero where e^{-b*lam} r > r_max.

    Resampling uses a cubic spline: the finite-difference checks of the
    scaling identities divide the resampling error by lam^2, which linear
    interpolation does not survive.
    """
    if lam == 0:
        return u
    r = u.grid.nodes
    x = math.exp(-p.beta * lam) * r
    inside = x <= r[-1]
    v = np.zeros(r.size, dtype=complex)
    v[inside] = make_interp_spline(r, u.values, k=3)(x[inside])
    return u.with_values(math.exp(p.alpha * lam) * v)


def scaling_truncation(u: Field, p: ScalingPair, lam: float) -> float:
    """Fraction of the mass of ``u`` pushed beyond r_max by :func:`scale_field`."""
    total = mass(u)
    if total == 0:
        return 0.0
    cut = math.exp(-p.beta * lam) * u.grid.r_max
    outside = u.grid.nodes > cut
    lost = float(np.dot(u.grid.weights[outside], np.abs(u.values[outside]) ** 2))
    return lost / total


def _energy_along_dilation(u: Field, p: ScalingPair, lam: float) -> float:
    return energy(scale_field(u, p, lam))


def lambda_derivative_residual(u: Field, p: ScalingPair, h_fd: float) -> float:
    """Relative gap between the centred lambda-derivative of E and K_{a,b}."""
    if not 1e-6 <= h_fd <= 1e-2:
        raise InvalidArgument(f"h_fd must lie in [1e-6, 1e-2], got {h_fd}")
    fd = (_energy_along_dilation(u, p, h_fd) - _energy_along_dilation(u, p, -h_fd)) / (2 * h_fd)
    k = k_functional(u, p)
    return abs(fd - k) / max(1.0, abs(k))


def lambda_second_derivative_residual(u: Field, p: ScalingPair, h_fd: float) -> float:
    """Relative gap between d^2/dlam^2 E and mu_bar*K - L(mu_bar - L)E.

    The derivative is the fourth-order central difference on five points.
    The right-hand side is often a small difference of terms of size E, and
    the h^2/12 error of the three-point rule can exceed it.
    """
    if not 1e-6 <= h_fd <= 1e-1:
        raise InvalidArgument(f"h_fd must lie in [1e-6, 1e-1], got {h_fd}")
    f = {k: _energy_along_dilation(u, p, k * h_fd) for k in (-2, -1, 1, 2)}
    fd2 = (16 * (f[1] + f[-1]) - (f[2] + f[-2]) - 30 * energy(u)) / (12 * h_fd**2)
    rhs = mu_bar(p) * k_functional(u, p) - second_scaling_identity(u, p)
    return abs(fd2 - rhs) / max(1.0, abs(rhs))


def classify_norms(n: Norms, m: float, p: ScalingPair = CANONICAL_PAIR) -> RegionLabel:
    if not m > 0:
        raise InvalidArgument(f"threshold must be positive, got {m}")
    if not n.energy < m:
        return RegionLabel.ABOVE_THRESHOLD
    return RegionLabel.K_PLUS if k_functional(n, p) >= 0 else RegionLabel.K_MINUS


def classify(u: Field, m: float) -> RegionLabel:
    return classify_norms(field_norms(u), m)


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    energy: float
    energy_c: float
    grad_sq: float
    l4_4: float
    l10_3: float
    k: float
    k_c: float
    h: float
    h_c: float
    label: RegionLabel

    def to_json(self) -> str:
        d = asdict(self)
        d["label"] = self.label.value
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "FunctionalReport":
        d = json.loads(text)
        d["label"] = RegionLabel(d["label"])
        return cls(**d)


def functional_report(u, m: float, p: ScalingPair = CANONICAL_PAIR) -> FunctionalReport:
    n = _norms(u)
    return FunctionalReport(
        mass=n.mass,
        energy=n.energy,
        energy_c=n.energy_c,
        grad_sq=n.grad_sq,
        l4_4=n.l4_4,
        l10_3=n.l10_3,
        k=k_functional(n, p),
        k_c=k_c_functional(n, p),
        h=h_functional(n, p),
        h_c=h_c_functional(n, p),
        label=classify_norms(n, m, p),
    )

