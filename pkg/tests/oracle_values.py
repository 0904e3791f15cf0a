"""Reference values computed independently of the package and frozen here.

Each number was produced by adaptive quadrature (scipy.integrate.quad,
relative tolerance 1e-13) of the 4D radial integral 2 pi^2 int r^3 f dr, or
is a closed form; test_oracles.py recomputes all of them.
"""

import math

import numpy as np

PI2 = math.pi**2

# int_{R^4} exp(-|x|^2) = pi^2
GAUSS_E_R2 = 9.869604401089358

# W(r) = (1 + r^2/8)^{-1}: Beta integrals B(3, 1), B(2, 2), B(2, 4/3)
GRAD_W_SQ = 105.27578027828648  # 32 pi^2 / 3
W_L4_4 = 105.27578027828648  # 32 pi^2 / 3, also int (1 + r^2/8)^{-4}
W_L10_3 = 203.0318619652667  # 2 pi^2 * 32 * 9/28
M_THRESHOLD = 26.318945069571622  # 8 pi^2 / 3
C4 = 0.31218920569777797  # (32 pi^2 / 3)^{-1/4}

# g(r) = exp(-r^2/2)
GAUSS_MASS = 9.869604401089358  # pi^2
GAUSS_GRAD_SQ = 19.739208802178716  # 2 pi^2
GAUSS_L4_4 = 2.46740110027234  # pi^2 / 4
GAUSS_L10_3 = 3.553057584392169  # 9 pi^2 / 25
GAUSS_L10_3_NORM = 1.4627855914279988  # (9 pi^2 / 25)^{3/10}
GAUSS_ENERGY = 10.318671401338923
GAUSS_SECOND_MOMENT = 19.739208802178716  # int |x|^2 g^2 = 2 pi^2
GAUSS_QUOTIENT = 39.47841760435743  # (1/4) (2 pi^2)^2 / (pi^2 / 4) = 4 pi^2
GAUSS_H_2M1 = 2.775826237806382  # G/8 + Q/8
GAUSS_VIRIAL_DTT_R2 = 160.91403015536088  # 8 G - 8 Q + (32/5) P with phi = r^2

# a * g: energy and K_{2,-1}
SCALED_GAUSS = {
    0.3: (0.9025340328162957, 1.8079191738073581),
    0.5: (2.534600345839979, 5.062595999136043),
    3.0: (80.36917310166274, 88.48033882387796),
}

# int_0^pi (1 - cos t) sin^2 t dt
ANGULAR = math.pi / 2

# int_{R^4} psi^4 for the C^4 bump psi (1 on [0, 1], 0 beyond 2)
PSI4 = 16.626346818305443


def free_gaussian(r, t):
    """exp(i t Delta) exp(-|x|^2/2) on R^4."""
    s = 1 + 2j * t
    return s**-2 * np.exp(-(r**2) / (2 * s))
