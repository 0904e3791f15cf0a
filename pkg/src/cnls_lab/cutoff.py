"""C^4 radial cutoff: 1 on [0, 1], 0 on [2, inf), degree-9 transition."""

import numpy as np

# 1 - S(t) with S(t) = t^5 (126 - 420 t + 540 t^2 - 315 t^3 + 70 t^4), the unique
# degree-9 step with S^(k)(0) = S^(k)(1) = 0 for k = 1..4.
_STEP = np.polynomial.Polynomial([0, 0, 0, 0, 0, 126, -420, 540, -315, 70])


def c4_cutoff(x):
    t = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - _STEP(t)


def c4_cutoff_derivative(x, order: int = 1):
    t = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return -_STEP.deriv(order)(t)
