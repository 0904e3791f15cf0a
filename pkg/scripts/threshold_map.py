"""Classify concentrated ground states over a grid of (a, lam) and print the region map.

    python scripts/threshold_map.py --a 0.6,0.9,1.2,1.5 --lam 1,8,32,128
"""

import argparse

from cnls_lab.functionals import classify_norms, field_norms
from cnls_lab.grid import RadialGrid
from cnls_lab.ground_state import compute_refs, preset_rescaled_w

SHORT = {"K_PLUS": "K+", "K_MINUS": "K-", "ABOVE_THRESHOLD": "E>m"}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", default="0.6,0.9,1.1,1.2,1.5")
    p.add_argument("--lam", default="1,8,32,128")
    p.add_argument("--r-cut", type=float, default=6.0)
    p.add_argument("--r-max", type=float, default=20.0)
    p.add_argument("--n", type=int, default=65536)
    args = p.parse_args()

    grid = RadialGrid(args.r_max, args.n)
    m = compute_refs().m
    a_vals = [float(x) for x in args.a.split(",")]
    lams = [float(x) for x in args.lam.split(",")]
    print("a \\ lam " + "".join(f"{lam:>14g}" for lam in lams))
    for a in a_vals:
        cells = []
        for lam in lams:
            n = field_norms(preset_rescaled_w(grid, a, lam, args.r_cut))
            cells.append(f"{SHORT[classify_norms(n, m).value]:>5} E={n.energy:6.2f}")
        print(f"{a:<8g}" + "".join(f"{c:>14}" for c in cells))


if __name__ == "__main__":
    main()
