"""Concentrated ground state with negative virial functional: collapse and virial concavity.

    python scripts/blowup_run.py --a 1.5 --lam 32
"""

import argparse

import numpy as np

from cnls_lab.diagnostics import build_virial_weight, virial_dtt
from cnls_lab.evolution import BLOWUP_GRID, SolverConfig, evolve
from cnls_lab.functionals import functional_report
from cnls_lab.ground_state import compute_refs, preset_rescaled_w


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=1.5)
    p.add_argument("--lam", type=float, default=32.0)
    p.add_argument("--r-cut", type=float, default=6.0)
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--radii", default="1,2,4,6")
    args = p.parse_args()

    grid = BLOWUP_GRID
    refs = compute_refs()
    u0 = preset_rescaled_w(grid, args.a, args.lam, args.r_cut)
    rep = functional_report(u0, refs.m)
    print(f"E = {rep.energy:.4f}  m = {refs.m:.4f}  K(2,-1) = {rep.k:.4f}  label {rep.label.value}")

    radii = [float(x) for x in args.radii.split(",")]
    probes = {f"Vtt_{R:g}": (lambda u, w=build_virial_weight(grid, R): virial_dtt(u, w)) for R in radii}
    outcome, series = evolve(u0, SolverConfig(t_end=args.t_end, record_stride=10), probes=probes)
    print(f"{outcome.kind.value} at t = {outcome.t:.6g} ({outcome.reason})")
    grad = series.column("grad_l2")
    print(f"|grad u| / |grad W|: min {grad.min() / refs.grad_w:.3f}, last {grad[-1] / refs.grad_w:.3f}")
    for R in radii:
        v = series.column(f"Vtt_{R:g}")
        print(f"R = {R:g}: V_tt < 0 at {np.sum(v < 0)}/{v.size} records, last {v[-1]:.4g}")


if __name__ == "__main__":
    main()
