"""Small Gaussian below the threshold: conservation, decay and the scattering monitor.

    python scripts/scattering_run.py --out runs/scattering
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from cnls_lab.experiments import PRESETS, run_evolve


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=0.5, help="Gaussian amplitude")
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--out", default="runs/scattering")
    args = p.parse_args()

    cfg = PRESETS["scattering"]
    cfg = replace(cfg, initial=replace(cfg.initial, a=args.a), solver=replace(cfg.solver, t_end=args.t_end))
    res = run_evolve(cfg, Path(args.out))
    s = res.series
    mass, energy = s.column("mass"), s.column("energy")
    print(json.dumps(res.summary, indent=1, sort_keys=True))
    print(f"mass drift   {np.max(np.abs(mass - mass[0])) / mass[0]:.2e}")
    print(f"energy drift {np.max(np.abs(energy - energy[0])) / abs(energy[0]):.2e}")
    print(f"labels       {sorted(set(s.column('label')))}")
    print(f"files in     {res.out_dir}")


if __name__ == "__main__":
    main()
