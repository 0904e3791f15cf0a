"""Command line: verify, minimize, evolve, scan, morawetz.

Exit codes: 0 success, 2 a check failed, 3 usage or configuration error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .diagnostics import build_morawetz_kernel, build_morawetz_ladder, morawetz_m, morawetz_mr
from .errors import DomainTooSmall, IncompatibleGrid, InvalidArgument, NumericFailure
from .experiments import (
    PRESETS,
    RunConfig,
    VERSION,
    default_scan_grid,
    fmt,
    load_config,
    output_root,
    run_evolve,
    run_scan,
)
from .functionals import (
    ScalingPair,
    h_branches,
    lambda_derivative_residual,
    lambda_second_derivative_residual,
    mu_bar,
)
from .ground_state import GRAD_W_SQ_EXACT, M_EXACT, compute_refs, gaussian, pohozaev_residual
from .grid import Field, RadialGrid, read_snapshot, write_snapshot
from .variational import MinimizeConfig, minimize_quotient

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=1, sort_keys=True))
        return
    for k, v in report.items():
        if isinstance(v, dict):
            print(f"{k}:")
            for kk, vv in v.items():
                print(f"  {kk}: {fmt(vv)}")
        else:
            print(f"{k}: {fmt(v)}")


# ---------------------------------------------------------------------------
# verify


def _lambda_suite(seed: int = 0, n_fields: int = 20, n_pairs: int = 5):
    """Worst residuals of the two scaling identities on random smooth fields."""
    rng = np.random.default_rng(seed)
    grid = RadialGrid(15.0, 15000)
    r = grid.nodes
    worst1 = worst2 = 0.0
    for _ in range(n_fields):
        v = np.zeros(r.size, dtype=complex)
        for _ in range(rng.integers(1, 4)):
            v += rng.uniform(0.2, 1.5) * np.exp(-((r / rng.uniform(0.6, 1.5)) ** 2) / 2 + 1j * rng.uniform(-1, 1) * r)
        u = Field(grid, v)
        for _ in range(n_pairs):
            a = rng.uniform(0.05, 2.0)
            p = ScalingPair(a, rng.uniform(-5 * a / 6, 2.0))
            worst1 = max(worst1, lambda_derivative_residual(u, p, 1e-4))
            worst2 = max(worst2, lambda_second_derivative_residual(u, p, 2e-3))
    return worst1, worst2


def _branch_gap() -> float:
    """Largest relative gap between the two branches on the line 2a + 3b = 0."""
    u = gaussian(RadialGrid(15.0, 1500))
    gap = 0.0
    for a in (0.3, 1.0, 3.0):
        p = ScalingPair(a, -2 * a / 3)
        for compensated in (False, True):
            lo, hi = h_branches(u, p, compensated)
            gap = max(gap, abs(lo - hi) / max(abs(lo), abs(hi)))
        gap = max(gap, abs(2 * (p.alpha + p.beta) - (10 * p.alpha / 3 + 4 * p.beta)) / mu_bar(p))
    return gap


def cmd_verify(args) -> int:
    grid = RadialGrid(args.r_max, args.n)
    refs = compute_refs(grid)
    poh = pohozaev_residual(grid)
    d1, d2 = _lambda_suite()
    gap = _branch_gap()
    checks = {
        "threshold": abs(refs.m - M_EXACT) / M_EXACT < 1e-3,
        "grad_w_sq": abs(refs.grad_w_sq - GRAD_W_SQ_EXACT) / GRAD_W_SQ_EXACT < 1e-3,
        "pohozaev": poh < 1e-3,
        "lambda_first": d1 < 1e-5,
        "lambda_second": d2 < 1e-4,
        "branches": gap < 1e-12,
    }
    report = {
        "grid": {"r_max": grid.r_max, "n": grid.n},
        "refs": {
            "grad_w_sq": refs.grad_w_sq,
            "grad_w_sq_exact": refs.grad_w_sq_exact,
            "w_l4_4": refs.w_l4_4,
            "m": refs.m,
            "m_exact": refs.m_exact,
            "m_rel_error": (refs.m - M_EXACT) / M_EXACT,
            "c4": refs.c4,
        },
        "residuals": {
            "pohozaev": poh,
            "lambda_first": d1,
            "lambda_second": d2,
            "branch_gap": gap,
        },
        "checks": checks,
        "pass": all(checks.values()),
        "version": VERSION,
    }
    _emit(report, args.json)
    return EXIT_OK if report["pass"] else EXIT_CHECK


# ---------------------------------------------------------------------------
# minimize

SEEDS = {
    "gaussian": lambda r: np.exp(-(r**2) / 2),
    "w": lambda r: 1.0 / (1.0 + r**2 / 8),
    "lorentz": lambda r: 1.0 / (1.0 + r**2),
}


def cmd_minimize(args) -> int:
    grid = RadialGrid(args.r_max, args.n)
    if args.seed_file:
        seed, _ = read_snapshot(args.seed_file)
    else:
        seed = Field.from_function(grid, SEEDS[args.seed])
    cfg = MinimizeConfig(max_iters=args.max_iters, step0=args.step0, tol_grad=args.tol_grad, tol_value=args.tol_value)
    res = minimize_quotient(seed, cfg)
    out = Path(args.out or output_root() / "minimize")
    out.mkdir(parents=True, exist_ok=True)
    meta = {"grid": f"r_max={fmt(grid.r_max)} n={grid.n}", "seed": args.seed_file or args.seed, "version": VERSION}
    with open(out / "iterations.csv", "w") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write("iter,value,grad_norm,step\n")
        for rec in res.history:
            fh.write(f"{rec.iteration},{fmt(rec.value)},{fmt(rec.grad_norm)},{fmt(rec.step)}\n")
    write_snapshot(out / "minimizer.snap", res.minimizer)
    m = compute_refs().m
    rel = abs(res.value - m) / m
    report = {
        "value": res.value,
        "m_numeric": m,
        "rel_error": rel,
        "iterations": res.iterations,
        "converged": res.converged,
        "reason": res.reason,
        "out_dir": str(out),
    }
    _emit(report, args.json)
    return EXIT_OK if res.converged and rel <= 0.02 else EXIT_CHECK


# ---------------------------------------------------------------------------
# evolve


def _evolve_config(args) -> RunConfig:
    cfg = PRESETS[args.preset] if args.preset else RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    if args.t_end is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, t_end=args.t_end))
    if args.zero:
        cfg = replace(cfg, initial=replace(cfg.initial, kind="gaussian", a=0.0))
    if args.snapshots:
        cfg = replace(cfg, snapshots=True)
    return cfg.validate()


def cmd_evolve(args) -> int:
    cfg = _evolve_config(args)
    out = Path(args.out) if args.out else None
    res = run_evolve(cfg, out)
    report = {**res.summary, "out_dir": str(res.out_dir)}
    _emit(report, args.json)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan


def _values(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"not a comma separated list of numbers: {text!r}") from None


def cmd_scan(args) -> int:
    a_vals, lam_vals = _values(args.a), _values(args.lam)
    grid = RadialGrid(args.r_max, args.n) if args.r_max else default_scan_grid(args.family)
    path = Path(args.out or output_root() / f"scan-{args.family}.csv")
    meta = {
        "family": args.family,
        "grid": f"r_max={fmt(grid.r_max)} n={grid.n}",
        "r_cut": fmt(args.r_cut),
        "t_end": fmt(args.t_end),
        "version": VERSION,
    }
    rows = run_scan(path, args.family, a_vals, lam_vals, args.r_cut, grid, args.t_end, args.jobs, args.resume, meta)
    for row in rows:
        print(",".join(row))
    return EXIT_OK


# ---------------------------------------------------------------------------
# morawetz


def _snapshots(path: Path):
    if path.is_dir():
        files = sorted((path / "snapshots").glob("*.snap")) or sorted(path.glob("*.snap"))
        if not files:
            raise UsageError(f"no snapshots under {path}")
    else:
        files = [path]
    for f in files:
        u, t = read_snapshot(f)
        yield (0.0 if t is None else t), u


def cmd_morawetz(args) -> int:
    radii = _values(args.r)
    snaps = list(_snapshots(Path(args.path)))
    grid = snaps[0][1].grid
    kernels = {R: build_morawetz_kernel(grid, R, n_theta=args.n_theta) for R in radii}
    ladder = build_morawetz_ladder(grid, args.r0, n_theta=args.n_theta) if args.r0 > 1 else []
    out = sys.stdout if not args.out else open(args.out, "w")
    try:
        out.write(f"# grid=r_max={fmt(grid.r_max)} n={grid.n}\n# version={VERSION}\n")
        out.write("t,R,M_R\n")
        for t, u in snaps:
            for R, k in kernels.items():
                out.write(f"{fmt(t)},{fmt(R)},{fmt(morawetz_mr(u, k))}\n")
        if ladder or args.r0 == 1:
            out.write("t,M\n")
            for t, u in snaps:
                out.write(f"{fmt(t)},{fmt(morawetz_m(u, args.r0, ladder))}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cnls-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="ground-state constants and scaling identities")
    v.add_argument("--r-max", type=float, default=200.0)
    v.add_argument("--n", type=int, default=20000)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("minimize", help="minimize the Sobolev quotient")
    m.add_argument("--seed", choices=sorted(SEEDS), default="gaussian")
    m.add_argument("--seed-file", help="snapshot file to start from")
    m.add_argument("--r-max", type=float, default=50.0)
    m.add_argument("--n", type=int, default=2000)
    d = MinimizeConfig()
    m.add_argument("--max-iters", type=int, default=d.max_iters)
    m.add_argument("--step0", type=float, default=d.step0)
    m.add_argument("--tol-grad", type=float, default=d.tol_grad)
    m.add_argument("--tol-value", type=float, default=d.tol_value)
    m.add_argument("--out")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_minimize)

    e = sub.add_parser("evolve", help="run the time integrator")
    e.add_argument("--preset", choices=sorted(PRESETS))
    e.add_argument("--config", help="key = value configuration file")
    e.add_argument("--t-end", type=float)
    e.add_argument("--zero", action="store_true", help="use zero initial data")
    e.add_argument("--snapshots", action="store_true", help="write a snapshot at every record")
    e.add_argument("--out")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_evolve)

    s = sub.add_parser("scan", help="classify (and optionally evolve) a grid of data")
    s.add_argument("--family", choices=("gaussian", "rescaled_w"), default="gaussian")
    s.add_argument("--a", required=True, help="comma separated amplitudes")
    s.add_argument("--lam", default="1", help="comma separated concentrations")
    s.add_argument("--r-cut", type=float, default=6.0)
    s.add_argument("--r-max", type=float)
    s.add_argument("--n", type=int, default=3000)
    s.add_argument("--t-end", type=float, default=0.0, help="evolve each point this long (0: classify only)")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--resume", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    w = sub.add_parser("morawetz", help="interaction Morawetz potential of stored snapshots")
    w.add_argument("path", help="snapshot file or run directory")
    w.add_argument("--r", default="1,2,4,8", help="comma separated radii")
    w.add_argument("--r0", type=float, default=0.0, help="also integrate M(t) over [1, r0]")
    w.add_argument("--n-theta", type=int, default=256)
    w.add_argument("--out")
    w.set_defaults(func=cmd_morawetz)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidArgument, IncompatibleGrid, DomainTooSmall, FileNotFoundError) as exc:
        print(f"cnls-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"cnls-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
