"""Run configurations, presets and artifact writers used by the command line."""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .diagnostics import (
    StrichartzAccumulator,
    build_morawetz_kernel,
    build_morawetz_ladder,
    build_virial_weight,
    morawetz_m,
    morawetz_mr,
    strichartz_update,
    virial,
    virial_dt,
    virial_dtt,
)
from .errors import InvalidArgument
from .evolution import BLOWUP_GRID, SCATTERING_GRID, SolverConfig, evolve, scattering_monitor
from .functionals import CANONICAL_PAIR, classify_norms, field_norms, k_functional
from .ground_state import compute_refs, gaussian, preset_rescaled_w
from .grid import RadialGrid, read_snapshot, write_snapshot

try:
    from importlib.metadata import version as _dist_version

    VERSION = _dist_version("artifact")
except Exception:  # running from a source tree
    VERSION = "0.1.0"

OUT_ENV = "CNLS_LAB_OUT"


def output_root(default: str = "runs") -> Path:
    return Path(os.environ.get(OUT_ENV, default))


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


@dataclass(frozen=True)
class InitialData:
    kind: str = "gaussian"  # gaussian | rescaled_w | file
    a: float = 0.5
    width: float = 1.0
    lam: float = 1.0
    r_cut: float = 6.0
    path: str = ""

    def build(self, grid: RadialGrid):
        if self.kind == "gaussian":
            return gaussian(grid, self.a, self.width)
        if self.kind == "rescaled_w":
            return preset_rescaled_w(grid, self.a, self.lam, self.r_cut)
        if self.kind == "file":
            u, _ = read_snapshot(self.path)
            if not u.grid.compatible(grid):
                raise InvalidArgument(f"{self.path} lives on {u.grid}, run grid is {grid}")
            return u
        raise InvalidArgument(f"unknown initial data kind {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    r_max: float = 30.0
    n: int = 3000
    solver: SolverConfig = SolverConfig()
    initial: InitialData = InitialData()
    virial_r: tuple = ()
    morawetz_r: tuple = ()
    morawetz_r0: float = 0.0
    strichartz: bool = False
    snapshots: bool = False
    out_dir: str = ""

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(self.r_max, self.n)

    def validate(self) -> "RunConfig":
        grid = self.grid
        for R in self.virial_r:
            if not (1 <= R and 3 * R <= grid.r_max):
                raise InvalidArgument(f"virial R = {R} does not fit r_max = {grid.r_max}")
        if any(R < 1 for R in self.morawetz_r) or (self.morawetz_r0 and self.morawetz_r0 < 1):
            raise InvalidArgument("Morawetz radii must be >= 1")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out_dir")
        return d

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


PRESETS = {
    # small Gaussian, K+: disperses
    "scattering": RunConfig(
        r_max=SCATTERING_GRID.r_max,
        n=SCATTERING_GRID.n,
        solver=SolverConfig(t_end=20.0),
        initial=InitialData("gaussian", a=0.5),
        virial_r=(1.0, 2.0, 4.0, 8.0),
        morawetz_r=(1.0, 2.0, 4.0, 8.0),
        strichartz=True,
    ),
    # concentrated W profile, K-: collapses
    "blowup": RunConfig(
        r_max=BLOWUP_GRID.r_max,
        n=BLOWUP_GRID.n,
        solver=SolverConfig(t_end=5.0),
        initial=InitialData("rescaled_w", a=1.5, lam=32.0, r_cut=6.0),
        virial_r=(1.0, 2.0, 4.0, 6.0),
    ),
}


# ---------------------------------------------------------------------------
# config files


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Read a ``key = value`` file with [grid], [solver], [initial], [diagnostics], [output]."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise InvalidArgument(f"cannot read config {path}")
    cfg = base or RunConfig()
    known = {"grid", "solver", "initial", "diagnostics", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise InvalidArgument(f"unknown config sections {sorted(unknown)}")
    try:
        if cp.has_section("grid"):
            g = cp["grid"]
            cfg = replace(cfg, r_max=g.getfloat("r_max", cfg.r_max), n=g.getint("n", cfg.n))
        if cp.has_section("solver"):
            cfg = replace(cfg, solver=_update(cfg.solver, cp["solver"]))
        if cp.has_section("initial"):
            cfg = replace(cfg, initial=_update(cfg.initial, cp["initial"]))
        if cp.has_section("diagnostics"):
            d = cp["diagnostics"]
            cfg = replace(
                cfg,
                virial_r=_floats(d.get("virial_r", "")) if "virial_r" in d else cfg.virial_r,
                morawetz_r=_floats(d.get("morawetz_r", "")) if "morawetz_r" in d else cfg.morawetz_r,
                morawetz_r0=d.getfloat("morawetz_r0", cfg.morawetz_r0),
                strichartz=d.getboolean("strichartz", cfg.strichartz),
                snapshots=d.getboolean("snapshots", cfg.snapshots),
            )
        if cp.has_section("output"):
            cfg = replace(cfg, out_dir=cp["output"].get("dir", cfg.out_dir))
    except ValueError as exc:
        raise InvalidArgument(f"{path}: {exc}") from None
    return cfg.validate()


def _update(obj, section):
    kinds = {f.name: f.type for f in fields(obj)}
    changes = {}
    for key, raw in section.items():
        if key not in kinds:
            raise InvalidArgument(f"unknown key {key!r} in [{section.name}]")
        current = getattr(obj, key)
        changes[key] = type(current)(raw) if not isinstance(current, str) else raw
    return replace(obj, **changes)


# ---------------------------------------------------------------------------
# evolve


def csv_header(cfg: RunConfig, extra: dict | None = None) -> dict:
    meta = {
        "config_hash": cfg.digest(),
        "grid": f"r_max={fmt(cfg.r_max)} n={cfg.n}",
        "version": VERSION,
    }
    meta.update(extra or {})
    return meta


def _write_table(path: Path, meta: dict, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


@dataclass
class RunResult:
    outcome: object
    series: object
    out_dir: Path
    summary: dict = field(default_factory=dict)


def run_evolve(cfg: RunConfig, out_dir: Path | None = None) -> RunResult:
    """Evolve ``cfg`` and write series, virial, Morawetz, snapshot and outcome files."""
    cfg.validate()
    grid = cfg.grid
    out = Path(out_dir or cfg.out_dir or output_root() / f"evolve-{cfg.digest()}")
    out.mkdir(parents=True, exist_ok=True)
    u0 = cfg.initial.build(grid)

    weights = {R: build_virial_weight(grid, R) for R in cfg.virial_r}
    kernels = {R: build_morawetz_kernel(grid, R) for R in cfg.morawetz_r}
    ladder = build_morawetz_ladder(grid, cfg.morawetz_r0) if cfg.morawetz_r0 > 1 else []
    virial_rows, morawetz_rows, m_rows = [], [], []
    strich = [StrichartzAccumulator()]
    last = [0.0, 0]  # previous record time, snapshot counter
    snap_dir = out / "snapshots"
    if cfg.snapshots:
        snap_dir.mkdir(exist_ok=True)

    def recorder(t, vals, u):
        for R, w in weights.items():
            virial_rows.append((t, R, virial(u, w), virial_dt(u, w), virial_dtt(u, w)))
        for R, k in kernels.items():
            morawetz_rows.append((t, R, morawetz_mr(u, k)))
        if ladder:
            m_rows.append((t, morawetz_m(u, cfg.morawetz_r0, ladder)))
        if cfg.strichartz and t > last[0]:
            strich[0] = strichartz_update(strich[0], u, t - last[0])
        last[0] = t
        if cfg.snapshots:
            write_snapshot(snap_dir / f"{last[1]:06d}.snap", u, t)
            last[1] += 1

    outcome, series = evolve(u0, cfg.solver, recorder=recorder, keep_snapshots=True)
    meta = csv_header(cfg)
    (out / "series.csv").write_text(series.to_csv(outcome, meta))
    if weights:
        _write_table(out / "virial.csv", meta, ["t", "R", "V", "V_t", "V_tt"], virial_rows)
    if kernels or ladder:
        _write_table(out / "morawetz.csv", meta, ["t", "R", "M_R"], morawetz_rows)
    if ladder:
        _write_table(out / "morawetz_m.csv", meta, ["t", "M"], m_rows)
    final_t, final_u = series.snapshots[-1]
    write_snapshot(out / "final.snap", final_u, final_t)
    summary = {"config_hash": cfg.digest(), **outcome.to_dict()}
    l4 = series.column("l4")
    if l4[0] > 0:
        summary["l4_ratio"] = float(l4[-1] / l4[0])
    if len(series.snapshots) >= 2 and outcome.kind.value == "COMPLETED":
        d = scattering_monitor(series.snapshots)
        summary["scatter_first"] = float(d[0])
        summary["scatter_last"] = float(d[-1])
    if cfg.strichartz:
        fin = strich[0].finalize()
        summary.update({k: fin[k] for k in ("W1", "W2", "V0")})
    (out / "outcome.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    series.snapshots = None  # release memory
    return RunResult(outcome, series, out, summary)


# ---------------------------------------------------------------------------
# scan

SCAN_COLUMNS = ["family", "a", "lam", "label", "outcome", "t_detect", "E", "K_2m1"]


def default_scan_grid(family: str) -> RadialGrid:
    return BLOWUP_GRID if family == "rescaled_w" else RadialGrid(30.0, 3000)


def scan_point(family: str, a: float, lam: float, r_cut: float, grid: RadialGrid, t_end: float, m: float) -> list:
    """Classify one (a, lam) point, optionally evolve it; errors go into the row."""
    try:
        if family == "gaussian":
            u = gaussian(grid, a, 1.0 / lam)
        elif family == "rescaled_w":
            u = preset_rescaled_w(grid, a, lam, r_cut)
        else:
            raise InvalidArgument(f"unknown family {family!r}")
        n = field_norms(u)
        label = classify_norms(n, m).value
        outcome, t_detect = "", ""
        if t_end > 0:
            oc, _ = evolve(u, SolverConfig(t_end=t_end))
            outcome = oc.kind.value
            t_detect = oc.t if oc.t_detect is not None else ""
        return [family, a, lam, label, outcome, t_detect, n.energy, k_functional(n, CANONICAL_PAIR)]
    except Exception as exc:  # recorded in the row; the scan carries on
        return [family, a, lam, "ERROR", f"{type(exc).__name__}: {exc}", "", "", ""]


def _scan_task(args):
    return scan_point(*args)


def read_scan(path: Path) -> list[list[str]]:
    if not path.exists():
        return []
    lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[1:] if rows and rows[0] == SCAN_COLUMNS else rows


def run_scan(
    path: Path,
    family: str,
    a_values,
    lam_values,
    r_cut: float = 6.0,
    grid: RadialGrid | None = None,
    t_end: float = 0.0,
    jobs: int = 1,
    resume: bool = False,
    meta: dict | None = None,
) -> list[list[str]]:
    """Scan (a, lam) in row-major order, appending each row as it completes.

    Rows are written in scan order whatever ``jobs`` is, so the table is the
    same for serial and parallel runs.  With ``resume`` the points already in
    the file are skipped.
    """
    grid = grid or default_scan_grid(family)
    m = compute_refs().m
    points = [(float(a), float(lam)) for a in a_values for lam in lam_values]
    path.parent.mkdir(parents=True, exist_ok=True)
    done = set()
    if resume and path.exists():
        done = {(float(r[1]), float(r[2])) for r in read_scan(path) if len(r) >= 3}
    else:
        with open(path, "w", newline="") as fh:
            for k, v in (meta or {}).items():
                fh.write(f"# {k}={v}\n")
            csv.writer(fh, lineterminator="\n").writerow(SCAN_COLUMNS)
    todo = [(family, a, lam, r_cut, grid, t_end, m) for a, lam in points if (a, lam) not in done]

    def append(row):
        with open(path, "a", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow([fmt(x) for x in row])
            fh.flush()
            os.fsync(fh.fileno())

    if jobs > 1 and len(todo) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for row in pool.map(_scan_task, todo):
                append(row)
    else:
        for task in todo:
            append(_scan_task(task))
    return read_scan(path)
