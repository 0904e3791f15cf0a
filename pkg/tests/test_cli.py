import json

import numpy as np
import pytest

from cnls_lab.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, main
from cnls_lab.experiments import OUT_ENV, PRESETS, RunConfig, load_config, read_scan, run_scan
from cnls_lab.grid import Field, RadialGrid, read_snapshot, write_snapshot


@pytest.fixture(autouse=True)
def out_root(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "runs"))
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_verify_passes_with_stable_json(capsys):
    code, out = run(capsys, "verify", "--json")
    assert code == EXIT_OK
    rep = json.loads(out.out)
    assert set(rep) == {"grid", "refs", "residuals", "checks", "pass", "version"}
    assert set(rep["checks"]) == {"threshold", "grad_w_sq", "pohozaev", "lambda_first", "lambda_second", "branches"}
    assert rep["pass"] and all(rep["checks"].values())
    assert abs(rep["refs"]["m_rel_error"]) < 1e-3


def test_verify_coarse_grid_fails(capsys):
    code, out = run(capsys, "verify", "--json", "--n", "200")
    assert code == EXIT_CHECK
    assert not json.loads(out.out)["pass"]
    code, out = run(capsys, "verify", "--json", "--r-max", "20", "--n", "200")
    assert code == EXIT_CHECK
    assert not json.loads(out.out)["checks"]["pohozaev"]


def test_usage_errors_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["scan"])  # --a is required
    assert exc.value.code == EXIT_USAGE
    code, out = run(capsys, "scan", "--a", "1,x")
    assert code == EXIT_USAGE and "error" in out.err


def test_minimize_writes_artifacts(capsys, tmp_path):
    code, out = run(capsys, "minimize", "--json", "--out", str(tmp_path / "min"))
    assert code == EXIT_OK
    rep = json.loads(out.out)
    assert rep["converged"] and rep["rel_error"] < 0.02
    lines = (tmp_path / "min" / "iterations.csv").read_text().splitlines()
    assert lines[0].startswith("# grid=")
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header == "iter,value,grad_norm,step"
    u, _ = read_snapshot(tmp_path / "min" / "minimizer.snap")
    assert u.grid == RadialGrid(50.0, 2000)


def test_minimize_zero_seed_is_a_usage_error(capsys, tmp_path):
    seed = tmp_path / "zero.snap"
    write_snapshot(seed, Field.zeros(RadialGrid(10.0, 100)))
    code, out = run(capsys, "minimize", "--seed-file", str(seed), "--out", str(tmp_path / "m"))
    assert code == EXIT_USAGE and "nonzero" in out.err


def test_minimize_unconverged_exits_2(capsys, tmp_path):
    code, _ = run(capsys, "minimize", "--seed", "lorentz", "--max-iters", "2", "--out", str(tmp_path / "m"))
    assert code == EXIT_CHECK


def test_evolve_zero_data(capsys, tmp_path):
    out_dir = tmp_path / "zero"
    code, out = run(capsys, "evolve", "--zero", "--t-end", "0.1", "--json", "--out", str(out_dir))
    assert code == EXIT_OK
    assert json.loads(out.out)["outcome"] == "COMPLETED"
    text = (out_dir / "series.csv").read_text().splitlines()
    rows = [ln.split(",") for ln in text if not ln.startswith(("#", "{", "t,"))]
    assert len(rows) == 2
    for row in rows:
        assert all(float(x) == 0 for x in row[1:8])
    assert json.loads(text[-1])["outcome"] == "COMPLETED"
    u, t = read_snapshot(out_dir / "final.snap")
    assert t == pytest.approx(0.1) and not np.any(u.values)


def test_evolve_is_deterministic(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "[grid]\nr_max = 15\nn = 600\n[solver]\nt_end = 0.05\nrecord_stride = 10\n"
        "[initial]\nkind = gaussian\na = 0.7\n[diagnostics]\nvirial_r = 1, 2\nmorawetz_r = 1\nsnapshots = yes\n"
    )
    outs = []
    for name in ("a", "b"):
        code, _ = run(capsys, "evolve", "--config", str(cfg), "--out", str(tmp_path / name))
        assert code == EXIT_OK
        outs.append(tmp_path / name)
    for f in ("series.csv", "virial.csv", "morawetz.csv", "final.snap", "outcome.json"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    snaps = sorted((outs[0] / "snapshots").glob("*.snap"))
    assert len(snaps) >= 2

    # the morawetz subcommand reads the run directory back
    code, out = run(capsys, "morawetz", str(outs[0]), "--r", "1,2", "--r0", "2", "--n-theta", "64")
    assert code == EXIT_OK
    body = out.out.splitlines()
    assert body[2] == "t,R,M_R"
    assert "t,M" in body
    assert len([ln for ln in body if ln.count(",") == 2]) == 2 * len(snaps) + 1


def test_morawetz_of_real_snapshot_is_zero(capsys, tmp_path):
    g = RadialGrid(10.0, 200)
    path = tmp_path / "real.snap"
    write_snapshot(path, Field(g, np.exp(-g.nodes**2)), 0.0)
    code, out = run(capsys, "morawetz", str(path), "--r", "1,2", "--r0", "1", "--n-theta", "64")
    assert code == EXIT_OK
    vals = [float(ln.split(",")[-1]) for ln in out.out.splitlines()[3:] if not ln.startswith("t,")]
    assert vals == [0.0, 0.0, 0.0]


def test_config_parsing(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("[grid]\nr_max = 40\nn = 4000\n[initial]\nkind = rescaled_w\nlam = 4\n[diagnostics]\nstrichartz = true\n")
    cfg = load_config(p)
    assert (cfg.r_max, cfg.n, cfg.initial.kind, cfg.initial.lam, cfg.strichartz) == (40.0, 4000, "rescaled_w", 4.0, True)
    assert cfg.digest() == load_config(p).digest()
    assert cfg.digest() != RunConfig().digest()
    for bad in ("[nope]\nx = 1\n", "[solver]\nbogus = 1\n", "[grid]\nn = ten\n", "[diagnostics]\nvirial_r = 20\n"):
        p.write_text(bad)
        with pytest.raises(ValueError):
            load_config(p)
    with pytest.raises(ValueError):
        load_config(tmp_path / "missing.cfg")
    assert PRESETS["scattering"].initial.a == 0.5


def test_scan_classifies(capsys, tmp_path):
    path = tmp_path / "g.csv"
    code, out = run(capsys, "scan", "--a", "0.3,0.5,3", "--out", str(path))
    assert code == EXIT_OK
    rows = read_scan(path)
    assert [r[3] for r in rows] == ["K_PLUS", "K_PLUS", "ABOVE_THRESHOLD"]
    assert float(rows[2][6]) == pytest.approx(80.369, rel=1e-4)
    assert path.read_text().startswith("# family=gaussian")


def test_scan_records_errors_in_row(tmp_path):
    rows = run_scan(tmp_path / "e.csv", "rescaled_w", [1.0], [0.5], grid=RadialGrid(10.0, 500))
    assert rows[0][3] == "ERROR" and "InvalidArgument" in rows[0][4]


def test_scan_resume_and_jobs_give_the_same_table(tmp_path):
    grid = RadialGrid(15.0, 600)
    args = dict(family="gaussian", a_values=[0.3, 0.5, 1.0, 3.0], lam_values=[1.0, 2.0], grid=grid, t_end=0.02)
    full = run_scan(tmp_path / "full.csv", **args)
    assert len(full) == 8
    # a partial table (as left by a killed scan) then a resume
    part = tmp_path / "part.csv"
    run_scan(part, **dict(args, a_values=[0.3, 0.5]))
    resumed = run_scan(part, **dict(args, resume=True))
    assert resumed == full
    assert part.read_bytes() == (tmp_path / "full.csv").read_bytes()
    par = run_scan(tmp_path / "par.csv", **dict(args, jobs=2))
    assert par == full


def test_scan_rescaled_w_labels(capsys, tmp_path):
    path = tmp_path / "w.csv"
    code, _ = run(capsys, "scan", "--family", "rescaled_w", "--a", "1.2,1.5", "--lam", "16,32", "--out", str(path))
    assert code == EXIT_OK
    labels = {(float(r[1]), float(r[2])): r[3] for r in read_scan(path)}
    assert labels == {
        (1.2, 16.0): "ABOVE_THRESHOLD",
        (1.2, 32.0): "ABOVE_THRESHOLD",
        (1.5, 16.0): "K_MINUS",
        (1.5, 32.0): "K_MINUS",
    }
