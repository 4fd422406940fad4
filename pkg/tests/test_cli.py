import csv
import json

import pytest

from locelm.cli import SWEEP_COLUMNS, main

HELM = {
    "problem": "helmholtz1d",
    "partition": {"counts": [4]},
    "collocation": {"distribution": "uniform", "q": [100]},
    "network": {"hidden_widths": [100], "r_m": 3.0, "seed": 1},
    "solver": {"kind": "linear"},
}


def _write(tmp_path, cfg, name="run.json"):
    cfg = json.loads(json.dumps(cfg))
    cfg.setdefault("output", {
        "report": str(tmp_path / f"{name}.report.json"),
        "values": str(tmp_path / f"{name}.values.csv"),
    })
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path, cfg


def _strip_times(report):
    report = dict(report)
    report.pop("solve_time")
    report["blocks"] = [{k: v for k, v in b.items() if k != "solve_time"} for b in report["blocks"]]
    return report


def test_solve_writes_report_and_values(tmp_path):
    path, cfg = _write(tmp_path, HELM)
    assert main(["solve", str(path)]) == 0
    rep = json.loads(open(cfg["output"]["report"]).read())
    assert rep["max_error"] <= 1e-6 and rep["rms_error"] <= rep["max_error"]
    assert rep["grid_shape"] == [201]
    with open(cfg["output"]["values"]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "computed", "exact", "abs_error"]
    assert len(rows) == 202
    assert max(float(r[3]) for r in rows[1:]) == pytest.approx(rep["max_error"], rel=1e-12)


def test_time_dependent_value_columns(tmp_path):
    cfg = {"problem": "diffusion1d", "t_final": 0.5, "n_blocks": 2, "partition": {"counts": [2, 1]},
           "collocation": {"q": [6]}, "network": {"hidden_widths": [15], "r_m": 1.0},
           "metrics": {"spatial_points": 11}}
    path, cfg = _write(tmp_path, cfg)
    assert main(["solve", str(path)]) == 0
    with open(cfg["output"]["values"]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "t", "computed", "exact", "abs_error"]
    assert len(rows) == 1 + 11 * 101
    rep = json.loads(open(cfg["output"]["report"]).read())
    assert len(rep["per_block"]) == 2


def test_zero_subdomains_is_config_error(tmp_path, capsys):
    bad = json.loads(json.dumps(HELM))
    bad["partition"]["counts"] = [0]
    path, cfg = _write(tmp_path, bad)
    assert main(["solve", str(path)]) == 2
    assert "partition.counts[0]" in capsys.readouterr().err
    assert not (tmp_path / "run.json.report.json").exists()
    assert not (tmp_path / "run.json.values.csv").exists()


@pytest.mark.parametrize("patch, field", [
    ({"problem": "poisson"}, "problem"),
    ({"collocation": {"q": [1]}}, "collocation.q"),
    ({"network": {"r_m": -1.0}}, "network.r_m"),
    ({"solver": {"kind": "nlsq_perturb"}}, "solver.kind"),
    ({"n_blocks": 3}, "n_blocks"),
])
def test_invalid_fields_are_named(tmp_path, capsys, patch, field):
    path, _ = _write(tmp_path, {**HELM, **patch})
    assert main(["solve", str(path)]) == 2
    assert field in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == 2
    assert main(["solve", str(tmp_path / "missing.json")]) == 2


def test_same_seed_same_numbers(tmp_path):
    p1, c1 = _write(tmp_path, HELM, "a.json")
    p2, c2 = _write(tmp_path, HELM, "b.json")
    assert main(["solve", str(p1)]) == 0 and main(["solve", str(p2)]) == 0
    r1 = json.loads(open(c1["output"]["report"]).read())
    r2 = json.loads(open(c2["output"]["report"]).read())
    r1["config"].pop("output")
    r2["config"].pop("output")
    assert _strip_times(r1) == _strip_times(r2)
    assert open(c1["output"]["values"]).read() == open(c2["output"]["values"]).read()


def _read_sweep(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_single_value_sweep_matches_solve(tmp_path):
    path, cfg = _write(tmp_path, HELM)
    out = tmp_path / "sweep.csv"
    assert main(["sweep", str(path), "--param", "M", "--values", "100", "--output", str(out)]) == 0
    header, rows = _read_sweep(out)
    assert header == ["M", *SWEEP_COLUMNS]
    assert len(rows) == 1
    assert main(["solve", str(path)]) == 0
    rep = json.loads(open(cfg["output"]["report"]).read())
    assert rows[0][0] == 100
    assert rows[0][1] == rep["max_error"] and rows[0][2] == rep["rms_error"]


def test_sweep_rows_sorted_and_default_name(tmp_path):
    path, _ = _write(tmp_path, {**HELM, "collocation": {"q": [20]}, "network": {"hidden_widths": [20]}})
    assert main(["sweep", str(path), "--param", "n_subdomains", "--values", "3,1,2"]) == 0
    header, rows = _read_sweep(tmp_path / "run_sweep_n_subdomains.csv")
    assert header[0] == "n_subdomains"
    assert [r[0] for r in rows] == [1, 2, 3]


def test_multi_parameter_sweep_is_config_error(tmp_path):
    path, _ = _write(tmp_path, HELM)
    assert main(["sweep", str(path), "--param", "M", "--param", "r_m", "--values", "1"]) == 2
    assert main(["sweep", str(path), "--param", "depth", "--values", "1"]) == 2
    assert main(["sweep", str(path), "--param", "M", "--values", "a,b"]) == 2


def test_solver_failure_exit_code(tmp_path, capsys):
    path, _ = _write(tmp_path, {**HELM, "problem_params": {"lam": float("nan")},
                                "collocation": {"q": [10]}, "network": {"hidden_widths": [10]}})
    assert main(["solve", str(path)]) == 3
    assert "solver failure" in capsys.readouterr().err


def test_problems_command(capsys):
    assert main(["problems"]) == 0
    out = capsys.readouterr().out.split("\n")
    names = [line.split("\t")[0] for line in out if line]
    assert names == ["helmholtz1d", "helmholtz2d", "advection1d", "wave2nd1d",
                     "diffusion1d", "nlhelmholtz1d", "burgers1d"]


def test_r_m_sweep_has_interior_optimum(tmp_path):
    path, _ = _write(tmp_path, HELM)
    out = tmp_path / "rm.csv"
    values = "0.01,0.1,0.5,1,2,3,5,10,30,100"
    assert main(["sweep", str(path), "--param", "r_m", "--values", values, "--output", str(out)]) == 0
    _, rows = _read_sweep(out)
    err = {r[0]: r[1] for r in rows}
    best = min(err.values())
    assert err[0.01] >= 10 * best and err[100.0] >= 10 * best
