import csv
import io
import json

import pytest

from magnon_spt.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, load_preset, main, preset_names
from magnon_spt.io import format_value, read_csv_table, render_csv

FIG4_EXPECT = {
    "fig4a": {"large": ("trivial", 0.0), "small": ("trivial", 0.0)},
    "fig4b": {"large": ("plus", 41.2104483), "small": ("plus", 41.2104483)},
    "fig4c": {"large": ("plus", 61.6410078), "small": ("trivial", 0.0)},
}


def run_cli(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_presets_shipped():
    names = preset_names()
    for want in ("fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig4c", "fig4d", "fig5"):
        assert want in names


@pytest.mark.parametrize("preset", ["fig4a", "fig4b", "fig4c"])
def test_fig4_presets_settle(tmp_path, preset):
    code, out = run_cli(tmp_path, "dynamics", "--preset", preset, "--param", "dynamics.t_end=2")
    assert code == EXIT_OK
    meta, rows = read_csv_table(out)
    for ic, (branch, n) in FIG4_EXPECT[preset].items():
        assert meta["settle"][ic]["branch"] == branch
        assert meta["settle"][ic]["n_scaled"] == pytest.approx(n, rel=1e-6, abs=1e-12)
    first = [r for r in rows if r["ic"] == "large"][0]
    assert float(first["b_re"]) == 3.1 and float(first["a_im"]) == -5.7


def test_fig4d_preset_never_settles(tmp_path):
    code, out = run_cli(tmp_path, "dynamics", "--preset", "fig4d", "--param", "dynamics.t_end=1")
    assert code == EXIT_OK
    meta, _ = read_csv_table(out)
    assert meta["phase"] == "UP"
    assert all(not v["settled"] for v in meta["settle"].values())


def test_preset_round_trip(tmp_path):
    code, first = run_cli(tmp_path, "steady-state", "--preset", "fig4c", name="a.csv")
    assert code == EXIT_OK
    meta, _ = read_csv_table(first)
    cfg = tmp_path / "echo.json"
    cfg.write_text(json.dumps(meta["config"]))
    code, second = run_cli(tmp_path, "steady-state", "--config", str(cfg), name="b.csv")
    assert code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_phase_diagram_threads_byte_identical(tmp_path):
    args = ["phase-diagram", "--preset", "fig3", "--param", "grid.resolution=[31,41]"]
    code1, a = run_cli(tmp_path, *args, "--threads", "1", name="a.csv")
    code4, b = run_cli(tmp_path, *args, "--threads", "4", name="b.csv")
    assert code1 == code4 == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.boundaries.csv").read_bytes() == (tmp_path / "b.boundaries.csv").read_bytes()
    _, rows = read_csv_table(a)
    assert len(rows) == 31 * 41
    assert {r["label"] for r in rows} == {"PSP", "PSBP", "BP", "UP"}


def test_drive_sweep_threads_byte_identical(tmp_path):
    args = ["drive-sweep", "--preset", "fig5", "--param", "sweep.samples=101"]
    _, a = run_cli(tmp_path, *args, "--threads", "1", name="a.csv")
    _, b = run_cli(tmp_path, *args, "--threads", "3", name="b.csv")
    assert a.read_bytes() == b.read_bytes()
    meta, rows = read_csv_table(a)
    assert "n_order_scaled" in meta["column_docs"]
    assert len(rows) == 101


def test_effective_params_fig2(tmp_path):
    code, out = run_cli(tmp_path, "effective-params", "--preset", "fig2b",
                        "--param", "sweep.samples=31")
    assert code == EXIT_OK
    _, rows = read_csv_table(out)
    assert all(abs(float(r["omega_c"]) - 8) < 1e-9 for r in rows)
    assert all(abs(float(r["lambda_r"])) <= 110 for r in rows)


def test_critical_drive_cli(tmp_path):
    code, out = run_cli(tmp_path, "critical-drive", "--preset", "fig5",
                        "--param", "bracket=[2.0,2.35]", "--format", "json", name="c.json")
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    xi = doc["columns"].index("xi")
    assert [round(r[xi], 3) for r in doc["rows"]] == [2.176, 2.285]


def test_fluctuations_cli(tmp_path):
    code, out = run_cli(tmp_path, "fluctuations", "--preset", "fig4c")
    assert code == EXIT_OK
    _, rows = read_csv_table(out)
    assert {r["branch"] for r in rows} == {"trivial", "plus"}


def test_json_mirrors_csv(tmp_path):
    _, c = run_cli(tmp_path, "steady-state", "--preset", "fig4b", name="s.csv")
    _, j = run_cli(tmp_path, "steady-state", "--preset", "fig4b", "--format", "json", name="s.json")
    meta, rows = read_csv_table(c)
    doc = json.loads(j.read_text())
    assert doc["meta"]["config_sha256"] == meta["config_sha256"]
    assert list(rows[0].keys()) == doc["columns"]
    assert len(rows) == len(doc["rows"])
    assert float(rows[1]["n_occ"]) == doc["rows"][1][doc["columns"].index("n_occ")]


def test_stdout_output(capsys):
    assert main(["steady-state", "--preset", "fig4a"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("# generator:") and "branch,parity" in text


@pytest.mark.parametrize("args", [
    ["steady-state", "--preset", "fig4b", "--out", ""],
    ["steady-state", "--preset", "nope"],
    ["steady-state", "--preset", "fig4b", "--param", "model.kappa=-1"],
    ["steady-state", "--preset", "fig4b", "--param", "model.bogus=1"],
    ["steady-state", "--preset", "fig4b", "--param", "novalue"],
    ["phase-diagram", "--preset", "fig3", "--param", "grid.resolution=[1,5]"],
    ["drive-sweep", "--preset", "fig5", "--param", "sweep.xi_range=[2,2]"],
    ["steady-state", "--config", "/nonexistent/config.json"],
    ["steady-state", "--preset", "fig4b", "--threads", "0"],
    ["dynamics", "--preset", "fig4a", "--param", "dynamics.frame=rotating"],
])
def test_config_errors(args):
    assert main(args) == EXIT_CONFIG


def test_bad_json_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["steady-state", "--config", str(cfg)]) == EXIT_CONFIG


def test_numerical_failures(tmp_path):
    # no stable branch at the unstable-phase point
    assert main(["fluctuations", "--preset", "fig4d", "--out", str(tmp_path / "f.csv")]) \
        == EXIT_NUMERIC
    assert main(["critical-drive", "--preset", "fig5", "--param", "bracket=[0.1,0.2]",
                 "--out", str(tmp_path / "c.csv")]) == EXIT_NUMERIC


def test_lab_frame_dynamics_cli(tmp_path):
    cfg = {"lab": {"omega_c_lab": 300.0, "omega_m_lab": 300.0, "g_m": 8.0, "kerr_K": 1.0},
           "drive": {"xi": 1.0, "omega_D": 120.0, "n1": 0, "n2": -5},
           "dynamics": {"frame": "lab", "t_end": 0.05, "sample_dt": 0.01, "a0": [0.1, 0], "b0": 1.0}}
    path = tmp_path / "lab.json"
    path.write_text(json.dumps(cfg))
    code, out = run_cli(tmp_path, "dynamics", "--config", str(path))
    assert code == EXIT_OK
    meta, rows = read_csv_table(out)
    assert meta["frame"] == "lab" and len(rows) == 6


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(2 / 3)) == 2 / 3
    assert format_value(True) == "true" and format_value(None) == ""
    assert format_value(float("inf")) == "inf" and format_value(float("nan")) == "nan"


def test_csv_quoting_is_rfc4180():
    text = render_csv([{"a": 'x,"y"', "b": 1.5}], ["a", "b"], {"k": "v"})
    assert text.startswith('# k: "v"\r\na,b\r\n')
    body = text.split("\n", 1)[1]
    parsed = list(csv.reader(io.StringIO(body)))
    assert parsed[1] == ['x,"y"', "1.5"]
    assert '"x,""y"""' in body


def test_load_preset_is_fresh():
    a = load_preset("fig3")
    a["grid"]["resolution"] = [2, 2]
    assert load_preset("fig3")["grid"]["resolution"] == [601, 601]
