import json
from pathlib import Path

from jumplab.cli import run

REPO = Path(__file__).resolve().parents[1]
SAMPLE = REPO / "data" / "sample_prices.csv"
GOLDEN = Path(__file__).resolve().parent / "golden"


def test_measures_matches_golden(tmp_path):
    out = tmp_path / "measures.csv"
    assert run(["measures", "--input", str(SAMPLE), "--grid", "79", "--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "measures.csv").read_bytes()


def test_test_matches_golden_and_reruns_identically(tmp_path):
    out1 = tmp_path / "a" / "tests.csv"
    out2 = tmp_path / "b" / "tests.csv"
    for out in (out1, out2):
        out.parent.mkdir()
        code = run(["test", "--input", str(SAMPLE), "--grid", "79",
                    "--seed", "1", "--out", str(out)])
        assert code == 0
    blob = out1.read_bytes()
    assert blob == out2.read_bytes()
    assert blob == (GOLDEN / "tests.csv").read_bytes()


def test_thread_count_does_not_change_outputs(tmp_path):
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / f"t{threads}" / "table.csv"
        out.parent.mkdir()
        code = run(["accuracy", "--scenario", "H1", "--reps", "3", "--days", "200",
                    "--seed", "5", "--threads", threads, "--out", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_manifest_written_and_complete(tmp_path):
    out = tmp_path / "m.csv"
    assert run(["measures", "--input", str(SAMPLE), "--grid", "79", "--out", str(out)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["error"] is None
    assert manifest["master_seed"] == 0
    assert manifest["outputs"] == [str(out)]
    assert manifest["version"]
    assert "measures" in manifest["command_line"]


def test_unknown_method_is_usage_error(tmp_path):
    code = run(["test", "--input", str(SAMPLE), "--grid", "79",
                "--methods", "nope", "--out", str(tmp_path / "x.csv")])
    assert code == 1


def test_unknown_flag_is_usage_error():
    assert run(["measures", "--nope"]) == 1


def test_wrong_grid_is_data_error_with_manifest(tmp_path):
    out = tmp_path / "m.csv"
    code = run(["measures", "--input", str(SAMPLE), "--grid", "80", "--out", str(out)])
    assert code == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "strict grid" in manifest["error"]


def test_malformed_config_is_data_error(tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text('{"tuning": ')
    code = run(["simulate", "--days", "2", "--config", str(bad),
                "--out", str(tmp_path / "sim")])
    assert code == 2


def test_simulate_writes_returns_truth_manifest(tmp_path):
    out = tmp_path / "sim"
    code = run(["simulate", "--scenario", "SD3", "--days", "5", "--seed", "9",
                "--out", str(out)])
    assert code == 0
    returns = (out / "returns.csv").read_text().splitlines()
    assert returns[0] == "day,interval,log_return"
    assert len(returns) == 1 + 5 * 72
    truth = (out / "truth.csv").read_text().splitlines()
    assert truth[0].startswith("day,dn_p,z_p")
    assert len(truth) == 6
    assert (out / "manifest.json").exists()


def test_simulate_determinism(tmp_path):
    blobs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run(["simulate", "--scenario", "H1", "--days", "4", "--seed", "42",
                    "--out", str(out)]) == 0
        blobs.append((out / "returns.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_power_surface_long_format_and_plot_data(tmp_path):
    out = tmp_path / "surface.csv"
    code = run(["power-surface", "--grid-points", "3", "--reps", "5",
                "--methods", "bns,jo", "--seed", "2", "--threads", "1",
                "--plot-data", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,zp,zv,rate,reps"
    assert len(lines) == 1 + 2 * 9
    mat = (tmp_path / "surface_bns.matrix").read_text().splitlines()
    assert len(mat) == 4              # header row + 3 zp rows
    assert len(mat[1].split()) == 4   # zp value + 3 zv columns


def test_accuracy_table_columns(tmp_path):
    out = tmp_path / "table.csv"
    code = run(["accuracy", "--scenario", "H1", "--reps", "2", "--days", "150",
                "--methods", "bns,jo", "--seed", "3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "scenario,method,dj,ndj,sde,mse,mse_ge2,mse_ge3,scd,reps"
    assert len(lines) == 3
    assert lines[1].startswith("H1,BNS,")


def test_config_overrides_flow_through(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tuning": {"alpha": 0.05}, "dgp": {"theta": 0.03}}))
    out = tmp_path / "sim"
    assert run(["simulate", "--days", "2", "--config", str(cfg), "--out", str(out)]) == 0
    # config digest must reflect the resolved configuration
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_digest"] != "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
