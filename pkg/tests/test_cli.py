# ## @DOC
# ### Test MRR Sim CLI
# Tests each subcommand end to end, artifact layout, byte-stable reruns and the error report with exit codes.



import json
import sys
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent.parent / "bin"))
import mrrsim
from MRR_config_utils import ENV_VAR


@pytest.fixture(autouse=True)
def bundled_config(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_scalability_csv(tmp_path):
    code = mrrsim.main(
        ["scalability", "--org", "MAM", "--precisions", "4", "--bit-rates", "1", "10",
         "--format", "csv", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    lines = (tmp_path / "scalability.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "organization,precision_bits,bit_rate_gbps,n_max,received_power_dbm"
    assert lines[2].startswith("MAM,4,1,44,")
    assert lines[3].startswith("MAM,4,10,16,")
    meta = read_json(tmp_path / "scalability.meta.json")
    assert meta["command"] == "scalability"
    assert "generated_at" in meta
    assert "tool_version" in meta


def test_rerun_is_byte_identical(tmp_path):
    argv = ["scalability", "--org", "AMM", "--precisions", "1", "4", "--bit-rates", "1",
            "--out-dir", str(tmp_path)]
    assert mrrsim.main(argv) == 0
    first = (tmp_path / "scalability.json").read_bytes()
    assert mrrsim.main(argv) == 0
    assert (tmp_path / "scalability.json").read_bytes() == first


def test_scalability_to_stdout(capsys):
    assert mrrsim.main(["scalability", "--org", "AMM", "--precisions", "4", "--bit-rates", "1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    (point,) = payload["points"]
    assert point["n_max"] == 31
    assert payload["config"]["sweep"]["organizations"] == ["AMM"]


def test_csdesign(tmp_path):
    code = mrrsim.main(
        ["csdesign", "--org", "RMAM", "--bit-rate", "1", "--n", "43", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    design = read_json(tmp_path / "csdesign.json")["design"]
    assert design["pairs"] == 4
    assert design["cs_fsr"] == pytest.approx(4.65)
    assert design["loss_provenance"] == "table"


def test_map_summary_and_dump(tmp_path):
    assert mrrsim.main(["map", "mapping_cases", "rmam_1g", "--dump", "--out-dir", str(tmp_path)]) == 0
    payload = read_json(tmp_path / "map.json")
    assert payload["workload"] == "mapping_cases"
    assert payload["config"]["arch"]["n"] == 43
    cases = {layer["name"]: (layer["case"], layer["mode"]) for layer in payload["layers"]}
    assert cases["case1_s32"] == ("Case2", "Mode2")
    assert cases["case3_s8"] == ("Case3", "Mode2")
    assert sum(payload["utilization_histogram"].values()) == payload["passes"]
    assert all("schedule" in layer for layer in payload["layers"])


def test_map_network_summary(tmp_path):
    assert mrrsim.main(["map", "dsc_tiny", "rmam_1g", "--out-dir", str(tmp_path)]) == 0
    payload = read_json(tmp_path / "map.json")
    shares = payload["case_shares"]
    assert sum(shares["instances"].values()) == pytest.approx(1.0)
    assert sum(shares["shapes"].values()) == pytest.approx(1.0)
    by_s = payload["utilization_by_s"]
    assert by_s and all(entry["s"] < 43 for entry in by_s)
    assert all(entry["reconfigurable"] >= entry["fixed"] for entry in by_s)
    assert payload["network_costs"]["layers"] == 6
    assert [(p["dc"], p["pc"]) for p in payload["dsc_pairs"]] == [
        ("block1_dw", "block1_pw"),
        ("block2_dw", "block2_pw"),
    ]
    assert all(p["ops_reduction"] > 1 for p in payload["dsc_pairs"])


def test_simulate_reports(tmp_path):
    code = mrrsim.main(
        ["simulate", "dsc_tiny", "dsc_heavy", "--arch", "rmam_1g", "mam_1g",
         "--out-dir", str(tmp_path)]
    )
    assert code == 0
    reports = read_json(tmp_path / "simulate.json")["reports"]
    assert [(r["workload"], r["arch"]["organization"]) for r in reports] == [
        ("dsc_tiny", "RMAM"),
        ("dsc_tiny", "MAM"),
        ("dsc_heavy", "RMAM"),
        ("dsc_heavy", "MAM"),
    ]
    assert all(r["fps"] > 0 for r in reports)


def test_simulate_csv_rows(tmp_path):
    code = mrrsim.main(
        ["simulate", "dsc_tiny", "--arch", "ramm_1g", "--format", "csv", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    lines = (tmp_path / "simulate.csv").read_text(encoding="utf-8").splitlines()
    assert lines[1].startswith("workload,organization,bit_rate_gbps,n,y,total_vdpes")
    assert lines[2].startswith("dsc_tiny,RAMM,1,30,3,601,")


def test_compare(tmp_path, capsys):
    code = mrrsim.main(
        ["compare", "--workloads", "dsc_heavy", "--orgs", "RMAM", "MAM", "--bit-rates", "1",
         "--jobs", "2", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    payload = read_json(tmp_path / "compare.json")
    assert payload["baseline"] == "RMAM@1"
    assert payload["counts"]["RMAM@1"] == 512
    gmean = {r["label"]: r for r in payload["rows"] if r["workload"] == "gmean"}
    assert gmean["RMAM@1"]["norm_fps"] == pytest.approx(1.0)
    assert gmean["MAM@1"]["n"] == 44
    assert "CROSSLIGHT@1" in gmean
    ratios = {r["ratio"]: r for r in payload["ratios"]}
    assert ratios["RMAM@1/MAM@1"]["published"] == pytest.approx(1.8)
    assert ratios["RMAM@1/MAM@1"]["achieved"] > 1.0
    assert ratios["RMAM@1/AMM@1"]["achieved"] is None
    assert "| Accelerator |" in capsys.readouterr().err


def test_compare_with_custom_config(tmp_path):
    config = tmp_path / "config.toml"
    config.write_text(
        '[simulation]\nworkloads = ["dsc_tiny"]\norganizations = ["MAM", "AMM"]\n'
        'bit_rates = [1]\nbaseline = "MAM@1"\n',
        encoding="utf-8",
    )
    out = tmp_path / "out"
    assert mrrsim.main(["compare", "--config", str(config), "--out-dir", str(out)]) == 0
    payload = read_json(out / "compare.json")
    assert payload["baseline"] == "MAM@1"
    assert payload["ratios"] == []
    assert {r["label"] for r in payload["rows"]} == {"MAM@1", "AMM@1"}


def test_malformed_workload_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("name,kind,K,D,F,H_out,W_out\nx,QC,1,8,8,1,1\n", encoding="utf-8")
    code = mrrsim.main(["simulate", str(bad), "--arch", "mam_1g", "--out-dir", str(tmp_path)])
    assert code == 1
    report = read_json(tmp_path / "error.json")
    assert report["error"] == "parse_error"
    assert report["line"] == 2
    assert report["file"].endswith("bad.csv")
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "parse_error"


def test_undecodable_workload_is_parse_error(tmp_path):
    bad = tmp_path / "latin.csv"
    bad.write_bytes(b"name,kind,K,D,F,H_out,W_out\n\xff,PC,1,8,8,1,1\n")
    code = mrrsim.main(["map", str(bad), "rmam_1g", "--out-dir", str(tmp_path)])
    assert code == 1
    report = read_json(tmp_path / "error.json")
    assert report["error"] == "parse_error"
    assert report["line"] == 2
    assert report["reason"] == "encoding"


def test_invalid_arch_exits_with_config_code(tmp_path):
    arch = tmp_path / "big.json"
    arch.write_text(json.dumps({"organization": "MAM", "n": 60}), encoding="utf-8")
    code = mrrsim.main(["simulate", "dsc_tiny", "--arch", str(arch), "--out-dir", str(tmp_path)])
    assert code == 2
    report = read_json(tmp_path / "error.json")
    assert report["error"] == "invalid_config"
    assert report["violations"][0]["error"] == "invalid_n"


def test_missing_file_exits_with_io_error(tmp_path):
    code = mrrsim.main(["map", str(tmp_path / "none.csv"), "mam_1g", "--out-dir", str(tmp_path)])
    assert code == 1
    assert read_json(tmp_path / "error.json")["error"] == "io_error"


def test_empty_sweep_axis_is_config_error(tmp_path):
    config = tmp_path / "config.toml"
    config.write_text("[simulation]\norganizations = []\nworkloads = [\"dsc_tiny\"]\n", encoding="utf-8")
    assert mrrsim.main(["compare", "--config", str(config)]) == 2


def test_params_override_changes_sizes(tmp_path, capsys):
    params = tmp_path / "params.toml"
    params.write_text("[photonic]\nil_mrm = 6.0\n", encoding="utf-8")
    argv = ["scalability", "--org", "MAM", "--precisions", "4", "--bit-rates", "1"]
    assert mrrsim.main(argv + ["--params", str(params)]) == 0
    (point,) = json.loads(capsys.readouterr().out)["points"]
    assert point["n_max"] < 44
