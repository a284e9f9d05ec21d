# ## @DOC
# ### Test Config Utils
# Tests config discovery, dot-path queries, TOML/JSON loading and the error report shape.



import json
import sys
from pathlib import Path
from unittest.mock import patch

import pytest

sys.path.append(str(Path(__file__).parent.parent / "bin"))
import MRR_config_utils as config_utils
from MRR_errors import (
    ConfigError,
    InvalidConfig,
    InvalidN,
    IoError,
    MrrSimError,
    NonPositiveDimension,
    ParseError,
)


def test_get_value_dot_path():
    config = {"simulation": {"reference_count": 512, "bit_rates": [1, 3, 5]}}
    assert config_utils.get_value(config, "simulation.reference_count") == 512
    assert config_utils.get_value(config, "simulation.bit_rates") == [1, 3, 5]
    assert config_utils.get_value(config, "simulation.missing") is None
    assert config_utils.get_value(config, "simulation.reference_count.deeper") is None


def test_get_or_default():
    assert config_utils.get_or_default({}, "compare.n_values", {}) == {}
    assert config_utils.get_or_default({"a": {"b": 0}}, "a.b", 7) == 0


def test_find_config_priority(tmp_path, monkeypatch):
    monkeypatch.delenv(config_utils.ENV_VAR, raising=False)
    assert config_utils.find_config(tmp_path) is None

    overlay = tmp_path / ".mrrsim"
    overlay.mkdir()
    (overlay / "config.toml").write_text("[simulation]\njobs = 1\n", encoding="utf-8")
    assert config_utils.find_config(tmp_path) == overlay / "config.toml"

    (tmp_path / "config.toml").write_text("[simulation]\njobs = 2\n", encoding="utf-8")
    assert config_utils.find_config(tmp_path) == tmp_path / "config.toml"

    env_file = tmp_path / "env.toml"
    env_file.write_text("[simulation]\njobs = 3\n", encoding="utf-8")
    monkeypatch.setenv(config_utils.ENV_VAR, str(env_file))
    assert config_utils.load_config(tmp_path)["simulation"]["jobs"] == 3


def test_load_config_missing_is_empty(tmp_path, monkeypatch):
    monkeypatch.delenv(config_utils.ENV_VAR, raising=False)
    assert config_utils.load_config(tmp_path) == {}


def test_load_config_env_points_nowhere(tmp_path, monkeypatch):
    monkeypatch.setenv(config_utils.ENV_VAR, str(tmp_path / "absent.toml"))
    with pytest.raises(IoError):
        config_utils.load_config(tmp_path)


def test_load_document_formats(tmp_path):
    toml_file = tmp_path / "p.toml"
    toml_file.write_text('il_penalty = 5.0\nname = "x"\n', encoding="utf-8")
    json_file = tmp_path / "p.json"
    json_file.write_text(json.dumps({"il_penalty": 5.0}), encoding="utf-8")
    assert config_utils.load_document(toml_file)["il_penalty"] == 5.0
    assert config_utils.load_document(json_file) == {"il_penalty": 5.0}


def test_load_document_errors(tmp_path):
    with pytest.raises(IoError):
        config_utils.load_document(tmp_path / "nope.toml")

    broken = tmp_path / "broken.toml"
    broken.write_text("this is = = not toml", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_utils.load_document(broken)

    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_utils.load_document(listing)


def test_bundled_config_has_compare_defaults():
    config = config_utils.load_document(config_utils.ROOT_DIR / "config.toml")
    assert config_utils.get_value(config, "simulation.reference_organization") == "RMAM"
    assert config_utils.get_value(config, "simulation.reference_count") == 512
    assert config["compare"]["n_values"]["RMAM@1"] == 43
    assert config["compare"]["published_ratios"]["RMAM@1/MAM@1"] == pytest.approx(1.8)


def test_presets_are_listed(capsys):
    with patch.object(sys, "argv", ["MRR_config_utils.py", "presets"]):
        config_utils.main()
    listed = capsys.readouterr().out.split()
    assert "photonic_params" in listed
    assert "peripherals" in listed


def test_get_command_prints_lists(tmp_path, monkeypatch, capsys):
    config = tmp_path / "config.toml"
    config.write_text("[simulation]\nbit_rates = [1, 3]\n", encoding="utf-8")
    monkeypatch.setenv(config_utils.ENV_VAR, str(config))
    with patch.object(sys, "argv", ["MRR_config_utils.py", "get", "simulation.bit_rates"]):
        config_utils.main()
    assert capsys.readouterr().out.strip() == "1 3"


def test_get_command_missing_key_exits(tmp_path, monkeypatch):
    config = tmp_path / "config.toml"
    config.write_text("[simulation]\n", encoding="utf-8")
    monkeypatch.setenv(config_utils.ENV_VAR, str(config))
    with patch.object(sys, "argv", ["MRR_config_utils.py", "get", "simulation.nothing"]):
        with pytest.raises(SystemExit) as exc:
            config_utils.main()
    assert exc.value.code == 1


def test_error_report_shape():
    error = ParseError("bad row", file=Path("w.csv"), line=4, reason="kind")
    report = error.to_dict()
    assert report == {
        "error": "parse_error",
        "message": "bad row",
        "file": "w.csv",
        "line": 4,
        "reason": "kind",
    }
    assert isinstance(error, MrrSimError)
    assert not isinstance(error, ConfigError)


def test_invalid_config_lists_violations():
    error = InvalidConfig(
        [
            NonPositiveDimension("x must be >= 1", field="x", value=0),
            InvalidN("n too large", field="n", value=99, max_n=44),
        ]
    )
    report = error.to_dict()
    assert report["error"] == "invalid_config"
    assert [v["error"] for v in report["violations"]] == ["non_positive_dimension", "invalid_n"]
    assert report["violations"][1]["max_n"] == 44
    assert isinstance(error, ConfigError)
