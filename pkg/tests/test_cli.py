"""Tests for the command-line front end and artifact serialization."""

import json

import numpy as np
import pytest

from detgreen._json import canonical_dumps, write_canonical
from detgreen.cli import ConfigError, ExperimentConfig, export_curve, main
from detgreen.laurent import LaurentCocycle
from detgreen.zeta import theta_from_spectrum


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_canonical_json_sorted_and_round_trips():
    doc = {"b": 1, "a": [0.1, 1.0 / 3.0, 2], "flag": True}
    text = canonical_dumps(doc)
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == doc
    # shortest-repr floats survive the round trip bit for bit
    assert json.loads(text)["a"][1] == 1.0 / 3.0


def test_canonical_json_rejects_nan():
    with pytest.raises(ValueError):
        canonical_dumps({"x": float("nan")})


def test_canonical_json_coerces_numpy(tmp_path):
    doc = {"v": np.float64(0.25), "n": np.int64(3), "b": np.bool_(True),
           "arr": np.arange(3.0)}
    text = canonical_dumps(doc)
    assert json.loads(text) == {"v": 0.25, "n": 3, "b": True,
                                "arr": [0.0, 1.0, 2.0]}
    path = tmp_path / "doc.json"
    write_canonical(path, doc)
    raw = path.read_bytes()
    assert raw.endswith(b"\n")
    assert b"\r" not in raw


def test_export_curve_format(tmp_path):
    theta = theta_from_spectrum([1.0, 2.0])
    t = float(np.log(2.0))
    path = tmp_path / "theta.csv"
    export_curve(path, [(t, theta(t))])
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y"
    x_text, y_text = lines[1].split(",")
    assert x_text.startswith("0.6931")
    assert float(y_text) == 0.75
    # 17 significant digits round-trip exactly
    assert float(x_text) == t


def test_export_curve_rejects_empty_and_unwritable(tmp_path):
    with pytest.raises(ConfigError):
        export_curve(tmp_path / "x.csv", [])
    with pytest.raises(ConfigError):
        export_curve("/nonexistent-dir-zz/x.csv", [(0.0, 1.0)])


def test_config_layering(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('[spectrum]\nresolution = 20\ncount = 3\n')
    cfg = ExperimentConfig.resolve(
        "spectrum", {"count": 5, "model": None}, str(cfg_file))
    # file overrides the default, the flag overrides the file
    assert cfg["resolution"] == 20
    assert cfg["count"] == 5
    assert cfg["model"] == "disc"


def test_config_unknown_key_rejected(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('[spectrum]\nresolutoin = 20\n')
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("spectrum", {}, str(cfg_file))


def test_config_type_check(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('[spectrum]\nresolution = "big"\n')
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("spectrum", {}, str(cfg_file))


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("spectrum", {"model": "sphere"})
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("spectrum", {"resolution": 4})
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("omega", {})      # f1/f2 required
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("det", {"window": "0.5,0.1"})
    with pytest.raises(ConfigError):
        ExperimentConfig.resolve("reduce", {"f": "x.json", "r1": 0.4,
                                            "r2": 0.3})


def test_green_coeffs_diagonal(tmp_path, capsys):
    out_csv = tmp_path / "c.csv"
    code, doc = run_cli(capsys, "green-coeffs", "--model", "disc",
                        "--order", "4", "--out", str(out_csv))
    assert code == 0
    np.testing.assert_allclose(doc["diagonal"], [0.5, 1.0, 1.5, 2.0, 2.5],
                               rtol=1e-9)
    assert doc["command"] == "green-coeffs"
    assert doc["config"]["order"] == 4
    rows = out_csv.read_text().splitlines()
    assert rows[0] == "n,m,re,im"
    assert len(rows) == 1 + 25


def test_cli_reruns_byte_identical(capsys):
    code1 = main(["green-coeffs", "--order", "2"])
    text1 = capsys.readouterr().out
    code2 = main(["green-coeffs", "--order", "2"])
    text2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert text1 == text2


def test_cli_exit_codes(tmp_path, capsys):
    # config error
    assert main(["spectrum", "--model", "sphere"]) == 2
    capsys.readouterr()
    # argparse rejects a malformed flag value with its own exit 2
    assert main(["spectrum", "--resolution", "abc"]) == 2
    capsys.readouterr()
    # numeric failure: aliasing at a tiny extraction radius
    assert main(["green-coeffs", "--order", "8", "--radius", "0.05"]) == 3
    capsys.readouterr()
    # tolerance violation still emits the payload
    a = tmp_path / "a.json"
    a.write_text(LaurentCocycle({-1: [[1.0]]}).to_json())
    code = main(["omega", "--f1", str(a), "--f2", str(a),
                 "--tol", "1e-18"])
    out = capsys.readouterr().out
    assert code == 4
    doc = json.loads(out)
    assert {"omega_series", "omega_oracle", "rel_diff"} <= set(doc)


def test_omega_pinned_value(tmp_path, capsys):
    a = tmp_path / "a.json"
    a.write_text(LaurentCocycle({-1: [[1.0]]}).to_json())
    code, doc = run_cli(capsys, "omega", "--f1", str(a), "--f2", str(a),
                        "--green", "disc", "--order", "8")
    assert code == 0
    np.testing.assert_allclose(doc["omega_series"], 2.0 * np.pi ** 2,
                               rtol=1e-9)
    assert doc["rel_diff"] < 1e-6


def test_variation_out_artifact(tmp_path, capsys):
    art = tmp_path / "run.json"
    code, doc = run_cli(capsys, "variation", "--model", "disc",
                        "--resolution", "10", "--generator", "gaussian:0.5",
                        "--s", "0.1", "--eps", "0.02,0.05",
                        "--out", str(art))
    assert code == 0
    assert json.loads(art.read_text()) == doc
    assert doc["config"]["eps"] == "0.02,0.05"
    assert len(doc["variation_trace"]) == 2


def test_prodist_eval_round_trip(capsys):
    expr = "(1+0j) * delta(r=1)/2pi"
    code, doc = run_cli(capsys, "prodist-eval", "--expr", expr,
                        "--tests", "one")
    assert code == 0
    assert doc["echo"] == expr
    np.testing.assert_allclose(doc["value_re"], 1.0, rtol=1e-12)
    code = main(["prodist-eval", "--expr", expr, "--tests", "one,re"])
    capsys.readouterr()
    assert code == 2   # level mismatch


def test_spectrum_sweep_curve(tmp_path, capsys):
    curve = tmp_path / "sweep.csv"
    code, doc = run_cli(capsys, "spectrum", "--model", "disc",
                        "--resolutions", "8,12", "--curve-out", str(curve))
    assert code == 0
    assert [row["resolution"] for row in doc["sweep"]] == [8, 12]
    lines = curve.read_text().splitlines()
    assert lines[0] == "x,y"
    assert len(lines) == 3
