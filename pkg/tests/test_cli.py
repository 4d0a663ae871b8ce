import json

import numpy as np
import pytest

from wg4 import cli
from wg4.cli import ConfigError, main, parse_config
from wg4.harness import CATALOG


def test_parse_convergence_config():
    cfg = parse_config(json.dumps(
        {"command": "convergence", "case": "sine", "levels": [1, 2, 4, 8, 16, 32, 64]}
    ))
    assert cfg.command == "convergence"
    assert cfg.case == "sine"
    assert cfg.levels == [1, 2, 4, 8, 16, 32, 64]


def test_parse_ft_demo_config():
    cfg = parse_config(json.dumps({
        "command": "ft-demo",
        "scenario": "gaussian-source",
        "source": [13.3065, 0.0730994],
        "n": 64,
    }))
    assert cfg.case == "gaussian-source"
    assert cfg.source == (13.3065, 0.0730994)
    assert cfg.n == 64


def test_indefinite_region_rejected():
    text = json.dumps({
        "command": "solve", "case": "gaussian-source", "n": 8,
        "regions": [{"shape": "disk", "center": [25, 15], "radius": 4,
                     "kappa": [[1, 2], [2, 1]], "mu": 0.0}],
    })
    with pytest.raises(ConfigError, match=r"regions\[0\]"):
        parse_config(text)


def test_negative_mu_rejected():
    text = json.dumps({
        "command": "solve", "case": "sine", "n": 4,
        "regions": [{"shape": "rect", "bounds": [0, 0, 1, 1],
                     "kappa": [[1, 0], [0, 1]], "mu": -0.5}],
    })
    with pytest.raises(ConfigError, match="nonnegative"):
        parse_config(text)


@pytest.mark.parametrize("text,fragment", [
    ("{not json", "malformed JSON"),
    (json.dumps({"command": "warp"}), "$.command"),
    (json.dumps({"command": "convergence", "case": "sine", "levels": [2, 4],
                 "extra": 1}), "$.extra: unknown key"),
    (json.dumps({"command": "convergence", "levels": [2, 4]}), "$.case: required"),
    (json.dumps({"command": "convergence", "case": "nope", "levels": [2, 4]}),
     "unknown case"),
    (json.dumps({"command": "convergence", "case": "sine", "levels": [2, 5]}),
     "levels must double"),
    (json.dumps({"command": "convergence", "case": "boundary-dirac",
                 "levels": [8, 16]}), "no exact solution"),
    (json.dumps({"command": "solve", "case": "sine", "n": 0}), "$.n"),
    (json.dumps({"command": "solve", "case": "sine", "n": 4,
                 "solver": {"tolernce": 1e-8}}), "$.solver.tolernce"),
    (json.dumps({"command": "solve", "case": "sine", "n": 4,
                 "solver": {"method": "gmres"}}), "$.solver"),
    (json.dumps({"command": "solve", "case": "sine", "n": 4,
                 "source": [1, 2]}), "$.source"),
    (json.dumps({"command": "ft-demo", "scenario": "sine", "n": 4}),
     "$.scenario"),
    (json.dumps({"command": "mesh-dump", "n": 2, "domain": [0, 0, 1]}),
     "$.domain"),
])
def test_invalid_configs_rejected(text, fragment):
    with pytest.raises(ConfigError, match=None) as err:
        parse_config(text)
    assert fragment in str(err.value)


def test_mesh_dump_command(tmp_path):
    out = tmp_path / "mesh.csv"
    assert main(["mesh-dump", "--n", "1", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    ie = lines.index("# elements")
    ig = lines.index("# edges")
    assert ig - ie - 1 == 2  # two element records at n=1


def test_ft_demo_rejects_unaligned_n(tmp_path, capsys):
    code = main(["ft-demo", "--scenario", "boundary-indicator", "--n", "10",
                 "--out", str(tmp_path / "x.csv")])
    captured = capsys.readouterr()
    assert code == 2
    err_lines = captured.err.strip().split("\n")
    assert len(err_lines) == 1
    assert err_lines[0].startswith("error: config:")
    assert "divisible by 8" in err_lines[0]


def test_convergence_command_writes_csv(tmp_path):
    out = tmp_path / "conv.csv"
    assert main(["convergence", "--case", "sine", "--levels", "2,4",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "n,h,l2_e0,l2_order,tbar,tbar_order,eb,eb_order,eg,eg_order"
    assert len(lines) == 3


def test_solve_config_roundtrip_and_determinism(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "command": "solve", "case": "poly-bump", "n": 4, "grid": 9,
        "out": str(tmp_path / "a.csv"),
    }))
    assert main(["solve", "--config", str(config)]) == 0
    first = (tmp_path / "a.csv").read_bytes()
    assert main(["solve", "--config", str(config), "--out",
                 str(tmp_path / "b.csv")]) == 0
    second = (tmp_path / "b.csv").read_bytes()
    assert first == second
    header = first.decode().split("\n", 1)[0]
    assert header == "x,y,u0"
    assert len(first.decode().strip().split("\n")) == 9 * 9 + 1


def test_ft_demo_determinism(tmp_path):
    args = ["ft-demo", "--scenario", "boundary-indicator", "--n", "8",
            "--grid", "9"]
    out1, out2 = tmp_path / "f1.csv", tmp_path / "f2.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_solver_failure_exit_code(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "command": "solve", "case": "sine", "n": 4,
        "solver": {"method": "cg", "max_iterations": 2},
    }))
    code = main(["solve", "--config", str(config)])
    captured = capsys.readouterr()
    assert code == 3
    assert captured.err.startswith("error: solver:")


def test_missing_config_file(capsys):
    assert main(["solve", "--config", "/nonexistent/x.json"]) == 2
    assert "error: config:" in capsys.readouterr().err


def test_help_lists_every_case(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in CATALOG:
        assert name in out


def test_bad_source_flag(capsys):
    code = main(["ft-demo", "--scenario", "gaussian-source", "--n", "4",
                 "--source", "1;2"])
    assert code == 2
    assert "--source" in capsys.readouterr().err


def test_gaussian_demo_with_source(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["ft-demo", "--scenario", "gaussian-source", "--n", "8",
                 "--grid", "6", "--source", "49.8272,13.5234",
                 "--out", str(out)]) == 0
    rows = out.read_text().strip().split("\n")[1:]
    values = np.array([float(r.split(",")[2]) for r in rows])
    assert np.isfinite(values).all()
