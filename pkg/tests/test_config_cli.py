import hashlib
import json

import numpy as np
import pytest

from tvc_moga import cli
from tvc_moga.config import ConfigError, GainsRef, load_config, parse_config
from tvc_moga.simulation import Trajectory, evaluate
from tvc_moga.svg import line_chart


def write(path, doc):
    path.write_text(json.dumps(doc, indent=2))
    return path


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------- config


def test_defaults_and_sections():
    cfg = parse_config({"schema_version": 1, "plant": {"I": 30.0}, "actuator": {"phi_max": 0.2},
                        "sim": {"T": 5.0}, "ga": {"ps": 12}, "gains": [0, -1, -0.3, 0, 0, 0]})
    assert cfg.sim.plant.I == 30.0 and cfg.sim.phi_max == 0.2 and cfg.sim.T == 5.0
    assert cfg.ga.ps == 12 and cfg.ga.cf == 0.4
    assert cfg.gains == (0.0, -1.0, -0.3, 0.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "doc, key",
    [
        ({"bogus": 1}, "bogus"),
        ({"ga": {"pop": 90}}, "ga.pop"),
        ({"ga": {"ps": 3}}, "ga.ps"),
        ({"sim": {"dt": -0.01}}, "sim.dt"),
        ({"schema_version": 2}, "schema_version"),
        ({"gains": [1, 2]}, "gains"),
        ({"gains": {"front": "f.json", "point": "D"}}, "gains.point"),
        ({"controller": {"input_scales": [1, 0, 1]}}, "controller.input_scales"),
        ({"plots": {"pareto": "yes"}}, "plots.pareto"),
    ],
)
def test_invalid_configs_name_the_key(doc, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.key == key
    assert key in str(exc.value)


def test_load_config_reports_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "schema_version": 1,\n  "ga": {\n    "ps": 3\n  }\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.line == 4 and "ga.ps" in str(exc.value)

    p.write_text('{\n  "ga": {"ps": 10,}\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.line == 2 and "malformed JSON" in str(exc.value)


def test_front_reference_is_resolved_relative_to_config(tmp_path):
    cfg = load_config(write(tmp_path / "c.json", {"gains": {"front": "runs/front.json", "point": 2}}))
    assert cfg.gains == GainsRef(str(tmp_path / "runs" / "front.json"), 2)


# ---------------------------------------------------------------- CLI


def test_simulate_zero_gains(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"gains": [0] * 6, "sim": {"theta0": 0.2}})
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    traj = Trajectory.from_csv(tmp_path / "o" / "trajectory.csv")
    assert np.all(traj.theta == 0.2) and np.all(traj.phi == 0)
    assert "OF1" in capsys.readouterr().out
    assert (tmp_path / "o" / "trajectory_theta.svg").exists()


def test_simulate_at_rest(tmp_path):
    cfg = write(tmp_path / "c.json", {"gains": [1, 2, 3, 4, 5, 6], "sim": {"theta0": 0.0}})
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    traj = Trajectory.from_csv(tmp_path / "o" / "trajectory.csv")
    assert np.all(traj.theta == 0) and np.all(traj.phi == 0)


def test_simulate_missing_gains_exits_2(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {})
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "gains" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"ga": {"ps": 2}})
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "ga.ps" in capsys.readouterr().err


def test_output_dir_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("TVC_MOGA_OUT", str(tmp_path / "env_out"))
    cfg = write(tmp_path / "c.json", {"gains": [0] * 6, "sim": {"T": 0.5}})
    assert cli.main(["simulate", "--config", str(cfg)]) == 0
    assert (tmp_path / "env_out" / "trajectory.csv").exists()


@pytest.fixture(scope="module")
def optimized(tmp_path_factory):
    root = tmp_path_factory.mktemp("opt")
    doc = {"ga": {"ps": 12, "max_generations": 4, "rng_seed": 3, "fitness_limit": 1e-6}, "sim": {"T": 2.0}}
    cfg = write(root / "c.json", doc)
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(root / "a")]) == 0
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(root / "b")]) == 0
    return root


def test_optimize_outputs_are_byte_identical(optimized):
    for name in ("front.json", "generations.csv", "pareto.svg"):
        assert digest(optimized / "a" / name) == digest(optimized / "b" / name)


def test_front_document_contents(optimized):
    doc = json.loads((optimized / "a" / "front.json").read_text())
    assert doc["kind"] == "front" and doc["seed"] == 3
    assert doc["cfg"]["fitness_limit"] == 1e-6 and doc["cfg"]["ps"] == 12
    assert set(doc["points"]) == {"A", "B", "C"}
    lines = (optimized / "a" / "generations.csv").read_text().splitlines()
    assert len(lines) == doc["generations"] + 1


def test_simulate_point_reproduces_front_objectives(optimized, tmp_path, capsys):
    front = optimized / "a" / "front.json"
    doc = json.loads(front.read_text())
    cfg = load_config(write(tmp_path / "c.json", {"sim": {"T": 2.0}, "gains": {"front": str(front), "point": "A"}}))
    genome = cli.resolve_gains(cfg)
    assert genome.tolist() == doc["points"]["A"]["genome"]
    obj = evaluate(genome, cfg.sim)
    np.testing.assert_allclose(tuple(obj), doc["points"]["A"]["objectives"], rtol=1e-9)
    assert cli.main(["simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")]) == 0


def test_plot_kinds(optimized, tmp_path):
    front = optimized / "a" / "front.json"
    out = tmp_path / "p.svg"
    assert cli.main(["plot", "--kind", "pareto", "--input", str(front), "--output", str(out)]) == 0
    first = out.read_bytes()
    spec = write(tmp_path / "spec.json", {"kind": "pareto", "input": str(front), "output": str(out)})
    assert cli.main(["plot", "--config", str(spec)]) == 0
    assert out.read_bytes() == first


def test_plot_schema_mismatch(optimized, tmp_path, capsys):
    front = optimized / "a" / "front.json"
    rc = cli.main(["plot", "--kind", "matrix-bar", "--input", str(front), "--output", str(tmp_path / "x.svg")])
    assert rc != 0 and "sweep-report" in capsys.readouterr().err
    rc = cli.main(["plot", "--kind", "trajectory", "--input", str(front), "--output", str(tmp_path / "x.svg")])
    assert rc != 0


def test_plot_empty_front(tmp_path, capsys):
    src = write(tmp_path / "f.json", {"kind": "front", "members": []})
    rc = cli.main(["plot", "--kind", "pareto", "--input", str(src), "--output", str(tmp_path / "x.svg")])
    assert rc == 2 and "empty front" in capsys.readouterr().err


def test_sweep_single_cell(tmp_path, capsys):
    doc = {"ga": {"max_generations": 2}, "sim": {"T": 1.0},
           "sweep": {"ps_values": [8], "cf_values": [0.6], "seeds_per_cell": 1}}
    cfg = write(tmp_path / "c.json", doc)
    for d in ("a", "b"):
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / d), "--jobs", "1"]) == 0
    assert digest(tmp_path / "a" / "sweep_report.json") == digest(tmp_path / "b" / "sweep_report.json")
    rows = (tmp_path / "a" / "matrices" / "A_of1.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("8,")
    rep = json.loads((tmp_path / "a" / "sweep_report.json").read_text())
    assert np.array(rep["summaries"]["C_of2"]["matrix"]).shape == (1, 1)
    out = tmp_path / "m.svg"
    assert cli.main(["plot", "--kind", "matrix-bar", "--input", str(tmp_path / "a" / "sweep_report.json"),
                     "--output", str(out)]) == 0
    assert out.read_text() == (tmp_path / "a" / "sweep_matrices.svg").read_text()


def test_svg_is_deterministic():
    x = np.linspace(0, 1, 50)
    a = line_chart([("s", x, np.sin(x))], "t", "x", "y")
    b = line_chart([("s", x, np.sin(x))], "t", "x", "y")
    assert a == b and "<svg" in a and a.rstrip().endswith("</svg>")
