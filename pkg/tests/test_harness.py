import json
import subprocess
import sys

import numpy as np
import pytest

from aoftrl.domains import Hyperrectangle, Simplex
from aoftrl.engine import AOGD, run_online
from aoftrl.harness import (ErmHinge, ErmLasso, ErmLogistic, FixedLinear, QuadraticBox, RandomLinear,
                            SlowlyVaryingLinear, generate_stream, run_baseline)
from aoftrl.harness.cli import main
from aoftrl.harness.data import (erm_problem_for, problem_from_dataset, read_csv, synthetic_regression,
                                 write_csv)
from aoftrl.harness.experiment import (ConfigError, ExperimentConfig, load_config, parse_seeds, run_experiment,
                                       solver_seed)
from aoftrl.predictors import LastGradient

BOX2 = Hyperrectangle.cube(2)


# -- streams

def test_fixed_linear():
    s = generate_stream(FixedLinear((1, 0)), 0, 5, BOX2)
    for t in range(1, 6):
        np.testing.assert_array_equal(s.loss(t).grad(np.zeros(2)), [1.0, 0.0])
    with pytest.raises(IndexError):
        s.loss(6)


def test_zero_drift_is_fixed():
    s = generate_stream(SlowlyVaryingLinear(0.0, base=(0.3, -0.2)), 7, 50, BOX2)
    assert np.all(s.gradients() == np.array([0.3, -0.2]))


def test_slow_drift_respects_sigma():
    s = generate_stream(SlowlyVaryingLinear(0.01), 3, 100, Hyperrectangle.cube(4))
    assert np.max(np.abs(np.diff(s.gradients(), axis=0))) <= 0.01


def test_stream_determinism_and_bounds():
    for kind in (RandomLinear(2.0), SlowlyVaryingLinear(0.1), RandomLinear(1.0, nonnegative=True)):
        a = generate_stream(kind, 11, 30, BOX2).gradients()
        b = generate_stream(kind, 11, 30, BOX2).gradients()
        np.testing.assert_array_equal(a, b)
        assert np.all(np.abs(a) <= generate_stream(kind, 11, 30, BOX2).lipschitz)


def test_quadratic_stream_bounds():
    box = Hyperrectangle(np.array([1.0, 3.0]))
    s = generate_stream(QuadraticBox(2.0, 0.05), 0, 40, box)
    rng = np.random.default_rng(0)
    for t in range(1, 41):
        assert np.all(np.abs(s.loss(t).grad(box.uniform_point(rng))) <= s.lipschitz)


def test_invalid_stream_parameters():
    with pytest.raises(ValueError):
        SlowlyVaryingLinear(-1.0)
    with pytest.raises(ValueError):
        RandomLinear(0.0)
    with pytest.raises(ValueError):
        generate_stream(FixedLinear((1, 2, 3)), 0, 5, BOX2)
    with pytest.raises(TypeError):
        generate_stream(QuadraticBox(), 0, 5, Simplex(2))


def test_erm_streams():
    for kind in (ErmLogistic(20, 1, 3), ErmHinge(20, 1, 3), ErmLasso(20, 1, 0.1, 3)):
        s = generate_stream(kind, 0, 10, Hyperrectangle.cube(3))
        assert s.loss(1) is s.loss(10)
        assert np.all(np.abs(s.loss(1).grad(np.full(3, 0.3))) <= s.lipschitz + 1e-12)


# -- baselines

def test_ogd_moves_towards_vertex():
    box = Hyperrectangle(np.array([1.0]))
    rep = run_baseline("ogd", generate_stream(FixedLinear((1.0,)), 0, 50, box), box, 50)
    xs = [r.x[0] for r in rep.trace]
    assert all(b <= a for a, b in zip(xs, xs[1:]))
    assert rep.final_iterate[0] == -1.0


def test_adagrad_frozen_on_zero_gradients():
    rep = run_baseline("adagrad", generate_stream(FixedLinear((0.0, 0.0)), 0, 20, BOX2), BOX2, 20)
    assert all(np.array_equal(r.x, np.zeros(2)) for r in rep.trace)


def test_eg_stays_on_simplex():
    s = Simplex(5)
    rep = run_baseline("eg", generate_stream(RandomLinear(1.0, True), 0, 100, s), s, 100)
    assert all(s.contains(r.x) for r in rep.trace)


def test_baseline_domain_mismatch():
    with pytest.raises(TypeError):
        run_baseline("eg", generate_stream(RandomLinear(), 0, 5, BOX2), BOX2, 5)
    with pytest.raises(TypeError):
        run_baseline("adagrad", generate_stream(RandomLinear(), 0, 5, Simplex(2)), Simplex(2), 5)
    with pytest.raises(ValueError):
        run_baseline("newton", generate_stream(RandomLinear(), 0, 5, BOX2), BOX2, 5)


# -- data

def test_csv_round_trip(tmp_path):
    data = synthetic_regression(25, 4, 3)
    write_csv(tmp_path / "d.csv", data)
    back = read_csv(tmp_path / "d.csv")
    a = problem_from_dataset(data, "squared", alpha=0.1)
    b = problem_from_dataset(back, "squared", alpha=0.1)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.uniform(-1, 1, 4)
        np.testing.assert_array_equal(a.component_grads(x), b.component_grads(x))


def test_csv_needs_label_column(tmp_path):
    (tmp_path / "bad.csv").write_text("1\n2\n")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "bad.csv")


def test_erm_problem_dimension_check():
    with pytest.raises(ValueError):
        erm_problem_for(ErmLasso(n=20), Hyperrectangle.cube(5))
    with pytest.raises(TypeError):
        erm_problem_for(ErmLasso(n=2), Simplex(2))


# -- experiment

def test_seed_specs():
    assert parse_seeds("0-3,7") == [0, 1, 2, 3, 7]
    assert parse_seeds([4, 5]) == [4, 5]
    assert parse_seeds(2) == [2]
    with pytest.raises(ConfigError):
        parse_seeds("5-2")


def test_empty_seed_list_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": "random_linear", "algorithms": ["aogd"], "T": 5, "seeds": []})


@pytest.mark.parametrize("bad", [
    {"problem": "nope", "algorithms": ["aogd"], "T": 5},
    {"problem": "random_linear", "algorithms": ["sgd"], "T": 5},
    {"problem": "random_linear", "algorithms": ["aogd"], "T": -1},
    {"problem": "random_linear", "algorithms": ["aogd"]},
    {"problem": {"kind": "random_linear", "scale": -1}, "algorithms": ["aogd"], "T": 5},
    {"problem": "random_linear", "algorithms": ["aogd"], "T": 5, "colour": "red"},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_env_default_seed(monkeypatch):
    monkeypatch.setenv("AOFTRL_SEED", "42")
    cfg = ExperimentConfig.from_dict({"problem": "random_linear", "algorithms": ["aogd"], "T": 5})
    assert cfg.seeds == (42,)
    cfg = ExperimentConfig.from_dict({"problem": "random_linear", "algorithms": ["aogd"], "T": 5, "seeds": "3"})
    assert cfg.seeds == (3,)


def test_single_cell_matches_run_online():
    cfg = ExperimentConfig.from_dict({"problem": {"kind": "slowly_varying", "sigma": 0.01},
                                      "algorithms": ["aogd"], "T": 200, "seeds": [5], "domain": {"n": 3}})
    res = run_experiment(cfg)
    box = Hyperrectangle.cube(3)
    direct = run_online(generate_stream(SlowlyVaryingLinear(0.01), 5, 200, box), box, LastGradient(), AOGD(), 200)
    assert res.rows[0]["regret"] == direct.regret
    assert res.rows[0]["bounds"] == direct.bounds
    assert res.rows[0]["final_iterate"] == list(direct.final_iterate)


def test_comparison_schema():
    cfg = ExperimentConfig.from_dict({"problem": "random_linear", "algorithms": ["aogd", "adagrad", "ogd"],
                                      "T": 50, "seeds": "0-2"})
    doc = json.loads(run_experiment(cfg).to_json())
    assert set(doc) == {"config_echo", "rows", "aggregates"}
    assert len(doc["rows"]) == 9 and len(doc["aggregates"]) == 3
    for row in doc["rows"]:
        assert {"algorithm", "seed", "T", "regret", "bounds", "final_iterate", "runtime_ms"} <= set(row)
        assert row["runtime_ms"] is None
    assert [a["algorithm"] for a in doc["aggregates"]] == ["aogd", "adagrad", "ogd"]


def test_failed_cell_is_recorded():
    cfg = ExperimentConfig.from_dict({"problem": "random_linear", "algorithms": ["aogd", "erm_epoch"],
                                      "T": 20, "seeds": [0]})
    res = run_experiment(cfg)
    assert res.rows[0]["error"] is None
    assert "ERM" in res.rows[1]["error"]
    assert not res.all_bounds_hold()


def test_json_reports_are_byte_identical():
    cfg = ExperimentConfig.from_dict({"problem": {"kind": "random_linear", "scale": 1.0},
                                      "algorithms": ["aogd", {"kind": "cao_rcd"}], "T": 100, "seeds": "0-2"})
    assert run_experiment(cfg).to_json() == run_experiment(cfg).to_json()


def test_solver_seed_differs_from_stream_seed():
    assert solver_seed(0) != 0 and solver_seed(0) == solver_seed(0) and solver_seed(0) != solver_seed(1)


def test_toml_and_json_configs(tmp_path):
    (tmp_path / "c.toml").write_text('T = 30\nseeds = "0-1"\nalgorithms = ["aogd"]\n'
                                     '[problem]\nkind = "random_linear"\nscale = 0.5\n')
    (tmp_path / "c.json").write_text(json.dumps({"T": 30, "seeds": "0-1", "algorithms": ["aogd"],
                                                 "problem": {"kind": "random_linear", "scale": 0.5}}))
    a, b = load_config(tmp_path / "c.toml"), load_config(tmp_path / "c.json")
    assert a == b


# -- CLI

def test_cli_compare_and_run(tmp_path, capsys):
    out = tmp_path / "cmp.json"
    assert main(["compare", "--problem", "slowly_varying:sigma=0.01", "--algos", "aogd,adagrad", "--T", "100",
                 "--seeds", "0-1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 4
    assert (tmp_path / "cmp.csv").read_text().startswith("algorithm,seed,T,regret")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "random_linear", "algorithms": ["aogd"], "T": 20, "seeds": [1],
                               "output": str(tmp_path / "run.json")}))
    assert main(["run", "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "run.json").read_text())["rows"][0]["seed"] == 1


def test_cli_emit_curves(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "random_linear", "algorithms": ["aogd", "ogd"], "T": 25, "seeds": [0]}))
    assert main(["emit-curves", "--config", str(cfg), "--out", str(tmp_path / "curves")]) == 0
    lines = (tmp_path / "curves" / "curve_aogd_seed0.csv").read_text().splitlines()
    assert lines[0] == "t,regret" and len(lines) == 26


def test_cli_verify_bounds_exit_code(tmp_path):
    assert main(["verify-bounds", "--suite", "aoeg", "--seeds", "0-1", "--out", str(tmp_path / "v.json")]) == 0
    assert json.loads((tmp_path / "v.json").read_text())["passed"] is True


def test_cli_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "random_linear", "algorithms": ["aogd"], "T": 5, "seeds": []}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert "seed list is empty" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "aoftrl", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("run", "compare", "verify-bounds", "emit-curves"):
        assert cmd in out.stdout
