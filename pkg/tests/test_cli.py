import json

import numpy as np
import pytest

from envyalloc.cli import main
from envyalloc.core import write_json

from conftest import make_instance

EXAMPLE_2x2 = {"schema": "v1", "n": 2, "m": 2, "seed": 0,
               "dist": {"kind": "uniform"},
               "utilities": [[0.6, 0.1], [0.2, 0.7]]}

ONE_ITEM = {"schema": "v1", "n": 2, "m": 1, "seed": 0,
            "dist": {"kind": "uniform"},
            "utilities": [[0.4], [0.9]]}

BLOCK_2x4 = {"schema": "v1", "n": 2, "m": 4, "seed": 0,
             "dist": {"kind": "uniform"},
             "utilities": [[0.9, 0.9, 0.1, 0.1], [0.1, 0.1, 0.9, 0.9]]}

# both agents only clear the threshold on items 0 and 1
STARVED_2x4 = {"schema": "v1", "n": 2, "m": 4, "seed": 0,
               "dist": {"kind": "uniform"},
               "utilities": [[0.9, 0.9, 0.1, 0.1], [0.9, 0.9, 0.1, 0.1]]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, doc in (("example", EXAMPLE_2x2), ("one_item", ONE_ITEM),
                      ("block", BLOCK_2x4), ("starved", STARVED_2x4)):
        p = tmp_path / f"{name}.json"
        write_json(doc, str(p))
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGen:
    def test_gen_writes_instance(self, tmp_path, capsys):
        out = str(tmp_path / "inst.json")
        code, _, _ = run(capsys, "gen", "--n", "3", "--m", "6", "--seed", "5", "--out", out)
        assert code == 0
        doc = json.loads(open(out).read())
        assert doc["schema"] == "v1" and doc["n"] == 3 and len(doc["utilities"]) == 3

    def test_gen_stdout_deterministic(self, capsys):
        code1, out1, _ = run(capsys, "gen", "--n", "2", "--m", "2", "--seed", "9")
        code2, out2, _ = run(capsys, "gen", "--n", "2", "--m", "2", "--seed", "9")
        assert code1 == code2 == 0 and out1 == out2

    def test_gen_dist_forms(self, capsys):
        for dist in ("uniform", "staircase", "truncated_normal:0.5,0.2",
                     '{"kind":"truncated_normal","mu":0.5,"sigma":0.2}'):
            code, out, _ = run(capsys, "gen", "--n", "2", "--m", "2", "--dist", dist)
            assert code == 0

    def test_bad_dist(self, capsys):
        code, _, err = run(capsys, "gen", "--n", "2", "--m", "2", "--dist", "zipf")
        assert code == 1 and "error" in err


class TestSolve:
    def test_wmax_exit_zero(self, files, capsys):
        code, out, _ = run(capsys, "solve", files["example"], "--alg", "wmax")
        assert code == 0
        doc = json.loads(out)
        assert doc["status"] == "allocation" and doc["owner"] == [0, 1]
        assert doc["schema"] == "v1"

    def test_alg2_null_exit_two(self, files, capsys):
        code, out, _ = run(capsys, "solve", files["starved"], "--alg", "alg2",
                           "--r", "2", "--tau-mode", "fixed", "--tau", "0.5")
        assert code == 2
        doc = json.loads(out)
        assert doc["status"] == "null" and doc["owner"] is None

    def test_alg1_divisibility_error(self, tmp_path, capsys):
        inst = {"schema": "v1", "n": 2, "m": 5, "seed": 0, "dist": {"kind": "uniform"},
                "utilities": [[0.5] * 5, [0.5] * 5]}
        p = str(tmp_path / "odd.json")
        write_json(inst, p)
        code, _, err = run(capsys, "solve", p, "--alg", "alg1", "--r", "2",
                           "--tau-mode", "fixed", "--tau", "0.5")
        assert code == 1 and "error" in err

    def test_alg2_reports_removals(self, tmp_path, capsys):
        inst = {"schema": "v1", "n": 2, "m": 4, "seed": 0, "dist": {"kind": "uniform"},
                "utilities": [[0.9, 0.9, 0.9, 0.0], [0.95, 0.95, 0.0, 0.9]]}
        p = str(tmp_path / "prune.json")
        write_json(inst, p)
        code, out, _ = run(capsys, "solve", p, "--alg", "alg2", "--r", "2",
                           "--tau-mode", "fixed", "--tau", "0.6")
        doc = json.loads(out)
        assert code == 2
        assert doc["removals"] == [[0, 0, 1, 0], [1, 0, 0, 1]]

    def test_block_alg1_succeeds(self, files, capsys):
        code, out, _ = run(capsys, "solve", files["block"], "--alg", "alg1",
                           "--r", "2", "--tau-mode", "fixed", "--tau", "0.5")
        assert code == 0
        assert json.loads(out)["owner"] == [0, 0, 1, 1]


class TestCheck:
    def test_envy_free_exit_zero(self, files, tmp_path, capsys):
        alloc = str(tmp_path / "alloc.json")
        write_json({"schema": "v1", "owner": [0, 1]}, alloc)
        code, out, _ = run(capsys, "check", files["example"], alloc)
        assert code == 0
        assert json.loads(out)["envy_free"] is True

    def test_envious_exit_three(self, files, tmp_path, capsys):
        alloc = str(tmp_path / "alloc.json")
        write_json({"schema": "v1", "owner": [0]}, alloc)
        code, out, _ = run(capsys, "check", files["one_item"], alloc)
        assert code == 3
        doc = json.loads(out)
        assert doc["envy_free"] is False
        assert doc["witness"] == {"envier": 1, "envied": 0, "deficit": 0.9}

    def test_truncated_file_exit_one(self, files, tmp_path, capsys):
        alloc = str(tmp_path / "alloc.json")
        with open(alloc, "w") as fh:
            fh.write('{"schema": "v1", "owner": [0')
        code, _, err = run(capsys, "check", files["example"], alloc)
        assert code == 1 and "error" in err

    def test_dimension_mismatch_exit_one(self, files, tmp_path, capsys):
        alloc = str(tmp_path / "alloc.json")
        write_json({"schema": "v1", "owner": [0]}, alloc)
        code, _, _ = run(capsys, "check", files["example"], alloc)
        assert code == 1


class TestOracle:
    def test_exists(self, files, capsys):
        code, out, _ = run(capsys, "oracle", files["example"])
        assert code == 0
        doc = json.loads(out)
        assert doc["exists"] is True and doc["count"] == 1 and doc["witness"] == [0, 1]

    def test_not_exists(self, files, capsys):
        code, out, _ = run(capsys, "oracle", files["one_item"])
        assert code == 2
        assert json.loads(out)["exists"] is False

    def test_cap(self, tmp_path, capsys):
        inst = {"schema": "v1", "n": 3, "m": 16, "seed": 0, "dist": {"kind": "uniform"},
                "utilities": [[0.5] * 16] * 3}
        p = str(tmp_path / "big.json")
        write_json(inst, p)
        code, _, err = run(capsys, "oracle", p, "--cap", "1000")
        assert code == 1


class TestBounds:
    def test_constant_tau_at_1000(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "1000", "--m", "2000")
        assert code == 0
        doc = json.loads(out)
        entry = doc["tau"]["constant"]
        assert entry["error"] is None
        assert entry["tau"] == pytest.approx(0.51354, abs=1e-4)

    def test_constant_tau_error_flag(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "200", "--m", "400")
        doc = json.loads(out)
        assert doc["tau"]["constant"]["error"] is not None
        assert doc["tau"]["constant"]["tau"] is None

    def test_nonexistence_block(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "100", "--m", "150", "--epsilon", "0.5")
        doc = json.loads(out)
        block = doc["nonexistence"]
        assert block is not None
        assert block["remainder"] == 50
        assert block["per_allocation_log"] == pytest.approx(-89.90, abs=0.01)
        assert block["holds_at_scale"] is False

    def test_divisible_gives_null_block(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "100", "--m", "200")
        doc = json.loads(out)
        assert doc["nonexistence"] is None
        assert "remainder" in doc["nonexistence_reason"]

    def test_staircase_has_no_bound_block(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "100", "--m", "150", "--dist", "staircase")
        doc = json.loads(out)
        assert doc["poly_bound"] is None and doc["nonexistence"] is None

    def test_coupon_threshold_reported(self, capsys):
        code, out, _ = run(capsys, "bounds", "--n", "100", "--m", "150")
        doc = json.loads(out)
        assert doc["coupon_threshold"] == pytest.approx(460.517, abs=1e-3)


class TestCertify:
    def test_certify_exit_zero(self, tmp_path, capsys):
        inst = {"schema": "v1", "n": 2, "m": 4, "seed": 0, "dist": {"kind": "uniform"},
                "utilities": [[0.9, 0.9, 0.9, 0.0], [0.95, 0.95, 0.0, 0.9]]}
        p = str(tmp_path / "prune.json")
        write_json(inst, p)
        code, out, _ = run(capsys, "certify", p, "--r", "2",
                           "--tau-mode", "fixed", "--tau", "0.6")
        assert code == 0
        doc = json.loads(out)
        assert doc["certified"] is True
        assert len(doc["entries"]) == 2
        assert doc["degenerate_threshold"] is True


class TestSweep:
    def test_default_config_prints(self, capsys):
        code, out, _ = run(capsys, "sweep", "--default-config")
        assert code == 0
        doc = json.loads(out)
        assert doc["trials"] == 500 and len(doc["grid"]) == 15

    def test_sweep_runs_and_writes(self, tmp_path, capsys):
        cfg = {
            "schema": "v1",
            "grid": [[2, 2], [2, 4]],
            "dist": {"kind": "uniform"},
            "trials": 5,
            "algorithms": ["welfare_max", "alg2"],
            "tau_mode": {"mode": "fixed", "tau": 0.6},
            "master_seed": 7,
            "brute_cap": 1000,
        }
        cfg_path = str(tmp_path / "cfg.json")
        write_json(cfg, cfg_path)
        csv_path = str(tmp_path / "out.csv")
        json_path = str(tmp_path / "out.json")
        code, _, _ = run(capsys, "sweep", "--config", cfg_path,
                         "--out-csv", csv_path, "--out-json", json_path)
        assert code == 0
        lines = open(csv_path).read().strip().split("\n")
        assert lines[0].startswith("n,m,r,dist,algorithm")
        assert len(lines) == 4  # wmax at both points, alg2 only at (2, 4)
        doc = json.loads(open(json_path).read())
        assert doc["schema"] == "v1" and len(doc["rows"]) == 3

    def test_sweep_stdout_stable(self, tmp_path, capsys):
        cfg = {
            "schema": "v1", "grid": [[2, 2]], "dist": {"kind": "uniform"},
            "trials": 3, "algorithms": ["welfare_max"],
            "tau_mode": {"mode": "quantile", "kappa": 2.0},
            "master_seed": 11, "brute_cap": 100,
        }
        cfg_path = str(tmp_path / "cfg.json")
        write_json(cfg, cfg_path)
        _, out1, _ = run(capsys, "sweep", "--config", cfg_path)
        _, out2, _ = run(capsys, "sweep", "--config", cfg_path)
        assert out1 == out2
