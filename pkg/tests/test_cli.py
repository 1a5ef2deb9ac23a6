import hashlib
import json
import os

import pytest

from sincount.cli import config_sha, main

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "synth.csv")

BASE_CONFIG = {
    "scenario": {"standard": {"snr_db": -4.0}},
    "criteria": [{"name": "gic"}, {"name": "pmep-ir", "kappa_ir": 0.25}],
    "approach": {"kind": "known"},
    "snr_grid_db": [-4.0],
    "trials": 500,
    "master_seed": 11,
}


@pytest.fixture
def config_path(tmp_path):
    def write(doc):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def run(args, capsys):
    rc = main(args)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_synth_matches_golden_file(config_path, capsys):
    rc, out, _ = run(["synth", "--config", config_path(BASE_CONFIG)], capsys)
    assert rc == 0
    with open(GOLDEN, "r", encoding="utf-8") as fh:
        assert out == fh.read()


def test_seed_flag_overrides_config(config_path, capsys):
    path = config_path(BASE_CONFIG)
    rc, out, _ = run(["synth", "--config", path, "--seed", "99"], capsys)
    assert rc == 0
    header = out.splitlines()[0]
    assert header.endswith("seed=99")
    assert f"config_sha={config_sha(BASE_CONFIG)}" in header


def test_config_sha_is_order_insensitive():
    doc = {"b": 1, "a": [1, 2]}
    again = {"a": [1, 2], "b": 1}
    assert config_sha(doc) == config_sha(again)
    assert len(config_sha(doc)) == 12


def test_mc_csv_schema_and_determinism(config_path, capsys):
    path = config_path(BASE_CONFIG)
    rc, out1, _ = run(["mc", "--config", path], capsys)
    assert rc == 0
    rc, out2, _ = run(["mc", "--config", path], capsys)
    assert out1 == out2
    lines = out1.splitlines()
    assert lines[0].startswith("# sincount mc config_sha=")
    assert lines[1] == ("snr_db,criterion,approach,trials,p_e,p_e_lo,p_e_hi,"
                        "p_a,p_a_lo,p_a_hi,ratio_gt1_eq1,degenerate")
    rows = [line.split(",") for line in lines[2:]]
    assert [r[1] for r in rows] == ["gic", "pmep-ir"]
    for r in rows:
        assert 0.0 <= float(r[4]) <= 1.0


def test_mc_json_format(config_path, tmp_path, capsys):
    out_file = tmp_path / "report.json"
    rc, out, _ = run(["mc", "--config", config_path(BASE_CONFIG),
                      "--format", "json", "--out", str(out_file)], capsys)
    assert rc == 0
    assert out == ""
    doc = json.loads(out_file.read_text())
    assert doc["subcommand"] == "mc"
    assert doc["seed"] == 11
    assert doc["columns"][0] == "snr_db"
    assert len(doc["rows"]) == 2


def test_snr_flag_expands_grid(config_path, capsys):
    rc, out, _ = run(["mc", "--config", config_path(BASE_CONFIG),
                      "--snr-db=-4,0", "--trials", "200"], capsys)
    assert rc == 0
    rows = out.splitlines()[2:]
    assert len(rows) == 4  # two SNRs x two criteria


def test_theory_subcommand(config_path, capsys):
    rc, out, _ = run(["theory", "--config", config_path(BASE_CONFIG)], capsys)
    assert rc == 0
    rows = [line.split(",") for line in out.splitlines()[2:]]
    # frozen known-frequency abridged values at -4 dB
    assert float(rows[0][3]) == pytest.approx(0.0278246232, abs=1e-8)
    assert float(rows[1][3]) == pytest.approx(0.0342676445, abs=1e-6)


def test_consistency_subcommand_with_direct_weights(config_path, capsys):
    doc = {"consistency": {"d_n_sq": [1.0, 1.0, 1.0], "n_total": 5}}
    rc, out, _ = run(["consistency", "--config", config_path(doc)], capsys)
    assert rc == 0
    values = dict(line.split(",") for line in out.splitlines()[2:])
    assert float(values["rho"]) == 1.0
    assert float(values["kappa_i_inf_simple"]) == pytest.approx(8.8274691196)


def test_missing_criteria_exits_2(config_path, capsys):
    doc = dict(BASE_CONFIG)
    del doc["criteria"]
    rc, _, err = run(["mc", "--config", config_path(doc)], capsys)
    assert rc == 2
    assert "criteria" in err


def test_unknown_criterion_exits_2(config_path, capsys):
    doc = dict(BASE_CONFIG)
    doc["criteria"] = [{"name": "bic"}]
    rc, _, err = run(["mc", "--config", config_path(doc)], capsys)
    assert rc == 2
    assert "bic" in err


def test_missing_config_file_exits_2(capsys):
    rc, _, err = run(["mc", "--config", "/nonexistent/config.json"], capsys)
    assert rc == 2
    assert "cannot read" in err


def test_eef_theory_request_exits_2(config_path, capsys):
    doc = dict(BASE_CONFIG)
    doc["criteria"] = [{"name": "eef"}]
    rc, _, err = run(["theory", "--config", config_path(doc)], capsys)
    assert rc == 2
    assert "eef" in err


def test_degenerate_scenario_exits_3(config_path, capsys):
    w = 1.25
    doc = dict(BASE_CONFIG)
    doc["scenario"] = {
        "n_samples": 64,
        "noise_level": 1.0,
        "max_order": 2,
        "noise_known": True,
        "components": [
            {"amplitude": 1.0, "frequency": w, "phase": 0.0,
             "band": [w - 0.3, w + 0.3]},
            {"amplitude": 1.0, "frequency": w + 1e-13, "phase": 0.0,
             "band": [w - 0.3, w + 0.3]},
        ],
        "extra_candidates": [],
    }
    rc, _, err = run(["mc", "--config", config_path(doc)], capsys)
    assert rc == 3
    assert "DegenerateStatsError" in err


def test_tune_subcommand(config_path, capsys):
    doc = {
        "scenario": {"standard": {"snr_db": -4.0}},
        "tune": {"family": "pmep-ir", "grid_points": 5,
                 "range": [0.2, 0.3], "refine": False},
        "master_seed": 7,
    }
    rc, out, _ = run(["tune", "--config", config_path(doc)], capsys)
    assert rc == 0
    lines = out.splitlines()
    assert lines[1] == ("family,kappa_opt,objective,objective_value,"
                        "consistency_ok,flat")
    fields = lines[2].split(",")
    assert fields[0] == "pmep-ir"
    assert 0.2 <= float(fields[1]) <= 0.3
    assert fields[4] == "true"
