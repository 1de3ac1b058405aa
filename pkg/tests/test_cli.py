import json

import pytest

from conftest import PAIRING_PATH
from qdnoma.cli import load_channel_dump, main


def _run(*argv):
    return main([str(a) for a in argv])


def test_dump_solve_oracle_agree(tmp_path):
    dump = tmp_path / "ch.json"
    assert _run("dump", "--config", PAIRING_PATH, "--seed", 5, "--p-max", 0.05,
                "--out", dump) == 0
    ch, sigma2, rates, p_max = load_channel_dump(dump)
    assert p_max == 0.05 and ch.antennas == 2
    assert _run("solve", "--channels", dump, "--out", tmp_path / "s.json") == 0
    assert _run("oracle", "--channels", dump, "--out", tmp_path / "o.json") == 0
    s = json.loads((tmp_path / "s.json").read_text())
    o = json.loads((tmp_path / "o.json").read_text())
    assert (s["dpc"] is not None) == o["feasible"]
    if o["feasible"]:
        assert s["dpc"]["total_power"] == pytest.approx(o["total_power"], rel=1e-3)
        assert s["dpc"]["min_residual"] >= -1e-9


def test_pair_output(tmp_path):
    out = tmp_path / "p.json"
    assert _run("pair", "--config", PAIRING_PATH, "--k", 4, "--p-max", 0.2,
                "--strategy", "qdup", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert sorted(doc["assignment"]["pi1"]) == [0, 1, 2, 3]
    assert len(doc["groups"]) == 4


def test_montecarlo_csv(tmp_path):
    out = tmp_path / "mc.csv"
    assert _run("montecarlo", "--config", PAIRING_PATH, "--trials", 5, "--k", "2,4",
                "--pmax-per-group", 0.05, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,K,p_max,trials,outage_prob,ci95,mean_power_w,seed"
    assert len(lines) == 9


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"antennas": 2, "nope": 3}')
    assert _run("solve", "--config", cfg) == 2
    assert "nope" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert _run("solve", "--channels", tmp_path / "none.json") == 2


def test_unwritable_output_exit_code(tmp_path):
    assert _run("montecarlo", "--trials", 1, "--k", 1,
                "--out", tmp_path / "no" / "such" / "dir.csv") == 2


def test_bad_dump_fields(tmp_path):
    dump = tmp_path / "ch.json"
    _run("dump", "--seed", 1, "--out", dump)
    doc = json.loads(dump.read_text())
    doc["extra"] = 1
    dump.write_text(json.dumps(doc))
    assert _run("solve", "--channels", dump) == 2


def test_seed_range():
    with pytest.raises(SystemExit):
        main(["solve", "--seed", str(2**64)])
