import csv
import json
import subprocess
import sys

import pytest

from realchar import cli

SCAN = {"theta": 0.7, "x_values": [2048, 4096, 8192], "phi": "standard_bump", "w": "standard_bump"}


def write_config(path, **overrides):
    cfg = dict(SCAN, **overrides)
    path.write_text(json.dumps(cfg, indent=1))
    return path


def read_csv(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


def test_gauss_command(capsys):
    assert cli.main(["gauss", "--m", "1", "--k", "15"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert (doc["coefficient"], doc["radicand"]) == (1, 15)
    assert doc["naive"][0] == pytest.approx(15**0.5)


def test_poisson_command(capsys):
    assert cli.main(["poisson", "--n", "15", "--x", "200"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["abs_error"] < 1e-6


@pytest.mark.parametrize("suite", ["oracle", "euler"])
def test_verify_suites_pass(suite, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert cli.main(["verify", suite, "--json", str(out)]) == 0
    assert "[PASS]" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["passed"] and doc["reports"][0]["name"] == suite


def test_verify_failure_exit(monkeypatch, capsys):
    from realchar import verify

    monkeypatch.setitem(verify._RUNNERS, "oracle", lambda: verify.SuiteReport("oracle", 1, ["forced"]))
    assert cli.main(["verify", "oracle"]) == 1
    assert "forced" in capsys.readouterr().out


def test_verify_unknown_suite():
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "everything"])
    assert exc.value.code == 2


def test_constants_default_and_scaling(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert cli.main(["constants", "--output", str(out)]) == 0
    base = json.loads(out.read_text())
    assert base["C1"] > 0 and base["C2"] < 0
    assert base["convergence"]["C1_rel_change"] < 1e-6
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"phi": {"kind": "standard_bump", "scale": 2}, "w": "standard_bump"}))
    assert cli.main(["constants", "--config", str(cfg), "--no-diagnostics"]) == 0
    capsys.readouterr()
    assert cli.main(["constants", "--config", str(cfg), "--no-diagnostics", "--output", str(out)]) == 0
    scaled = json.loads(out.read_text())
    assert scaled["C1"] == pytest.approx(4 * base["C1"], rel=1e-13)
    assert scaled["C2"] == pytest.approx(4 * base["C2"], rel=1e-13)


def test_config_errors_have_line_context(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "theta": 0.7,\n "phi": {"params": [1]},\n "w": "standard_bump"\n}')
    assert cli.main(["constants", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.json:3" in err and "kind" in err
    bad.write_text('{\n "theta": 0.7\n "phi": 1\n}')
    assert cli.main(["constants", "--config", str(bad)]) == 2
    assert "bad.json:3" in capsys.readouterr().err
    missing = write_config(tmp_path / "m.json")
    cfg = json.loads(missing.read_text())
    del cfg["w"]
    missing.write_text(json.dumps(cfg))
    assert cli.main(["scan", str(missing)]) == 2
    assert "missing window 'w'" in capsys.readouterr().err


@pytest.mark.parametrize("theta", [0.4, 1.2])
def test_scan_rejects_region_before_compute(tmp_path, theta, capsys):
    cfg = write_config(tmp_path / "s.json", theta=theta, output=str(tmp_path / "s.csv"))
    assert cli.main(["scan", str(cfg)]) == 2
    assert "Y <= X <= Y^2" in capsys.readouterr().err
    assert not (tmp_path / "s.csv").exists()
    assert not (tmp_path / "s.ckpt.jsonl").exists()


def test_scan_rejects_rounding_outside_region(tmp_path, capsys):
    # X = 2^15 at theta 1/2 rounds Y down to 181 and 181^2 < X
    cfg = write_config(tmp_path / "s.json", theta=0.5, x_values=[32768], output=str(tmp_path / "s.csv"))
    assert cli.main(["scan", str(cfg)]) == 2
    assert "outside the region" in capsys.readouterr().err


def test_scan_resume_matches_uninterrupted(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("REALCHAR_THREADS", "3")
    a = write_config(tmp_path / "a.json", output=str(tmp_path / "a.csv"), calibrate_oracle_at=2048)
    b = write_config(tmp_path / "b.json", output=str(tmp_path / "b.csv"), calibrate_oracle_at=2048)
    assert cli.main(["scan", str(a), "--max-points", "1"]) == 0
    assert len(read_csv(tmp_path / "a.csv")) == 1
    first = (tmp_path / "a.ckpt.jsonl").read_text()
    assert cli.main(["scan", str(a)]) == 0
    assert (tmp_path / "a.ckpt.jsonl").read_text().startswith(first)
    assert cli.main(["scan", str(a)]) == 0
    assert len((tmp_path / "a.ckpt.jsonl").read_text().splitlines()) == 3
    assert cli.main(["scan", str(b)]) == 0
    capsys.readouterr()

    rows_a, rows_b = read_csv(tmp_path / "a.csv"), read_csv(tmp_path / "b.csv")
    assert list(rows_a[0]) == list(cli.CSV_COLUMNS)
    assert len(rows_a) == 3
    for ra, rb in zip(rows_a, rows_b):
        # wall-clock seconds differ between separate runs; everything else must not
        assert {k: v for k, v in ra.items() if k != "seconds"} == {k: v for k, v in rb.items() if k != "seconds"}

    log = [json.loads(line) for line in (tmp_path / "a.jsonl").read_text().splitlines()]
    for row, rec in zip(rows_a, log):
        for col in cli.CSV_COLUMNS:
            assert float(row[col]) == rec[col]
        assert rec["threads"] == 3
        assert rec["ratio"] > 0
        assert rec["Y"] == round(rec["Y_raw"])
    assert abs(log[0]["oracle"]["rel_diff"]) < 1e-9
    assert "oracle" not in log[1]


def test_scan_torn_checkpoint_line(tmp_path):
    cfg = write_config(tmp_path / "a.json", x_values=[2048], output=str(tmp_path / "a.csv"))
    (tmp_path / "a.ckpt.jsonl").write_text('{"key": "[2048.0, 0.7')
    assert cli.main(["scan", str(cfg)]) == 0
    assert len(read_csv(tmp_path / "a.csv")) == 1
    assert len(cli.load_checkpoint(tmp_path / "a.ckpt.jsonl")) == 1
    assert cli.main(["scan", str(cfg)]) == 0
    assert len((tmp_path / "a.ckpt.jsonl").read_text().splitlines()) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "realchar", "gauss", "--m", "3", "--k", "9"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["coefficient"] == -3
