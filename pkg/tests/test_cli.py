import csv
import subprocess
import sys

import pytest

from strichlab.cli import RunConfig, UsageError, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_exponents_row(capsys):
    assert main(["exponents", "3", "2", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,p,q,s1,s2,s,region,alpha_thm1,alpha_thm2,alpha_wave"
    assert lines[1] == "3,2,2,-1/2,0,-1,necessity-violated,,,"


def test_exponents_classical_thresholds(capsys):
    assert main(["exponents", "3", "inf", "4"]) == 0
    assert capsys.readouterr().out.strip().splitlines()[1] == "3,inf,4,0,-1/4,1,classical,0,0,0"


@pytest.mark.parametrize("argv", [["exponents", "1", "2", "2"], ["exponents", "3", "1", "2"], ["exponents", "3"], ["nonsense"]])
def test_usage_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().out == ""


def test_missing_config_exits_one(tmp_path):
    assert main(["run", str(tmp_path / "absent.ini")]) == 1


def test_bad_config_exits_one(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[run]\nexperiment = teleport\n")
    assert main(["run", str(cfg)]) == 1
    cfg.write_text("not an ini file")
    assert main(["run", str(cfg)]) == 1


def test_run_config_round_trip():
    cfg = RunConfig("knapp", {"n": "2", "p": "4", "q": "2", "r": "16 32 64 128", "extra_pair": "inf,4 2,4"}, "out", 3)
    back = RunConfig.from_text(cfg.to_text())
    assert back == cfg
    argv = back.argv()
    assert argv[:1] == ["knapp"]
    assert argv.count("--extra-pair") == 2
    assert argv[-2:] == ["--output-dir", "out"]


def test_run_config_requires_positional_fields():
    with pytest.raises(UsageError):
        RunConfig("exponents", {"n": "2", "p": "4"}).argv()


def _knapp_config(path, out):
    cfg = RunConfig("knapp", {"n": "2", "p": "4", "q": "2", "R": "16 32 64 128", "extra_pair": "inf,4"}, str(out))
    path.write_text(cfg.to_text())
    return path


def test_run_knapp_writes_identical_csvs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(_knapp_config(tmp_path / "a.ini", a)), "--workers", "1"]) == 0
    assert main(["run", str(_knapp_config(tmp_path / "b.ini", b)), "--workers", "2"]) == 0
    for name in ("knapp_samples.csv", "knapp_summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = read_csv(a / "knapp_samples.csv")
    assert len(rows) == 8
    assert {r["p"] for r in rows} == {"4", "inf"}


def test_knapp_failure_exit_code(tmp_path, capsys):
    # a tolerance of zero cannot be met by a fitted slope
    argv = ["knapp", "--n", "2", "--p", "4", "--q", "2", "--R", "16", "32", "64", "128", "--tol", "0", "--workers", "1"]
    assert main(argv + ["--output-dir", str(tmp_path)]) == 2


def test_knapp_both_centerings_report_mass_ratio(tmp_path):
    argv = ["knapp", "--n", "2", "--p", "4", "--q", "2", "--R", "64", "128", "256", "512", "--centering", "both"]
    main(argv + ["--workers", "1", "--output-dir", str(tmp_path)])
    text = (tmp_path / "knapp_summary.csv").read_text()
    assert "mass" in text
    assert "phase" in text and "group" in text


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("STRICHLAB_OUTPUT_DIR", str(tmp_path))
    assert main(["bessel-audit", "--table-nu", "2.5", "--table-r-max", "64"]) == 0
    assert (tmp_path / "bessel_audit.csv").is_file()
    rows = read_csv(tmp_path / "bessel_residuals.csv")
    assert rows and set(rows[0]) == {"nu", "regime", "r", "J", "main", "residual_times_r"}


def test_bessel_audit_negative_control(tmp_path):
    assert main(["bessel-audit", "--c-max", "0.01", "--table-nu", "2.5", "--table-r-max", "64", "--output-dir", str(tmp_path)]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "strichlab.cli", "exponents", "2", "4", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("2,4,2,")
