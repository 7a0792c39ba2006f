import csv
import io
import json
import shutil
import subprocess

import pytest

from levysup.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_small_x_json(capsys):
    code, out, _ = run(["verify", "small-x", "--spec", "brownian", "--t", "1", "--seed", "7"],
                       capsys)
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] is True and d["seed"] == 7 and d["runtime_s"] is None
    assert {"input", "computed", "target", "err", "pass"} <= set(d["rows"][0])


@pytest.mark.parametrize("argv", [["bogus"], [], ["density", "nope"],
                                  ["density", "pdf", "--t", "x,y", "--spec", "brownian"]])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err


def test_usage_message_names_flag(capsys):
    code, _, err = run(["density", "pdf", "--spec", "brownian", "--t", "a:b"], capsys)
    assert code == 2 and "--t" in err
    code, _, err = run(["density", "pdf", "--spec", "brownian", "--workers", "0"], capsys)
    assert code == 2 and "--workers" in err


def test_unavailable_is_usage_error(capsys):
    code, _, err = run(["verify", "large-t", "--spec", "smd"], capsys)
    assert code == 2 and "spec lacks Spitzer index" in err


def test_missing_spec(capsys):
    code, _, err = run(["density", "pdf"], capsys)
    assert code == 2 and "--spec" in err


def test_density_pdf_csv(capsys):
    code, out, _ = run(["density", "pdf", "--spec", "cauchy", "--t", "1,2", "--x", "0:1:3"],
                       capsys)
    assert code == 0
    assert out.startswith("t,x,value,abs_err,method\r\n")
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 1 + 6
    assert float(rows[1][2]) == pytest.approx(1 / 3.141592653589793)


def test_density_sup_byte_identical(capsys):
    argv = ["density", "sup", "--spec", "brownian", "--x", "0.5,1", "--oracle",
            "--oracle-n", "20000", "--seed", "4", "--workers", "2"]
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    assert a == b
    header = a.split("\r\n")[0].split(",")
    assert header[:6] == ["t", "x", "f_value", "abs_err", "atom_mass", "mass_check"]
    assert "oracle_value" in header


def test_seed_env_fallback_and_override(capsys, monkeypatch):
    argv = ["density", "sup", "--spec", "brownian", "--x", "1", "--oracle", "--oracle-n", "5000"]
    monkeypatch.setenv("LEVYSUP_SEED", "123")
    env = run(argv, capsys)[1]
    flag = run(argv + ["--seed", "123"], capsys)[1]
    other = run(argv + ["--seed", "124"], capsys)[1]
    assert env == flag
    assert env != other


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[spec]\nkind = brownian\nsigma = 2\n\n[run]\nseed = 5\nformat = json\n")
    code, out, _ = run(["density", "pdf", "--config", str(cfg), "--x", "0"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["value"] == pytest.approx(1 / (2 * 2.5066282746310002))
    # flags override the file
    code, out, _ = run(["density", "pdf", "--config", str(cfg), "--x", "0", "--sigma", "1",
                        "--format", "csv"], capsys)
    assert code == 0 and out.startswith("t,x,")


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[weird]\na = 1\n")
    assert run(["fluct", "table", "--config", str(cfg)], capsys)[0] == 2
    assert run(["fluct", "table", "--config", str(tmp_path / "missing.ini")], capsys)[0] == 2


def test_fluct_entrance_bridge(tmp_path, capsys):
    code, out, _ = run(["fluct", "table", "--spec", "brownian"], capsys)
    assert code == 0 and out.startswith("quantity,t_or_x,value,provenance")
    code, out, _ = run(["entrance", "--spec", "brownian", "--density", "meander", "--x", "1"],
                       capsys)
    assert code == 0 and "closed" in out
    dest = tmp_path / "b.json"
    code, out, _ = run(["bridge", "--spec", "brownian", "--N", "5000", "--n-steps", "256",
                        "--seed", "1", "--out", str(dest)], capsys)
    assert code == 0 and out == ""
    assert "ks_p" in json.loads(dest.read_text())


def test_failing_verification_exit_1(tmp_path, capsys):
    cfg = tmp_path / "strict.ini"
    cfg.write_text("[spec]\nkind = brownian\n\n[tolerances]\nclosed_form = 1e-9\n")
    code, out, _ = run(["verify", "small-x", "--config", str(cfg), "--x", "0.5,0.2"], capsys)
    assert code == 1
    assert json.loads(out)["verdict"] is False


def test_report_skips_unavailable(capsys):
    code, out, _ = run(["report", "--spec", "smd", "--negated", "--checks", "large-t,bound-suite"],
                       capsys)
    d = json.loads(out)
    assert [s["check"] for s in d["skipped"]] == ["large-t"]
    assert code == (0 if d["verdict"] else 1)


def test_console_script():
    exe = shutil.which("levysup")
    if exe is None:
        pytest.skip("console script not installed")
    p = subprocess.run([exe, "bogus"], capture_output=True, text=True)
    assert p.returncode == 2
