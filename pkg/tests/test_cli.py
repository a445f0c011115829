import json

import pytest

from fracburgers.cli import main

SPEC = """\
name = "{name}"
equation = "burgers"

[grid]
n = 256
L = 20.0

[solver]
gamma = {gamma}
T_final = 2.0
diag_interval = 0.1

[snapshots]
count = 20

[initial]
generator = "random_band"
seed = 7
params = {{ j_lo = -1.0, j_hi = 2.0, amplitude = 0.5 }}

[diagnostics]
list = ["energy", "fmp", "besov", "decay", "profile_first", "analyticity"]
decay_window = [0.5, 2.0]
"""

HALT = """\
name = "steep"
equation = "burgers"

[grid]
n = 1024
L = 3.141592653589793

[solver]
gamma = 0.6
T_final = 2.0
gradient_halt = true

[initial]
generator = "sine"
params = { amplitude = -4.0 }
"""


def _spec(tmp_path, name="demo", gamma=1.0, text=None):
    p = tmp_path / f"{name}.toml"
    p.write_text(text if text is not None else SPEC.format(name=name, gamma=gamma))
    return p


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", str(_spec(tmp_path)), "--out", str(out)]) == 0
    rows = (out / "diagnostics.csv").read_text().splitlines()
    snaps = sorted((out / "snapshots").glob("*.field"))
    assert len(snaps) == 21  # t = 0 plus 20 requested times
    assert len(rows) - 2 >= len(snaps)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["spec"]["initial"]["seed"] == 7
    assert meta["spec"]["solver"]["gamma"] == 1.0
    for name in ("energy.csv", "besov.csv", "fmp.json", "decay.json", "profile_first.csv", "analyticity.csv"):
        assert (out / name).exists(), name
    assert list((out / "plots").glob("*.gp"))


def test_run_is_deterministic(tmp_path):
    spec = _spec(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(spec), "--out", str(a)]) == 0
    assert main(["run", str(spec), "--out", str(b)]) == 0
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file() and p.name != "metadata.json")
    assert files
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_schema_violation_exit_2(tmp_path, capsys):
    assert main(["run", str(_spec(tmp_path, gamma=3.0)), "--out", str(tmp_path / "x")]) == 2
    assert "gamma" in capsys.readouterr().err


def test_halt_exit_3_dumps_state(tmp_path):
    out = tmp_path / "steep"
    assert main(["run", str(_spec(tmp_path, "steep", text=HALT)), "--out", str(out)]) == 3
    halt = json.loads((out / "halt.json").read_text())
    assert halt["reason"] == "gradient growth"
    assert list((out / "snapshots").glob("*.field"))


def test_run_refuses_foreign_directory(tmp_path):
    out = tmp_path / "shared"
    assert main(["run", str(_spec(tmp_path, "one")), "--out", str(out)]) == 0
    assert main(["run", str(_spec(tmp_path, "two")), "--out", str(out)]) == 2


def test_report_tables_and_comparison(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", str(_spec(tmp_path, "first")), "--out", str(a)])
    main(["run", str(_spec(tmp_path, "second", gamma=1.5)), "--out", str(b)])
    capsys.readouterr()
    assert main(["report", str(a), str(b)]) == 0
    text = capsys.readouterr().out
    assert "decay fits" in text and "slope:first" in text and "slope:second" in text
    assert "analyticity radius" in text
    assert "notice: no profile_second diagnostics" in text
    assert (a / "report.txt").exists()


def test_report_refuses_mixed_hashes(tmp_path, capsys):
    a = tmp_path / "a"
    main(["run", str(_spec(tmp_path)), "--out", str(a)])
    p = a / "energy.csv"
    lines = p.read_text().split("\n", 1)
    p.write_text("# spec_hash=0000000000000000\n" + lines[1])
    assert main(["report", str(a)]) == 1
    assert "mixes outputs" in capsys.readouterr().err
    assert main(["report", str(a), "--force"]) == 0


def test_report_missing_run(tmp_path):
    assert main(["report", str(tmp_path / "nothing")]) == 1


def test_list_generators(capsys):
    assert main(["list-generators"]) == 0
    out = capsys.readouterr().out
    assert "gaussian (1D)" in out and "random_band2d (2D)" in out


def test_verify_subset(capsys):
    assert main(["--threads", "1", "verify", "--only", "3,4"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]  3" in out and "[PASS]  4" in out


def test_verify_rejects_empty_tier():
    with pytest.raises(SystemExit) as e:
        main(["verify", "--tier", ""])
    assert e.value.code == 2
