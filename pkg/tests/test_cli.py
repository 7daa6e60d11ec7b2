import json

import pytest

from cglmp import cli
from cglmp.export import read_csv_rows


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    return tmp_path


def header(text):
    return [ln for ln in text.splitlines() if ln.startswith("#")]


def test_ideal_scan(outdir, capsys):
    assert cli.main(["ideal-scan", "--nmax", "4"]) == cli.EXIT_OK
    text = (outdir / "ideal-scan.csv").read_text()
    rows = read_csv_rows(text)
    values = [float(r["I_d"]) for r in rows]
    assert [int(r["d"]) for r in rows] == [2, 4, 8, 16]
    assert values[0] == pytest.approx(2.8284271247, abs=1e-9)
    assert all(x < y for x, y in zip(values, values[1:]))
    assert sum(ln.startswith("d=") for ln in capsys.readouterr().out.splitlines()) == 4


def test_header_carries_config(outdir):
    cli.main(["noisy-scan", "--fidelity", "0.9", "--nmax", "2"])
    h = header((outdir / "noisy-scan.csv").read_text())
    assert h[0] == "# schema_version=1"
    cfg = json.loads(h[1].split("=", 1)[1])
    assert cfg == {"command": "noisy-scan", "fidelity": 0.9, "nmax": 2}


def test_json_output(outdir):
    cli.main(["ideal-scan", "--nmax", "2", "--format", "json", "-o", "scan.json"])
    doc = json.loads((outdir / "scan.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["config"]["nmax"] == 2
    assert doc["results"][0]["d"] == 2 and doc["results"][0]["violation"] is True


def test_lhv_bound(outdir, capsys):
    assert cli.main(["lhv-bound", "--d", "3"]) == 0
    out = capsys.readouterr().out
    assert "max = 2.000000" in out and "strategy:" in out
    assert float(read_csv_rows((outdir / "lhv-bound.csv").read_text())[0]["max"]) == 2.0


def test_witness(outdir):
    cli.main(["witness", "--fidelity", "0.982", "--nmax", "12"])
    rows = read_csv_rows((outdir / "witness.csv").read_text())
    assert len(rows) == 12
    assert rows[-1]["d"] == "4096" and rows[-1]["S_L"] == "3294"


def test_angles(outdir):
    cli.main(["angles", "--d", "4"])
    text = (outdir / "angles.csv").read_text()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert lines[0] == "party,setting,outcome,qubit_m,theta_hwp_rad,gamma_qwp_rad"
    # 4 party settings x 4 outcomes x 2 qubits
    assert len(lines) - 1 == 32


def test_simulate_rerun_is_byte_identical(outdir):
    args = ["simulate", "--nmax", "3", "--events", "5000", "--resamples", "20", "--jitter", "0.01"]
    cli.main(args + ["-o", "a.csv"])
    cli.main(args + ["-o", "b.csv"])
    assert (outdir / "a.csv").read_bytes() == (outdir / "b.csv").read_bytes()
    cli.main(args + ["--seed", "1", "-o", "c.csv"])
    assert (outdir / "a.csv").read_bytes() != (outdir / "c.csv").read_bytes()


def test_tomo_record_roundtrip(outdir):
    base = ["tomo", "--nmax", "3", "--events", "10000", "--resamples", "5"]
    assert cli.main(base + ["--record", str(outdir / "rec.csv")]) == 0
    rec_text = (outdir / "rec.csv").read_text()
    assert rec_text.splitlines()[0] == "setting_label,count"
    assert cli.main(base + ["--input", str(outdir / "rec.csv"), "-o", "again.csv"]) == 0
    first = read_csv_rows((outdir / "tomo.csv").read_text())
    again = read_csv_rows((outdir / "again.csv").read_text())
    assert [r["I_d"] for r in first] == [r["I_d"] for r in again]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["ideal-scan", "--nmax", "13"],
        ["ideal-scan", "--nmax", "x"],
        ["noisy-scan", "--fidelity", "0.1"],
        ["witness", "--fidelity", "1.5"],
        ["angles", "--d", "6"],
        ["lhv-bound", "--d", "17"],
        ["simulate", "--events", "0"],
        ["simulate", "--jitter", "-1"],
        ["ideal-scan", "--format", "xml"],
    ],
)
def test_usage_errors(outdir, argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == cli.EXIT_USAGE
    assert capsys.readouterr().err
    assert not list(outdir.iterdir())


def test_runtime_errors(outdir, capsys):
    assert cli.main(["tomo", "--input", str(outdir / "missing.csv")]) == cli.EXIT_RUNTIME
    blocker = outdir / "file"
    blocker.write_text("x")
    assert cli.main(["ideal-scan", "--nmax", "1", "-o", str(blocker / "out.csv")]) == cli.EXIT_RUNTIME
    assert "Error" in capsys.readouterr().err


def test_module_entry_point(outdir):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "cglmp", "lhv-bound", "--d", "2"],
                          capture_output=True, text=True, cwd=outdir)
    assert proc.returncode == 0 and "max = 2.000000" in proc.stdout
