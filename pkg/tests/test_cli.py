import csv
import io
import json
import math
import subprocess
import sys

import pytest

from bfnet.cli import CSV_COLUMNS, JobError, main, parse_job, set_path

FOCK1 = {"type": "fock", "n": 1}
BS50 = {"type": "beamsplitter", "theta": math.pi / 4, "phi": 0.0}


def job(modes, network=BS50, cutoff=12, **extra):
    return {"schema": 1, "modes": modes, "network": network, "cutoff": cutoff, **extra}


@pytest.fixture
def write_job(tmp_path):
    def _write(data, name="job.json"):
        p = tmp_path / name
        p.write_text(data if isinstance(data, str) else json.dumps(data, indent=1))
        return str(p)

    return _write


def fields(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and not line.startswith("Entangled") and not line.startswith("Product"))


def test_run_hom(write_job, capsys, tmp_path):
    report = tmp_path / "report.txt"
    code = main(["run", write_job(job([FOCK1, FOCK1], cutoff=6)), "--report", str(report)])
    out = capsys.readouterr().out
    assert code == 0
    f = fields(out)
    assert float(f["max_entropy_bits"]) == pytest.approx(1.0, abs=1e-10)
    assert "Entangled HigherOrderTermsPresent" in out
    assert f["agreement"] == "OK"
    assert report.read_text() == out


def test_run_coherent(write_job, capsys):
    modes = [{"type": "coherent", "alpha": 0.5}, {"type": "coherent", "alpha": [0.0, 0.3]}]
    assert main(["run", write_job(job(modes, {"type": "haar", "n": 2, "seed": 4}, cutoff=14))]) == 0
    out = capsys.readouterr().out
    f = fields(out)
    assert float(f["max_entropy_bits"]) <= 1e-9
    assert "Product AllCoherent" in out
    assert f["log_separability"] == "product"


def test_run_equal_squeezing(write_job, capsys):
    sq = {"type": "squeezed", "gamma": 0.3, "axis_phase": 0.0}
    assert main(["run", write_job(job([sq, sq], {"type": "beamsplitter", "theta": 0.4}, cutoff=20))]) == 0
    out = capsys.readouterr().out
    f = fields(out)
    assert float(f["max_entropy_bits"]) <= float(f["tolerance"])
    assert "Product EqualSqueezingRealRephasableU" in out
    assert f["agreement"] == "OK"


def test_run_matrix_network(write_job, capsys):
    r = math.sqrt(0.5)
    net = {"type": "matrix", "dim": 2, "entries": [[r, 0], [0, r], [0, r], [r, 0]]}
    assert main(["run", write_job(job([FOCK1, FOCK1], net, cutoff=4))]) == 0
    assert "agreement=OK" in capsys.readouterr().out


@pytest.mark.parametrize(
    "data,needle",
    [
        ('{"schema": 1,\n "modes": [}', "line 2"),
        (job([FOCK1, FOCK1], schema=2), "schema"),
        (job([FOCK1]), "dimension"),
        (job([FOCK1, {"type": "laser"}]), "modes[1]"),
        (job([FOCK1, FOCK1], {"type": "beamsplitter", "theta": 2.0}), "network"),
        (job([FOCK1, FOCK1], cutoff=40), "cutoff"),
        (job([FOCK1, FOCK1], tolerances={"fudge": 1}), "tolerances"),
        (job([FOCK1, FOCK1], {"type": "matrix", "dim": 2, "entries": [[1, 0], [1, 0], [0, 0], [1, 0]]}), "unitary"),
    ],
)
def test_malformed_job_exit_1(write_job, capsys, tmp_path, data, needle):
    report = tmp_path / "r.txt"
    code = main(["run", write_job(data), "--report", str(report)])
    captured = capsys.readouterr()
    assert code == 1
    assert needle in captured.err
    assert captured.out == ""
    assert not report.exists()


def test_missing_file_and_usage_errors(capsys):
    assert main(["run", "/nonexistent/job.json"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_env_override_takes_precedence(write_job, capsys, monkeypatch):
    path = write_job(job([FOCK1, FOCK1], cutoff=6, tolerances={"oracle_tol": 1e-10}))
    monkeypatch.setenv("BFNET_ORACLE_TOL", "-1")
    assert main(["run", path]) == 2
    assert "paths=MISMATCH" in capsys.readouterr().out
    monkeypatch.setenv("BFNET_ORACLE_TOL", "abc")
    assert main(["run", path]) == 1


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_scan_squeezing_minimum(write_job, capsys):
    sq = {"type": "squeezed", "gamma": 0.3, "axis_phase": 0.0}
    path = write_job(job([sq, dict(sq)], cutoff=20))
    grid = "0.0,0.1,0.2,0.3,0.4,0.5,0.6"
    assert main(["scan", path, "--param", "modes[1].gamma", "--grid", grid]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [r["value"] for r in rows] == ["0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6"]
    ent = [float(r["max_entropy_bits"]) for r in rows]
    assert ent.index(min(ent)) == 3
    assert ent[3] <= 1e-9
    assert rows[3]["verdict"] == "Product" and all(r["verdict"] == "Entangled" for i, r in enumerate(rows) if i != 3)
    assert all(r["agree"] == "OK" for r in rows)


def hom_entropy(theta):
    # marginal of |1,1> through the beamsplitter: p1 = cos^2 2t, p0 = p2 = sin^2 2t / 2
    p1 = math.cos(2 * theta) ** 2
    probs = [p1, (1 - p1) / 2, (1 - p1) / 2]
    return -sum(p * math.log2(p) for p in probs if p > 0)


def test_scan_theta_sweep(write_job, capsys, tmp_path):
    out = tmp_path / "scan.csv"
    path = write_job(job([FOCK1, FOCK1], cutoff=6))
    t_max = 0.5 * math.asin(math.sqrt(2 / 3))
    thetas = [0.1, 0.3, t_max, math.pi / 4, math.pi / 2 - t_max, 1.2, 1.4]
    code = main(["scan", path, "--param", "network.theta", "--grid", ",".join(map(repr, thetas)), "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    rows = read_csv(out.read_text())
    ent = [float(r["max_entropy_bits"]) for r in rows]
    for t, e in zip(thetas, ent):
        assert e == pytest.approx(hom_entropy(t), abs=1e-10)
    # symmetric about pi/4, where the entropy is exactly one bit
    assert ent[3] == pytest.approx(1.0, abs=1e-10)
    assert ent[2] == pytest.approx(ent[4], abs=1e-10) == pytest.approx(math.log2(3), abs=1e-10)
    assert max(ent) == pytest.approx(math.log2(3), abs=1e-10)
    assert all(r["verdict"] == "Entangled" and r["agree"] == "OK" for r in rows)


def test_scan_empty_grid(write_job, capsys):
    assert main(["scan", write_job(job([FOCK1, FOCK1])), "--param", "network.theta", "--grid", ""]) == 0
    assert capsys.readouterr().out == ",".join(CSV_COLUMNS) + "\n"


def test_scan_bad_path(write_job, capsys):
    path = write_job(job([FOCK1, FOCK1]))
    assert main(["scan", path, "--param", "modes[5].gamma", "--grid", "0.1"]) == 1
    assert main(["scan", path, "--param", "network.theta", "--grid", "a,b"]) == 1


def test_set_path():
    base = job([FOCK1, FOCK1])
    new = set_path(base, "modes[0].n", 2)
    assert new["modes"][0]["n"] == 2 and base["modes"][0]["n"] == 1
    with pytest.raises(JobError):
        set_path(base, "nothere.x", 1)
    assert parse_job(set_path(base, "network.theta", 0.5)).network.dim == 2


def test_suite_single_case(capsys):
    assert main(["suite", "--seed", "7", "--count", "1"]) == 0
    assert "1/1 agree" in capsys.readouterr().out


def test_suite_negative_control(capsys):
    # a fixed 1e-16 product tolerance cannot absorb truncation loss
    code = main(["suite", "--seed", "7", "--count", "20", "--tol", "1e-16"])
    out = capsys.readouterr().out
    assert code == 2
    assert "mismatched case seeds:" in out
    assert "20/20 agree" not in out


def test_suite_bad_arguments(capsys):
    assert main(["suite", "--count", "0"]) == 1
    assert main(["suite", "--dims", "1,2"]) == 1


def test_dump_formats(write_job, capsys):
    path = write_job(job([FOCK1, FOCK1], cutoff=4))
    assert main(["dump", path, "--what", "fock"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# kind=fock-amplitudes modes=2 cutoff=4"
    assert lines[1] == "2 0 -0.707106781187 0"
    assert lines[3] == "0 2 0.707106781187 0"
    assert main(["dump", path, "--what", "input-series"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# kind=bf-coefficients")
    assert "1 1 1 0" in lines


def test_run_outputs_and_determinism(write_job, tmp_path):
    modes = [{"type": "cat", "alpha": 0.7, "parity": 1}, {"type": "squeezed", "gamma": 0.2, "axis_phase": 0.3}, FOCK1]
    path = write_job(job(modes, {"type": "haar", "n": 3, "seed": 11}, cutoff=8))
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        proc = subprocess.run(
            [sys.executable, "-m", "bfnet", "run", path, "--dump-series", str(d / "s.txt"), "--dump-fock", str(d / "f.txt")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append((proc.stdout, (d / "s.txt").read_bytes(), (d / "f.txt").read_bytes()))
    assert outs[0] == outs[1]
    proc = subprocess.run([sys.executable, "-m", "bfnet", "suite", "--count", "5"], capture_output=True, text=True)
    again = subprocess.run([sys.executable, "-m", "bfnet", "suite", "--count", "5"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == again.stdout


def test_help_documents_env():
    proc = subprocess.run([sys.executable, "-m", "bfnet", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "BFNET_PRODUCT_TOL" in proc.stdout
