import csv
import json

from fourier_edges.cli import EXIT_CONTRACT, EXIT_NONCONVERGED, EXIT_OK, main
from fourier_edges.harness import module_versions

SMALL = ["--M", "32", "--J", "16", "--function", "f3"]


def run(tmp_path, *args):
    return main(list(args) + SMALL + ["--out", str(tmp_path)])


def read_csv(p):
    lines = p.read_text().splitlines()
    head = [l for l in lines if l.startswith("#")]
    rows = list(csv.reader([l for l in lines if not l.startswith("#")]))
    return head, rows


def test_modes_json(tmp_path):
    assert run(tmp_path, "modes", "--seed", "3") == EXIT_OK
    d = json.loads((tmp_path / "modes.json").read_text())
    assert set(d) >= {"pattern", "M", "seed", "v", "modes"}
    assert d["M"] == 32 and d["seed"] == 3 and len(d["modes"]) == 65


def test_data_csv(tmp_path):
    assert run(tmp_path, "data") == EXIT_OK
    head, rows = read_csv(tmp_path / "data.csv")
    assert rows[0] == ["k", "lambda", "re", "im"]
    assert len(rows) == 66
    assert any(h.startswith("# config_hash=") for h in head)
    assert f"# versions={module_versions()}" in head


def test_sigma_json(tmp_path):
    assert run(tmp_path, "sigma") == EXIT_OK
    d = json.loads((tmp_path / "sigma.json").read_text())
    assert len(d["sigma_re"]) == len(d["sigma_im"]) == 65
    assert "config_hash" in d["meta"]


def test_detect_outputs(tmp_path):
    assert run(tmp_path, "detect") == EXIT_OK
    _, rows = read_csv(tmp_path / "detect_l1.csv")
    assert rows[0] == ["x", "g_estimate", "g_truth", "posterior_std"]
    assert all(r[3] == "" for r in rows[1:])
    _, rows = read_csv(tmp_path / "detect_sbl.csv")
    assert all(r[3] != "" for r in rows[1:])
    assert len(rows) == 34
    _, rows = read_csv(tmp_path / "sbl_trace.csv")
    assert rows[0] == ["iter", "loglik", "active_count", "max_dloga"]


def test_detect_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "detect", "--noise-std", "0.02", "--seed", "2") == EXIT_OK
    assert run(b, "detect", "--noise-std", "0.02", "--seed", "2") == EXIT_OK
    for name in ("detect_l1.csv", "detect_sbl.csv", "sbl_trace.csv", "detect_summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_recon_csv(tmp_path):
    assert run(tmp_path, "recon", "--method", "sbl") == EXIT_OK
    _, rows = read_csv(tmp_path / "recon_sbl.csv")
    assert rows[0] == ["x", "f_reconstructed", "f_true", "abs_error"]


def test_config_file(tmp_path):
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps({"J": 8, "method": "sbl"}))
    assert main(["detect", "--config", str(cfgp), "--M", "32", "--out", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "detect_sbl.csv")
    assert len(rows) == 18
    assert not (tmp_path / "detect_l1.csv").exists()


def test_contract_errors(tmp_path, capsys):
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps({"bogus": 1}))
    assert main(["detect", "--config", str(cfgp), "--out", str(tmp_path)]) == EXIT_CONTRACT
    assert main(["detect", "--M", "0", "--out", str(tmp_path)]) == EXIT_CONTRACT
    assert main(["detect", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_CONTRACT


def test_nonconvergence_exit(tmp_path):
    assert run(tmp_path, "detect", "--method", "sbl", "--sbl-max-iter", "1", "--sbl-tol", "1e-15") == EXIT_NONCONVERGED


def test_threshold_sweep(tmp_path):
    assert run(tmp_path, "sweep-threshold", "--points", "11") == EXIT_OK
    head, rows = read_csv(tmp_path / "threshold.csv")
    assert rows[0] == ["threshold", "count_l1", "count_sbl"]
    assert len(rows) == 12
    assert rows[-1][1:] == ["0", "0"]
    assert any(h.startswith("# plateau2_sbl=") for h in head)


def test_resolution_sweep(tmp_path):
    assert run(tmp_path, "sweep-resolution", "--J-values", "8,16", "--trials", "1") == EXIT_OK
    _, rows = read_csv(tmp_path / "resolution.csv")
    assert [r[0] for r in rows[1:]] == ["8", "16"]


def test_table1_small(tmp_path):
    assert run(tmp_path, "table1", "--trials", "1") in (EXIT_OK, EXIT_NONCONVERGED)
    _, rows = read_csv(tmp_path / "table1.csv")
    assert rows[0] == ["function", "pattern", "method", "trials", "mean", "min", "max", "failures"]
    assert len(rows) == 19


def test_noisy_small(tmp_path):
    assert run(tmp_path, "noisy", "--seeds", "1") == EXIT_OK
    head, rows = read_csv(tmp_path / "noisy.csv")
    assert rows[0][:2] == ["function", "pattern"]
    assert len(rows) == 4
    assert {r[2] for r in rows[1:]} == {"0.02"}
