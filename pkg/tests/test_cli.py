import json
import subprocess
import sys

import numpy as np
import pytest

from csrecon import io
from csrecon.cli import main
from csrecon.experiment import OUTPUT_ENV
from csrecon.reconstructor import CoefficientState

SMALL_INPUT = {"synthetic": {"sinusoids": [[1.0, 4.0, 0.0], [0.5, 8.0, 0.3]], "sample_rate": 32.0, "duration": 4.0}}


def write_config(path, **kw):
    cfg = {"defaults": {"slice_len": 64, "schedule": [{"epochs": 30, "learning_rate": 1e-2, "batch_size": 32}]}}
    cfg["input"] = SMALL_INPUT
    cfg.update(kw)
    path.write_text(json.dumps(cfg))
    return str(path)


def test_generate_bench_signal_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["generate", "--out", str(a)]) == 0
    assert main(["generate", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert io.sidecar_path(a).read_bytes() == io.sidecar_path(b).read_bytes()
    sig = io.read_signal(a)
    assert sig.data.shape == (8192, 6) and sig.sample_rate == 400.0


def test_generate_empty_spec_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"input": {"synthetic": {"sinusoids": []}}}))
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "s.csv")]) == 2
    assert "input.synthetic.sinusoids" in capsys.readouterr().err


def test_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env_out"))
    cfg = write_config(tmp_path / "c.json")
    assert main(["generate", "--config", cfg]) == 0
    assert (tmp_path / "env_out" / "signal.csv").is_file()


def test_mask_command(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["mask", "--n", "50", "--k", "2", "--ratio", "0.3", "--seed", "4", "--out", str(out)]) == 0
    mask = io.read_mask(out)
    assert mask.shape == (50, 2) and mask.seed == 4
    assert main(["mask", "--n", "50", "--k", "2", "--ratio", "1.5", "--out", str(out)]) == 2
    assert main(["mask", "--ratio", "0.3", "--out", str(out)]) == 2


def test_reconstruct_from_csv(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    sig = tmp_path / "sig.csv"
    assert main(["generate", "--config", cfg, "--out", str(sig)]) == 0
    out = tmp_path / "run"
    code = main(
        ["reconstruct", "--config", cfg, "--input", str(sig), "--output-dir", str(out), "--ratio", "0.5", "--snapshots", "10"]
    )
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["ratio"] == 0.5 and len(report["slices"]) == 2
    assert report["config"]["input"] == {"csv": str(sig)}
    assert (out / "slice_0" / "snapshots" / "epoch_10.csv").is_file()


def test_reconstruct_missing_input_is_ingestion_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    code = main(["reconstruct", "--config", cfg, "--input", str(tmp_path / "nope.csv"), "--output-dir", str(tmp_path)])
    assert code == 3
    assert "nope.csv" in capsys.readouterr().err


def test_reconstruct_parse_error_names_location(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a\n" + "1\n" * 10 + "x\n" + "1\n" * 53)
    cfg = write_config(tmp_path / "c.json")
    code = main(["reconstruct", "--config", cfg, "--input", str(bad), "--sample-rate", "8", "--output-dir", str(tmp_path)])
    assert code == 3
    assert "row 12, column 1" in capsys.readouterr().err


def test_reconstruct_divergence_exit_code(tmp_path):
    cfg = write_config(tmp_path / "c.json", schedule=[{"epochs": 2, "learning_rate": 1e300, "batch_size": 8}])
    assert main(["reconstruct", "--config", cfg, "--output-dir", str(tmp_path)]) == 4


def test_bad_config_exit_code(tmp_path):
    cfg = write_config(tmp_path / "c.json", ratios=[2.0])
    assert main(["sweep", "--config", cfg, "--output-dir", str(tmp_path)]) == 2


def test_sweep_command(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--output-dir", str(out), "--ratios", "0.3,0.5", "--seeds", "0,1"]) == 0
    lines = (out / "sweep_report.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 2 * 2 * 3


def test_sweep_with_failed_cells_exits_nonzero(tmp_path):
    cfg = write_config(tmp_path / "c.json", schedule=[{"epochs": 2, "learning_rate": 1e300, "batch_size": 8}])
    assert main(["sweep", "--config", cfg, "--output-dir", str(tmp_path), "--ratios", "0.5"]) == 1


def test_spectrum_command(tmp_path):
    ck = tmp_path / "ck"
    io.write_checkpoint(ck, CoefficientState.zeros(16, 2), {"epoch": 0, "sample_rate": 16.0})
    assert main(["spectrum", str(ck)]) == 0
    names, data = io.read_matrix(ck / "spectrum.csv", header=True)
    assert names == ["freq_hz", "ch1", "ch2"]
    assert data.shape == (9, 3) and not data[:, 1:].any()
    sym = json.loads((ck / "spectrum_symmetry.json").read_text())
    assert sym["ch1"] == {"real_mismatch": None, "imag_mismatch": None}


def test_spectrum_missing_is_ingestion_error(tmp_path):
    assert main(["spectrum", str(tmp_path / "absent")]) == 3


def test_spectrum_needs_sample_rate(tmp_path):
    ck = tmp_path / "ck"
    io.write_checkpoint(ck, CoefficientState.zeros(8, 1), {"epoch": 0})
    assert main(["spectrum", str(ck)]) == 2
    assert main(["spectrum", str(ck), "--sample-rate", "8"]) == 0


def test_verify_command(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 7 and all(line.startswith("[PASS]") for line in out)


@pytest.mark.parametrize("argv", [[], ["bogus"]])
def test_argparse_errors(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "csrecon.cli", "mask", "--n", "4", "--k", "1", "--ratio", "1", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert np.array_equal(io.read_mask(out).bits, np.ones((4, 1)))
