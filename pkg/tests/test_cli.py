import csv
from pathlib import Path

import numpy as np
import pytest

from matisk import iqfile
from matisk.cli import main
from matisk.demodulator import SIR_CAP_DB

GOLDEN = Path(__file__).parent / "data" / "gmsk_binary_bt03.csv"

SMALL_INI = """\
[system]
n_subcarriers = 8
repetition = 16
psk_order = 4
chip_period_s = 1e-8
oversampling = 8
n_symbols = 40
seed = 2

[pulse]
bt_product = 0.3
truncation_chips = 4

[psd]
segment_symbols = 4
"""


@pytest.fixture
def small_ini(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL_INI)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_synth_prints_parameters(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "subcarrier spacing: 1.37 MHz" in out
    assert "symbol period:      800 ns" in out
    assert "pulse duration:     91.4 ns" in out
    assert "data rate:          160 Mbit/s" in out
    assert (tmp_path / "o" / "aggregate.mtsk").is_file()
    rows = read_csv(tmp_path / "o" / "omega.csv")
    assert len(rows) == 64 and rows[0]["omega_1"] == "0"


def test_synth_is_deterministic(tmp_path, small_ini):
    for name in ("a", "b"):
        assert main(["synth", "--config", small_ini, "--out", str(tmp_path / name), "--per-antenna"]) == 0
    for f in ("aggregate.mtsk", "antenna_000.mtsk", "antenna_007.mtsk"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert main(["synth", "--config", small_ini, "--out", str(tmp_path / "c"), "--seed", "5"]) == 0
    assert (tmp_path / "a" / "aggregate.mtsk").read_bytes() != (tmp_path / "c" / "aggregate.mtsk").read_bytes()


def test_synth_then_demod(tmp_path, small_ini, capsys):
    main(["synth", "--config", small_ini, "--out", str(tmp_path)])
    report = tmp_path / "demod.csv"
    assert main(["demod", "--config", small_ini, "--in", str(tmp_path / "aggregate.mtsk"), "--out", str(report)]) == 0
    assert "symbol errors:            0" in capsys.readouterr().out
    rows = read_csv(report)
    assert len(rows) == 8 and all(r["symbol_errors"] == "0" for r in rows)


def test_sir_sweep_csv(tmp_path, small_ini):
    out = tmp_path / "sweep.csv"
    assert main(["sir-sweep", "--config", small_ini, "--t-min", "8", "--t-max", "14", "--symbols", "30",
                 "--out", str(out)]) == 0
    sir = [float(r["sir_db"]) for r in read_csv(out)]
    assert len(sir) == 7
    # strictly rising until the window clears the pulse (T >= 13), then pinned at the cap
    assert all(a < b for a, b in zip(sir[:5], sir[1:5]))
    assert sir[4] < sir[5] == sir[6] == SIR_CAP_DB


def test_psd_four_curves(tmp_path, small_ini):
    assert main(["psd", "--config", small_ini, "--out", str(tmp_path), "--antennas", "0,4,7"]) == 0
    with open(tmp_path / "psd.csv") as fh:
        header = fh.readline().strip().split(",")
    curves = [h for h in header if h.endswith("_db_inband")]
    assert curves == ["aggregate_db_inband", "antenna_0_db_inband", "antenna_4_db_inband", "antenna_7_db_inband"]


def test_instfreq_bounded(tmp_path, small_ini):
    assert main(["instfreq", "--config", small_ini, "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "instfreq.csv", delimiter=",", skiprows=1)
    assert data.shape == (160, 9)  # 1.25 symbols of 128 samples, time + 8 traces
    spacing = 1 / (8 * 1e-8)
    traces = data[:, 1:]
    assert traces.min() >= -4 * spacing - 1.0
    assert traces.max() <= 3 * spacing + 1.0


def test_omega_stdout(small_ini, capsys):
    assert main(["omega", "--config", small_ini]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("subcarrier,freq_hz,omega_1")
    assert "residual" in captured.err


def test_mask_check_exit_codes(tmp_path, small_ini, capsys):
    loose = tmp_path / "loose.txt"
    loose.write_text("0 10\n1e9 10\n")
    tight = tmp_path / "tight.txt"
    tight.write_text("0 10\n20e6 10\n30e6 -300\n1e9 -300\n")
    assert main(["mask-check", "--config", small_ini, "--mask", str(loose)]) == 0
    assert main(["mask-check", "--config", small_ini, "--mask", str(tight)]) == 1
    assert "violation at" in capsys.readouterr().out


def test_mask_check_default_mask():
    assert main(["mask-check"]) == 0


def test_baseline_matches_golden(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["baseline", "--kind", "gmsk-binary", "--bt", "0.3", "--out", str(out)]) == 0
    np.testing.assert_allclose(
        np.loadtxt(out, delimiter=",", skiprows=1), np.loadtxt(GOLDEN, delimiter=",", skiprows=1), atol=1e-6
    )


def test_errors_go_to_stderr(tmp_path, small_ini, capsys):
    assert main(["demod", "--config", small_ini, "--in", str(tmp_path / "missing.mtsk")]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: FileNotFoundError:")
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\nfoo = 1\n")
    assert main(["synth", "--config", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("error: ValidationError:")


def test_demod_rate_mismatch(tmp_path, small_ini):
    main(["synth", "--config", small_ini, "--out", str(tmp_path)])
    sig = iqfile.read(tmp_path / "aggregate.mtsk")
    assert sig.sample_rate_hz == pytest.approx(8e8)
    assert main(["demod", "--in", str(tmp_path / "aggregate.mtsk")]) == 2


def test_reversed_t_range(small_ini):
    assert main(["sir-sweep", "--config", small_ini, "--t-min", "12", "--t-max", "10"]) == 2
