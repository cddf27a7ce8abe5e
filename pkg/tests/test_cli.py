import csv
import io
import json
import math
import os

import numpy as np
import pytest

from proprd import cli
from proprd.spectra import AR1, FrequencyGrid


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- channel ----------------------------------------------------------------

def test_channel_numerical_example(capsys):
    code, out, _ = run(capsys, "channel", "--target-d-over-s", "0.1")
    assert code == 0
    assert out == "SNR_min = 9.000 (9.54 dB)\n"


def test_channel_zero_snr(capsys):
    assert run(capsys, "channel", "--snr", "0")[1] == "d/S >= 1.0\n"


@pytest.mark.parametrize("marginal,expected", [("uniform", "6.026"), ("laplace", "7.653")])
def test_channel_divergence_adjusted(capsys, marginal, expected):
    code, out, _ = run(capsys, "channel", "--target-d-over-s", "0.1", "--marginal", marginal)
    assert code == 0 and out.startswith(f"SNR_min = {expected}")


def test_channel_explicit_divergence(capsys):
    out = run(capsys, "channel", "--snr", "9", "--divergence", "0.17649")[1]
    assert float(out.split(">=")[1]) == pytest.approx(0.07026, abs=1e-5)


@pytest.mark.parametrize("argv", [[], ["--snr", "1", "--target-d-over-s", "0.1"]])
def test_channel_flag_usage_errors(capsys, argv):
    assert run(capsys, "channel", *argv)[0] == 2


def test_channel_range_error(capsys):
    code, _, err = run(capsys, "channel", "--target-d-over-s", "1.5")
    assert code == 2 and "error" in err


# -- rd-curve ---------------------------------------------------------------

def test_rd_curve_proportional(capsys):
    code, out, _ = run(capsys, "rd-curve", "--model", "ar1", "--r", "0.3333333333", "--S", "1",
                       "--measure", "proportional", "--d", "0.25")
    assert code == 0
    (row,) = rows(out)
    assert list(row) == ["d", "rate_lower", "rate_upper", "units", "measure"]
    assert float(row["rate_upper"]) == pytest.approx(math.log(2), abs=1e-11)
    assert row["units"] == "nats/sample"


def test_rd_curve_full_distortion(capsys):
    out = run(capsys, "rd-curve", "--model", "ar1", "--r", "1/3", "--measure", "nonweighted",
              "--d", "1.0")[1]
    assert float(rows(out)[0]["rate_upper"]) == 0.0


def test_rd_curve_mixed(capsys):
    code, out, _ = run(capsys, "rd-curve", "--model", "ou", "--a", "1", "--beta", "1.41421356",
                       "--measure", "mixed", "--B", "10", "--d", "0.5")
    assert code == 0
    row = rows(out)[0]
    assert float(row["rate_upper"]) == pytest.approx(7.035, abs=1e-3)
    assert row["units"] == "nats/second" and row["measure"] == "mixed(B=10)"


def test_rd_curve_mixed_below_floor_names_inequality(capsys):
    code, out, err = run(capsys, "rd-curve", "--model", "ou", "--measure", "mixed", "--B", "10",
                         "--d", "0.02")
    assert code == 2 and out == ""
    assert "2B S(B) + delta <= d <= S" in err


def test_rd_curve_bits_and_json(capsys):
    args = ["rd-curve", "--model", "ar1", "--r", "0.3", "--measure", "nonweighted",
            "--d-min", "0.2", "--d-max", "0.8", "--n-d", "4"]
    nats = rows(run(capsys, *args)[1])
    doc = json.loads(run(capsys, *args, "--format", "json", "--units", "bits")[1])
    assert doc["units"] == "bits/sample" and len(doc["points"]) == 4
    for r, p in zip(nats, doc["points"]):
        assert p["rate_upper"] == pytest.approx(float(r["rate_upper"]) / math.log(2), rel=1e-10)


def test_rd_curve_uniform_white(capsys):
    out = run(capsys, "rd-curve", "--model", "white", "--B", "1", "--marginal", "uniform",
              "--measure", "proportional", "--d", "0.1")[1]
    row = rows(out)[0]
    assert float(row["rate_lower"]) == pytest.approx(1.9496, abs=1e-4)
    assert float(row["rate_upper"]) == pytest.approx(2.3026, abs=1e-4)


def test_rd_curve_from_csv(tmp_path, capsys):
    path = tmp_path / "psd.csv"
    f = np.linspace(0, 0.5, 257)
    np.savetxt(path, np.column_stack([f, AR1(1 / 3)(f)]), delimiter=",", header="f,phi",
               comments="")
    out = run(capsys, "rd-curve", "--model", "csv", "--psd-csv", str(path),
              "--measure", "nonweighted", "--d", "0.25")[1]
    assert float(rows(out)[0]["rate_upper"]) == pytest.approx(0.5 * math.log(32 / 9), abs=1e-4)


@pytest.mark.parametrize("argv", [
    ["--model", "ar1", "--measure", "nonweighted"],                      # no distortions
    ["--model", "ar1", "--measure", "mixed", "--d", "0.5"],              # no --B
    ["--model", "ar1", "--r", "1.2", "--measure", "nonweighted", "--d", "0.5"],
    ["--model", "ar1", "--measure", "nonweighted", "--d", "0.5", "--grid", "4"],
    ["--model", "ou", "--measure", "proportional", "--d", "0.5"],
    ["--model", "ar1", "--measure", "nonweighted", "--d", "2.0"],
])
def test_rd_curve_invalid(capsys, argv):
    assert run(capsys, "rd-curve", *argv)[0] == 2


def test_rd_curve_is_reproducible(capsys):
    args = ["rd-curve", "--model", "ar1", "--r", "-0.6", "--measure", "nonweighted",
            "--d-min", "0.05", "--d-max", "1", "--n-d", "25"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


# -- fig1 -------------------------------------------------------------------

def test_fig1_defaults(capsys):
    code, out, _ = run(capsys, "fig1")
    assert code == 0
    table = rows(out)
    cols = {k: np.array([float(r[k]) for r in table]) for k in table[0]}
    grid = FrequencyGrid()
    np.testing.assert_array_equal(cols["f"], grid.frequencies)
    assert abs(grid.integrate(cols["err_nonweighted"]) - 0.7) <= 1e-8
    assert abs(grid.integrate(cols["err_proportional"]) - 0.7) <= 1e-8
    np.testing.assert_array_equal(cols["err_proportional"], 0.7 * cols["phi"])
    i0 = int(np.argmin(np.abs(cols["f"])))
    assert cols["f"][i0] == 0.0
    assert cols["phi"][i0] == pytest.approx(2.0, rel=1e-15)
    assert cols["err_proportional"][i0] == pytest.approx(1.4, rel=1e-15)
    # nonweighted error is min(mu, phi)
    mu = cli.fig1_table()["mu"]
    np.testing.assert_allclose(cols["err_nonweighted"], np.minimum(mu, cols["phi"]), rtol=1e-15)


def test_fig1_csv_round_trip_is_exact(capsys):
    out = run(capsys, "fig1")[1]
    table = cli.fig1_table()
    parsed = rows(out)
    for k in cli.FIG1_COLUMNS:
        np.testing.assert_array_equal([float(r[k]) for r in parsed], table[k])


def test_fig1_memoryless_columns_constant(capsys):
    table = rows(run(capsys, "fig1", "--r", "0", "--grid", "65")[1])
    for k in ("phi", "err_nonweighted", "err_proportional"):
        assert len({r[k] for r in table}) == 1


def test_fig1_json(capsys):
    doc = json.loads(run(capsys, "fig1", "--format", "json", "--grid", "129")[1])
    assert len(doc["f"]) == 129 and doc["d"] == 0.7
    assert doc["err_proportional"] == [0.7 * p for p in doc["phi"]]


def test_fig1_distortion_above_power(capsys):
    assert run(capsys, "fig1", "--d", "1.5")[0] == 2


# -- output files -----------------------------------------------------------

def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(capsys, "fig1", "--grid", "33")
    assert code == 0 and out == ""
    assert (tmp_path / "fig1.csv").read_text().startswith("f,phi,")


def test_explicit_output_wins(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    target = tmp_path / "sub" / "curve.json"
    run(capsys, "rd-curve", "--model", "ar1", "--measure", "nonweighted", "--d", "0.5",
        "--format", "json", "--output", str(target))
    assert json.loads(target.read_text())["points"][0]["d"] == 0.5
    assert not (tmp_path / "env").exists()


def test_no_partial_file_on_error(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code = run(capsys, "rd-curve", "--model", "ou", "--measure", "mixed", "--B", "10",
               "--d", "0.5", "0.02", "--output", str(target))[0]
    assert code == 2
    assert os.listdir(tmp_path) == []


# -- verify -----------------------------------------------------------------

FAST = ["verify", "--mc-samples", "20000", "--mc-dim", "16"]


@pytest.mark.slow
def test_verify_is_byte_identical(capsys):
    first = run(capsys, *FAST, "--seed", "42")
    second = run(capsys, *FAST, "--seed", "42")
    assert first == second
    assert first[1].rstrip().endswith("checks passed")


@pytest.mark.slow
def test_verify_forced_zero_tolerance_fails(capsys):
    code, out, err = run(capsys, *FAST, "--force-tolerance", "0")
    assert code == 1
    assert "FAIL" in out
    line = next(l for l in err.splitlines() if l.startswith("FAILED"))
    assert "expected" in line and "actual" in line and "tolerance" in line


@pytest.mark.slow
def test_verify_default_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    n = out.strip().splitlines()[-1].split()[0]
    done, total = n.split("/")
    assert done == total
