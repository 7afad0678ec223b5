import subprocess
import sys

import numpy as np
import pytest

from mtjsc import cli
from mtjsc.kernels import PixelGrid
from mtjsc.pgm import read_pgm, write_pgm
from mtjsc.sweeps import parse_csv


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def read_kv(path):
    out = {}
    for line in path.read_text().splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k.strip()] = v.strip()
    return out


@pytest.fixture
def step_pgm(tmp_path):
    x = np.zeros((16, 16))
    x[:, 8:] = 1.0
    p = tmp_path / "step.pgm"
    write_pgm(p, PixelGrid(x))
    return p


class TestSweep:
    def test_probability(self, tmp_path):
        assert run(tmp_path, "sweep", "--kind", "probability", "--series", "1n,4.832809n,10n") == 0
        series = parse_csv((tmp_path / "sweep_probability.csv").read_text())
        assert len(series) == 3
        mid = series[1]
        ok = mid.y < 1
        slope = np.polyfit(np.log(mid.x[ok]), np.log(mid.y[ok]), 1)[0]
        assert abs(slope - 1) < 1e-6  # t given to 7 digits on the command line
        assert (tmp_path / "sweep_probability.json").exists()

    def test_variability_both(self, tmp_path):
        assert run(tmp_path, "sweep", "--kind", "variability", "--compensate", "both",
                   "--series=-100,-50,50,100") == 0
        series = parse_csv((tmp_path / "sweep_variability_both.csv").read_text())
        base = series[0].y
        for s in series[1:]:
            np.testing.assert_allclose(s.y, base, rtol=1e-9)

    def test_tau(self, tmp_path):
        assert run(tmp_path, "sweep", "--kind", "tau", "--series", "50u,100u,200u") == 0
        s = parse_csv((tmp_path / "sweep_tau.csv").read_text())
        assert [x.series_label for x in s] == ["i_c0s=5e-05", "i_c0s=0.0001", "i_c0s=0.0002"]

    def test_write_current(self, tmp_path):
        assert run(tmp_path, "sweep", "--kind", "write-current") == 0

    def test_bad_range_writes_nothing(self, tmp_path):
        out = tmp_path / "o"
        assert cli.main(["sweep", "--kind", "probability", "--i-ph-min", "1e-3",
                         "--i-ph-max", "1e-6", "--out", str(out)]) == 2
        assert not out.exists()


class TestMonteCarlo:
    def test_waveform_scale(self, tmp_path):
        for seed in range(5):
            d = tmp_path / str(seed)
            assert run(d, "montecarlo", "--i-w", "236.6u", "--trials", "100",
                       "--seed", str(seed)) == 0
            p = float(read_kv(d / "montecarlo_summary.txt")["empirical_p"])
            assert 0.3 <= p <= 0.7
        assert len((d / "montecarlo_trials.csv").read_text().splitlines()) == 101

    def test_large(self, tmp_path):
        assert run(tmp_path, "montecarlo", "--i-w", "236.6u", "--trials", "100000") == 0
        kv = read_kv(tmp_path / "montecarlo_summary.txt")
        assert abs(float(kv["empirical_p"]) - float(kv["analytic_p"])) < 0.0047
        assert float(kv["wilson95_low"]) < float(kv["analytic_p"]) < float(kv["wilson95_high"])

    def test_subcritical(self, tmp_path):
        assert run(tmp_path, "montecarlo", "--i-w", "150u", "--trials", "1000") == 0
        assert float(read_kv(tmp_path / "montecarlo_summary.txt")["empirical_p"]) == 0.0

    def test_trials_validation(self, tmp_path):
        assert run(tmp_path, "montecarlo", "--trials", "0") == 2


def test_wilson():
    lo, hi = cli.wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    assert cli.wilson_interval(0, 10)[0] == 0.0


class TestCalibrate:
    def test_report(self, tmp_path):
        assert run(tmp_path, "calibrate", "--delta-r", "100") == 0
        text = (tmp_path / "calibration_report.txt").read_text()
        row = next(line for line in text.splitlines() if line.startswith("v_bias"))
        found, truth = map(float, row.split()[-2:])
        assert truth == pytest.approx(0.38) and found == pytest.approx(0.38, abs=5e-3)
        row = next(line for line in text.splitlines() if line.startswith("t_prime"))
        found, truth = map(float, row.split()[-2:])
        assert found == pytest.approx(truth, rel=0.03)

    def test_from_config(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("variability.delta_r = -50\n")
        assert run(tmp_path, "calibrate", "--config", str(cfg)) == 0
        assert "hidden_delta_r = -5.0" in (tmp_path / "calibration_report.txt").read_text()

    def test_stream_floor(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert cli.main(["calibrate", "--stream-len", "1000", "--out", str(out)]) == 2
        assert "statistical floor" in capsys.readouterr().err
        assert not out.exists()


class TestEdgeDetect:
    def test_exact_step(self, tmp_path, step_pgm):
        assert run(tmp_path, "edge-detect", "--input", str(step_pgm), "--mode", "exact") == 0
        img = read_pgm(tmp_path / "edges_exact.pgm").pixels
        assert np.all(img[:, 7] == 1.0) and img.sum() == 16

    @pytest.mark.parametrize("mode", ["stochastic", "binary", "exact"])
    def test_uniform(self, tmp_path, mode):
        p = tmp_path / "u.pgm"
        write_pgm(p, PixelGrid(np.full((12, 12), 0.5)))
        assert run(tmp_path, "edge-detect", "--input", str(p), "--mode", mode) == 0
        assert float(read_kv(tmp_path / f"metrics_{mode}.txt")["mae_mean"]) < 0.05

    def test_metrics_per_seed(self, tmp_path, step_pgm):
        assert run(tmp_path, "edge-detect", "--input", str(step_pgm), "--mode", "binary",
                   "--error-rate", "0.05", "--repeats", "3", "--seed", "10") == 0
        kv = read_kv(tmp_path / "metrics_binary.txt")
        assert {"mae_seed_10", "mae_seed_11", "mae_seed_12", "mae_mean"} <= kv.keys()

    def test_bad_image(self, tmp_path):
        p = tmp_path / "bad.pgm"
        p.write_bytes(b"P6\n1 1\n255\n\0\0\0")
        out = tmp_path / "o"
        assert cli.main(["edge-detect", "--input", str(p), "--out", str(out)]) == 2
        assert not out.exists()


def _snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.parametrize("argv", [
    ["sweep", "--kind", "variability", "--compensate", "vbias"],
    ["montecarlo", "--trials", "1000"],
    ["calibrate", "--delta-r", "50"],
])
def test_deterministic(tmp_path, argv):
    assert run(tmp_path / "a", *argv, "--seed", "77") == 0
    assert run(tmp_path / "b", *argv, "--seed", "77") == 0
    assert _snapshot(tmp_path / "a") == _snapshot(tmp_path / "b")


def test_edge_detect_deterministic_across_workers(tmp_path, test_image_path):
    base = ["edge-detect", "--input", str(test_image_path), "--error-rate", "0.05",
            "--bits", "200", "--seed", "3"]
    assert run(tmp_path / "a", *base, "--workers", "1") == 0
    assert run(tmp_path / "b", *base, "--workers", "4") == 0
    assert _snapshot(tmp_path / "a") == _snapshot(tmp_path / "b")


def test_console_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "mtjsc.cli", "sweep", "--kind", "tau",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "sweep_tau.csv").exists()
