import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtjsc import sweeps
from mtjsc.config import default_config
from mtjsc.sweeps import SweepSeries, emit_csv, parse_csv


@pytest.fixture(scope="module")
def cfg():
    return default_config()


def test_csv_header_and_format():
    text = emit_csv([SweepSeries("a", [1.0, 2.0], [0.1, 0.2])])
    lines = text.splitlines()
    assert lines[0] == "series_label,x,y"
    assert lines[1] == "a,1.0000000000000000e+00,1.0000000000000001e-01"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e30, 1e30, allow_nan=False), min_size=1, max_size=20, unique=True),
       st.text(alphabet="abc =,.\"-", min_size=1, max_size=8))
def test_csv_round_trip(xs, label):
    xs = sorted(xs)
    s = SweepSeries(label, xs, np.sin(np.arange(len(xs))) * 1e-7)
    assert parse_csv(emit_csv([s])) == [s]


def test_x_strictly_increasing():
    with pytest.raises(ValueError):
        SweepSeries("a", [1, 1], [0, 0])


def test_write_current_family(cfg):
    out = sweeps.sweep_write_current(cfg)
    assert [s.series_label for s in out] == ["v_bias=0", "v_bias=0.2", "v_bias=0.4"]
    for s in out:
        assert len(s.x) == 100 and np.all(np.diff(s.y) < 0)
    assert out[2].metadata["no_switching_regime"]


def test_tau_sweep(cfg):
    out = sweeps.sweep_tau(cfg)
    for s, ic in zip(out, (50e-6, 100e-6, 200e-6)):
        above = s.x > ic
        slope = np.polyfit(s.x[above], s.y[above], 1)[0]
        assert slope == pytest.approx(1 / (ic * 500e-12 * 2.498754986), rel=1e-8)
    # larger critical current, smaller rate at the same current
    assert np.all(out[0].y >= out[1].y) and np.all(out[1].y >= out[2].y)
    assert out[0].y[-1] > out[1].y[-1] > out[2].y[-1]


def test_probability_sweep(cfg):
    out = sweeps.sweep_probability(cfg)
    assert len(out) == 3
    mid = out[1]
    ok = np.ones(100, bool)
    ok[mid.metadata["no_switching_regime"]] = False
    slope = np.polyfit(np.log(mid.x[ok]), np.log(mid.y[ok]), 1)[0]
    assert abs(slope - 1) < 1e-9
    assert mid.metadata["beta"] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("mode", ["none", "vbias", "both"])
def test_variability_sweep(cfg, mode):
    out = sweeps.sweep_variability(cfg, compensate=mode)
    base = out[0].y
    dev = [np.max(np.abs(s.y / base - 1)) for s in out[1:]]
    if mode == "both":
        assert max(dev) < 1e-9
    else:
        assert min(dev) > 1e-3


def test_sidecar_has_flags(cfg):
    out = sweeps.sweep_probability(cfg)
    assert '"no_switching_regime"' in sweeps.sidecar(out, "probability")
