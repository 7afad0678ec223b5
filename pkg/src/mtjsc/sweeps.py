"""Figure-style parameter sweeps and their CSV form.

A CSV holds one or more series with columns ``series_label,x,y``; floats
are written as ``%.16e`` (17 significant digits), which round-trips exactly.
Axis labels and per-series flags go to a JSON sidecar next to the CSV.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import calibration as cal
from . import converter as conv
from . import device
from .config import RunConfig

CSV_COLUMNS = ("series_label", "x", "y")
FLOAT_FMT = "{:.16e}"

I_PH_RANGE = (0.1e-9, 100e-6)
N_POINTS = 100


@dataclass
class SweepSeries:
    series_label: str
    x: np.ndarray
    y: np.ndarray
    x_label: str = "x"
    y_label: str = "y"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be 1-D arrays of equal length")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError(f"x must be strictly increasing in series {self.series_label!r}")

    def __eq__(self, other):
        if not isinstance(other, SweepSeries):
            return NotImplemented
        return (self.series_label == other.series_label
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))


def emit_csv(series: Iterable[SweepSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in series:
        for x, y in zip(s.x, s.y):
            w.writerow([s.series_label, FLOAT_FMT.format(x), FLOAT_FMT.format(y)])
    return buf.getvalue()


def parse_csv(text: str) -> list[SweepSeries]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"expected header {','.join(CSV_COLUMNS)}")
    groups: dict[str, tuple[list, list]] = {}
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns, got {len(row)}")
        xs, ys = groups.setdefault(row[0], ([], []))
        xs.append(float(row[1]))
        ys.append(float(row[2]))
    return [SweepSeries(label, xs, ys) for label, (xs, ys) in groups.items()]


def sidecar(series: Sequence[SweepSeries], kind: str) -> str:
    doc = {
        "kind": kind,
        "series": [{"label": s.series_label, "x_label": s.x_label,
                    "y_label": s.y_label, **s.metadata} for s in series],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def photocurrent_grid(lo: float = I_PH_RANGE[0], hi: float = I_PH_RANGE[1],
                      n: int = N_POINTS) -> np.ndarray:
    if not 0 < lo < hi:
        raise ValueError("need 0 < i_ph_min < i_ph_max")
    return np.geomspace(lo, hi, n)


def _flag_indices(mask) -> list[int]:
    return [int(i) for i in np.flatnonzero(mask)]


def sweep_write_current(cfg: RunConfig, v_biases=(0.0, 0.2, 0.4),
                        i_ph: np.ndarray | None = None) -> list[SweepSeries]:
    """I_w against I_ph, one series per bias voltage."""
    i_ph = photocurrent_grid() if i_ph is None else i_ph
    out = []
    for vb in v_biases:
        c = cfg.converter.with_bias(vb)
        if c.problems(cfg.sensor):
            raise ValueError("; ".join(c.problems(cfg.sensor)))
        iw = conv.write_current(cfg.sensor, cfg.mtj, c, i_ph)
        out.append(SweepSeries(
            f"v_bias={vb:g}", i_ph, iw, "i_ph [A]", "i_w [A]",
            {"v_bias": vb, "nonpositive_write_current": _flag_indices(iw <= 0),
             "no_switching_regime": _flag_indices(iw <= cfg.mtj.i_c0s)},
        ))
    return out


def sweep_tau(cfg: RunConfig, i_c0s_values=(50e-6, 100e-6, 200e-6),
              i_w: np.ndarray | None = None) -> list[SweepSeries]:
    """1/tau_p against I_w, one series per critical current; zero below I_c0s."""
    if i_w is None:
        i_max = (cfg.sensor.v_dd - cfg.converter.v_bias) / cfg.mtj.r_p
        i_w = np.linspace(0.0, i_max, N_POINTS)
    out = []
    for ic in i_c0s_values:
        m = device.MtjParams(**{**cfg.mtj.__dict__, "i_c0s": ic, "i_c0t": None})
        rate = np.maximum(i_w - ic, 0.0) / m.switching_charge
        out.append(SweepSeries(
            f"i_c0s={ic:g}", i_w, rate, "i_w [A]", "1/tau_p [1/s]",
            {"i_c0s": ic, "no_switching_regime": _flag_indices(i_w <= ic)},
        ))
    return out


def sweep_probability(cfg: RunConfig, t_values: Sequence[float] | None = None,
                      i_ph: np.ndarray | None = None) -> list[SweepSeries]:
    """Non-switching probability against I_ph, one series per write time."""
    i_ph = photocurrent_grid() if i_ph is None else i_ph
    s, m, c0 = cfg.sensor, cfg.mtj, cfg.converter
    if t_values is None:
        t_values = (1e-9, conv.solve_attempt_time(s, m, c0.v_bias), 10e-9)
    out = []
    for t in t_values:
        c = c0.with_write_time(t)
        lp = conv.nonswitch_log_prob(s, m, c, i_ph)
        r = conv.write_resistance(s, m, c, i_ph)
        beta = np.atleast_1d(conv.slope_coefficient(s, m, t, r))
        out.append(SweepSeries(
            f"t={t:.6g}", i_ph, np.exp(lp), "i_ph [A]", "p_bar_w",
            {"t_write": t, "beta": float(beta[0]) if np.ptp(beta) == 0 else beta.tolist(),
             "no_switching_regime": _flag_indices(conv.no_switching(s, m, c, i_ph))},
        ))
    return out


def sweep_variability(cfg: RunConfig, delta_rs=(-100.0, -50.0, 50.0, 100.0),
                      compensate: str = "none",
                      i_ph: np.ndarray | None = None) -> list[SweepSeries]:
    """Non-switching probability under resistance offsets, plus the baseline."""
    if compensate not in ("none", "vbias", "both"):
        raise ValueError(f"unknown compensation mode {compensate!r}")
    i_ph = photocurrent_grid() if i_ph is None else i_ph
    s, m, c = cfg.sensor, cfg.mtj, cfg.converter
    out = [SweepSeries("baseline", i_ph, np.exp(conv.nonswitch_log_prob(s, m, c, i_ph)),
                       "i_ph [A]", "p_bar_w", {"delta_r": 0.0})]
    for dr in delta_rs:
        var = cal.VariabilityModel(dr)
        tuned, meta = c, {"delta_r": dr, "compensate": compensate}
        if compensate != "none":
            fn = cal.analytic_compensation if compensate == "both" else cal.vbias_only_compensation
            res = fn(s, m, c, var)
            tuned = c.with_write_time(res.t_prime).with_bias(res.v_bias_prime)
            meta.update(t_prime=res.t_prime, v_bias_prime=res.v_bias_prime,
                        residual_slope_error=res.residual_slope_error,
                        assumption=cal.RPB_ASSUMPTION)
        lp = cal.perturbed_log_prob(s, m, tuned, var, i_ph)
        meta["no_switching_regime"] = _flag_indices(conv.no_switching(s, m, tuned, i_ph, dr))
        out.append(SweepSeries(f"delta_r={dr:g}", i_ph, np.exp(lp), "i_ph [A]",
                               "p_bar_w", meta))
    return out


SWEEPS = {
    "write-current": sweep_write_current,
    "tau": sweep_tau,
    "probability": sweep_probability,
    "variability": sweep_variability,
}
