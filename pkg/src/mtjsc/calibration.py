"""Resistance variability: its effect, the closed-form compensation, and the
measurement-driven calibration loop.

Throughout, the bias-corrected resistance R_Pb is taken as unchanged when the
bias voltage is retuned; only the variability offset ``delta_r`` moves the
effective write resistance. With BC1 = BC2 = 0 this is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import converter as conv
from . import rng as rngmod
from .converter import ConverterConfig, SensorParams
from .device import MtjParams
from .kernels import BitStream

RPB_ASSUMPTION = "R_Pb held at its nominal value when V_bias is retuned"


class CompensationOutOfRange(ValueError):
    pass


class CalibrationConfigError(ValueError):
    pass


class CalibrationDidNotConverge(RuntimeError):
    def __init__(self, message: str, best: "CalibrationResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class VariabilityModel:
    """Resistance offset of one device.

    ``sigma_rel`` switches to sampled mode: :meth:`sample` draws
    delta_r ~ N(0, (sigma_rel*r_p)^2). Sampling is an array-level extension;
    the fixed offset is what the compensation analysis covers.
    """

    delta_r: float = 0.0
    sigma_rel: float | None = None

    def __post_init__(self):
        if self.sigma_rel is not None and not 0.0 <= self.sigma_rel <= 0.2:
            raise ValueError("variability.sigma_rel must lie in [0, 0.2]")

    @property
    def mode(self) -> str:
        return "fixed" if self.sigma_rel is None else "sampled-gaussian"

    def check(self, m: MtjParams):
        if abs(self.delta_r) >= m.r_p:
            raise ValueError(f"|delta_r| must stay below r_p ({m.r_p:g} ohm)")

    def sample(self, m: MtjParams, rng: np.random.Generator) -> "VariabilityModel":
        if self.sigma_rel is None:
            return self
        while True:
            d = float(rng.normal(0.0, self.sigma_rel * m.r_p))
            if abs(d) < m.r_p:
                return VariabilityModel(d)


@dataclass
class CalibrationResult:
    t_prime: float
    v_bias_prime: float
    iterations: int = 0
    residual_slope_error: float = 0.0
    residual_p50_error: float = 0.0
    metadata: dict = field(default_factory=dict)


def perturbed_log_prob(s: SensorParams, m: MtjParams, c: ConverterConfig,
                       var: VariabilityModel, i_ph):
    """ln P(bit = 1) for a device whose write resistance is R_Pb + delta_r.

    ``c`` carries whatever write time and bias the device is run with
    (nominal, or compensated values).
    """
    var.check(m)
    i_ph = np.asarray(i_ph, dtype=float)
    if np.any(i_ph <= 0):
        raise ValueError("photocurrent must be positive")
    r = conv.write_resistance(s, m, c, i_ph) + var.delta_r
    return conv.log_nonswitch(s, m, c.t_write, c.v_bias, r, i_ph)


def _nominal_r_pb(s, m, c) -> tuple[float, float]:
    anchor = conv.anchor_photocurrent(s, m, c)
    return float(conv.write_resistance(s, m, c, anchor)), anchor


def analytic_compensation(s: SensorParams, m: MtjParams, c: ConverterConfig,
                          var: VariabilityModel) -> CalibrationResult:
    """Closed-form retune of write time and bias voltage.

    t' = t (1 + dR/R_Pb) restores unit slope and V'_bias = V_bias - dR I_c0s
    restores the intercept; together they reproduce the nominal curve.
    """
    var.check(m)
    r_pb, anchor = _nominal_r_pb(s, m, c)
    t_prime = c.t_write * (1.0 + var.delta_r / r_pb)
    v_prime = c.v_bias - var.delta_r * m.i_c0s
    if v_prime < 0 or v_prime >= s.v_dd:
        raise CompensationOutOfRange(
            f"compensation out of range: V'_bias = {v_prime:.4g} V not in [0, {s.v_dd} V)"
        )
    tuned = c.with_write_time(t_prime).with_bias(v_prime)
    p50 = math.exp(float(perturbed_log_prob(s, m, tuned, var, anchor)))
    beta = conv.slope_coefficient(s, m, t_prime, r_pb + var.delta_r)
    return CalibrationResult(
        t_prime, v_prime, 0, abs(beta - 1.0), abs(p50 - 0.5),
        {"method": "analytic", "delta_r": var.delta_r, "anchor_i_ph": anchor,
         "assumption": RPB_ASSUMPTION},
    )


def vbias_only_compensation(s: SensorParams, m: MtjParams, c: ConverterConfig,
                            var: VariabilityModel, rule: str = "anchor") -> CalibrationResult:
    """Retune the bias voltage alone, keeping the nominal write time.

    ``rule="anchor"`` picks the bias that puts the 50% point back at the
    nominal anchor input: V'_bias = V_bias - dR * I_w(anchor).
    ``rule="closed-form"`` uses V_bias - dR * I_c0s, which is only exact
    when the write time is retuned as well. Either way the slope stays at
    R_Pb / (R_Pb + dR).
    """
    var.check(m)
    r_pb, anchor = _nominal_r_pb(s, m, c)
    if rule == "anchor":
        i_w_anchor = float(conv.write_current(s, m, c, anchor))
        v_prime = c.v_bias - var.delta_r * i_w_anchor
    elif rule == "closed-form":
        v_prime = c.v_bias - var.delta_r * m.i_c0s
    else:
        raise ValueError(f"unknown rule {rule!r}")
    if v_prime < 0 or v_prime >= s.v_dd:
        raise CompensationOutOfRange(
            f"compensation out of range: V'_bias = {v_prime:.4g} V not in [0, {s.v_dd} V)"
        )
    tuned = c.with_bias(v_prime)
    p50 = math.exp(float(perturbed_log_prob(s, m, tuned, var, anchor)))
    return CalibrationResult(
        c.t_write, v_prime, 0, abs(1.0 - r_pb / (r_pb + var.delta_r)), abs(p50 - 0.5),
        {"method": f"vbias-only/{rule}", "delta_r": var.delta_r, "anchor_i_ph": anchor,
         "assumption": RPB_ASSUMPTION},
    )


# A device under test: (i_ph, t_write, v_bias, length) -> BitStream
BitSource = Callable[[float, float, float, int], BitStream]


class SimulatedDevice:
    """Converter with a hidden resistance offset, usable as a :data:`BitSource`.

    Each call draws from a fresh counter-addressed substream, so a sequence of
    calls is reproducible from the seed.
    """

    def __init__(self, s: SensorParams, m: MtjParams, c: ConverterConfig,
                 var: VariabilityModel, seed: int = rngmod.DEFAULT_SEED):
        var.check(m)
        self.s, self.m, self.c, self._var = s, m, c, var
        self._streams = rngmod.StreamFactory(seed)
        self.calls = 0

    def __call__(self, i_ph: float, t_write: float, v_bias: float, length: int) -> BitStream:
        cfg = self.c.with_write_time(t_write).with_bias(v_bias)
        g = self._streams.generator("dut", index=self.calls)
        self.calls += 1
        return conv.generate_bitstream(self.s, self.m, cfg, i_ph, length, g,
                                       delta_r=self._var.delta_r)


def statistical_floor(stream_len: int) -> float:
    """3-sigma half-width of a frequency estimate at p = 0.5."""
    return 3.0 * math.sqrt(0.25 / stream_len)


def _log_freq(stream: BitStream) -> float:
    # half-count floor keeps ln finite when a stream comes back all zeros
    ones = max(int(stream.ones()), 0.5)
    return math.log(ones / stream.length)


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ln(y) against ln(x)."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def empirical_calibrate(dut: BitSource, anchor_inputs: Sequence[float], stream_len: int,
                        t_nominal: float, v_bias_nominal: float, v_dd: float,
                        tol_p: float = 0.01, tol_slope: float = 0.01,
                        max_iterations: int = 60) -> CalibrationResult:
    """Two-loop calibration against measured bit streams.

    ``anchor_inputs[0]`` is the input that should produce a 50% stream; the
    rest (at least two more) are used with it for the slope fit.

    Loop 1 bisects V'_bias until the anchor stream reads 0.5 within
    ``tol_p``; the ones-frequency rises with V'_bias, since a higher bias
    lowers the write current. Loop 2 bisects t' over [0.2 t, 5 t] until the
    least-squares log-log slope is within ``tol_slope`` of 1, re-locking the
    anchor at every candidate t'. The slope grows with t'.
    """
    anchors = [float(a) for a in anchor_inputs]
    if len(anchors) < 3:
        raise CalibrationConfigError("need the 50% anchor plus at least two more inputs")
    floor = statistical_floor(stream_len)
    if floor > tol_p:
        raise CalibrationConfigError(
            f"stream_len={stream_len} too short: 3-sigma width {floor:.4g} exceeds tol_p={tol_p}"
        )
    iterations = 0
    best = CalibrationResult(t_nominal, v_bias_nominal, 0, float("inf"), float("inf"),
                             {"method": "empirical", "stream_len": stream_len})

    def measure(i_ph, t, v):
        nonlocal iterations
        iterations += 1
        if iterations > max_iterations * max_iterations:
            raise CalibrationDidNotConverge("measurement budget exhausted", best)
        return dut(i_ph, t, v, stream_len)

    def lock_anchor(t: float) -> tuple[float, float]:
        lo, hi = 0.0, v_dd
        v = v_bias_nominal
        for _ in range(max_iterations):
            p = measure(anchors[0], t, v).decode()
            if abs(p - 0.5) < tol_p:
                return v, p
            if p < 0.5:
                lo = v
            else:
                hi = v
            v = 0.5 * (lo + hi)
        raise CalibrationDidNotConverge(f"bias loop did not converge at t'={t:.4g}", best)

    def slope_at(t: float) -> tuple[float, float, float]:
        v, p50 = lock_anchor(t)
        freqs = [math.exp(_log_freq(measure(a, t, v))) for a in anchors]
        return fit_loglog_slope(anchors, freqs), v, p50

    t_lo, t_hi = 0.2 * t_nominal, 5.0 * t_nominal
    t = t_nominal
    for _ in range(max_iterations):
        slope, v, p50 = slope_at(t)
        err = abs(slope - 1.0)
        if err < best.residual_slope_error:
            best = CalibrationResult(t, v, iterations, err, abs(p50 - 0.5), best.metadata)
        if err < tol_slope:
            best.iterations = iterations
            return best
        if slope < 1.0:
            t_lo = t
        else:
            t_hi = t
        t = 0.5 * (t_lo + t_hi)
    best.iterations = iterations
    raise CalibrationDidNotConverge("slope loop did not converge", best)


def default_anchor_inputs(s: SensorParams, m: MtjParams, c: ConverterConfig) -> list[float]:
    """Nominal 50% input followed by inputs at half and 1.5x of it."""
    a = conv.anchor_photocurrent(s, m, c)
    return [a, 0.5 * a, 1.5 * a]
