"""Analog-to-stochastic conversion chain.

photocurrent -> log-sensor voltage -> MTJ write current -> write/set/erase
cycle -> one output bit. The output bit is 1 when the MTJ stayed parallel,
so a stream's ones-frequency is the non-switching probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import device
from .device import MtjParams, MtjState, Q, K_B
from .kernels import BitStream


@dataclass(frozen=True)
class SensorParams:
    v_dd: float = 1.2
    i_d0: float = 0.1e-9
    n: float = 2.0
    temperature: float = 300.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid SensorParams: " + "; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        for name in ("v_dd", "i_d0", "temperature"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                out.append(f"sensor.{name} must be > 0 (got {v!r})")
        if not 1.0 <= self.n <= 3.0:
            out.append(f"sensor.n must lie in [1, 3] (got {self.n!r})")
        return out

    @property
    def slope_voltage(self) -> float:
        """n*kT/q: volts per e-fold of photocurrent."""
        return self.n * K_B * self.temperature / Q


@dataclass(frozen=True)
class ConverterConfig:
    t_write: float
    v_bias: float = 0.4
    t_set: float = 1e-9
    t_erase: float = 4e-9
    t_cycle: float = 10e-9
    erase_failure: float = 0.0  # probability the erase leaves the MTJ anti-parallel

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid ConverterConfig: " + "; ".join(problems))

    def problems(self, sensor: SensorParams | None = None) -> list[str]:
        out = []
        if not self.t_write > 0:
            out.append(f"converter.t_write must be > 0 (got {self.t_write!r})")
        for name in ("t_set", "t_erase"):
            if getattr(self, name) < 0:
                out.append(f"converter.{name} must be >= 0")
        if self.t_write + self.t_set + self.t_erase > self.t_cycle * (1 + 1e-12):
            out.append("converter.t_write + t_set + t_erase must not exceed t_cycle")
        if self.v_bias < 0:
            out.append(f"converter.v_bias must be >= 0 (got {self.v_bias!r})")
        if sensor is not None and self.v_bias >= sensor.v_dd:
            out.append(f"converter.v_bias must be below sensor.v_dd ({sensor.v_dd!r})")
        if not 0.0 <= self.erase_failure <= 1.0:
            out.append("converter.erase_failure must lie in [0, 1]")
        return out

    def with_write_time(self, t_write: float) -> "ConverterConfig":
        """Copy with a new write time, stretching the cycle if it no longer fits."""
        t_cycle = max(self.t_cycle, t_write + self.t_set + self.t_erase)
        return ConverterConfig(t_write, self.v_bias, self.t_set, self.t_erase,
                               t_cycle, self.erase_failure)

    def with_bias(self, v_bias: float) -> "ConverterConfig":
        return ConverterConfig(self.t_write, v_bias, self.t_set, self.t_erase,
                               self.t_cycle, self.erase_failure)


def photocurrent_to_voltage(s: SensorParams, i_ph):
    i_ph = np.asarray(i_ph, dtype=float)
    if np.any(i_ph <= 0):
        raise ValueError("photocurrent must be positive")
    out = s.v_dd - s.slope_voltage * np.log(i_ph / s.i_d0)
    return out[()] if out.ndim == 0 else out


def mtj_bias_voltage(s: SensorParams, c: ConverterConfig, i_ph):
    """V_b = V_ph - V_bias, the voltage across the MTJ during the write."""
    return photocurrent_to_voltage(s, i_ph) - c.v_bias


def write_resistance(s: SensorParams, m: MtjParams, c: ConverterConfig, i_ph):
    return device.biased_parallel_resistance(m, mtj_bias_voltage(s, c, i_ph))


def write_current(s: SensorParams, m: MtjParams, c: ConverterConfig, i_ph,
                  delta_r: float = 0.0):
    """Write current through the parallel-state MTJ.

    ``delta_r`` adds a device-specific resistance offset to the bias-corrected
    resistance. Non-positive results are returned as-is; callers that care
    (sweeps) flag them.
    """
    i_ph = np.asarray(i_ph, dtype=float)
    r = write_resistance(s, m, c, i_ph) + delta_r
    out = (s.v_dd - c.v_bias) / r - s.slope_voltage / r * np.log(i_ph / s.i_d0)
    return out[()] if np.ndim(out) == 0 else out


def log_nonswitch(s: SensorParams, m: MtjParams, t_write: float, v_bias: float,
                  r_eff, i_ph):
    """beta*ln(i_ph/I_d0) + alpha*(I_c0s - (V_dd - V_bias)/R), clipped at 0.

    ``r_eff`` is the resistance seen by the write current (bias corrected,
    plus any variability offset). The clip is the no-switching regime where
    the write current is at or below I_c0s.
    """
    alpha = t_write / m.switching_charge
    beta = alpha * s.slope_voltage / r_eff
    val = beta * np.log(i_ph / s.i_d0) + alpha * (m.i_c0s - (s.v_dd - v_bias) / r_eff)
    out = np.minimum(val, 0.0)
    return out[()] if np.ndim(out) == 0 else out


def nonswitch_log_prob(s: SensorParams, m: MtjParams, c: ConverterConfig, i_ph):
    """ln of the non-switching probability, i.e. ln P(output bit = 1)."""
    i_ph = np.asarray(i_ph, dtype=float)
    if np.any(i_ph <= 0):
        raise ValueError("photocurrent must be positive")
    r = write_resistance(s, m, c, i_ph)
    return log_nonswitch(s, m, c.t_write, c.v_bias, r, i_ph)


def no_switching(s: SensorParams, m: MtjParams, c: ConverterConfig, i_ph,
                 delta_r: float = 0.0):
    """Mask of inputs whose write current cannot switch the device."""
    return np.asarray(write_current(s, m, c, i_ph, delta_r)) <= m.i_c0s


def slope_coefficient(s: SensorParams, m: MtjParams, t_write: float, r_eff: float) -> float:
    """beta: log-log slope of non-switching probability vs photocurrent."""
    return t_write / m.switching_charge * s.slope_voltage / r_eff


def solve_attempt_time(s: SensorParams, m: MtjParams, v_bias: float,
                       i_ph_ref: float = 1e-6) -> float:
    """Write time that makes beta = 1.

    With nonzero bias coefficients the resistance depends on the input, so it
    is evaluated at ``i_ph_ref``; with BC1 = BC2 = 0 the reference is irrelevant.
    """
    c = ConverterConfig(t_write=1e-9, v_bias=v_bias)
    r_pb = float(write_resistance(s, m, c, i_ph_ref))
    return m.switching_charge * r_pb / s.slope_voltage


def anchor_photocurrent(s: SensorParams, m: MtjParams, c: ConverterConfig,
                        p_bar: float = 0.5, delta_r: float = 0.0) -> float:
    """Photocurrent at which the output ones-frequency equals ``p_bar``."""
    if not 0.0 < p_bar < 1.0:
        raise ValueError("p_bar must lie strictly between 0 and 1")
    target = np.log(p_bar)

    def f(log_i):
        i = np.exp(log_i)
        r = write_resistance(s, m, c, i) + delta_r
        return float(log_nonswitch(s, m, c.t_write, c.v_bias, r, i)) - target

    lo, hi = np.log(s.i_d0) - 60.0, np.log(s.i_d0) + 60.0
    if f(lo) > 0 or f(hi) < 0:
        raise ValueError(f"no photocurrent yields p_bar = {p_bar} at this operating point")
    return float(np.exp(brentq(f, lo, hi, xtol=1e-14, rtol=1e-15)))


def _switch_prob(s, m, c, i_ph, delta_r):
    i_ph = np.asarray(i_ph, dtype=float)
    if np.any(i_ph <= 0):
        raise ValueError("photocurrent must be positive")
    r = write_resistance(s, m, c, i_ph) + delta_r
    return -np.expm1(log_nonswitch(s, m, c.t_write, c.v_bias, r, i_ph))


def convert_sample(s: SensorParams, m: MtjParams, c: ConverterConfig, i_ph: float,
                   rng: np.random.Generator, delta_r: float = 0.0) -> int:
    """One write/set/erase cycle starting from the parallel state.

    Write: one uniform draw decides whether the MTJ switched. Set: the bit is
    1 if it is still parallel. Erase: the MTJ is reset to parallel.
    """
    if i_ph <= 0:
        raise ValueError("photocurrent must be positive")
    i_w = write_current(s, m, c, i_ph, delta_r)
    state = device.sample_switch(m, i_w, c.t_write, rng)
    return int(state is MtjState.PARALLEL)


def generate_bitstream(s: SensorParams, m: MtjParams, c: ConverterConfig, i_ph: float,
                       length: int, rng: np.random.Generator,
                       delta_r: float = 0.0) -> BitStream:
    """``length`` consecutive conversion cycles.

    With ``c.erase_failure == 0`` each bit consumes one uniform, identical to
    repeated :func:`convert_sample`. A failed erase leaves the MTJ
    anti-parallel for the next cycle, whose write cannot move it back, so that
    cycle outputs 0; this path draws two uniforms per cycle.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    p_w = float(_switch_prob(s, m, c, i_ph, delta_r))
    if c.erase_failure == 0.0:
        return BitStream(rng.random(length) >= p_w)
    u = rng.random((length, 2))
    bits = np.empty(length, dtype=np.bool_)
    stuck = False
    for k in range(length):
        bit = (not stuck) and u[k, 0] >= p_w
        bits[k] = bit
        stuck = (not bit) and u[k, 1] < c.erase_failure
    return BitStream(bits)
