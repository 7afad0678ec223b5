"""Closed-form switching model of a spin-transfer-torque MTJ.

Two critical-current regimes are provided. The thermal-activation formula
applies for pulses much longer than the attempt time; the spin-injection
formula applies for nanosecond pulses and is the one the converter uses.
Functions accept scalars or numpy arrays for the current/time arguments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

K_B = 1.380649e-23  # J/K
Q = 1.602177e-19  # C


def thermal_voltage(temperature: float) -> float:
    return K_B * temperature / Q


class BelowCriticalCurrent(ValueError):
    pass


class MtjState(enum.Enum):
    PARALLEL = "P"
    ANTI_PARALLEL = "AP"


@dataclass(frozen=True)
class MtjParams:
    i_c0s: float = 200e-6
    i_c0t: float | None = None  # defaults to i_c0s
    tau_0: float = 1e-9
    tau_relax: float = 500e-12
    e_over_kbt: float = 60.0
    r_p: float = 1e3
    r_ap: float = 3e3
    bc1: float = 0.0
    bc2: float = 0.0
    temperature: float = 300.0

    def __post_init__(self):
        if self.i_c0t is None:
            object.__setattr__(self, "i_c0t", self.i_c0s)
        problems = self.problems()
        if problems:
            raise ValueError("invalid MtjParams: " + "; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        for name in ("i_c0s", "i_c0t", "tau_0", "tau_relax", "e_over_kbt",
                     "r_p", "r_ap", "temperature"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                out.append(f"mtj.{name} must be > 0 (got {v!r})")
        if self.r_ap <= self.r_p:
            out.append(f"mtj.r_ap must exceed mtj.r_p ({self.r_ap!r} <= {self.r_p!r})")
        return out

    @property
    def spin_log_factor(self) -> float:
        """ln((pi/2) / sqrt(kT/E)); 2.4988 at E/kT = 60."""
        return float(np.log((np.pi / 2) / np.sqrt(1.0 / self.e_over_kbt)))

    @property
    def switching_charge(self) -> float:
        """I_c0s * tau_relax * ln(...), the numerator of the time constant (coulombs)."""
        return self.i_c0s * self.tau_relax * self.spin_log_factor


def critical_current_thermal(params: MtjParams, tau_p):
    """Critical current in the thermal-activation region (pulse >> tau_0)."""
    tau_p = np.asarray(tau_p, dtype=float)
    if np.any(tau_p < params.tau_0):
        raise ValueError("thermal critical current needs tau_p >= tau_0")
    out = params.i_c0t * (1.0 - np.log(tau_p / params.tau_0) / params.e_over_kbt)
    return out[()] if out.ndim == 0 else out


def critical_current_spin(params: MtjParams, tau_p):
    """Critical current in the spin-injection region (short pulses)."""
    tau_p = np.asarray(tau_p, dtype=float)
    if np.any(tau_p <= 0):
        raise ValueError("tau_p must be positive")
    out = params.i_c0s * (1.0 + params.tau_relax / tau_p * params.spin_log_factor)
    return out[()] if out.ndim == 0 else out


def switching_time_constant(params: MtjParams, i_w):
    """tau_p for write current ``i_w``; raises below the critical current."""
    i_w = np.asarray(i_w, dtype=float)
    if np.any(i_w <= params.i_c0s):
        raise BelowCriticalCurrent(
            f"below critical current: i_w must exceed i_c0s = {params.i_c0s:g} A"
        )
    out = params.switching_charge / (i_w - params.i_c0s)
    return out[()] if out.ndim == 0 else out


def log_nonswitch_probability(params: MtjParams, i_w, t):
    """ln(1 - p_w) = -t/tau_p, or 0 where i_w <= i_c0s."""
    i_w = np.asarray(i_w, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("pulse duration must be non-negative")
    overdrive = np.maximum(i_w - params.i_c0s, 0.0)
    out = -t * overdrive / params.switching_charge
    return out[()] if out.ndim == 0 else out


def switching_probability(params: MtjParams, i_w, t):
    """p_w = 1 - exp(-t/tau_p); zero at or below the critical current."""
    out = -np.expm1(log_nonswitch_probability(params, i_w, t))
    return out[()] if np.ndim(out) == 0 else out


def biased_parallel_resistance(params: MtjParams, v_b):
    v = np.abs(np.asarray(v_b, dtype=float))
    out = params.r_p * (1.0 + params.bc1 * v + params.bc2 * v * v)
    return out[()] if out.ndim == 0 else out


def sample_switch(params: MtjParams, i_w: float, t: float,
                  rng: np.random.Generator) -> MtjState:
    """One write attempt from the parallel state, using a single uniform draw."""
    p = switching_probability(params, i_w, t)
    return MtjState.ANTI_PARALLEL if rng.random() < p else MtjState.PARALLEL


def sample_switches(params: MtjParams, i_w, t, rng: np.random.Generator,
                    size: int) -> np.ndarray:
    """Vectorised :func:`sample_switch`; True where the device ended anti-parallel.

    Draws exactly ``size`` uniforms, in the same order sequential calls would.
    """
    p = switching_probability(params, i_w, t)
    return rng.random(size) < p

