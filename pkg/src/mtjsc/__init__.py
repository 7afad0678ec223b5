"""Behavioural model of an MTJ analog-to-stochastic converter and the
stochastic-computing pipeline it feeds."""

from .calibration import (CalibrationResult, VariabilityModel, analytic_compensation,
                          empirical_calibrate, perturbed_log_prob, vbias_only_compensation)
from .converter import (ConverterConfig, SensorParams, convert_sample, generate_bitstream,
                        nonswitch_log_prob, photocurrent_to_voltage, solve_attempt_time,
                        write_current)
from .device import (MtjParams, MtjState, biased_parallel_resistance, critical_current_spin,
                     critical_current_thermal, sample_switch, switching_probability,
                     switching_time_constant)
from .kernels import BitStream, PixelGrid

__version__ = "0.1.0"
