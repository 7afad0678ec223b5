"""Run configuration: a key/value text file with dotted section keys.

Example::

    # device
    mtj.i_c0s = 200u
    mtj.r_p = 1k
    converter.v_bias = 0.4
    seed = 7

``[section]`` headers are accepted as a prefix for the keys that follow.
Numbers are SI; an optional scale suffix (f p n u µ m k M G) multiplies the
literal, so ``4.83n`` is 4.83e-9. Missing keys take the
defaults of the dataclasses below. ``converter.t_write`` defaults to the
write time that makes the conversion linear.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, fields
from pathlib import Path

from . import converter as conv
from .calibration import VariabilityModel
from .converter import ConverterConfig, SensorParams
from .device import MtjParams
from .rng import DEFAULT_SEED

OUTPUT_DIR_ENV = "MTJSC_OUTPUT_DIR"

SUFFIXES = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3,
            "k": 1e3, "M": 1e6, "G": 1e9}
_NUMBER = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)([fpnuµmkMG]?)$")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("\n".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class RunConfig:
    mtj: MtjParams
    sensor: SensorParams
    converter: ConverterConfig
    variability: VariabilityModel | None = None
    seed: int = DEFAULT_SEED
    output_dir: Path = Path("out")


def parse_number(text: str) -> float:
    m = _NUMBER.match(text.strip())
    if not m:
        raise ValueError(f"not a number: {text!r}")
    return float(m.group(1)) * SUFFIXES.get(m.group(2), 1.0)


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


SECTIONS = {
    "mtj": _field_names(MtjParams),
    "sensor": _field_names(SensorParams),
    "converter": _field_names(ConverterConfig),
    "variability": _field_names(VariabilityModel),
}
TOP_LEVEL = {"seed", "output_dir", "temperature"}


def parse_text(text: str, source: str = "<string>") -> dict[str, dict[str, object]]:
    """Parse into ``{section: {key: value}}``; the top level is section ``""``."""
    out: dict[str, dict[str, object]] = {"": {}, **{k: {} for k in SECTIONS}}
    problems = []
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SECTIONS:
                problems.append(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            problems.append(f"{where}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        full = f"{section}.{key}" if section and "." not in key else key
        sec, _, name = full.rpartition(".")
        if sec == "" and name in TOP_LEVEL:
            pass
        elif sec not in SECTIONS or name not in SECTIONS[sec]:
            problems.append(f"{where}: unknown field {full!r}")
            continue
        if name == "output_dir":
            out[sec][name] = value.strip("\"'")
            continue
        if name == "seed":
            if not value.isdigit() or int(value) >= 2**64:
                problems.append(f"{where}: seed must be an unsigned 64-bit integer")
                continue
            num = int(value)
        else:
            try:
                num = parse_number(value)
            except ValueError:
                problems.append(f"{where}: field {full!r}: not a number: {value!r}")
                continue
        if name in out[sec]:
            problems.append(f"{where}: duplicate field {full!r}")
        out[sec][name] = num
    if problems:
        raise ConfigError(problems)
    return out


def build_config(values: dict[str, dict[str, object]]) -> RunConfig:
    problems = []
    top = values.get("", {})
    mtj_kw = dict(values.get("mtj", {}))
    sen_kw = dict(values.get("sensor", {}))
    if "temperature" in top:
        mtj_kw.setdefault("temperature", top["temperature"])
        sen_kw.setdefault("temperature", top["temperature"])

    def make(cls, kw):
        try:
            obj = cls(**kw)
        except ValueError as e:
            msg = str(e)
            if msg.startswith("invalid "):
                msg = msg.split(": ", 1)[1]
            problems.extend(msg.split("; "))
            return None
        return obj

    mtj = make(MtjParams, mtj_kw)
    sensor = make(SensorParams, sen_kw)
    if mtj and sensor and mtj.temperature != sensor.temperature:
        problems.append(
            f"mtj.temperature ({mtj.temperature}) must equal sensor.temperature "
            f"({sensor.temperature})"
        )
    conv_kw = dict(values.get("converter", {}))
    if "t_write" not in conv_kw and mtj and sensor:
        conv_kw["t_write"] = conv.solve_attempt_time(
            sensor, mtj, conv_kw.get("v_bias", ConverterConfig.__dataclass_fields__["v_bias"].default)
        )
    converter = make(ConverterConfig, conv_kw) if "t_write" in conv_kw else None
    if converter and sensor:
        problems.extend(p for p in converter.problems(sensor) if "v_dd" in p)
    variability = None
    if values.get("variability"):
        variability = make(VariabilityModel, values["variability"])
        if variability and mtj:
            try:
                variability.check(mtj)
            except ValueError as e:
                problems.append(f"variability.delta_r: {e}")
    if problems:
        raise ConfigError(problems)
    out_dir = top.get("output_dir") or os.environ.get(OUTPUT_DIR_ENV) or "out"
    return RunConfig(mtj, sensor, converter, variability,
                     int(top.get("seed", DEFAULT_SEED)), Path(out_dir))


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return build_config(parse_text(""))
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"{p}: cannot read config: {e.strerror}"]) from e
    return build_config(parse_text(text, str(p)))


def default_config() -> RunConfig:
    return load_config(None)
