"""Command line: ``mtjsc {sweep,montecarlo,calibrate,edge-detect}``.

Each command validates everything first, computes all outputs in memory,
then writes them with write-then-rename, so a failed run leaves nothing
behind. Exit status is 2 for invalid input and 1 for a run that fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import converter as conv
from . import device, kernels, sweeps
from .config import ConfigError, RunConfig, load_config, parse_number
from .pgm import PgmError, atomic_write, encode_pgm, read_pgm
from .rng import StreamFactory

Z95 = 1.959963984540054


class UsageError(ValueError):
    pass


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _number_list(text: str) -> list[float]:
    try:
        return [parse_number(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output_dir=Path(args.out))
    return cfg


def _write_all(out_dir: Path, files: dict[str, bytes | str]):
    for name, data in files.items():
        atomic_write(out_dir / name, data)
        print(out_dir / name)


def cmd_sweep(args) -> dict[str, str]:
    cfg = _load(args)
    i_ph = sweeps.photocurrent_grid(args.i_ph_min, args.i_ph_max, args.points)
    values = _number_list(args.series) if args.series else None
    kw = {}
    if args.kind == "write-current":
        series = sweeps.sweep_write_current(cfg, values or (0.0, 0.2, 0.4), i_ph)
    elif args.kind == "tau":
        series = sweeps.sweep_tau(cfg, values or (50e-6, 100e-6, 200e-6))
    elif args.kind == "probability":
        series = sweeps.sweep_probability(cfg, values, i_ph)
    else:
        kw["compensate"] = args.compensate
        series = sweeps.sweep_variability(cfg, values or (-100.0, -50.0, 50.0, 100.0),
                                          args.compensate, i_ph)
    stem = f"sweep_{args.kind}" + (f"_{args.compensate}" if kw else "")
    return {f"{stem}.csv": sweeps.emit_csv(series),
            f"{stem}.json": sweeps.sidecar(series, args.kind)}


def cmd_montecarlo(args) -> dict[str, str]:
    cfg = _load(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    s, m, c = cfg.sensor, cfg.mtj, cfg.converter
    if args.i_w is not None:
        i_w = args.i_w
        source = f"i_w = {i_w:.9e} A"
    else:
        i_ph = args.i_ph if args.i_ph is not None else conv.anchor_photocurrent(s, m, c)
        if i_ph <= 0:
            raise UsageError("--i-ph must be positive")
        i_w = float(conv.write_current(s, m, c, i_ph))
        source = f"i_ph = {i_ph:.9e} A -> i_w = {i_w:.9e} A"
    g = StreamFactory(cfg.seed).generator("montecarlo")
    switched = device.sample_switches(m, i_w, c.t_write, g, args.trials)
    k = int(switched.sum())
    lo, hi = wilson_interval(k, args.trials)
    p = float(device.switching_probability(m, i_w, c.t_write))
    rows = ["trial,state,switched"] + [
        f"{i},{'AP' if sw else 'P'},{int(sw)}" for i, sw in enumerate(switched)
    ]
    summary = "\n".join([
        "montecarlo summary",
        f"seed = {cfg.seed}",
        source,
        f"t_write = {c.t_write:.9e} s",
        f"trials = {args.trials}",
        f"switched = {k}",
        f"empirical_p = {k / args.trials:.9e}",
        f"wilson95_low = {lo:.9e}",
        f"wilson95_high = {hi:.9e}",
        f"analytic_p = {p:.9e}",
    ]) + "\n"
    return {"montecarlo_trials.csv": "\n".join(rows) + "\n",
            "montecarlo_summary.txt": summary}


def cmd_calibrate(args) -> dict[str, str]:
    cfg = _load(args)
    s, m, c = cfg.sensor, cfg.mtj, cfg.converter
    if args.delta_r is not None:
        var = cal.VariabilityModel(args.delta_r)
    elif cfg.variability is not None:
        var = cfg.variability.sample(m, StreamFactory(cfg.seed).generator("variability"))
    else:
        var = cal.VariabilityModel(0.0)
    var.check(m)
    floor = cal.statistical_floor(args.stream_len)
    if floor > args.tol_p:
        raise UsageError(
            f"--stream-len {args.stream_len} below statistical floor: "
            f"3-sigma width {floor:.4g} > tol_p {args.tol_p}"
        )
    truth = cal.analytic_compensation(s, m, c, var)
    dut = cal.SimulatedDevice(s, m, c, var, seed=cfg.seed)
    anchors = cal.default_anchor_inputs(s, m, c)
    found = cal.empirical_calibrate(dut, anchors, args.stream_len, c.t_write, c.v_bias,
                                    s.v_dd, args.tol_p, args.tol_slope)
    lines = [
        "calibration report",
        f"seed = {cfg.seed}",
        f"hidden_delta_r = {var.delta_r:.9e} ohm ({var.mode}"
        + (", sampled: beyond the fixed-offset analysis" if var.mode != "fixed" else "") + ")",
        f"nominal_t_write = {c.t_write:.9e} s",
        f"nominal_v_bias = {c.v_bias:.9e} V",
        f"anchor_inputs = {', '.join(f'{a:.9e}' for a in anchors)} A",
        f"stream_len = {args.stream_len}",
        f"tol_p = {args.tol_p}",
        f"tol_slope = {args.tol_slope}",
        "",
        f"{'':14s}{'recovered':>18s}{'analytic':>18s}",
        f"{'t_prime [s]':14s}{found.t_prime:18.9e}{truth.t_prime:18.9e}",
        f"{'v_bias [V]':14s}{found.v_bias_prime:18.9e}{truth.v_bias_prime:18.9e}",
        "",
        f"iterations = {found.iterations}",
        f"residual_slope_error = {found.residual_slope_error:.9e}",
        f"residual_p50_error = {found.residual_p50_error:.9e}",
        f"assumption = {cal.RPB_ASSUMPTION}",
    ]
    return {"calibration_report.txt": "\n".join(lines) + "\n"}


def cmd_edge_detect(args) -> dict[str, bytes | str]:
    cfg = _load(args)
    img = read_pgm(args.input)
    if img.width < 2 or img.height < 2:
        raise UsageError("image must be at least 2x2")
    if not 0.0 <= args.error_rate <= 1.0:
        raise UsageError("--error-rate must lie in [0, 1]")
    if args.bits < 1:
        raise UsageError("--bits must be >= 1")
    if not 1 <= args.bit_width <= 16:
        raise UsageError("--bit-width must be in [1, 16]")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    ref = kernels.roberts_cross_exact(img)
    maes, first = [], None
    for k in range(args.repeats):
        seed = cfg.seed + k
        if args.mode == "exact":
            out = ref
        elif args.mode == "stochastic":
            out = kernels.roberts_cross_stochastic(img, args.bits, seed, args.error_rate,
                                                   args.workers)
        else:
            g = StreamFactory(seed).generator("binary-errors")
            out = kernels.binary_pipeline_with_errors(img, args.bit_width, args.error_rate, g)
        maes.append((seed, kernels.mean_abs_error(out, ref)))
        first = first or out
    lines = [
        "edge-detect metrics",
        f"input = {Path(args.input).name}",
        f"size = {img.width}x{img.height}",
        f"mode = {args.mode}",
        f"error_rate = {args.error_rate}",
    ]
    if args.mode == "stochastic":
        lines.append(f"stream_len = {args.bits}")
    if args.mode == "binary":
        lines.append(f"bit_width = {args.bit_width}")
    lines += [f"mae_seed_{seed} = {mae:.9e}" for seed, mae in maes]
    lines.append(f"mae_mean = {np.mean([m for _, m in maes]):.9e}")
    return {f"edges_{args.mode}.pgm": encode_pgm(first),
            f"metrics_{args.mode}.txt": "\n".join(lines) + "\n"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (default: $MTJSC_OUTPUT_DIR or ./out)")
    common.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="mtjsc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", parents=[common], help="analytic sweeps as CSV")
    sw.add_argument("--kind", required=True,
                    choices=["write-current", "tau", "probability", "variability"])
    sw.add_argument("--series", metavar="LIST",
                    help="comma list: V_bias, I_c0s, t or delta_r values depending on --kind")
    sw.add_argument("--compensate", choices=["none", "vbias", "both"], default="none")
    sw.add_argument("--i-ph-min", type=parse_number, default=sweeps.I_PH_RANGE[0])
    sw.add_argument("--i-ph-max", type=parse_number, default=sweeps.I_PH_RANGE[1])
    sw.add_argument("--points", type=int, default=sweeps.N_POINTS)
    sw.set_defaults(func=cmd_sweep)

    mc = sub.add_parser("montecarlo", parents=[common], help="sample write attempts")
    grp = mc.add_mutually_exclusive_group()
    grp.add_argument("--i-w", type=parse_number, help="write current [A]")
    grp.add_argument("--i-ph", type=parse_number,
                     help="photocurrent [A] (default: the 50%% anchor)")
    mc.add_argument("--trials", type=int, default=100)
    mc.set_defaults(func=cmd_montecarlo)

    ca = sub.add_parser("calibrate", parents=[common],
                        help="recover t' and V'_bias for a device with hidden delta_r")
    ca.add_argument("--delta-r", type=parse_number,
                    help="hidden resistance offset [ohm] (default: config variability)")
    ca.add_argument("--stream-len", type=lambda v: int(parse_number(v)), default=10**6)
    ca.add_argument("--tol-p", type=float, default=0.01)
    ca.add_argument("--tol-slope", type=float, default=0.01)
    ca.set_defaults(func=cmd_calibrate)

    ed = sub.add_parser("edge-detect", parents=[common], help="Roberts-cross edge map")
    ed.add_argument("--input", required=True, metavar="PATH", help="P2/P5 PGM image")
    ed.add_argument("--mode", choices=["stochastic", "binary", "exact"], default="stochastic")
    ed.add_argument("--bits", type=int, default=1000, help="stochastic stream length")
    ed.add_argument("--bit-width", type=int, default=8, help="binary pipeline word size")
    ed.add_argument("--error-rate", type=float, default=0.0)
    ed.add_argument("--repeats", type=int, default=1,
                    help="seeds seed..seed+N-1; metrics per seed, image from the first")
    ed.set_defaults(func=cmd_edge_detect)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        files = args.func(args)
        out_dir = _load(args).output_dir
    except (ConfigError, UsageError, PgmError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except cal.CalibrationDidNotConverge as e:
        print(f"error: {e} (best: t'={e.best.t_prime:.6g} s, "
              f"V'_bias={e.best.v_bias_prime:.6g} V)", file=sys.stderr)
        return 1
    _write_all(out_dir, files)
    return 0


if __name__ == "__main__":
    sys.exit(main())
