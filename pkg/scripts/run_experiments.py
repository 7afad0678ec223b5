"""Regenerate the sweep curves, a variability comparison and the
edge-detection robustness table.

    python scripts/run_experiments.py [OUT_DIR] [--seeds N]

Everything is written under OUT_DIR (default ./experiments).
"""

import argparse
from pathlib import Path

import numpy as np

from mtjsc import calibration as cal
from mtjsc import kernels as k
from mtjsc import sweeps
from mtjsc.config import default_config
from mtjsc.pgm import atomic_write, read_pgm, write_pgm
from mtjsc.rng import substream

IMAGE = Path(__file__).resolve().parent.parent / "tests" / "data" / "camera128.pgm"


def sweep_files(out: Path):
    cfg = default_config()
    runs = {
        "write_current": sweeps.sweep_write_current(cfg),
        "tau": sweeps.sweep_tau(cfg),
        "probability": sweeps.sweep_probability(cfg),
        "variability_none": sweeps.sweep_variability(cfg, compensate="none"),
        "variability_vbias": sweeps.sweep_variability(cfg, compensate="vbias"),
        "variability_both": sweeps.sweep_variability(cfg, compensate="both"),
    }
    for name, series in runs.items():
        atomic_write(out / f"{name}.csv", sweeps.emit_csv(series))
        atomic_write(out / f"{name}.json", sweeps.sidecar(series, name))
    c = cfg.converter
    print(f"solved t_write = {c.t_write * 1e9:.4f} ns at V_bias = {c.v_bias} V")
    print("dR [ohm]   t' [ns]   V'(both) [V]   V'(bias only) [V]   slope err (bias only)")
    for dr in (-100.0, -50.0, 50.0, 100.0):
        var = cal.VariabilityModel(dr)
        full = cal.analytic_compensation(cfg.sensor, cfg.mtj, c, var)
        vo = cal.vbias_only_compensation(cfg.sensor, cfg.mtj, c, var)
        print(f"{dr:8.0f}   {full.t_prime * 1e9:7.4f}   {full.v_bias_prime:12.4f}"
              f"   {vo.v_bias_prime:17.4f}   {vo.residual_slope_error:.4f}")


def robustness(out: Path, seeds: int):
    img = read_pgm(IMAGE)
    ref = k.roberts_cross_exact(img)
    write_pgm(out / "edges_exact.pgm", ref)
    rows = ["error_rate,stochastic_mae,binary8_mae"]
    print("eps     stochastic(1000 bits)   binary(8 bit)")
    for eps in (0.0, 0.01, 0.02, 0.05, 0.10):
        sc_runs = [k.roberts_cross_stochastic(img, 1000, seed=s, error_rate=eps)
                   for s in range(seeds)]
        bn_runs = [k.binary_pipeline_with_errors(img, 8, eps, substream(s, "binary"))
                   for s in range(seeds)]
        sc = np.mean([k.mean_abs_error(r, ref) for r in sc_runs])
        bn = np.mean([k.mean_abs_error(r, ref) for r in bn_runs])
        write_pgm(out / f"edges_stochastic_{eps:g}.pgm", sc_runs[0])
        write_pgm(out / f"edges_binary_{eps:g}.pgm", bn_runs[0])
        rows.append(f"{eps:g},{sc:.6e},{bn:.6e}")
        print(f"{eps:<6g}  {sc:21.5f}   {bn:13.5f}")
    atomic_write(out / "robustness.csv", "\n".join(rows) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default="experiments")
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    out = Path(args.out)
    sweep_files(out)
    robustness(out, args.seeds)
    print(f"outputs in {out}/")


if __name__ == "__main__":
    main()
