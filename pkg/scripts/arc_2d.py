#!/usr/bin/env python3
"""Two-dimensional beam: the energy-conservation arc in momentum space."""

import argparse

from atomlaser.config import resolve
from atomlaser.presets import get_preset
from atomlaser.runner import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/arc_2d")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = get_preset("fig6", desk=True)
    result = run_experiment(resolve(cfg), args.out, workers=args.workers)
    arc = result.arc
    print(f"\ndetected arc radius  = {arc.radius:.5e} 1/m")
    print(f"predicted radius     = {arc.predicted_radius:.5e} 1/m "
          f"(deviation {abs(arc.radius / arc.predicted_radius - 1):.2%})")
    print(f"shell SNR            = {arc.shell_snr:.1f}")
    print(f"longitudinal cut fit: R^2 = {arc.longitudinal_fit.r_squared:.3f}")


if __name__ == "__main__":
    main()
