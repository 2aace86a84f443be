#!/usr/bin/env python3
"""Linewidth floor of a squeezed versus coherent condensate source.

Runs the fig4 desk preset twice with the same seeds, once coherent and
once with quadrature squeezing r = ln 2 (number variance N/4), and prints
the plateau ratio (expected close to 1/2).
"""

import argparse
import math

from atomlaser.config import resolve
from atomlaser.presets import get_preset
from atomlaser.runner import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/squeezing_comparison")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = get_preset("fig4", desk=True)
    coherent = run_experiment(resolve(cfg), f"{args.out}/coherent",
                              workers=args.workers)
    cfg["physical"]["squeeze_r"] = math.log(2.0)
    squeezed = run_experiment(resolve(cfg), f"{args.out}/squeezed",
                              workers=args.workers)

    print(f"\ncoherent plateau = {coherent.plateau:.4e} J")
    print(f"squeezed plateau = {squeezed.plateau:.4e} J")
    print(f"ratio            = {squeezed.plateau / coherent.plateau:.3f} "
          "(number variance N/4 halves the linewidth)")


if __name__ == "__main__":
    main()
