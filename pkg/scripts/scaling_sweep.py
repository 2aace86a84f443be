#!/usr/bin/env python3
"""Plateau linewidth versus condensate number: the N^(1/6) scaling law."""

import argparse

from atomlaser.presets import get_preset
from atomlaser.runner import run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/scaling_sweep")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = get_preset("fig9-sweep", desk=True)
    sweep = run_sweep(cfg, args.out, workers=args.workers)
    for n, p in zip(sweep.values, sweep.plateaus):
        print(f"N = {n:10.0f}: plateau = {p:.4e} J")
    fit = sweep.fit
    print(f"\nfitted exponent = {fit.exponent:.4f} "
          f"(95% CI [{fit.ci_low:.4f}, {fit.ci_high:.4f}]); expected 1/6")


if __name__ == "__main__":
    main()
