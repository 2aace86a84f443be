"""Static SVG figures for run artifacts."""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .params import HBAR


def _finish(fig, out_dir, name, config_hash):
    fig.text(0.99, 0.01, f"config {config_hash[:12]}", ha="right",
             fontsize=6, color="0.55")
    path = os.path.join(out_dir, name)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return path


def linewidth_loglog(result, out_dir):
    """Linewidth narrowing vs time with theory bar (log-log)."""
    recs = [r for r in result.records if r.ok]
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    if recs:
        ax.loglog([r.time for r in recs],
                  [r.linewidth_energy for r in recs],
                  "o-", label="stochastic" if result.resolved.evolution.wigner
                  else "mean field")
    sc = result.semiclassical_records
    if sc:
        ok = [r for r in sc if r.ok]
        ax.loglog([r.time for r in ok], [r.linewidth_energy for r in ok],
                  "--", color="0.35", label="mean field")
    theory = result.records[0].theory_limit if result.records else None
    if theory:
        ax.axhline(theory, color="crimson", lw=1.2,
                   label="2 dE phase diffusion")
    if result.plateau:
        ax.axhline(result.plateau, color="seagreen", lw=1.0, ls=":",
                   label="plateau estimate")
    ax.set_xlabel("outcoupling time (s)")
    ax.set_ylabel("linewidth, 1/e full width (J)")
    ax.legend(fontsize=8)
    return _finish(fig, out_dir, "linewidth_loglog.svg",
                   result.resolved.config_hash)


def spectrum_with_fit(result, out_dir):
    """Final-time beam spectrum with its Gaussian envelope."""
    from .analysis import fit_gaussian, moment_window
    from .theory import chemical_potential, predicted_peak_momentum
    r = result.resolved
    series = result.series
    i = len(series.times) - 1
    k = np.fft.fftshift(series.k_axes[0])
    s = np.fft.fftshift(series.spectrum(i))
    mu = chemical_potential(r.params, 1)
    k_pk = predicted_peak_momentum(r.params, mu)
    gap = max(k_pk - r.params.kick_wavenumber, 0.05 * k_pk)
    win = moment_window(k, s, k_pk, 0.5 * gap,
                        lo_clip=r.params.kick_wavenumber + 0.25 * gap)
    fit = fit_gaussian(k, s, window=win)
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    m = (k > win[0] - 2 * (win[1] - win[0])) & (k < win[1] + 2 * (win[1] - win[0]))
    ax.plot(k[m], s[m], lw=0.9, label=f"t = {series.times[i]:.3g} s")
    if fit.ok:
        kk = np.linspace(win[0], win[1], 400)
        ax.plot(kk, fit.amplitude * np.exp(-((kk - fit.center) / fit.width)**2),
                "--", label=f"Gaussian fit (R^2 = {fit.r_squared:.3f})")
    ax.set_xlabel("k (1/m)")
    ax.set_ylabel("beam power density (m)")
    ax.legend(fontsize=8)
    return _finish(fig, out_dir, "spectrum_fit.svg", r.config_hash)


def momentum_density_2d(result, out_dir):
    series = result.series
    i = len(series.times) - 1
    k_x = np.fft.fftshift(series.k_axes[0])
    k_z = np.fft.fftshift(series.k_axes[1])
    s = np.clip(np.fft.fftshift(series.spectrum(i)), 0, None)
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    im = ax.pcolormesh(k_x, k_z, s.T, shading="auto", cmap="magma")
    fig.colorbar(im, ax=ax, label="beam power density (m^2)")
    if result.arc is not None:
        th = np.linspace(-np.pi / 2, np.pi / 2, 200)
        ax.plot(result.arc.radius * np.sin(th), result.arc.radius * np.cos(th),
                "c--", lw=0.8, label="detected arc")
        ax.legend(fontsize=8, loc="lower right")
    ax.set_xlabel("k_x (1/m)")
    ax.set_ylabel("k_z (1/m)")
    ax.set_ylim(0, None)
    return _finish(fig, out_dir, "momentum_density_2d.svg",
                   result.resolved.config_hash)


def emit_run_plots(result, out_dir):
    paths = []
    if result.resolved.grid.dimension == 1:
        if result.records:
            paths.append(linewidth_loglog(result, out_dir))
        paths.append(spectrum_with_fit(result, out_dir))
    else:
        paths.append(momentum_density_2d(result, out_dir))
    return paths


def emit_sweep_plot(sweep, base, out_dir):
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    ax.loglog(sweep.values, sweep.plateaus, "o-", label="coherent source")
    if sweep.squeezed_plateaus:
        ax.loglog(sweep.values, sweep.squeezed_plateaus, "s-",
                  label="squeezed source")
    if sweep.fit is not None:
        n = np.array(sweep.values)
        ax.loglog(n, sweep.fit.prefactor * n**sweep.fit.exponent, "--",
                  color="0.4",
                  label=f"fit N^{sweep.fit.exponent:.3f}")
    ax.set_xlabel(sweep.variable)
    ax.set_ylabel("plateau linewidth (J)")
    ax.legend(fontsize=8)
    return _finish(fig, out_dir, "plateau_vs_N.svg", base.config_hash)
