"""Experiment orchestration: ground state -> ensemble -> analysis -> files.

A wigner run optionally drives a single-trajectory mean-field companion on
the same schedule; the companion's Fourier-limited linewidth is what the
stochastic series is compared against (and is removed in quadrature by the
plateau estimator).
"""

from __future__ import annotations

import copy
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (AnalysisError, ArcProfile, LinewidthRecord,
                       arc_profile_2d, estimate_plateau, linewidth_series,
                       scaling_fit)
from .config import (ConfigError, ResolvedExperiment, resolve, to_toml)
from .dynamics import ground_state, measured_chemical_potential
from .ensemble import SpectrumSeries, run_ensemble
from .params import HBAR
from .theory import chemical_potential, phase_diffusion_limit, \
    predicted_peak_momentum


@dataclass
class RunResult:
    resolved: ResolvedExperiment
    series: SpectrumSeries
    records: list[LinewidthRecord] | None = None
    semiclassical_records: list[LinewidthRecord] | None = None
    plateau: float | None = None
    arc: ArcProfile | None = None
    fit_trouble: bool = False
    wall_time: float = 0.0
    out_dir: str | None = None


def theory_report(r: ResolvedExperiment) -> list[str]:
    """Human-readable derived quantities for theory/dry-run output."""
    p = r.params
    lines = []
    for d in (1, 2, 3):
        try:
            mu = chemical_potential(p, d)
            de = phase_diffusion_limit(p, d)
        except Exception:
            continue
        lines.append(f"mu_{d}d = {mu:.6e} J; "
                     f"phase-diffusion dE_{d}d = {de:.6e} J; "
                     f"2 dE_{d}d = {2 * de:.6e} J")
    d = r.grid.dimension
    mu = chemical_potential(p, d)
    de = phase_diffusion_limit(p, d)
    k_pk = predicted_peak_momentum(p, mu)
    v = HBAR * k_pk / p.mass
    lines += [
        f"dimension = {d}",
        f"predicted beam peak k = {k_pk:.6e} 1/m "
        f"(speed {v:.4e} m/s)",
        f"grid points = {list(r.grid.points)}, extent = "
        f"{[f'{e:.4e}' for e in r.grid.extents]} m",
        f"time step = {r.evolution.time_step:.6e} s, total time = "
        f"{r.evolution.total_time:.6e} s "
        f"({round(r.evolution.total_time / r.evolution.time_step)} steps)",
        f"rabi = {abs(p.rabi_frequency):.6e} rad/s, detuning = "
        f"{p.detuning:.6e} rad/s",
        f"trajectories = {r.trajectories}, mode = {r.evolution.mode}",
        f"analysis times = {[f'{t:.4f}' for t in r.analysis_times]} s",
        f"config hash = {r.config_hash}",
    ]
    if de > 0:
        t_star = 6.5 * HBAR / (2 * de)
        lines.append(f"expected plateau crossing t* ~ {t_star:.4e} s "
                     f"(T/t* = {r.evolution.total_time / t_star:.2f})")
    return lines


def run_experiment(r: ResolvedExperiment, out_dir: str | None = None,
                   workers: int = 1, plots: bool | None = None,
                   resume_from: str | None = None,
                   progress=None) -> RunResult:
    t0 = time.perf_counter()
    out_dir = out_dir or r.output_directory
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.toml"), "w") as fh:
        fh.write(to_toml(r.config_dict))

    gs = ground_state(r.params, r.grid, r.params.atom_number)
    ckpt = os.path.join(out_dir, "checkpoint.alck") \
        if r.checkpoint_every > 0 or resume_from else None
    espec = r.ensemble_spec(workers=workers, checkpoint_path=ckpt)
    series = run_ensemble(espec, r.params, r.grid, gs,
                          config_hash=r.config_hash,
                          resume_from=resume_from, progress=progress)

    result = RunResult(resolved=r, series=series, out_dir=out_dir)
    sc_series = None
    if r.evolution.wigner and r.compare_semiclassical:
        twin = r.semiclassical_twin()
        sc_series = run_ensemble(twin.ensemble_spec(workers=1),
                                 twin.params, twin.grid, gs,
                                 config_hash=twin.config_hash)

    mu_num = measured_chemical_potential(gs, r.params, r.grid)
    if r.grid.dimension == 1:
        result.records = linewidth_series(series, r.params, span=r.fit_span)
        if sc_series is not None:
            result.semiclassical_records = linewidth_series(
                sc_series, r.params, span=r.fit_span)
        try:
            result.plateau = estimate_plateau(
                result.records, result.semiclassical_records,
                window_fraction=r.plateau_window_fraction)
        except AnalysisError:
            result.plateau = None
            result.fit_trouble = True
        late = [rec for rec in result.records
                if rec.time >= 0.5 * r.evolution.total_time]
        if late and not any(rec.ok for rec in late):
            result.fit_trouble = True
    else:
        try:
            result.arc = arc_profile_2d(
                series.spectrum(len(series.times) - 1), r.grid, r.params,
                mu_num, )
            if not result.arc.longitudinal_fit.ok:
                result.fit_trouble = True
        except AnalysisError:
            result.arc = None
            result.fit_trouble = True

    result.wall_time = time.perf_counter() - t0
    _write_artifacts(result, sc_series, mu_num)
    if (plots if plots is not None else r.plots):
        from . import plots as plot_mod
        plot_mod.emit_run_plots(result, out_dir)
    return result


def _write_artifacts(result: RunResult, sc_series, mu_num):
    r = result.resolved
    out = result.out_dir
    series = result.series
    # spectra
    if r.grid.dimension == 1:
        _write_spectra_csv(os.path.join(out, "spectra.csv"), series, r)
        if sc_series is not None:
            _write_spectra_csv(os.path.join(out, "spectra_semiclassical.csv"),
                               sc_series, r)
    else:
        k_x = np.fft.fftshift(series.k_axes[0])
        k_z = np.fft.fftshift(series.k_axes[1])
        power = np.stack([np.fft.fftshift(series.spectrum(i))
                          for i in range(len(series.times))])
        np.savez_compressed(
            os.path.join(out, "spectra.npz"),
            times_s=series.times, k_x_per_m=k_x, k_z_per_m=k_z,
            power_m2=power, config_hash=np.array(r.config_hash),
            units=np.array("power is |psi2(k)|^2 - vacuum, units m^2"))
    # linewidth tables
    if result.records is not None:
        _write_linewidth_csv(os.path.join(out, "linewidth.csv"),
                             result.records, r, result.plateau)
    if result.semiclassical_records is not None:
        _write_linewidth_csv(os.path.join(out, "linewidth_semiclassical.csv"),
                             result.semiclassical_records, r, None)
    meta = {
        "config_hash": r.config_hash,
        "master_seed": r.master_seed,
        "atomlaser_version": __version__,
        "numpy_version": np.__version__,
        "wall_time_s": result.wall_time,
        "trajectories": series.count,
        "excluded": series.excluded,
        "measured_chemical_potential_J": mu_num,
        "theory": {
            "chemical_potential_J": chemical_potential(r.params,
                                                       r.grid.dimension),
            "phase_diffusion_dE_J": phase_diffusion_limit(r.params,
                                                          r.grid.dimension),
        },
        "negative_bin_fraction": [series.negative_fraction(i)
                                  for i in range(len(series.times))],
    }
    if result.plateau is not None:
        meta["plateau_linewidth_J"] = result.plateau
        meta["plateau_over_2dE"] = result.plateau / (
            2 * meta["theory"]["phase_diffusion_dE_J"])
    if result.arc is not None:
        meta["arc_radius_per_m"] = result.arc.radius
        meta["arc_predicted_radius_per_m"] = result.arc.predicted_radius
        meta["arc_shell_snr"] = result.arc.shell_snr
        meta["longitudinal_fit_r2"] = result.arc.longitudinal_fit.r_squared
    with open(os.path.join(out, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=1, default=float)


def _write_spectra_csv(path, series, r):
    k = np.fft.fftshift(series.k_axes[0])
    cols = [k]
    names = ["k_per_m"]
    for i, t in enumerate(series.times):
        cols.append(np.fft.fftshift(series.spectrum(i)))
        cols.append(np.fft.fftshift(series.spectrum_error(i)))
        names.append(f"power_t{t:.6g}s_m")
        names.append(f"stderr_t{t:.6g}s_m")
    header = [
        "atomlaser beam momentum power spectra",
        f"config_hash={r.config_hash}",
        f"mode={series.mode} trajectories={series.count}",
        "columns: wavenumber (1/m); per analysis time the vacuum-subtracted",
        "power density and its standard error (both in m, 1D density units)",
    ]
    _csv(path, header, names, cols)


def _write_linewidth_csv(path, records, r, plateau):
    header = [
        "atomlaser linewidth series",
        f"config_hash={r.config_hash}",
        "linewidth convention: full width at 1/e of A exp(-((k-kc)/w)^2),",
        "i.e. 2w; the conventional Gaussian sigma equals w/sqrt(2)",
        "theory_2dE_J = twice the phase-diffusion energy uncertainty",
    ]
    if plateau is not None:
        header.append(f"plateau_estimate_J={plateau:.8e}")
    names = ["time_s", "center_per_m", "w_per_m", "linewidth_k_per_m",
             "sigma_conventional_per_m", "linewidth_J", "linewidth_err_J",
             "r_squared", "ok", "theory_2dE_J"]
    cols = list(zip(*[(rec.time, rec.center, rec.width, rec.linewidth_k,
                       rec.width / math.sqrt(2), rec.linewidth_energy,
                       rec.linewidth_energy_err,
                       rec.r_squared, int(rec.ok), rec.theory_limit)
                      for rec in records]))
    _csv(path, header, names, [np.asarray(c) for c in cols])


def _csv(path, header_lines, names, cols):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


# -- sweeps -----------------------------------------------------------------


@dataclass
class SweepResult:
    variable: str
    values: list[float]
    plateaus: list[float]
    squeezed_plateaus: list[float] | None
    fit: object | None
    run_results: list[RunResult] = field(default_factory=list)


def run_sweep(raw_cfg: dict, out_dir: str, workers: int = 1,
              plots: bool | None = None) -> SweepResult:
    """Run the configured sweep; each value re-resolves its own autos."""
    base = resolve(raw_cfg)
    var = base.sweep_variable
    if not var:
        raise ConfigError("config has no [sweep] section")
    values = list(base.sweep_values)
    os.makedirs(out_dir, exist_ok=True)

    plateaus, squeezed, runs = [], [], []
    for v in values:
        cfg_v = copy.deepcopy(raw_cfg)
        cfg_v.pop("sweep", None)
        if var == "atom_number":
            cfg_v["physical"]["atom_number"] = v
        else:
            cfg_v["physical"]["squeeze_r"] = v
        sub = resolve(cfg_v)
        res = run_experiment(sub, os.path.join(out_dir, f"{var}_{v:g}"),
                             workers=workers, plots=False)
        if res.plateau is None:
            raise AnalysisError(f"no plateau estimate at {var} = {v:g}")
        plateaus.append(res.plateau)
        runs.append(res)
        if base.sweep_squeeze_pair:
            cfg_s = copy.deepcopy(cfg_v)
            cfg_s["physical"]["squeeze_r"] = math.log(2.0)
            res_s = run_experiment(resolve(cfg_s),
                                   os.path.join(out_dir,
                                                f"{var}_{v:g}_squeezed"),
                                   workers=workers, plots=False)
            squeezed.append(res_s.plateau)
            runs.append(res_s)

    fit = None
    if var == "atom_number" and len(values) >= 4:
        fit = scaling_fit(list(zip(values, plateaus)))
    sweep = SweepResult(variable=var, values=values, plateaus=plateaus,
                        squeezed_plateaus=squeezed or None, fit=fit,
                        run_results=runs)
    _write_sweep_csv(os.path.join(out_dir, "sweep.csv"), sweep, base)
    if (plots if plots is not None else base.plots):
        from . import plots as plot_mod
        plot_mod.emit_sweep_plot(sweep, base, out_dir)
    return sweep


def _write_sweep_csv(path, sweep, base):
    header = [
        "atomlaser plateau sweep",
        f"config_hash={base.config_hash}",
        f"variable={sweep.variable}",
        "plateau: late-time linewidth floor (J), semiclassical Fourier",
        "component removed in quadrature",
    ]
    if sweep.fit is not None:
        header.append(
            f"scaling exponent={sweep.fit.exponent:.6f} "
            f"ci95=[{sweep.fit.ci_low:.6f},{sweep.fit.ci_high:.6f}]")
    names = [sweep.variable, "plateau_J"]
    cols = [np.asarray(sweep.values), np.asarray(sweep.plateaus)]
    if sweep.squeezed_plateaus:
        names.append("plateau_squeezed_J")
        cols.append(np.asarray(sweep.squeezed_plateaus))
    _csv(path, header, names, cols)
