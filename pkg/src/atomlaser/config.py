"""Experiment configuration: TOML schema, validation, auto-resolution.

Configs are UTF-8 TOML with nested sections; every physical quantity is SI
with the unit in the key name.  Omitted keys marked "auto" below are
resolved deterministically from the physics before any compute:

  time step      0.05 hbar / max(mu, hbar^2 k_max^2 / 2m, hbar |Omega|),
                 with k_max the grid Nyquist ("nyquist" rule) or a beam
                 bandwidth cap ("beam" rule for tuned desk configs)
  total time     plateau_margin * kappa hbar / (2 dE), kappa = 6.5 the
                 measured Fourier-narrowing coefficient lw * t / hbar
  rabi           golden-rule rate targeting a total outcoupled fraction
                 min(0.2, 0.25/sqrt(N)), which keeps the mean-field chirp
                 below a quarter of the phase-diffusion width
  detuning       two-photon resonance at the trap centre,
                 hbar k0^2/2m + mu (U12/U11 - 1) / hbar
  grid           domain 1.2 * beam travel + condensate allowance; spacing
                 pi / (2 k_peak); points the next power of two

The resolved config (all autos materialized) serializes canonically; its
sha256 is embedded in every output artifact and checked on resume.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:       # Python 3.10
    import tomli as tomllib

from .dynamics import EvolutionSpec
from .ensemble import EnsembleSpec, default_trajectories
from .params import DEFAULT_MASS, HBAR, Grid, ParameterError, PhysicalParams
from .theory import chemical_potential, phase_diffusion_limit, \
    predicted_peak_momentum

#: measured coefficient of Fourier-limited narrowing, lw_E * t / hbar
FOURIER_NARROWING_COEFF = 6.5

#: golden-rule constant in rate = C * |Omega|^2 * x_TF * m / (hbar k_peak)
OUTCOUPLING_RATE_CONST = 2.5


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def _get(d, section, key, default=None, required=False):
    try:
        return d[section][key]
    except KeyError:
        if required:
            raise ConfigError(f"missing [{section}] {key}")
        return default


@dataclass(frozen=True)
class ResolvedExperiment:
    """A fully materialized experiment: no 'auto' left anywhere."""

    params: PhysicalParams
    grid: Grid
    evolution: EvolutionSpec
    trajectories: int
    master_seed: int
    analysis_times: tuple[float, ...]
    compare_semiclassical: bool
    plateau_window_fraction: float
    fit_span: float
    checkpoint_every: int
    max_excluded_fraction: float
    output_directory: str
    plots: bool
    sweep_variable: str | None
    sweep_values: tuple[float, ...]
    sweep_squeeze_pair: bool
    config_dict: dict

    @property
    def config_hash(self) -> str:
        return config_hash(self.config_dict)

    def ensemble_spec(self, workers: int = 1,
                      checkpoint_path: str | None = None) -> EnsembleSpec:
        return EnsembleSpec(
            trajectories=self.trajectories, master_seed=self.master_seed,
            evolution=self.evolution, analysis_times=self.analysis_times,
            workers=workers, checkpoint_path=checkpoint_path,
            checkpoint_every=self.checkpoint_every,
            max_excluded_fraction=self.max_excluded_fraction)

    def semiclassical_twin(self) -> "ResolvedExperiment":
        """Same experiment as a single noiseless mean-field trajectory."""
        cfg = json.loads(json.dumps(self.config_dict))
        cfg["evolution"]["mode"] = "semiclassical"
        cfg["ensemble"]["trajectories"] = 1
        return resolve(cfg)

    def with_overrides(self, **section_updates) -> "ResolvedExperiment":
        cfg = json.loads(json.dumps(self.config_dict))
        for section, updates in section_updates.items():
            cfg.setdefault(section, {}).update(updates)
        return resolve(cfg)


def load_toml(path: str) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def resolve_file(path: str) -> ResolvedExperiment:
    return resolve(load_toml(path))


def resolve(cfg: dict) -> ResolvedExperiment:
    """Validate a raw config dict and materialize every auto value."""
    known = {"physical", "grid", "evolution", "ensemble", "analysis",
             "output", "sweep"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    params = _resolve_physical_base(cfg)
    dimension = int(_get(cfg, "grid", "dimension", 1))
    if dimension not in (1, 2):
        raise ConfigError("grid dimension must be 1 or 2")

    try:
        mu = chemical_potential(params, dimension)
        de = phase_diffusion_limit(params, dimension)
    except ParameterError as err:
        raise ConfigError(str(err)) from None
    k_pk = predicted_peak_momentum(params, mu)
    units = params.units
    x_tf = math.sqrt(2.0 * mu / (params.mass * params.trap_frequency**2)) \
        if mu > 0 else units.length

    # -- total time -------------------------------------------------------
    margin = float(_get(cfg, "evolution", "plateau_margin", 3.0))
    total_time = _get(cfg, "evolution", "total_time_s")
    if total_time is None:
        if de <= 0:
            raise ConfigError("total_time_s is required when the "
                              "phase-diffusion scale vanishes")
        total_time = margin * FOURIER_NARROWING_COEFF * HBAR / (2.0 * de)
    total_time = float(total_time)
    if total_time < 0:
        raise ConfigError("total time must be non-negative")

    # -- detuning and coupling --------------------------------------------
    detuning = _get(cfg, "physical", "detuning_rad_per_s")
    if detuning is None:
        u_ratio = ((params.scattering_length_12 / params.scattering_length_11)
                   if params.scattering_length_11 > 0 else 1.0)
        detuning = (HBAR * params.kick_wavenumber**2 / (2.0 * params.mass)
                    + mu * (u_ratio - 1.0) / HBAR)
    rabi = _get(cfg, "physical", "rabi_frequency_rad_per_s")
    if rabi is None:
        if total_time <= 0:
            rabi = 0.0
        else:
            frac = min(0.2, 0.25 / math.sqrt(params.atom_number))
            t_ho = total_time * params.trap_frequency
            k_ho = k_pk * units.length
            x_ho = max(x_tf / units.length, 0.5)
            rabi = params.trap_frequency * math.sqrt(
                frac * k_ho / (OUTCOUPLING_RATE_CONST * x_ho * t_ho))
    phase = float(_get(cfg, "physical", "rabi_phase_rad", 0.0))
    rabi_c = complex(float(rabi)) * complex(math.cos(phase), math.sin(phase))

    params = _rebuild_params(params, rabi_c, float(detuning))

    # -- grid ---------------------------------------------------------------
    grid = _resolve_grid(cfg, params, dimension, k_pk, x_tf, total_time)

    # -- time step ----------------------------------------------------------
    dt = _get(cfg, "evolution", "time_step_s")
    if dt is None:
        rule = _get(cfg, "evolution", "time_step_rule", "nyquist")
        if rule == "nyquist":
            k_cap = max(float(np.max(np.abs(ka))) for ka in grid.k_axes)
        elif rule == "beam":
            k_cap = 1.35 * k_pk
        else:
            raise ConfigError(f"unknown time_step_rule {rule!r}")
        rates = [mu, HBAR**2 * k_cap**2 / (2.0 * params.mass),
                 abs(rabi_c) * HBAR]
        dt = 0.05 * HBAR / max(rates)
    dt = float(dt)

    interval = _get(cfg, "evolution", "snapshot_interval_s")
    if total_time > 0:
        if interval is None:
            snapshot_count = int(_get(cfg, "evolution", "snapshot_count", 16))
            if snapshot_count < 1:
                raise ConfigError("snapshot_count must be >= 1")
            interval = total_time / snapshot_count
        # commensurate schedule: the interval is an exact step multiple and
        # the total time an exact interval multiple
        n_int = max(1, round(total_time / interval))
        interval = total_time / n_int
        steps_per_snap = max(1, round(interval / dt))
        dt = interval / steps_per_snap
        snapshot_interval = steps_per_snap * dt
    else:
        snapshot_interval = dt

    try:
        evolution = EvolutionSpec(
            mode=str(_get(cfg, "evolution", "mode", "wigner")),
            time_step=dt, total_time=total_time,
            snapshot_interval=snapshot_interval,
            absorber_width=float(_get(cfg, "evolution", "absorber_width_m",
                                      0.0)),
            absorber_strength=float(_get(cfg, "evolution",
                                         "absorber_strength_rad_per_s", 0.0)),
            momentum_pad=int(_get(cfg, "evolution", "momentum_pad", 1)))
    except ParameterError as err:
        raise ConfigError(str(err)) from None

    # -- analysis times -------------------------------------------------------
    times = _get(cfg, "analysis", "times_s")
    if times is None and total_time > 0:
        count = int(_get(cfg, "analysis", "time_count", 10))
        lo = total_time / 8.0
        targets = np.geomspace(lo, total_time, count)
        snapped = sorted({round(t / snapshot_interval) for t in targets} - {0})
        times = [j * snapshot_interval for j in snapped]
    elif times is None:
        times = [0.0]

    trajectories = _get(cfg, "ensemble", "trajectories")
    mode = evolution.mode
    if trajectories is None:
        trajectories = 1 if mode == "semiclassical" \
            else default_trajectories(dimension)

    sweep_var = _get(cfg, "sweep", "variable")
    if sweep_var not in (None, "atom_number", "squeeze_r"):
        raise ConfigError(f"unsupported sweep variable {sweep_var!r}")
    sweep_vals = tuple(float(v) for v in _get(cfg, "sweep", "values", ()))

    resolved = ResolvedExperiment(
        params=params, grid=grid, evolution=evolution,
        trajectories=int(trajectories),
        master_seed=int(_get(cfg, "ensemble", "master_seed", 20260809)),
        analysis_times=tuple(float(t) for t in times),
        compare_semiclassical=bool(_get(cfg, "analysis",
                                        "compare_semiclassical", True)),
        plateau_window_fraction=float(_get(cfg, "analysis",
                                           "plateau_window_fraction", 0.25)),
        fit_span=float(_get(cfg, "analysis", "fit_span", 5.0)),
        checkpoint_every=int(_get(cfg, "ensemble", "checkpoint_every", 0)),
        max_excluded_fraction=float(_get(cfg, "ensemble",
                                         "max_excluded_fraction", 0.01)),
        output_directory=str(_get(cfg, "output", "directory", "atomlaser-out")),
        plots=bool(_get(cfg, "output", "plots", True)),
        sweep_variable=sweep_var,
        sweep_values=sweep_vals,
        sweep_squeeze_pair=bool(_get(cfg, "sweep", "squeeze_pair", False)),
        config_dict={},
    )
    object.__setattr__(resolved, "config_dict", _canonical_dict(resolved))
    _validate_resolved(resolved)
    return resolved


def _resolve_physical_base(cfg: dict) -> PhysicalParams:
    phys = cfg.get("physical", {})
    a_all = phys.get("scattering_length_m")
    a11 = phys.get("scattering_length_11_m", a_all)
    a22 = phys.get("scattering_length_22_m", a_all)
    a12 = phys.get("scattering_length_12_m", a_all)
    if a11 is None or a22 is None or a12 is None:
        raise ConfigError("missing [physical] scattering_length_m "
                          "(or the per-pair overrides)")
    direction = phys.get("kick_direction", [0.0, 1.0])
    try:
        return PhysicalParams(
            mass=float(phys.get("mass_kg", DEFAULT_MASS)),
            trap_frequency=float(_get(cfg, "physical",
                                      "trap_frequency_rad_per_s",
                                      required=True)),
            scattering_length_11=float(a11),
            scattering_length_22=float(a22),
            scattering_length_12=float(a12),
            atom_number=float(_get(cfg, "physical", "atom_number",
                                   required=True)),
            kick_wavenumber=float(phys.get("kick_wavenumber_per_m", 0.0)),
            kick_direction=tuple(float(c) for c in direction),
            transverse_area=phys.get("transverse_area_m2"),
            transverse_length=phys.get("transverse_length_m"),
            squeeze_r=float(phys.get("squeeze_r", 0.0)),
            squeeze_theta=float(phys.get("squeeze_theta_rad", 0.0)))
    except ParameterError as err:
        raise ConfigError(str(err)) from None


def _rebuild_params(base: PhysicalParams, rabi: complex,
                    detuning: float) -> PhysicalParams:
    return PhysicalParams(
        mass=base.mass, trap_frequency=base.trap_frequency,
        scattering_length_11=base.scattering_length_11,
        scattering_length_22=base.scattering_length_22,
        scattering_length_12=base.scattering_length_12,
        atom_number=base.atom_number, rabi_frequency=rabi,
        detuning=detuning, kick_wavenumber=base.kick_wavenumber,
        kick_direction=base.kick_direction,
        transverse_area=base.transverse_area,
        transverse_length=base.transverse_length,
        squeeze_r=base.squeeze_r, squeeze_theta=base.squeeze_theta)


def _resolve_grid(cfg, params, dimension, k_pk, x_tf, total_time) -> Grid:
    gsec = cfg.get("grid", {})
    units = params.units
    extent = gsec.get("extent_m")
    points = gsec.get("points")
    origin = gsec.get("origin_fraction")

    beam_travel = HBAR * k_pk / params.mass * total_time
    allowance = 8.0 * x_tf + 6.0 * units.length
    if extent is None:
        along = 1.2 * beam_travel + allowance
        if dimension == 1:
            extent = along
        else:
            # the arc only reaches ~half the beam wavenumber transversally
            across = 2.0 * allowance + 0.35 * beam_travel
            extent = [across, along]   # kick axis is the second (z)
    if origin is None:
        if dimension == 1:
            frac = allowance / (2.0 * (extent if np.isscalar(extent)
                                       else extent[0]))
            origin = min(0.5, max(0.08, frac))
        else:
            along = extent[1] if not np.isscalar(extent) else extent
            frac = min(0.5, max(0.08, allowance / (2.0 * along)))
            origin = [0.5, frac]
    if points is None:
        k_ref = max(k_pk, 2.0 / units.length)
        direction = (1.0,) if dimension == 1 else params.kick_direction
        exts = [extent] * dimension if np.isscalar(extent) else list(extent)
        points = []
        for ext, comp in zip(exts, direction):
            k_cap = 2.0 * k_ref if abs(comp) >= 0.5 else 1.2 * k_ref
            dx_target = math.pi / k_cap
            points.append(int(2**math.ceil(math.log2(max(ext / dx_target, 64)))))
        if dimension == 1:
            points = points[0]
    try:
        return Grid(dimension=dimension, points=points, extents=extent,
                    origin_fraction=origin)
    except ParameterError as err:
        raise ConfigError(str(err)) from None


def _validate_resolved(r: ResolvedExperiment):
    if r.evolution.total_time > 0 and not r.analysis_times:
        raise ConfigError("no analysis times resolved")
    for t in r.analysis_times:
        steps = t / r.evolution.snapshot_interval
        if abs(steps - round(steps)) > 1e-6:
            raise ConfigError(f"analysis time {t} not on snapshot schedule")
    if r.evolution.mode == "semiclassical" and r.trajectories != 1:
        raise ConfigError("semiclassical mode uses exactly one trajectory")
    if r.sweep_variable and len(r.sweep_values) < 2:
        raise ConfigError("sweep needs at least two values")
    n_tot = int(np.prod(r.grid.points))
    if n_tot > 2**30:
        raise ConfigError(f"grid of {n_tot} points exceeds the supported size")


# -- canonical serialization ----------------------------------------------


def _canonical_dict(r: ResolvedExperiment) -> dict:
    p, g, e = r.params, r.grid, r.evolution
    out = {
        "physical": {
            "mass_kg": p.mass,
            "trap_frequency_rad_per_s": p.trap_frequency,
            "scattering_length_11_m": p.scattering_length_11,
            "scattering_length_22_m": p.scattering_length_22,
            "scattering_length_12_m": p.scattering_length_12,
            "atom_number": p.atom_number,
            "rabi_frequency_rad_per_s": abs(p.rabi_frequency),
            "rabi_phase_rad": math.atan2(p.rabi_frequency.imag,
                                         p.rabi_frequency.real),
            "detuning_rad_per_s": p.detuning,
            "kick_wavenumber_per_m": p.kick_wavenumber,
            "squeeze_r": p.squeeze_r,
            "squeeze_theta_rad": p.squeeze_theta,
        },
        "grid": {
            "dimension": g.dimension,
            "points": list(g.points),
            "extent_m": list(g.extents),
            "origin_fraction": list(g.origin_fraction),
        },
        "evolution": {
            "mode": e.mode,
            "time_step_s": e.time_step,
            "total_time_s": e.total_time,
            "snapshot_interval_s": e.snapshot_interval,
            "momentum_pad": e.momentum_pad,
            "absorber_width_m": e.absorber_width,
            "absorber_strength_rad_per_s": e.absorber_strength,
        },
        "ensemble": {
            "trajectories": r.trajectories,
            "master_seed": r.master_seed,
            "checkpoint_every": r.checkpoint_every,
            "max_excluded_fraction": r.max_excluded_fraction,
        },
        "analysis": {
            "times_s": list(r.analysis_times),
            "compare_semiclassical": r.compare_semiclassical,
            "plateau_window_fraction": r.plateau_window_fraction,
            "fit_span": r.fit_span,
        },
        "output": {
            "directory": r.output_directory,
            "plots": r.plots,
        },
    }
    if g.dimension == 2:
        out["physical"]["kick_direction"] = list(p.kick_direction)
    if p.transverse_area is not None:
        out["physical"]["transverse_area_m2"] = p.transverse_area
    if p.transverse_length is not None:
        out["physical"]["transverse_length_m"] = p.transverse_length
    if r.sweep_variable:
        out["sweep"] = {"variable": r.sweep_variable,
                        "values": list(r.sweep_values),
                        "squeeze_pair": r.sweep_squeeze_pair}
    return out


def config_hash(config_dict: dict) -> str:
    """sha256 of the canonical config, excluding the [output] section.

    The hash identifies the computation; where artifacts land does not
    change it (so moving an output directory never breaks a resume).
    """
    stripped = {k: v for k, v in config_dict.items() if k != "output"}
    blob = json.dumps(stripped, sort_keys=True,
                      separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)} to TOML")


def to_toml(config_dict: dict) -> str:
    lines = []
    for section in sorted(config_dict):
        lines.append(f"[{section}]")
        for key in sorted(config_dict[section]):
            lines.append(f"{key} = {_toml_value(config_dict[section][key])}")
        lines.append("")
    return "\n".join(lines)
