"""Shipped experiment presets.

Full-scale presets carry the published figure parameters; they validate and
dry-run anywhere but need cluster-scale compute.  Each has a desk variant
(reduced atom number, stronger interactions, smaller grids, fewer
trajectories) tuned so the same physics lands within a single-machine
budget: phase diffusion still overtakes Fourier narrowing well inside the
simulated window.
"""

from __future__ import annotations

import copy

# trap length at 250 rad/s for the shipped mass, used to phrase desk kicks
_A0_250 = 1.709758e-6      # m
_A0_1500 = 6.980227e-7     # m

_COMMON_1D = {
    "mass_kg": 1.443e-25,
    "trap_frequency_rad_per_s": 250.0,
    "transverse_area_m2": 1.2e-11,
}

PRESETS: dict[str, dict] = {}
DESK: dict[str, dict] = {}


def _preset(name, full, desk):
    PRESETS[name] = full
    DESK[name] = desk


_preset(
    "fig2",
    full={
        "physical": dict(_COMMON_1D, scattering_length_m=1e-9,
                         atom_number=5e6, kick_wavenumber_per_m=2e7),
        "grid": {"dimension": 1},
        "evolution": {"mode": "semiclassical", "total_time_s": 0.010,
                      "snapshot_count": 2},
        "analysis": {"times_s": [0.005, 0.010]},
        "ensemble": {"trajectories": 1, "master_seed": 20260809},
    },
    desk={
        "physical": dict(_COMMON_1D, scattering_length_m=1.0945e-8,
                         atom_number=500.0,
                         kick_wavenumber_per_m=1.2 / _A0_250,
                         rabi_frequency_rad_per_s=2.0,
                         detuning_rad_per_s=180.0),
        "grid": {"dimension": 1, "points": 1024,
                 "extent_m": 1024 * 0.575 * _A0_250,
                 "origin_fraction": 0.15},
        "evolution": {"mode": "semiclassical", "time_step_s": 2.8e-5,
                      "total_time_s": 0.127008, "snapshot_count": 8,
                      "momentum_pad": 2},
        "analysis": {"time_count": 6},
        "ensemble": {"trajectories": 1, "master_seed": 20260809},
    })

_preset(
    "fig3",
    full={
        "physical": dict(_COMMON_1D, scattering_length_m=3e-9,
                         atom_number=1e7, kick_wavenumber_per_m=1e7),
        "grid": {"dimension": 1},
        "evolution": {"mode": "wigner", "total_time_s": 0.35,
                      "snapshot_count": 14},
        "ensemble": {"trajectories": 1024, "master_seed": 20260809},
    },
    desk={
        "physical": dict(_COMMON_1D, scattering_length_m=1.0945e-8,
                         atom_number=2000.0,
                         kick_wavenumber_per_m=1.2 / _A0_250,
                         rabi_frequency_rad_per_s=3.3,
                         detuning_rad_per_s=180.0),
        "grid": {"dimension": 1, "points": 1024,
                 "extent_m": 1024 * 0.386 * _A0_250,
                 "origin_fraction": 0.15},
        "evolution": {"mode": "wigner", "time_step_s": 2.8e-5,
                      "total_time_s": 0.288, "snapshot_count": 16,
                      "momentum_pad": 2},
        "analysis": {"time_count": 8},
        "ensemble": {"trajectories": 64, "master_seed": 20260809},
    })

_preset(
    "fig4",
    full={
        "physical": dict(_COMMON_1D, scattering_length_m=1e-9,
                         atom_number=1e7, kick_wavenumber_per_m=1e7),
        "grid": {"dimension": 1},
        "evolution": {"mode": "wigner", "plateau_margin": 3.0},
        "ensemble": {"trajectories": 1024, "master_seed": 20260809},
    },
    desk={
        "physical": dict(_COMMON_1D, scattering_length_m=1.0945e-8,
                         atom_number=500.0,
                         kick_wavenumber_per_m=1.2 / _A0_250,
                         rabi_frequency_rad_per_s=2.0,
                         detuning_rad_per_s=180.0),
        "grid": {"dimension": 1, "points": 1024,
                 "extent_m": 1024 * 0.575 * _A0_250,
                 "origin_fraction": 0.15},
        "evolution": {"mode": "wigner", "time_step_s": 2.8e-5,
                      "total_time_s": 0.508032, "snapshot_count": 16,
                      "momentum_pad": 2},
        "analysis": {"time_count": 10},
        "ensemble": {"trajectories": 128, "master_seed": 20260809},
    })

_preset(
    "fig5",
    full={
        "physical": dict(_COMMON_1D, scattering_length_m=3e-9,
                         atom_number=1e7, kick_wavenumber_per_m=1e7),
        "grid": {"dimension": 1},
        "evolution": {"mode": "wigner", "plateau_margin": 3.0},
        "ensemble": {"trajectories": 1024, "master_seed": 20260809},
    },
    desk={
        "physical": dict(_COMMON_1D, scattering_length_m=2.189e-8,
                         atom_number=500.0,
                         kick_wavenumber_per_m=1.2 / _A0_250,
                         rabi_frequency_rad_per_s=1.6,
                         detuning_rad_per_s=180.0),
        "grid": {"dimension": 1, "points": 2048,
                 "extent_m": 2048 * 0.44 * _A0_250,
                 "origin_fraction": 0.15},
        "evolution": {"mode": "wigner", "time_step_s": 1.6e-5,
                      "total_time_s": 0.32, "snapshot_count": 16,
                      "momentum_pad": 2},
        "analysis": {"time_count": 10},
        "ensemble": {"trajectories": 128, "master_seed": 20260809},
    })

_preset(
    "fig6",
    full={
        "physical": {"mass_kg": 1.443e-25,
                     "trap_frequency_rad_per_s": 1500.0,
                     "scattering_length_m": 1e-8, "atom_number": 5e6,
                     "kick_wavenumber_per_m": 4e6,
                     "kick_direction": [0.0, 1.0],
                     "transverse_length_m": 3.46e-6},
        "grid": {"dimension": 2},
        "evolution": {"mode": "wigner", "total_time_s": 0.0133,
                      "snapshot_count": 10},
        "ensemble": {"trajectories": 256, "master_seed": 20260809},
    },
    desk={
        "physical": {"mass_kg": 1.443e-25,
                     "trap_frequency_rad_per_s": 1500.0,
                     "scattering_length_m": 1e-8, "atom_number": 3000.0,
                     "kick_wavenumber_per_m": 4e6,
                     "kick_direction": [0.0, 1.0],
                     "transverse_length_m": 3.46e-6,
                     "rabi_frequency_rad_per_s": 68.0,
                     "detuning_rad_per_s": 5846.9},
        "grid": {"dimension": 2, "points": [256, 256],
                 "extent_m": [256 * 0.355 * _A0_1500, 256 * 0.355 * _A0_1500],
                 "origin_fraction": [0.5, 0.18]},
        "evolution": {"mode": "wigner", "time_step_s": 2e-6,
                      "total_time_s": 0.0066667, "snapshot_count": 5,
                      "momentum_pad": 2},
        "analysis": {"time_count": 4},
        "ensemble": {"trajectories": 32, "master_seed": 20260809},
    })

_preset(
    "fig8",
    full={
        "physical": {"mass_kg": 1.443e-25,
                     "trap_frequency_rad_per_s": 2000.0,
                     "scattering_length_m": 1e-8, "atom_number": 5e6,
                     "kick_wavenumber_per_m": 2e7,
                     "kick_direction": [0.0, 1.0],
                     "transverse_length_m": 3.46e-6},
        "grid": {"dimension": 2},
        "evolution": {"mode": "wigner", "total_time_s": 0.030,
                      "snapshot_count": 12},
        "ensemble": {"trajectories": 256, "master_seed": 20260809},
    },
    desk={
        "physical": {"mass_kg": 1.443e-25,
                     "trap_frequency_rad_per_s": 1500.0,
                     "scattering_length_m": 1e-8, "atom_number": 3000.0,
                     "kick_wavenumber_per_m": 4e6,
                     "kick_direction": [0.0, 1.0],
                     "transverse_length_m": 3.46e-6,
                     "rabi_frequency_rad_per_s": 40.0,
                     "detuning_rad_per_s": 5846.9},
        "grid": {"dimension": 2, "points": [256, 256],
                 "extent_m": [256 * 0.355 * _A0_1500, 256 * 0.355 * _A0_1500],
                 "origin_fraction": [0.5, 0.18]},
        "evolution": {"mode": "wigner", "time_step_s": 2e-6,
                      "total_time_s": 0.02, "snapshot_count": 10,
                      "momentum_pad": 2},
        "analysis": {"time_count": 6},
        "ensemble": {"trajectories": 32, "master_seed": 20260809},
    })

_preset(
    "fig9-sweep",
    full={
        "physical": dict(_COMMON_1D, scattering_length_m=1e-9,
                         atom_number=1e7, kick_wavenumber_per_m=1e7),
        "grid": {"dimension": 1},
        "evolution": {"mode": "wigner", "plateau_margin": 3.0},
        "ensemble": {"trajectories": 1024, "master_seed": 20260809},
        "sweep": {"variable": "atom_number",
                  "values": [1e6, 3.16e6, 1e7, 3.16e7, 1e8],
                  "squeeze_pair": True},
    },
    desk={
        "physical": dict(_COMMON_1D, scattering_length_m=1.0945e-8,
                         atom_number=1778.0,
                         kick_wavenumber_per_m=1.2 / _A0_250),
        "grid": {"dimension": 1},
        "evolution": {"mode": "wigner", "plateau_margin": 3.0,
                      "time_step_rule": "beam", "snapshot_count": 16,
                      "momentum_pad": 2},
        "analysis": {"time_count": 10},
        "ensemble": {"trajectories": 64, "master_seed": 20260809},
        "sweep": {"variable": "atom_number",
                  "values": [178.0, 562.0, 1778.0, 5623.0],
                  "squeeze_pair": False},
    })


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str, desk: bool = False) -> dict:
    table = DESK if desk else PRESETS
    if name not in table:
        raise KeyError(f"unknown preset {name!r}; "
                       f"available: {', '.join(preset_names())}")
    return copy.deepcopy(table[name])
