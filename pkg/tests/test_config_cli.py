"""Config resolution, serialization, presets and the CLI surface."""

import json
import math
import os

import numpy as np
import pytest
import tomli
from hypothesis import given, strategies as st

from atomlaser.cli import main
from atomlaser.config import (ConfigError, config_hash, resolve, to_toml)
from atomlaser.presets import DESK, PRESETS, get_preset, preset_names

TINY = {
    "physical": {
        "mass_kg": 1.443e-25,
        "trap_frequency_rad_per_s": 250.0,
        "scattering_length_m": 1.0945e-8,
        "atom_number": 300.0,
        "kick_wavenumber_per_m": 7.0185e5,
        "rabi_frequency_rad_per_s": 3.0,
        "detuning_rad_per_s": 180.0,
        "transverse_area_m2": 1.2e-11,
    },
    "grid": {"dimension": 1, "points": 256, "extent_m": 2.6e-4,
             "origin_fraction": 0.25},
    "evolution": {"mode": "wigner", "time_step_s": 4e-5,
                  "total_time_s": 0.04, "snapshot_count": 5,
                  "momentum_pad": 2},
    "analysis": {"time_count": 4},
    "ensemble": {"trajectories": 6, "master_seed": 11,
                 "checkpoint_every": 2},
    "output": {"plots": True},
}


def tiny(**overrides):
    cfg = json.loads(json.dumps(TINY))
    for sec, upd in overrides.items():
        cfg.setdefault(sec, {}).update(upd)
    return cfg


class TestResolve:
    def test_autos_fill_in(self):
        cfg = tiny()
        for key in ("rabi_frequency_rad_per_s", "detuning_rad_per_s"):
            del cfg["physical"][key]
        del cfg["grid"]["points"], cfg["grid"]["extent_m"]
        del cfg["evolution"]["time_step_s"], cfg["evolution"]["total_time_s"]
        r = resolve(cfg)
        assert abs(r.params.rabi_frequency) > 0
        assert r.params.detuning > 0
        assert r.evolution.total_time > 0
        assert r.grid.points[0] >= 64

    def test_detuning_auto_is_kick_resonance(self):
        cfg = tiny()
        del cfg["physical"]["detuning_rad_per_s"]
        r = resolve(cfg)
        from atomlaser.params import HBAR
        k0 = r.params.kick_wavenumber
        expect = HBAR * k0**2 / (2 * r.params.mass)
        assert r.params.detuning == pytest.approx(expect, rel=1e-12)

    def test_resolution_idempotent(self):
        r = resolve(tiny())
        r2 = resolve(r.config_dict)
        assert r2.config_dict == r.config_dict
        assert r2.config_hash == r.config_hash

    def test_toml_roundtrip_lossless(self):
        r = resolve(tiny())
        back = tomli.loads(to_toml(r.config_dict))
        assert config_hash(back) == r.config_hash
        assert resolve(back).config_dict == r.config_dict

    def test_validation_errors(self):
        with pytest.raises(ConfigError):
            resolve(tiny(physical={"atom_number": -5}))
        with pytest.raises(ConfigError):
            resolve(tiny(grid={"dimension": 3}))
        with pytest.raises(ConfigError):
            resolve({"physical": {}})
        with pytest.raises(ConfigError):
            resolve(tiny(bogus_section={"a": 1}))
        with pytest.raises(ConfigError):
            resolve(tiny(evolution={"mode": "quantum-jump"}))

    def test_analysis_times_on_schedule(self):
        r = resolve(tiny())
        snap = r.evolution.snapshot_interval
        for t in r.analysis_times:
            assert abs(t / snap - round(t / snap)) < 1e-9

    @given(st.floats(100, 1e6), st.floats(1e-9, 3e-8))
    def test_hash_sensitivity(self, n, a):
        base = resolve(tiny()).config_hash
        r = resolve(tiny(physical={"atom_number": n,
                                   "scattering_length_m": a}))
        if (n, a) != (300.0, 1.0945e-8):
            assert r.config_hash != base

    def test_semiclassical_twin(self):
        r = resolve(tiny())
        twin = r.semiclassical_twin()
        assert twin.evolution.mode == "semiclassical"
        assert twin.trajectories == 1
        assert twin.analysis_times == r.analysis_times
        assert twin.params == r.params


class TestPresets:
    @pytest.mark.parametrize("name", preset_names())
    def test_all_presets_resolve_both_variants(self, name):
        for desk in (False, True):
            r = resolve(get_preset(name, desk=desk))
            assert resolve(r.config_dict).config_dict == r.config_dict

    def test_desk_variants_are_smaller(self):
        for name in preset_names():
            full = resolve(get_preset(name))
            desk = resolve(get_preset(name, desk=True))
            assert np.prod(desk.grid.points) <= np.prod(full.grid.points)
            assert desk.trajectories <= full.trajectories

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            get_preset("fig99")


class TestCLI:
    def write_cfg(self, tmp_path, cfg=None):
        path = tmp_path / "exp.toml"
        r = resolve(cfg or tiny())
        path.write_text(to_toml(r.config_dict))
        return str(path)

    def test_dry_run_prints_derived(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path)
        assert main(["run", "--config", path, "--dry-run"]) == 0
        out = capsys.readouterr().out
        for token in ("mu_1d", "predicted beam peak", "time step",
                      "config hash"):
            assert token in out

    def test_theory_subcommand_preset(self, capsys):
        assert main(["theory", "--config", "fig4", "--desk"]) == 0
        out = capsys.readouterr().out
        assert "phase-diffusion" in out and "2 dE" in out

    def test_validation_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("[physical]\natom_number = -1\n")
        assert main(["run", "--config", str(bad)]) == 2
        assert main(["run", "--config", "nonexistent-preset"]) == 2

    def test_run_produces_artifacts(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", path, "--out", str(out)]) == 0
        for name in ("config.toml", "metadata.json", "spectra.csv",
                     "linewidth.csv", "linewidth_semiclassical.csv",
                     "spectrum_fit.svg", "linewidth_loglog.svg",
                     "checkpoint.alck"):
            assert (out / name).exists(), name
        meta = json.loads((out / "metadata.json").read_text())
        r = resolve(tiny())
        assert meta["config_hash"] == r.config_hash
        # units in every table header
        head = (out / "spectra.csv").read_text().splitlines()[:6]
        assert any("1/m" in ln for ln in head)
        lw = (out / "linewidth.csv").read_text()
        assert "linewidth_J" in lw and "config_hash" in lw

    def test_determinism_byte_identical_tables(self, tmp_path):
        path = self.write_cfg(tmp_path)
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert main(["run", "--config", path, "--out", str(out),
                         "--no-plot"]) == 0
            outs.append((out / "spectra.csv").read_bytes()
                        + (out / "linewidth.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_worker_flag_and_env(self, tmp_path, monkeypatch):
        path = self.write_cfg(tmp_path)
        out1 = tmp_path / "w1"
        out2 = tmp_path / "w2"
        assert main(["run", "--config", path, "--out", str(out1),
                     "--no-plot"]) == 0
        monkeypatch.setenv("ATOMLASER_WORKERS", "2")
        assert main(["run", "--config", path, "--out", str(out2),
                     "--no-plot"]) == 0
        assert (out1 / "spectra.csv").read_bytes() == \
            (out2 / "spectra.csv").read_bytes()

    def test_seed_override_changes_hash(self, tmp_path):
        path = self.write_cfg(tmp_path)
        out = tmp_path / "s"
        assert main(["run", "--config", path, "--out", str(out),
                     "--seed", "999", "--no-plot", "--dry-run"]) == 0
        # dry run only validates; now check the resolve-level effect
        cfg = tiny(ensemble={"master_seed": 999})
        assert resolve(cfg).config_hash != resolve(tiny()).config_hash

    def test_resume_subcommand(self, tmp_path):
        path = self.write_cfg(tmp_path)
        out = tmp_path / "r"
        assert main(["run", "--config", path, "--out", str(out),
                     "--no-plot"]) == 0
        ref = (out / "spectra.csv").read_bytes()
        # resume over the finished checkpoint reproduces the same tables
        assert main(["resume", "--config", path, "--out", str(out),
                     "--no-plot"]) == 0
        assert (out / "spectra.csv").read_bytes() == ref

    def test_resume_missing_checkpoint(self, tmp_path):
        path = self.write_cfg(tmp_path)
        assert main(["resume", "--config", path, "--out",
                     str(tmp_path / "none")]) == 2

    def test_sweep_smoke(self, tmp_path, capsys):
        cfg = tiny(sweep={"variable": "squeeze_r",
                          "values": [0.0, math.log(2.0)]},
                   ensemble={"trajectories": 4, "master_seed": 5,
                             "checkpoint_every": 0})
        r = resolve(cfg)   # validates
        path = tmp_path / "sweep.toml"
        # write raw (sweep section preserved)
        import atomlaser.config as cfg_mod
        path.write_text(cfg_mod.to_toml(cfg))
        out = tmp_path / "sw"
        assert main(["sweep", "--config", str(path), "--out", str(out),
                     "--no-plot"]) == 0
        body = (out / "sweep.csv").read_text()
        assert "plateau_J" in body
        assert (out / "squeeze_r_0").exists()

    def test_sweep_requires_section(self, tmp_path):
        path = self.write_cfg(tmp_path)
        assert main(["sweep", "--config", path]) == 2


class TestExitCodes:
    def test_numerical_failure_exit_3(self, tmp_path, monkeypatch):
        import atomlaser.runner as runner_mod
        from atomlaser.dynamics import GroundStateError

        def boom(*a, **kw):
            raise GroundStateError("no convergence", residual=1.0)

        monkeypatch.setattr(runner_mod, "ground_state", boom)
        r = resolve(tiny())
        path = tmp_path / "c.toml"
        path.write_text(to_toml(r.config_dict))
        assert main(["run", "--config", str(path),
                     "--out", str(tmp_path / "o")]) == 3

    def test_fit_failure_exit_4_with_data_written(self, tmp_path):
        # no outcoupling: the beam stays vacuum, every envelope fit fails,
        # but tables are still written
        cfg = tiny(physical={"rabi_frequency_rad_per_s": 0.0})
        r = resolve(cfg)
        path = tmp_path / "c.toml"
        path.write_text(to_toml(r.config_dict))
        out = tmp_path / "o"
        assert main(["run", "--config", str(path), "--out", str(out),
                     "--no-plot"]) == 4
        assert (out / "linewidth.csv").exists()
        assert (out / "spectra.csv").exists()

    def test_resume_hash_mismatch_exit_2(self, tmp_path):
        r = resolve(tiny())
        path = tmp_path / "c.toml"
        path.write_text(to_toml(r.config_dict))
        out = tmp_path / "o"
        assert main(["run", "--config", str(path), "--out", str(out),
                     "--no-plot"]) == 0
        # different physics, same checkpoint: refused on resume
        changed = resolve(tiny(physical={"atom_number": 301.0}))
        path2 = tmp_path / "c2.toml"
        path2.write_text(to_toml(changed.config_dict))
        assert main(["resume", "--config", str(path2), "--out", str(out),
                     "--no-plot"]) == 2

    def test_workers_flag_beats_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("ATOMLASER_WORKERS", "3")
        from atomlaser.cli import _workers
        import argparse
        ns = argparse.Namespace(workers=2)
        assert _workers(ns) == 2
        ns = argparse.Namespace(workers=None)
        assert _workers(ns) == 3
