"""Ensemble estimator, scheduling invariance, checkpointing."""

import math

import numpy as np
import pytest

import atomlaser.ensemble as ens_mod
from atomlaser.checkpoint import CheckpointError, read_header
from atomlaser.dynamics import (EvolutionSpec, FieldPair, evolve, ground_state,
                                to_momentum_space)
from atomlaser.ensemble import (EnsembleError, EnsembleSpec, SpectrumSeries,
                                default_trajectories, run_ensemble)
from atomlaser.params import Grid, ParameterError, PhysicalParams

MASS, OMEGA = 1.443e-25, 250.0


def small_setup(rabi=0.0, n_atoms=2000.0, a_s=1.5e-9, points=64,
                kick=0.8, detuning=0.0):
    p = PhysicalParams.single_species(
        mass=MASS, trap_frequency=OMEGA, scattering_length=a_s,
        atom_number=n_atoms, transverse_area=1.2e-11,
        rabi_frequency=rabi * OMEGA, detuning=detuning * OMEGA)
    a0 = p.units.length
    if kick:
        p = PhysicalParams.single_species(
            mass=MASS, trap_frequency=OMEGA, scattering_length=a_s,
            atom_number=n_atoms, transverse_area=1.2e-11,
            rabi_frequency=rabi * OMEGA, detuning=detuning * OMEGA,
            kick_wavenumber=kick / a0)
    grid = Grid.one_d(points, 20 * a0, origin_fraction=0.4)
    gs = ground_state(p, grid, n_atoms)
    return p, grid, gs


def make_espec(trajectories, seed=7, workers=1, mode="wigner", dt=4e-5,
               nsteps=25, **kw):
    total = nsteps * dt
    ev = EvolutionSpec(mode=mode, time_step=dt, total_time=total,
                       snapshot_interval=total / 5)
    return EnsembleSpec(trajectories=trajectories, master_seed=seed,
                        evolution=ev, analysis_times=(total / 5, total),
                        workers=workers, **kw)


class TestEstimator:
    def test_vacuum_spectrum_zero_at_three_sigma(self):
        p, grid, gs = small_setup(rabi=0.0)
        espec = make_espec(trajectories=300)
        series = run_ensemble(espec, p, grid, gs)
        for it in range(len(series.times)):
            s = series.spectrum(it)
            se = series.spectrum_error(it)
            # allow a small all-bins tolerance beyond 3 sigma for the tails
            assert np.mean(np.abs(s) < 3.2 * se) > 0.98
            assert abs(series.beam_number(it)) < 3 * np.sum(se) * series.momentum_volume_element

    def test_single_semiclassical_trajectory_matches_evolve(self):
        p, grid, gs = small_setup(rabi=0.15)
        espec = make_espec(trajectories=1, mode="semiclassical")
        series = run_ensemble(espec, p, grid, gs)
        # no vacuum subtraction in semiclassical mode
        got = series.spectrum(1)
        snaps = []
        evolve(FieldPair(gs.psi1.copy(), gs.psi2.copy()), p, grid,
               espec.evolution, sink=snaps.append)
        ref = np.abs(snaps[-1].psi2_momentum)**2
        assert np.array_equal(got, ref)

    def test_total_number_consistency(self):
        p, grid, gs = small_setup(rabi=0.3, kick=0.8)
        espec = make_espec(trajectories=128, nsteps=40)
        series = run_ensemble(espec, p, grid, gs)
        it = len(series.times) - 1
        total = series.beam_number(it) + series.trapped_number(it)
        assert total == pytest.approx(p.atom_number, rel=5e-3)

    def test_variance_halves_with_double_trajectories(self):
        p, grid, gs = small_setup(rabi=0.0, points=32)
        reps = 10
        var_small, var_big = [], []
        for rep in range(reps):
            s1 = run_ensemble(make_espec(trajectories=24, seed=100 + rep),
                              p, grid, gs)
            s2 = run_ensemble(make_espec(trajectories=48, seed=500 + rep),
                              p, grid, gs)
            var_small.append(np.mean(s1.spectrum_error(1)**2))
            var_big.append(np.mean(s2.spectrum_error(1)**2))
        ratio = np.mean(var_small) / np.mean(var_big)
        assert 1.6 < ratio < 2.4

    def test_negative_fraction_metadata(self):
        p, grid, gs = small_setup(rabi=0.0, points=32)
        series = run_ensemble(make_espec(trajectories=64), p, grid, gs)
        frac = series.negative_fraction(1)
        assert 0.2 < frac < 0.8   # pure noise around zero after subtraction


class TestScheduling:
    def test_worker_count_invariance(self):
        p, grid, gs = small_setup(rabi=0.2)
        base = None
        for workers in (1, 2, 3):
            series = run_ensemble(make_espec(trajectories=10, workers=workers),
                                  p, grid, gs)
            if base is None:
                base = series
            else:
                assert np.array_equal(base.power_sum, series.power_sum)
                assert np.array_equal(base.power_sumsq, series.power_sumsq)

    def test_semiclassical_requires_single_trajectory(self):
        with pytest.raises(ParameterError):
            make_espec(trajectories=4, mode="semiclassical")

    def test_analysis_times_must_be_on_schedule(self):
        ev = EvolutionSpec(mode="wigner", time_step=1e-5, total_time=1e-3,
                           snapshot_interval=1e-4)
        with pytest.raises(ParameterError):
            EnsembleSpec(trajectories=2, master_seed=1, evolution=ev,
                         analysis_times=(1.37e-4,))

    def test_default_trajectory_counts(self):
        assert default_trajectories(1) == 1024
        assert default_trajectories(2) == 256


class TestExclusion:
    def test_excluded_trajectory_recorded_and_limit_enforced(self, monkeypatch):
        p, grid, gs = small_setup(rabi=0.2)
        real = ens_mod._run_trajectory

        def flaky(index):
            if index == 3:
                return index, None, None, None, "blowup at step 11"
            return real(index)

        monkeypatch.setattr(ens_mod, "_run_trajectory", flaky)
        espec = make_espec(trajectories=8, max_excluded_fraction=0.5)
        series = run_ensemble(espec, p, grid, gs)
        assert series.count == 7
        assert series.excluded == [(3, "blowup at step 11")]
        with pytest.raises(EnsembleError):
            run_ensemble(make_espec(trajectories=8), p, grid, gs)


class TestCheckpoint:
    def run_all(self, p, grid, gs, tmp_path, interrupt_at=None, resume=False,
                ckpt_name="run.alck", seed=7):
        path = str(tmp_path / ckpt_name)
        espec = make_espec(trajectories=9, seed=seed,
                           checkpoint_path=path, checkpoint_every=3)
        if interrupt_at is not None:
            real = ens_mod._run_trajectory

            def dying(index):
                if index == interrupt_at:
                    raise RuntimeError("simulated crash")
                return real(index)

            with pytest.MonkeyPatch.context() as mp:
                mp.setattr(ens_mod, "_run_trajectory", dying)
                with pytest.raises(RuntimeError):
                    run_ensemble(espec, p, grid, gs)
            return path, espec
        series = run_ensemble(espec, p, grid, gs,
                              resume_from=path if resume else None)
        return series, espec

    def test_resume_is_bitwise_identical(self, tmp_path):
        p, grid, gs = small_setup(rabi=0.2)
        ref, _ = self.run_all(p, grid, gs, tmp_path, ckpt_name="ref.alck")
        path, espec = self.run_all(p, grid, gs, tmp_path, interrupt_at=7,
                                   ckpt_name="part.alck")
        header = read_header(path)
        assert header["committed"] == 6    # checkpointed at the last multiple of 3
        resumed = run_ensemble(espec, p, grid, gs, resume_from=path)
        assert np.array_equal(ref.power_sum, resumed.power_sum)
        assert np.array_equal(ref.power_sumsq, resumed.power_sumsq)
        assert np.array_equal(ref.trapped_sum, resumed.trapped_sum)
        assert ref.count == resumed.count

    def test_refuses_wrong_seed_grid_and_corruption(self, tmp_path):
        p, grid, gs = small_setup(rabi=0.2)
        path, espec = self.run_all(p, grid, gs, tmp_path, interrupt_at=7)
        with pytest.raises(CheckpointError, match="seed"):
            run_ensemble(make_espec(trajectories=9, seed=8,
                                    checkpoint_path=str(tmp_path / "x.alck")),
                         p, grid, gs, resume_from=path)
        other_grid = Grid.one_d(128, 20 * p.units.length, origin_fraction=0.4)
        other_gs = ground_state(p, other_grid, p.atom_number)
        with pytest.raises(CheckpointError, match="grid"):
            run_ensemble(espec, p, other_grid, other_gs, resume_from=path)
        blob = bytearray(open(path, "rb").read())
        blob[len(blob) // 2] ^= 0xFF
        bad = tmp_path / "bad.alck"
        bad.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="checksum|corrupt"):
            run_ensemble(espec, p, grid, gs, resume_from=str(bad))

    def test_hash_mismatch_refused(self, tmp_path):
        p, grid, gs = small_setup(rabi=0.2)
        path = str(tmp_path / "h.alck")
        espec = make_espec(trajectories=4, checkpoint_path=path)
        run_ensemble(espec, p, grid, gs, config_hash="aaa")
        with pytest.raises(CheckpointError, match="hash"):
            run_ensemble(espec, p, grid, gs, config_hash="bbb",
                         resume_from=path)
