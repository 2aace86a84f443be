"""Trajectory ensembles and vacuum-subtracted momentum spectra.

Per trajectory the initial fields are sampled from (master seed, index),
evolved, and the momentum-space beam power at each analysis time is added
into accumulators.  Accumulation is committed strictly in trajectory-index
order regardless of which worker finishes first, so results are bitwise
identical for any worker count and checkpoints resume exactly.
"""

from __future__ import annotations

from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

import numpy as np

from . import checkpoint as _ckpt
from .dynamics import (EvolutionSpec, FieldPair, IntegrationBlowupError,
                       evolve)
from .params import Grid, ParameterError, PhysicalParams
from .sampling import NoiseSpec, sample_pair


class EnsembleError(RuntimeError):
    """Ensemble-level failure (too many lost trajectories, bad resume)."""


@dataclass(frozen=True)
class EnsembleSpec:
    """Trajectory count, seeding and analysis schedule for one ensemble."""

    trajectories: int
    master_seed: int
    evolution: EvolutionSpec
    analysis_times: tuple[float, ...]
    workers: int = 1
    checkpoint_path: str | None = None
    checkpoint_every: int = 0          # trajectories between checkpoints
    max_excluded_fraction: float = 0.01

    def __post_init__(self):
        if self.trajectories < 1:
            raise ParameterError("need at least one trajectory")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        object.__setattr__(self, "analysis_times",
                           tuple(float(t) for t in self.analysis_times))
        ev = self.evolution
        snap = ev.snapshot_interval
        for t in self.analysis_times:
            steps = t / snap
            if abs(steps - round(steps)) > 1e-6 or t > ev.total_time + 1e-9 * snap:
                raise ParameterError(
                    f"analysis time {t} is not on the snapshot schedule")
        if ev.mode == "semiclassical" and self.trajectories != 1:
            raise ParameterError("semiclassical mode runs exactly one trajectory")


@dataclass
class SpectrumSeries:
    """Accumulated |psi2(k)|^2 over trajectories at each analysis time.

    ``momentum_volume_element`` is the integration cell of the (possibly
    zero-padded) snapshot lattice; ``vacuum_cell`` is the unpadded momentum
    cell that sets the vacuum level 1/(2 vacuum_cell) per bin.
    """

    grid_meta: dict
    k_axes: tuple[np.ndarray, ...]
    momentum_volume_element: float
    times: np.ndarray
    mode: str
    master_seed: int
    vacuum_cell: float = 0.0
    momentum_pad: int = 1
    config_hash: str = ""
    power_sum: np.ndarray = None        # (n_times, *grid points)
    power_sumsq: np.ndarray = None
    trapped_sum: np.ndarray = None      # (n_times,)
    beam_sum: np.ndarray = None
    count: int = 0
    excluded: list = field(default_factory=list)

    @classmethod
    def empty(cls, grid: Grid, times, mode: str, master_seed: int,
              config_hash: str = "", momentum_pad: int = 1) -> "SpectrumSeries":
        from .dynamics import padded_k_axes
        times = np.asarray(sorted(times), dtype=float)
        shape = (len(times),) + tuple(momentum_pad * n for n in grid.points)
        vac = grid.momentum_volume_element
        return cls(grid_meta=grid.describe(),
                   k_axes=padded_k_axes(grid, momentum_pad),
                   momentum_volume_element=vac / momentum_pad**grid.dimension,
                   times=times, mode=mode, master_seed=master_seed,
                   vacuum_cell=vac, momentum_pad=momentum_pad,
                   config_hash=config_hash,
                   power_sum=np.zeros(shape), power_sumsq=np.zeros(shape),
                   trapped_sum=np.zeros(len(times)),
                   beam_sum=np.zeros(len(times)))

    def add(self, power: np.ndarray, trapped: np.ndarray, beam: np.ndarray):
        self.power_sum += power
        self.power_sumsq += power**2
        self.trapped_sum += trapped
        self.beam_sum += beam
        self.count += 1

    def mark_excluded(self, index: int, reason: str):
        self.excluded.append((index, reason))

    # -- estimators ------------------------------------------------------

    @property
    def wigner(self) -> bool:
        return self.mode == "wigner"

    def spectrum(self, time_index: int) -> np.ndarray:
        """Vacuum-subtracted mean beam spectrum, FFT-ordered, not clamped."""
        mean = self.power_sum[time_index] / self.count
        if self.wigner:
            mean = mean - 0.5 / self.vacuum_cell
        return mean

    def spectrum_error(self, time_index: int) -> np.ndarray:
        """Per-bin standard error of the mean spectrum."""
        n = self.count
        mean = self.power_sum[time_index] / n
        var = np.maximum(self.power_sumsq[time_index] / n - mean**2, 0.0)
        return np.sqrt(var / max(n - 1, 1))

    def negative_fraction(self, time_index: int) -> float:
        s = self.spectrum(time_index)
        return float(np.mean(s < 0.0))

    def beam_number(self, time_index: int) -> float:
        """Total beam atoms from the subtracted spectrum."""
        s = self.spectrum(time_index)
        return float(np.sum(s) * self.momentum_volume_element)

    def trapped_number(self, time_index: int) -> float:
        """Trapped atoms via the symmetric-ordering number estimator."""
        n_raw = self.trapped_sum[time_index] / self.count
        if self.wigner:
            n_modes = int(np.prod(self.grid_meta["points"]))
            n_raw = n_raw - 0.5 * n_modes
        return float(n_raw)


# -- trajectory worker ----------------------------------------------------

_WORK = {}


def _init_worker(params, grid, espec, ground_psi1):
    _WORK["params"] = params
    _WORK["grid"] = grid
    _WORK["espec"] = espec
    _WORK["ground_psi1"] = ground_psi1


def _run_trajectory(index: int):
    params: PhysicalParams = _WORK["params"]
    grid: Grid = _WORK["grid"]
    espec: EnsembleSpec = _WORK["espec"]
    ground = _WORK["ground_psi1"]
    ev = espec.evolution

    vac = np.zeros_like(ground)
    if ev.wigner:
        noise = NoiseSpec(master_seed=espec.master_seed, trajectory_index=index,
                          squeeze_r=params.squeeze_r,
                          squeeze_theta=params.squeeze_theta)
        psi1, psi2 = sample_pair(ground, vac, grid, noise)
    else:
        psi1, psi2 = ground.copy(), vac.copy()

    times = espec.analysis_times
    want = {round(t / ev.snapshot_interval) for t in times}
    shape = (len(times),) + tuple(ev.momentum_pad * n for n in grid.points)
    power = np.zeros(shape)
    trapped = np.zeros(len(times))
    beam = np.zeros(len(times))
    order = {round(t / ev.snapshot_interval): i for i, t in enumerate(sorted(times))}

    def sink(snap):
        j = round(snap.time / ev.snapshot_interval)
        if j in want:
            i = order[j]
            power[i] = np.abs(snap.psi2_momentum)**2
            trapped[i] = snap.trapped_norm
            beam[i] = snap.beam_norm

    try:
        evolve(FieldPair(psi1, psi2), params, grid, ev, sink=sink)
    except IntegrationBlowupError as err:
        return index, None, None, None, f"blowup at step {err.step_index}"
    return index, power, trapped, beam, None


def run_ensemble(espec: EnsembleSpec, params: PhysicalParams, grid: Grid,
                 ground: FieldPair, config_hash: str = "",
                 resume_from: str | None = None,
                 progress=None) -> SpectrumSeries:
    """Run (or resume) an ensemble and return the accumulated spectra.

    ``ground`` is the shared condensate state (trajectory noise is added on
    top per trajectory).  Results are independent of ``workers``.
    """
    if resume_from is not None:
        series, start = _ckpt.load(resume_from, expected_seed=espec.master_seed,
                                   expected_grid=grid.describe(),
                                   expected_hash=config_hash)
    else:
        series = SpectrumSeries.empty(grid, espec.analysis_times,
                                      espec.evolution.mode, espec.master_seed,
                                      config_hash,
                                      momentum_pad=espec.evolution.momentum_pad)
        start = 0

    total = espec.trajectories
    if start >= total:
        return series

    ground_psi1 = np.ascontiguousarray(ground.psi1, dtype=np.complex128)

    def commit(result):
        index, power, trapped, beam, failure = result
        if failure is None:
            series.add(power, trapped, beam)
        else:
            series.mark_excluded(index, failure)
        if progress is not None:
            progress(index)

    committed = start
    if espec.workers == 1:
        _init_worker(params, grid, espec, ground_psi1)
        for i in range(start, total):
            commit(_run_trajectory(i))
            committed = i + 1
            _maybe_checkpoint(series, espec, committed)
    else:
        with ProcessPoolExecutor(
                max_workers=espec.workers, initializer=_init_worker,
                initargs=(params, grid, espec, ground_psi1)) as pool:
            pending = {}
            buffered = {}
            next_submit = start
            next_commit = start
            max_inflight = espec.workers * 2
            while next_commit < total:
                while next_submit < total and len(pending) < max_inflight:
                    fut = pool.submit(_run_trajectory, next_submit)
                    pending[fut] = next_submit
                    next_submit += 1
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    idx = pending.pop(fut)
                    buffered[idx] = fut.result()
                while next_commit in buffered:
                    commit(buffered.pop(next_commit))
                    next_commit += 1
                    _maybe_checkpoint(series, espec, next_commit)
            committed = next_commit

    lost = len(series.excluded)
    if lost / total > espec.max_excluded_fraction:
        raise EnsembleError(
            f"{lost}/{total} trajectories excluded "
            f"(limit {espec.max_excluded_fraction:.1%}); first: "
            f"{series.excluded[0]}")
    if espec.checkpoint_path:
        _ckpt.save(espec.checkpoint_path, series, espec.trajectories,
                   committed=total)
    return series


def _maybe_checkpoint(series, espec, committed):
    if (espec.checkpoint_path and espec.checkpoint_every > 0
            and committed % espec.checkpoint_every == 0):
        _ckpt.save(espec.checkpoint_path, series, espec.trajectories,
                   committed=committed)


def default_trajectories(dimension: int) -> int:
    """Stochastic-path defaults: 1024 paths in 1D, 256 in 2D."""
    return 1024 if dimension == 1 else 256
