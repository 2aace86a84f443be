"""Initial-state sampling for truncated-Wigner trajectories.

A coherent state maps to the mean field plus complex Gaussian noise of
standard deviation one half per quadrature per mode, scaled by 1/sqrt(dV) on
a grid.  Quadrature squeezing rescales the two quadratures by e^{-r} and
e^{+r} in a frame set by the local mean-field phase rotated by theta/2
(squeezing is applied independently at every grid point; at vacuum points
theta itself sets the frame, there being no local phase).

Noise is drawn from counter-based Philox streams keyed by (master seed,
trajectory index), so any trajectory is reproducible in isolation and
across worker counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import Grid


@dataclass(frozen=True)
class NoiseSpec:
    """Everything that determines one trajectory's initial noise."""

    master_seed: int
    trajectory_index: int
    squeeze_r: float = 0.0          # trapped component
    squeeze_theta: float = 0.0
    beam_squeeze_r: float = 0.0     # untrapped component; vacuum by default
    beam_squeeze_theta: float = 0.0

    def rng(self) -> np.random.Generator:
        key = np.array([self.master_seed % 2**64,
                        self.trajectory_index % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def _rng_of(noise) -> np.random.Generator:
    return noise.rng() if isinstance(noise, NoiseSpec) else noise


def sample_coherent(mean_field: np.ndarray, grid: Grid, noise) -> np.ndarray:
    """Mean field plus half-quantum vacuum noise at every grid point.

    ``noise`` is a NoiseSpec or an already-positioned Generator; a NoiseSpec
    always yields the same field for the same (seed, index).
    """
    rng = _rng_of(noise)
    shape = grid.points
    xa = rng.normal(0.0, 0.5, shape)
    xp = rng.normal(0.0, 0.5, shape)
    return mean_field + (xa + 1j * xp) / np.sqrt(grid.volume_element)


def sample_squeezed(mean_field: np.ndarray, grid: Grid, noise,
                    r: float | None = None,
                    theta: float | None = None) -> np.ndarray:
    """Squeezed-coherent sample; r = 0 falls through to sample_coherent.

    The quadrature drawn with variance e^{-2r}/4 lies along the local phase
    of the mean field rotated by theta/2, so positive r squeezes the local
    amplitude (hence number) fluctuations.
    """
    rng = _rng_of(noise)
    if r is None:
        r = noise.squeeze_r if isinstance(noise, NoiseSpec) else 0.0
    if theta is None:
        theta = noise.squeeze_theta if isinstance(noise, NoiseSpec) else 0.0
    if r == 0.0:
        return sample_coherent(mean_field, grid, rng)
    shape = grid.points
    xa = rng.normal(0.0, 0.5, shape)
    xp = rng.normal(0.0, 0.5, shape)
    frame = np.where(mean_field == 0, theta, np.angle(mean_field) + 0.5 * theta)
    eta = np.exp(1j * frame) * (np.exp(-r) * xa + 1j * np.exp(r) * xp)
    return mean_field + eta / np.sqrt(grid.volume_element)


def sample_pair(psi1_mean: np.ndarray, psi2_mean: np.ndarray, grid: Grid,
                noise: NoiseSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw both components from one trajectory stream, trapped field first."""
    rng = noise.rng()
    psi1 = sample_squeezed(psi1_mean, grid, rng,
                           r=noise.squeeze_r, theta=noise.squeeze_theta)
    psi2 = sample_squeezed(psi2_mean, grid, rng,
                           r=noise.beam_squeeze_r, theta=noise.beam_squeeze_theta)
    return psi1, psi2


def number_estimator(samples, grid: Grid) -> np.ndarray:
    """Per-point particle number from symmetrically ordered trajectory samples.

    mean(|psi|^2) - 1/(2 dV); summing the result times dV gives the total
    particle number.  ``samples`` iterates over trajectories.
    """
    samples = np.asarray(samples)
    if samples.ndim == len(grid.points):   # a single trajectory
        samples = samples[None]
    mean_sq = np.mean(np.abs(samples)**2, axis=0)
    return mean_sq - 0.5 / grid.volume_element


def total_number_estimate(samples, grid: Grid) -> float:
    """Total particle number via the symmetric-ordering correction."""
    return float(np.sum(number_estimator(samples, grid)) * grid.volume_element)
