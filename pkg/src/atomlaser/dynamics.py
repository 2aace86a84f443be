"""Split-step spectral integrator for the coupled trapped/untrapped fields.

One real-time step is symmetric (Strang) splitting: a position-space
half-step applying trap, detuning, mean-field and Raman-coupling terms (the
local 2x2 Hamiltonian is exponentiated exactly, so pure Rabi flopping is
exact), a full kinetic step in momentum space, and a second position-space
half-step.  In truncated-Wigner mode the mean-field densities carry the
half-quantum corrections |psi_i|^2 - 1/dV (self) and |psi_j|^2 - 1/(2 dV)
(cross); apart from those constants the two modes share one kernel.

Everything is advanced in trap units internally; fields at the API are SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np
from scipy import fft as sfft

from .params import HBAR, Grid, ParameterError, PhysicalParams


class IntegrationBlowupError(RuntimeError):
    """Field values left the finite range during time stepping."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class GroundStateError(RuntimeError):
    """Imaginary-time relaxation failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass
class FieldPair:
    """Trapped and untrapped complex fields on a grid at one instant, SI."""

    psi1: np.ndarray
    psi2: np.ndarray
    time: float = 0.0

    def copy(self) -> "FieldPair":
        return FieldPair(self.psi1.copy(), self.psi2.copy(), self.time)

    def norms(self, grid: Grid) -> tuple[float, float]:
        dv = grid.volume_element
        return (float(np.sum(np.abs(self.psi1)**2) * dv),
                float(np.sum(np.abs(self.psi2)**2) * dv))


@dataclass(frozen=True)
class EvolutionSpec:
    """How to drive one trajectory."""

    mode: str                      # "wigner" or "semiclassical"
    time_step: float               # s
    total_time: float              # s
    snapshot_interval: float       # s
    absorber_width: float = 0.0    # m, cosine ramp on the untrapped field
    absorber_strength: float = 0.0 # rad/s peak damping rate
    momentum_pad: int = 1          # zero-pad factor for momentum snapshots

    def __post_init__(self):
        if self.mode not in ("wigner", "semiclassical"):
            raise ParameterError(f"unknown evolution mode {self.mode!r}")
        if self.momentum_pad < 1 or self.momentum_pad != int(self.momentum_pad):
            raise ParameterError("momentum_pad must be a positive integer")
        if not self.time_step > 0:
            raise ParameterError("time step must be positive")
        if self.total_time < 0:
            raise ParameterError("total time must be non-negative")
        if self.total_time > 0 and self.snapshot_interval < self.time_step:
            raise ParameterError("snapshot interval must be >= time step")

    @property
    def wigner(self) -> bool:
        return self.mode == "wigner"

    def steps_per_snapshot(self) -> int:
        return max(1, round(self.snapshot_interval / self.time_step))

    def snapshot_count(self) -> int:
        if self.total_time == 0:
            return 0
        return round(self.total_time / self.snapshot_interval)


@dataclass(frozen=True)
class Snapshot:
    """Momentum-space copy of the untrapped field plus norms, SI units."""

    time: float
    psi2_momentum: np.ndarray
    trapped_norm: float
    beam_norm: float


@numba.njit(cache=True)
def _position_half_step(psi1, psi2, pot, coupling, coupling_sq,
                        u11, u12, u22, delta, corr_self, corr_cross, theta):
    """Exact exponential of the local 2x2 Hamiltonian for time theta.

    H = [[pot + u11 n1s + u12 n2c, coupling], [conj(coupling), -delta +
    u22 n2s + u12 n1c]] with n_is/n_ic the (possibly vacuum-corrected)
    densities frozen over the sub-step.
    """
    for i in range(psi1.size):
        p1 = psi1[i]
        p2 = psi2[i]
        d1 = p1.real * p1.real + p1.imag * p1.imag
        d2 = p2.real * p2.real + p2.imag * p2.imag
        h11 = pot[i] + u11 * (d1 - corr_self) + u12 * (d2 - corr_cross)
        h22 = -delta + u22 * (d2 - corr_self) + u12 * (d1 - corr_cross)
        a = 0.5 * (h11 + h22)
        bz = 0.5 * (h11 - h22)
        b = math.sqrt(bz * bz + coupling_sq)
        x = b * theta
        c = math.cos(x)
        s = math.sin(x) / b if x > 1e-150 else theta
        ph = complex(math.cos(a * theta), -math.sin(a * theta))
        cp = coupling[i]
        psi1[i] = ph * (c * p1 - 1j * s * (bz * p1 + cp * p2))
        psi2[i] = ph * (c * p2 - 1j * s * (cp.conjugate() * p1 - bz * p2))


class SplitStepKernel:
    """Precomputed trap-unit arrays driving one trajectory.

    Distinct kernels share nothing mutable, so trajectories may run
    concurrently; within one kernel the transforms work in place.
    """

    def __init__(self, params: PhysicalParams, grid: Grid, spec: EvolutionSpec):
        self.params = params
        self.grid = grid
        self.spec = spec
        self.units = u = params.units
        d = grid.dimension

        sgrid = grid.scaled(u.length)
        self.dv = sgrid.volume_element
        self.dt = spec.time_step / u.time
        mesh = sgrid.position_mesh()
        pot = np.zeros(sgrid.points)
        phase = np.zeros(sgrid.points)
        direction = (1.0,) if d == 1 else params.kick_direction
        k0 = params.kick_wavenumber * u.length
        for ax, comp in zip(mesh, direction):
            pot = pot + 0.5 * ax**2
            phase = phase + k0 * comp * ax
        self.pot = np.ascontiguousarray(pot.reshape(-1))
        omega = complex(params.rabi_frequency) / params.trap_frequency
        # H12 couples the untrapped field into the trapped one; the beam is
        # then sourced with the +k0 phase so the kick points along kick_direction
        self.coupling = np.ascontiguousarray(
            (-np.conj(omega) * np.exp(-1j * phase)).reshape(-1))
        self.coupling_sq = abs(omega)**2
        self.u11 = params.interaction(d, "11") / (u.energy * u.length**d)
        self.u22 = params.interaction(d, "22") / (u.energy * u.length**d)
        self.u12 = params.interaction(d, "12") / (u.energy * u.length**d)
        self.delta = params.detuning / params.trap_frequency
        if spec.wigner:
            self.corr_self = 1.0 / self.dv
            self.corr_cross = 0.5 / self.dv
        else:
            self.corr_self = 0.0
            self.corr_cross = 0.0
        self.kinetic_phase = np.exp(-0.5j * sgrid.k_squared() * self.dt)
        self.absorber = self._build_absorber(sgrid)
        self._fields = None

    def _build_absorber(self, sgrid):
        if self.spec.absorber_width <= 0 or self.spec.absorber_strength <= 0:
            return None
        width = self.spec.absorber_width / self.units.length
        gamma = self.spec.absorber_strength / self.params.trap_frequency
        for ext in sgrid.extents:
            if not width < 0.5 * ext:
                raise ParameterError("absorber width must be below half the domain")
        ramp = np.zeros(sgrid.points)
        for i, ax in enumerate(sgrid.position_mesh()):
            lo, hi = ax.min(), ax.max()
            r = np.zeros_like(ax)
            up = ax > hi - width
            dn = ax < lo + width
            r[up] = 0.5 * (1 - np.cos(np.pi * (ax[up] - (hi - width)) / width))
            r[dn] = 0.5 * (1 - np.cos(np.pi * ((lo + width) - ax[dn]) / width))
            ramp = ramp + r
        # amplitude decay applied to psi2 at each position half-step
        return np.exp(-gamma * np.minimum(ramp, 1.0) * 0.5 * self.dt)

    # -- field conversion ------------------------------------------------

    def load(self, state: FieldPair):
        scale = self.units.length**(self.grid.dimension / 2.0)
        self._fields = np.stack([np.asarray(state.psi1, dtype=np.complex128),
                                 np.asarray(state.psi2, dtype=np.complex128)])
        self._fields *= scale
        self.time = state.time

    def unload(self) -> FieldPair:
        scale = self.units.length**(self.grid.dimension / 2.0)
        return FieldPair(self._fields[0] / scale, self._fields[1] / scale,
                         self.time)

    # -- stepping ----------------------------------------------------------

    def _half(self, theta):
        f = self._fields
        _position_half_step(f[0].reshape(-1), f[1].reshape(-1), self.pot,
                            self.coupling, self.coupling_sq,
                            self.u11, self.u12, self.u22, self.delta,
                            self.corr_self, self.corr_cross, theta)
        if self.absorber is not None:
            f[1] *= self.absorber

    def step_once(self):
        axes = tuple(range(1, 1 + self.grid.dimension))
        self._half(0.5 * self.dt)
        fk = sfft.fftn(self._fields, axes=axes, overwrite_x=True)
        fk *= self.kinetic_phase
        self._fields = sfft.ifftn(fk, axes=axes, overwrite_x=True)
        self._half(0.5 * self.dt)
        self.time += self.spec.time_step

    def check_finite(self, step_index):
        if not np.isfinite(self._fields).all():
            raise IntegrationBlowupError(
                f"non-finite field values at step {step_index}",
                step_index=step_index)

    def norms(self) -> tuple[float, float]:
        dv = self.dv  # trap-unit fields: same numbers as SI norms
        return (float(np.sum(np.abs(self._fields[0])**2) * dv),
                float(np.sum(np.abs(self._fields[1])**2) * dv))

    def beam_momentum_field(self) -> np.ndarray:
        """Unitary-measure momentum-space copy of the untrapped field, SI."""
        return to_momentum_space(self._fields[1] / self.units.length **
                                 (self.grid.dimension / 2.0), self.grid,
                                 pad=self.spec.momentum_pad)


def padded_k_axes(grid: Grid, pad: int = 1) -> tuple[np.ndarray, ...]:
    """Momentum axes of a ``pad``-times zero-padded transform, FFT order."""
    return tuple(2.0 * math.pi * np.fft.fftfreq(pad * n, d=dx)
                 for n, dx in zip(grid.points, grid.spacing))


def to_momentum_space(field: np.ndarray, grid: Grid,
                      pad: int = 1) -> np.ndarray:
    """psi(k) = (2 pi)^{-d/2} dV sum psi(x) e^{-i k x}, FFT-ordered.

    With this measure sum |psi(k)|^2 dVk equals the particle number and
    bare vacuum noise contributes exactly 1/(2 dVk) per momentum cell of
    the unpadded lattice.  ``pad`` > 1 zero-pads the transform, sampling
    the same band-limited spectrum pad-times more finely (the vacuum level
    per bin is unchanged; the integration cell shrinks by the factor).
    """
    d = grid.dimension
    arr = np.asarray(field, dtype=np.complex128)
    shape = tuple(pad * n for n in grid.points)
    out = sfft.fftn(arr, s=shape)
    out *= grid.volume_element / (2.0 * math.pi)**(d / 2.0)
    for i, (kax, ax) in enumerate(zip(padded_k_axes(grid, pad), grid.axes)):
        bshape = tuple(-1 if j == i else 1 for j in range(d))
        out *= np.exp(-1j * kax * ax[0]).reshape(bshape)
    return out


def step(state: FieldPair, params: PhysicalParams, grid: Grid,
         spec: EvolutionSpec) -> FieldPair:
    """Advance one time step.  For repeated stepping use ``evolve``."""
    kern = SplitStepKernel(params, grid, spec)
    kern.load(state)
    kern.step_once()
    kern.check_finite(0)
    return kern.unload()


def evolve(initial: FieldPair, params: PhysicalParams, grid: Grid,
           spec: EvolutionSpec,
           sink: Callable[[Snapshot], None] | None = None,
           check_every: int = 200) -> FieldPair:
    """Drive a trajectory, emitting momentum-space snapshots of the beam.

    The initial state is emitted first; afterwards one snapshot per
    ``snapshot_interval``.  Deterministic given its inputs.
    """
    kern = SplitStepKernel(params, grid, spec)
    kern.load(initial)
    if sink is not None:
        n1, n2 = kern.norms()
        sink(Snapshot(kern.time, kern.beam_momentum_field(), n1, n2))
    nsteps = round(spec.total_time / spec.time_step)
    per_snap = spec.steps_per_snapshot()
    for j in range(1, nsteps + 1):
        kern.step_once()
        if j % check_every == 0 or j == nsteps:
            kern.check_finite(j)
        if sink is not None and j % per_snap == 0:
            n1, n2 = kern.norms()
            sink(Snapshot(kern.time, kern.beam_momentum_field(), n1, n2))
    return kern.unload()


def default_time_step(params: PhysicalParams, grid: Grid,
                      safety: float = 0.05) -> float:
    """dt with max(mu, hbar k_max^2/2m, |Omega|) * dt <= safety (in hbar units)."""
    from .theory import chemical_potential
    u = params.units
    k_max = max(float(np.max(np.abs(ka))) for ka in grid.k_axes)
    rates = [HBAR**2 * k_max**2 / (2.0 * params.mass)]
    rates.append(abs(params.rabi_frequency) * HBAR)
    try:
        rates.append(chemical_potential(params, grid.dimension))
    except ParameterError:
        pass
    return safety * HBAR / max(rates)


def ground_state(params: PhysicalParams, grid: Grid, target_number: float,
                 time_step: float | None = None, tolerance: float = 1e-10,
                 max_iterations: int = 200_000) -> FieldPair:
    """Condensate ground state by imaginary-time relaxation.

    The coupling is held at zero and only the trapped component evolves
    (mean-field equations, no vacuum corrections); the field is renormalized
    to ``target_number`` each step and convergence is declared when the
    chemical-potential estimate moves by less than ``tolerance`` relatively.
    """
    if not target_number > 0:
        raise ParameterError("target number must be positive")
    u = params.units
    d = grid.dimension
    sgrid = grid.scaled(u.length)
    dv = sgrid.volume_element
    pot = np.zeros(sgrid.points)
    for ax in sgrid.position_mesh():
        pot = pot + 0.5 * ax**2
    u11 = params.interaction(d, "11") / (u.energy * u.length**d)

    from .theory import chemical_potential
    try:
        mu_scale = max(chemical_potential(params, d, target_number)
                       / u.energy, 1.0)
    except ParameterError:
        mu_scale = 1.0
    if time_step is None:
        dtau = 0.05 / mu_scale
    else:
        dtau = time_step / u.time

    # Thomas-Fermi profile (or a Gaussian when not interacting) as the seed
    if u11 > 0:
        psi = np.sqrt(np.maximum(mu_scale - pot, 0.0) / u11).astype(complex)
        if not psi.any():
            psi = np.exp(-pot).astype(complex)
    else:
        psi = np.exp(-pot).astype(complex)
    psi *= math.sqrt(target_number / (np.sum(np.abs(psi)**2) * dv))

    kin = np.exp(-0.5 * sgrid.k_squared() * dtau)
    mu_old = None
    residual = None
    for it in range(max_iterations):
        psi *= np.exp(-0.5 * dtau * (pot + u11 * np.abs(psi)**2))
        psi = sfft.ifftn(kin * sfft.fftn(psi))
        psi *= np.exp(-0.5 * dtau * (pot + u11 * np.abs(psi)**2))
        nn = float(np.sum(np.abs(psi)**2) * dv)
        if not math.isfinite(nn) or nn <= 0:
            raise GroundStateError("imaginary-time norm collapsed", residual=nn)
        mu_est = -0.5 * math.log(nn / target_number) / dtau
        psi *= math.sqrt(target_number / nn)
        if mu_old is not None:
            residual = abs(mu_est - mu_old) / max(abs(mu_est), 1e-300)
            if residual < tolerance:
                scale = u.length**(d / 2.0)
                return FieldPair(psi / scale,
                                 np.zeros_like(psi), 0.0)
        mu_old = mu_est
    raise GroundStateError(
        f"no convergence within {max_iterations} iterations", residual=residual)


def measured_chemical_potential(state: FieldPair, params: PhysicalParams,
                                grid: Grid) -> float:
    """mu = <H_sp + U11 |psi|^2> / N for the trapped field, J."""
    u = params.units
    d = grid.dimension
    sgrid = grid.scaled(u.length)
    dv = sgrid.volume_element
    psi = np.asarray(state.psi1) * u.length**(d / 2.0)
    pot = np.zeros(sgrid.points)
    for ax in sgrid.position_mesh():
        pot = pot + 0.5 * ax**2
    u11 = params.interaction(d, "11") / (u.energy * u.length**d)
    psik = sfft.fftn(psi)
    kin = float(np.sum(0.5 * sgrid.k_squared() * np.abs(psik)**2) / psi.size * dv)
    rest = float(np.sum((pot + u11 * np.abs(psi)**2) * np.abs(psi)**2) * dv)
    n = float(np.sum(np.abs(psi)**2) * dv)
    return (kin + rest) / n * u.energy


def gp_energy(state: FieldPair, params: PhysicalParams, grid: Grid) -> float:
    """Mean-field energy functional of the trapped field, J (diagnostics)."""
    u = params.units
    d = grid.dimension
    sgrid = grid.scaled(u.length)
    dv = sgrid.volume_element
    psi = np.asarray(state.psi1) * u.length**(d / 2.0)
    pot = np.zeros(sgrid.points)
    for ax in sgrid.position_mesh():
        pot = pot + 0.5 * ax**2
    u11 = params.interaction(d, "11") / (u.energy * u.length**d)
    psik = sfft.fftn(psi)
    kin = float(np.sum(0.5 * sgrid.k_squared() * np.abs(psik)**2) / psi.size * dv)
    rest = float(np.sum(pot * np.abs(psi)**2 + 0.5 * u11 * np.abs(psi)**4) * dv)
    return (kin + rest) * u.energy
