"""Linewidth extraction from beam spectra.

The beam's momentum-space power spectrum is fitted with a Gaussian envelope
A exp(-((k-kc)/w)^2); the linewidth is the full width at 1/e height, 2w
(with this parametrization w doubles as the conventional "standard
deviation" quoted alongside; the usual exp(-x^2/2s^2) sigma is w/sqrt(2)).
Energy linewidths use the local dispersion slope dE/dk = hbar^2 kc / m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .params import HBAR, Grid, ParameterError, PhysicalParams
from .theory import chemical_potential, phase_diffusion_limit, \
    predicted_peak_momentum


class AnalysisError(RuntimeError):
    """Analysis preconditions not met (too few points, no arc found, ...)."""


@dataclass
class GaussianFit:
    amplitude: float
    center: float
    width: float          # the w of A exp(-((k-kc)/w)^2)
    r_squared: float
    ok: bool
    message: str = ""
    width_err: float = 0.0   # 1-sigma from the fit covariance

    @property
    def linewidth(self) -> float:
        """Full width at 1/e height, 2w."""
        return 2.0 * abs(self.width)

    @property
    def sigma(self) -> float:
        """Conventional Gaussian sigma of the same envelope."""
        return abs(self.width) / math.sqrt(2.0)


def _gauss(k, amp, center, width):
    return amp * np.exp(-((k - center) / width)**2)


def fit_gaussian(k: np.ndarray, spectrum: np.ndarray,
                 window: tuple[float, float] | None = None,
                 r2_floor: float = 0.5) -> GaussianFit:
    """Least-squares Gaussian envelope fit over ``window``.

    Negative bins (vacuum-subtraction noise) enter as they are.  A fit that
    does not converge or explains less than ``r2_floor`` of the variance is
    returned flagged rather than raised.
    """
    k = np.asarray(k, dtype=float)
    s = np.asarray(spectrum, dtype=float)
    if window is not None:
        m = (k >= window[0]) & (k <= window[1])
        if m.sum() < 5:
            return GaussianFit(0, 0, 0, 0, False, "window holds fewer than 5 bins")
        k, s = k[m], s[m]
    i_pk = int(np.argmax(s))
    amp0 = float(s[i_pk])
    if not amp0 > 0:
        return GaussianFit(0, 0, 0, 0, False, "no positive bins in window")
    kc0 = float(k[i_pk])
    sp = np.clip(s, 0.0, None)
    w0 = math.sqrt(max(float(np.sum(sp * (k - kc0)**2) / np.sum(sp)), 1e-300))
    try:
        popt, pcov = curve_fit(_gauss, k, s, p0=[amp0, kc0, w0], maxfev=20000)
    except RuntimeError as err:
        return GaussianFit(0, 0, 0, 0, False, f"fit did not converge: {err}")
    resid = s - _gauss(k, *popt)
    ss_tot = float(np.sum((s - s.mean())**2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    werr = float(np.sqrt(pcov[2, 2])) if np.isfinite(pcov[2, 2]) else 0.0
    fit = GaussianFit(float(popt[0]), float(popt[1]), float(abs(popt[2])), r2,
                      ok=True, width_err=werr)
    if r2 < r2_floor:
        fit.ok = False
        fit.message = f"R^2 = {r2:.3f} below {r2_floor}"
    return fit


def moment_window(k: np.ndarray, spectrum: np.ndarray, center_guess: float,
                  bracket_half: float, span: float = 5.0,
                  lo_clip: float = -np.inf,
                  hi_clip: float = np.inf) -> tuple[float, float]:
    """Auto window around the beam peak from baseline-aware moments.

    Within the bracket around the guessed peak the spectrum is lightly
    smoothed, the in-bracket median is taken as the noise baseline, and
    first/second moments are computed over the contiguous above-threshold
    region around the maximum.  The window is the moment centre +- ``span``
    moment widths, clipped to [lo_clip, hi_clip] so the residual feature
    near the bare kick and the trapped cloud near k = 0 stay excluded.
    Plain clipped moments would let the vacuum-noise floor inflate the
    window on stochastic spectra.
    """
    lo = max(center_guess - bracket_half, lo_clip)
    hi = min(center_guess + bracket_half, hi_clip)
    m = (k >= lo) & (k <= hi)
    if m.sum() < 5:
        return lo, hi
    kk, ss = k[m], spectrum[m]
    sm = np.convolve(ss, np.ones(3) / 3.0, mode="same")
    base = float(np.median(sm))
    i_pk = int(np.argmax(sm))
    peak = float(sm[i_pk])
    if not peak > base:
        return lo, hi
    thresh = base + 0.25 * (peak - base)
    il = i_pk
    while il > 0 and sm[il - 1] > thresh:
        il -= 1
    ir = i_pk
    while ir < len(sm) - 1 and sm[ir + 1] > thresh:
        ir += 1
    seg_k = kk[il:ir + 1]
    seg_s = np.clip(ss[il:ir + 1] - base, 0.0, None)
    tot = float(np.sum(seg_s))
    if tot <= 0:
        return lo, hi
    kc = float(np.sum(seg_k * seg_s) / tot)
    w = math.sqrt(max(float(np.sum(seg_s * (seg_k - kc)**2) / tot), 1e-300))
    w = max(w, float(kk[1] - kk[0]))
    return max(kc - span * w, lo_clip), min(kc + span * w, hi_clip)


@dataclass
class LinewidthRecord:
    """Fitted beam linewidth at one analysis time, with the theory overlay."""

    time: float                  # s
    center: float                # fitted k_c, 1/m
    width: float                 # fitted w, 1/m
    linewidth_k: float           # 2w, 1/m
    linewidth_energy: float      # J, via dE/dk = hbar^2 k_c / m
    r_squared: float
    ok: bool
    theory_limit: float          # 2 * phase-diffusion energy uncertainty, J
    message: str = ""
    linewidth_energy_err: float = 0.0

    @property
    def sigma_k(self) -> float:
        return self.width / math.sqrt(2.0)


def energy_linewidth(params: PhysicalParams, center: float,
                     linewidth_k: float) -> float:
    """Wavenumber width to energy width via the local dispersion slope."""
    return HBAR**2 * center / params.mass * linewidth_k


def wavenumber_linewidth(params: PhysicalParams, center: float,
                         linewidth_energy: float) -> float:
    return linewidth_energy * params.mass / (HBAR**2 * center)


def linewidth_series(series, params: PhysicalParams,
                     mu: float | None = None,
                     span: float = 5.0) -> list[LinewidthRecord]:
    """One Gaussian-envelope fit per analysis time of a spectrum series.

    The fit window is auto-selected around the predicted beam peak,
    excluding the residual feature near the bare kick wavenumber and the
    trapped component near k = 0.
    """
    if len(series.times) < 2:
        raise AnalysisError("need at least two analysis times")
    dims = len(series.grid_meta["points"])
    if dims != 1:
        raise AnalysisError("linewidth_series expects 1D spectra; "
                            "use arc_profile_2d for 2D runs")
    if mu is None:
        mu = chemical_potential(params, 1)
    k_pk = predicted_peak_momentum(params, mu)
    k0 = params.kick_wavenumber
    theory = 2.0 * phase_diffusion_limit(params, 1)
    k = np.fft.fftshift(series.k_axes[0])
    gap = max(k_pk - k0, 0.05 * k_pk)
    lo_clip = k0 + 0.25 * gap
    out = []
    for it, t in enumerate(series.times):
        s = np.fft.fftshift(series.spectrum(it))
        win = moment_window(k, s, k_pk, 0.5 * gap, span=span, lo_clip=lo_clip)
        fit = fit_gaussian(k, s, window=win)
        lw_k = fit.linewidth
        lw_e = energy_linewidth(params, abs(fit.center), lw_k) if fit.ok else 0.0
        lw_err = energy_linewidth(params, abs(fit.center),
                                  2 * fit.width_err) if fit.ok else 0.0
        out.append(LinewidthRecord(
            time=float(t), center=fit.center, width=fit.width,
            linewidth_k=lw_k, linewidth_energy=lw_e,
            r_squared=fit.r_squared, ok=fit.ok, theory_limit=theory,
            message=fit.message, linewidth_energy_err=lw_err))
    return out


def estimate_plateau(records: list[LinewidthRecord],
                     reference: list[LinewidthRecord] | None = None,
                     window_fraction: float = 0.25) -> float:
    """Late-time plateau of a linewidth series, J.

    Averages the last ``window_fraction`` of valid records; when a
    semiclassical reference series over the same times is supplied, its
    (Fourier-limited) linewidth is removed in quadrature first, isolating
    the phase-diffusion floor.
    """
    valid = [r for r in records if r.ok]
    if not valid:
        raise AnalysisError("no valid linewidth records")
    t_end = max(r.time for r in valid)
    t_lo = t_end * (1.0 - window_fraction)
    late = [r for r in valid if r.time >= t_lo]
    ref_by_time = {}
    if reference is not None:
        ref_by_time = {r.time: r for r in reference if r.ok}
    vals = []
    for r in late:
        lw2 = r.linewidth_energy**2
        ref = ref_by_time.get(r.time)
        if ref is not None:
            lw2 = max(lw2 - ref.linewidth_energy**2, 0.0)
        vals.append(lw2)
    return math.sqrt(float(np.mean(vals)))


def narrowing_slope(records: list[LinewidthRecord],
                    t_range: tuple[float, float] | None = None) -> float:
    """Log-log slope of linewidth versus time (Fourier narrowing gives -1)."""
    pts = [(r.time, r.linewidth_energy) for r in records
           if r.ok and r.linewidth_energy > 0
           and (t_range is None or t_range[0] <= r.time <= t_range[1])]
    if len(pts) < 3:
        raise AnalysisError("need at least three valid records for a slope")
    t = np.log(np.array([p[0] for p in pts]))
    y = np.log(np.array([p[1] for p in pts]))
    return float(np.polyfit(t, y, 1)[0])


@dataclass
class ArcProfile:
    """Energy-conservation arc diagnostics of a 2D beam spectrum."""

    radius: float                 # detected shell radius, 1/m
    predicted_radius: float       # sqrt(k0^2 + 2 m mu / hbar^2)
    shell_radii: np.ndarray
    shell_density: np.ndarray     # mean spectral density per shell
    shell_snr: float
    longitudinal_k: np.ndarray
    longitudinal_cut: np.ndarray
    longitudinal_fit: GaussianFit
    arc_angles: np.ndarray
    arc_values: np.ndarray        # spectrum sampled along the detected arc


def arc_profile_2d(spectrum_2d: np.ndarray, grid: Grid,
                   params: PhysicalParams, mu: float,
                   snr_floor: float = 3.0) -> ArcProfile:
    """Radial-shell histogram and longitudinal cut of a 2D spectrum.

    The shell histogram verifies the beam sits on the energy-conservation
    arc |k| = sqrt(k0^2 + 2 m mu / hbar^2); the longitudinal cut (along the
    kick axis through k_transverse = 0) feeds the Gaussian linewidth fit.
    """
    if grid.dimension != 2:
        raise AnalysisError("arc_profile_2d needs a 2D grid")
    kx = np.fft.fftshift(grid.k_axes[0])
    kz = np.fft.fftshift(grid.k_axes[1])
    s = np.fft.fftshift(spectrum_2d)
    r_pred = predicted_peak_momentum(params, mu)

    kxm, kzm = np.meshgrid(kx, kz, indexing="ij")
    rr = np.hypot(kxm, kzm)
    dk = max(kx[1] - kx[0], kz[1] - kz[0])
    nbins = int(rr.max() / dk)
    idx = np.minimum((rr / dk).astype(int), nbins - 1)
    weight = np.bincount(idx.ravel(), weights=s.ravel(), minlength=nbins)
    counts = np.bincount(idx.ravel(), minlength=nbins)
    density = weight / np.maximum(counts, 1)
    radii = (np.arange(nbins) + 0.5) * dk

    sel = (radii > 0.3 * r_pred) & (radii < 2.0 * r_pred)
    if not np.any(sel):
        raise AnalysisError("no shells near the predicted arc radius")
    base = np.median(density[sel])
    noise = 1.4826 * np.median(np.abs(density[sel] - base)) + 1e-300
    i_pk = np.argmax(np.where(sel, density, -np.inf))
    snr = float((density[i_pk] - base) / noise)
    if snr < snr_floor:
        raise AnalysisError(f"arc shell SNR {snr:.1f} below {snr_floor}")
    # parabolic sub-bin refinement of the shell peak
    if 0 < i_pk < nbins - 1:
        y0, y1, y2 = density[i_pk - 1:i_pk + 2]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        radius = float(radii[i_pk] + np.clip(shift, -1, 1) * dk)
    else:
        radius = float(radii[i_pk])

    # longitudinal cut along the kick axis at zero transverse momentum
    direction = np.asarray(params.kick_direction)
    if abs(direction[1]) >= abs(direction[0]):
        i0 = int(np.argmin(np.abs(kx)))
        cut_k, cut = kz, s[i0, :]
    else:
        i0 = int(np.argmin(np.abs(kz)))
        cut_k, cut = kx, s[:, i0]
    win = moment_window(cut_k, cut, r_pred, 0.35 * r_pred,
                        lo_clip=0.3 * r_pred)
    fit = fit_gaussian(cut_k, cut, window=win)

    # spectrum along the detected arc, for transverse-structure diagnostics
    angles = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 181)
    ax = radius * np.sin(angles)
    az = radius * np.cos(angles)
    ix = np.clip(np.searchsorted(kx, ax), 0, len(kx) - 1)
    iz = np.clip(np.searchsorted(kz, az), 0, len(kz) - 1)
    arc_vals = s[ix, iz]

    return ArcProfile(radius=radius, predicted_radius=r_pred,
                      shell_radii=radii, shell_density=density,
                      shell_snr=snr, longitudinal_k=cut_k,
                      longitudinal_cut=cut, longitudinal_fit=fit,
                      arc_angles=angles, arc_values=arc_vals)


@dataclass
class ScalingFit:
    exponent: float
    prefactor: float
    ci_low: float
    ci_high: float
    n_points: int


def scaling_fit(points: list[tuple[float, float]], n_bootstrap: int = 2000,
                seed: int = 0) -> ScalingFit:
    """Log-log regression of (N, linewidth) pairs with a bootstrap CI.

    Needs at least four points spanning at least 1.5 decades in N.
    """
    if len(points) < 4:
        raise AnalysisError("need at least four (N, linewidth) points")
    n = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.log10(n.max() / n.min()) < 1.5 - 1e-9:
        raise AnalysisError("N values must span at least 1.5 decades")
    if np.any(y <= 0) or np.any(n <= 0):
        raise AnalysisError("scaling fit needs positive values")
    ln, ly = np.log(n), np.log(y)
    slope, intercept = np.polyfit(ln, ly, 1)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_bootstrap):
        idx = rng.integers(0, len(points), len(points))
        if len(np.unique(ln[idx])) < 2:
            continue
        boots.append(np.polyfit(ln[idx], ly[idx], 1)[0])
    lo, hi = (np.percentile(boots, [2.5, 97.5]) if boots
              else (slope, slope))
    return ScalingFit(exponent=float(slope),
                      prefactor=float(math.exp(intercept)),
                      ci_low=float(lo), ci_high=float(hi),
                      n_points=len(points))
