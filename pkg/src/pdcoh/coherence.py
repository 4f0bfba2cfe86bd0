"""Correlation maps g1(tau, xi) from spectral density grids.

The normalized first-order correlation follows from the spectral density
through a two-dimensional Fourier transform with kernel e^{i k xi - i omega
tau}, integrated over frequency and transverse wavevector and divided by the
zero-lag value. Maps store the envelope relative to the degenerate carrier
frequency; the rapidly oscillating full correlation is recovered by
multiplying with e^{-i omega_c tau}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import gaussian_filter

from .errors import EdgeDecayError, MapExtentError, ResolutionError

FWHM_TO_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

# minimum half-maximum crossings per axis before widths are trusted
_MIN_SAMPLES_PER_FWHM = 8.0

_NOISE_FLOOR = 1e-3


@dataclass
class CoherenceMap:
    """Envelope of g1 on a uniform (tau, xi) grid; rows run along tau."""

    tau_axis: np.ndarray
    xi_axis: np.ndarray
    g: np.ndarray
    carrier_omega: float
    intensity: float
    provenance: dict = field(default_factory=dict)

    @property
    def tau_step(self):
        return float(self.tau_axis[1] - self.tau_axis[0])

    @property
    def xi_step(self):
        return float(self.xi_axis[1] - self.xi_axis[0])

    def value_at(self, tau, xi):
        """Bilinear envelope sample; raises MapExtentError outside the axes."""
        interp = RegularGridInterpolator(
            (self.tau_axis, self.xi_axis), self.g, bounds_error=True)
        tau = np.asarray(tau, dtype=float)
        xi = np.asarray(xi, dtype=float)
        scalar = tau.ndim == 0 and xi.ndim == 0
        try:
            out = interp(np.stack(np.broadcast_arrays(tau, xi), axis=-1))
        except ValueError as exc:
            raise MapExtentError(f"query outside the map extent: {exc}") from exc
        return complex(out[0]) if scalar else out

    def full_value_at(self, tau, xi):
        """Envelope times the carrier e^{-i omega_c tau}."""
        return self.value_at(tau, xi) * np.exp(-1j * self.carrier_omega
                                               * np.asarray(tau, dtype=float))


def correlation_map(sg, oversample=16, extent_cells=32):
    """Transform a spectral grid into its normalized correlation map.

    The tau and xi axes are the conjugate grids of the omega and k sampling
    (cell 2*pi/span), refined `oversample` times and truncated to
    +-`extent_cells` conjugate cells so the central structure is resolved
    well beyond the metric extractor's needs. Refusal to transform a grid
    whose density has not decayed at the edges guards against aliasing.
    """
    edge = sg.edge_ratio
    if not edge < 1e-3:
        raise EdgeDecayError(
            f"spectral density at the grid edge is {edge:.2e} of the peak "
            "(limit 1e-3); widen the grid before transforming")
    spec = sg.spec
    omega_c = spec.omega_center
    big_omega = sg.omega_axis() - omega_c
    k = sg.k_axis()

    n_side = oversample * extent_cells
    tau_step = 2.0 * math.pi / (2.0 * spec.omega_half_width) / oversample
    xi_step = 2.0 * math.pi / (2.0 * spec.k_half_width) / oversample
    tau = (np.arange(2 * n_side + 1) - n_side) * tau_step
    xi = (np.arange(2 * n_side + 1) - n_side) * xi_step

    e_tau = np.exp(-1j * np.outer(tau, big_omega))
    e_xi = np.exp(1j * np.outer(xi, k))
    unnorm = (e_tau @ sg.values) @ e_xi.T
    center = unnorm[n_side, n_side]
    cell = spec.omega_step * spec.k_step
    provenance = dict(sg.provenance)
    provenance.update(oversample=oversample, extent_cells=extent_cells)
    return CoherenceMap(tau_axis=tau, xi_axis=xi, g=unnorm / center,
                        carrier_omega=omega_c,
                        intensity=float(center.real * cell),
                        provenance=provenance)


def direct_correlation(sg, tau, xi):
    """Riemann-sum value of the full correlation at one point.

    Brute-force reference for correlation_map, carrier oscillation
    included; normalized by the zero-lag sum.
    """
    omega = sg.omega_axis()
    phase_w = np.exp(-1j * (omega - sg.spec.omega_center) * tau)
    phase_k = np.exp(1j * sg.k_axis() * xi)
    val = phase_w @ (sg.values @ phase_k)
    return val / sg.values.sum() * np.exp(-1j * sg.spec.omega_center * tau)


@dataclass
class CoherenceMetrics:
    """FWHM widths of the central peak and the first ring height."""

    tau_c: float
    xi_c: float
    first_ring_height: float
    tau_axis: np.ndarray
    tau_cut: np.ndarray
    xi_axis: np.ndarray
    xi_cut: np.ndarray


def _fwhm(axis, cut):
    """Width of the central peak at half its own height, interpolated."""
    ipk = int(np.argmax(cut))
    half = cut[ipk] / 2.0
    step = axis[1] - axis[0]

    def crossing(direction):
        i = ipk
        while 0 < i < cut.size - 1:
            j = i + direction
            if cut[j] < half:
                frac = (cut[i] - half) / (cut[i] - cut[j])
                return axis[i] + frac * direction * step
            i = j
        raise MapExtentError(
            "half-maximum crossing lies outside the map; enlarge the extent")

    return crossing(+1) - crossing(-1)


def _first_ring(cut, ipk):
    """Height of the first secondary maximum beyond the central peak."""
    i = ipk
    while i + 1 < cut.size and cut[i + 1] <= cut[i]:
        i += 1
    if i + 1 >= cut.size:
        return 0.0
    while i + 1 < cut.size and cut[i + 1] >= cut[i]:
        i += 1
    height = float(cut[i])
    return height if height > _NOISE_FLOOR else 0.0


def metrics(cmap):
    """Coherence time, coherence radius, and ring height from the axis cuts.

    Widths are FWHM of |g1| along tau at xi = 0 and along xi at tau = 0,
    with linear interpolation at the half-maximum crossings. The half level
    refers to the cut's own peak, so blurred maps (peak below 1) are
    measured consistently. A peak resolved by fewer than 8 samples per
    FWHM raises ResolutionError carrying the needed refinement factor.
    """
    mag = np.abs(cmap.g)
    i0 = int(np.argmin(np.abs(cmap.tau_axis)))
    j0 = int(np.argmin(np.abs(cmap.xi_axis)))
    tau_cut = mag[:, j0]
    xi_cut = mag[i0, :]

    tau_c = _fwhm(cmap.tau_axis, tau_cut)
    xi_c = _fwhm(cmap.xi_axis, xi_cut)
    worst = min(tau_c / cmap.tau_step, xi_c / cmap.xi_step)
    if worst < _MIN_SAMPLES_PER_FWHM:
        factor = math.ceil(_MIN_SAMPLES_PER_FWHM / worst)
        raise ResolutionError(
            f"central peak is sampled {worst:.1f} times per FWHM "
            f"(need {_MIN_SAMPLES_PER_FWHM:.0f}); refine the map axes "
            f"{factor}x", refine_factor=factor)

    ring = _first_ring(tau_cut, int(np.argmax(tau_cut)))
    return CoherenceMetrics(tau_c=float(tau_c), xi_c=float(xi_c),
                            first_ring_height=ring,
                            tau_axis=cmap.tau_axis, tau_cut=tau_cut,
                            xi_axis=cmap.xi_axis, xi_cut=xi_cut)


def instrument_blur(cmap, dtau, dxi):
    """Map as a finite-resolution instrument would record it.

    |g1| is convolved with a normalized Gaussian of FWHM (dtau, dxi); the
    phase is kept. The result is deliberately not renormalized: a central
    value below 1 is the signature of resolution-limited visibility.
    """
    if dtau < 0 or dxi < 0:
        raise MapExtentError("blur widths must be nonnegative")
    if dtau == 0 and dxi == 0:
        return CoherenceMap(cmap.tau_axis, cmap.xi_axis, cmap.g.copy(),
                            cmap.carrier_omega, cmap.intensity,
                            dict(cmap.provenance))
    tau_span = cmap.tau_axis[-1] - cmap.tau_axis[0]
    xi_span = cmap.xi_axis[-1] - cmap.xi_axis[0]
    if dtau > tau_span or dxi > xi_span:
        raise MapExtentError(
            "blur kernel is wider than the map; enlarge the extent")
    mag = np.abs(cmap.g)
    sigma = (dtau / FWHM_TO_SIGMA / cmap.tau_step,
             dxi / FWHM_TO_SIGMA / cmap.xi_step)
    blurred = gaussian_filter(mag, sigma=sigma, mode="constant", cval=0.0)
    phase = np.where(mag > 0, cmap.g / np.where(mag > 0, mag, 1.0), 1.0)
    provenance = dict(cmap.provenance)
    provenance.update(blur_tau_s=dtau, blur_xi_m=dxi)
    return CoherenceMap(cmap.tau_axis, cmap.xi_axis, blurred * phase,
                        cmap.carrier_omega, cmap.intensity, provenance)


def factorability_defect(cmap):
    """max |g1(tau, xi) - g1(tau, 0) * g1(0, xi)|.

    Zero for maps whose source density factorizes into S1(omega) * S2(k);
    a large value is the fingerprint of coupled time-space coherence.
    """
    i0 = int(np.argmin(np.abs(cmap.tau_axis)))
    j0 = int(np.argmin(np.abs(cmap.xi_axis)))
    outer = np.outer(cmap.g[:, j0], cmap.g[i0, :])
    return float(np.max(np.abs(cmap.g - outer)))
