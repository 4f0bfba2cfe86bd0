"""High-gain down-conversion spectral density on uniform (omega, k) grids.

The density at mismatch delta_k is

    S = (G * sinh(g) / g)^2,    g = sqrt(G^2 - (delta_k * L)^2 / 4),

continued analytically to sin for an imaginary g. Grids are sized so the
density decays below 1e-3 of its peak at every edge, which the correlation
transform later relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.constants import c
from scipy.interpolate import RegularGridInterpolator

from .dispersion import ORDINARY, ExtraordinaryAtAngle, wavenumber
from .errors import ConfigurationError
from .phasematch import delta_k

EDGE_DECAY_RATIO = 1e-3

# series window for sinh(x)/x around the branch point, in u = x^2
_SERIES_U = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling of the (omega, k) plane.

    Axes follow the transform-friendly convention axis[i] = center +
    (i - n//2) * step, so the exact center frequency and k = 0 are grid
    nodes; sample counts must be powers of two, at least 64.
    """

    omega_center: float
    omega_half_width: float
    n_omega: int
    k_half_width: float
    n_k: int

    def __post_init__(self):
        for name, n in (("n_omega", self.n_omega), ("n_k", self.n_k)):
            if n < 64 or n & (n - 1):
                raise ConfigurationError(
                    f"{name} must be a power of two >= 64, got {n}")
        if self.omega_half_width <= 0 or self.k_half_width <= 0:
            raise ConfigurationError("grid half-widths must be positive")
        if self.omega_center <= self.omega_half_width:
            raise ConfigurationError("omega grid extends to nonpositive frequencies")

    @property
    def omega_step(self):
        return 2 * self.omega_half_width / self.n_omega

    @property
    def k_step(self):
        return 2 * self.k_half_width / self.n_k

    def omega_axis(self):
        return self.omega_center + (np.arange(self.n_omega) - self.n_omega // 2) * self.omega_step

    def k_axis(self):
        return (np.arange(self.n_k) - self.n_k // 2) * self.k_step


@dataclass
class SpectralGrid:
    """Sampled density: values[i, j] = S(omega_axis[i], k_axis[j])."""

    spec: GridSpec
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def omega_axis(self):
        return self.spec.omega_axis()

    def k_axis(self):
        return self.spec.k_axis()

    @property
    def edge_ratio(self):
        """Largest edge value relative to the grid peak."""
        return self.provenance.get("edge_ratio", math.inf)


def gain_function(mismatch, length_m, gain):
    """Gain argument for a given mismatch.

    Returns (magnitude, real_branch): the radicand G^2 - (delta_k L)^2/4
    is positive on the real branch (hyperbolic growth) and negative on the
    imaginary branch (oscillatory), where the magnitude is |g|.
    """
    r = np.asarray(mismatch) * length_m / 2.0
    u = gain * gain - np.square(r)
    return np.sqrt(np.abs(u)), u >= 0


def _density_from_mismatch(mismatch, length_m, gain):
    r = np.asarray(mismatch, dtype=float) * length_m / 2.0
    u = gain * gain - np.square(r)
    au = np.sqrt(np.abs(u))
    # sinh(x)/x and sin(x)/x meet at 1; series keeps the branch point smooth
    safe = np.where(au < 1e-300, 1.0, au)
    f = np.where(np.abs(u) < _SERIES_U, 1.0 + u / 6.0,
                 np.where(u >= 0, np.sinh(np.where(u >= 0, safe, 0.0)) / safe,
                          np.sin(np.where(u < 0, safe, 0.0)) / safe))
    return np.square(gain * f)


def spectral_density(omega_s, k, cfg):
    """Density at one or many (omega_s, k) points; rejects invalid inputs."""
    return _density_from_mismatch(delta_k(omega_s, k, cfg), cfg.length_m, cfg.gain)


def _masked_density(cfg, omega, k):
    """Density over an axis product with invalid nodes set to 0.

    Returns (values, invalid_count). Nodes whose signal or idler leaves the
    dispersion range, or whose k is evanescent, do not evaluate.
    """
    lo, hi = cfg.sellmeier.valid_range_um
    omega_i = cfg.pump_omega - omega
    in_band = (omega > 0) & (omega_i > 0)
    lam_s = np.where(in_band, 2e6 * math.pi * c / np.where(in_band, omega, 1.0), 0.0)
    lam_i = np.where(in_band, 2e6 * math.pi * c / np.where(in_band, omega_i, 1.0), 0.0)
    row_ok = in_band & (lam_s >= lo) & (lam_s <= hi) & (lam_i >= lo) & (lam_i <= hi)

    k_s = np.zeros_like(omega)
    k_i = np.zeros_like(omega)
    k_s[row_ok] = wavenumber(omega[row_ok], ORDINARY, cfg.sellmeier)
    k_i[row_ok] = wavenumber(omega_i[row_ok], ORDINARY, cfg.sellmeier)
    k_p = wavenumber(cfg.pump_omega, ExtraordinaryAtAngle(cfg.theta_rad),
                     cfg.sellmeier)

    k2 = np.square(k)[None, :]
    rad_s = np.square(k_s)[:, None] - k2
    rad_i = np.square(k_i)[:, None] - k2
    valid = row_ok[:, None] & (rad_s > 0) & (rad_i > 0)
    mismatch = k_p - np.sqrt(np.maximum(rad_s, 0.0)) - np.sqrt(np.maximum(rad_i, 0.0))
    values = np.where(valid, _density_from_mismatch(mismatch, cfg.length_m, cfg.gain), 0.0)
    return values, int(valid.size - np.count_nonzero(valid))


def auto_grid(cfg, n_omega=1024, n_k=512, margin=1.35):
    """Size a grid from the density's own support.

    A coarse probe locates where the density exceeds 1e-3 of its peak,
    widening itself until that support is interior, and the final
    half-widths add the given margin so the edge-decay requirement holds.
    """
    omega_c = cfg.degenerate_omega
    half_w, half_k = 0.49 * omega_c, 4e5
    for _ in range(10):
        probe_w = omega_c + np.linspace(-half_w, half_w, 257)
        probe_k = np.linspace(-half_k, half_k, 129)
        values, _ = _masked_density(cfg, probe_w, probe_k)
        peak = values.max()
        if peak <= 0:
            raise ConfigurationError(
                "density is zero everywhere (gain 0?); supply a GridSpec explicitly")
        rows = np.any(values >= EDGE_DECAY_RATIO * peak, axis=1)
        cols = np.any(values >= EDGE_DECAY_RATIO * peak, axis=0)
        if rows[0] or rows[-1] or cols[0] or cols[-1]:
            half_w = min(half_w * 1.5, 0.49 * omega_c)
            half_k *= 1.5
            continue
        span_w = np.abs(probe_w[rows] - omega_c).max()
        span_k = np.abs(probe_k[cols]).max()
        return GridSpec(omega_center=omega_c,
                        omega_half_width=margin * span_w, n_omega=n_omega,
                        k_half_width=margin * span_k, n_k=n_k)
    raise ConfigurationError("could not bound the density support; check the "
                             "crystal configuration")


def build_spectrum(cfg, grid=None):
    """Evaluate the density on a grid (auto-sized when grid is None).

    Invalid nodes are zeroed and counted; more than 1% of them is a
    configuration error. The provenance records the edge decay ratio that
    the correlation transform checks before trusting the grid.
    """
    if grid is None:
        grid = auto_grid(cfg)
    values, invalid = _masked_density(cfg, grid.omega_axis(), grid.k_axis())
    if invalid > 0.01 * values.size:
        raise ConfigurationError(
            f"{invalid} of {values.size} grid nodes are unphysical "
            "(evanescent or outside the dispersion range); narrow the grid")
    peak = values.max()
    edges = max(values[0].max(), values[-1].max(),
                values[:, 0].max(), values[:, -1].max())
    provenance = {
        "config_hash": cfg.config_hash(),
        "material": cfg.sellmeier.material,
        "length_m": cfg.length_m,
        "theta_rad": cfg.theta_rad,
        "pump_wavelength_m": cfg.pump_wavelength_m,
        "gain": cfg.gain,
        "invalid_nodes": invalid,
        "edge_ratio": float(edges / peak) if peak > 0 else math.inf,
        "built_at": datetime.now(timezone.utc).isoformat(),
    }
    return SpectralGrid(spec=grid, values=values, provenance=provenance)


@dataclass
class WavelengthAngleGrid:
    """Density resampled to wavelength and external emission angle."""

    wavelength_axis_m: np.ndarray
    angle_axis_rad: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)


def to_wavelength_angle(sg, n_wavelength=None, n_angle=None):
    """Resample S(omega, k) onto a uniform (wavelength, external angle) grid.

    Wavelength is 2*pi*c/omega and the external angle is k * wavelength /
    (2*pi); values are bilinearly interpolated, with zero outside the
    source grid.
    """
    spec = sg.spec
    n_wavelength = n_wavelength or spec.n_omega
    n_angle = n_angle or spec.n_k
    omega = sg.omega_axis()
    lam = np.linspace(2 * math.pi * c / omega[-1], 2 * math.pi * c / omega[0],
                      n_wavelength)
    theta_max = spec.k_half_width * lam[-1] / (2 * math.pi)
    theta = np.linspace(-theta_max, theta_max, n_angle)

    interp = RegularGridInterpolator((omega, sg.k_axis()), sg.values,
                                     bounds_error=False, fill_value=0.0)
    lam_q, theta_q = np.meshgrid(lam, theta, indexing="ij")
    omega_q = 2 * math.pi * c / lam_q
    k_q = theta_q * 2 * math.pi / lam_q
    values = interp(np.stack([omega_q, k_q], axis=-1))
    return WavelengthAngleGrid(lam, theta, values, dict(sg.provenance))
