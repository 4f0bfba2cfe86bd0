"""Longitudinal phase mismatch for type-I (e -> oo) down-conversion.

The pump propagates at angle theta to the optic axis of a negative uniaxial
crystal and is extraordinarily polarized; signal and idler are ordinary.
With a plane-wave pump the transverse wavevector k of the signal is balanced
by -k on the idler, and the longitudinal mismatch is

    delta_k(omega_s, k) = k_p - sqrt(k_s^2 - k^2) - sqrt(k_i^2 - k^2)

with omega_i = omega_p - omega_s. The transverse model is one-dimensional:
k is a scalar in the plane free of pump walk-off.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c
from scipy.optimize import bisect

from .dispersion import ORDINARY, ExtraordinaryAtAngle, SellmeierSet, wavenumber
from .errors import ConfigurationError, EvanescentWaveError, RootNotFoundError, WavelengthRangeError

# |delta_k * L| regarded as phase matched when locating ring radii
_LOCUS_TOL = 1e-3


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal and pump parameters for one run.

    length_m: crystal length L.
    theta_rad: pump-to-optic-axis angle (internal, inside the crystal).
    pump_wavelength_m: vacuum pump wavelength.
    gain: dimensionless parametric gain G at zero mismatch.
    sellmeier: dispersion data for the crystal material.
    """

    length_m: float
    theta_rad: float
    pump_wavelength_m: float
    gain: float
    sellmeier: SellmeierSet

    def __post_init__(self):
        if self.length_m <= 0:
            raise ConfigurationError(f"crystal length must be > 0, got {self.length_m}")
        if self.gain < 0:
            raise ConfigurationError(f"gain must be >= 0, got {self.gain}")
        if not 0.0 < self.theta_rad < math.pi / 2:
            raise ConfigurationError(
                f"pump angle must lie in (0, pi/2) rad, got {self.theta_rad}")
        lo, hi = self.sellmeier.valid_range_um
        lam_p = self.pump_wavelength_m * 1e6
        if not lo <= lam_p <= hi:
            raise ConfigurationError(
                f"pump wavelength {lam_p:.4g} um outside Sellmeier range ({lo}, {hi})")
        if not lo <= 2 * lam_p <= hi:
            raise ConfigurationError(
                f"degenerate wavelength {2 * lam_p:.4g} um outside Sellmeier "
                f"range ({lo}, {hi})")

    @property
    def pump_omega(self):
        return 2 * math.pi * c / self.pump_wavelength_m

    @property
    def degenerate_omega(self):
        return self.pump_omega / 2

    def config_hash(self):
        """Short stable digest of every physics-relevant field."""
        text = "|".join([
            self.sellmeier.material,
            repr(self.sellmeier.ordinary),
            repr(self.sellmeier.extraordinary),
            repr(self.sellmeier.valid_range_um),
            repr(self.length_m),
            repr(self.theta_rad),
            repr(self.pump_wavelength_m),
            repr(self.gain),
        ])
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def delta_k(omega_s, k, cfg):
    """Longitudinal mismatch in rad/m; omega_s and k broadcast as arrays.

    Raises WavelengthRangeError when signal or idler leaves the Sellmeier
    range and EvanescentWaveError when |k| reaches the smaller of the two
    ordinary wavevectors; inputs are rejected, never clamped.
    """
    omega_s = np.asarray(omega_s, dtype=float)
    k = np.asarray(k, dtype=float)
    omega_i = cfg.pump_omega - omega_s
    if np.any(omega_s <= 0) or np.any(omega_i <= 0):
        raise WavelengthRangeError("signal frequency must lie inside (0, pump)")
    k_s = wavenumber(omega_s, ORDINARY, cfg.sellmeier)
    k_i = wavenumber(omega_i, ORDINARY, cfg.sellmeier)
    k_p = wavenumber(cfg.pump_omega, ExtraordinaryAtAngle(cfg.theta_rad),
                     cfg.sellmeier)
    k2 = np.square(k)
    limit = np.minimum(k_s, k_i)
    if np.any(k2 >= np.square(limit)):
        raise EvanescentWaveError(
            "transverse wavevector reaches the evanescent limit "
            f"(|k| max {np.sqrt(np.max(k2)):.4g}, limit {np.min(limit):.4g} rad/m)")
    value = k_p - np.sqrt(np.square(k_s) - k2) - np.sqrt(np.square(k_i) - k2)
    return value if value.ndim else float(value)


def collinear_degenerate_angle(pump_wavelength_m, sellmeier):
    """Pump angle theta_pm at which collinear degenerate emission is matched.

    Bisection on the collinear degenerate mismatch, resolved to 1e-9 rad so
    the residual |delta_k * L| stays below 1e-3 for centimeter crystals
    (the mismatch slope is ~1e6 rad/m per rad of pump angle). Raises
    RootNotFoundError when no sign change exists in (0, pi/2).
    """
    omega_p = 2 * math.pi * c / pump_wavelength_m
    k_degen = 2 * wavenumber(omega_p / 2, ORDINARY, sellmeier)

    def mismatch(theta):
        return wavenumber(omega_p, ExtraordinaryAtAngle(theta), sellmeier) - k_degen

    thetas = np.linspace(1e-3, math.pi / 2 - 1e-3, 181)
    vals = np.array([mismatch(t) for t in thetas])
    crossings = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if crossings.size == 0:
        raise RootNotFoundError(
            f"no collinear degenerate phase matching for pump "
            f"{pump_wavelength_m * 1e9:.4g} nm in {sellmeier.material}")
    i = crossings[0]
    return float(bisect(mismatch, thetas[i], thetas[i + 1], xtol=1e-9))


def phase_matched_locus(cfg, omega_grid):
    """Nonnegative ring radii k with delta_k(omega, k) = 0, one per frequency.

    Returns a list of (omega, k_ring) for every grid frequency where a root
    exists; frequencies without a root (or outside the dispersion range)
    contribute nothing. Radii solve |delta_k * L| < 1e-3 by bisection.
    """
    points = []
    for omega in np.atleast_1d(np.asarray(omega_grid, dtype=float)):
        try:
            at_axis = delta_k(omega, 0.0, cfg)
        except WavelengthRangeError:
            continue
        if abs(at_axis) * cfg.length_m <= _LOCUS_TOL:
            points.append((float(omega), 0.0))
            continue
        if at_axis > 0:
            continue  # mismatch only grows with |k|
        omega_i = cfg.pump_omega - omega
        limit = min(wavenumber(omega, ORDINARY, cfg.sellmeier),
                    wavenumber(omega_i, ORDINARY, cfg.sellmeier)) * 0.999
        lo, hi = 0.0, limit / 1024
        while hi < limit and delta_k(omega, hi, cfg) < 0:
            lo, hi = hi, hi * 2
        if hi >= limit or delta_k(omega, hi, cfg) < 0:
            continue
        root = bisect(lambda k: delta_k(omega, k, cfg), lo, hi, xtol=1.0)
        if abs(delta_k(omega, root, cfg)) * cfg.length_m < _LOCUS_TOL:
            points.append((float(omega), float(root)))
    return points


def external_angle(k, wavelength_m):
    """Emission angle outside the crystal for transverse wavevector k."""
    return k * wavelength_m / (2 * math.pi)
