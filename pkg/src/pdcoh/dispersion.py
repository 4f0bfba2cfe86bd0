"""Refractive index, wavevector, and group-velocity dispersion for uniaxial crystals.

Coefficient sets use a fixed Sellmeier form with wavelength x in micrometers,

    n^2(x) = a + b / (x^2 - c) - d * x^2,

one (a, b, c, d) tuple per polarization branch. Shipped sets live in text
files under ``pdcoh/data`` together with their literature citations; custom
sets can be loaded from a path in the same format.

Conventions: wavelengths in micrometers, angular frequencies in rad/s,
wavevectors in rad/m, group-velocity dispersion in fs^2/mm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.constants import c
from scipy.optimize import bisect

from .errors import ConfigurationError, RootNotFoundError, WavelengthRangeError

SHIPPED_SETS = ("bbo_kato1986", "bbo_eimerl1987")

# |gvd| below this (fs^2/mm) counts as zero when scanning for a sign change;
# the finite-difference noise floor is ~3e-3 fs^2/mm, a real crossing slope
# is orders of magnitude steeper.
_GVD_ZERO_FLOOR = 1e-4


@dataclass(frozen=True)
class SellmeierSet:
    """One material's dispersion data: coefficients per branch, valid range."""

    material: str
    ordinary: tuple[float, float, float, float]
    extraordinary: tuple[float, float, float, float]
    valid_range_um: tuple[float, float]

    def validate(self):
        """Check physical invariants by sampling the valid range.

        Raises ConfigurationError if either branch fails to produce a real
        index above 1, or if the material is not negative uniaxial
        (principal extraordinary index below ordinary) across the range.
        """
        lo, hi = self.valid_range_um
        if not (0 < lo < hi):
            raise ConfigurationError(
                f"{self.material}: valid_range_um must be ordered and positive, "
                f"got ({lo}, {hi})")
        lam = np.linspace(lo, hi, 65)
        n_o2 = _n_squared(lam, self.ordinary)
        n_e2 = _n_squared(lam, self.extraordinary)
        for name, n2 in (("ordinary", n_o2), ("extraordinary", n_e2)):
            if not (np.all(np.isfinite(n2)) and np.all(n2 > 1.0)):
                raise ConfigurationError(
                    f"{self.material}: {name} index not real and above 1 "
                    f"over ({lo}, {hi}) um")
        if not np.all(n_e2 < n_o2):
            raise ConfigurationError(
                f"{self.material}: not negative uniaxial over ({lo}, {hi}) um")
        return self


@dataclass(frozen=True)
class Ordinary:
    """Ordinary branch: index independent of propagation direction."""


@dataclass(frozen=True)
class ExtraordinaryAtAngle:
    """Extraordinary branch for propagation at angle theta to the optic axis."""

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ConfigurationError(
                f"propagation angle must lie in [0, pi/2] rad, got {self.theta}")


ORDINARY = Ordinary()


def _n_squared(lam_um, coeffs):
    a, b, cc, d = coeffs
    lam2 = np.square(lam_um)
    return a + b / (lam2 - cc) - d * lam2


def _check_range(lam_um, s, branch):
    lo, hi = s.valid_range_um
    lam = np.asarray(lam_um)
    if np.any(lam < lo) or np.any(lam > hi):
        bad = lam[(lam < lo) | (lam > hi)]
        worst = float(bad.flat[0]) if bad.size else float(lam)
        raise WavelengthRangeError(
            f"{worst:.6g} um outside {s.material} {branch} valid range "
            f"({lo}, {hi}) um")


def index(lam_um, branch, s):
    """Refractive index at wavelength lam_um (micrometers) for a branch.

    For ExtraordinaryAtAngle(theta) the angle-tuned index follows
    1/n^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2, reducing to the
    ordinary index at theta = 0 and the principal extraordinary index at
    theta = pi/2. Accepts scalars or numpy arrays.
    """
    if isinstance(branch, Ordinary):
        _check_range(lam_um, s, "ordinary")
        return np.sqrt(_n_squared(lam_um, s.ordinary))
    if isinstance(branch, ExtraordinaryAtAngle):
        _check_range(lam_um, s, "extraordinary")
        n_o2 = _n_squared(lam_um, s.ordinary)
        n_e2 = _n_squared(lam_um, s.extraordinary)
        cos2 = math.cos(branch.theta) ** 2
        sin2 = math.sin(branch.theta) ** 2
        return 1.0 / np.sqrt(cos2 / n_o2 + sin2 / n_e2)
    raise ConfigurationError(f"unknown branch {branch!r}")


def wavenumber(omega, branch, s):
    """Wavevector magnitude k = n(omega) * omega / c in rad/m."""
    lam_um = 2e6 * math.pi * c / np.asarray(omega, dtype=float)
    return index(lam_um, branch, s) * np.asarray(omega) / c


def gvd(lam_um, branch, s, rel_step=1e-3):
    """Group-velocity dispersion d2k/domega2 in fs^2/mm.

    Central finite difference in angular frequency with step
    rel_step * omega; the three-point stencil must stay inside the valid
    wavelength range. 1 s^2/m equals 1e27 fs^2/mm.
    """
    omega = 2e6 * math.pi * c / np.asarray(lam_um, dtype=float)
    h = rel_step * omega
    for probe in (omega - h, omega + h):
        _check_range(2e6 * math.pi * c / probe, s, _branch_name(branch))
    k_minus = wavenumber(omega - h, branch, s)
    k_mid = wavenumber(omega, branch, s)
    k_plus = wavenumber(omega + h, branch, s)
    return (k_minus - 2.0 * k_mid + k_plus) / h**2 * 1e27


def _branch_name(branch):
    return "ordinary" if isinstance(branch, Ordinary) else "extraordinary"


def zero_dispersion_wavelength(branch, s, samples=129):
    """Wavelength (um) where gvd crosses zero, by bisection to 1e-4 um.

    Scans the valid range for a genuine sign change, treating |gvd| below
    the numerical zero floor as zero, so a dispersionless set reports
    RootNotFoundError instead of chasing rounding noise.
    """
    lo, hi = s.valid_range_um
    # shrink so the finite-difference stencil stays in range
    lam = np.linspace(lo * 1.01, hi * 0.99, samples)
    vals = np.array([gvd(x, branch, s) for x in lam])
    signs = np.where(np.abs(vals) < _GVD_ZERO_FLOOR, 0, np.sign(vals))
    nonzero = np.nonzero(signs)[0]
    bracket = None
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if signs[i] * signs[j] < 0:
            bracket = (lam[i], lam[j])
            break
    if bracket is None:
        raise RootNotFoundError(
            f"{s.material} {_branch_name(branch)}: no gvd sign change in "
            f"({lo}, {hi}) um")
    return float(bisect(lambda x: gvd(x, branch, s), *bracket, xtol=1e-4))


def load_sellmeier(source):
    """Load and validate a SellmeierSet.

    source is either a shipped set name (see SHIPPED_SETS) or a path to a
    text file in the same key = value format.
    """
    if source in SHIPPED_SETS:
        text = (resources.files("pdcoh") / "data" / f"{source}.txt").read_text()
        origin = source
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigurationError(
                f"unknown Sellmeier set {source!r}: not one of {SHIPPED_SETS} "
                f"and not a readable file")
        text = path.read_text()
        origin = str(path)
    return _parse_sellmeier(text, origin).validate()


def _parse_sellmeier(text, origin):
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{origin}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    missing = {"material", "ordinary", "extraordinary", "valid_range_um"} - set(fields)
    if missing:
        raise ConfigurationError(f"{origin}: missing keys {sorted(missing)}")

    def floats(key, count):
        parts = fields[key].split()
        if len(parts) != count:
            raise ConfigurationError(
                f"{origin}: {key} needs {count} numbers, got {len(parts)}")
        try:
            return tuple(float(p) for p in parts)
        except ValueError as exc:
            raise ConfigurationError(f"{origin}: {key}: {exc}") from None

    return SellmeierSet(
        material=fields["material"],
        ordinary=floats("ordinary", 4),
        extraordinary=floats("extraordinary", 4),
        valid_range_um=floats("valid_range_um", 2),
    )
