"""Emulator of the beam-splitter-scanning Mach-Zehnder measurement.

One retroreflector sets the time delay (double pass: 2/c per meter of
stage travel); translating the second beam splitter displaces one beam,
which shows up as a transverse shift xi in the crystal near-field plane
and, inseparably, as an extra time delay. Fringe traces are synthesized
from a CoherenceMap, their visibility envelopes extracted with a sliding
window, and stepped-BS2 trace sets reassembled into |g1|(tau, xi).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c

from .errors import ConfigurationError, SamplingError


@dataclass(frozen=True)
class InterferometerConfig:
    """Geometry and calibration constants of the interferometer.

    The BS2 coupling coefficients default to a 45-degree thin-splitter
    geometry: one meter of BS2 travel displaces the beam one meter
    (1/magnification in the crystal plane) and lengthens the arm one
    meter (1/c of delay). Both are calibration inputs; override them
    when the real kinematics are known.
    """

    split_ratio: tuple = (0.5, 0.5)
    magnification: float = 6.6
    shift_to_xi: float = None
    shift_to_delay: float = None
    stage_to_delay: float = 2.0 / c

    def __post_init__(self):
        r1, r2 = self.split_ratio
        if not (0 < r1 < 1 and 0 < r2 < 1 and abs(r1 + r2 - 1) < 1e-9):
            raise ConfigurationError(
                f"split ratios must lie in (0,1) and sum to 1, got {self.split_ratio}")
        if self.magnification <= 0:
            raise ConfigurationError("magnification must be positive")
        if self.shift_to_xi is None:
            object.__setattr__(self, "shift_to_xi", 1.0 / self.magnification)
        if self.shift_to_delay is None:
            object.__setattr__(self, "shift_to_delay", 1.0 / c)

    def config_hash(self):
        text = "|".join(repr(v) for v in (
            self.split_ratio, self.magnification, self.shift_to_xi,
            self.shift_to_delay, self.stage_to_delay))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def fringe_amplitude(self):
        """2 sqrt(r1 r2): visibility of a fully coherent trace."""
        return 2.0 * math.sqrt(self.split_ratio[0] * self.split_ratio[1])


@dataclass
class FringeTrace:
    """Detector intensity versus delay-stage position at one BS2 setting."""

    positions_m: np.ndarray
    intensities: np.ndarray
    bs2_position_m: float
    tau_offset_s: float
    carrier_omega: float
    orientation: str = ""
    source: str = "synthetic"
    icfg_hash: str = ""

    def __post_init__(self):
        self.positions_m = np.asarray(self.positions_m, dtype=float)
        self.intensities = np.asarray(self.intensities, dtype=float)
        if self.positions_m.size != self.intensities.size:
            raise ConfigurationError("positions and intensities differ in length")
        if self.positions_m.size < 2 or np.any(np.diff(self.positions_m) <= 0):
            raise ConfigurationError("stage positions must increase strictly")
        if np.any(self.intensities < 0):
            raise ConfigurationError("detector intensities must be nonnegative")


def fringe_period_path_m(carrier_omega):
    """Optical path difference per fringe: the carrier wavelength."""
    return 2.0 * math.pi * c / carrier_omega


def fringe_period_stage_m(carrier_omega):
    """Stage travel per fringe; the double pass halves the path period."""
    return math.pi * c / carrier_omega


def detector_signal(cmap, tau, xi, icfg):
    """Two-beam interference level at the given delay and displacement.

    I = (r1 + r2) + 2 sqrt(r1 r2) Re[g1(tau, xi) e^{-i omega_c tau}],
    in units of the incoherent sum, which is 1 for ratios summing to 1.
    """
    r1, r2 = icfg.split_ratio
    term = np.real(cmap.full_value_at(tau, xi))
    return (r1 + r2) + 2.0 * math.sqrt(r1 * r2) * term


def synthesize_trace(cmap, icfg, bs2_position_m=0.0, stage_center_m=0.0,
                     stage_span_m=None, n_samples=None, orientation=""):
    """Sample a fringe trace along a delay-stage sweep.

    The sweep must cover at least 3 fringes with at least 8 samples per
    fringe; the default sampling is 20 per fringe. The BS2-induced extra
    delay enters the synthesized signal and is recorded as tau_offset_s
    so analysis can realign the trace.
    """
    period = fringe_period_stage_m(cmap.carrier_omega)
    if stage_span_m is None:
        stage_span_m = 4.0 * period
    fringes = stage_span_m / period
    if fringes < 3.0:
        raise SamplingError(
            f"sweep spans {fringes:.2f} fringes; cover at least 3")
    if n_samples is None:
        n_samples = int(math.ceil(20.0 * fringes)) + 1
    if (n_samples - 1) / fringes < 8.0:
        raise SamplingError(
            f"{(n_samples - 1) / fringes:.1f} samples per fringe; "
            "Nyquist margin requires at least 8")
    positions = stage_center_m + (np.arange(n_samples) / (n_samples - 1)
                                  - 0.5) * stage_span_m
    tau_offset = bs2_position_m * icfg.shift_to_delay
    tau = positions * icfg.stage_to_delay + tau_offset
    xi = bs2_position_m * icfg.shift_to_xi
    intensities = detector_signal(cmap, tau, np.full_like(tau, xi), icfg)
    return FringeTrace(positions_m=positions, intensities=intensities,
                       bs2_position_m=bs2_position_m, tau_offset_s=tau_offset,
                       carrier_omega=cmap.carrier_omega,
                       orientation=orientation, icfg_hash=icfg.config_hash())


def _parabolic_extremum(y0, y1, y2):
    """Vertex value of the parabola through three uniform samples."""
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return y1
    return y1 - (y0 - y2) ** 2 / (8.0 * denom)


def extract_visibility(trace, icfg, window_fringes=1.0):
    """Sliding-window fringe visibility along a trace.

    Each window one fringe long (by default) yields (I_max - I_min) /
    (I_max + I_min) with the extrema refined parabolically, positioned at
    the window center. Returns (tau_s, visibility) with tau from the
    stage positions alone; the BS2 delay offset recorded on the trace is
    deliberately not applied here (assemble_map undoes it).
    """
    if trace.icfg_hash and trace.icfg_hash != icfg.config_hash():
        raise ConfigurationError(
            "trace was recorded under a different interferometer configuration")
    steps = np.diff(trace.positions_m)
    step = steps.mean()
    if np.max(np.abs(steps - step)) > 0.01 * step:
        raise SamplingError(
            "stage sampling varies by more than 1%; resample the trace first")
    period = fringe_period_stage_m(trace.carrier_omega)
    per_fringe = period / step
    if per_fringe < 8.0:
        raise SamplingError(
            f"{per_fringe:.1f} samples per fringe; at least 8 are needed")
    if window_fringes < 1.0:
        raise ConfigurationError("window must cover at least one fringe")
    w = int(round(window_fringes * per_fringe)) + 1
    n = trace.positions_m.size
    if w > n:
        raise SamplingError("window is longer than the trace")

    def refined(idx, values):
        if 0 < idx < values.size - 1:
            return _parabolic_extremum(values[idx - 1], values[idx], values[idx + 1])
        return values[idx]

    taus = np.empty(n - w + 1)
    vis = np.empty(n - w + 1)
    for i in range(n - w + 1):
        window = trace.intensities[i:i + w]
        crest = refined(int(np.argmax(window)), window)
        trough = refined(int(np.argmin(window)), window)
        vis[i] = (crest - trough) / (crest + trough)
        center = 0.5 * (trace.positions_m[i] + trace.positions_m[i + w - 1])
        taus[i] = center * icfg.stage_to_delay
    return taus, vis


@dataclass
class AssembledMap:
    """|g1| reconstruction on a uniform (tau, xi) grid; rows run along tau."""

    tau_axis: np.ndarray
    xi_axis: np.ndarray
    magnitude: np.ndarray
    provenance: dict = field(default_factory=dict)


def assemble_map(traces, icfg, window_fringes=1.0):
    """Rebuild |g1|(tau, xi) from traces taken at stepped BS2 positions.

    Per-trace envelopes are divided by the split-ratio visibility ceiling,
    shifted by their recorded BS2 delay offsets, and linearly resampled
    onto the common tau range; xi comes from the BS2 kinematics. A single
    trace yields a one-column map of its own envelope.
    """
    if not traces:
        raise ConfigurationError("no traces given")
    if len(traces) == 2:
        raise ConfigurationError(
            "a two-trace map is ambiguous; supply one trace or at least 3")
    hashes = {t.icfg_hash for t in traces if t.icfg_hash}
    if len(hashes) > 1 or (hashes and hashes != {icfg.config_hash()}):
        raise ConfigurationError("traces mix interferometer configurations")
    if len({t.carrier_omega for t in traces}) > 1:
        raise ConfigurationError("traces mix carrier frequencies")

    scale = icfg.fringe_amplitude / sum(icfg.split_ratio)
    envelopes = []
    for t in sorted(traces, key=lambda t: t.bs2_position_m):
        tau, vis = extract_visibility(t, icfg, window_fringes)
        envelopes.append((tau + t.tau_offset_s, vis / scale,
                          t.bs2_position_m * icfg.shift_to_xi))

    xi_axis = np.array([xi for _, _, xi in envelopes])
    if len(envelopes) == 1:
        tau, mag, _ = envelopes[0]
        return AssembledMap(tau_axis=tau, xi_axis=xi_axis,
                            magnitude=mag[:, None],
                            provenance={"icfg_hash": icfg.config_hash(),
                                        "n_traces": 1})
    dxi = np.diff(xi_axis)
    if np.any(dxi <= 0) or np.max(np.abs(dxi - dxi.mean())) > 0.01 * abs(dxi.mean()):
        raise ConfigurationError(
            "BS2 positions must step uniformly for a uniform xi axis")

    lo = max(t[0][0] for t in envelopes)
    hi = min(t[0][-1] for t in envelopes)
    if hi <= lo:
        raise ConfigurationError("traces share no common delay range")
    step = float(np.median([t[0][1] - t[0][0] for t in envelopes]))
    n = int(math.floor((hi - lo) / step)) + 1
    tau_axis = lo + np.arange(n) * step
    magnitude = np.column_stack(
        [np.interp(tau_axis, tau, mag) for tau, mag, _ in envelopes])
    return AssembledMap(tau_axis=tau_axis, xi_axis=xi_axis,
                        magnitude=magnitude,
                        provenance={"icfg_hash": icfg.config_hash(),
                                    "n_traces": len(envelopes),
                                    "window_fringes": window_fringes})
