import math

import numpy as np
import pytest

from pdcoh import (
    CrystalConfig,
    EdgeDecayError,
    GridSpec,
    MapExtentError,
    ResolutionError,
    SpectralGrid,
    auto_grid,
    build_spectrum,
    load_sellmeier,
)
from pdcoh.coherence import (
    CoherenceMap,
    correlation_map,
    direct_correlation,
    factorability_defect,
    instrument_blur,
    metrics,
)

FWHM_SIGMA = 2.3548200450309493


@pytest.fixture(scope="module")
def sell():
    return load_sellmeier("bbo_kato1986")


def _cfg(theta_deg, sell):
    return CrystalConfig(length_m=0.01, theta_rad=math.radians(theta_deg),
                         pump_wavelength_m=800e-9, gain=6.0, sellmeier=sell)


@pytest.fixture(scope="module")
def map94(sell):
    return correlation_map(build_spectrum(_cfg(19.94, sell)))


def _gaussian_grid(sigma_w=2e13, sigma_k=1e4):
    spec = GridSpec(omega_center=1.2e15, omega_half_width=2e14,
                    n_omega=256, k_half_width=1e5, n_k=128)
    big_omega = spec.omega_axis() - spec.omega_center
    values = np.exp(-0.5 * (big_omega / sigma_w) ** 2)[:, None] \
        * np.exp(-0.5 * (spec.k_axis() / sigma_k) ** 2)[None, :]
    edge = max(values[0].max(), values[-1].max(),
               values[:, 0].max(), values[:, -1].max())
    return SpectralGrid(spec, values, {"edge_ratio": edge / values.max()})


def _gaussian_map(sigma_tau=2e-14, sigma_xi=4e-5, n=257, tau_step=1e-15,
                  xi_step=2e-6):
    tau = (np.arange(n) - n // 2) * tau_step
    xi = (np.arange(n) - n // 2) * xi_step
    g = np.exp(-0.5 * (tau / sigma_tau) ** 2)[:, None] \
        * np.exp(-0.5 * (xi / sigma_xi) ** 2)[None, :] + 0j
    return CoherenceMap(tau, xi, g, carrier_omega=1.2e15, intensity=1.0,
                        provenance={})


def test_center_is_one_exactly(map94):
    n = map94.tau_axis.size
    assert map94.g[n // 2, n // 2] == 1.0 + 0.0j
    assert map94.tau_axis[n // 2] == 0.0
    assert map94.xi_axis[n // 2] == 0.0


def test_magnitude_bounded(map94):
    assert np.abs(map94.g).max() <= 1 + 1e-9


def test_hermitian_symmetry(map94):
    assert np.max(np.abs(map94.g[::-1, ::-1] - np.conj(map94.g))) < 1e-9


def test_zero_lag_intensity_is_grid_sum(map94, sell):
    sg = build_spectrum(_cfg(19.94, sell))
    cell = sg.spec.omega_step * sg.spec.k_step
    assert map94.intensity == pytest.approx(sg.values.sum() * cell, rel=1e-9)


def test_refuses_undecayed_grid(sell):
    sg = build_spectrum(_cfg(19.94, sell))
    bad = SpectralGrid(sg.spec, sg.values, {"edge_ratio": 0.02})
    with pytest.raises(EdgeDecayError, match="widen"):
        correlation_map(bad)
    with pytest.raises(EdgeDecayError):
        correlation_map(SpectralGrid(sg.spec, sg.values, {}))


def test_separable_gaussian_factorizes():
    sg = _gaussian_grid()
    cm = correlation_map(sg)
    assert factorability_defect(cm) < 1e-6
    # continuous-transform envelope, exact for a well-sampled Gaussian pair
    expected = np.exp(-0.5 * (2e13 * cm.tau_axis) ** 2)[:, None] \
        * np.exp(-0.5 * (1e4 * cm.xi_axis) ** 2)[None, :]
    assert np.max(np.abs(np.abs(cm.g) - expected)) < 1e-8


def test_delta_spectrum_is_fully_coherent():
    spec = GridSpec(omega_center=1.2e15, omega_half_width=2e14,
                    n_omega=128, k_half_width=1e5, n_k=64)
    values = np.zeros((128, 64))
    values[64, 32] = 1.0
    cm = correlation_map(SpectralGrid(spec, values, {"edge_ratio": 0.0}))
    assert np.max(np.abs(np.abs(cm.g) - 1.0)) < 1e-12


def test_ring_spectrum_couples_time_and_space(map94):
    assert factorability_defect(map94) > 0.1


def test_transform_matches_direct_quadrature(sell):
    cfg = _cfg(19.94, sell)
    sg = build_spectrum(cfg, auto_grid(cfg, n_omega=256, n_k=256))
    cm = correlation_map(sg)
    rng = np.random.default_rng(11)
    idx = rng.integers(0, cm.tau_axis.size, size=(40, 2))
    for i, j in idx:
        direct = direct_correlation(sg, cm.tau_axis[i], cm.xi_axis[j])
        envelope = cm.g[i, j] * np.exp(-1j * cm.carrier_omega * cm.tau_axis[i])
        assert abs(direct - envelope) < 1e-6


def test_direct_correlation_normalizes_at_zero(sell):
    sg = build_spectrum(_cfg(19.94, sell))
    assert direct_correlation(sg, 0.0, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_correlation_decays_far_outside(sell):
    sg = build_spectrum(_cfg(19.94, sell))
    assert abs(direct_correlation(sg, 1.5e-12, 0.0)) < 1e-2
    assert abs(direct_correlation(sg, 0.0, 3e-3)) < 1e-2


def test_value_at_interpolates_and_checks_extent(map94):
    n = map94.tau_axis.size
    assert map94.value_at(0.0, 0.0) == 1.0 + 0.0j
    mid_tau = 0.5 * (map94.tau_axis[600] + map94.tau_axis[601])
    v = map94.value_at(mid_tau, 0.0)
    lo, hi = map94.g[600, n // 2], map94.g[601, n // 2]
    assert v == pytest.approx(0.5 * (lo + hi), rel=1e-12)
    with pytest.raises(MapExtentError):
        map94.value_at(map94.tau_axis[-1] * 1.01, 0.0)


def test_full_value_restores_carrier(map94):
    tau = map94.tau_axis[700]
    full = map94.full_value_at(tau, 0.0)
    assert abs(full) == pytest.approx(abs(map94.value_at(tau, 0.0)), rel=1e-12)
    assert full == pytest.approx(map94.value_at(tau, 0.0)
                                 * np.exp(-1j * map94.carrier_omega * tau))


def test_metric_values_for_the_three_orientations(sell):
    # frozen from an independent quadrature pipeline; grid-converged
    expected = {19.87: (27.949e-15, 72.079e-6, 0.0728),
                19.90: (22.292e-15, 56.826e-6, 0.1447),
                19.94: (16.816e-15, 42.020e-6, 0.2657)}
    rings = []
    for theta, (tau_c, xi_c, ring) in expected.items():
        m = metrics(correlation_map(build_spectrum(_cfg(theta, sell))))
        assert m.tau_c == pytest.approx(tau_c, rel=5e-3), theta
        assert m.xi_c == pytest.approx(xi_c, rel=5e-3), theta
        assert m.first_ring_height == pytest.approx(ring, abs=5e-3), theta
        rings.append(m.first_ring_height)
    assert rings[0] < rings[1] < rings[2]


def test_metrics_on_synthetic_gaussian():
    m = metrics(_gaussian_map())
    assert m.tau_c == pytest.approx(FWHM_SIGMA * 2e-14, rel=5e-3)
    assert m.xi_c == pytest.approx(FWHM_SIGMA * 4e-5, rel=5e-3)
    assert m.first_ring_height == 0.0
    assert m.tau_cut.size == m.tau_axis.size


def test_metrics_needs_eight_samples_per_width():
    # 2.35 sigma of 1.5 steps ~ 3.5 samples across the peak
    coarse = _gaussian_map(sigma_tau=1.5e-15, n=65)
    with pytest.raises(ResolutionError) as err:
        metrics(coarse)
    assert err.value.refine_factor >= 2


def test_metrics_needs_the_crossing_inside_the_map():
    wide = _gaussian_map(sigma_tau=1e-12, sigma_xi=1e-3)
    with pytest.raises(MapExtentError, match="extent"):
        metrics(wide)


def test_grid_convergence_of_downstream_metrics(sell):
    cfg = _cfg(19.90, sell)
    coarse = metrics(correlation_map(build_spectrum(cfg, auto_grid(cfg, 512, 256))))
    fine = metrics(correlation_map(build_spectrum(cfg, auto_grid(cfg, 1024, 512))))
    assert coarse.tau_c == pytest.approx(fine.tau_c, rel=1e-2)
    assert coarse.xi_c == pytest.approx(fine.xi_c, rel=1e-2)


def test_blur_zero_is_identity(map94):
    out = instrument_blur(map94, 0.0, 0.0)
    assert np.array_equal(out.g, map94.g)
    assert out.g is not map94.g


def test_blur_keeps_phase_and_caps_peak(map94):
    out = instrument_blur(map94, 1e-15, 6e-6)
    assert np.abs(out.g).max() < 1.0
    assert np.abs(out.g).max() > 0.98
    mask = np.abs(map94.g) > 1e-3
    assert np.allclose(np.angle(out.g[mask]), np.angle(map94.g[mask]),
                       atol=1e-12)


def test_blur_widens_separable_gaussian_widths():
    cm = _gaussian_map()
    m0 = metrics(cm)
    mb = metrics(instrument_blur(cm, 5e-15, 1e-5))
    assert mb.tau_c > m0.tau_c
    assert mb.xi_c > m0.xi_c
    sigma = math.hypot(2e-14, 5e-15 / FWHM_SIGMA)
    assert mb.tau_c == pytest.approx(FWHM_SIGMA * sigma, rel=5e-3)


def test_blur_on_pdc_map_changes_widths_marginally(map94):
    # the 2D kernel couples the axes: tau_c may shrink, but only by a
    # fraction of the blur width itself
    m0 = metrics(map94)
    mb = metrics(instrument_blur(map94, 1e-15, 6e-6))
    assert mb.tau_c > m0.tau_c - 0.5e-15
    assert mb.xi_c > m0.xi_c - 3e-6
    assert mb.xi_c < m0.xi_c * 1.05


def test_blur_kernel_must_fit_the_map(map94):
    span = map94.tau_axis[-1] - map94.tau_axis[0]
    with pytest.raises(MapExtentError, match="kernel"):
        instrument_blur(map94, 2 * span, 0.0)
    with pytest.raises(MapExtentError):
        instrument_blur(map94, -1e-15, 0.0)


def test_provenance_flows_through(map94, sell):
    assert map94.provenance["config_hash"] == _cfg(19.94, sell).config_hash()
    out = instrument_blur(map94, 1e-15, 6e-6)
    assert out.provenance["blur_tau_s"] == 1e-15
    assert map94.provenance.get("blur_tau_s") is None
