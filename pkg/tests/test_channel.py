"""Tests for the spatio-temporal channel statistics."""

import math

import numpy as np
import pytest

from agingmimo.channel import (
    TEMPORAL_LAWS,
    ChannelStats,
    UserParams,
    build_channel_stats,
    build_spatial_correlation,
    cross_covariance,
    gaussian_correlation,
    joint_covariance,
    rician_mean,
    steering_vector,
    temporal_correlation,
    transition_matrix,
)
from agingmimo.config import default_config


def bessel_j0_series(x, terms=40):
    """Power-series J0 used as an independent oracle (converges for |x| < ~20)."""
    total = 0.0
    term = 1.0
    for k in range(terms):
        if k > 0:
            term *= -(x / 2.0) ** 2 / (k * k)
        total += term
    return total


class TestTemporalLaws:
    def test_jakes_matches_series_oracle(self):
        for f_d, dt in [(0.1, 1.0), (0.1, 4.0), (0.05, 2.0), (0.3, 1.0), (0.0, 7.0)]:
            got = temporal_correlation(f_d, dt)
            want = bessel_j0_series(2.0 * math.pi * f_d * dt)
            assert abs(got - want) < 1e-12

    def test_jakes_unit_lag_value(self):
        # J0(0.2*pi) for the default Doppler at one-slot lag.
        assert abs(temporal_correlation(0.1, 1.0) - 0.9037126) < 1e-6

    def test_zero_doppler_is_static(self):
        for law in TEMPORAL_LAWS.values():
            assert law(0.0, 123.0) == 1.0

    def test_zero_lag_is_unity(self):
        for law in TEMPORAL_LAWS.values():
            assert law(0.37, 0.0) == 1.0

    def test_symmetric_in_lag_sign(self):
        for law in TEMPORAL_LAWS.values():
            assert abs(law(0.2, 3.0) - law(0.2, -3.0)) < 1e-15

    def test_gaussian_closed_form(self):
        x = math.pi * 0.1 * 2.0
        assert abs(gaussian_correlation(0.1, 2.0) - math.exp(-x * x)) < 1e-15

    def test_laws_agree_to_second_order(self):
        # Both laws expand as 1 - (pi f_d dt)^2 + O(dt^4).
        f_d, dt = 0.1, 0.01
        x = math.pi * f_d * dt
        diff = abs(temporal_correlation(f_d, dt) - gaussian_correlation(f_d, dt))
        assert diff < 10.0 * x ** 4

    def test_gaussian_monotone_jakes_oscillates(self):
        lags = np.arange(0, 20)
        g = [gaussian_correlation(0.3, t) for t in lags]
        j = [temporal_correlation(0.3, t) for t in lags]
        assert all(b <= a + 1e-15 for a, b in zip(g, g[1:]))
        assert min(j) < 0.0  # first Bessel lobe goes negative

    def test_negative_doppler_rejected(self):
        with pytest.raises(ValueError):
            temporal_correlation(-0.1, 1.0)


class TestSpatialCorrelation:
    def test_extremes(self):
        assert np.array_equal(build_spatial_correlation(0.0, 3), np.eye(3))
        assert np.array_equal(build_spatial_correlation(1.0, 2), np.ones((2, 2)))

    def test_structure(self):
        r = build_spatial_correlation(0.9, 4)
        assert np.allclose(np.diag(r), 1.0)
        off = r[~np.eye(4, dtype=bool)]
        assert np.allclose(off, 0.9)

    def test_psd(self):
        for rho in (0.0, 0.3, 0.9, 1.0):
            w = np.linalg.eigvalsh(build_spatial_correlation(rho, 5))
            assert w.min() > -1e-12

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            build_spatial_correlation(1.5, 3)
        with pytest.raises(ValueError):
            build_spatial_correlation(-0.1, 3)


class TestSteeringAndMean:
    def test_broadside_is_all_ones(self):
        assert np.allclose(steering_vector(4, 0.0), np.ones(4))

    def test_unit_modulus(self):
        v = steering_vector(8, 37.0)
        assert np.allclose(np.abs(v), 1.0)

    def test_mean_power_fraction(self):
        cfg = default_config()
        user = UserParams(f_d=0.1, k_f=3.0, aoa_deg=20.0, aod_deg=-10.0)
        m = rician_mean(cfg, user)
        n = cfg.n_r * cfg.n_t
        want = n * user.sigma_h2 * user.k_f / (user.k_f + 1.0)
        assert abs(np.vdot(m, m).real - want) < 1e-9 * want

    def test_rayleigh_mean_is_zero(self):
        cfg = default_config()
        m = rician_mean(cfg, UserParams(f_d=0.1, k_f=0.0))
        assert np.allclose(m, 0.0)


class TestBuildChannelStats:
    def test_total_power_independent_of_rician_factor(self):
        # ||mean||^2 + trace(spatial_cov) == sigma_h2 * N for every k_f.
        cfg = default_config()
        n = cfg.n_r * cfg.n_t
        for k_f in (0.0, 1.0, 10.0, 1000.0):
            st = build_channel_stats(cfg, UserParams(f_d=0.1, k_f=k_f))
            total = np.vdot(st.mean, st.mean).real + np.trace(st.spatial_cov).real
            assert abs(total - n) < 1e-9 * n

    def test_spatial_cov_is_kron_of_uniform_factors(self):
        cfg = default_config().replace(n_t=2, n_r=3, rho_t=0.9, rho_r=0.2)
        st = build_channel_stats(cfg, UserParams(f_d=0.1))
        want = np.kron(build_spatial_correlation(0.9, 2), build_spatial_correlation(0.2, 3))
        assert np.max(np.abs(st.spatial_cov - want)) < 1e-12

    def test_large_k_f_limit(self):
        cfg = default_config()
        st = build_channel_stats(cfg, UserParams(f_d=0.1, k_f=1e9))
        assert np.trace(st.spatial_cov).real < 1e-6 * cfg.n_r * cfg.n_t

    def test_law_selection(self):
        cfg = default_config()
        st_j = build_channel_stats(cfg, UserParams(f_d=0.2), law="jakes")
        st_g = build_channel_stats(cfg, UserParams(f_d=0.2), law="gaussian")
        assert abs(st_j.temporal_corr(1.0, 0.0) - temporal_correlation(0.2, 1.0)) < 1e-15
        assert abs(st_g.temporal_corr(1.0, 0.0) - gaussian_correlation(0.2, 1.0)) < 1e-15

    def test_config_default_law_applies(self):
        cfg = default_config()  # ships with the monotone law
        st = build_channel_stats(cfg, UserParams(f_d=0.2))
        assert abs(st.temporal_corr(1.0, 0.0) - gaussian_correlation(0.2, 1.0)) < 1e-15

    def test_callable_law(self):
        cfg = default_config()
        st = build_channel_stats(cfg, UserParams(f_d=0.5), law=lambda f, dt: 0.25)
        assert st.temporal_corr(3.0, 1.0) == 0.25


class TestDerivedStats:
    def setup_method(self):
        self.cfg = default_config().replace(n_t=2, n_r=3)
        self.stats = build_channel_stats(self.cfg, UserParams(f_d=0.1))

    def test_cross_covariance_scales_spatial(self):
        rho = self.stats.temporal_corr(4.0, 1.0)
        c = cross_covariance(self.stats, 4.0, 1.0)
        assert np.max(np.abs(c - rho * self.stats.spatial_cov)) < 1e-12

    def test_transition_is_scaled_identity(self):
        # Separable model: one-step predictor collapses to rho * I.
        rho = self.stats.temporal_corr(2.0, 0.0)
        a = transition_matrix(self.stats, 2.0, 0.0)
        assert np.max(np.abs(a - rho * np.eye(self.stats.dim))) < 1e-8

    def test_joint_covariance_blocks_and_psd(self):
        times = [0.0, 3.0, 5.0, 6.0]
        j = joint_covariance(self.stats, times)
        n = self.stats.dim
        assert j.shape == (4 * n, 4 * n)
        blk = j[0:n, 2 * n:3 * n]
        assert np.max(np.abs(blk - cross_covariance(self.stats, 0.0, 5.0))) < 1e-12
        w = np.linalg.eigvalsh(j)
        assert w.min() > -1e-8

    def test_joint_covariance_zero_doppler_rank(self):
        # Static channel: every block equals the spatial covariance.
        st = build_channel_stats(self.cfg, UserParams(f_d=0.0))
        j = joint_covariance(st, [0.0, 4.0])
        n = st.dim
        assert np.max(np.abs(j[0:n, n:2 * n] - st.spatial_cov)) < 1e-12


class TestUserParamsValidation:
    def test_defaults_accepted(self):
        u = UserParams(f_d=0.1)
        assert u.alpha == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"f_d": -0.1},
            {"f_d": 0.1, "k_f": -1.0},
            {"f_d": 0.1, "alpha": 0.0},
            {"f_d": 0.1, "p_p_max": 0.0},
            {"f_d": 0.1, "p_d": -1.0},
            {"f_d": 0.1, "sigma_p2": 0.0},
            {"f_d": 0.1, "sigma_h2": -2.0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            UserParams(**kwargs)
