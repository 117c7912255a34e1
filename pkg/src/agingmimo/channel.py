"""Per-user spatio-temporal channel statistics.

The spatial model is a transmit-(x)-receive Kronecker product of uniform
(single-coefficient) correlation matrices plus an optional non-fading
line-of-sight mean (Rician factor ``k_f``).  Temporal decorrelation is a
pluggable scalar law of the lag; the classical Clarke--Jakes Bessel
autocorrelation and a curvature-matched monotone Gaussian decay are shipped.
Time is measured in slots (unit sampling interval).
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np
from scipy.special import j0

from .matops import DimensionMismatch, herm_solve, hermitize, vec


@dataclasses.dataclass(frozen=True)
class UserParams:
    """Physical parameters of one uplink user.

    ``alpha`` is the linear path-loss amplitude (``PL_dB = 20*log10(alpha)``),
    ``p_p_max`` the total pilot power budget shared by all frames, ``p_d``
    the per-slot data power, ``sigma_p2`` the per-element pilot noise
    variance and ``sigma_h2`` the total channel power per receive antenna.
    """

    f_d: float
    k_f: float = 0.0
    alpha: float = 1.0
    p_p_max: float = 1.0
    p_d: float = 1.0
    sigma_p2: float = 0.01
    sigma_h2: float = 1.0
    aoa_deg: float = 0.0
    aod_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.f_d < 0.0:
            raise ValueError("f_d must be >= 0")
        if self.k_f < 0.0:
            raise ValueError("k_f must be >= 0")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be > 0")
        if self.p_p_max <= 0.0:
            raise ValueError("p_p_max must be > 0")
        if self.p_d < 0.0:
            raise ValueError("p_d must be >= 0")
        if self.sigma_p2 <= 0.0:
            raise ValueError("sigma_p2 must be > 0")
        if self.sigma_h2 <= 0.0:
            raise ValueError("sigma_h2 must be > 0")


@dataclasses.dataclass(frozen=True)
class ChannelStats:
    """First- and second-order statistics of one user's vectorised channel.

    ``mean`` is the (time-constant) line-of-sight component of ``vec(H)``,
    ``spatial_cov`` the covariance of the scattered part at any single time,
    and ``temporal_corr(t1, t2)`` the scalar correlation of the scattered
    part between two slot times.
    """

    mean: np.ndarray
    spatial_cov: np.ndarray
    temporal_corr: Callable[[float, float], float]
    n_r: int
    n_t: int

    @property
    def dim(self) -> int:
        return self.n_r * self.n_t


def temporal_correlation(f_d: float, dt: float) -> float:
    """Clarke--Jakes autocorrelation ``J0(2 pi f_d dt)`` of an isotropic fade."""
    if f_d < 0.0:
        raise ValueError("f_d must be >= 0")
    return float(j0(2.0 * np.pi * f_d * dt))


def gaussian_correlation(f_d: float, dt: float) -> float:
    """Monotone squared-exponential decay ``exp(-(pi f_d dt)^2)``.

    Matches the Jakes law to second order in the lag but never oscillates,
    so estimate quality decays monotonically with pilot distance.
    """
    if f_d < 0.0:
        raise ValueError("f_d must be >= 0")
    x = np.pi * f_d * dt
    return float(np.exp(-x * x))


TEMPORAL_LAWS: dict[str, Callable[[float, float], float]] = {
    "jakes": temporal_correlation,
    "gaussian": gaussian_correlation,
}


def build_spatial_correlation(rho: float, n: int) -> np.ndarray:
    """Uniform correlation matrix ``rho * 11^T + (1 - rho) * I`` of size n."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("correlation coefficient must lie in [0, 1]")
    if n < 1:
        raise DimensionMismatch("matrix size must be >= 1")
    return rho * np.ones((n, n)) + (1.0 - rho) * np.eye(n)


def steering_vector(n: int, angle_deg: float) -> np.ndarray:
    """Unit-modulus steering vector of a half-wavelength uniform linear array."""
    phase = np.pi * np.sin(np.deg2rad(angle_deg)) * np.arange(n)
    return np.exp(1j * phase)


def rician_mean(cfg, user: UserParams) -> np.ndarray:
    """Line-of-sight component of ``vec(H)`` for the given Rician factor.

    The LoS part is the rank-one outer product of receive and transmit
    steering vectors, scaled so that ``||mean||^2 = N * sigma_h2 * k_f / (k_f + 1)``.
    """
    a_r = steering_vector(cfg.n_r, user.aoa_deg)
    a_t = steering_vector(cfg.n_t, user.aod_deg)
    scale = np.sqrt(user.sigma_h2 * user.k_f / (user.k_f + 1.0))
    return scale * vec(np.outer(a_r, a_t.conj()))


def build_channel_stats(cfg, user: UserParams, law=None) -> ChannelStats:
    """Assemble a user's :class:`ChannelStats` from the system geometry.

    ``law`` names a temporal-correlation law from :data:`TEMPORAL_LAWS` (or is
    a callable ``(f_d, dt) -> rho``); when omitted the config's
    ``temporal_law`` applies.
    """
    if law is None:
        law = getattr(cfg, "temporal_law", "jakes")
    law_fn = TEMPORAL_LAWS[law] if isinstance(law, str) else law
    r_tx = build_spatial_correlation(cfg.rho_t, cfg.n_t)
    r_rx = build_spatial_correlation(cfg.rho_r, cfg.n_r)
    spatial = (user.sigma_h2 / (user.k_f + 1.0)) * np.kron(r_tx, r_rx)
    f_d = user.f_d

    def corr(t1: float, t2: float) -> float:
        return law_fn(f_d, t1 - t2)

    return ChannelStats(
        mean=rician_mean(cfg, user).astype(np.complex128),
        spatial_cov=spatial.astype(np.complex128),
        temporal_corr=corr,
        n_r=cfg.n_r,
        n_t=cfg.n_t,
    )


def cross_covariance(stats: ChannelStats, t1: float, t2: float) -> np.ndarray:
    """Covariance ``E[h~(t1) h~(t2)^H]`` of the scattered channel part."""
    return stats.temporal_corr(t1, t2) * stats.spatial_cov


def transition_matrix(stats: ChannelStats, t1: float, t2: float) -> np.ndarray:
    """Autoregression matrix ``A`` with ``h~(t1) = A h~(t2) + innovation``.

    ``A = C(t1, t2) C(t2)^{-1}``, which for a separable model collapses to
    ``temporal_corr(t1, t2) * I``.
    """
    c12 = cross_covariance(stats, t1, t2)
    # A = C12 @ C2^{-1}  via  A^H = C2^{-1} @ C12^H
    return herm_solve(stats.spatial_cov, c12.conj().T).conj().T


def joint_covariance(stats: ChannelStats, times) -> np.ndarray:
    """Stacked covariance of ``[h~(t) for t in times]`` (block ``(a, b)`` is
    ``cross_covariance(t_a, t_b)``)."""
    times = list(times)
    n = stats.dim
    out = np.empty((len(times) * n, len(times) * n), dtype=np.complex128)
    for a, ta in enumerate(times):
        for b, tb in enumerate(times):
            out[a * n:(a + 1) * n, b * n:(b + 1) * n] = cross_covariance(stats, ta, tb)
    return hermitize(out)
