"""Linear MMSE channel estimation from aged pilots.

Each frame's pilot gives a matched-filter observation of the scattered
channel at the pilot time, corrupted by white noise of effective variance
``beta`` (pilot noise referred through code length, path loss and the
per-frame pilot power split).  The estimator interpolates those snapshots
to any data slot; the estimate and its error are uncorrelated, so the
error covariance is the prior minus the estimate covariance.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .channel import ChannelStats, UserParams, cross_covariance
from .matops import hermitize, herm_solve, psd_clamp


@dataclasses.dataclass(frozen=True)
class SlotStats:
    """Second-order estimation statistics of one user at one data slot.

    ``c_hat`` is the covariance of the scattered-part estimate, ``err_cov``
    the covariance of the estimation error, and ``r_z`` the full covariance
    of the known signal component (estimate plus line-of-sight mean).
    """

    user: int
    slot_time: int
    c_hat: np.ndarray
    err_cov: np.ndarray
    r_z: np.ndarray


def effective_pilot_noise(user: UserParams, tau_p: int, num_frames: int) -> float:
    """Noise variance of the matched-filtered pilot snapshot.

    The pilot budget is split evenly over the block's frames, so more
    frames mean noisier individual snapshots.
    """
    if tau_p < 1:
        raise ValueError("pilot code length must be >= 1")
    if num_frames < 1:
        raise ValueError("num_frames must be >= 1")
    p_p = user.p_p_max / num_frames
    return user.sigma_p2 / (tau_p * user.alpha**2 * p_p)


def pilot_cross_covariance(stats: ChannelStats, slot_time: float, pilot_times) -> np.ndarray:
    """Cross covariance of the slot channel with the stacked pilot snapshots."""
    blocks = [cross_covariance(stats, slot_time, tp) for tp in pilot_times]
    return np.hstack(blocks)


def pilot_gram(stats: ChannelStats, pilot_times) -> np.ndarray:
    """Covariance of the stacked (noiseless) pilot snapshots."""
    pilot_times = list(pilot_times)
    n = stats.dim
    out = np.empty((len(pilot_times) * n, len(pilot_times) * n), dtype=np.complex128)
    for a, ta in enumerate(pilot_times):
        for b, tb in enumerate(pilot_times):
            out[a * n:(a + 1) * n, b * n:(b + 1) * n] = cross_covariance(stats, ta, tb)
    return hermitize(out)


def lmmse_gain(stats: ChannelStats, slot_time: float, pilot_times, beta: float) -> np.ndarray:
    """Interpolation matrix applied to the stacked pilot snapshots."""
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    e = pilot_cross_covariance(stats, slot_time, pilot_times)
    gram = pilot_gram(stats, pilot_times)
    gram += beta * np.eye(gram.shape[0])
    # G = E (M + beta I)^{-1}  via  G^H = (M + beta I)^{-1} E^H
    return herm_solve(gram, e.conj().T).conj().T


def lmmse_covariance(stats: ChannelStats, slot_time: float, pilot_times, beta: float) -> np.ndarray:
    """Covariance of the scattered-part estimate at ``slot_time``."""
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    e = pilot_cross_covariance(stats, slot_time, pilot_times)
    gram = pilot_gram(stats, pilot_times)
    gram += beta * np.eye(gram.shape[0])
    c = e @ herm_solve(gram, e.conj().T)
    scale = float(np.abs(e).max()) if e.size else 0.0
    return psd_clamp(c, atol=1e-12 * max(scale, 1.0) ** 2 * e.shape[1])


def slot_stats(stats: ChannelStats, slot_time: float, pilot_times, beta: float,
               user: int = 0) -> SlotStats:
    """Bundle estimate/error/signal covariances for one user-slot pair."""
    c_hat = lmmse_covariance(stats, slot_time, pilot_times, beta)
    c_h = cross_covariance(stats, slot_time, slot_time)
    err = psd_clamp(c_h - c_hat, atol=1e-12 * max(float(np.abs(c_h).max()), 1.0))
    r_z = hermitize(c_hat + np.outer(stats.mean, stats.mean.conj()))
    return SlotStats(user=user, slot_time=int(slot_time), c_hat=c_hat,
                     err_cov=err, r_z=r_z)
