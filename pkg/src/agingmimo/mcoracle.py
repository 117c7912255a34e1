"""Monte Carlo validation of the deterministic rate expressions.

Draws correlated channel snapshots at pilot and data times, pushes them
through the same LMMSE interpolation the analysis assumes, and averages the
exact conditional SINR over draws.  Streams are keyed per (seed, user,
frame, purpose) so results do not depend on evaluation order or chunking.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .channel import ChannelStats, build_channel_stats
from .detse import SseEvaluator
from .estimator import effective_pilot_noise, lmmse_gain
from .frames import FrameSchedule, pilot_window
from .linkmath import beamformed_covariance
from .matops import hermitize, psd_sqrt
from .optimizer import uniform_beamforming

CHUNK = 4096


@dataclasses.dataclass(frozen=True)
class McReport:
    """Per-user empirical vs deterministic rates (averaged over data slots)."""

    se_emp: np.ndarray
    se_det: np.ndarray
    rel_err: np.ndarray
    sinr_emp: np.ndarray
    sinr_det: np.ndarray
    num_samples: int
    seed: int

    @property
    def max_rel_err(self) -> float:
        return float(self.rel_err.max())


def _complex_normal(rng, shape):
    # real/imag interleaved per element so draw sequences are chunk-invariant
    if isinstance(shape, int):
        shape = (shape,)
    pairs = rng.standard_normal(tuple(shape) + (2,))
    return (pairs[..., 0] + 1j * pairs[..., 1]) / np.sqrt(2.0)


def _joint_sqrt(stats: ChannelStats, times) -> np.ndarray:
    from .channel import joint_covariance

    return psd_sqrt(joint_covariance(stats, times), atol=1e-12)


def sample_joint_channel(stats: ChannelStats, times, num_samples: int, rng,
                         include_mean: bool = True) -> np.ndarray:
    """Draw ``num_samples`` stacked channel vectors over ``times``.

    Returns ``(num_samples, len(times) * dim)``; block ``t`` of each row is
    the vectorised channel at ``times[t]``.
    """
    times = list(times)
    root = _joint_sqrt(stats, times)
    g = _complex_normal(rng, (num_samples, root.shape[0]))
    x = g @ root.T
    if include_mean:
        x += np.tile(stats.mean, len(times))
    return x


def pilot_observations(scattered_pilots: np.ndarray, beta: float, rng) -> np.ndarray:
    """Mean-centred matched-filter pilot snapshots with effective noise ``beta``."""
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    return scattered_pilots + np.sqrt(beta) * _complex_normal(rng, scattered_pilots.shape)


def lmmse_estimates(stats: ChannelStats, slot_time: float, pilot_times,
                    beta: float, observations: np.ndarray) -> np.ndarray:
    """Estimates of the slot channel (mean included) from centred pilot rows."""
    gain = lmmse_gain(stats, slot_time, pilot_times, beta)
    return observations @ gain.T + stats.mean


def batched_sinr(u_all: np.ndarray, f_det: np.ndarray, alphas, p_d) -> np.ndarray:
    """Conditional MMSE SINR for every draw and user.

    ``u_all`` is ``(num, n_r, K)`` of estimated receive signatures and
    ``f_det`` the deterministic part of the received covariance (noise and
    estimation-error floor).  Each user's own rank-one term is removed by a
    rank-one update instead of a second matrix inverse.
    """
    num, n, k = u_all.shape
    scale = np.asarray(alphas, dtype=float) ** 2 * np.asarray(p_d, dtype=float)
    f = np.broadcast_to(f_det, (num, n, n)).copy()
    f += np.einsum("k,dik,djk->dij", scale, u_all, u_all.conj(), optimize=True)
    x = np.linalg.solve(f, u_all)
    s = np.einsum("dik,dik->dk", u_all.conj(), x, optimize=True).real
    t = scale[None, :] * s
    return np.maximum(t, 0.0) / np.maximum(1.0 - t, np.finfo(float).tiny)


def _se(gamma, log_base):
    se = np.log1p(np.maximum(gamma, 0.0))
    if log_base == "e":
        return se
    return se / np.log(float(log_base))


def validate_deterministic(cfg, schedule: FrameSchedule | None = None, w=None,
                           num_samples: int = 10000, seed: int = 0, users=None,
                           stats=None, window: int = 3, chunk: int = CHUNK,
                           method: str = "pipeline") -> McReport:
    """Compare Monte Carlo mean rates against the deterministic equivalents.

    ``method`` picks how estimates are drawn: ``"pipeline"`` simulates noisy
    pilots and LMMSE interpolation end to end, ``"direct"`` samples estimates
    straight from their analytic covariance.  The two must agree within
    Monte Carlo noise; they share no randomness.  Relative error is per
    user: ``|emp - det| / det`` on the slot-averaged spectral efficiency.
    """
    if method not in ("pipeline", "direct"):
        raise ValueError("method must be 'pipeline' or 'direct'")
    users = list(users if users is not None else cfg.users)
    if stats is None:
        stats = [build_channel_stats(cfg, u) for u in users]
    if schedule is None:
        schedule = FrameSchedule(tuple(cfg.q))
    k = len(users)
    if w is None:
        w = uniform_beamforming(cfg.n_t, k)
    w = np.asarray(w, dtype=np.complex128)

    ev = SseEvaluator(cfg, schedule, users=users, stats=stats, window=window)
    det = ev.report(w)
    se_det = np.mean([slot.per_user_se for slot in det.slots], axis=0)
    sinr_det = np.mean([slot.sinr for slot in det.slots], axis=0)

    alphas = np.array([u.alpha for u in users])
    p_d = np.array([u.p_d for u in users])
    betas = [effective_pilot_noise(u, cfg.tau_p, schedule.num_frames) for u in users]
    c_x = [p_d[i] * np.outer(w[:, i], w[:, i].conj()) for i in range(k)]

    slot_of = {t: s for s, (_, t) in enumerate(schedule.all_data_slots())}
    se_sum = np.zeros(k)
    sinr_sum = np.zeros(k)
    num_slots = 0
    for m in range(schedule.num_frames):
        pilots = pilot_window(schedule, m, window)
        gains = {}
        f_det = {}
        hat_roots = {}
        for t in schedule.data_slots(m):
            row = ev.slot_stats[slot_of[t]]
            fd = cfg.sigma_d2 * np.eye(cfg.n_r, dtype=np.complex128)
            for i in range(k):
                fd += alphas[i] ** 2 * beamformed_covariance(row[i].err_cov, c_x[i])
            f_det[t] = fd
            if method == "pipeline":
                gains[t] = [lmmse_gain(stats[i], t, pilots, betas[i])
                            for i in range(k)]
            else:
                hat_roots[t] = [psd_sqrt(row[i].c_hat, atol=1e-12) for i in range(k)]
        if method == "pipeline":
            roots = [_joint_sqrt(stats[i], pilots) for i in range(k)]
            rng_ch = [np.random.default_rng([seed, i, m, 0]) for i in range(k)]
            rng_n = [np.random.default_rng([seed, i, m, 1]) for i in range(k)]
        else:
            rng_hat = {t: [np.random.default_rng([seed, i, m, 2, t]) for i in range(k)]
                       for t in schedule.data_slots(m)}
        se_rows = {t: [] for t in schedule.data_slots(m)}
        sinr_rows = {t: [] for t in schedule.data_slots(m)}
        done = 0
        while done < num_samples:
            n_draw = min(chunk, num_samples - done)
            if method == "pipeline":
                obs = []
                for i in range(k):
                    scat = (_complex_normal(rng_ch[i], (n_draw, roots[i].shape[0]))
                            @ roots[i].T)
                    obs.append(pilot_observations(scat, betas[i], rng_n[i]))
            for t in schedule.data_slots(m):
                u_all = np.empty((n_draw, cfg.n_r, k), dtype=np.complex128)
                for i in range(k):
                    if method == "pipeline":
                        zhat = obs[i] @ gains[t][i].T + stats[i].mean
                    else:
                        white = _complex_normal(rng_hat[t][i],
                                                (n_draw, hat_roots[t][i].shape[0]))
                        zhat = white @ hat_roots[t][i].T + stats[i].mean
                    zmat = zhat.reshape(n_draw, cfg.n_t, cfg.n_r)
                    u_all[:, :, i] = np.einsum("dai,a->di", zmat, w[:, i])
                gamma = batched_sinr(u_all, f_det[t], alphas, p_d)
                se_rows[t].append(_se(gamma, cfg.log_base))
                sinr_rows[t].append(gamma)
            done += n_draw
        for t in schedule.data_slots(m):
            se_sum += np.concatenate(se_rows[t]).mean(axis=0)
            sinr_sum += np.concatenate(sinr_rows[t]).mean(axis=0)
            num_slots += 1

    se_emp = se_sum / num_slots
    sinr_emp = sinr_sum / num_slots
    rel = np.abs(se_emp - se_det) / np.maximum(np.abs(se_det), np.finfo(float).tiny)
    return McReport(se_emp=se_emp, se_det=se_det, rel_err=rel, sinr_emp=sinr_emp,
                    sinr_det=sinr_det, num_samples=num_samples, seed=seed)


def empirical_estimate_covariances(stats: ChannelStats, slot_time: float,
                                   pilot_times, beta: float, num_samples: int,
                                   seed: int, chunk: int = CHUNK):
    """Sample covariances of the LMMSE estimate and its error at one slot.

    Returns ``(c_hat_emp, err_emp)`` over the scattered channel part; compare
    against :func:`~agingmimo.estimator.lmmse_covariance` and the prior minus
    that.
    """
    pilot_times = list(pilot_times)
    times = pilot_times + [slot_time]
    n = stats.dim
    root = _joint_sqrt(stats, times)
    gain = lmmse_gain(stats, slot_time, pilot_times, beta)
    rng_ch = np.random.default_rng([seed, 0, 0, 0])
    rng_n = np.random.default_rng([seed, 0, 0, 1])
    c_hat = np.zeros((n, n), dtype=np.complex128)
    c_err = np.zeros((n, n), dtype=np.complex128)
    done = 0
    while done < num_samples:
        n_draw = min(chunk, num_samples - done)
        joint = _complex_normal(rng_ch, (n_draw, root.shape[0])) @ root.T
        scat_p, truth = joint[:, :-n], joint[:, -n:]
        obs = pilot_observations(scat_p, beta, rng_n)
        zhat = obs @ gain.T
        err = zhat - truth
        c_hat += zhat.T @ zhat.conj()
        c_err += err.T @ err.conj()
        done += n_draw
    return hermitize(c_hat / num_samples), hermitize(c_err / num_samples)


def nr_sweep_errors(cfg, nr_values, num_samples: int, seed: int, **kw):
    """Max per-user relative SE error at each receive array size."""
    errs = []
    for n_r in nr_values:
        cfg_n = cfg.replace(n_r=int(n_r))
        report = validate_deterministic(cfg_n, num_samples=num_samples,
                                        seed=seed, **kw)
        errs.append(report.max_rel_err)
    return errs
