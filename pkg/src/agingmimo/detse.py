"""Deterministic equivalents of per-user SINR and sum spectral efficiency.

The random part of every user's estimated channel enters the large-system
limit only through the receive-side images of its signal and error
covariances under that user's transmit covariance (`beamformed_covariance`).
A coupled scalar fixed point then yields each user's deterministic SINR
``alpha_k^2 * omega_k`` without any matrix of random samples.

Sum spectral efficiency of a frame schedule is the sum of per-slot,
per-user rates divided by the total block length in slots, pilot slots
included (they carry no payload but cost airtime).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .channel import build_channel_stats
from .estimator import SlotStats, effective_pilot_noise, slot_stats
from .frames import FrameSchedule, pilot_window
from .linkmath import beamformed_covariance
from .matops import DimensionMismatch

FP_TOL = 1e-12
FP_FAIL_TOL = 1e-9
FP_MAX_ITER = 1000
FP_DAMPING = 0.5


class NoConvergence(RuntimeError):
    """Fixed point failed to settle within the iteration budget."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"interference fixed point stalled at defect {residual:.3e} "
            f"after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


@dataclasses.dataclass(frozen=True)
class FixedPointSolution:
    omega: np.ndarray
    residual: float
    iterations: int
    phi: np.ndarray


@dataclasses.dataclass(frozen=True)
class DetSlotSE:
    """Deterministic per-user rates of one data slot."""

    slot_time: int
    sinr: np.ndarray
    per_user_se: np.ndarray
    interference_core: np.ndarray
    iterations: int
    residual: float


@dataclasses.dataclass(frozen=True)
class SseReport:
    sse: float
    schedule: FrameSchedule
    slots: tuple[DetSlotSE, ...]
    omega: np.ndarray
    iterations: int
    residual: float


def _fixed_point(a_rz, alphas, background, tol=FP_TOL, max_iter=FP_MAX_ITER,
                 damping=FP_DAMPING, omega0=None):
    """Batched solve of the coupled interference fixed point.

    ``a_rz`` is ``(S, K, N, N)`` (slot, user, receive, receive), ``alphas``
    ``(K,)`` and ``background`` ``(S, N, N)`` (error floor plus noise).
    Starting from zero the damped iteration is monotone increasing, so a
    warm start from a nearby solution only shortens the path.
    """
    a_rz = np.asarray(a_rz)
    s, k, n, _ = a_rz.shape
    al2 = np.asarray(alphas, dtype=float) ** 2
    omega = np.zeros((s, k)) if omega0 is None else np.array(omega0, dtype=float)
    target = omega
    defect = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        denom = 1.0 + al2[None, :] * omega
        terms = (al2[None, :, None, None] / denom[:, :, None, None]) * a_rz
        b = background[:, None] + terms.sum(axis=1)[:, None] - terms
        binv = np.linalg.inv(b)
        target = np.einsum("skab,skba->sk", a_rz, binv).real
        defect = float(np.abs(target - omega).max() / (1.0 + float(np.abs(target).max())))
        if defect < tol:
            omega = target
            break
        omega = omega + damping * (target - omega)
    if defect > FP_FAIL_TOL:
        raise NoConvergence(defect, iterations)
    denom = 1.0 + al2[None, :] * omega
    phi = background + ((al2[None, :, None, None] / denom[:, :, None, None]) * a_rz).sum(axis=1)
    return omega, phi, defect, iterations


def interference_fixed_point(a_rz, alphas, background, tol=FP_TOL,
                             max_iter=FP_MAX_ITER, damping=FP_DAMPING,
                             omega0=None) -> FixedPointSolution:
    """Solve the coupled per-user interference fixed point for one slot.

    ``a_rz[k]`` is user ``k``'s beamformed signal covariance, ``background``
    the shared error-plus-noise floor.  Returns the stationary couplings
    ``omega`` (user ``k``'s deterministic SINR is ``alpha_k^2 * omega_k``)
    and the full interference core ``phi``; subtract user ``k``'s own damped
    term from ``phi`` to recover the matrix it was measured against.
    """
    a_rz = np.asarray(a_rz)
    if a_rz.ndim != 3 or a_rz.shape[1] != a_rz.shape[2]:
        raise DimensionMismatch("a_rz must be (num_users, n, n)")
    om0 = None if omega0 is None else np.asarray(omega0, dtype=float)[None, :]
    omega, phi, defect, iterations = _fixed_point(
        a_rz[None], alphas, np.asarray(background)[None],
        tol=tol, max_iter=max_iter, damping=damping, omega0=om0)
    return FixedPointSolution(omega=omega[0], residual=defect,
                              iterations=iterations, phi=phi[0])


def _se_from_sinr(gamma, log_base):
    se = np.log1p(np.maximum(gamma, 0.0))
    if log_base == "e":
        return se
    return se / np.log(float(log_base))


def slot_deterministic_se(stats_list, users, w, sigma_d2, log_base=2,
                          omega0=None) -> DetSlotSE:
    """Deterministic per-user SE of one data slot.

    ``stats_list`` holds one :class:`~agingmimo.estimator.SlotStats` per
    user (same slot), ``w`` the ``(n_t, K)`` beamformer bank with unit-norm
    columns.
    """
    users = list(users)
    k = len(users)
    w = np.asarray(w, dtype=np.complex128)
    if w.ndim != 2 or w.shape[1] != k:
        raise DimensionMismatch("w must be (n_t, num_users)")
    _check_unit_columns(w)
    n = stats_list[0].r_z.shape[0] // w.shape[0]
    a_rz = np.empty((k, n, n), dtype=np.complex128)
    bg = sigma_d2 * np.eye(n, dtype=np.complex128)
    alphas = np.array([u.alpha for u in users])
    for i, (st, u) in enumerate(zip(stats_list, users)):
        c_x = u.p_d * np.outer(w[:, i], w[:, i].conj())
        a_rz[i] = beamformed_covariance(st.r_z, c_x)
        bg += u.alpha**2 * beamformed_covariance(st.err_cov, c_x)
    sol = interference_fixed_point(a_rz, alphas, bg, omega0=omega0)
    gamma = alphas**2 * sol.omega
    return DetSlotSE(slot_time=stats_list[0].slot_time, sinr=gamma,
                     per_user_se=_se_from_sinr(gamma, log_base),
                     interference_core=sol.phi, iterations=sol.iterations,
                     residual=sol.residual)


def _check_unit_columns(w, tol=1e-6):
    norms = np.linalg.norm(w, axis=0)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ValueError("beamformer columns must be unit norm")


class SseEvaluator:
    """Caches schedule-dependent estimation statistics for repeated SSE calls.

    The per-slot covariance tensors do not depend on the beamformers, so an
    optimiser probing many ``w`` against one schedule pays the estimation
    cost once.  ``sse`` also accepts a warm-start ``omega0`` of shape
    ``(num_data_slots, num_users)`` from a previous nearby evaluation.
    """

    def __init__(self, cfg, schedule: FrameSchedule, users=None, stats=None,
                 window: int = 3):
        self.cfg = cfg
        self.schedule = schedule
        self.users = list(users if users is not None else cfg.users)
        if stats is None:
            stats = [build_channel_stats(cfg, u) for u in self.users]
        self.stats = list(stats)
        self.window = window
        k = len(self.users)
        n_r, n_t = cfg.n_r, cfg.n_t
        betas = [effective_pilot_noise(u, cfg.tau_p, schedule.num_frames)
                 for u in self.users]
        slots = schedule.all_data_slots()
        self.slot_times = [t for _, t in slots]
        self.slot_stats: list[list[SlotStats]] = []
        rz4 = np.empty((len(slots), k, n_t, n_r, n_t, n_r), dtype=np.complex128)
        q4 = np.empty_like(rz4)
        for s, (m, t) in enumerate(slots):
            pilots = pilot_window(schedule, m, window)
            row = []
            for i in range(k):
                st = slot_stats(self.stats[i], t, pilots, betas[i], user=i)
                row.append(st)
                rz4[s, i] = st.r_z.reshape(n_t, n_r, n_t, n_r)
                q4[s, i] = st.err_cov.reshape(n_t, n_r, n_t, n_r)
            self.slot_stats.append(row)
        self._rz4 = rz4
        self._q4 = q4
        self._alphas = np.array([u.alpha for u in self.users])
        self._p_d = np.array([u.p_d for u in self.users])
        self._eye = np.eye(n_r, dtype=np.complex128)

    @property
    def duration(self) -> int:
        return self.schedule.duration

    def _solve(self, w, omega0=None):
        w = np.asarray(w, dtype=np.complex128)
        if w.shape != (self.cfg.n_t, len(self.users)):
            raise DimensionMismatch("w must be (n_t, num_users)")
        _check_unit_columns(w)
        c_x = self._p_d[:, None, None] * np.einsum("ak,bk->kab", w, w.conj())
        a_rz = np.einsum("skaibj,kab->skij", self._rz4, c_x, optimize=True)
        a_q = np.einsum("skaibj,kab->skij", self._q4, c_x, optimize=True)
        bg = self._eye * self.cfg.sigma_d2 \
            + (self._alphas[None, :, None, None] ** 2 * a_q).sum(axis=1)
        return _fixed_point(a_rz, self._alphas, bg, omega0=omega0)

    def sse(self, w, omega0=None) -> float:
        omega, _, _, _ = self._solve(w, omega0=omega0)
        gamma = self._alphas[None, :] ** 2 * omega
        se = _se_from_sinr(gamma, self.cfg.log_base)
        return float(se.sum() / self.schedule.duration)

    def sse_with_omega(self, w, omega0=None):
        """Like :meth:`sse` but also returns the couplings for warm starts."""
        omega, _, _, _ = self._solve(w, omega0=omega0)
        gamma = self._alphas[None, :] ** 2 * omega
        se = _se_from_sinr(gamma, self.cfg.log_base)
        return float(se.sum() / self.schedule.duration), omega

    def report(self, w, omega0=None) -> SseReport:
        omega, phi, defect, iterations = self._solve(w, omega0=omega0)
        gamma = self._alphas[None, :] ** 2 * omega
        se = _se_from_sinr(gamma, self.cfg.log_base)
        slots = tuple(
            DetSlotSE(slot_time=t, sinr=gamma[s], per_user_se=se[s],
                      interference_core=phi[s], iterations=iterations,
                      residual=defect)
            for s, t in enumerate(self.slot_times))
        return SseReport(sse=float(se.sum() / self.schedule.duration),
                         schedule=self.schedule, slots=slots, omega=omega,
                         iterations=iterations, residual=defect)


def sse_with_info(cfg, schedule, w, users=None, stats=None, window=3) -> SseReport:
    """One-shot deterministic SSE of a schedule under beamformer bank ``w``."""
    return SseEvaluator(cfg, schedule, users=users, stats=stats,
                        window=window).report(w)


def sse_objective(cfg, schedule, w, users=None, stats=None, window=3) -> float:
    return sse_with_info(cfg, schedule, w, users=users, stats=stats,
                         window=window).sse
