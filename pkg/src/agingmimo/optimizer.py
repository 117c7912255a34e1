"""Frame-schedule search and beamformer ascent.

Schedules are few (data-slot counts are small integers), so they are
enumerated exhaustively; beamformers live on a product of unit spheres and
are improved by projected gradient ascent on the deterministic SSE with a
finite-difference gradient, an adaptive Armijo step and a couple of cheap
starting points.  Everything is deterministic for a given config.
"""

from __future__ import annotations

import dataclasses
import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .channel import build_channel_stats, build_spatial_correlation
from .detse import SseEvaluator
from .frames import FrameSchedule

PGA_SEED = 20240916
PGA_MAX_ITER = 200
PGA_TOL = 1e-8
PGA_FD_STEP = 1e-5
PGA_ARMIJO = 1e-4


@dataclasses.dataclass(frozen=True)
class BeamformingResult:
    w: np.ndarray
    sse: float
    iterations: int


@dataclasses.dataclass(frozen=True)
class CandidateResult:
    q: tuple[int, ...]
    sse: float
    w: np.ndarray
    fp_iterations: int


@dataclasses.dataclass(frozen=True)
class OptimizationResult:
    schedule: FrameSchedule
    w: np.ndarray
    sse: float
    fp_iterations: int
    best_index: int
    candidates: tuple[CandidateResult, ...]


def uniform_beamforming(n_t: int, num_users: int) -> np.ndarray:
    """Equal-weight unit-norm beamformer for every user."""
    return np.ones((n_t, num_users), dtype=np.complex128) / np.sqrt(n_t)


def frame_candidates(q_max: int, m_max: int) -> list[FrameSchedule]:
    """All schedules with up to ``m_max`` frames of 1..``q_max`` data slots,
    sorted by total duration then lexicographically (the tie-break order)."""
    if q_max < 1 or m_max < 1:
        raise ValueError("q_max and m_max must be >= 1")
    cands = [FrameSchedule(q) for m in range(1, m_max + 1)
             for q in itertools.product(range(1, q_max + 1), repeat=m)]
    cands.sort(key=lambda s: (s.duration, s.q))
    return cands


def _normalize_columns(w: np.ndarray) -> np.ndarray:
    return w / np.linalg.norm(w, axis=0, keepdims=True)


def _starting_points(n_t: int, num_users: int, rho_t: float, rng) -> list[np.ndarray]:
    starts = [uniform_beamforming(n_t, num_users)]
    eigvecs = np.linalg.eigh(build_spatial_correlation(rho_t, n_t))[1]
    dominant = eigvecs[:, -1].astype(np.complex128)
    starts.append(np.repeat(dominant[:, None], num_users, axis=1))
    rnd = rng.standard_normal((n_t, num_users)) + 1j * rng.standard_normal((n_t, num_users))
    starts.append(_normalize_columns(rnd))
    # drop starts equal to an earlier one up to per-column phase
    kept: list[np.ndarray] = []
    for cand in starts:
        dup = any(
            np.all(np.abs(np.einsum("ik,ik->k", prev.conj(), cand)) > 1.0 - 1e-8)
            for prev in kept)
        if not dup:
            kept.append(cand)
    return kept


def _ascend(evaluator: SseEvaluator, w0: np.ndarray, max_iter: int, tol: float,
            fd_step: float, armijo: float) -> BeamformingResult:
    w = _normalize_columns(np.asarray(w0, dtype=np.complex128).copy())
    sse, omega = evaluator.sse_with_omega(w)
    eta = 0.1
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = np.zeros_like(w)
        for (i, j) in np.ndindex(*w.shape):
            for unit in (1.0, 1j):
                bump = np.zeros_like(w)
                bump[i, j] = unit * fd_step
                hi = evaluator.sse(_normalize_columns(w + bump), omega0=omega)
                lo = evaluator.sse(_normalize_columns(w - bump), omega0=omega)
                grad[i, j] += unit * (hi - lo) / (2.0 * fd_step)
        gnorm2 = float(np.vdot(grad, grad).real)
        if gnorm2 < 1e-20:
            break
        improved = False
        step = eta
        while step > 1e-12:
            w_try = _normalize_columns(w + step * grad)
            sse_try, omega_try = evaluator.sse_with_omega(w_try, omega0=omega)
            if sse_try >= sse + armijo * step * gnorm2:
                improved = sse_try - sse > tol
                w, omega = w_try, omega_try
                sse = sse_try
                eta = 2.0 * step
                break
            step *= 0.5
        if not improved:
            break
    return BeamformingResult(w=w, sse=sse, iterations=iterations)


def optimize_beamforming(evaluator: SseEvaluator, w0=None,
                         max_iter: int = PGA_MAX_ITER, tol: float = PGA_TOL,
                         fd_step: float = PGA_FD_STEP,
                         armijo: float = PGA_ARMIJO) -> BeamformingResult:
    """Best beamformer bank found by multi-start projected gradient ascent.

    With a single transmit antenna the unit sphere is a point (up to a
    phase the SINR ignores), so the all-ones bank is returned immediately.
    """
    cfg = evaluator.cfg
    num_users = len(evaluator.users)
    if cfg.n_t == 1:
        w = uniform_beamforming(1, num_users)
        return BeamformingResult(w=w, sse=evaluator.sse(w), iterations=0)
    if w0 is not None:
        starts = [np.asarray(w0, dtype=np.complex128)]
    else:
        rng = np.random.default_rng([PGA_SEED, cfg.n_t, num_users])
        starts = _starting_points(cfg.n_t, num_users, cfg.rho_t, rng)
    best: BeamformingResult | None = None
    for w_start in starts:
        res = _ascend(evaluator, w_start, max_iter, tol, fd_step, armijo)
        if best is None or res.sse > best.sse:
            best = res
    return best


def optimize_frames(cfg, users=None, stats=None, w=None, optimize_w: bool = True,
                    window: int = 3, threads: int | None = None) -> OptimizationResult:
    """Search all frame schedules, optionally optimising beamformers per
    schedule, and return the SSE-best one.

    Near-ties (relative SSE gap below 1e-12) resolve to the shorter, then
    lexicographically smaller schedule; the candidate order already encodes
    that preference.
    """
    users = list(users if users is not None else cfg.users)
    if stats is None:
        stats = [build_channel_stats(cfg, u) for u in users]
    cands = frame_candidates(cfg.q_max, cfg.m_max)

    def job(schedule: FrameSchedule):
        ev = SseEvaluator(cfg, schedule, users=users, stats=stats, window=window)
        if optimize_w and cfg.n_t > 1:
            res = optimize_beamforming(ev, w0=w)
            w_sched, sse = res.w, res.sse
        else:
            w_sched = np.asarray(w, dtype=np.complex128) if w is not None \
                else uniform_beamforming(cfg.n_t, len(users))
            sse = ev.sse(w_sched)
        report = ev.report(w_sched)
        return sse, w_sched, report.iterations

    if threads is None:
        threads = min(8, len(cands))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, cands))
    else:
        results = [job(s) for s in cands]

    best_i = 0
    for i in range(1, len(cands)):
        lead = results[best_i][0]
        if results[i][0] > lead + 1e-12 * max(1.0, abs(lead)):
            best_i = i
    sse, w_best, fp_iters = results[best_i]
    return OptimizationResult(
        schedule=cands[best_i], w=w_best, sse=sse, fp_iterations=fp_iters,
        best_index=best_i,
        candidates=tuple(
            CandidateResult(q=c.q, sse=r[0], w=r[1], fp_iterations=r[2])
            for c, r in zip(cands, results)))
