"""Instantaneous receive-side link quantities.

Everything here works on vectorised channels.  With column stacking,
``vec(H)[a * n_r + i] = H[i, a]``, the covariance of a transmit-(x)-receive
separable channel is ``R_tx (x) R_rx`` and the receive-side image of a
transmit covariance ``C_x`` under a channel with second moment
``D = E[vec(H) vec(H)^H]`` is the contraction implemented by
:func:`beamformed_covariance`:

    E[H C_x H^H][i, j] = sum_{a, b} D[(a, i), (b, j)] * C_x[a, b]

Quadratic forms written with a Kronecker factor pick up a transpose on the
transmit factor under this stacking; the contraction form avoids that trap
and is what the rest of the package uses.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .matops import DimensionMismatch, herm_solve, unvec


def beamformed_covariance(d: np.ndarray, c_x: np.ndarray) -> np.ndarray:
    """Receive covariance ``E[H C_x H^H]`` from the vectorised second moment.

    ``d`` is ``(n_t * n_r, n_t * n_r)`` with column-stacked ordering and
    ``c_x`` is the ``(n_t, n_t)`` transmit covariance.  Linear in both
    arguments; maps PSD pairs to PSD outputs.
    """
    n_t = c_x.shape[0]
    if c_x.shape != (n_t, n_t):
        raise DimensionMismatch("transmit covariance must be square")
    if d.shape[0] != d.shape[1] or d.shape[0] % n_t != 0:
        raise DimensionMismatch(
            f"second moment of shape {d.shape} does not factor over {n_t} transmit antennas")
    n_r = d.shape[0] // n_t
    d4 = d.reshape(n_t, n_r, n_t, n_r)
    return np.einsum("aibj,ab->ij", d4, c_x)


@dataclasses.dataclass(frozen=True)
class UserSlotContext:
    """One user's realised state at one data slot.

    ``z`` is the realised channel estimate (line-of-sight mean included) as a
    vectorised ``n_r x n_t`` matrix, ``err_cov`` the estimation-error
    covariance, ``w`` the unit-norm transmit beamformer.
    """

    z: np.ndarray
    err_cov: np.ndarray
    w: np.ndarray
    p_d: float
    alpha: float

    @property
    def n_t(self) -> int:
        return self.w.shape[0]

    @property
    def n_r(self) -> int:
        return self.z.shape[0] // self.n_t

    @property
    def c_x(self) -> np.ndarray:
        """Transmit covariance ``p_d * w w^H``."""
        return self.p_d * np.outer(self.w, self.w.conj())

    @property
    def u(self) -> np.ndarray:
        """Estimated receive signature ``unvec(z) @ w``."""
        return unvec(self.z, self.n_r, self.n_t) @ self.w


def received_covariance(contexts, sigma_d2: float) -> np.ndarray:
    """Conditional covariance of the received slot signal given all estimates.

    Sums every user's beamformed estimate (a rank-one term) and estimation
    error covariance, plus thermal noise.
    """
    if sigma_d2 <= 0.0:
        raise ValueError("sigma_d2 must be > 0")
    contexts = list(contexts)
    if not contexts:
        raise ValueError("need at least one user context")
    n_r = contexts[0].n_r
    f = sigma_d2 * np.eye(n_r, dtype=np.complex128)
    for ctx in contexts:
        zz = np.outer(ctx.z, ctx.z.conj())
        f += ctx.alpha**2 * beamformed_covariance(ctx.err_cov + zz, ctx.c_x)
    return f


def mmse_combiner(ctx: UserSlotContext, f: np.ndarray) -> np.ndarray:
    """Receive filter ``g`` (applied as ``g^H y``) that maximises the SINR.

    ``g = alpha * sqrt(p_d) * F^{-1} u``; any positive rescaling leaves the
    SINR unchanged.
    """
    return ctx.alpha * np.sqrt(ctx.p_d) * herm_solve(f, ctx.u)


def instantaneous_sinr(contexts, k: int, sigma_d2: float | None = None,
                       f: np.ndarray | None = None) -> float:
    """SINR of user ``k`` under its own MMSE combiner.

    Deflates user ``k``'s own estimated signal out of the received
    covariance before the quadratic form, so the result is signal power
    over everything else.  Pass ``f`` to reuse a precomputed
    :func:`received_covariance`; otherwise ``sigma_d2`` is required.
    """
    contexts = list(contexts)
    ctx = contexts[k]
    if f is None:
        if sigma_d2 is None:
            raise ValueError("need sigma_d2 when f is not given")
        f = received_covariance(contexts, sigma_d2)
    zz = np.outer(ctx.z, ctx.z.conj())
    f_k = f - ctx.alpha**2 * beamformed_covariance(zz, ctx.c_x)
    u = ctx.u
    gamma = ctx.alpha**2 * ctx.p_d * np.vdot(u, herm_solve(f_k, u)).real
    return float(max(gamma, 0.0))


def spectral_efficiency(sinr, log_base=2):
    """Shannon rate ``log(1 + sinr)`` in the configured logarithm base."""
    if np.any(np.asarray(sinr) < 0):
        raise ValueError("sinr must be >= 0")
    if log_base == "e":
        return float(np.log1p(sinr))
    base = float(log_base)
    if base <= 1.0:
        raise ValueError("log base must exceed 1")
    return float(np.log1p(sinr) / np.log(base))
