"""Dense complex-matrix primitives shared by the rest of the library.

Two conventions are fixed here and relied on everywhere else:

* ``vec`` stacks matrix *columns* (Fortran order).  For an ``n_r x n_t``
  matrix ``H`` this means ``vec(H)[a * n_r + i] == H[i, a]``, so Kronecker
  factors meant to act on ``vec(H)`` carry the transmit-side factor on the
  left: ``Cov(vec(H)) = R_tx (x) R_rx``.
* All matrices are dense ``complex128`` ndarrays and no function mutates
  its arguments.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

# Max elementwise deviation tolerated when a matrix is required Hermitian.
HERMITIAN_TOL = 1e-10
# Eigenvalues in [-PSD_FLOOR_REL * lam_max, 0) count as rounding noise.
PSD_FLOOR_REL = 1e-8


class DimensionMismatch(ValueError):
    """Operand shapes do not satisfy the documented contract."""


class NotPSD(ValueError):
    """A matrix required positive semidefinite is indefinite beyond the clamp floor."""


class SingularMatrix(RuntimeError):
    """A Hermitian solve failed even after one automatic jitter escalation."""


def as_cmatrix(a) -> np.ndarray:
    """Return ``a`` as a finite complex128 matrix, validating shape and entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or min(m.shape) < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix entries must be finite")
    return m


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray, n_r: int, n_t: int) -> np.ndarray:
    """Inverse of :func:`vec` for an ``n_r x n_t`` target shape."""
    v = np.asarray(v)
    if v.size != n_r * n_t:
        raise DimensionMismatch(f"cannot reshape {v.size} entries to {n_r}x{n_t}")
    return v.reshape((n_r, n_t), order="F")


def frob_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Frobenius inner product ``trace(a^H b)``."""
    return complex(np.vdot(a, b))


def hermitize(a: np.ndarray) -> np.ndarray:
    """Nearest Hermitian matrix, ``(a + a^H) / 2``."""
    return 0.5 * (a + a.conj().T)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.abs(a - np.swapaxes(a, -1, -2).conj()).max() <= tol)


def commutation_matrix(n_r: int, n_t: int) -> np.ndarray:
    """Permutation ``P`` with ``P @ vec(X) == vec(X.T)`` for every ``n_r x n_t`` X.

    ``P`` is real orthogonal, so ``P.T`` undoes it.
    """
    if n_r < 1 or n_t < 1:
        raise DimensionMismatch("matrix dimensions must be >= 1")
    n = n_r * n_t
    rows = np.arange(n_r)[:, None]
    cols = np.arange(n_t)[None, :]
    p = np.zeros((n, n))
    # vec(X^T)[i*n_t + a] = X[i, a] = vec(X)[a*n_r + i]
    p[(rows * n_t + cols).ravel(), (cols * n_r + rows).ravel()] = 1.0
    return p


def psd_clamp(a: np.ndarray, floor_rel: float = PSD_FLOOR_REL, atol: float = 0.0) -> np.ndarray:
    """Project a numerically-PSD Hermitian matrix back onto the PSD cone.

    Eigenvalues in ``[-floor, 0)`` with ``floor = max(floor_rel * lam_max, atol)``
    are treated as rounding noise and clamped to zero; anything below the
    floor raises :class:`NotPSD`.  ``atol`` lets callers whose output is a
    difference or product of larger intermediates widen the noise floor.
    """
    h = hermitize(np.asarray(a, dtype=np.complex128))
    w, v = np.linalg.eigh(h)
    lam_max = max(float(w[-1]), 0.0)
    floor = max(floor_rel * lam_max, atol)
    if float(w[0]) < -floor:
        raise NotPSD(
            f"min eigenvalue {float(w[0]):.6e} below the clamp floor "
            f"-{floor:.6e} (max eigenvalue {lam_max:.6e})"
        )
    if float(w[0]) >= 0.0:
        return h
    w = np.clip(w, 0.0, None)
    return hermitize((v * w) @ v.conj().T)


def psd_sqrt(a: np.ndarray, floor_rel: float = PSD_FLOOR_REL, atol: float = 0.0) -> np.ndarray:
    """Hermitian square root ``B`` of a PSD matrix, ``B @ B = a``.

    Raises :class:`NotPSD` when the smallest eigenvalue is below the clamp
    floor (see :func:`psd_clamp`); eigenvalues inside the floor are clamped
    to zero before taking the root.
    """
    h = hermitize(np.asarray(a, dtype=np.complex128))
    w, v = np.linalg.eigh(h)
    lam_max = max(float(w[-1]), 0.0)
    floor = max(floor_rel * lam_max, atol)
    if float(w[0]) < -floor:
        raise NotPSD(
            f"min eigenvalue {float(w[0]):.6e} below the clamp floor -{floor:.6e}"
        )
    w = np.clip(w, 0.0, None)
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def herm_solve(a: np.ndarray, b: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """Solve ``(a + jitter * I) x = b`` for Hermitian positive-definite ``a``.

    If the Cholesky factorisation fails, the jitter is escalated once by
    ``1e-12 * trace(a) / dim`` and the solve retried; a second failure raises
    :class:`SingularMatrix`.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs rows {b.shape[0]} != matrix dim {a.shape[0]}")
    n = a.shape[0]
    m = hermitize(a)
    eye = np.eye(n)
    try:
        fac = cho_factor(m + jitter * eye, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        bump = jitter + 1e-12 * max(float(np.trace(m).real), 0.0) / n
        try:
            fac = cho_factor(m + bump * eye, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(
                "Hermitian factorisation failed even after jitter escalation"
            ) from exc
    return cho_solve(fac, b, check_finite=False)
