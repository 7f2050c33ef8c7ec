"""Dense complex linear algebra used by the pseudospectra machinery.

LU factorization and the non-Hermitian eigenvalue problem are delegated to
LAPACK through SciPy (``getrf``/``getrs`` and ``geev``, which balances,
reduces to Hessenberg form and runs shifted QR).  The singular-value
routines are written here:

* :func:`smallest_singular_value` -- block inverse iteration on ``A^H A``
  driven by a single LU factorization of ``A``.
* :func:`matrix_two_norm` -- block power iteration on ``A^H A``.
* :func:`reference_singular_values` -- Golub-Kahan bidiagonalization followed
  by bisection on the Golub-Kahan tridiagonal matrix.  Slow, used as an
  independent oracle for small matrices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

EPS = np.finfo(float).eps

#: seed for the deterministic starting vectors of the iterative methods
START_SEED = 20240917


class LinalgError(Exception):
    pass


class SingularMatrixError(LinalgError):
    def __init__(self, pivot_index, pivot=0.0):
        super().__init__(f"matrix is numerically singular at pivot {pivot_index} (|u| = {pivot:.3e})")
        self.pivot_index = pivot_index
        self.pivot = pivot


class ConvergenceError(LinalgError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceWarning(UserWarning):
    pass


def _as_square(A, name="A"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _start_vector(n, dtype=complex):
    rng = np.random.default_rng(START_SEED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return (v / np.linalg.norm(v)).astype(dtype, copy=False)


# --------------------------------------------------------------------------
# LU factorization


@dataclass(frozen=True)
class LuFactors:
    """Partial-pivoting LU factors, ``A[perm] = lower @ upper``.

    ``singular`` is set when a pivot magnitude is at most
    ``n * eps * ||A||_inf``; ``pivot_index`` then names the first such pivot.
    """

    lu: np.ndarray
    piv: np.ndarray
    n: int
    norm_inf: float
    singular: bool = False
    pivot_index: int | None = None

    @property
    def lower(self):
        L = np.tril(self.lu, -1)
        np.fill_diagonal(L, 1.0)
        return L

    @property
    def upper(self):
        return np.triu(self.lu)

    @cached_property
    def perm(self):
        """Row permutation ``p`` with ``A[p] = L @ U``."""
        p = np.arange(self.n)
        for i, j in enumerate(self.piv):
            p[i], p[j] = p[j], p[i]
        return p

    @property
    def P(self):
        P = np.zeros((self.n, self.n))
        P[np.arange(self.n), self.perm] = 1.0
        return P


def lu_decompose(A) -> LuFactors:
    """LU factorization with partial pivoting, ``P A = L U``."""
    A = _as_square(A)
    n = A.shape[0]
    dtype = complex if np.iscomplexobj(A) else float
    with warnings.catch_warnings():
        # exact singularity is detected below from the pivots
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A.astype(dtype), check_finite=False)
    norm_inf = float(np.abs(A).sum(axis=1).max()) if n else 0.0
    pivots = np.abs(np.diag(lu))
    small = np.nonzero(pivots <= n * EPS * norm_inf)[0]
    if small.size:
        k = int(small[0])
        return LuFactors(lu, piv, n, norm_inf, True, k)
    return LuFactors(lu, piv, n, norm_inf)


def solve(F: LuFactors, b, trans: int = 0):
    """Solve ``A x = b`` (``trans=0``) or ``A^H x = b`` (``trans=2``) from LU factors."""
    if F.singular:
        raise SingularMatrixError(F.pivot_index, float(abs(F.lu[F.pivot_index, F.pivot_index])))
    b = np.asarray(b)
    if b.shape[0] != F.n:
        raise ValueError(f"dimension mismatch: factors are {F.n}x{F.n}, rhs has {b.shape[0]} rows")
    return scipy.linalg.lu_solve((F.lu, F.piv), b, trans=trans, check_finite=False)


# --------------------------------------------------------------------------
# eigenvalues


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues of a square matrix with lazily computed backward errors."""

    matrix: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    vectors: np.ndarray | None = field(default=None, repr=False)

    @cached_property
    def norm2(self) -> float:
        return matrix_two_norm(self.matrix)

    @cached_property
    def backward_errors(self) -> np.ndarray:
        """``sigma_min(A - lambda I) / ||A||_2`` for each eigenvalue."""
        n = self.matrix.shape[0]
        eye = np.eye(n)
        scale = self.norm2 or 1.0
        return np.array(
            [smallest_singular_value(self.matrix - lam * eye) / scale for lam in self.eigenvalues]
        )


def eigenvalues(A, vectors: bool = False) -> EigenDecomposition:
    """All eigenvalues of a dense square matrix (LAPACK ``geev``).

    Raises :class:`ConvergenceError` carrying the first unconverged index when
    the QR iteration hits its cap.
    """
    A = _as_square(A)
    try:
        if vectors:
            w, V = scipy.linalg.eig(A, check_finite=False)
        else:
            w, V = scipy.linalg.eigvals(A, check_finite=False), None
    except np.linalg.LinAlgError as exc:
        digits = [int(s) for s in str(exc).replace(")", " ").split() if s.isdigit()]
        raise ConvergenceError(f"QR iteration did not converge: {exc}", digits[0] if digits else None) from exc
    return EigenDecomposition(A, np.asarray(w, dtype=complex), V)


# --------------------------------------------------------------------------
# singular values


def smallest_singular_value(
    A, rtol: float = 1e-11, maxiter: int = 1000, block: int = 8, factors: LuFactors | None = None
) -> float:
    """Smallest singular value by block inverse iteration on ``A^H A``.

    One LU factorization of ``A`` is reused for every step: each iteration
    solves with ``A^H`` and then with ``A`` for a block of ``block`` vectors,
    followed by a Rayleigh-Ritz step.  The largest Ritz value of
    ``(A^H A)^{-1}`` never exceeds ``1/sigma_min^2``, so the estimate decreases
    monotonically onto ``sigma_min``; the block makes clustered small singular
    values converge at rate ``(sigma_n / sigma_{n-block})^2`` per step.
    Iteration stops once the geometrically extrapolated remaining change is
    below ``rtol`` relative.  A singular LU flag returns 0.
    """
    A = _as_square(A)
    n = A.shape[0]
    if n == 0:
        return 0.0
    F = factors if factors is not None else lu_decompose(A)
    if F.singular:
        return 0.0

    k = min(block, n)
    rng = np.random.default_rng(START_SEED)
    X, _ = np.linalg.qr(rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
    sigma_prev = np.inf
    delta_prev = np.inf
    for _ in range(maxiter):
        W = solve(F, X, trans=2)
        if not np.all(np.isfinite(W)):
            return 0.0
        # scale before the Gram product so sigma_min near underflow stays finite
        wmax = float(np.max(np.abs(W)))
        if wmax == 0.0:
            return math.inf
        Ws = W / wmax
        theta = np.linalg.eigvalsh(Ws.conj().T @ Ws)[-1]
        sigma = 1.0 / (wmax * np.sqrt(theta))
        if k == n:
            return float(sigma)
        delta = sigma_prev - sigma
        if delta <= 4 * EPS * sigma:
            return float(sigma)
        if np.isfinite(delta_prev) and delta_prev > 0:
            q = delta / delta_prev
            if q < 1.0 and delta <= 1e-6 * sigma and delta * q / (1.0 - q) <= rtol * sigma:
                return float(sigma)
        sigma_prev, delta_prev = sigma, delta
        Y = solve(F, W)
        if not np.all(np.isfinite(Y)):
            return float(sigma)
        X, _ = np.linalg.qr(Y)
    warnings.warn(
        f"inverse iteration for sigma_min did not converge in {maxiter} steps", ConvergenceWarning, stacklevel=2
    )
    return float(sigma)


def matrix_two_norm(A, rtol: float = 1e-13, maxiter: int = 2000, block: int = 8) -> float:
    """Largest singular value by block power iteration on ``A^H A``.

    The largest Ritz value of ``A^H A`` on the iterated block increases
    monotonically to ``||A||_2^2``; blocking handles the near-equal leading
    singular values of spectral differentiation matrices.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if A.size == 0 or not np.any(A):
        return 0.0
    n = A.shape[1]
    k = min(block, n)
    rng = np.random.default_rng(START_SEED)
    X, _ = np.linalg.qr(rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
    s_prev = 0.0
    delta_prev = np.nan
    for _ in range(maxiter):
        Y = A @ X
        s = float(np.sqrt(max(np.linalg.eigvalsh(Y.conj().T @ Y)[-1], 0.0)))
        if k == n:
            return s
        delta = s - s_prev
        if s_prev > 0 and delta <= 4 * EPS * s:
            return s
        if np.isfinite(delta_prev) and delta_prev > 0 and s_prev > 0:
            q = delta / delta_prev
            if q < 1.0 and delta <= 1e-6 * s and delta * q / (1.0 - q) <= rtol * s:
                return s
        s_prev, delta_prev = s, delta
        X, _ = np.linalg.qr(A.conj().T @ Y)
    warnings.warn(f"power iteration did not converge in {maxiter} steps", ConvergenceWarning, stacklevel=2)
    return s


def _householder(v):
    """Return (u, beta) with (I - 2 u u^H) v = beta e_1, |beta| = ||v||."""
    alpha = np.linalg.norm(v)
    u = v.astype(complex, copy=True)
    if alpha == 0.0:
        return None, 0.0
    phase = u[0] / abs(u[0]) if u[0] != 0 else 1.0
    beta = -phase * alpha
    u[0] -= beta
    u /= np.linalg.norm(u)
    return u, beta


def bidiagonalize(A):
    """Golub-Kahan Householder bidiagonalization.

    Returns the (real, nonnegative) diagonal and superdiagonal of an upper
    bidiagonal matrix with the same singular values as ``A`` (m >= n).
    """
    B = np.array(A, dtype=complex)
    m, n = B.shape
    if m < n:
        B = B.conj().T
        m, n = n, m
    for k in range(n):
        u, _ = _householder(B[k:, k])
        if u is not None:
            B[k:, k:] -= 2.0 * np.outer(u, u.conj() @ B[k:, k:])
        if k < n - 2:
            u, _ = _householder(B[k, k + 1 :].conj())
            if u is not None:
                B[k:, k + 1 :] -= 2.0 * np.outer(B[k:, k + 1 :] @ u, u.conj())
    # unit-modulus diagonal scalings make the bidiagonal real and nonnegative
    d = np.abs(np.diag(B)[:n])
    e = np.abs(np.diag(B, 1)[: n - 1])
    return d, e


def _tgk_count(offdiag, shifts):
    """Number of eigenvalues of the zero-diagonal tridiagonal below each shift."""
    shifts = np.asarray(shifts, dtype=float)
    count = np.zeros(shifts.shape, dtype=int)
    q = -shifts.copy()
    tiny = np.finfo(float).tiny
    q[q == 0.0] = -tiny
    count += q < 0
    for b2 in offdiag**2:
        with np.errstate(over="ignore"):
            q = -shifts - b2 / q
        q[q == 0.0] = -tiny
        count += q < 0
    return count


def reference_singular_values(A) -> np.ndarray:
    """All singular values, ascending, via Golub-Kahan bidiagonalization.

    The bidiagonal ``(d, e)`` is embedded in the symmetric tridiagonal
    Golub-Kahan matrix with zero diagonal and off-diagonal
    ``d1, e1, d2, e2, ...``; its positive eigenvalues are the singular values
    and are isolated by Sturm-sequence bisection.
    """
    A = np.asarray(A)
    if A.ndim != 2 or not np.all(np.isfinite(A)):
        raise ValueError("expected a finite matrix")
    d, e = bidiagonalize(A)
    n = d.size
    off = np.empty(2 * n - 1)
    off[0::2] = d
    off[1::2] = e
    hi_bound = 2.0 * off.max() if off.size and off.max() > 0 else 1.0
    lo = np.zeros(n)
    hi = np.full(n, hi_bound)
    target = n + np.arange(n) + 1  # eigenvalues below sigma_k (ascending) must reach n + k + 1
    for _ in range(1100):
        mid = 0.5 * (lo + hi)
        below = _tgk_count(off, mid) >= target
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
        if np.all(hi - lo <= 2 * EPS * hi):
            break
    return 0.5 * (lo + hi)
