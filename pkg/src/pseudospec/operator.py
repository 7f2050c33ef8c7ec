"""The complex harmonic oscillator ``H_c = -d^2/dx^2 + c x^2`` and its discretization.

The operator is truncated to [-L, L] with Dirichlet conditions and
discretized by Chebyshev collocation: with ``D2`` the second-order
differentiation matrix on the scaled grid, ``H_c^N = -D2[1:-1, 1:-1] +
diag(V(x_i))`` over the interior nodes.  Exact spectral data of the
whole-line operator (eigenvalues ``c^{1/2}(2n+1)`` and Hermite
eigenfunctions) are provided for validation.

All fractional powers of ``c`` use the principal branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import linalg
from .chebyshev import cheb_points, diff_matrix

#: |log| below which exp underflows to zero in double precision
_LOG_UNDERFLOW = 745.0


class UnderResolvedWarning(UserWarning):
    """The grid is too coarse for the requested eigenfunction."""


@dataclass(frozen=True)
class OscillatorParams:
    c: complex

    def __post_init__(self):
        c = complex(self.c)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError(f"c must be finite, got {c!r}")
        if c.real <= 0:
            raise ValueError(f"Re(c) must be positive, got c = {c!r}")
        object.__setattr__(self, "c", c)

    @property
    def non_normal(self) -> bool:
        return self.c.imag != 0.0


@dataclass(frozen=True)
class DiscretizedOperator:
    """Dense Dirichlet collocation matrix of ``H_c`` on [-L, L]."""

    params: OscillatorParams
    N: int
    L: float
    interior_points: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @property
    def c(self) -> complex:
        return self.params.c

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def norm2(self) -> float:
        return linalg.matrix_two_norm(self.matrix)

    def shifted(self, z: complex) -> np.ndarray:
        A = self.matrix.copy()
        A[np.diag_indices_from(A)] -= z
        return A


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues sorted by modulus, with backward errors ``sigma_min(A - lam I)/||A||_2``."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    trusted_modulus: float

    @property
    def converged(self) -> np.ndarray:
        """Mask of eigenvalues the discretization resolves.

        An eigenvalue counts as converged when its backward error is at most
        1e-8 and its modulus does not exceed ``trusted_modulus`` (the modulus of
        the exact eigenvalue with index N // 10).
        """
        return (self.residuals <= 1e-8) & (np.abs(self.eigenvalues) <= self.trusted_modulus)


def _as_params(params) -> OscillatorParams:
    return params if isinstance(params, OscillatorParams) else OscillatorParams(params)


def discretize(params, N: int = 200, L: float = 6.0, potential: Callable | None = None) -> DiscretizedOperator:
    """Build ``H_c^N = -D2 + diag(c x_i^2)`` on the interior Chebyshev nodes.

    ``potential`` replaces ``c x^2`` by an arbitrary vectorized ``V(x)``; only
    the quadratic case is part of the supported surface.
    """
    params = _as_params(params)
    grid = cheb_points(N, L)
    D2 = diff_matrix(N, 2, L).entries
    x = grid.interior
    V = params.c * x**2 if potential is None else np.asarray(potential(x), dtype=complex)
    H = -D2[1:-1, 1:-1].astype(complex)
    H[np.diag_indices_from(H)] += V
    H.setflags(write=False)
    x.setflags(write=False)
    return DiscretizedOperator(params, int(N), float(L), x, H)


def exact_eigenvalue(params, n: int) -> complex:
    """``c^{1/2} (2n + 1)``."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    c = _as_params(params).c
    return complex(np.sqrt(c) * (2 * int(n) + 1))


def hermite(n: int, xi):
    """Physicists' Hermite polynomial ``H_n`` at (complex) ``xi`` by upward recurrence."""
    xi = np.asarray(xi, dtype=complex)
    h_prev = np.ones_like(xi)
    if n == 0:
        return h_prev
    h = 2 * xi
    for k in range(1, n):
        h_prev, h = h, 2 * xi * h - 2 * k * h_prev
    return h


def exact_eigenfunction(params, n: int, x):
    """``Psi_n(x) = c^{1/8} H_n(c^{1/4} x) exp(-c^{1/2} x^2 / 2)`` (unnormalized).

    Points where the Gaussian factor underflows return exactly zero.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    c = _as_params(params).c
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    out = np.zeros(xs.shape, dtype=complex)
    log_gauss = -np.sqrt(c).real * xs**2 / 2
    live = log_gauss > -_LOG_UNDERFLOW
    xl = xs[live]
    out[live] = c**0.125 * hermite(int(n), c**0.25 * xl) * np.exp(-np.sqrt(c) * xl**2 / 2)
    return out[0] if scalar else out


def eigenfunction_residual(op: DiscretizedOperator, n: int, warn: bool = True) -> float:
    """Relative residual ``||H_c^N psi - lambda_n psi|| / ||psi||`` of the exact eigenpair.

    ``psi`` samples ``Psi_n`` at the interior nodes.  Residuals above 1e-2
    mean the grid (or the truncation [-L, L]) does not resolve ``Psi_n``; an
    :class:`UnderResolvedWarning` is issued in that case.  Expect good
    resolution only for ``n <= N / 10``.
    """
    psi = exact_eigenfunction(op.params, n, op.interior_points)
    lam = exact_eigenvalue(op.params, n)
    r = float(np.linalg.norm(op.matrix @ psi - lam * psi) / np.linalg.norm(psi))
    if warn and r > 1e-2:
        warnings.warn(
            f"Psi_{n} is under-resolved on N={op.N}, L={op.L} (residual {r:.3e})", UnderResolvedWarning, stacklevel=2
        )
    return r


def trusted_modulus(params, N: int) -> float:
    """Modulus of the exact eigenvalue with index ``N // 10``."""
    return abs(exact_eigenvalue(params, N // 10))


def compute_spectrum(op: DiscretizedOperator) -> SpectrumResult:
    """All eigenvalues of ``H_c^N`` sorted by modulus, with backward errors."""
    dec = linalg.eigenvalues(op.matrix)
    order = np.argsort(np.abs(dec.eigenvalues), kind="stable")
    lam = dec.eigenvalues[order]
    scale = op.norm2
    res = np.array([linalg.smallest_singular_value(op.shifted(z)) for z in lam]) / scale
    return SpectrumResult(lam, res, trusted_modulus(op.params, op.N))


def match_exact(params, eigenvalues, count: int):
    """Pair the first ``count`` computed eigenvalues with ``c^{1/2}(2n+1)``.

    Each computed value is matched to the nearest exact eigenvalue index.
    Returns ``(indices, relative_errors)``.
    """
    c = _as_params(params).c
    root = np.sqrt(c)
    lam = np.asarray(eigenvalues)[:count]
    idx = np.maximum(np.rint(((lam / root).real - 1) / 2), 0).astype(int)
    exact = root * (2 * idx + 1)
    return idx, np.abs(lam - exact) / np.abs(exact)


def eigenvector(op: DiscretizedOperator, lam: complex) -> np.ndarray:
    """Right eigenvector of ``H_c^N`` for the computed eigenvalue nearest ``lam``.

    Returned with the boundary zeros appended (length N+1) and scaled to unit
    max-modulus.
    """
    dec = linalg.eigenvalues(op.matrix, vectors=True)
    k = int(np.argmin(np.abs(dec.eigenvalues - lam)))
    v = dec.vectors[:, k]
    v = v / v[np.argmax(np.abs(v))]
    return np.concatenate([[0.0], v, [0.0]])
