"""Chebyshev collocation on [-L, L].

Nodes are the Chebyshev extreme points ``x_j = L cos(j pi / N)``, stored in
descending order (``x_0 = L``).  Differentiation matrices act on nodal
values; the first-order matrix uses the closed-form cardinal-function
derivatives with diagonal entries fixed by the negative-sum trick, and the
second-order matrix is formed as the square of the first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChebGrid:
    """Chebyshev extreme points on [-half_width, half_width], descending."""

    n_intervals: int
    half_width: float
    points: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]


@dataclass(frozen=True)
class DiffMatrix:
    """Dense spectral differentiation matrix of a given order."""

    order: int
    n_intervals: int
    half_width: float
    entries: np.ndarray


def _check_grid_args(N, L):
    if int(N) != N or N < 2:
        raise ValueError(f"need an integer N >= 2, got {N!r}")
    if not (np.isfinite(L) and L > 0):
        raise ValueError(f"need a positive finite half-width L, got {L!r}")


def cheb_points(N: int, L: float = 1.0) -> ChebGrid:
    """Return the N+1 Chebyshev extreme points scaled to [-L, L].

    Examples
    --------
    >>> cheb_points(2, 6.0).points
    array([ 6.,  0., -6.])
    """
    _check_grid_args(N, L)
    N = int(N)
    j = np.arange(N + 1)
    # sin form keeps x_j = -x_{N-j} exact in floating point
    x = np.sin(np.pi * (N - 2 * j) / (2 * N))
    return ChebGrid(N, float(L), L * x)


def _first_derivative(N: int) -> np.ndarray:
    x = cheb_points(N).points
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(N + 1))
    np.fill_diagonal(D, 0.0)
    # negative-sum trick: rows of D annihilate constants
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def diff_matrix(N: int, order: int = 1, L: float = 1.0) -> DiffMatrix:
    """Spectral differentiation matrix of order 1 or 2 on the scaled grid.

    ``D^(2)`` is computed as ``D^(1) @ D^(1)``; rescaling from [-1, 1] to
    [-L, L] divides by ``L**order``.
    """
    _check_grid_args(N, L)
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    N = int(N)
    D = _first_derivative(N)
    if order == 2:
        D = D @ D
    return DiffMatrix(order, N, float(L), D / L**order)


def barycentric_weights(N: int) -> np.ndarray:
    w = (-1.0) ** np.arange(N + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def barycentric_eval(values, grid: ChebGrid, x):
    """Evaluate the degree-N interpolant of nodal ``values`` at ``x``.

    Uses the second barycentric formula with Chebyshev weights.  ``x`` may be
    a scalar or an array; every point must lie in [-L, L].  At a node the
    stored value is returned unchanged.
    """
    values = np.asarray(values)
    nodes = grid.points
    if values.shape != nodes.shape:
        raise ValueError(f"expected {nodes.size} nodal values, got shape {values.shape}")
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    L = grid.half_width
    if np.any(np.abs(xs) > L * (1 + 1e-14)):
        raise ValueError(f"evaluation points must lie in [-{L}, {L}]")

    w = barycentric_weights(grid.n_intervals)
    diff = xs[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tmp = w / diff
        out = (tmp @ values) / tmp.sum(axis=1)
    hit_rows, hit_cols = np.nonzero(exact)
    out[hit_rows] = values[hit_cols]
    return out[0] if scalar else out
