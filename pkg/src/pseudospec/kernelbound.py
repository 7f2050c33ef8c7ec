"""Semiclassical kernel bounds behind the ``|z|^{-1/3}`` resolvent estimate.

Writing ``h = 1/Re(z)`` and ``mu = Im(z)/Re(z)``, the first-order factor
``(h/i) d/dx - Lambda(x, mu)`` with the leading-order symbol
``Lambda = -(c/2) x^2 + i mu/2`` has the explicit inverse

    u(x) = (i/h) int_a^x exp(-F(x) + F(y)) v(y) dy,

whose kernel satisfies ``|K(x, y)| = (1/h) exp(-g(x) + g(y))`` on
``x <= y <= a`` with ``g = Re F``.  This module evaluates ``g`` and the kernel,
computes the two Schur-test suprema by quadrature, fits their ``h^{-2/3}``
scaling, and provides sweeps for the elementary inequalities used along the
way.

Only the leading-order symbol is modelled; ``g`` is normalized by ``g(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fitting import ExponentFit, FitRefusedError, loglog_fit
from .quadrature import QuadratureError, simpson

#: integrand is dropped once it falls below exp(-TAIL_LOG) times its peak
TAIL_LOG = math.log(1e18)

GAMMA_4_3 = math.gamma(4.0 / 3.0)


@dataclass(frozen=True)
class SemiclassicalParams:
    h: float
    mu: float
    c: complex
    a: float
    a0: float

    def __post_init__(self):
        c = complex(self.c)
        object.__setattr__(self, "c", c)
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h!r}")
        if not c.imag > 0:
            raise ValueError(f"Im(c) must be positive, got c = {c!r}")
        if not 0 < self.a <= self.a0:
            raise ValueError(f"need 0 < a <= a0, got a={self.a!r}, a0={self.a0!r}")

    @property
    def k(self) -> float:
        return self.c.imag


def lambda_symbol(x, mu, c):
    """Leading-order root ``Lambda(x, mu) = -(c/2) x^2 + i mu / 2``."""
    return -0.5 * complex(c) * np.asarray(x) ** 2 + 0.5j * np.asarray(mu)


def _g(x, h, mu, k):
    return (-k * x**3 / 3.0 + mu * x) / (2.0 * h)


def g_function(x, params: SemiclassicalParams):
    """``g(x) = (1/(2h)) (-Im(c) x^3 / 3 + mu x)``, the real part of the primitive of ``-(i/h) Lambda``."""
    return _g(np.asarray(x, dtype=float), params.h, params.mu, params.k)


def kernel_value(x, y, params: SemiclassicalParams):
    """``|K(x, y)| = (1/h) exp(-g(x) + g(y))`` on ``x <= y <= a``, else 0.

    Overflow of the exponential yields ``inf``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore"):
        val = np.exp(g_function(y, params) - g_function(x, params)) / params.h
    out = np.where((x <= y) & (y <= params.a), val, 0.0)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Schur test


def _bisect(fun, lo, hi, target, increasing, iters=80):
    """Vectorized bisection for ``fun(t) = target`` on monotone branches."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = fun(mid) >= target
        if increasing:
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        else:
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def _row_integrals(params: SemiclassicalParams, points, over_y: bool, rtol: float):
    """Integrals of |K| over y (rows fixed at x) or over x (rows fixed at y).

    Each integrand is ``exp(phi)/h`` with a cubic exponent ``phi``; the peak of
    ``phi`` is located analytically, the integration window is cut where
    ``phi`` falls ``TAIL_LOG`` below it on the monotone tail, and the
    integrand is scaled by ``exp(-peak)`` so nothing overflows.
    """
    h, mu, k, a, a0 = params.h, params.mu, params.k, params.a, params.a0
    p = np.asarray(points, dtype=float)
    active = p <= a
    value = np.zeros(p.shape)
    error = np.zeros(p.shape)
    if not active.any():
        return value, error
    q = p[active]
    turn = math.sqrt(mu / k) if mu > 0 else 0.0

    if over_y:
        # phi(y) = g(y) - g(x); increasing on |y| < turn, decreasing beyond
        phi = lambda y, x=q: _g(y, h, mu, k) - _g(x, h, mu, k)  # noqa: E731
        lo = q.copy()
        start = np.clip(np.maximum(q, turn), q, a)
        peak = np.maximum(0.0, phi(start))
        target = peak - TAIL_LOG
        hi = np.full(q.shape, a)
        # decreasing on [start, a]; if even start is below target, the cut lies
        # on the decreasing piece [x, -turn]
        on_tail = (phi(hi) < target) & (phi(start) >= target)
        on_head = phi(start) < target
        if on_tail.any():
            f_cut = lambda t: phi(t, q[on_tail])  # noqa: E731
            hi[on_tail] = _bisect(f_cut, start[on_tail], hi[on_tail], target[on_tail], increasing=False)
        if on_head.any():
            f_cut = lambda t: phi(t, q[on_head])  # noqa: E731
            right = np.minimum(start, -turn)[on_head]
            hi[on_head] = _bisect(f_cut, q[on_head], right, target[on_head], increasing=False)
        nodes_fun = lambda t: np.exp(phi(t, q[:, None]) - peak[:, None]) / h  # noqa: E731
    else:
        # phi(x) = g(y) - g(x); increasing in x for x < -turn
        phi = lambda x, y=q: _g(y, h, mu, k) - _g(x, h, mu, k)  # noqa: E731
        hi = q.copy()
        end = np.clip(np.minimum(q, -turn), -a0, q)
        peak = np.maximum(0.0, phi(end))
        target = peak - TAIL_LOG
        lo = np.full(q.shape, -a0)
        # increasing on [-a0, end]; if even end is below target, the cut lies
        # on the increasing piece [turn, y]
        on_head = (phi(lo) < target) & (phi(end) >= target)
        on_tail = phi(end) < target
        if on_head.any():
            f_cut = lambda t: phi(t, q[on_head])  # noqa: E731
            lo[on_head] = _bisect(f_cut, lo[on_head], end[on_head], target[on_head], increasing=True)
        if on_tail.any():
            f_cut = lambda t: phi(t, q[on_tail])  # noqa: E731
            left = np.maximum(end, turn)[on_tail]
            lo[on_tail] = _bisect(f_cut, left, q[on_tail], target[on_tail], increasing=True)
        nodes_fun = lambda t: np.exp(phi(t, q[:, None]) - peak[:, None]) / h  # noqa: E731

    res = simpson(nodes_fun, lo, hi, rtol=rtol)
    with np.errstate(over="ignore"):
        scale = np.exp(peak)
    value[active] = res.value * scale
    error[active] = res.error * scale
    return value, error


@dataclass(frozen=True)
class SchurBound:
    """Schur-test suprema ``S1 = sup_x int |K| dy`` and ``S2 = sup_y int |K| dx``."""

    S1: float
    S2: float
    argmax_x: float
    argmax_y: float
    error1: float
    error2: float

    @property
    def norm_bound(self) -> float:
        return math.sqrt(self.S1 * self.S2)

    @property
    def rel_error(self) -> float:
        return max(self.error1 / self.S1, self.error2 / self.S2)


def _sup(params, over_y, mesh, refine, rtol):
    a0 = params.a0
    pts = np.linspace(-a0, a0, mesh)
    vals, errs = _row_integrals(params, pts, over_y, rtol)
    i = int(np.argmax(vals))
    best, best_pt, best_err = vals[i], pts[i], errs[i]
    fine = np.linspace(pts[max(i - 1, 0)], pts[min(i + 1, mesh - 1)], refine)
    fv, fe = _row_integrals(params, fine, over_y, rtol)
    j = int(np.argmax(fv))
    if fv[j] > best:
        best, best_pt, best_err = fv[j], fine[j], fe[j]
    return float(best), float(best_pt), float(best_err)


def schur_bound(params: SemiclassicalParams, mesh: int = 2001, refine: int = 201, rtol: float = 1e-6) -> SchurBound:
    """Both Schur-test suprema over ``I = [-a0, a0]``.

    The suprema are taken over a uniform ``mesh``-point grid followed by one
    refinement pass of ``refine`` points between the neighbours of the
    coarse argmax.  Each integral uses Simpson doubling to ``rtol``.
    """
    S1, x1, e1 = _sup(params, True, mesh, refine, rtol)
    S2, y2, e2 = _sup(params, False, mesh, refine, rtol)
    return SchurBound(S1, S2, x1, y2, e1, e2)


@dataclass(frozen=True)
class KernelScalingReport:
    h_samples: np.ndarray
    schur_bounds: list = field(repr=False)
    fit: ExponentFit | None

    @property
    def S1(self) -> np.ndarray:
        return np.array([b.S1 for b in self.schur_bounds])

    @property
    def S2(self) -> np.ndarray:
        return np.array([b.S2 for b in self.schur_bounds])

    @property
    def errors(self) -> np.ndarray:
        return np.array([b.rel_error for b in self.schur_bounds])

    @property
    def fitted_slope(self) -> float:
        return self.fit.slope if self.fit is not None else math.nan


def scaling_fit(h_list, c: complex, a: float, a0: float, mu: float = 0.0, **schur_kw) -> KernelScalingReport:
    """Fit ``log S1`` against ``log h``; the expected slope is -2/3.

    Refuses (``FitRefusedError``) with fewer than 6 samples, fewer than two
    decades of ``h``, ``mu != 0``, or quadrature error estimates above 1e-4
    relative.
    """
    h = np.sort(np.asarray(h_list, dtype=float))[::-1]
    if h.size < 6:
        raise FitRefusedError(f"need at least 6 h-samples, got {h.size}")
    if h.max() / h.min() < 100 * (1 - 1e-12):
        raise FitRefusedError("h-samples must span at least two decades")
    if mu != 0:
        raise FitRefusedError("the pure power-law fit needs mu = 0")
    bounds = [schur_bound(SemiclassicalParams(hh, mu, c, a, a0), **schur_kw) for hh in h]
    report = KernelScalingReport(h, bounds, None)
    if np.any(report.errors > 1e-4):
        raise FitRefusedError(f"quadrature error estimates too large: {report.errors.max():.2e}")
    return KernelScalingReport(h, bounds, fit_scaling(h, report.S1))


def fit_scaling(h, S1) -> ExponentFit:
    return loglog_fit(h, S1)


# --------------------------------------------------------------------------
# elementary inequalities


def lemma1_check(s, t, eps):
    """``s - t <= eps (s^3 - t^3) + 1/eps`` for ``s >= t``, ``0 < eps < 1``."""
    s, t, eps = (np.asarray(v, dtype=float) for v in (s, t, eps))
    if np.any(s < t):
        raise ValueError("lemma1_check needs s >= t")
    if np.any((eps <= 0) | (eps >= 1)):
        raise ValueError("lemma1_check needs 0 < eps < 1")
    ok = s - t <= eps * (s**3 - t**3) + 1.0 / eps
    return ok[()] if ok.ndim == 0 else ok


def lemma1_sweep(samples: int = 100_000, seed: int = 0, box: float = 10.0):
    """Random ``(s >= t) in [-box, box]^2``, ``eps in (0, 1)``; returns the violating triples."""
    rng = np.random.default_rng(seed)
    st = np.sort(rng.uniform(-box, box, size=(samples, 2)), axis=1)
    eps = rng.uniform(0.0, 1.0, size=samples)
    eps = np.where(eps == 0.0, 0.5, eps)
    t, s = st[:, 0], st[:, 1]
    ok = lemma1_check(s, t, eps)
    return np.column_stack([s, t, eps])[~ok]


def theorem2_margin(x, y, mu, h, k, lambda_const, C_const):
    """``rhs - lhs`` of ``-g(x) + g(y) <= (lambda/h)(x^3 - y^3) + C mu^{3/2} / h``."""
    lhs = _g(y, h, mu, k) - _g(x, h, mu, k)
    rhs = (lambda_const * (x**3 - y**3) + C_const * mu**1.5) / h
    return rhs - lhs, np.abs(lhs) + np.abs(rhs)


def theorem2_inequality_check(x, y, params: SemiclassicalParams, lambda_const, C_const, rtol=1e-12):
    """Whether the cubic-exponent bound holds at ``(x, y)`` for the given constants.

    ``rtol`` is a rounding allowance relative to the magnitude of both sides
    (the bound is attained with equality at ``mu = 0``,
    ``lambda = Im(c)/6``).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < x):
        raise ValueError("need y >= x")
    if np.any(np.maximum(np.abs(x), np.abs(y)) > params.a0):
        raise ValueError("need max(|x|, |y|) <= a0")
    if params.mu < 0:
        raise ValueError("need mu >= 0")
    margin, scale = theorem2_margin(x, y, params.mu, params.h, params.k, lambda_const, C_const)
    ok = margin >= -rtol * scale
    return ok[()] if ok.ndim == 0 else ok


@dataclass(frozen=True)
class Theorem2Search:
    lambda_const: float | None
    C_const: float | None
    samples: int
    violations: int
    tried: list = field(repr=False)

    @property
    def found(self) -> bool:
        return self.lambda_const is not None


DEFAULT_LAMBDA_FACTORS = (1 / 3, 1 / 6, 1 / 12, 1 / 24, 1 / 48)
DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)


def theorem2_sample(samples=10_000, seed=0, a0=0.5, mu_range=(0.0, 0.01), h_range=(1e-3, 1e-1)):
    rng = np.random.default_rng(seed)
    xy = np.sort(rng.uniform(-a0, a0, size=(samples, 2)), axis=1)
    mu = rng.uniform(*mu_range, size=samples)
    h = np.exp(rng.uniform(math.log(h_range[0]), math.log(h_range[1]), size=samples))
    return xy[:, 0], xy[:, 1], mu, h


def theorem2_search(
    c_imag: float,
    samples: int = 10_000,
    seed: int = 0,
    a0: float = 0.5,
    mu_range=(0.0, 0.01),
    h_range=(1e-3, 1e-1),
    lambda_factors=DEFAULT_LAMBDA_FACTORS,
    C_grid=DEFAULT_C_GRID,
    rtol: float = 1e-12,
) -> Theorem2Search:
    """Search a coarse ``(lambda, C)`` grid for a pair valid on a random sweep.

    ``lambda`` runs over ``Im(c) * lambda_factors`` (largest first), ``C`` over
    ``C_grid`` (smallest first); the first pair with no violation wins.
    """
    x, y, mu, h = theorem2_sample(samples, seed, a0, mu_range, h_range)
    tried = []
    for fac in lambda_factors:
        lam = c_imag * fac
        for C in C_grid:
            margin, scale = theorem2_margin(x, y, mu, h, c_imag, lam, C)
            bad = int(np.count_nonzero(margin < -rtol * scale))
            tried.append((lam, C, bad))
            if bad == 0:
                return Theorem2Search(lam, C, samples, 0, tried)
    return Theorem2Search(None, None, samples, min(t[2] for t in tried), tried)


# --------------------------------------------------------------------------
# Airy-type tail integrals


def _tail_cut(x, lam, T):
    return np.cbrt(x**3 + T / lam)


def airy_tail_integral(x, lambda_const: float = 1.0, rtol: float = 1e-10):
    """``I(x) = int_x^inf exp(-lambda (y^3 - x^3)) dy``.

    The range is cut at ``y_c`` with ``lambda (y_c^3 - x^3) = T``.  Past the
    cut, ``y^3 - x^3 >= T + (y^3 - y_c^3)``, so the discarded tail is at most
    ``e^{-T} (max(-y_c, 0) + Gamma(4/3) lambda^{-1/3})``; ``T`` is raised until
    that bound is below ``rtol/100`` of the computed value.  The kept range is
    split where the exponent crosses 0, 1, 2, ..., T, so the integrand varies
    by at most a factor e on each piece.
    """
    if not lambda_const > 0:
        raise ValueError("lambda must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    lam = float(lambda_const)
    T = TAIL_LOG
    while True:
        levels = np.linspace(0.0, T, math.ceil(T) + 1)
        knots = _tail_cut(xs[:, None], lam, levels[None, :])
        knots[:, 0] = xs
        x0 = np.repeat(xs, levels.size - 1)
        res = simpson(
            lambda y: np.exp(-lam * (y**3 - x0[:, None] ** 3)),
            knots[:, :-1].ravel(),
            knots[:, 1:].ravel(),
            rtol=rtol * 0.1,
        )
        value = res.value.reshape(xs.size, -1).sum(axis=1)
        tail = math.exp(-T) * (np.maximum(-knots[:, -1], 0.0) + GAMMA_4_3 * lam ** (-1 / 3))
        if np.all(tail <= 0.01 * rtol * value):
            break
        T *= 2
        if T > 700:
            raise QuadratureError("cannot meet the tail bound for the requested tolerance")
    return float(value[0]) if np.ndim(x) == 0 else value


def airy_head_integral(y, lambda_const: float = 1.0, rtol: float = 1e-10):
    """``J(y) = int_{-inf}^y exp(-lambda (y^3 - x^3)) dx``, equal to ``I(-y)``."""
    return airy_tail_integral(-np.asarray(y, dtype=float), lambda_const, rtol)
