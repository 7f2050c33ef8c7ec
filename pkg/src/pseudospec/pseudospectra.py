"""Pseudospectra of the discretized oscillator.

The epsilon-pseudospectrum of a matrix ``A`` is the set of ``z`` where
``sigma_min(A - zI) <= eps``, equivalently where the resolvent norm
``1/sigma_min`` is at least ``1/eps``, equivalently the union of the spectra
of ``A + E`` over all ``||E||_2 <= eps``.  This module samples
``sigma_min`` on rectangular windows, extracts level curves, traces resolvent
norms along ``z_eta = b eta + c eta^p``, fits power laws to the traces and
checks the perturbation characterization on random ensembles.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .fitting import ExponentFit, FitRefusedError, loglog_fit
from .operator import DiscretizedOperator, OscillatorParams, discretize, exact_eigenvalue, trusted_modulus

#: sigma_min is clamped below at this value before taking log10
SIGMA_FLOOR = 1e-16

#: relative change of log(resolvent norm) under refinement that still counts as stable
STABILITY_TOL = 1e-2


class TrustRegionWarning(UserWarning):
    """A curve sample lies beyond the modulus the discretization resolves."""


class ContainmentViolation(RuntimeError):
    """A perturbed eigenvalue left the eps-pseudospectrum."""

    def __init__(self, report):
        super().__init__(f"containment violated: max sigma_min/eps = {report.max_ratio!r}")
        self.report = report


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class ComplexWindow:
    """Rectangle ``[re_min, re_max] x [im_min, im_max]`` sampled on an ``nx x ny`` grid."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("window bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("window needs re_min < re_max and im_min < im_max")
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 2 or self.ny < 2:
            raise ValueError("grid resolution must be integers >= 2")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / (self.ny - 1)

    def points(self) -> np.ndarray:
        """Complex grid of shape ``(nx, ny)`` with ``Z[i, j] = re[i] + 1j * im[j]``."""
        return self.re[:, None] + 1j * self.im[None, :]


@dataclass(frozen=True)
class PseudospectrumField:
    """``sigma_min(A - zI)`` over a window; ``sigma_min[i, j]`` belongs to ``re[i] + 1j*im[j]``."""

    window: ComplexWindow
    sigma_min: np.ndarray = field(repr=False)
    c: complex
    N: int
    L: float

    @property
    def fingerprint(self) -> tuple:
        return (self.c, self.N, self.L)

    def log10(self) -> np.ndarray:
        return np.log10(np.maximum(self.sigma_min, SIGMA_FLOOR))

    def level_mask(self, eps: float) -> np.ndarray:
        return self.sigma_min <= eps

    def nesting_holds(self, levels) -> bool:
        """Whether ``{sigma <= e1}`` is contained in ``{sigma <= e2}`` for each ``e1 < e2``."""
        lv = sorted(float(e) for e in levels)
        masks = [self.level_mask(e) for e in lv]
        return all(not np.any(lo & ~hi) for lo, hi in zip(masks, masks[1:]))


_WORKER_MATRIX = None


def _init_worker(matrix):
    global _WORKER_MATRIX
    _WORKER_MATRIX = matrix


def _sigma_row(matrix, zs):
    out = np.empty(len(zs))
    n = matrix.shape[0]
    for k, z in enumerate(zs):
        A = matrix.copy()
        A[np.diag_indices(n)] -= z
        out[k] = linalg.smallest_singular_value(A)
    return out


def _worker_row(zs):
    return _sigma_row(_WORKER_MATRIX, zs)


def compute_field(op: DiscretizedOperator, window: ComplexWindow, workers: int = 1) -> PseudospectrumField:
    """Sample ``sigma_min(H - zI)`` at every window point.

    Each point is an independent computation with a fixed starting block, so
    the result does not depend on evaluation order or on ``workers``; rows
    (fixed ``Re z``) are farmed out to a process pool when ``workers > 1``.
    """
    if int(workers) != workers or workers < 1:
        raise ValueError("workers must be a positive integer")
    Z = window.points()
    rows = [Z[i] for i in range(window.nx)]
    if workers == 1:
        sig = np.array([_sigma_row(op.matrix, r) for r in rows])
    else:
        with ProcessPoolExecutor(int(workers), initializer=_init_worker, initargs=(op.matrix,)) as ex:
            sig = np.array(list(ex.map(_worker_row, rows)))
    if not np.all(np.isfinite(sig)):
        raise linalg.LinalgError("non-finite sigma_min in pseudospectrum field")
    sig.setflags(write=False)
    return PseudospectrumField(window, sig, op.c, op.N, op.L)


def resolvent_norm_at(op: DiscretizedOperator, z: complex) -> float:
    """``1/sigma_min(H - zI)``; ``inf`` when ``z`` is an eigenvalue to working precision."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("z must be finite")
    s = linalg.smallest_singular_value(op.shifted(z))
    return math.inf if s == 0 else 1.0 / s


# --------------------------------------------------------------------------
# contours

# corner order around a cell: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1);
# edge e joins corners e and e+1 (mod 4)
_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))


def _edge_key(i, j, e):
    if e == 0:
        return ("h", i, j)
    if e == 1:
        return ("v", i + 1, j)
    if e == 2:
        return ("h", i, j + 1)
    return ("v", i, j)


def _cell_segments(out, center_out):
    """Edge pairs crossed by the level inside one cell; ``out`` flags the four corners."""
    crossed = [e for e in range(4) if out[e] != out[(e + 1) % 4]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        # saddle: the centre value decides which diagonal pair is connected
        if center_out == out[0]:
            return [(0, 1), (2, 3)]
        return [(3, 0), (1, 2)]
    return []


def _stitch(segments):
    adj: dict = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen = set()
    lines = []
    # open chains start at degree-1 keys, then the rest are loops
    starts = [k for k, v in adj.items() if len(v) == 1] + list(adj)
    for s in starts:
        if s in seen:
            continue
        chain = [s]
        seen.add(s)
        prev, cur = None, s
        while True:
            nxt = [k for k in adj[cur] if k != prev and k not in seen]
            if not nxt:
                if prev is not None and s in adj[cur] and len(chain) > 2:
                    chain.append(s)
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)
        lines.append(chain)
    return lines


def contour_level(values, xs, ys, level):
    """Marching-squares polylines of ``{values == level}`` as complex arrays ``x + 1j*y``.

    ``values[i, j]`` is sampled at ``(xs[i], ys[j])``; cells whose corners all
    exceed or all stay below ``level`` produce nothing.
    """
    F = np.asarray(values, dtype=float)
    nx, ny = F.shape
    out = F > level
    crossing = ~(
        (out[:-1, :-1] == out[1:, :-1]) & (out[:-1, :-1] == out[1:, 1:]) & (out[:-1, :-1] == out[:-1, 1:])
    )
    segs = []
    for i, j in zip(*np.nonzero(crossing)):
        corner_vals = [F[i + di, j + dj] for di, dj in _CORNERS]
        corner_out = [v > level for v in corner_vals]
        centre_out = np.mean(corner_vals) > level
        for e0, e1 in _cell_segments(corner_out, centre_out):
            segs.append((_edge_key(i, j, e0), _edge_key(i, j, e1)))

    def point(key):
        kind, i, j = key
        i2, j2 = (i + 1, j) if kind == "h" else (i, j + 1)
        f1, f2 = F[i, j], F[i2, j2]
        t = 0.5 if f1 == f2 else (level - f1) / (f2 - f1)
        return complex(xs[i] + t * (xs[i2] - xs[i]), ys[j] + t * (ys[j2] - ys[j]))

    return [np.array([point(k) for k in chain]) for chain in _stitch(segs)]


def contours(field: PseudospectrumField, eps_levels) -> list[list[np.ndarray]]:
    """Level curves ``sigma_min = eps`` for each level, as lists of complex polylines.

    Extraction runs on ``log10(max(sigma_min, 1e-16))``.  The field is padded by
    one layer of large values sitting on the window edge, so every region that
    touches the boundary is closed along it; a level above the whole field
    yields the window rectangle.
    """
    levels = [float(e) for e in eps_levels]
    if any(not (e > 0 and math.isfinite(e)) for e in levels):
        raise ValueError("levels must be positive and finite")
    if levels != sorted(levels, reverse=True):
        raise ValueError("levels must be sorted in descending order")
    F = field.log10()
    big = max(float(F.max()), max(math.log10(e) for e in levels)) + 1.0
    P = np.pad(F, 1, constant_values=big)
    re, im = field.window.re, field.window.im
    xs = np.concatenate([[re[0]], re, [re[-1]]])
    ys = np.concatenate([[im[0]], im, [im[-1]]])
    return [_dedupe_all(contour_level(P, xs, ys, math.log10(e))) for e in levels]


def _dedupe_all(lines):
    # padding cells have zero width, so consecutive vertices can coincide
    res = []
    for line in lines:
        keep = np.concatenate([[True], line[1:] != line[:-1]])
        line = line[keep]
        if line.size >= 2:
            res.append(line)
    return res


def point_in_polygon(points, polygon) -> np.ndarray:
    """Even-odd ray-casting test of complex ``points`` against a closed complex polyline."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    poly = np.asarray(polygon, dtype=complex)
    x, y = pts.real[:, None], pts.imag[:, None]
    x1, y1 = poly.real[None, :], poly.imag[None, :]
    x2, y2 = np.roll(poly.real, -1)[None, :], np.roll(poly.imag, -1)[None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    inside = np.count_nonzero(straddle & (x < xcross), axis=1) % 2 == 1
    return inside


# --------------------------------------------------------------------------
# curves and fits


def curve_points(b: float, c: complex, p: float, eta) -> np.ndarray:
    """``z_eta = b eta + c eta^p``."""
    eta = np.asarray(eta, dtype=float)
    return b * eta + complex(c) * eta**p


@dataclass(frozen=True)
class CurveTrace:
    """Resolvent norms sampled along ``z_eta = b eta + c eta^p``.

    ``stable`` marks samples inside the trust radius whose log-norm moved by
    less than 1e-2 when recomputed on the refined discretization
    ``(2N, L*sqrt(2))``; ``reference_norms`` holds those recomputed values
    (NaN when the check was skipped).
    """

    b: float
    p: float
    c: complex
    eta: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    sigma_min: np.ndarray = field(repr=False)
    resolvent_norms: np.ndarray = field(repr=False)
    stable: np.ndarray = field(repr=False)
    reference_norms: np.ndarray = field(repr=False)
    N: int
    L: float
    trust_radius: float

    @property
    def n_stable(self) -> int:
        return int(np.count_nonzero(self.stable))


def eta_samples(eta_range, samples: int, spacing: str = "log") -> np.ndarray:
    lo, hi = (float(v) for v in eta_range)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise ValueError("eta range needs 0 < eta_min < eta_max")
    if int(samples) != samples or samples < 2:
        raise ValueError("samples must be an integer >= 2")
    if spacing == "log":
        return np.geomspace(lo, hi, int(samples))
    if spacing == "linear":
        return np.linspace(lo, hi, int(samples))
    raise ValueError(f"unknown spacing {spacing!r}")


def eta_at_modulus(b: float, c: complex, p: float, modulus: float, eta_min: float = 1e-12) -> float:
    """Largest ``eta`` with ``|z_eta| <= modulus``, found by bisection.

    ``|z_eta|`` increases with ``eta`` when ``b > 0`` and ``Re c > 0``.
    """
    f = lambda e: abs(b * e + c * e**p)  # noqa: E731
    lo, hi = eta_min, max(1.0, eta_min)
    if f(lo) >= modulus:
        return lo
    while f(hi) < modulus:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < modulus:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    return lo


def trace_curve(
    op: DiscretizedOperator,
    b: float,
    p: float,
    eta_range,
    samples: int,
    spacing: str = "log",
    check_stability: bool = True,
) -> CurveTrace:
    """Resolvent norms of ``op`` along ``z_eta`` with the stability filter applied."""
    if not b > 0:
        raise ValueError("b must be positive")
    eta = eta_samples(eta_range, samples, spacing)
    z = curve_points(b, op.c, p, eta)
    radius = trusted_modulus(op.params, op.N)
    outside = np.abs(z) > radius
    if outside.any():
        warnings.warn(
            f"{int(outside.sum())} of {len(z)} samples exceed the trust radius {radius:.6g}",
            TrustRegionWarning,
            stacklevel=2,
        )
    sig = np.array([linalg.smallest_singular_value(op.shifted(zz)) for zz in z])
    with np.errstate(divide="ignore"):
        norms = 1.0 / sig
    stable = ~outside
    ref = np.full(len(z), np.nan)
    if check_stability:
        fine = discretize(op.params, 2 * op.N, op.L * math.sqrt(2.0))
        ref_sig = np.array([linalg.smallest_singular_value(fine.shifted(zz)) for zz in z])
        with np.errstate(divide="ignore"):
            ref = 1.0 / ref_sig
            drift = np.abs(np.log(norms) - np.log(ref))
        stable &= np.isfinite(drift) & (drift < STABILITY_TOL)
    return CurveTrace(float(b), float(p), op.c, eta, z, sig, norms, stable, ref, op.N, op.L, radius)


def synthetic_trace(b: float, p: float, c: complex, eta, norms) -> CurveTrace:
    """A trace with prescribed norms, every sample marked stable (for self-tests)."""
    eta = np.asarray(eta, dtype=float)
    norms = np.asarray(norms, dtype=float)
    z = curve_points(b, c, p, eta)
    return CurveTrace(
        float(b), float(p), complex(c), eta, z, 1.0 / norms, norms, np.ones(len(eta), bool),
        np.full(len(eta), np.nan), 0, math.nan, math.inf,
    )  # fmt: skip


def fit_exponent(trace: CurveTrace, tail_fraction: float = 0.5, min_points: int = 8) -> ExponentFit:
    """OLS slope of ``log(resolvent norm)`` against ``log|z|`` over the stable tail.

    The tail is the last ``ceil(tail_fraction * n_stable)`` stable samples in
    ``eta`` order; fewer than ``min_points`` of them is a refusal.
    """
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    idx = np.flatnonzero(trace.stable)
    idx = idx[np.argsort(trace.eta[idx], kind="stable")]
    keep = idx[len(idx) - math.ceil(tail_fraction * len(idx)) :]
    if len(keep) < min_points:
        raise FitRefusedError(f"only {len(keep)} stable tail samples (need {min_points})")
    return loglog_fit(np.abs(trace.z[keep]), trace.resolvent_norms[keep])


# --------------------------------------------------------------------------
# regions


def sector_membership(z: complex, C0: float) -> bool:
    """``Re z > 0`` and ``|Im z| <= C0 (Re z)^{1/3}``."""
    z = complex(z)
    return bool(z.real > 0 and abs(z.imag) <= C0 * z.real ** (1.0 / 3.0))


def omega_parameters(c: complex, m: int, p: float) -> tuple[float, float]:
    """The unique ``(b, E)`` with ``b E + c E^p = lambda_m`` for real ``b, E``.

    Matching imaginary parts fixes ``E^p = Im(lambda_m)/Im(c)``; the real
    parts then give ``b``.  Needs ``Im c > 0``; raises if ``b`` comes out
    nonpositive.
    """
    c = complex(c)
    _check_p(p)
    if not c.imag > 0:
        raise ValueError("need Im(c) > 0")
    lam = exact_eigenvalue(OscillatorParams(c), m)
    Ep = lam.imag / c.imag
    E = Ep ** (1.0 / p)
    b = (lam.real - c.real * Ep) / E
    if not b > 0:
        raise ValueError(f"no positive b for m={m}, p={p}")
    return b, E


def _check_p(p):
    if not 0 < p < 1.0 / 3.0:
        raise ValueError(f"p must lie in (0, 1/3), got {p!r}")


def omega_region_membership(z: complex, m: int, p: float, c: complex, b_mp: float, E: float, tol: float = 1e-12) -> bool:
    """Whether ``z = |z_eta| e^{i theta}`` for some ``eta >= E`` inside the angle bracket.

    With ``z_eta = b_mp eta + c eta^p`` the bracket is
    ``arg(z_eta) <= theta <= arg(c conj(z_eta)/|c|)``.  The pair ``(b_mp, E)``
    must satisfy ``b_mp E + c E^p = lambda_m`` to 1e-10 relative.
    """
    _check_p(p)
    c, z = complex(c), complex(z)
    lam = exact_eigenvalue(OscillatorParams(c), m)
    if abs(b_mp * E + c * E**p - lam) > 1e-10 * abs(lam):
        raise ValueError("b_mp and E do not satisfy b E + c E^p = lambda_m")
    r = abs(z)
    zE = b_mp * E + c * E**p
    if r < abs(zE) * (1 - tol):
        return False
    eta = max(E, eta_at_modulus(b_mp, c, p, r, eta_min=E))
    zeta = b_mp * eta + c * eta**p
    lo = np.angle(zeta)
    hi = np.angle(c * np.conj(zeta) / abs(c))
    theta = np.angle(z)
    slack = tol * max(1.0, abs(theta))
    return bool(lo - slack <= theta <= hi + slack)


# --------------------------------------------------------------------------
# perturbation ensemble


@dataclass(frozen=True)
class PerturbationReport:
    eps: float
    trials: int
    seed: int
    ratios: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    max_ratio: float
    passed: bool


def perturbation_check(op: DiscretizedOperator, eps: float, trials: int, seed: int, strict: bool = True) -> PerturbationReport:
    """Eigenvalues of ``H + E`` with ``||E||_2 = eps`` must lie in the eps-pseudospectrum.

    ``E`` has independent entries uniform on ``[-1, 1] + i[-1, 1]``, rescaled to
    2-norm ``eps``.  For every perturbed eigenvalue ``mu`` the ratio
    ``sigma_min(H - mu I)/eps`` is computed; ``ratios`` holds the per-trial
    maxima.  A ratio above ``1 + 1e-6`` raises :class:`ContainmentViolation`
    when ``strict``.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("eps must be positive and finite")
    if int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    rng = np.random.default_rng(seed)
    n = op.size
    ratios = np.empty(int(trials))
    eigs = np.empty((int(trials), n), dtype=complex)
    for t in range(int(trials)):
        E = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
        E *= eps / linalg.matrix_two_norm(E)
        mu = linalg.eigenvalues(op.matrix + E).eigenvalues
        mu = mu[np.lexsort((mu.imag, mu.real))]
        eigs[t] = mu
        ratios[t] = max(linalg.smallest_singular_value(op.shifted(m)) for m in mu) / eps
    max_ratio = float(ratios.max())
    report = PerturbationReport(float(eps), int(trials), int(seed), ratios, eigs, max_ratio, max_ratio <= 1 + 1e-6)
    if strict and not report.passed:
        raise ContainmentViolation(report)
    return report
