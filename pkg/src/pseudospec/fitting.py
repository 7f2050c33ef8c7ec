"""Least-squares power-law fits on log-log data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitRefusedError(ValueError):
    """Too few (or unsuitable) samples for a meaningful fit."""


@dataclass(frozen=True)
class ExponentFit:
    """``log y ~ slope * log x + intercept`` by ordinary least squares.

    ``residual`` is the sum of squared log residuals; ``window`` is the
    (min, max) of the abscissa actually used.
    """

    slope: float
    intercept: float
    residual: float
    n_points: int
    window: tuple[float, float]


def loglog_fit(x, y) -> ExponentFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise FitRefusedError("need at least two paired samples")
    if np.any(x <= 0) or np.any(y <= 0) or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitRefusedError("log-log fit needs positive finite data")
    lx, ly = np.log(x), np.log(y)
    X = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(X, ly, rcond=None)
    r = ly - (slope * lx + intercept)
    return ExponentFit(float(slope), float(intercept), float(r @ r), int(x.size), (float(x.min()), float(x.max())))
