"""Localization error metrics and Student-t confidence intervals."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import betainc


def ale(predictions, ground_truth, R: float) -> tuple[float, int]:
    """Normalized average localization error in percent of R.

    Rows of ``predictions`` containing NaN are unlocatable: they are left
    out of the average and counted.  Returns ``(ale_pct, n_unlocatable)``;
    the error is NaN when nothing was located.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    pred = np.asarray(predictions, dtype=float).reshape(-1, 3)
    gt = np.asarray(ground_truth, dtype=float).reshape(-1, 3)
    if pred.shape != gt.shape:
        raise ValueError("predictions and ground truth must cover the same nodes")
    located = np.all(np.isfinite(pred), axis=1)
    n_bad = int(np.sum(~located))
    if not located.any():
        return math.nan, n_bad
    err = np.linalg.norm(pred[located] - gt[located], axis=1)
    return float(100.0 * err.sum() / (located.sum() * R)), n_bad


def ala(ales) -> float:
    """Average localization accuracy: 100 minus the mean ALE (percent)."""
    return 100.0 - float(np.mean(ales))


def apg(ales_ours, ales_other) -> float:
    """Mean gain (percentage points) of ours over another method on matched cells."""
    ours = np.asarray(ales_ours, dtype=float)
    other = np.asarray(ales_other, dtype=float)
    if ours.shape != other.shape:
        raise ValueError("grids must match")
    return float(np.mean(other - ours))


def t_cdf(t: float, dof: float) -> float:
    x = dof / (dof + t * t)
    tail = 0.5 * betainc(dof / 2.0, 0.5, x)
    return 1.0 - tail if t >= 0 else tail


def t_quantile(p: float, dof: float) -> float:
    """Inverse Student-t CDF by bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p < 0.5:
        return -t_quantile(1.0 - p, dof)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, dof) < p:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, dof) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def confidence_interval(samples, alpha: float = 0.05) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two samples")
    mean = float(x.mean())
    s = float(np.std(x, ddof=1))
    half = s / math.sqrt(n) * t_quantile(1.0 - alpha / 2.0, n - 1)
    return mean - half, mean + half
