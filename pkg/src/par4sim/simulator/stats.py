"""Small statistics helpers for curve checks."""

from __future__ import annotations

import math

# Two-sided 95% Student-t critical values by degrees of freedom.
_T_CRIT_95 = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365,
    8: 2.306, 9: 2.262, 10: 2.228, 11: 2.201, 12: 2.179, 13: 2.160, 14: 2.145,
    15: 2.131, 16: 2.120, 17: 2.110, 18: 2.101, 19: 2.093, 20: 2.086,
    25: 2.060, 30: 2.042,
}


def t_critical_95(df: int) -> float:
    if df < 1:
        raise ValueError("df must be >= 1")
    if df in _T_CRIT_95:
        return _T_CRIT_95[df]
    keys = sorted(_T_CRIT_95)
    for key in keys:
        if df < key:
            return _T_CRIT_95[key]
    return 1.960


def slope_t_statistic(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """OLS slope and its t statistic; requires at least 3 points."""
    n = len(xs)
    if n != len(ys) or n < 3:
        raise ValueError("need at least 3 paired points")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("x has no variance")
    slope = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sxx
    intercept = mean_y - slope * mean_x
    rss = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    variance = rss / (n - 2)
    if variance == 0:
        return slope, 0.0 if slope == 0 else math.inf
    se = math.sqrt(variance / sxx)
    return slope, slope / se


def slope_is_flat(xs: list[float], ys: list[float]) -> bool:
    """True when the OLS slope is statistically indistinguishable from zero."""
    _slope, t_stat = slope_t_statistic(xs, ys)
    return abs(t_stat) < t_critical_95(len(xs) - 2)
