"""Stationarity test on per-chain log-potential traces that gates optimization.

Each trace is split into three segments of length n = ceil(t/3); the test
compares the means of the two latter segments against the detrended residual
noise within them. Optimization starts once the median per-chain statistic
drops below the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotReadyError


@dataclass
class HotStartConfig:
    threshold: float = 0.5
    min_iters: int = 9

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.min_iters < 9:
            # each segment needs >= 3 points so the linear fits keep n-2 > 0
            raise ValueError("min_iters must be at least 9")


def _linear_fit_rss(positions, values) -> float:
    """Residual sum of squares of the least-squares line a + b*j.

    Centering the regressor is numerically safer and leaves residuals
    unchanged (shift invariance).
    """
    x = np.asarray(positions, dtype=float)
    y = np.asarray(values, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        return 0.0
    rss = float(yc @ yc) - float(xc @ yc) ** 2 / sxx
    return max(rss, 0.0)


def segment_stats(trace):
    """Means and detrended residual standard deviations of the two latter segments.

    With n = ceil(t/3), segment 1 covers iterations n+1..2n and segment 2
    covers 2n+1..t (which may be shorter than n). Means are true segment
    means; both residual variances divide by n-2 degrees of freedom.
    """
    y = np.asarray(trace, dtype=float)
    t = y.size
    if t < 9:
        raise NotReadyError(f"need at least 9 iterations, have {t}")
    n = -(-t // 3)
    seg1 = y[n : 2 * n]
    seg2 = y[2 * n : t]
    pos1 = np.arange(n + 1, 2 * n + 1, dtype=float)
    pos2 = np.arange(2 * n + 1, t + 1, dtype=float)
    m1 = float(seg1.mean())
    m2 = float(seg2.mean())
    s1 = float(np.sqrt(_linear_fit_rss(pos1, seg1) / (n - 2)))
    s2 = float(np.sqrt(_linear_fit_rss(pos2, seg2) / (n - 2)))
    return m1, m2, s1, s2


def trace_statistic(trace) -> float:
    """|m1 - m2| / max(s1, s2), with 0/0 = 0 and positive/0 = +inf."""
    m1, m2, s1, s2 = segment_stats(trace)
    numerator = abs(m1 - m2)
    denominator = max(s1, s2)
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else np.inf
    return numerator / denominator


def hot_start_statistic(histories) -> float:
    """Median of the per-chain statistics; NaN while any trace is too short."""
    lengths = {len(h) for h in histories}
    if len(lengths) != 1:
        raise ValueError("all chains must have equal-length histories")
    t = lengths.pop()
    if t < 9:
        return float("nan")
    return float(np.median([trace_statistic(h) for h in histories]))


def hot_start_test(histories, config: HotStartConfig | None = None) -> bool:
    """True once the median statistic over chains falls below the threshold.

    Returns False (rather than raising) while the traces are shorter than
    ``min_iters``.
    """
    config = config or HotStartConfig()
    lengths = {len(h) for h in histories}
    if len(lengths) != 1:
        raise ValueError("all chains must have equal-length histories")
    if lengths.pop() < config.min_iters:
        return False
    return hot_start_statistic(histories) < config.threshold
