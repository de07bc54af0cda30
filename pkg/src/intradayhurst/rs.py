"""
Rescaled-range statistics
=========================

For a window ``x_1..x_n`` with mean ``m``::

    R     = max_k S_k - min_k S_k,   S_k = sum_{j<=k} (x_j - m),  k = 1..n
    sigma = sqrt(sum (x_j - m)^2 / n)          (population divisor)
    h     = ln(R / sigma) / ln(n)

``local_hurst_stream`` evaluates every one of the ``N - n + 1`` overlapping
windows of a series; ``global_hurst`` regresses log mean R/sigma on log n
over non-overlapping blocks.  Windows whose standard deviation vanishes are
skipped and counted, never imputed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats

# degenerate-window threshold, relative to the largest magnitude in the input
DEGENERATE_RTOL = 1e-12
_CHUNK = 1 << 18  # window elements per batch in the rolling computation


class RescaledRange(NamedTuple):
    range_r: float
    sigma: float
    rs: float
    degenerate: bool


@dataclass(frozen=True)
class LocalHurstStream:
    """Per-window statistics for one window size ``n``.

    Arrays cover the non-degenerate windows only, in order of
    ``start_index``.  ``end_timestamp`` and ``hour`` come from the window's
    anchor observation (its last one by default) and are ``None`` when the
    input carried no time tags.
    """

    n: int
    start_index: np.ndarray
    range_r: np.ndarray
    sigma: np.ndarray
    rs: np.ndarray
    h: np.ndarray
    skipped: int
    positions: int
    end_timestamp: np.ndarray | None = None
    hour: np.ndarray | None = None

    def __len__(self):
        return len(self.h)

    @property
    def mean_h(self) -> float:
        return float(self.h.mean()) if len(self.h) else float("nan")


@dataclass(frozen=True)
class GlobalHurstFit:
    exponent_h: float
    intercept: float
    r_squared: float
    points: tuple[tuple[int, float], ...]

    def to_dict(self):
        return {"exponent_h": self.exponent_h, "intercept": self.intercept,
                "r_squared": self.r_squared,
                "points": [{"n": n, "mean_rs": rs} for n, rs in self.points]}


@dataclass(frozen=True)
class AutocorrelationDiagnostic:
    lags: np.ndarray
    rho: np.ndarray


def _window_stats(windows: np.ndarray, ddof: int = 0, scale: float | None = None):
    """R, sigma and degenerate mask for each row of a 2-D window array.

    A window is degenerate when sigma <= DEGENERATE_RTOL * scale, with
    ``scale`` the largest magnitude in the input (rounding noise of a
    constant window stays below that).
    """
    n = windows.shape[1]
    mean = windows.sum(axis=1, keepdims=True) / n
    dev = windows - mean
    partial = np.cumsum(dev, axis=1)
    range_r = partial.max(axis=1) - partial.min(axis=1)
    sigma = np.sqrt((dev * dev).sum(axis=1) / (n - ddof))
    if scale is None:
        scale = float(np.abs(windows).max()) if windows.size else 0.0
    degenerate = sigma <= DEGENERATE_RTOL * scale
    return range_r, sigma, degenerate


def rescaled_range(window: Sequence[float], ddof: int = 0) -> RescaledRange:
    """Range, standard deviation and their ratio for a single window.

    ``ddof=0`` gives the population standard deviation; ``ddof=1`` is offered
    for sensitivity checks.  Constant windows come back with
    ``degenerate=True``, ``sigma=0`` and ``rs=nan``.

    >>> rescaled_range([1, 2, 3, 4]).range_r
    2.0
    """
    w = np.asarray(window, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("window needs at least 2 values")
    r, s, deg = _window_stats(w[None, :], ddof)
    if deg[0]:
        return RescaledRange(float(r[0]), 0.0, float("nan"), True)
    return RescaledRange(float(r[0]), float(s[0]), float(r[0] / s[0]), False)


def _unpack(series):
    """Values plus optional epoch timestamps and hours from a series-like input."""
    if hasattr(series, "ar") and hasattr(series, "hour"):
        return (np.asarray(series.ar, dtype=float), np.asarray(series.timestamp),
                np.asarray(series.hour))
    return np.asarray(series, dtype=float), None, None


def local_hurst_stream(series, n: int, *, ddof: int = 0, anchor: str = "end",
                       hours=None, timestamps=None) -> LocalHurstStream:
    """Local Hurst exponents over all overlapping windows of length ``n``.

    Parameters
    ----------
    series : ReturnSeries or array_like
        A :class:`~intradayhurst.returns.ReturnSeries` contributes its
        timestamps and hour tags; a plain sequence may pass ``hours`` and
        ``timestamps`` explicitly.
    n : int
        Window length, at least 2.
    anchor : {"end", "start"}
        Which observation of a window supplies its timestamp and hour.

    Returns
    -------
    LocalHurstStream
        ``len(stream) + stream.skipped == N - n + 1``.
    """
    values, ts, hr = _unpack(series)
    if hours is not None:
        hr = np.asarray(hours)
    if timestamps is not None:
        ts = np.asarray(timestamps)
    if n < 2:
        raise ValueError("window size n must be >= 2")
    N = values.size
    if N < n:
        raise ValueError(f"series length {N} shorter than window size {n}")
    if anchor not in ("end", "start"):
        raise ValueError("anchor must be 'end' or 'start'")

    positions = N - n + 1
    windows = sliding_window_view(values, n)
    range_r = np.empty(positions)
    sigma = np.empty(positions)
    degenerate = np.empty(positions, dtype=bool)
    scale = float(np.abs(values).max())
    step = max(1, _CHUNK // n)
    for lo in range(0, positions, step):
        hi = min(lo + step, positions)
        range_r[lo:hi], sigma[lo:hi], degenerate[lo:hi] = _window_stats(windows[lo:hi], ddof, scale)

    ok = ~degenerate
    start = np.flatnonzero(ok)
    r, s = range_r[ok], sigma[ok]
    rs = r / s
    with np.errstate(divide="ignore"):
        h = np.log(rs) / math.log(n)
    anchor_idx = start + (n - 1 if anchor == "end" else 0)
    return LocalHurstStream(
        n=n, start_index=start, range_r=r, sigma=s, rs=rs, h=h,
        skipped=int(degenerate.sum()), positions=positions,
        end_timestamp=None if ts is None else ts[anchor_idx],
        hour=None if hr is None else hr[anchor_idx],
    )


def decomposition_components(stream: LocalHurstStream, log_base: float = 10.0):
    """Per-window ``(log R, log sigma)`` in ``log_base``.

    ``(log R - log sigma) / log n`` in the same base recovers ``stream.h``.
    """
    lb = math.log(log_base)
    return np.log(stream.range_r) / lb, np.log(stream.sigma) / lb


def reconstruct_h(log_r, log_sigma, n, log_base: float = 10.0):
    """Local exponent from the logs of range and standard deviation."""
    return (np.asarray(log_r) - np.asarray(log_sigma)) / (math.log(n) / math.log(log_base))


def default_lengths(N: int, smallest: int = 8, factor: int = 2) -> list[int]:
    """Geometric grid ``smallest, smallest*factor, ...`` up to ``N // 4``."""
    out, n = [], smallest
    while n <= N // 4:
        out.append(n)
        n *= factor
    return out


def block_mean_rs(values, n: int, ddof: int = 0) -> tuple[float, int]:
    """Mean R/sigma over the non-overlapping blocks of length ``n``, and the block count used."""
    values = np.asarray(values, dtype=float)
    blocks = values[: (values.size // n) * n].reshape(-1, n)
    r, s, deg = _window_stats(blocks, ddof)
    ok = ~deg
    if not ok.any():
        return float("nan"), 0
    return float((r[ok] / s[ok]).mean()), int(ok.sum())


def global_hurst(series, lengths: Sequence[int] | None = None, ddof: int = 0) -> GlobalHurstFit:
    """Global Hurst exponent as the OLS slope of ln mean(R/sigma)_n on ln n.

    For each ``n`` the series is cut into ``N // n`` contiguous blocks; the
    mean R/sigma over non-degenerate blocks gives one regression point.
    ``lengths`` defaults to :func:`default_lengths`.
    """
    values, _, _ = _unpack(series)
    N = values.size
    lengths = default_lengths(N) if lengths is None else sorted(set(int(n) for n in lengths))
    if len(lengths) < 3:
        raise ValueError("need at least 3 distinct window lengths")
    if lengths[0] < 2 or lengths[-1] > N // 2:
        raise ValueError(f"window lengths must lie in [2, N/2] = [2, {N // 2}]")

    points = []
    for n in lengths:
        mean_rs, used = block_mean_rs(values, n, ddof)
        if used == 0:
            raise ValueError(f"all blocks degenerate at n={n}")
        points.append((n, mean_rs))
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    fit = stats.linregress(x, y)
    return GlobalHurstFit(float(fit.slope), float(fit.intercept),
                          float(min(1.0, fit.rvalue ** 2)), tuple(points))


def autocorrelation(series, max_lag: int) -> AutocorrelationDiagnostic:
    """Sample autocorrelation at lags 0..max_lag (lag 0 is 1 by construction)."""
    values, _, _ = _unpack(series)
    N = values.size
    if not 0 < max_lag < N / 2:
        raise ValueError("max_lag must satisfy 0 < max_lag < N/2")
    if np.ptp(values) == 0:
        raise ValueError("autocorrelation undefined for a constant series")
    dev = values - values.mean()
    denom = float(dev @ dev)
    rho = np.array([1.0] + [float(dev[:-k] @ dev[k:]) / denom for k in range(1, max_lag + 1)])
    return AutocorrelationDiagnostic(np.arange(max_lag + 1), rho)
