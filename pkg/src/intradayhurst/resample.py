"""
Scramble bootstrap and Z-test
=============================

Shuffling a return series destroys its temporal dependence while keeping its
marginal distribution.  Repeating the local-Hurst computation on many shuffles
yields the exponent's distribution under independence, including the
small-window bias of R/S.  The observed mean exponent is then compared with
that expectation by a one-sample Z-test.

Only the values move: timestamps and hour tags stay at their positions, so a
per-hour bootstrap mean is well defined.

Iteration ``i`` draws from ``SeedSequence(master_seed, spawn_key=(i,))``, so
results depend only on ``(master_seed, iterations, series)``, never on how many
workers ran them.
"""
from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .rs import LocalHurstStream, local_hurst_stream, _unpack


class DegenerateWindowError(RuntimeError):
    """Too many constant windows for a meaningful local-Hurst stream."""


@dataclass(frozen=True)
class BootstrapConfig:
    iterations: int = 1000
    window_sizes: tuple[int, ...] = (10, 20)
    master_seed: int = 0
    confidence: float = 0.95
    interval: str = "normal"
    workers: int = 1
    max_degenerate_fraction: float = 0.5
    keep_timestamps: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if any(n < 2 for n in self.window_sizes):
            raise ValueError("window sizes must be >= 2")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.interval not in ("normal", "percentile"):
            raise ValueError("interval must be 'normal' or 'percentile'")


@dataclass(frozen=True)
class BootstrapSummary:
    """Distribution of the mean local exponent over scrambled series.

    ``mean_h``/``std_h`` are taken over the per-iteration means;
    ``window_std_h`` is the average within-iteration spread of individual
    window exponents.  ``per_hour_mean``/``per_hour_std`` are over the
    per-iteration hourly means (NaN for hours without windows).
    """

    n: int
    mean_h: float
    std_h: float
    std_defined: bool
    window_std_h: float
    ci: tuple[float, float]
    ci_normal: tuple[float, float]
    ci_percentile: tuple[float, float]
    per_hour_mean: np.ndarray
    per_hour_std: np.ndarray
    iteration_means: np.ndarray = field(repr=False)
    iterations: int = 0
    master_seed: int = 0
    confidence: float = 0.95

    def to_dict(self):
        return {
            "n": self.n, "mean_h": self.mean_h, "std_h": _num(self.std_h),
            "std_defined": self.std_defined, "window_std_h": self.window_std_h,
            "ci": list(map(_num, self.ci)), "ci_normal": list(map(_num, self.ci_normal)),
            "ci_percentile": list(map(_num, self.ci_percentile)),
            "confidence": self.confidence, "iterations": self.iterations,
            "master_seed": self.master_seed,
            "per_hour": [{"hour": h, "mean": _num(m), "std": _num(s)}
                         for h, (m, s) in enumerate(zip(self.per_hour_mean, self.per_hour_std))],
        }


@dataclass(frozen=True)
class ZTestResult:
    n: int
    observed_mean: float
    expected: float
    std_used: float
    sample_count: int
    z: float
    p_two_sided: float
    level: float
    reject: bool

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def iteration_rng(master_seed: int, iteration: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(iteration,))
    return np.random.Generator(np.random.PCG64(seq))


def scramble(values, seed) -> np.ndarray:
    """Uniformly random permutation of ``values`` (a new array).

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    return rng.permutation(np.asarray(values))


def _one_iteration(values, hours, sizes, master_seed, i, max_deg):
    shuffled = scramble(values, iteration_rng(master_seed, i))
    out = {}
    for n in sizes:
        stream = local_hurst_stream(shuffled, n, hours=hours)
        if stream.skipped > max_deg * stream.positions:
            raise DegenerateWindowError(
                f"iteration {i}, n={n}: {stream.skipped} of {stream.positions} windows degenerate")
        hour_means = np.full(24, np.nan)
        if hours is not None:
            sums = np.bincount(stream.hour, weights=stream.h, minlength=24)
            counts = np.bincount(stream.hour, minlength=24)
            nz = counts > 0
            hour_means[nz] = sums[nz] / counts[nz]
        out[n] = (stream.h.mean(), stream.h.std(), hour_means)
    return out


def bootstrap_local_hurst(series, config: BootstrapConfig | None = None) -> dict[int, BootstrapSummary]:
    """Scramble ``series`` ``config.iterations`` times and summarise the local exponents.

    Every iteration shuffles once and evaluates all window sizes on that
    shuffle.  Returns one :class:`BootstrapSummary` per window size.

    Raises
    ------
    DegenerateWindowError
        If more than ``max_degenerate_fraction`` of an iteration's windows are
        constant.
    """
    config = config or BootstrapConfig()
    values, _, hours = _unpack(series)
    sizes = tuple(config.window_sizes)
    if values.size < max(sizes):
        raise ValueError(f"series length {values.size} shorter than window size {max(sizes)}")
    if hours is not None:
        hours = np.asarray(hours, dtype=np.int64)

    def run(i):
        return _one_iteration(values, hours, sizes, config.master_seed, i,
                              config.max_degenerate_fraction)

    B = config.iterations
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(run, range(B)))
    else:
        results = [run(i) for i in range(B)]

    return {n: _summarise(n, [r[n] for r in results], config) for n in sizes}


def _summarise(n, rows, config):
    means = np.array([r[0] for r in rows])
    window_std = float(np.mean([r[1] for r in rows]))
    hourly = np.vstack([r[2] for r in rows])
    B = len(rows)
    mean_h = float(means.mean())
    std_defined = B >= 2
    std_h = float(means.std(ddof=1)) if std_defined else float("nan")
    alpha = 1.0 - config.confidence
    zq = stats.norm.ppf(1 - alpha / 2)
    ci_normal = (float(mean_h - zq * std_h), float(mean_h + zq * std_h))
    lo, hi = np.quantile(means, [alpha / 2, 1 - alpha / 2])
    ci_pct = (float(lo), float(hi))
    ci = ci_normal if config.interval == "normal" else ci_pct
    with warnings.catch_warnings():
        # hours without any window are all-NaN columns
        warnings.simplefilter("ignore", RuntimeWarning)
        per_hour_mean = np.nanmean(hourly, axis=0)
        per_hour_std = np.nanstd(hourly, axis=0, ddof=1) if std_defined else np.full(24, np.nan)
    return BootstrapSummary(
        n=n, mean_h=mean_h, std_h=std_h, std_defined=std_defined, window_std_h=window_std,
        ci=ci, ci_normal=ci_normal, ci_percentile=ci_pct,
        per_hour_mean=per_hour_mean, per_hour_std=per_hour_std, iteration_means=means,
        iterations=B, master_seed=config.master_seed, confidence=config.confidence,
    )


def z_test(observed: LocalHurstStream, summary: BootstrapSummary, level: float = 0.05,
           std: float | None = None) -> ZTestResult:
    """One-sample Z-test of the observed mean exponent against its bootstrap expectation.

    z = (mean(h) - E[h]) / (std / sqrt(N_w)), with N_w the number of
    non-degenerate observed windows and ``std`` defaulting to
    ``summary.std_h``.
    """
    if observed.n != summary.n:
        raise ValueError(f"window size mismatch: stream n={observed.n}, bootstrap n={summary.n}")
    if len(observed) == 0:
        raise ValueError("observed stream has no windows")
    return z_test_from_moments(observed.mean_h, summary.mean_h,
                               summary.std_h if std is None else std,
                               len(observed), level, n=observed.n)


def z_test_from_moments(observed_mean: float, expected: float, std: float, count: int,
                        level: float = 0.05, n: int = 0) -> ZTestResult:
    if not std > 0:
        raise ValueError("standard deviation used by the Z-test must be positive")
    z = (observed_mean - expected) / (std / np.sqrt(count))
    p = float(2 * stats.norm.sf(abs(z)))
    return ZTestResult(n, float(observed_mean), float(expected), float(std), int(count),
                       float(z), p, level, p < level)


def write_iteration_means(summaries: dict[int, BootstrapSummary], path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "iteration", "mean_h"])
        for n, s in summaries.items():
            for i, m in enumerate(s.iteration_means):
                w.writerow([n, i, repr(float(m))])


def write_summaries_json(summaries: dict[int, BootstrapSummary], path, extra=None):
    payload = {"summaries": [s.to_dict() for s in summaries.values()]}
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _num(x):
    x = float(x)
    return None if np.isnan(x) else x

