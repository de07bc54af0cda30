"""
Synthetic test series
=====================

Exact fractional Gaussian noise (fGn) and IID Gaussian series with known
dependence, stamped with evenly spaced GMT timestamps so they can run through
the same hourly pipeline as quote data.

fGn is sampled by circulant embedding (Davies-Harte); if the embedding has a
negative eigenvalue the generator falls back to the Durbin-Levinson recursion
(Hosking's method), which is exact but O(N^2).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from .returns import ReturnSeries, write_returns_csv

DEFAULT_START = datetime(2000, 5, 8, tzinfo=timezone.utc)  # a Monday, 00:00 GMT


@dataclass(frozen=True)
class FgnSpec:
    hurst_h: float
    length: int
    seed: int = 0
    variance: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.hurst_h < 1.0:
            raise ValueError(f"Hurst exponent must lie in (0, 1), got {self.hurst_h}")
        if self.length < 1:
            raise ValueError("length must be positive")
        if self.variance <= 0:
            raise ValueError("variance must be positive")


@dataclass(frozen=True)
class SyntheticSeries:
    values: np.ndarray
    spec: dict
    timestamps: np.ndarray  # epoch seconds, GMT

    def __len__(self):
        return len(self.values)

    def to_returns(self) -> ReturnSeries:
        return ReturnSeries.from_values(self.values, self.timestamps,
                                        spacing_seconds=self.spec.get("spacing_seconds", 1))

    def write(self, csv_path, sidecar_path=None):
        """Write the values in the returns CSV schema plus a JSON spec sidecar."""
        write_returns_csv(self.to_returns(), csv_path)
        if sidecar_path is not None:
            with open(sidecar_path, "w", encoding="utf-8") as fh:
                json.dump(self.spec, fh, indent=2, sort_keys=True)
                fh.write("\n")


def fgn_autocovariance(k, hurst_h: float, variance: float = 1.0):
    """Autocovariance of unit-spaced fGn at lag ``k`` (scalar or array).

    gamma(k) = variance/2 * (|k+1|^2H - 2|k|^2H + |k-1|^2H)
    """
    k = np.abs(np.asarray(k, dtype=float))
    two_h = 2.0 * hurst_h
    g = 0.5 * (np.abs(k + 1) ** two_h - 2 * k ** two_h + np.abs(k - 1) ** two_h)
    g = variance * g
    return float(g) if g.ndim == 0 else g


def circulant_eigenvalues(length: int, hurst_h: float) -> np.ndarray:
    """Eigenvalues of the size-2N circulant embedding of the fGn covariance."""
    gamma = fgn_autocovariance(np.arange(length + 1), hurst_h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(row).real


def _timestamps(length, spacing_seconds, start):
    t0 = int(start.timestamp())
    return t0 + np.round(np.arange(1, length + 1) * spacing_seconds).astype(np.int64)


def _circulant(length, hurst_h, rng):
    lam = circulant_eigenvalues(length, hurst_h)
    if lam.min() < -1e-10 * lam.max():
        return None
    lam = np.clip(lam, 0.0, None)
    m = lam.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    x = np.fft.fft(np.sqrt(lam / m) * z)
    return x.real[:length]


def _durbin_levinson(length, hurst_h, rng):
    gamma = fgn_autocovariance(np.arange(length), hurst_h)
    z = rng.standard_normal(length)
    x = np.empty(length)
    phi = np.zeros(length)
    v = gamma[0]
    x[0] = math.sqrt(v) * z[0]
    for t in range(1, length):
        # update partial autocorrelations for order t
        k = (gamma[t] - phi[: t - 1] @ gamma[t - 1: 0: -1]) / v
        phi[: t - 1] = phi[: t - 1] - k * phi[: t - 1][::-1]
        phi[t - 1] = k
        v *= 1.0 - k * k
        x[t] = phi[:t] @ x[t - 1:: -1] + math.sqrt(v) * z[t]
    return x


def gen_fgn(spec: FgnSpec, *, method: str = "circulant", spacing_seconds: float = 1.0,
            start: datetime = DEFAULT_START) -> SyntheticSeries:
    """Sample fGn with the Hurst exponent, length, seed and variance in ``spec``.

    ``method`` is ``"circulant"`` (with automatic fallback) or ``"hosking"``.
    The same spec and method always produce identical output.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    used = method
    if method == "circulant":
        x = _circulant(spec.length, spec.hurst_h, rng)
        if x is None:
            used = "hosking"
            x = _durbin_levinson(spec.length, spec.hurst_h, rng)
    elif method == "hosking":
        x = _durbin_levinson(spec.length, spec.hurst_h, rng)
    else:
        raise ValueError(f"unknown fGn method {method!r}")
    x = x * math.sqrt(spec.variance)
    meta = dict(asdict(spec), kind="fgn", method=used, spacing_seconds=spacing_seconds,
                start=start.strftime("%Y-%m-%dT%H:%M:%SZ"))
    return SyntheticSeries(x, meta, _timestamps(spec.length, spacing_seconds, start))


def gen_gaussian_iid(length: int, seed: int = 0, variance: float = 1.0, *,
                     spacing_seconds: float = 1.0, start: datetime = DEFAULT_START) -> SyntheticSeries:
    if length < 1:
        raise ValueError("length must be positive")
    if variance < 0:
        raise ValueError("variance must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(length) * math.sqrt(variance)
    meta = dict(kind="iid", length=length, seed=seed, variance=variance,
                spacing_seconds=spacing_seconds, start=start.strftime("%Y-%m-%dT%H:%M:%SZ"))
    return SyntheticSeries(x, meta, _timestamps(length, spacing_seconds, start))
