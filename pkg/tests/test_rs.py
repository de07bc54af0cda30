import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intradayhurst import rs
from intradayhurst.returns import ReturnSeries
from intradayhurst.synthetic import FgnSpec, gen_fgn, gen_gaussian_iid


def naive_rs(window):
    """Textbook loop version used as an independent oracle."""
    n = len(window)
    mean = sum(window) / n
    partial, acc = [], 0.0
    for x in window:
        acc += x - mean
        partial.append(acc)
    sigma = math.sqrt(sum((x - mean) ** 2 for x in window) / n)
    return max(partial) - min(partial), sigma


def test_two_point_window():
    assert rs.rescaled_range([1, -1]) == (1.0, 1.0, 1.0, False)


def test_four_point_window():
    r = rs.rescaled_range([1, 2, 3, 4])
    assert r.range_r == 2.0
    assert r.sigma == pytest.approx(math.sqrt(1.25), abs=1e-12)
    assert r.rs == pytest.approx(1.78885438, abs=1e-8)


def test_constant_window_is_flagged():
    r = rs.rescaled_range([0.7] * 9)
    assert r.degenerate and r.sigma == 0.0 and math.isnan(r.rs)


def test_sample_divisor_option():
    assert rs.rescaled_range([1, 2, 3, 4], ddof=1).sigma == pytest.approx(math.sqrt(5 / 3))


def test_too_short_window():
    with pytest.raises(ValueError):
        rs.rescaled_range([1.0])


def test_local_exponent_of_four_point_window():
    stream = rs.local_hurst_stream([1, 2, 3, 4], 4)
    # ln(2 / sqrt(1.25)) / ln 4 = 0.419518 (quoted elsewhere truncated as 0.41950)
    assert stream.h[0] == pytest.approx(math.log(2 / math.sqrt(1.25)) / math.log(4), abs=1e-15)
    assert stream.h[0] == pytest.approx(0.41950, abs=5e-5)


def test_unit_ratio_gives_zero_exponent():
    assert rs.local_hurst_stream([1, -1], 2).h.tolist() == [0.0]


def test_brute_force_equivalence(rng):
    x = rng.normal(size=50)
    for n in range(2, 7):
        stream = rs.local_hurst_stream(x, n)
        assert len(stream) == 50 - n + 1
        for i in range(50 - n + 1):
            r, s = naive_rs(list(x[i:i + n]))
            assert stream.range_r[i] == pytest.approx(r, rel=1e-13)
            assert stream.sigma[i] == pytest.approx(s, rel=1e-13)


def test_degenerate_windows_are_skipped_and_counted():
    x = np.array([1.0, 1.0, 1.0, 1.0, 2.0, 3.0, 3.0, 3.0])
    stream = rs.local_hurst_stream(x, 3)
    assert stream.skipped == 3          # [1,1,1] twice and [3,3,3] once
    assert len(stream) + stream.skipped == 6
    assert stream.start_index.tolist() == [2, 3, 4]


def test_stream_errors():
    with pytest.raises(ValueError):
        rs.local_hurst_stream([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        rs.local_hurst_stream([1.0, 2.0], 1)


def test_hour_tags_follow_the_anchor():
    ts = 3600 * np.arange(1, 7)  # one observation per hour starting 01:00 GMT
    series = ReturnSeries.from_values([1.0, 3.0, 2.0, 5.0, 4.0, 6.0], timestamps=ts)
    end = rs.local_hurst_stream(series, 3)
    start = rs.local_hurst_stream(series, 3, anchor="start")
    assert end.hour.tolist() == [3, 4, 5, 6]
    assert start.hour.tolist() == [1, 2, 3, 4]
    assert end.end_timestamp.tolist() == ts[2:].tolist()


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 400), st.integers(2, 40), st.integers(0, 2 ** 32 - 1))
def test_window_count(N, n, seed):
    if n > N:
        n = N
    x = np.random.default_rng(seed).integers(-2, 3, size=N).astype(float)
    stream = rs.local_hurst_stream(x, n)
    assert len(stream) + stream.skipped == N - n + 1 == stream.positions


@settings(max_examples=60, deadline=None)
@given(st.floats(-1e3, 1e3).filter(lambda a: abs(a) > 1e-3), st.floats(-1e3, 1e3),
       st.integers(0, 2 ** 32 - 1))
def test_affine_invariance(a, b, seed):
    x = np.random.default_rng(seed).normal(size=40)
    base = rs.local_hurst_stream(x, 10)
    moved = rs.local_hurst_stream(a * x + b, 10)
    np.testing.assert_allclose(moved.rs, base.rs, rtol=1e-12 * max(1.0, abs(b / a)) * 50)


def test_affine_invariance_at_unit_scale(rng):
    x = rng.normal(size=200)
    for a, b in [(2.5, 0.0), (-1.0, 0.0), (0.001, 0.0), (3.0, 0.5)]:
        got = rs.local_hurst_stream(a * x + b, 20).rs
        np.testing.assert_allclose(got, rs.local_hurst_stream(x, 20).rs, rtol=1e-12)


def test_decomposition_identity_and_base_invariance(rng):
    stream = rs.local_hurst_stream(rng.normal(size=3000), 20)
    for base in (10.0, math.e, 2.0):
        lr, ls = rs.decomposition_components(stream, base)
        np.testing.assert_allclose(rs.reconstruct_h(lr, ls, 20, base), stream.h, rtol=0, atol=1e-12)


def test_published_components_reconstruct():
    assert rs.reconstruct_h(2.984, 2.507, 10) == pytest.approx(0.477, abs=1e-12)
    assert rs.reconstruct_h(math.log10(2042.9), math.log10(468.96), 20) == pytest.approx(0.4912, abs=1e-4)


def test_global_fit_on_exact_power_law(monkeypatch):
    monkeypatch.setattr(rs, "block_mean_rs", lambda values, n, ddof=0: (3.0 * n ** 0.5, 1))
    fit = rs.global_hurst(np.zeros(256), [8, 16, 32, 64])
    assert fit.exponent_h == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert [p[0] for p in fit.points] == [8, 16, 32, 64]


def test_global_fit_by_hand(rng):
    x = rng.normal(size=512)
    fit = rs.global_hurst(x, [8, 32, 128])
    ys = []
    for n in (8, 32, 128):
        vals = [naive_rs(list(x[i:i + n])) for i in range(0, 512, n)]
        ys.append(math.log(np.mean([r / s for r, s in vals])))
    slope = np.polyfit(np.log([8, 32, 128]), ys, 1)[0]
    assert fit.exponent_h == pytest.approx(slope, abs=1e-12)


def test_global_fit_errors():
    x = np.arange(100.0)
    with pytest.raises(ValueError, match="3 distinct"):
        rs.global_hurst(x, [8, 16])
    with pytest.raises(ValueError, match="N/2"):
        rs.global_hurst(x, [8, 16, 64])
    with pytest.raises(ValueError, match="degenerate"):
        rs.global_hurst(np.ones(100), [4, 8, 16])


def test_default_lengths():
    assert rs.default_lengths(2 ** 14) == [8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
    assert rs.default_lengths(64) == [8, 16]


@pytest.mark.parametrize("hurst", [0.5, 0.7])
def test_global_fit_recovers_persistent_and_neutral_noise(hurst):
    estimates = [rs.global_hurst(gen_fgn(FgnSpec(hurst, 2 ** 14, seed)).values,
                                 rs.default_lengths(2 ** 14)[:-1]).exponent_h
                 for seed in range(12)]
    assert abs(np.median(estimates) - hurst) < 0.06


def test_iid_global_fit():
    short = [rs.global_hurst(gen_gaussian_iid(2 ** 12, seed).values, [8, 16, 32, 64]).exponent_h
             for seed in range(30)]
    # small-n R/S transience pushes short-grid slopes well above 0.5
    assert np.mean(short) > 0.5
    full = [rs.global_hurst(gen_gaussian_iid(2 ** 14, seed).values).exponent_h for seed in range(12)]
    assert abs(np.median(full) - 0.5) < 0.06


def test_autocorrelation_white_noise(rng):
    acf = rs.autocorrelation(rng.normal(size=10_000), 200)
    assert acf.rho[0] == 1.0
    assert np.mean(np.abs(acf.rho[1:]) < 3 / math.sqrt(10_000)) >= 0.97


def test_autocorrelation_alternating():
    acf = rs.autocorrelation(np.tile([1.0, -1.0], 500), 3)
    assert acf.rho[1] == pytest.approx(-1.0, abs=2e-3)
    assert acf.rho[2] == pytest.approx(1.0, abs=3e-3)


def test_autocorrelation_errors():
    with pytest.raises(ValueError, match="constant"):
        rs.autocorrelation(np.ones(10), 2)
    with pytest.raises(ValueError):
        rs.autocorrelation(np.arange(10.0), 5)


def test_local_exponent_increases_with_dependence():
    means = [[rs.local_hurst_stream(gen_fgn(FgnSpec(H, 2 ** 14, seed)).values, 20).mean_h
              for H in (0.3, 0.5, 0.8)] for seed in range(20)]
    monotone = [a < b < c for a, b, c in means]
    assert np.mean(monotone) >= 0.95
