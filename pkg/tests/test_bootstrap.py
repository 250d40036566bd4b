import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ridgeopt.bootstrap import bca_interval, bootstrap_distribution, jackknife_medians


def test_jackknife_medians_match_brute_force():
    rng = np.random.default_rng(0)
    for n in (2, 3, 6, 7, 20):
        x = rng.normal(size=n)
        brute = np.array([np.median(np.delete(x, i)) for i in range(n)])
        order = np.argsort(x)
        np.testing.assert_allclose(jackknife_medians(x)[np.argsort(order)], brute)


def test_constant_input_zero_width():
    ci = bca_interval(np.full(30, 2.5), method="sfp")
    assert (ci.point, ci.lo, ci.hi) == (2.5, 2.5, 2.5)
    ci = bca_interval([4.0])
    assert ci.lo == ci.hi == 4.0
    with pytest.raises(ValueError):
        bca_interval([])
    with pytest.raises(ValueError):
        bca_interval([1.0, 2.0], statistic="mode")


def test_deterministic_given_seed():
    x = np.random.default_rng(1).exponential(size=50)
    assert bca_interval(x, rng_seed=3) == bca_interval(x, rng_seed=3)


def test_bootstrap_distribution_shape_and_chunking(monkeypatch):
    import ridgeopt.bootstrap as bootstrap

    monkeypatch.setattr(bootstrap, "_CHUNK_ENTRIES", 64)
    x = np.arange(10.0)
    out = bootstrap_distribution(x, "mean", 37, np.random.default_rng(0))
    assert out.shape == (37,)
    assert np.all((out >= 0) & (out <= 9))


@pytest.mark.parametrize("statistic", ["mean", "median"])
def test_agrees_with_scipy_bca(statistic):
    x = np.random.default_rng(4).lognormal(size=80)
    ours = bca_interval(x, resamples=4000, statistic=statistic, rng_seed=0)
    func = np.mean if statistic == "mean" else np.median
    ref = stats.bootstrap((x,), func, n_resamples=4000, method="BCa",
                          random_state=np.random.default_rng(1)).confidence_interval
    width = ref.high - ref.low
    assert abs(ours.lo - ref.low) < 0.15 * width
    assert abs(ours.hi - ref.high) < 0.15 * width


@settings(max_examples=25, deadline=None)
@given(
    values=st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=40),
    seed=st.integers(0, 1000),
)
def test_interval_contains_point(values, seed):
    ci = bca_interval(values, resamples=200, rng_seed=seed)
    assert ci.lo <= ci.point <= ci.hi
    assert min(values) <= ci.lo and ci.hi <= max(values)
