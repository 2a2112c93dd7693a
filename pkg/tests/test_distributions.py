import numpy as np
import pytest
from scipy import integrate

from censexp.distributions import (
    DistSpec,
    FAMILIES,
    cdf,
    censoring_beta_for_rate,
    generate_censored_sample,
    quantile,
    sample,
)


class TestDistSpec:
    def test_aliases(self):
        assert DistSpec("w", 1.4).family == "weibull"
        assert DistSpec("LN", 0.8).family == "lognormal"
        assert DistSpec("hn").family == "halfnormal"

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            DistSpec("cauchy")

    def test_bad_theta(self):
        with pytest.raises(ValueError):
            DistSpec("weibull", 0.0)

    def test_string_round_trip(self):
        for text in ("weibull:1.4", "gamma:0.4", "halfnormal", "exp:1"):
            spec = DistSpec.from_string(text)
            assert DistSpec.from_string(spec.to_string()) == spec


@pytest.mark.parametrize("family,theta", [
    ("exp", 1.0), ("exp", 2.5), ("weibull", 1.4), ("weibull", 0.8),
    ("gamma", 0.4), ("gamma", 2.0), ("halfnormal", 1.0), ("chen", 0.5),
    ("chen", 1.0), ("linearfailure", 2.0), ("extremevalue", 1.5),
    ("lognormal", 0.8), ("dhillon", 1.0), ("dhillon", 1.5),
])
class TestFamilies:
    def test_quantile_inverts_cdf(self, family, theta):
        spec = DistSpec(family, theta)
        p = np.linspace(0.01, 0.99, 25)
        assert np.allclose(cdf(spec, quantile(spec, p)), p, atol=1e-9)

    def test_cdf_monotone_and_bounded(self, family, theta):
        spec = DistSpec(family, theta)
        x = np.linspace(0.0, 8.0, 200)
        f = np.asarray(cdf(spec, x))
        assert np.all(np.diff(f) >= -1e-14)
        assert f[0] <= 1e-12 and np.all(f <= 1.0)

    def test_sample_matches_cdf(self, family, theta):
        spec = DistSpec(family, theta)
        x = sample(spec, 20_000, np.random.default_rng(7))
        assert np.all(x >= 0)
        med = quantile(spec, 0.5)
        assert abs(np.mean(x <= med) - 0.5) < 0.02


class TestMomentOracles:
    """Sample means vs numerically integrated means."""

    @pytest.mark.parametrize("family,theta", [
        ("weibull", 1.4), ("gamma", 0.4), ("chen", 0.5),
        ("linearfailure", 2.0), ("extremevalue", 1.5), ("dhillon", 1.0),
    ])
    def test_mean(self, family, theta):
        spec = DistSpec(family, theta)
        # E X = integral of (1 - F) over [0, inf)
        mean, _ = integrate.quad(lambda x: 1.0 - cdf(spec, x), 0, np.inf, limit=200)
        x = sample(spec, 200_000, np.random.default_rng(11))
        assert abs(x.mean() - mean) < 0.02 * max(mean, 1.0)


class TestCensoring:
    def test_beta_formula(self):
        assert censoring_beta_for_rate(0.0) == 0.0
        assert np.isclose(censoring_beta_for_rate(0.1), 1 / 9)
        assert np.isclose(censoring_beta_for_rate(0.3), 3 / 7)
        with pytest.raises(ValueError):
            censoring_beta_for_rate(1.0)

    def test_zero_rate_all_events(self):
        s = generate_censored_sample(DistSpec("weibull", 1.4), 0.0, 50, np.random.default_rng(0))
        assert s.events.all()

    def test_rate_out_of_range(self):
        with pytest.raises(ValueError):
            generate_censored_sample(DistSpec("exp"), 0.5, 50, np.random.default_rng(0))

    @pytest.mark.parametrize("family,theta,rate", [
        ("exp", 1.0, 0.1), ("exp", 1.0, 0.3), ("weibull", 1.4, 0.2),
        ("lognormal", 0.8, 0.1), ("gamma", 0.4, 0.3),
    ])
    def test_empirical_censoring_rate(self, family, theta, rate):
        s = generate_censored_sample(
            DistSpec(family, theta), rate, 40_000, np.random.default_rng(5)
        )
        assert abs(np.mean(~s.events) - rate) < 0.01

    def test_deterministic_given_seed(self):
        a = generate_censored_sample(DistSpec("exp"), 0.2, 30, np.random.default_rng(9))
        b = generate_censored_sample(DistSpec("exp"), 0.2, 30, np.random.default_rng(9))
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.events, b.events)

    def test_observed_time_is_minimum(self):
        s = generate_censored_sample(DistSpec("gamma", 2.0), 0.3, 500, np.random.default_rng(1))
        assert np.all(s.times > 0)
        assert 0 < np.mean(~s.events) < 1


def test_family_registry_complete():
    assert len(FAMILIES) == 9
