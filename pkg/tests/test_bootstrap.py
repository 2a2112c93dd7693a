import numpy as np
import pytest

import censexp.bootstrap as bs
from censexp.bootstrap import (
    BootstrapConfig,
    BootstrapDegeneracyError,
    bootstrap_critical_values,
    bootstrap_test,
)
from censexp.distributions import DistSpec, generate_censored_sample
from censexp.statistics import StatisticSpec
from censexp.survival import CensoredSample


def kg_sample(n, rate, seed):
    return generate_censored_sample(DistSpec("exp"), rate, n, np.random.default_rng(seed))


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            BootstrapConfig(B=50)
        with pytest.raises(ValueError):
            BootstrapConfig(alpha=0.0)
        with pytest.raises(ValueError):
            BootstrapConfig(hypothesis="plug-in")

    def test_seed_sequence_passthrough(self):
        ss = np.random.SeedSequence(5)
        assert BootstrapConfig(seed=ss).seed_sequence() is ss
        assert BootstrapConfig(seed=5).seed_sequence().entropy == 5


class TestDeterminism:
    def test_identical_inputs_identical_outcome(self):
        s = kg_sample(40, 0.2, 0)
        spec = StatisticSpec.from_string("J:PR:a=1")
        cfg = BootstrapConfig(B=150, seed=42)
        a = bootstrap_test(s, spec, cfg)
        b = bootstrap_test(s, spec, cfg)
        assert a.statistic == b.statistic
        assert a.critical_values == b.critical_values
        assert a.p_value == b.p_value
        assert a.reject == b.reject

    def test_seed_changes_critical_values(self):
        s = kg_sample(40, 0.2, 1)
        spec = StatisticSpec.from_string("M:D:a=1")
        c1 = bootstrap_critical_values(s, spec, BootstrapConfig(B=150, seed=1))
        c2 = bootstrap_critical_values(s, spec, BootstrapConfig(B=150, seed=2))
        assert c1 != c2


class TestCriticalValues:
    def test_one_sided_scalar_two_sided_pair(self):
        s = kg_sample(40, 0.1, 2)
        cfg = BootstrapConfig(B=150, seed=0)
        one = bootstrap_critical_values(s, StatisticSpec.from_string("M:PR:a=1"), cfg)
        assert np.isscalar(one)
        pair = bootstrap_critical_values(s, StatisticSpec.from_string("J:PR:a=1"), cfg)
        assert len(pair) == 2 and pair[0] == -pair[1]

    def test_order_statistic_convention(self):
        # with B=199 and alpha=0.05 the one-sided critical value is the
        # ceil(0.95 * 200) = 190th smallest resampled value
        s = kg_sample(40, 0.1, 3)
        spec = StatisticSpec.from_string("M:PR:a=1")
        cfg = BootstrapConfig(B=199, seed=7)
        crit = bootstrap_critical_values(s, spec, cfg)
        tstar = bs._bootstrap_statistics(s, spec, cfg)
        assert crit == tstar[189]


class TestOutcomes:
    def test_pvalue_and_decision_consistent(self):
        spec = StatisticSpec.from_string("J:D:a=1")
        for seed in range(5):
            s = kg_sample(40, 0.2, seed + 10)
            out = bootstrap_test(s, spec, BootstrapConfig(B=200, alpha=0.05, seed=seed))
            assert 0.0 < out.p_value <= 1.0
            assert out.reject == (abs(out.statistic) >= out.critical_values[1])

    def test_one_sided_decision(self):
        spec = StatisticSpec.from_string("delta")
        s = kg_sample(40, 0.2, 20)
        out = bootstrap_test(s, spec, BootstrapConfig(B=200, seed=3))
        assert out.reject == (out.statistic >= out.critical_values[0])

    def test_meta_fields(self):
        s = kg_sample(40, 0.1, 4)
        out = bootstrap_test(
            s, StatisticSpec.from_string("J:PR:a=1"), BootstrapConfig(B=120, seed=9)
        )
        assert out.meta["B"] == 120
        assert out.meta["seed"] == 9
        assert out.meta["method"] == "bootstrap"

    def test_resamples_preserve_structure(self):
        # delta* = 1 iff the latent survival draw is below the censoring draw
        s = kg_sample(30, 0.2, 5)
        cjumps, ccum = bs._censoring_cdf_arrays(s)
        assert np.isclose(ccum[-1], 1.0)
        rng = np.random.default_rng(0)
        x = rng.exponential(1.0, 30)
        c = cjumps[np.searchsorted(ccum, rng.random(30), side="left").clip(max=cjumps.size - 1)]
        boot = CensoredSample(np.minimum(x, c), x <= c)
        assert boot.n == 30
        assert np.array_equal(boot.events, x <= c)

    def test_no_censoring_sample_supported(self):
        x = np.random.default_rng(6).exponential(1.0, 30)
        s = CensoredSample(x, np.ones(30, dtype=bool))
        out = bootstrap_test(
            s, StatisticSpec.from_string("J:PR:a=1"), BootstrapConfig(B=150, seed=1)
        )
        assert np.isfinite(out.statistic)


class TestComposite:
    def test_composite_uses_mle_scale(self):
        # a sample with mean far from 1 is not rejected in composite mode
        s = kg_sample(60, 0.1, 7)
        s5 = s.scaled(5.0)
        spec = StatisticSpec.from_string("J:PR:a=1")
        out = bootstrap_test(
            s5, spec, BootstrapConfig(B=300, hypothesis="composite", seed=11)
        )
        assert not out.reject

    def test_scale_invariance_of_decision(self):
        spec = StatisticSpec.from_string("M:D:a=1")
        cfg = BootstrapConfig(B=200, hypothesis="composite", seed=13)
        s = kg_sample(50, 0.2, 8)
        a = bootstrap_test(s, spec, cfg)
        b = bootstrap_test(s.scaled(7.0), spec, cfg)
        assert a.statistic == pytest.approx(b.statistic, rel=1e-9)


class TestSkipPolicy:
    def test_all_failures_raise_degeneracy(self, monkeypatch):
        s = kg_sample(40, 0.1, 9)
        spec = StatisticSpec.from_string("J:PR:a=1")

        def boom(spec, sample):
            raise ValueError("synthetic failure")

        monkeypatch.setattr(bs, "evaluate", boom)
        with pytest.raises(BootstrapDegeneracyError):
            bs._bootstrap_statistics(s, spec, BootstrapConfig(B=100, seed=0))

    def test_rare_failures_skipped(self, monkeypatch):
        s = kg_sample(40, 0.1, 10)
        spec = StatisticSpec.from_string("J:PR:a=1")
        real = bs.evaluate
        calls = {"k": 0}

        def flaky(spec, sample):
            calls["k"] += 1
            if calls["k"] % 50 == 0:
                raise ValueError("synthetic failure")
            return real(spec, sample)

        monkeypatch.setattr(bs, "evaluate", flaky)
        tstar = bs._bootstrap_statistics(s, spec, BootstrapConfig(B=100, seed=0))
        assert tstar.size == 98
