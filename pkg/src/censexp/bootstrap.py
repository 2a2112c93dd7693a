"""Bootstrap calibration of the censored-data tests.

Each iteration redraws censoring times from the (reversed-role) Kaplan-Meier
estimate of the censoring distribution and survival times from the null
exponential -- unit mean for the simple hypothesis, the censored MLE for the
composite one -- then recomputes the statistic on the resampled pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .statistics import StatisticSpec, TestOutcome, evaluate
from .survival import CensoredSample, censored_exp_mle, kaplan_meier

__all__ = ["BootstrapConfig", "BootstrapDegeneracyError", "bootstrap_critical_values", "bootstrap_test"]

log = logging.getLogger(__name__)

# fraction of failed iterations tolerated before the whole bootstrap aborts
_MAX_SKIP_FRACTION = 0.05


class BootstrapDegeneracyError(RuntimeError):
    """More than the tolerated share of bootstrap iterations failed."""


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 1000
    alpha: float = 0.05
    hypothesis: str = "simple"
    mu: float = 1.0
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if self.B < 100:
            raise ValueError("B must be at least 100")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.hypothesis not in ("simple", "composite"):
            raise ValueError("hypothesis must be 'simple' or 'composite'")

    def seed_sequence(self) -> np.random.SeedSequence:
        if isinstance(self.seed, np.random.SeedSequence):
            return self.seed
        return np.random.SeedSequence(self.seed)


def _censoring_cdf_arrays(sample: CensoredSample):
    """Jump points and cumulative masses of the censoring CDF G_n, made
    proper by placing any residual mass at the largest observed time."""
    surv = kaplan_meier(sample, "censoring")
    jumps = surv.jump_points
    cum = 1.0 - surv.values
    xmax = float(sample.times.max())
    if jumps.size == 0 or cum[-1] < 1.0:
        if jumps.size and jumps[-1] >= xmax:
            cum = cum.copy()
            cum[-1] = 1.0
        else:
            jumps = np.concatenate((jumps, [xmax]))
            cum = np.concatenate((cum, [1.0]))
    return jumps, cum


def _bootstrap_statistics(sample: CensoredSample, spec: StatisticSpec, cfg: BootstrapConfig):
    """The B resampled statistic values (failed iterations skipped)."""
    n = sample.n
    if cfg.hypothesis == "composite":
        mu_star = censored_exp_mle(sample)
    else:
        mu_star = cfg.mu
    cjumps, ccum = _censoring_cdf_arrays(sample)
    children = cfg.seed_sequence().spawn(cfg.B)
    values = []
    skipped = 0
    for child in children:
        rng = np.random.default_rng(child)
        xstar = rng.exponential(mu_star, n)
        u = rng.random(n)
        cstar = cjumps[np.searchsorted(ccum, u, side="left").clip(max=cjumps.size - 1)]
        boot = CensoredSample(np.minimum(xstar, cstar), xstar <= cstar)
        try:
            values.append(evaluate(spec, boot))
        except (ValueError, RuntimeError) as exc:
            skipped += 1
            log.debug("bootstrap iteration skipped: %s", exc)
    if skipped > _MAX_SKIP_FRACTION * cfg.B:
        raise BootstrapDegeneracyError(
            f"{skipped} of {cfg.B} bootstrap iterations failed"
        )
    if skipped:
        log.warning("bootstrap skipped %d of %d iterations", skipped, cfg.B)
    return np.sort(np.asarray(values))


def _order_quantile(sorted_vals: np.ndarray, q: float) -> float:
    """Type-1 (order statistic) quantile: the ceil(q (B+1))-th smallest."""
    b = sorted_vals.size
    idx = min(max(math.ceil(q * (b + 1)), 1), b) - 1
    return float(sorted_vals[idx])


def _critical_from_draws(tstar: np.ndarray, two_sided: bool, alpha: float):
    if two_sided:
        # large |T| rejects: calibrate on the absolute resampled values
        q = _order_quantile(np.sort(np.abs(tstar)), 1.0 - alpha)
        return (-q, q)
    return (_order_quantile(tstar, 1.0 - alpha),)


def bootstrap_critical_values(sample: CensoredSample, spec: StatisticSpec, cfg: BootstrapConfig):
    """Upper critical value for one-sided statistics, a symmetric (-q, q)
    pair for two-sided ones (calibrated on the absolute resampled values)."""
    spec = _align_spec(spec, cfg)
    tstar = _bootstrap_statistics(sample, spec, cfg)
    crit = _critical_from_draws(tstar, spec.two_sided, cfg.alpha)
    return crit if spec.two_sided else crit[0]


def _align_spec(spec: StatisticSpec, cfg: BootstrapConfig) -> StatisticSpec:
    from dataclasses import replace

    return replace(spec, hypothesis=cfg.hypothesis, mu=cfg.mu)


def bootstrap_test(sample: CensoredSample, spec: StatisticSpec, cfg: BootstrapConfig) -> TestOutcome:
    """Full bootstrap test: statistic, critical value(s), p-value, decision."""
    spec = _align_spec(spec, cfg)
    tn = evaluate(spec, sample)
    tstar = _bootstrap_statistics(sample, spec, cfg)
    b_eff = tstar.size
    crit = _critical_from_draws(tstar, spec.two_sided, cfg.alpha)
    if spec.two_sided:
        reject = abs(tn) >= crit[1]
        p = (1 + int(np.sum(np.abs(tstar) >= abs(tn)))) / (b_eff + 1)
    else:
        reject = tn >= crit[0]
        p = (1 + int(np.sum(tstar >= tn))) / (b_eff + 1)
    seed_repr = cfg.seed if isinstance(cfg.seed, int) else "seed-sequence"
    return TestOutcome(
        statistic=float(tn),
        critical_values=crit,
        p_value=float(p),
        reject=bool(reject),
        meta={
            "B": cfg.B,
            "B_effective": b_eff,
            "alpha": cfg.alpha,
            "seed": seed_repr,
            "spec": spec.to_string(),
            "hypothesis": cfg.hypothesis,
            "method": "bootstrap",
        },
    )
