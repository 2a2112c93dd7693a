"""Kaplan-Meier and Nelson-Aalen estimators for right-censored samples.

Both estimators support reversed roles: the censoring survival function is
the product-limit estimator computed from the censoring indicators instead
of the event indicators.  Inverse-probability-of-censoring weights (IPCW)
and the censored-exponential MLE live here as well.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CensoredSample",
    "StepFn",
    "DegenerateWeightError",
    "kaplan_meier",
    "nelson_aalen",
    "ipcw_weights",
    "censored_exp_mle",
    "km_mean",
    "sample_from_stepfn",
]


class DegenerateWeightError(RuntimeError):
    """Raised when an uncensored unit has zero estimated censoring survival.

    Clamping the weight instead would silently bias the weighted U-statistics,
    so the condition is surfaced to the caller.
    """


@dataclass(frozen=True)
class CensoredSample:
    """Right-censored observations: times X_i = min(X'_i, C_i) and event flags."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        events = np.asarray(self.events, dtype=bool)
        if times.ndim != 1 or events.ndim != 1 or times.shape != events.shape:
            raise ValueError("times and events must be 1-d arrays of equal length")
        if times.size < 2:
            raise ValueError("a censored sample needs at least two observations")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise ValueError("times must be finite and nonnegative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events)

    @property
    def n(self) -> int:
        return self.times.size

    def scaled(self, factor: float) -> "CensoredSample":
        """Sample with all times multiplied by ``factor`` (indicators kept)."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return CensoredSample(self.times * factor, self.events)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,event\n")
        for t, e in zip(self.times, self.events):
            buf.write(f"{float(t)!r},{int(e)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CensoredSample":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].replace(" ", "").lower() != "time,event":
            raise ValueError("expected CSV header 'time,event'")
        times, events = [], []
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected two fields, got {len(parts)}")
            try:
                t = float(parts[0])
            except ValueError:
                raise ValueError(f"line {lineno}: bad time value {parts[0]!r}") from None
            ev = parts[1].strip()
            if ev not in ("0", "1"):
                raise ValueError(f"line {lineno}: event must be 0 or 1, got {ev!r}")
            times.append(t)
            events.append(ev == "1")
        return cls(np.array(times), np.array(events))


@dataclass(frozen=True)
class StepFn:
    """Right-continuous step function with left-limit evaluation.

    ``values[k]`` is the value on ``[jump_points[k], jump_points[k+1])`` and
    ``initial_value`` the value before the first jump.
    """

    jump_points: np.ndarray
    values: np.ndarray
    initial_value: float = 1.0

    def __post_init__(self):
        jp = np.asarray(self.jump_points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if jp.shape != vals.shape or jp.ndim != 1:
            raise ValueError("jump_points and values must be 1-d arrays of equal length")
        if jp.size and np.any(np.diff(jp) <= 0):
            raise ValueError("jump_points must be strictly increasing")
        object.__setattr__(self, "jump_points", jp)
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        """Right-continuous evaluation: value on the interval containing x."""
        idx = np.searchsorted(self.jump_points, x, side="right")
        ext = np.concatenate(([self.initial_value], self.values))
        return ext[idx]

    def eval_left(self, x):
        """Left limit: the value on the interval strictly before x."""
        idx = np.searchsorted(self.jump_points, x, side="left")
        ext = np.concatenate(([self.initial_value], self.values))
        return ext[idx]


def _sorted_parts(times: np.ndarray, events: np.ndarray):
    """Sorted times, indicators and per-observation at-risk counts.

    Within a tie group events precede censorings; the at-risk count is the
    number of sample members with time >= the group's time.
    """
    order = np.lexsort((~events, times))
    ts = times[order]
    ev = events[order]
    first = np.searchsorted(ts, ts, side="left")
    at_risk = times.size - first
    return order, ts, ev, first, at_risk


def _km_factors(ts, ev, first, target_event: bool):
    """Per-observation product-limit factors in sorted order.

    Tied target observations are handled sequentially -- the j-th of a tie
    group sees the at-risk count reduced by its predecessors in the group --
    so a group with d targets and Y at risk contributes exactly (1 - d/Y).
    """
    ind = ev if target_event else ~ev
    cnt = np.cumsum(ind)
    prior_in_group = (cnt - ind) - (cnt[first] - ind[first])
    y = ts.size - first - prior_in_group
    return ind, 1.0 - ind / y


def _censoring_survival_left(times: np.ndarray, events: np.ndarray) -> np.ndarray:
    """K_c(X_i-) for every observation, product-limit with reversed roles."""
    order, ts, ev, first, at_risk = _sorted_parts(times, events)
    _, factors = _km_factors(ts, ev, first, False)
    cp = np.cumprod(factors)
    left = np.where(first > 0, cp[np.maximum(first - 1, 0)], 1.0)
    out = np.empty_like(left)
    out[order] = left
    return out


def _survival_right(times: np.ndarray, events: np.ndarray, target_event: bool) -> np.ndarray:
    """Right-continuous product-limit survival evaluated at each observation."""
    order, ts, ev, first, at_risk = _sorted_parts(times, events)
    ind, factors = _km_factors(ts, ev, first, target_event)
    cp = np.cumprod(factors)
    # value at time ts[k] includes every observation in the tie group
    last = np.searchsorted(ts, ts, side="right") - 1
    right = cp[last]
    out = np.empty_like(right)
    out[order] = right
    return out


def _ipcw(times: np.ndarray, events: np.ndarray) -> np.ndarray:
    kleft = _censoring_survival_left(times, events)
    bad = events & (kleft <= 0.0)
    if np.any(bad):
        raise DegenerateWeightError(
            "uncensored observation past the point where the estimated "
            "censoring survival vanishes"
        )
    w = np.zeros_like(kleft)
    w[events] = 1.0 / kleft[events]
    return w


def _check_target(target: str) -> bool:
    if target not in ("event", "censoring"):
        raise ValueError("target must be 'event' or 'censoring'")
    return target == "event"


def kaplan_meier(sample: CensoredSample, target: str = "event") -> StepFn:
    """Product-limit survival estimator.

    ``target='censoring'`` reverses the roles of events and censorings and
    estimates the censoring survival K_c.
    """
    target_event = _check_target(target)
    times, events = sample.times, sample.events
    order, ts, ev, first, at_risk = _sorted_parts(times, events)
    ind, factors = _km_factors(ts, ev, first, target_event)
    cp = np.cumprod(factors)
    distinct, start = np.unique(ts, return_index=True)
    end = np.r_[start[1:], ts.size] - 1
    has_jump = np.array([ind[s : e + 1].any() for s, e in zip(start, end)])
    return StepFn(distinct[has_jump], cp[end][has_jump], 1.0)


def nelson_aalen(sample: CensoredSample, target: str = "event") -> StepFn:
    """Cumulative-hazard estimator: sum of (count at time)/(at risk before)."""
    target_event = _check_target(target)
    times, events = sample.times, sample.events
    order, ts, ev, first, at_risk = _sorted_parts(times, events)
    ind = ev if target_event else ~ev
    increments = ind / at_risk
    cum = np.cumsum(increments)
    distinct, start = np.unique(ts, return_index=True)
    end = np.r_[start[1:], ts.size] - 1
    has_jump = np.array([ind[s : e + 1].any() for s, e in zip(start, end)])
    return StepFn(distinct[has_jump], cum[end][has_jump], 0.0)


def ipcw_weights(sample: CensoredSample) -> np.ndarray:
    """delta_i / K_c(X_i-); zero for censored units.

    The mean weight estimates 1 (mean-preserving property of IPCW).
    """
    return _ipcw(sample.times, sample.events)


def censored_exp_mle(sample: CensoredSample) -> float:
    """MLE of the exponential mean under censoring: sum(X_i)/sum(delta_i)."""
    d = int(sample.events.sum())
    if d == 0:
        raise ValueError("MLE undefined: sample contains no uncensored observation")
    return float(sample.times.sum() / d)


def _km_event_jumps(times: np.ndarray, events: np.ndarray) -> np.ndarray:
    """Per-observation jump of the event Kaplan-Meier CDF.

    Censored observations get zero mass, except that when the largest
    observation is censored it absorbs the defective tail (the CDF is forced
    to one at the largest observed time).
    """
    order, ts, ev, first, at_risk = _sorted_parts(times, events)
    _, factors = _km_factors(ts, ev, first, True)
    cp = np.cumprod(factors)
    prev = np.where(np.arange(ts.size) > 0, cp[np.maximum(np.arange(ts.size) - 1, 0)], 1.0)
    jumps = np.where(ev, prev - cp, 0.0)
    if not ev[-1]:
        jumps[-1] += cp[-1]
    out = np.empty_like(jumps)
    out[order] = jumps
    return out


def km_mean(sample: CensoredSample) -> float:
    """Mean of the Kaplan-Meier event distribution with the defective tail
    placed at the largest observed time."""
    jumps = _km_event_jumps(sample.times, sample.events)
    return float(np.dot(jumps, sample.times))


def sample_from_stepfn(dist: StepFn, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws from a (possibly defective) step CDF.

    Residual mass of a defective CDF is placed at the largest jump point.
    """
    if dist.jump_points.size == 0:
        raise ValueError("cannot sample from a step CDF without jumps")
    if np.any(np.diff(dist.values) < 0) or dist.initial_value != 0.0:
        raise ValueError("dist must be a nondecreasing step CDF starting at 0")
    u = rng.random(n)
    idx = np.searchsorted(dist.values, u, side="left")
    idx = np.minimum(idx, dist.jump_points.size - 1)
    return dist.jump_points[idx]
