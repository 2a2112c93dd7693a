"""Sampling, CDF and quantile evaluation for the null exponential law,
the power-study alternatives, and Koziol-Green censoring.

All families are supported on (0, inf).  Parameterizations:

    exp(theta)        F(x) = 1 - exp(-x/theta)          (theta = mean)
    weibull(theta)    F(x) = 1 - exp(-x^theta)
    gamma(theta)      shape theta, rate 1
    halfnormal        |N(0, 1)|
    chen(theta)       F(x) = 1 - exp(2 (1 - e^{x^theta}))
    linearfailure(theta)   F(x) = 1 - exp(-x - theta x^2 / 2)
    extremevalue(theta)    F(x) = 1 - exp((1 - e^x)/theta)
    lognormal(theta)  log-mean 0, log-sd theta
    dhillon(theta)    F(x) = 1 - exp(-(ln(x+1))^{theta+1})
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .survival import CensoredSample

__all__ = [
    "DistSpec",
    "KGCensoring",
    "FAMILIES",
    "cdf",
    "quantile",
    "sample",
    "censoring_beta_for_rate",
    "generate_censored_sample",
]

FAMILIES = (
    "exp",
    "weibull",
    "gamma",
    "halfnormal",
    "chen",
    "linearfailure",
    "extremevalue",
    "lognormal",
    "dhillon",
)

_ALIASES = {
    "e": "exp", "exponential": "exp",
    "w": "weibull",
    "g": "gamma",
    "hn": "halfnormal", "half-normal": "halfnormal",
    "ch": "chen",
    "lf": "linearfailure", "linearfailurerate": "linearfailure",
    "ev": "extremevalue", "modifiedextremevalue": "extremevalue",
    "ln": "lognormal", "log-normal": "lognormal",
    "dl": "dhillon",
}


@dataclass(frozen=True)
class DistSpec:
    """A distribution family plus its single positive parameter.

    ``theta`` is ignored for the half-normal family.
    """

    family: str
    theta: float = 1.0

    def __post_init__(self):
        fam = _ALIASES.get(self.family.lower(), self.family.lower())
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if fam != "halfnormal" and not (self.theta > 0):
            raise ValueError("theta must be positive")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def from_string(cls, text: str) -> "DistSpec":
        """Parse a ``family:theta`` config string, e.g. ``weibull:1.4``."""
        parts = text.strip().split(":")
        if len(parts) == 1:
            return cls(parts[0])
        if len(parts) == 2:
            return cls(parts[0], float(parts[1]))
        raise ValueError(f"bad distribution spec {text!r}")

    def to_string(self) -> str:
        if self.family == "halfnormal":
            return "halfnormal"
        return f"{self.family}:{self.theta:g}"


@dataclass(frozen=True)
class KGCensoring:
    """Koziol-Green censoring: survival K_c(x) = (1 - F_base(x))^beta."""

    beta: float
    base: DistSpec

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def cdf(spec: DistSpec, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    th = spec.theta
    fam = spec.family
    if fam == "exp":
        out = -np.expm1(-x / th)
    elif fam == "weibull":
        out = -np.expm1(-(x ** th))
    elif fam == "gamma":
        out = special.gammainc(th, x)
    elif fam == "halfnormal":
        out = special.erf(x / np.sqrt(2.0))
    elif fam == "chen":
        out = -np.expm1(2.0 * (1.0 - np.exp(x ** th)))
    elif fam == "linearfailure":
        out = -np.expm1(-x - th * x ** 2 / 2.0)
    elif fam == "extremevalue":
        # e^x overflows far in the tail; the limit of the CDF there is 1
        with np.errstate(over="ignore"):
            out = -np.expm1((1.0 - np.exp(x)) / th)
    elif fam == "lognormal":
        out = np.where(x > 0, special.ndtr(np.log(np.maximum(x, 1e-300)) / th), 0.0)
    else:  # dhillon
        out = -np.expm1(-(np.log1p(x) ** (th + 1.0)))
    return out if out.shape else float(out)


def quantile(spec: DistSpec, p):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p >= 1):
        raise ValueError("p must lie in [0, 1)")
    th = spec.theta
    fam = spec.family
    y = -np.log1p(-p)  # -ln(1-p)
    if fam == "exp":
        out = th * y
    elif fam == "weibull":
        out = y ** (1.0 / th)
    elif fam == "gamma":
        out = special.gammaincinv(th, p)
    elif fam == "halfnormal":
        out = special.ndtri((1.0 + p) / 2.0)
    elif fam == "chen":
        out = np.log1p(y / 2.0) ** (1.0 / th)
    elif fam == "linearfailure":
        out = (np.sqrt(1.0 + 2.0 * th * y) - 1.0) / th
    elif fam == "extremevalue":
        out = np.log1p(th * y)
    elif fam == "lognormal":
        with np.errstate(over="ignore"):
            out = np.where(p > 0, np.exp(th * special.ndtri(np.maximum(p, 1e-300))), 0.0)
    else:  # dhillon
        out = np.expm1(y ** (1.0 / (th + 1.0)))
    return out if out.shape else float(out)


def sample(spec: DistSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws by inverse transform; deterministic given the rng state."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.asarray(quantile(spec, rng.random(n)))


def censoring_beta_for_rate(p: float) -> float:
    """Koziol-Green exponent giving censoring rate p: beta = p/(1-p)."""
    if not (0 <= p < 1):
        raise ValueError("censoring rate must lie in [0, 1)")
    return p / (1.0 - p)


def generate_censored_sample(
    alt: DistSpec, target_rate: float, n: int, rng: np.random.Generator
) -> CensoredSample:
    """Koziol-Green censored sample with the exponent applied to ``alt`` itself.

    The censoring survival is (1 - F_alt)^beta with beta = rate/(1-rate), so
    the expected censored fraction equals ``target_rate``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not (0 <= target_rate < 0.5):
        raise ValueError("target censoring rate must lie in [0, 0.5)")
    x = sample(alt, n, rng)
    if target_rate == 0:
        return CensoredSample(x, np.ones(n, dtype=bool))
    beta = censoring_beta_for_rate(target_rate)
    u = rng.random(n)
    # C = F_alt^{-1}(1 - U^{1/beta}); clip keeps the argument inside [0, 1)
    p = np.minimum(1.0 - u ** (1.0 / beta), 1.0 - 1e-16)
    c = np.asarray(quantile(alt, p))
    times = np.minimum(x, c)
    events = x <= c
    return CensoredSample(times, events)
