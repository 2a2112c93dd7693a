"""Large-sample machinery: the martingale-corrected influence terms, the
covariance estimator of the limiting process, the variance estimator for the
J statistic with its normal-approximation test, and the discretized-operator
eigenvalues governing the limit of the M statistic.

All null quantities assume a unit-exponential survival law; composite-mode
callers rescale the sample by the censored MLE first.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import kernels
from .kernels import normalize_char, PURI_RUBIN
from .statistics import StatisticSpec, TestOutcome, j_statistic
from .survival import (
    CensoredSample,
    _censoring_survival_left,
    censored_exp_mle,
    kaplan_meier,
)

__all__ = [
    "CovEstimate",
    "omega_hat",
    "zeta_hat",
    "covariance_estimate",
    "sigma2_j",
    "j_asymptotic_test",
    "limiting_eigenvalues",
    "gauss_laguerre_grid",
]

_SING_BAND = 1e-4


@dataclass(frozen=True)
class CovEstimate:
    """Covariance of the limiting process on a t grid."""

    t_grid: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (t.size, t.size):
            raise ValueError("matrix shape must match the grid")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "matrix", m)


def _h1_tail_integral(char: str, u, t):
    """Closed form of the tail integral of h1 against the unit-exponential
    density: integral over (u, inf) of h1(x; t) e^{-x} dx."""
    char = normalize_char(char)
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    eu = np.exp(-u)
    g = np.exp(-(1.0 + t) * u) / (1.0 + t)
    base = 0.5 * g + 0.5 * eu / (1.0 + t)
    if char == PURI_RUBIN:
        e2u = np.exp(-2.0 * u)
        s = t - 1.0
        sing = np.abs(s) < _SING_BAND
        ssafe = np.where(sing, 1.0, s)
        main = (0.5 * e2u - g) / ssafe
        series = e2u * (u / 2.0 + 0.25 - s * (u ** 2 / 4.0 + u / 4.0 + 0.125))
        mid = np.where(sing, series, main)
        return base - mid - e2u / (2.0 * (1.0 + t))
    b2 = 2.0 + 2.0 * t
    gb = np.exp(-b2 * u) / b2
    return base - (eu - gb) / (1.0 + 2.0 * t) - gb


def omega_hat(sample: CensoredSample, char: str, u: float, t) -> float | np.ndarray:
    """Estimated integrand weight of the censoring-martingale integral."""
    char = normalize_char(char)
    kleft = float(kaplan_meier(sample, "censoring").eval_left(u))
    return _omega_from_parts(char, u, t, kleft)


def _omega_from_parts(char, u, t, kleft):
    denom = np.exp(-np.asarray(u, dtype=float)) * kleft
    if np.any(np.asarray(denom) <= 0):
        raise ValueError("omega undefined where (1-F(u)) K_c(u-) vanishes")
    return _h1_tail_integral(char, u, t) / denom


def _zeta_matrix(times: np.ndarray, events: np.ndarray, char: str, tgrid: np.ndarray):
    """zeta_i(t) for every observation and grid point; shape (n, T)."""
    n = times.size
    kleft = _censoring_survival_left(times, events)
    if np.any(events & (kleft <= 0)):
        raise ValueError("degenerate censoring-survival weight")
    h1 = kernels.h1_projection(char, times[:, None], tgrid[None, :])
    lead = h1 * (events / kleft)[:, None]
    om = _h1_tail_integral(char, times[:, None], tgrid[None, :]) / (
        np.exp(-times) * kleft
    )[:, None]
    cens = (~events).astype(float)
    at_risk = np.sum(times[:, None] >= times[None, :], axis=0)  # Y(X_j): count of X_k >= X_j
    comp = om * (cens / at_risk)[:, None]  # omega(X_j;t) (1-delta_j)/Y(X_j)
    geq = (times[:, None] >= times[None, :]).astype(float)
    mart = om * cens[:, None] - geq @ comp
    return lead + mart


def zeta_hat(sample: CensoredSample, char: str, i: int, t) -> float | np.ndarray:
    """Influence term for observation i at one or more t values."""
    char = normalize_char(char)
    tgrid = np.atleast_1d(np.asarray(t, dtype=float))
    z = _zeta_matrix(sample.times, sample.events, char, tgrid)
    out = z[i]
    return float(out[0]) if np.isscalar(t) or np.ndim(t) == 0 else out


def covariance_estimate(sample: CensoredSample, char: str, t_grid) -> CovEstimate:
    """(4/n) sum_i zeta_i(t1) zeta_i(t2), symmetrized and PSD-projected."""
    char = normalize_char(char)
    tgrid = np.asarray(t_grid, dtype=float)
    if tgrid.size == 0:
        raise ValueError("t grid must be nonempty")
    z = _zeta_matrix(sample.times, sample.events, char, tgrid)
    c = 4.0 / sample.n * (z.T @ z)
    c = 0.5 * (c + c.T)
    vals, vecs = np.linalg.eigh(c)
    vals = np.clip(vals, 0.0, None)
    c = (vecs * vals) @ vecs.T
    c = 0.5 * (c + c.T)
    return CovEstimate(tgrid, c)


def _phi1_tail_integral(char: str, u: np.ndarray, a: float, nodes: int = 64) -> np.ndarray:
    """integral over (u, inf) of Phi1(x; a) e^{-x} dx via Gauss-Laguerre after
    shifting to the tail: e^{-u} * integral Phi1(u + s) e^{-s} ds."""
    x, w = np.polynomial.laguerre.laggauss(nodes)
    vals = kernels.phi1_projection(char, u[:, None] + x[None, :], a)
    return np.exp(-u) * (vals @ w)


def _j_influence(times, events, char, a):
    """Summands whose empirical variance (times 4) estimates sigma^2."""
    kleft = _censoring_survival_left(times, events)
    if np.any(events & (kleft <= 0)):
        raise ValueError("degenerate censoring-survival weight")
    phi1 = np.asarray(kernels.phi1_projection(char, times, a))
    lead = phi1 * events / kleft
    om = _phi1_tail_integral(char, times, a) / (np.exp(-times) * kleft)
    cens = (~events).astype(float)
    at_risk = np.sum(times[:, None] >= times[None, :], axis=0)
    comp = om * cens / at_risk
    geq = (times[:, None] >= times[None, :]).astype(float)
    mart = om * cens - geq @ comp
    return lead + mart


def sigma2_j(sample: CensoredSample, char: str, a: float) -> float:
    """Consistent estimator of the limiting variance of sqrt(n) J."""
    char = normalize_char(char)
    if not a > 0:
        raise ValueError("a must be positive")
    s = _j_influence(sample.times, sample.events, char, a)
    return float(4.0 * (np.mean(s ** 2) - np.mean(s) ** 2))


def j_asymptotic_test(
    sample: CensoredSample,
    char: str,
    a: float,
    alpha: float = 0.05,
    hypothesis: str = "simple",
    mu: float = 1.0,
) -> TestOutcome:
    """Two-sided normal-approximation test for J using the estimated variance."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if sample.n < 200:
        warnings.warn("normal approximation is unreliable below n = 200", stacklevel=2)
    if hypothesis == "composite":
        mu = censored_exp_mle(sample)
    samp = sample if mu == 1.0 else sample.scaled(1.0 / mu)
    j = j_statistic(samp, char, a)
    s2 = sigma2_j(samp, char, a)
    if s2 <= 0:
        raise ValueError("degenerate variance estimate")
    z = math.sqrt(sample.n) * j / math.sqrt(s2)
    zcrit = stats.norm.ppf(1.0 - alpha / 2.0)
    p = 2.0 * stats.norm.sf(abs(z))
    spec = StatisticSpec("J", char=char, a=a, hypothesis=hypothesis, mu=mu)
    return TestOutcome(
        statistic=j,
        critical_values=(-zcrit, zcrit),
        p_value=float(p),
        reject=bool(abs(z) > zcrit),
        meta={"z": z, "sigma2": s2, "alpha": alpha, "spec": spec.to_string(), "method": "asymptotic"},
    )


def gauss_laguerre_grid(a: float, nodes: int = 100):
    """Nodes and weights turning integrals with weight e^{-at} into dot
    products: integral f(t) e^{-at} dt = sum w_k f(t_k)."""
    if not a > 0:
        raise ValueError("a must be positive")
    x, w = np.polynomial.laguerre.laggauss(nodes)
    return x / a, w / a


def limiting_eigenvalues(cov: CovEstimate, a: float, k: int) -> np.ndarray:
    """Leading eigenvalues of the discretized integral operator with kernel
    cov(t1, t2) and weight e^{-a t2} (Nystrom method on the cov grid)."""
    t, w = gauss_laguerre_grid(a, cov.t_grid.size)
    if not np.allclose(t, cov.t_grid, rtol=1e-10, atol=1e-12):
        raise ValueError("covariance grid does not match the quadrature grid for this a")
    if k > cov.t_grid.size:
        raise ValueError("k exceeds the grid size")
    sw = np.sqrt(w)
    b = cov.matrix * np.outer(sw, sw)
    vals = np.linalg.eigvalsh(b)
    vals = np.clip(vals[::-1], 0.0, None)
    return vals[:k]
