"""Test statistics: the IPCW characterization statistics J and M plus the
four competitors (Cramer-von Mises, Pearson-type chi-square, maximal
correlation, DMTTF).

``evaluate`` is the single dispatch point used by the bootstrap and the
power study; it applies the hypothesis handling (fixed mean for the simple
hypothesis, MLE rescaling for the composite one) before delegating to the
individual statistic functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .kernels import DESU, PURI_RUBIN, normalize_char
from .survival import (
    CensoredSample,
    DegenerateWeightError,
    _censoring_survival_left,
    _ipcw,
    _km_event_jumps,
    _survival_right,
    censored_exp_mle,
    km_mean,
)

__all__ = [
    "StatisticSpec",
    "TestOutcome",
    "j_statistic",
    "m_statistic",
    "cvm_koziol",
    "akritas_chi2",
    "qn_statistic",
    "delta_statistic",
    "evaluate",
]

KINDS = ("J", "M", "cvm", "chi2", "qns", "delta")


@dataclass(frozen=True)
class StatisticSpec:
    """Which test to run and how.

    ``kind`` is one of J, M (characterization statistics, requiring ``char``
    and tuning parameter ``a``), cvm, chi2, qns or delta.  ``hypothesis`` is
    'simple' (known mean ``mu``) or 'composite' (mean estimated by the
    censored MLE).  ``m_method`` selects the integration path for M.
    """

    kind: str
    char: str | None = None
    a: float | None = None
    r: int = 3
    hypothesis: str = "simple"
    mu: float = 1.0
    m_method: str = "quadrature"
    quad_nodes: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if self.kind in ("J", "M"):
            if self.char is None or self.a is None:
                raise ValueError(f"{self.kind} requires a characterization and a > 0")
            object.__setattr__(self, "char", normalize_char(self.char))
            if not self.a > 0:
                raise ValueError("a must be positive")
        if self.kind == "chi2" and self.r < 2:
            raise ValueError("chi2 needs at least two cells")
        if self.hypothesis not in ("simple", "composite"):
            raise ValueError("hypothesis must be 'simple' or 'composite'")
        if self.m_method not in ("quadrature", "closed"):
            raise ValueError("m_method must be 'quadrature' or 'closed'")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    @property
    def two_sided(self) -> bool:
        """J and the maximal-correlation statistic reject for both tails."""
        return self.kind in ("J", "qns")

    @classmethod
    def from_string(cls, text: str, hypothesis: str = "simple", mu: float = 1.0) -> "StatisticSpec":
        """Parse config strings like ``J:PR:a=1``, ``M:D:a=2:quad=64``,
        ``chi2:r=3``, ``cvm``, ``qns``, ``delta``."""
        parts = [p for p in text.strip().split(":") if p]
        if not parts:
            raise ValueError("empty statistic spec")
        kind = parts[0]
        if kind.lower() in ("cvm", "qns", "delta", "chi2"):
            kind = kind.lower()
        kwargs = dict(hypothesis=hypothesis, mu=mu)
        pos = 1
        if kind in ("J", "M"):
            if len(parts) < 2:
                raise ValueError(f"{kind} spec needs a characterization, e.g. {kind}:PR:a=1")
            kwargs["char"] = parts[1]
            pos = 2
        for part in parts[pos:]:
            if "=" not in part:
                raise ValueError(f"bad spec component {part!r} in {text!r}")
            key, val = part.split("=", 1)
            if key == "a":
                kwargs["a"] = float(val)
            elif key == "r":
                kwargs["r"] = int(val)
            elif key == "quad":
                kwargs["m_method"] = "quadrature"
                kwargs["quad_nodes"] = int(val)
            elif key == "method":
                kwargs["m_method"] = val
            elif key == "mu":
                kwargs["mu"] = float(val)
            else:
                raise ValueError(f"unknown spec key {key!r} in {text!r}")
        return cls(kind, **kwargs)

    def to_string(self) -> str:
        if self.kind in ("J", "M"):
            char = "PR" if self.char == PURI_RUBIN else "D"
            s = f"{self.kind}:{char}:a={self.a:g}"
            if self.kind == "M" and self.quad_nodes != 64:
                s += f":quad={self.quad_nodes}"
            return s
        if self.kind == "chi2":
            return f"chi2:r={self.r}"
        return self.kind

    def label(self) -> str:
        """Human-readable name used in rendered tables."""
        if self.kind in ("J", "M"):
            char = "P" if self.char == PURI_RUBIN else "D"
            return f"{self.kind}^{char}_c,{self.a:g}"
        return {"cvm": "w2", "chi2": f"A_n{self.r}", "qns": "QnS", "delta": "Delta_n"}[self.kind]


@dataclass(frozen=True)
class TestOutcome:
    """Result of a single test run."""

    statistic: float
    critical_values: tuple
    p_value: float | None
    reject: bool
    meta: dict = field(default_factory=dict)


@lru_cache(maxsize=16)
def _laguerre(nodes: int):
    x, w = np.polynomial.laguerre.laggauss(nodes)
    return x, w


def _uncensored_with_weights(samp: CensoredSample):
    w = _ipcw(samp.times, samp.events)
    keep = w > 0
    return samp.times[keep], w[keep]


def j_statistic(sample: CensoredSample, char: str, a: float) -> float:
    """IPCW U-statistic with kernel Phi; pairs with a censored member drop out."""
    if not a > 0:
        raise ValueError("a must be positive")
    char = normalize_char(char)
    x, wt = _uncensored_with_weights(sample)
    n = sample.n
    if x.size < 2:
        return 0.0
    inv_self = 1.0 / (a + x)
    wsum = wt.sum()
    # sum over ordered pairs of (1/(a+x_i)) w_i w_j = w_i/(a+x_i) (W - w_i)
    lin = float(np.dot(wt * inv_self, wsum - wt))
    psi_m = kernels.psi(char, x[:, None], x[None, :])
    inv_psi = 1.0 / (a + psi_m)
    quad_full = float(wt @ inv_psi @ wt - np.dot(wt * wt, np.diag(inv_psi)))
    total = 0.5 * lin - 0.5 * quad_full  # both halved: ordered pairs counted twice
    return total / math.comb(n, 2)


def _u_process_nodes(times, events, char, t: np.ndarray, n: int):
    """The weighted U-empirical process at the given t nodes."""
    w = _ipcw(times, events)
    keep = w > 0
    x = times[keep]
    wt = w[keep]
    if x.size < 2:
        return np.zeros_like(t)
    order = np.argsort(x, kind="stable")
    x = x[order]
    wt = wt[order]
    ex = np.exp(-np.outer(t, x))  # (K, m)
    wsum = wt.sum()
    lin = 0.5 * ex @ (wt * (wsum - wt))
    if char == DESU:
        # psi = 2 x_i for the smaller member: e^{-2 t x_i} * w_i * sum_{j>i} w_j
        tail = np.concatenate((np.cumsum(wt[::-1])[-2::-1], [0.0]))
        pair = (ex * ex) @ (wt * tail)
        # tied observations: min is the shared value either way, so sorting order
        # inside a tie group does not change psi
    else:
        # sorted recurrence: S_j = sum_{i<j} w_i e^{-t (x_j - x_i)}
        decay = np.exp(-np.outer(t, np.diff(x)))  # (K, m-1)
        S = np.zeros_like(t)
        pair = np.zeros_like(t)
        for j in range(1, x.size):
            S = (S + wt[j - 1]) * decay[:, j - 1]
            pair += wt[j] * S
    return (lin - pair) / math.comb(n, 2)


def m_statistic(
    sample: CensoredSample,
    char: str,
    a: float,
    m_method: str = "quadrature",
    quad_nodes: int = 64,
) -> float:
    """Integral statistic: the squared weighted U-process integrated against
    e^{-at}.  The closed form expands the process into a sum of exponentials
    and integrates exactly; the quadrature path uses Gauss-Laguerre."""
    if not a > 0:
        raise ValueError("a must be positive")
    char = normalize_char(char)
    if m_method == "closed":
        return _m_closed(sample, char, a)
    nodes, weights = _laguerre(quad_nodes)
    t = nodes / a
    u = _u_process_nodes(sample.times, sample.events, char, t, sample.n)
    return float(np.dot(weights, u * u) / a)


def _m_closed(sample: CensoredSample, char: str, a: float) -> float:
    x, wt = _uncensored_with_weights(sample)
    n = sample.n
    if x.size < 2:
        return 0.0
    iu, ju = np.triu_indices(x.size, 1)
    cw = wt[iu] * wt[ju]
    psi_p = kernels.psi(char, x[iu], x[ju])
    coef = np.concatenate((0.5 * cw, 0.5 * cw, -cw)) / math.comb(n, 2)
    expo = np.concatenate((x[iu], x[ju], psi_p))
    # The coefficients of each pair sum to zero, so the process is a
    # combination of (e^{-b t} - 1) terms.  Integrating products of those
    # against e^{-at} keeps every Gram entry positive and proportional to
    # b_i * b_j, which avoids the cancellation that a direct 1/(a + b_i + b_j)
    # quadratic form suffers when the statistic is tiny.
    bi = expo[:, None]
    bj = expo[None, :]
    gram = (bi * bj) * (2.0 * a + bi + bj) / (
        a * (a + bi) * (a + bj) * (a + bi + bj)
    )
    return float(coef @ gram @ coef)


def _km_cdf_pieces(sample: CensoredSample):
    """Distinct jump times and post-jump CDF values of the tail-modified
    Kaplan-Meier event CDF."""
    jumps = _km_event_jumps(sample.times, sample.events)
    order = np.argsort(sample.times, kind="stable")
    ts = sample.times[order]
    js = jumps[order]
    distinct, start = np.unique(ts, return_index=True)
    end = np.r_[start[1:], ts.size]
    mass = np.add.reduceat(js, start)
    keep = mass > 0
    return distinct[keep], np.cumsum(mass[keep])


def cvm_koziol(sample: CensoredSample, mu: float) -> float:
    """Cramer-von Mises distance between the tail-modified Kaplan-Meier CDF
    and the exponential CDF with mean mu, integrated with weight e^{-t/mu}.

    Computed exactly piece by piece; each piece is polynomial in e^{-t/mu}.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    jp, cum = _km_cdf_pieces(sample)
    # piecewise-constant levels: 0 before the first jump, then cum values
    bounds = np.concatenate(([0.0], jp, [np.inf]))
    levels = np.concatenate(([0.0], cum))
    sa = np.exp(-bounds[:-1] / mu)
    sb = np.where(np.isfinite(bounds[1:]), np.exp(-bounds[1:] / mu), 0.0)
    c1 = levels - 1.0
    total = (
        c1 ** 2 * mu * (sa - sb)
        + c1 * mu * (sa ** 2 - sb ** 2)
        + mu / 3.0 * (sa ** 3 - sb ** 3)
    )
    return float(total.sum())


def _partial_mean(times: np.ndarray, z: float) -> float:
    """(1/n) sum min(X_i, z) = integral of (1 - edf) over [0, z]."""
    return float(np.minimum(times, z).mean())


def akritas_chi2(
    sample: CensoredSample, hypothesis: str = "simple", r: int = 3, mu: float = 1.0
) -> float:
    """Pearson-type statistic on cells equiprobable under the null.

    Simple mode compares uncensored cell counts with n p_hat; composite mode
    uses the quadratic form with the generalized inverse of the estimated
    covariance (the cell probabilities use the Kaplan-Meier mean, the Fisher
    information the censored MLE)."""
    if r < 2:
        raise ValueError("r must be at least 2")
    times, events = sample.times, sample.events
    n = sample.n
    mu_cells = mu if hypothesis == "simple" else km_mean(sample)
    if not mu_cells > 0:
        raise ValueError("estimated mean must be positive")
    inner = -mu_cells * np.log1p(-np.arange(1, r) / r)
    edges = np.concatenate(([0.0], inner, [np.inf]))
    counts = np.histogram(times[events], bins=edges)[0]
    pm = np.array([_partial_mean(times, z) if np.isfinite(z) else times.mean() for z in edges])
    b = np.diff(pm)  # integral of (1 - edf) over each cell
    p_hat = b / mu_cells
    if np.any(p_hat <= 0):
        raise ValueError("degenerate cell: estimated cell probability is zero")
    if hypothesis == "simple":
        return float(np.sum((counts - n * p_hat) ** 2 / (n * p_hat)))
    v = (counts - n * p_hat) / np.sqrt(n)
    mle = censored_exp_mle(sample)
    # per-observation Fisher information about the rate 1/mu at the MLE
    info = events.mean() * mle ** 2
    m = np.diag(p_hat) - np.outer(b, b) / info
    # the limiting covariance is PSD; the finite-sample estimate may not be,
    # so negative eigenvalues are dropped before pseudo-inversion
    vals, vecs = np.linalg.eigh(m)
    tol = 1e-12 * max(vals.max(), 1.0)
    inv = np.where(vals > tol, 1.0 / np.where(vals > tol, vals, 1.0), 0.0)
    return float(v @ ((vecs * inv) @ vecs.T) @ v)


def qn_statistic(sample: CensoredSample, mu: float) -> float:
    """Standardized maximal-correlation statistic.

    The variance of the unstandardized statistic is estimated by the
    delete-one jackknife, which is consistent for non-degenerate weighted
    U-statistics of this form."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    qn = _qn_raw(sample.times, sample.events, mu)
    n = sample.n
    loo = np.empty(n)
    idx = np.arange(n)
    for i in range(n):
        keep = idx != i
        loo[i] = _qn_raw(sample.times[keep], sample.events[keep], mu)
    var_jack = (n - 1) / n * np.sum((loo - loo.mean()) ** 2)
    if var_jack <= 0:
        raise ValueError("degenerate jackknife variance for the Qn statistic")
    sigma2_n = n * var_jack
    return float(np.sqrt(n) * qn / np.sqrt(sigma2_n))


def _qn_raw(times: np.ndarray, events: np.ndarray, mu: float) -> float:
    omega = _km_event_jumps(times, events)
    if not np.any(omega > 0):
        raise ValueError("all Kaplan-Meier jumps vanish")
    y = -np.expm1(-times / mu)
    le = y[None, :] <= y[:, None]  # le[i, j] = 1{Y_j <= Y_i}
    np.fill_diagonal(le, False)
    gt = ~le
    np.fill_diagonal(gt, False)
    contrib = (6.0 * y - 2.0)[:, None] * le - 6.0 * y[:, None] * gt
    return float(omega @ contrib @ omega)


def delta_statistic(sample: CensoredSample) -> float:
    """DMTTF-based statistic; weights use the right-continuous K_c value
    exactly as the construction prescribes (no left limit)."""
    times, events = sample.times, sample.events
    n = sample.n
    kc = _survival_right(times, events, target_event=False)
    bad = events & (kc <= 0)
    if np.any(bad):
        raise DegenerateWeightError("zero censoring-survival weight at an uncensored time")
    w = np.where(events, np.divide(1.0, kc, out=np.ones_like(kc), where=kc > 0), 0.0)
    x = times[events]
    wt = w[events]
    if x.size < 2:
        return 0.0
    order = np.argsort(x, kind="stable")
    x = x[order]
    wt = wt[order]
    # sum_{i<j} w_i w_j (2 min - (x_i + x_j)/2) over sorted x: min = x_i
    tail_w = np.concatenate((np.cumsum(wt[::-1])[-2::-1], [0.0]))
    tail_wx = np.concatenate((np.cumsum((wt * x)[::-1])[-2::-1], [0.0]))
    total = np.sum(wt * (1.5 * x * tail_w - 0.5 * tail_wx))
    return float(total / math.comb(n, 2))


def evaluate(spec: StatisticSpec, sample: CensoredSample) -> float:
    """Compute the statistic described by ``spec`` on ``sample``, applying
    the hypothesis handling (scaling or plug-in mean) it calls for."""
    if spec.hypothesis == "composite":
        mu = censored_exp_mle(sample)
    else:
        mu = spec.mu
    if spec.kind in ("J", "M", "delta"):
        samp = sample if mu == 1.0 else sample.scaled(1.0 / mu)
        if spec.kind == "J":
            return j_statistic(samp, spec.char, spec.a)
        if spec.kind == "M":
            return m_statistic(samp, spec.char, spec.a, spec.m_method, spec.quad_nodes)
        return delta_statistic(samp)
    if spec.kind == "cvm":
        return cvm_koziol(sample, mu)
    if spec.kind == "qns":
        return qn_statistic(sample, mu)
    return akritas_chi2(sample, spec.hypothesis, spec.r, mu)
