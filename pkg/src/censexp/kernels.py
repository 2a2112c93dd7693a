"""Characterization kernels for the exponentiality tests.

Two equidistribution characterizations are supported: Puri-Rubin, where X
and |X - Y| are equidistributed iff X is exponential, and Desu, where X and
2 min(X, Y) are.  The degree-two kernels built from them are

    Phi(x1, x2; a) = (1/2) (1/(a+x1) + 1/(a+x2) - 2/(a+psi(x1,x2)))
    h(x1, x2; t)   = (1/2) (e^{-t x1} + e^{-t x2} - 2 e^{-t psi(x1,x2)})

with psi the characterization map.  Their first projections under the unit
exponential were derived analytically and are validated against adaptive
quadrature in the test suite.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = [
    "PURI_RUBIN",
    "DESU",
    "CHARACTERIZATIONS",
    "psi",
    "phi_kernel",
    "h_kernel",
    "h1_projection",
    "phi1_projection",
]

PURI_RUBIN = "puri-rubin"
DESU = "desu"
CHARACTERIZATIONS = (PURI_RUBIN, DESU)

# switch to the series expansion of the removable t=1 singularity inside this band
_SING_BAND = 1e-4

_CHAR_ALIASES = {
    "pr": PURI_RUBIN, "p": PURI_RUBIN, "puri_rubin": PURI_RUBIN, PURI_RUBIN: PURI_RUBIN,
    "d": DESU, DESU: DESU,
}


def normalize_char(char: str) -> str:
    key = char.lower().replace("purirubin", "pr")
    if key not in _CHAR_ALIASES:
        raise ValueError(f"unknown characterization {char!r}")
    return _CHAR_ALIASES[key]


def psi(char: str, x1, x2):
    char = normalize_char(char)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if char == PURI_RUBIN:
        return np.abs(x1 - x2)
    return 2.0 * np.minimum(x1, x2)


def phi_kernel(char: str, x1, x2, a: float):
    if not a > 0:
        raise ValueError("a must be positive")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return 0.5 * (1.0 / (a + x1) + 1.0 / (a + x2) - 2.0 / (a + psi(char, x1, x2)))


def h_kernel(char: str, x1, x2, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return 0.5 * (np.exp(-t * x1) + np.exp(-t * x2) - 2.0 * np.exp(-t * psi(char, x1, x2)))


def _pr_laplace_abs(x, t):
    """E e^{-t|x - Y|} for Y ~ Exp(1): (e^{-x}-e^{-tx})/(t-1) + e^{-x}/(1+t)."""
    s = t - 1.0
    sing = np.abs(s) < _SING_BAND
    ssafe = np.where(sing, 1.0, s)
    main = (np.exp(-x) - np.exp(-t * x)) / ssafe
    sx = s * x
    series = np.exp(-x) * x * (1.0 - sx / 2.0 + sx ** 2 / 6.0 - sx ** 3 / 24.0)
    return np.where(sing, series, main) + np.exp(-x) / (1.0 + t)


def h1_projection(char: str, x, t):
    """First projection E(h(x, Y; t)) with Y ~ Exp(1); closed form."""
    char = normalize_char(char)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    ext = np.exp(-t * x)
    base = 0.5 * ext + 0.5 / (1.0 + t)
    if char == PURI_RUBIN:
        out = base - _pr_laplace_abs(x, t)
    else:
        b = 1.0 + 2.0 * t
        exb = np.exp(-b * x)
        # E e^{-2 t min(x, Y)} = (1 - e^{-(1+2t)x})/(1+2t) + e^{-(1+2t)x}
        out = base - (-np.expm1(-b * x)) / b - exb
    return out if out.shape else float(out)


def _exp_e1(z):
    """e^z E1(z), stable for large z via the asymptotic series."""
    z = np.asarray(z, dtype=float)
    big = z > 600.0
    zsafe = np.where(big, 1.0, z)
    exact = np.exp(zsafe) * special.exp1(zsafe)
    zi = 1.0 / np.where(big, z, 1.0)
    asym = zi * (1.0 - zi * (1.0 - zi * (2.0 - zi * (6.0 - zi * 24.0))))
    return np.where(big, asym, exact)


def _exp_neg_ei(z):
    """e^{-z} Ei(z) for z > 0, stable for large z via the asymptotic series."""
    z = np.asarray(z, dtype=float)
    big = z > 600.0
    zsafe = np.where(big, 1.0, z)
    exact = np.exp(-zsafe) * special.expi(zsafe)
    zi = 1.0 / np.where(big, z, 1.0)
    asym = zi * (1.0 + zi * (1.0 + zi * (2.0 + zi * (6.0 + zi * 24.0))))
    return np.where(big, asym, exact)


def phi1_projection(char: str, x, a: float):
    """First projection E(Phi(x, Y; a)) with Y ~ Exp(1); closed form.

    Equals the Laplace transform of h1_projection in t with weight e^{-at}.
    """
    char = normalize_char(char)
    if not a > 0:
        raise ValueError("a must be positive")
    x = np.asarray(x, dtype=float)
    ea = _exp_e1(a)
    if char == PURI_RUBIN:
        # E 1/(a+|x-Y|) = e^{-x-a}(Ei(a+x) - Ei(a)) + e^{-x+a} E1(a);
        # the first piece is e^{-z} Ei(z) at z = a + x
        mean_abs = _exp_neg_ei(a + x) - np.exp(-x - a) * special.expi(a) + np.exp(-x) * ea
        out = 0.5 * (1.0 / (a + x) + ea - 2.0 * mean_abs)
    else:
        # E 1/(a+2 min(x,Y)) = (e^{a/2}/2)(E1(a/2) - E1((a+2x)/2)) + e^{-x}/(a+2x)
        half = _exp_e1(a / 2.0)
        tailterm = np.exp(-x) * _exp_e1((a + 2.0 * x) / 2.0)
        mean_min = 0.5 * (half - tailterm) + np.exp(-x) / (a + 2.0 * x)
        out = 0.5 * (1.0 / (a + x) + ea - 2.0 * mean_min)
    return out if out.shape else float(out)
