"""Special functions and reference laws used across the package.

Jacobi polynomials with real parameters (three-term recurrence), log-gamma
ratios for series coefficients, and the Cauchy / normal reference
characteristic functions that appear as limit laws.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


class Regime(enum.Enum):
    """State space of the radial diffusion: [0, pi/2] or [0, inf)."""

    TRIGONOMETRIC = "trigonometric"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class JacobiParams:
    """Parameters (alpha, beta) of a radial Jacobi generator.

    alpha, beta must both exceed -1.  The regime selects the trigonometric
    diffusion on [0, pi/2] or the hyperbolic one on [0, inf).
    """

    alpha: float
    beta: float
    regime: Regime = Regime.TRIGONOMETRIC

    def __post_init__(self):
        if not (self.alpha > -1.0):
            raise ValueError(f"alpha must be > -1, got {self.alpha}")
        if not (self.beta > -1.0):
            raise ValueError(f"beta must be > -1, got {self.beta}")
        if not isinstance(self.regime, Regime):
            raise ValueError(f"regime must be a Regime, got {self.regime!r}")


@dataclass(frozen=True)
class CauchyLaw:
    """Centered Cauchy law; `scale` is the parameter of the limit laws."""

    scale: float

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale}")

    def cf(self, lam: float) -> complex:
        return complex(math.exp(-self.scale * abs(lam)))

    def cdf(self, x) -> np.ndarray:
        return 0.5 + np.arctan(np.asarray(x, dtype=float) / self.scale) / np.pi


@dataclass(frozen=True)
class NormalLaw:
    """Normal law with given mean and variance."""

    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")

    def cf(self, lam: float) -> complex:
        return complex(
            np.exp(1j * self.mean * lam - 0.5 * self.variance * lam * lam)
        )

    def cdf(self, x) -> np.ndarray:
        from scipy.special import ndtr

        if self.variance == 0:
            return (np.asarray(x, dtype=float) >= self.mean).astype(float)
        return ndtr((np.asarray(x, dtype=float) - self.mean) / math.sqrt(self.variance))


def jacobi_poly(m: int, p: JacobiParams, x):
    """Jacobi polynomial P_m^{alpha,beta}(x) in the standard normalization.

    Standard normalization means P_m(1) = Gamma(m+alpha+1)/(m! Gamma(alpha+1)).
    Evaluated by the three-term recurrence, which is stable on [-1, 1] and
    valid for real non-integer parameters.  `x` may be a scalar or array.
    """
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got {m}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise ValueError("argument outside [-1, 1]")
    a, b = p.alpha, p.beta

    p0 = np.ones_like(x)
    if m == 0:
        return p0 if p0.ndim else float(p0)
    p1 = 0.5 * (a - b + (a + b + 2.0) * x)
    if m == 1:
        return p1 if p1.ndim else float(p1)
    for k in range(2, m + 1):
        c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0)
        c2 = (2.0 * k + a + b - 1.0) * (a * a - b * b)
        c3 = (2.0 * k + a + b - 2.0) * (2.0 * k + a + b - 1.0) * (2.0 * k + a + b)
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b)
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
    return p1 if p1.ndim else float(p1)


def jacobi_poly_at_one(m: int, alpha: float) -> float:
    """P_m^{alpha,beta}(1) = binom(m+alpha, m), independent of beta."""
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got {m}")
    return math.exp(log_gamma_ratio(m + alpha + 1.0, alpha + 1.0) - gammaln(m + 1.0))


def jacobi_endpoint_bound(m: int, p: JacobiParams) -> float:
    """max(|P_m(1)|, |P_m(-1)|); bounds |P_m| on [-1,1] for alpha,beta >= -1/2."""
    return max(jacobi_poly_at_one(m, p.alpha), jacobi_poly_at_one(m, p.beta))


def log_gamma_ratio(a: float, b: float) -> float:
    """ln(Gamma(a)/Gamma(b)) without overflow, for positive a, b."""
    if a <= 0 or b <= 0:
        raise ValueError(f"arguments must be positive, got ({a}, {b})")
    return float(gammaln(a) - gammaln(b))


def reference_cf(law, lam: float) -> complex:
    """Characteristic function of a reference law (CauchyLaw or NormalLaw)."""
    return law.cf(lam)
