"""Spectral series for radial transition densities on the sphere side.

Implements the trigonometric Jacobi transition density q_t^{alpha,beta}(r0, r)
on [0, pi/2], its stationary limit, and the kernel of the radial diffusion on
the fiber-rescaled sphere together with its large-rescaling limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .specfun import JacobiParams, Regime, jacobi_poly_at_one


class SeriesNotConvergedError(RuntimeError):
    """Raised when the tail bound cannot be brought below tail_tol."""


class TimeTooSmallError(ValueError):
    """Raised when t is below the series' minimum-time guard."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the spectral series."""

    max_terms: int = 400
    tail_tol: float = 1e-12
    min_time: float = 1e-3

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not (self.tail_tol > 0):
            raise ValueError("tail_tol must be positive")
        if not (self.min_time > 0):
            raise ValueError("min_time must be positive")


@dataclass(frozen=True)
class DensityValue:
    """A truncated series value together with a bound on the discarded tail.

    `truncation_bound` also absorbs the magnitude of any negative clip.
    """

    value: float
    truncation_bound: float


def _log_coeff(m: int, a: float, b: float) -> float:
    """log of (2m+a+b+1) * Gamma(m+a+b+1) m! / (Gamma(m+a+1) Gamma(m+b+1))."""
    return (
        math.log(2 * m + a + b + 1.0)
        + gammaln(m + a + b + 1.0)
        + gammaln(m + 1.0)
        - gammaln(m + a + 1.0)
        - gammaln(m + b + 1.0)
    )


class _JacobiRecurrence:
    """Incremental three-term recurrence producing P_0(x), P_1(x), ... in order."""

    def __init__(self, a: float, b: float, x: float):
        self.a, self.b, self.x = a, b, x
        self.m = -1
        self._pm1 = 0.0
        self._pm = 0.0

    def next(self) -> float:
        a, b, x = self.a, self.b, self.x
        self.m += 1
        m = self.m
        if m == 0:
            val = 1.0
        elif m == 1:
            val = 0.5 * (a - b + (a + b + 2.0) * x)
        else:
            c1 = 2.0 * m * (m + a + b) * (2.0 * m + a + b - 2.0)
            c2 = (2.0 * m + a + b - 1.0) * (a * a - b * b)
            c3 = (2.0 * m + a + b - 2.0) * (2.0 * m + a + b - 1.0) * (2.0 * m + a + b)
            val = ((c2 + c3 * x) * self._pm - 2.0 * (m + a - 1.0) * (m + b - 1.0)
                   * (2.0 * m + a + b) * self._pm1) / c1
        self._pm1, self._pm = self._pm, val
        return val


def _endpoint_bound(m: int, a: float, b: float) -> float:
    """Bound on |P_m^{a,b}| over [-1,1]: the larger endpoint value.

    Valid for a, b >= -1/2 (the polynomial attains its sup at an endpoint
    in that range).
    """
    return max(jacobi_poly_at_one(m, a), jacobi_poly_at_one(m, b))


def _sum_series(a: float, b: float, t: float, x0: float, x: float,
                ctl: SeriesControl) -> tuple[float, float]:
    """Sum_m c_m e^{-2m(m+a+b+1)t} P_m(x0) P_m(x) with a rigorous tail bound.

    Returns (sum, tail_bound).  For a, b >= -1/2 the tail is bounded through
    endpoint dominance of the Jacobi polynomials plus a geometric-ratio
    argument; otherwise an empirical three-small-terms rule is used.
    """
    rec0 = _JacobiRecurrence(a, b, x0)
    rec1 = _JacobiRecurrence(a, b, x)
    rigorous = a >= -0.5 and b >= -0.5

    def bound(m: int) -> float:
        lg = _log_coeff(m, a, b) - 2.0 * m * (m + a + b + 1.0) * t
        if rigorous:
            e = _endpoint_bound(m, a, b)
            return math.exp(lg) * e * e
        return math.exp(lg)

    total = 0.0
    small_streak = 0
    for m in range(ctl.max_terms + 1):
        term = math.exp(_log_coeff(m, a, b) - 2.0 * m * (m + a + b + 1.0) * t) \
            * rec0.next() * rec1.next()
        total += term
        if rigorous:
            b1 = bound(m + 1)
            b2 = bound(m + 2)
            if b1 <= 0.0:
                return total, 0.0
            ratio = b2 / b1
            if ratio < 1.0:
                tail = b1 / (1.0 - ratio)
                if tail <= ctl.tail_tol:
                    return total, tail
        else:
            small_streak = small_streak + 1 if abs(term) < ctl.tail_tol / 10 else 0
            if small_streak >= 3:
                return total, ctl.tail_tol
    raise SeriesNotConvergedError(
        f"tail bound not below {ctl.tail_tol} within {ctl.max_terms} terms "
        f"(a={a}, b={b}, t={t})"
    )


def _clip(raw: float, tail: float) -> DensityValue:
    if raw < 0.0:
        return DensityValue(0.0, tail + abs(raw))
    return DensityValue(raw, tail)


def spherical_density(p: JacobiParams, t: float, r0: float, r: float,
                      ctl: SeriesControl = SeriesControl()) -> DensityValue:
    """Transition density q_t^{alpha,beta}(r0, r) of the radial diffusion on [0, pi/2].

    Density with respect to Lebesgue measure in r.  Requires the trigonometric
    regime with alpha, beta >= 0 and t >= ctl.min_time.
    """
    if p.regime is not Regime.TRIGONOMETRIC:
        raise ValueError("spherical_density requires the trigonometric regime")
    if p.alpha < 0 or p.beta < 0:
        raise ValueError("spherical_density requires alpha, beta >= 0")
    if t < ctl.min_time:
        raise TimeTooSmallError(f"t={t} below minimum time {ctl.min_time}")
    if not (0.0 <= r0 <= math.pi / 2) or not (0.0 <= r <= math.pi / 2):
        raise ValueError("r0 and r must lie in [0, pi/2]")
    a, b = p.alpha, p.beta
    front = 2.0 * math.cos(r) ** (2 * b + 1) * math.sin(r) ** (2 * a + 1)
    s, tail = _sum_series(a, b, t, math.cos(2 * r0), math.cos(2 * r), ctl)
    return _clip(front * s, front * tail)


def stationary_spherical_density(p: JacobiParams, r) -> np.ndarray:
    """Large-time limit of the radial density: the normalized speed density.

    Equals 2 (cos r)^{2 beta + 1} (sin r)^{2 alpha + 1} / B(alpha+1, beta+1)
    (the degree-0 term of the spectral series).
    """
    if p.regime is not Regime.TRIGONOMETRIC:
        raise ValueError("requires the trigonometric regime")
    if p.alpha < 0 or p.beta < 0:
        raise ValueError("requires alpha, beta >= 0")
    a, b = p.alpha, p.beta
    c0 = math.exp(gammaln(a + b + 2.0) - gammaln(a + 1.0) - gammaln(b + 1.0))
    r = np.asarray(r, dtype=float)
    out = 2.0 * c0 * np.cos(r) ** (2 * b + 1) * np.sin(r) ** (2 * a + 1)
    return out if out.ndim else float(out)


def _fiber_m_sum(n: int, k: int, t: float, x: float,
                 ctl: SeriesControl) -> tuple[float, float]:
    """Inner m-series of the rescaled-sphere kernel at fiber frequency k >= 0.

    Sum_m (2m+k+n) binom(m+k+n-1, n-1) e^{-lam_{m,k} t / 2} P_m^{n-1,k}(x),
    with lam_{m,k} = 4m(m+k+n) + 2kn.  Returns (sum, tail bound) where the
    bound uses |P_m^{n-1,k}| <= max endpoint value.
    """
    a, b = float(n - 1), float(k)
    rec = _JacobiRecurrence(a, b, x)

    # binom(m+k+n-1, n-1) = Gamma(m+k+n)/(Gamma(m+k+1) Gamma(n))
    def log_coeff(m: int) -> float:
        return (math.log(2 * m + k + n)
                + gammaln(m + k + n) - gammaln(m + k + 1.0) - gammaln(float(n))
                - 0.5 * (4.0 * m * (m + k + n) + 2.0 * k * n) * t)

    def bound(m: int) -> float:
        return math.exp(log_coeff(m)) * _endpoint_bound(m, a, b)

    total = 0.0
    for m in range(ctl.max_terms + 1):
        total += math.exp(log_coeff(m)) * rec.next()
        b1 = bound(m + 1)
        b2 = bound(m + 2)
        if b1 <= 0.0:
            return total, 0.0
        ratio = b2 / b1
        if ratio < 1.0:
            tail = b1 / (1.0 - ratio)
            if tail <= ctl.tail_tol:
                return total, tail
    raise SeriesNotConvergedError(
        f"fiber m-series not converged (n={n}, k={k}, t={t})"
    )


def _fiber_m_bound(n: int, k: int, t: float, ctl: SeriesControl) -> float:
    """Upper bound on the absolute inner m-series at fiber frequency k."""
    a, b = float(n - 1), float(k)
    total = 0.0
    for m in range(ctl.max_terms + 1):
        lg = (math.log(2 * m + k + n)
              + gammaln(m + k + n) - gammaln(m + k + 1.0) - gammaln(float(n))
              - 0.5 * (4.0 * m * (m + k + n) + 2.0 * k * n) * t)
        b_m = math.exp(lg) * _endpoint_bound(m, a, b)
        total += b_m
        nxt = math.exp(
            math.log(2 * (m + 1) + k + n)
            + gammaln(m + 1 + k + n) - gammaln(m + 1 + k + 1.0) - gammaln(float(n))
            - 0.5 * (4.0 * (m + 1) * (m + 1 + k + n) + 2.0 * k * n) * t
        ) * _endpoint_bound(m + 1, a, b)
        if b_m > 0 and nxt / b_m < 0.5:
            return total + 2.0 * nxt
    return total


def berger_kernel(n: int, lam: float, t: float, r: float, theta: float,
                  ctl: SeriesControl = SeriesControl()) -> DensityValue:
    """Kernel at the pole of the radial(+fiber) diffusion on the rescaled sphere.

    Double series over fiber frequency k and radial degree m; the imaginary
    parts cancel by the k <-> -k pairing, so the sum is taken over cos(k theta)
    terms.  `lam` is the fiber stiffness parameter (> 0).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not (lam > 0):
        raise ValueError("lam must be positive")
    if t < ctl.min_time:
        raise TimeTooSmallError(f"t={t} below minimum time {ctl.min_time}")
    x = math.cos(2 * r)
    pref = math.gamma(n) / (2.0 * math.pi ** (n + 1))
    cosr = math.cos(r)

    total, tail = _fiber_m_sum(n, 0, t, x, ctl)
    for k in range(1, ctl.max_terms + 1):
        damp = math.exp(-0.5 * k * k * lam * lam * t)
        mbound = _fiber_m_bound(n, k, t, ctl)
        kbound = 2.0 * damp * abs(cosr) ** k * mbound
        if kbound <= ctl.tail_tol:
            # remaining k decay at least geometrically through the k^2 factor
            q = math.exp(-0.5 * (2 * k + 1) * lam * lam * t)
            tail += kbound + kbound * q / max(1.0 - q, 0.5)
            break
        msum, mtail = _fiber_m_sum(n, k, t, x, ctl)
        total += 2.0 * damp * math.cos(k * theta) * cosr ** k * msum
        tail += 2.0 * damp * mtail
    else:
        raise SeriesNotConvergedError(f"fiber k-series not converged (lam={lam}, t={t})")
    return _clip(pref * total, pref * tail)


def berger_limit_kernel(n: int, t: float, r: float,
                        ctl: SeriesControl = SeriesControl()) -> DensityValue:
    """Large-stiffness limit of `berger_kernel`: the k = 0 series alone.

    Equals the radial heat kernel at the pole of Brownian motion on the base
    space, in the fiber-averaged measure convention.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if t < ctl.min_time:
        raise TimeTooSmallError(f"t={t} below minimum time {ctl.min_time}")
    pref = math.gamma(n) / (2.0 * math.pi ** (n + 1))
    s, tail = _fiber_m_sum(n, 0, t, math.cos(2 * r), ctl)
    return _clip(pref * s, pref * tail)
