"""Quadrature evaluators for the joint radial/area densities on the hyperbolic side.

Evaluates the n=1 and n>=2 oscillatory-integral formulas for the joint density
p_t(r, theta) of the radial coordinate and stochastic area, and the closed-form
loop-area density at r=0 for n=1.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad


class QuadratureFailureError(RuntimeError):
    """Raised when the quadrature cannot meet its error target."""


class WindowExhaustedError(QuadratureFailureError):
    """Raised when the truncation window hits its cap with too large a tail."""


@dataclass(frozen=True)
class QuadratureControl:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_window: float = 60.0
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_window < 1:
            raise ValueError("max_window must be >= 1")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class JointDensityValue:
    """Quadrature value of a joint density with an error estimate."""

    value: float
    est_error: float


_ACOSH_EPS = 1e-12


def _ch1_amplitude(r: float, y) -> np.ndarray:
    """arcosh(cosh r cosh y) / sqrt(cosh^2 r cosh^2 y - 1), limit 1 at the origin."""
    c = np.cosh(r) * np.cosh(y)
    c2m1 = c * c - 1.0
    out = np.where(
        c2m1 < _ACOSH_EPS,
        1.0,
        np.arccosh(np.maximum(c, 1.0)) / np.sqrt(np.maximum(c2m1, _ACOSH_EPS)),
    )
    return out


def _ch1_integrand(y, t: float, r: float, theta: float):
    """Real and imaginary parts of the n=1 y-integrand.

    The complex factor e^{(y - i theta)^2 / 2t} splits into
    e^{(y^2 - theta^2)/2t} (cos(y theta / t) - i sin(y theta / t)).
    """
    a = np.arccosh(np.maximum(np.cosh(r) * np.cosh(y), 1.0))
    mag = np.exp(-(a * a - y * y + theta * theta) / (2.0 * t)) * _ch1_amplitude(r, y)
    phase = y * theta / t
    return mag * np.cos(phase), -mag * np.sin(phase)


def _ch1_tail_bound(W: float, t: float, r: float, theta: float) -> float:
    """Bound on the two y-tails beyond [-W, W] of the n=1 integrand.

    Beyond W >= 2: arcosh(cosh r cosh y)^2 - y^2 is nondecreasing, and the
    amplitude is below (y + c) e^{-y} * 2.2 / cosh r, giving an explicit
    exponential-integral bound.
    """
    a = math.acosh(math.cosh(r) * math.cosh(W))
    gauss = math.exp(-(a * a - W * W + theta * theta) / (2.0 * t))
    c = abs(math.log(math.cosh(r))) + 1.0
    return 2.0 * gauss * 2.2 * (W + c + 1.0) * math.exp(-W) / math.cosh(r)


def ch1_joint_density(t: float, r: float, theta: float,
                      ctl: QuadratureControl = QuadratureControl()) -> JointDensityValue:
    """Oscillatory-integral kernel p_t(r, theta) for the n=1 hyperbolic model.

    The joint law of the radial coordinate and area at time t has density
    pi * p_t(r, theta) * sinh(2r) with respect to dr dtheta.  The imaginary
    residue of the quadrature is asserted to vanish within abs_tol.
    """
    if not (t > 0):
        raise ValueError("t must be positive")
    if r < 0:
        raise ValueError("r must be nonnegative")
    # The oscillatory y-integral cancels down to a value roughly
    # e^{-2 pi |theta| / t} times the central integrand scale, so the tail is
    # truncated relative to that scale rather than in absolute terms.
    scale = math.exp(-theta * theta / (2.0 * t))
    target = max(ctl.abs_tol / 10.0, 1e-17 * scale)
    W = max(4.0, 4.0 * math.sqrt(t))
    while _ch1_tail_bound(W, t, r, theta) > target:
        W *= 2.0
        if W > ctl.max_window:
            if _ch1_tail_bound(ctl.max_window, t, r, theta) > ctl.abs_tol / 10.0:
                raise WindowExhaustedError(
                    f"tail bound above {ctl.abs_tol} at window cap {ctl.max_window}"
                )
            W = ctl.max_window
            break
    epsabs = max(1e-300, 1e-14 * scale)
    with warnings.catch_warnings():
        # roundoff warnings are expected near machine precision; the final
        # error check below is authoritative
        warnings.simplefilter("ignore", IntegrationWarning)
        re, re_err = quad(lambda y: _ch1_integrand(y, t, r, theta)[0], -W, W,
                          epsabs=epsabs, epsrel=ctl.rel_tol,
                          limit=ctl.max_subdivisions)
        im, _ = quad(lambda y: _ch1_integrand(y, t, r, theta)[1], -W, W,
                     epsabs=epsabs, epsrel=ctl.rel_tol,
                     limit=ctl.max_subdivisions)
    pref = math.exp(-t / 2.0) / (2.0 * math.pi * t) ** 2
    if abs(pref * im) > max(ctl.abs_tol, 10.0 * ctl.rel_tol * abs(pref * re)):
        raise QuadratureFailureError(
            f"imaginary residue {pref * im} above tolerance"
        )
    err = pref * (re_err + _ch1_tail_bound(W, t, r, theta))
    val = pref * re
    if err > max(ctl.abs_tol, ctl.rel_tol * abs(val), 10.0 * epsabs * pref):
        raise QuadratureFailureError(f"error estimate {err} above target")
    return JointDensityValue(val, err)


def _gauss_panels(lo: float, hi: float, n_panels: int, order: int = 16):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _chn_segment(n: int, t: float, r: float, theta: float,
                 y_lo: float, y_hi: float, panels_per_unit: float):
    """Fixed-node double quadrature of the n>=2 integrand over [y_lo, y_hi] x [0, U].

    Returns (real part, imag part) of the double integral, without prefactor.
    """
    y_edge = max(abs(y_lo), abs(y_hi))
    U = math.acosh(math.cosh(r) * math.cosh(y_edge)) + t + 12.0 * math.sqrt(t) + 4.0
    ny = max(4, int(round((y_hi - y_lo) * panels_per_unit)))
    nu = max(8, int(round(U * panels_per_unit)))
    y, wy = _gauss_panels(y_lo, y_hi, ny)
    u, wu = _gauss_panels(0.0, U, nu)

    # inner u-integral, vectorized over (y, u) in y-chunks to bound memory
    coshy = np.cosh(r) * np.cosh(y)
    inner_num = (np.exp(-u * u / (2.0 * t)) * np.sinh(u)
                 * np.sin(math.pi * u / t) * wu)
    coshu = np.cosh(u)
    inner = np.empty_like(coshy)
    chunk = max(1, int(4e6 // max(coshu.size, 1)))
    for i in range(0, coshy.size, chunk):
        denom = (coshu[None, :] + coshy[i:i + chunk, None]) ** (n + 1)
        inner[i:i + chunk] = (inner_num[None, :] / denom).sum(axis=1)

    mag = np.exp((y * y - theta * theta) / (2.0 * t)) * inner * wy
    re = float((mag * np.cos(y * theta / t)).sum())
    im = float(-(mag * np.sin(y * theta / t)).sum())
    return re, im


def chn_joint_density(n: int, t: float, r: float, theta: float,
                      ctl: QuadratureControl = QuadratureControl()) -> JointDensityValue:
    """Oscillatory-integral kernel p_t(r, theta) for the n >= 2 hyperbolic model.

    The joint law of (radial coordinate, area) has density
    (2 pi^n / Gamma(n)) * p_t(r, theta) * (sinh r)^{2n-1} cosh r per dr dtheta.

    The inner oscillatory u-integral cancels to all orders in 1/cosh(y), so
    the outer integrand decays at least like e^{-n |y|} while its raw
    magnitude grows like e^{y^2/2t}; the window therefore expands in shells
    and stops either at convergence or at the double-precision noise floor
    (whichever comes first), with the noise onset folded into est_error.
    """
    if n < 2:
        raise ValueError("n must be >= 2 (use ch1_joint_density for n = 1)")
    if not (t > 0):
        raise ValueError("t must be positive")
    if r < 0:
        raise ValueError("r must be nonnegative")
    pref = (2.0 * math.gamma(n + 1.0)
            * math.exp(-n * n * t / 2.0 + math.pi ** 2 / (2.0 * t))
            / ((2.0 * math.pi) ** (n + 2) * t))

    def total_at(density: float):
        w0 = max(4.0, 2.0 * math.sqrt(t))
        re, im = _chn_segment(n, t, r, theta, -w0, w0, density)
        w, prev_shell, tail_err = w0, math.inf, 0.0
        while w < ctl.max_window:
            sr_hi, si_hi = _chn_segment(n, t, r, theta, w, w + 2.0, density)
            sr_lo, si_lo = _chn_segment(n, t, r, theta, -w - 2.0, -w, density)
            shell = abs(sr_hi + sr_lo) + abs(si_hi + si_lo)
            if shell >= prev_shell and w > w0 + 2.0:
                # round-off noise has taken over; the true tail is no larger
                # than the last clean (still decaying) shell
                tail_err = prev_shell
                break
            re += sr_hi + sr_lo
            im += si_hi + si_lo
            w += 2.0
            if shell <= ctl.rel_tol * abs(re) / 10.0 + ctl.abs_tol / (10.0 * pref):
                tail_err = shell
                break
            prev_shell = shell
        return re, im, tail_err

    density = 3.0
    re, im, tail = total_at(density)
    err = math.inf
    prev_dif = math.inf
    for _ in range(5):
        re2, im2, tail2 = total_at(2.0 * density)
        dif = abs(re2 - re)
        err = pref * (dif + tail2)
        re, im, tail, density = re2, im2, tail2, 2.0 * density
        if err <= max(ctl.abs_tol, ctl.rel_tol * abs(pref * re)):
            break
        if dif >= 0.5 * prev_dif:
            # node doubling has stopped improving: the cancellation noise
            # floor of the oscillatory sum is reached; err records it
            break
        prev_dif = dif
    if err > 0.01 * abs(pref * re):
        raise QuadratureFailureError(
            f"no significant digits at the noise floor (err={err})")
    if abs(pref * im) > max(ctl.abs_tol, 10.0 * ctl.rel_tol * abs(pref * re)):
        raise QuadratureFailureError(f"imaginary residue {pref * im} above tolerance")
    return JointDensityValue(pref * re, err)


_loop_norm_cache: dict[float, float] = {}
_loop_norm_lock = threading.Lock()


def _loop_norm(t: float) -> float:
    with _loop_norm_lock:
        cached = _loop_norm_cache.get(t)
    if cached is not None:
        return cached
    def integrand(th: float) -> float:
        x = abs(math.pi * th / (2.0 * t))
        # 1/cosh^2 x = 4 e^{-2x} / (1 + e^{-2x})^2, overflow-safe
        e = math.exp(-2.0 * x)
        return math.exp(-th * th / (2.0 * t)) * 4.0 * e / (1.0 + e) ** 2

    val, _ = quad(integrand, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    if not (val > 0):
        raise QuadratureFailureError("normalization constant quadrature failed")
    with _loop_norm_lock:
        _loop_norm_cache[t] = val
    return val


def ch1_loop_slice(t: float, theta) -> np.ndarray:
    """Unnormalized r=0 slice of the n=1 kernel, in closed form.

    Equals ch1_joint_density(t, 0, theta):
    e^{-t/2}/(8 t^2) * e^{-theta^2/2t} / cosh^2(pi theta / 2t).
    This is the Fourier transform of y/sinh(y) applied to the y-integral at
    r=0, matching the planar bridge-area density shape 1/cosh^2(pi s / 2t).
    """
    theta = np.asarray(theta, dtype=float)
    out = (math.exp(-t / 2.0) / (8.0 * t * t)
           * np.exp(-theta * theta / (2.0 * t))
           / np.cosh(np.pi * theta / (2.0 * t)) ** 2)
    return out if out.ndim else float(out)


def ch1_loop_area_density(t: float, theta, ctl: QuadratureControl = QuadratureControl()):
    """Density of the loop (r(t)=0 bridge) area for the n=1 hyperbolic model.

    (1/C(t)) e^{-theta^2/2t} / cosh^2(pi theta / 2t), with C(t) computed once
    per t by quadrature and cached per distinct t.
    """
    if not (t > 0):
        raise ValueError("t must be positive")
    c = _loop_norm(t)
    theta = np.asarray(theta, dtype=float)
    out = (np.exp(-theta * theta / (2.0 * t))
           / np.cosh(np.pi * theta / (2.0 * t)) ** 2 / c)
    return out if out.ndim else float(out)
