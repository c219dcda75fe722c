"""Bessel functions of nonnegative real order and spherical Fourier transforms.

Small arguments use the ascending power series.  Beyond the switch point
``t* = max(12, 2s)`` the fractional part of the order is evaluated with
Hankel's asymptotic expansion and the integer part is reached by forward
recurrence, which is stable there because the order stays below ``t``.

All functions accept scalars or arrays for the argument and return an array
of matching shape (a Python float for scalar input).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "bessel_j",
    "scaled_bessel",
    "normalized_sphere_ft",
    "switch_point",
    "bessel_j_series",
    "bessel_j_large",
]

_SERIES_MAX_TERMS = 400
_HANKEL_MAX_TERMS = 60


def switch_point(order: float) -> float:
    """Argument above which the large-argument method is used."""
    return max(12.0, 2.0 * order)


def _check_order(order):
    order = float(order)
    if not math.isfinite(order) or order < 0:
        raise ValueError(f"Bessel order must be finite and >= 0, got {order}")
    return order


def _check_argument(t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("Bessel argument must be finite")
    if np.any(t < 0):
        raise ValueError("Bessel argument must be nonnegative")
    return t


def _series_terms(order, q_max):
    """Number of series terms after which ``|c_k| q^k`` is negligible for q <= q_max."""
    c = 1.0
    k = 0
    while k < _SERIES_MAX_TERMS:
        k += 1
        c *= q_max / (k * (k + order))
        if k > q_max and c <= 1e-17:
            break
    return k


# bins of q = t^2/4 evaluated with their own truncation length
_Q_EDGES = (0.25, 1.0, 4.0, 9.0, 16.0, 25.0, 36.0, np.inf)


def _scaled_series(order, t):
    # sum_k (-1)^k (t/2)^(2k) / (2^s k! Gamma(k+s+1))  ==  t^-s J_s(t),
    # summed by Horner's rule in -q = -(t/2)^2
    q = 0.25 * t * t
    c0 = 1.0 / (2.0 ** order * math.gamma(order + 1.0))
    out = np.empty_like(t)
    lo = -1.0
    for hi in _Q_EDGES:
        sel = (q > lo) & (q <= hi)
        lo = hi
        if not sel.any():
            continue
        qs = -q[sel]
        n_terms = _series_terms(order, float(np.max(-qs)))
        # nested form: c0 (1 + x/(1(1+s)) (1 + x/(2(2+s)) (1 + ...)))
        acc = np.ones_like(qs)
        for k in range(n_terms, 0, -1):
            acc = 1.0 + acc * qs / (k * (k + order))
        out[sel] = c0 * acc
    return out


def _hankel_coefficients(nu, t_min):
    """Hankel coefficients up to the smallest term at ``t = t_min``.

    For larger arguments the terms are still decreasing at that index, so one
    truncation serves the whole batch.
    """
    mu = 4.0 * nu * nu
    coefs = []
    coef = 1.0
    prev = math.inf
    for k in range(1, _HANKEL_MAX_TERMS):
        coef *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        mag = abs(coef) / t_min**k
        if coef == 0.0 or mag >= prev:
            break
        coefs.append(coef)
        prev = mag
        if mag < 1e-17:
            break
    return coefs


def _hankel_pq(nu, t):
    """Hankel's P and Q for J_nu, truncated at the smallest term."""
    coefs = _hankel_coefficients(nu, float(np.min(t)))
    inv_t = 1.0 / t
    p = np.ones_like(t)
    q = np.zeros_like(t)
    power = np.ones_like(t)
    for k, coef in enumerate(coefs, start=1):
        power = power * inv_t
        term = (-coef if (k // 2) % 2 else coef) * power
        if k % 2 == 0:
            p += term
        else:
            q += term
    return p, q


def _hankel_j(nu, t):
    p, q = _hankel_pq(nu, t)
    chi = t - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * t)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j_series(order, t):
    """J_s(t) from the ascending series (accurate for moderate ``t``)."""
    order = _check_order(order)
    t = _check_argument(t)
    out = _scaled_series(order, t)
    if order > 0:
        out = out * t ** order
    return out


def bessel_j_large(order, t):
    """J_s(t) by Hankel expansion plus forward recurrence; needs t well above s."""
    order = _check_order(order)
    t = _check_argument(t)
    if np.any(t <= 0):
        raise ValueError("large-argument method needs t > 0")
    n = int(math.floor(order))
    nu = order - n
    j0 = _hankel_j(nu, t)
    if n == 0:
        return j0
    j1 = _hankel_j(nu + 1.0, t)
    for m in range(1, n):
        j0, j1 = j1, (2.0 * (nu + m) / t) * j1 - j0
    return j1


def _unwrap(x, scalar):
    return float(x) if scalar else x


def bessel_j(order, t):
    """Bessel function of the first kind J_s(t) for s >= 0 and t >= 0.

    Parameters
    ----------
    order : float
        Nonnegative real order ``s``.
    t : float or array_like
        Nonnegative argument.

    Raises
    ------
    ValueError
        For negative or non-finite inputs.
    """
    order = _check_order(order)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(_check_argument(t))
    out = np.empty_like(t)
    small = t <= switch_point(order)
    if small.any():
        ts = t[small]
        vals = _scaled_series(order, ts)
        out[small] = vals * ts ** order if order > 0 else vals
    if (~small).any():
        out[~small] = bessel_j_large(order, t[~small])
    return _unwrap(out[0] if scalar else out, scalar)


def scaled_bessel(order, t):
    """t^{-s} J_s(t), continuous at t = 0 where it equals 1/(2^s Gamma(s+1))."""
    order = _check_order(order)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(_check_argument(t))
    out = np.empty_like(t)
    small = t <= switch_point(order)
    if small.any():
        out[small] = _scaled_series(order, t[small])
    if (~small).any():
        tl = t[~small]
        out[~small] = bessel_j_large(order, tl) / tl ** order
    return _unwrap(out[0] if scalar else out, scalar)


def normalized_sphere_ft(n, a):
    """Average of exp(-2 pi i a theta.e) over theta on the unit sphere S^n.

    ``S^n`` sits in R^{n+1}; the value is ``2^nu Gamma(nu+1) (2 pi a)^{-nu}
    J_nu(2 pi a)`` with ``nu = (n-1)/2``.  Depends only on ``|a|`` and equals 1
    at ``a = 0``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"sphere dimension must be an integer >= 1, got {n}")
    nu = 0.5 * (int(n) - 1)
    scalar = np.ndim(a) == 0
    x = 2.0 * math.pi * np.abs(np.asarray(a, dtype=float))
    out = (2.0 ** nu * math.gamma(nu + 1.0)) * np.atleast_1d(scaled_bessel(nu, x))
    out[np.atleast_1d(x) == 0] = 1.0  # avoid rounding in the product of the two constants
    return _unwrap(out[0] if scalar else out.reshape(np.shape(a)), scalar)
