"""Bivariate standard normal CDF.

Vectorized port of Genz's BVNU (Drezner-Wesolowsky reduction to a single
integral, evaluated with Gauss-Legendre rules of 6, 12 or 20 points chosen by
|rho|). Absolute accuracy is about 1e-15 away from the degenerate limits.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

_TWOPI = 2.0 * math.pi
_SQRT_TWOPI = math.sqrt(_TWOPI)


def _half_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    half = x < 0
    return x[half], w[half]


_RULES = {n: _half_rule(n) for n in (6, 12, 20)}


def _upper_small(h, k, r, n):
    # |r| < 0.925: integrate over asin(r).
    x, w = _RULES[n]
    hk = h * k
    hs = (h * h + k * k) / 2.0
    asr = np.arcsin(r)
    total = np.zeros_like(h)
    for xi, wi in zip(x, w):
        for s in (1.0 - xi, 1.0 + xi):
            sn = np.sin(asr * s / 2.0)
            total += wi * np.exp((sn * hk - hs) / (1.0 - sn * sn))
    return total * asr / (2.0 * _TWOPI) + ndtr(-h) * ndtr(-k)


def _upper_large(h, k, r):
    # 0.925 <= |r| < 1.
    x, w = _RULES[20]
    neg = r < 0
    k = np.where(neg, -k, k)
    hk = h * k
    as_ = (1.0 - r) * (1.0 + r)
    a = np.sqrt(as_)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    bvn = a * np.exp(-(bs / as_ + hk) / 2.0) * (
        1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0
    )
    b = np.sqrt(bs)
    with np.errstate(over="ignore", invalid="ignore"):
        corr = np.exp(-hk / 2.0) * _SQRT_TWOPI * ndtr(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
    bvn = bvn - np.where(hk > -160.0, np.nan_to_num(corr), 0.0)
    a2 = a / 2.0
    for xi, wi in zip(x, w):
        for sgn in (-1.0, 1.0):
            xs = (a2 * (sgn * xi + 1.0)) ** 2
            rs = np.sqrt(1.0 - xs)
            asr = -(bs / xs + hk) / 2.0
            with np.errstate(over="ignore", invalid="ignore"):
                term = a2 * wi * np.exp(asr) * (
                    np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs))
                )
            bvn = bvn + np.where(asr > -100.0, np.nan_to_num(term), 0.0)
    bvn = -bvn / _TWOPI
    pos_part = bvn + ndtr(-np.maximum(h, k))
    neg_part = -bvn + np.where(
        k > h,
        np.where(h < 0, ndtr(k) - ndtr(h), ndtr(-h) - ndtr(-k)),
        0.0,
    )
    return np.where(neg, neg_part, pos_part)


def bvn_upper(h, k, r) -> np.ndarray:
    """Pr[X > h, Y > k] for standard normals with correlation ``r`` (finite h, k)."""
    h, k, r = np.broadcast_arrays(
        np.asarray(h, dtype=float), np.asarray(k, dtype=float), np.asarray(r, dtype=float)
    )
    out = np.empty(h.shape, dtype=float)
    ar = np.abs(r)
    groups = [
        (ar < 0.3, 6),
        ((ar >= 0.3) & (ar < 0.75), 12),
        ((ar >= 0.75) & (ar < 0.925), 20),
    ]
    for mask, n in groups:
        if mask.any():
            out[mask] = _upper_small(h[mask], k[mask], r[mask], n)
    mask = (ar >= 0.925) & (ar < 1.0)
    if mask.any():
        out[mask] = _upper_large(h[mask], k[mask], r[mask])
    mask = r >= 1.0
    if mask.any():
        out[mask] = ndtr(-np.maximum(h[mask], k[mask]))
    mask = r <= -1.0
    if mask.any():
        out[mask] = np.maximum(0.0, ndtr(-h[mask]) + ndtr(-k[mask]) - 1.0)
    return out


def bvn_cdf(h, v, rho):
    """Pr[X <= h, Y <= v] for a standard bivariate normal with correlation ``rho``.

    Accepts scalars or broadcastable arrays; infinite limits are allowed.
    Returns a float for scalar input.
    """
    h_arr, v_arr, r_arr = np.broadcast_arrays(
        np.asarray(h, dtype=float), np.asarray(v, dtype=float), np.asarray(rho, dtype=float)
    )
    if np.any(np.abs(r_arr) > 1.0 + 1e-12):
        raise ValueError("correlation must lie in [-1, 1]")
    r_arr = np.clip(r_arr, -1.0, 1.0)
    out = np.zeros(h_arr.shape, dtype=float)
    lo = np.isneginf(h_arr) | np.isneginf(v_arr)
    h_inf = np.isposinf(h_arr) & ~lo
    v_inf = np.isposinf(v_arr) & ~lo & ~h_inf
    finite = ~(lo | h_inf | v_inf)
    out[h_inf] = ndtr(v_arr[h_inf])
    out[v_inf] = ndtr(h_arr[v_inf])
    if finite.any():
        out[finite] = bvn_upper(-h_arr[finite], -v_arr[finite], r_arr[finite])
    out = np.clip(out, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out
