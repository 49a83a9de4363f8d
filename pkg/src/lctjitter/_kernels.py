"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``LCTJITTER_DISABLE_NUMBA=1`` to force the numpy implementations (useful
on platforms without numba, and for cross-checking the two paths).
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("LCTJITTER_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLE:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

USE_NUMBA = njit is not None

# elements per dense block in the numpy fallbacks
_BLOCK = 1 << 20


# ---------------------------------------------------------------------------
# direct Fourier sum:  out[m] = sum_k g[k] * exp(-1j * freqs[m] * nodes[k])
# ---------------------------------------------------------------------------

def fourier_sum_numpy(nodes, g, freqs):
    nodes = np.asarray(nodes, dtype=np.float64)
    g = np.asarray(g, dtype=np.complex128)
    freqs = np.asarray(freqs, dtype=np.float64)
    out = np.empty(freqs.shape[0], dtype=np.complex128)
    rows = max(1, _BLOCK // max(1, nodes.shape[0]))
    for start in range(0, freqs.shape[0], rows):
        f = freqs[start:start + rows]
        out[start:start + rows] = np.exp(-1j * np.outer(f, nodes)) @ g
    return out


def _fourier_sum_loop(nodes, g, freqs):
    out = np.empty(freqs.shape[0], dtype=np.complex128)
    for m in range(freqs.shape[0]):
        f = freqs[m]
        acc_re = 0.0
        acc_im = 0.0
        for k in range(nodes.shape[0]):
            ph = -f * nodes[k]
            c = math.cos(ph)
            s = math.sin(ph)
            gr = g[k].real
            gi = g[k].imag
            acc_re += gr * c - gi * s
            acc_im += gr * s + gi * c
        out[m] = complex(acc_re, acc_im)
    return out


# ---------------------------------------------------------------------------
# truncated sinc synthesis:
#   out[i] = sum_{n : |t[i]-c[n]| <= radius} w[n] * sinc((t[i]-c[n]) / scale)
# with sinc(x) = sin(pi x)/(pi x) and centers c sorted ascending.
#
# Far from the diagonal the numerator is expanded by angle addition,
#   sin(p(t - c)) = sin(pt) cos(pc) - cos(pt) sin(pc),   p = pi / scale,
# so each pair costs one division instead of a sine.  Pairs with
# |p(t - c)| < _NEAR use the direct form to avoid cancellation.
# ---------------------------------------------------------------------------

_NEAR = 16.0


def sinc_sum_numpy(t_out, centers, weights, scale, radius):
    t_out = np.asarray(t_out, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.complex128)
    out = np.zeros(t_out.shape[0], dtype=np.complex128)
    if t_out.size == 0 or centers.size == 0:
        return out
    order = None
    if np.any(np.diff(t_out) < 0):
        order = np.argsort(t_out, kind="stable")
        t_out = t_out[order]
    p = math.pi / scale
    sc, cc = np.sin(p * centers), np.cos(p * centers)
    st, ct = np.sin(p * t_out), np.cos(p * t_out)
    lo = np.searchsorted(centers, t_out - radius, side="left")
    hi = np.searchsorted(centers, t_out + radius, side="right")
    i = 0
    n_out = t_out.shape[0]
    while i < n_out:
        # grow a block of output rows whose joint center window stays small
        j = i + 1
        while j < n_out and (j - i + 1) * (hi[j] - lo[i]) <= _BLOCK:
            j += 1
        c0, c1 = lo[i], hi[j - 1]
        if c1 > c0:
            x = p * (t_out[i:j, None] - centers[None, c0:c1])
            near = np.abs(x) < _NEAR
            with np.errstate(divide="ignore", invalid="ignore"):
                far = (st[i:j, None] * cc[None, c0:c1] - ct[i:j, None] * sc[None, c0:c1]) / x
            kern = np.where(near, np.sinc(x / math.pi), far)
            kern[np.abs(x) > p * radius] = 0.0
            out[i:j] = kern @ weights[c0:c1]
        i = j
    if order is not None:
        unsorted = np.empty_like(out)
        unsorted[order] = out
        out = unsorted
    return out


def _far_sums(t, centers, coef, p, k0, k1):
    # sum over k0 <= k < k1 of coef[:, k] / x with x = p (t - c[k])
    a_re = 0.0
    a_im = 0.0
    b_re = 0.0
    b_im = 0.0
    for k in range(k0, k1):
        r = 1.0 / (p * (t - centers[k]))
        a_re += coef[0, k] * r
        a_im += coef[1, k] * r
        b_re += coef[2, k] * r
        b_im += coef[3, k] * r
    return a_re, a_im, b_re, b_im


def _accumulate(row, parts):
    row[0] += parts[0]
    row[1] += parts[1]
    row[2] += parts[2]
    row[3] += parts[3]


# centers per cache block in the compiled loop
_CHUNK = 4096


def _sinc_sum_loop(t_out, centers, weights, scale, radius):
    n_out = t_out.shape[0]
    n_c = centers.shape[0]
    out = np.zeros(n_out, dtype=np.complex128)
    p = math.pi / scale
    near_r = _NEAR / p
    # rows: Re/Im of w cos(pc), Re/Im of w sin(pc)
    coef = np.empty((4, n_c))
    for k in range(n_c):
        cs = math.cos(p * centers[k])
        sn = math.sin(p * centers[k])
        coef[0, k] = weights[k].real * cs
        coef[1, k] = weights[k].imag * cs
        coef[2, k] = weights[k].real * sn
        coef[3, k] = weights[k].imag * sn
    k0 = np.searchsorted(centers, t_out - radius, side="left")
    n0 = np.searchsorted(centers, t_out - near_r, side="right")
    n1 = np.searchsorted(centers, t_out + near_r, side="left")
    k1 = np.searchsorted(centers, t_out + radius, side="right")
    for i in range(n_out):
        n0[i] = max(n0[i], k0[i])
        n1[i] = min(max(n1[i], n0[i]), k1[i])
        t = t_out[i]
        acc = 0.0 + 0.0j
        for k in range(n0[i], n1[i]):
            x = p * (t - centers[k])
            acc += weights[k] * (1.0 if x == 0.0 else math.sin(x) / x)
        out[i] = acc
    # far field, blocked over centers so each block stays in cache
    sums = np.zeros((n_out, 4))
    for cs in range(0, n_c, _CHUNK):
        ce = min(cs + _CHUNK, n_c)
        for i in range(n_out):
            t = t_out[i]
            lo = max(k0[i], cs)
            hi = min(n0[i], ce)
            if hi > lo:
                _accumulate(sums[i], _far_sums(t, centers, coef, p, lo, hi))
            lo = max(n1[i], cs)
            hi = min(k1[i], ce)
            if hi > lo:
                _accumulate(sums[i], _far_sums(t, centers, coef, p, lo, hi))
    for i in range(n_out):
        st = math.sin(p * t_out[i])
        ct = math.cos(p * t_out[i])
        out[i] += complex(st * sums[i, 0] - ct * sums[i, 2], st * sums[i, 1] - ct * sums[i, 3])
    return out


if USE_NUMBA:
    _fourier_sum_jit = njit(cache=True, nogil=True)(_fourier_sum_loop)
    _far_sums = njit(cache=True, nogil=True, fastmath=True, error_model="numpy")(_far_sums)
    _accumulate = njit(cache=True, nogil=True)(_accumulate)
    _sinc_sum_jit = njit(cache=True, nogil=True)(_sinc_sum_loop)

    def fourier_sum_numba(nodes, g, freqs):
        return _fourier_sum_jit(
            np.ascontiguousarray(nodes, dtype=np.float64),
            np.ascontiguousarray(g, dtype=np.complex128),
            np.ascontiguousarray(freqs, dtype=np.float64),
        )

    def sinc_sum_numba(t_out, centers, weights, scale, radius):
        return _sinc_sum_jit(
            np.ascontiguousarray(t_out, dtype=np.float64),
            np.ascontiguousarray(centers, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.complex128),
            float(scale),
            float(radius),
        )

    fourier_sum = fourier_sum_numba
    sinc_sum = sinc_sum_numba
else:  # pragma: no cover
    fourier_sum_numba = None
    sinc_sum_numba = None
    fourier_sum = fourier_sum_numpy
    sinc_sum = sinc_sum_numpy
