"""Numeric inner loops with two interchangeable backends.

Each kernel exists as an explicit loop (compiled with ``numba.njit`` when
available) and as a vectorised numpy expression. The loop versions are the
default; set ``DIWBENCH_NUMBA=0`` to force the numpy path, e.g. on platforms
without numba. Both paths are exercised by the test-suite and compared in
``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - depends on the environment
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("DIWBENCH_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}
BACKEND = "numba" if USE_NUMBA else "numpy"

_BOUNDS_TOL = 1e-9


# ---------------------------------------------------------------------------
# loop kernels (numba-compiled when enabled)
# ---------------------------------------------------------------------------

def _trapezoid_loop(x, y):
    total = 0.0
    for i in range(1, x.shape[0]):
        total += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1])
    return total


def _linear_fit_loop(x, y):
    n = x.shape[0]
    mx = 0.0
    my = 0.0
    for i in range(n):
        mx += x[i]
        my += y[i]
    mx /= n
    my /= n
    sxx = 0.0
    sxy = 0.0
    syy = 0.0
    for i in range(n):
        dx = x[i] - mx
        dy = y[i] - my
        sxx += dx * dx
        sxy += dx * dy
        syy += dy * dy
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = 0.0
    for i in range(n):
        r = y[i] - (intercept + slope * x[i])
        ss_res += r * r
    return slope, intercept, ss_res, syy


def _group_means_loop(codes, values, n_groups):
    # shifted accumulation: identical samples give back their exact value
    first = np.full(n_groups, np.nan)
    seen = np.zeros(n_groups, dtype=np.bool_)
    acc = np.zeros(n_groups)
    counts = np.zeros(n_groups, dtype=np.int64)
    for i in range(codes.shape[0]):
        g = codes[i]
        if not seen[g]:
            seen[g] = True
            first[g] = values[i]
        acc[g] += values[i] - first[g]
        counts[g] += 1
    out = np.full(n_groups, np.nan)
    for g in range(n_groups):
        if counts[g] > 0:
            out[g] = first[g] + acc[g] / counts[g]
    return out, counts


def _segment_kinematics_loop(start, end, de, feed, lo, hi):
    n = start.shape[0]
    xy_len = np.zeros(n)
    path_len = np.zeros(n)
    duration = np.zeros(n)
    out_of_bounds = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        dx = end[i, 0] - start[i, 0]
        dy = end[i, 1] - start[i, 1]
        dz = end[i, 2] - start[i, 2]
        xy = np.sqrt(dx * dx + dy * dy)
        p = np.sqrt(dx * dx + dy * dy + dz * dz)
        if p == 0.0:
            p = abs(de[i])
        xy_len[i] = xy
        path_len[i] = p
        if feed[i] > 0.0:
            duration[i] = p * 60.0 / feed[i]
        for k in range(3):
            if end[i, k] < lo[k] - _BOUNDS_TOL or end[i, k] > hi[k] + _BOUNDS_TOL:
                out_of_bounds[i] = True
    return xy_len, path_len, duration, out_of_bounds


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------

def _trapezoid_np(x, y):
    return float(0.5 * np.sum(np.diff(x) * (y[1:] + y[:-1])))


def _linear_fit_np(x, y):
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    slope = float(dx @ dy) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    return slope, intercept, float(resid @ resid), float(dy @ dy)


def _group_means_np(codes, values, n_groups):
    counts = np.bincount(codes, minlength=n_groups).astype(np.int64)
    present, first_idx = np.unique(codes, return_index=True)
    first = np.full(n_groups, np.nan)
    first[present] = values[first_idx]
    acc = np.bincount(codes, weights=values - first[codes], minlength=n_groups)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(counts > 0, first + acc / np.maximum(counts, 1), np.nan)
    return out, counts


def _segment_kinematics_np(start, end, de, feed, lo, hi):
    d = end - start
    xy_len = np.hypot(d[:, 0], d[:, 1])
    path_len = np.sqrt(np.einsum("ij,ij->i", d, d))
    path_len = np.where(path_len == 0.0, np.abs(de), path_len)
    with np.errstate(divide="ignore", invalid="ignore"):
        duration = np.where(feed > 0.0, path_len * 60.0 / np.where(feed > 0.0, feed, 1.0), 0.0)
    out_of_bounds = np.any((end < lo - _BOUNDS_TOL) | (end > hi + _BOUNDS_TOL), axis=1)
    return xy_len, path_len, duration, out_of_bounds


if USE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    _trapezoid_impl = _jit(_trapezoid_loop)
    _linear_fit_impl = _jit(_linear_fit_loop)
    _group_means_impl = _jit(_group_means_loop)
    _segment_kinematics_impl = _jit(_segment_kinematics_loop)
else:
    _trapezoid_impl = _trapezoid_np
    _linear_fit_impl = _linear_fit_np
    _group_means_impl = _group_means_np
    _segment_kinematics_impl = _segment_kinematics_np

NUMPY_KERNELS = {
    "trapezoid": _trapezoid_np,
    "linear_fit": _linear_fit_np,
    "group_means": _group_means_np,
    "segment_kinematics": _segment_kinematics_np,
}
ACTIVE_KERNELS = {
    "trapezoid": _trapezoid_impl,
    "linear_fit": _linear_fit_impl,
    "group_means": _group_means_impl,
    "segment_kinematics": _segment_kinematics_impl,
}


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


# ---------------------------------------------------------------------------
# public wrappers
# ---------------------------------------------------------------------------

def trapezoid(x, y) -> float:
    """Trapezoidal area under ``y(x)``; ``x`` must be sorted."""
    x = _f64(x)
    y = _f64(y)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same shape")
    if x.shape[0] < 2:
        return 0.0
    return float(_trapezoid_impl(x, y))


def linear_fit(x, y) -> tuple[float, float, float]:
    """Ordinary least squares line through ``(x, y)``.

    Returns ``(slope, intercept, r_squared)``. Raises ``ZeroDivisionError``
    style ``ValueError`` when all ``x`` coincide.
    """
    x = _f64(x)
    y = _f64(y)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.shape[0] < 2 or np.ptp(x) == 0.0:
        raise ValueError("need at least two distinct x values")
    slope, intercept, ss_res, ss_tot = _linear_fit_impl(x, y)
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return float(slope), float(intercept), float(r2)


def group_means(codes, values, n_groups: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-group means of ``values`` keyed by integer ``codes`` in ``[0, n_groups)``."""
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    values = _f64(values)
    if codes.size and (codes.min() < 0 or codes.max() >= n_groups):
        raise ValueError("group code out of range")
    return _group_means_impl(codes, values, int(n_groups))


def segment_kinematics(start, end, de, feed, lo, hi):
    """Lengths, durations and envelope flags for a batch of linear moves.

    ``start``/``end`` are ``(n, 3)`` positions in mm, ``de`` the extruder
    delta and ``feed`` the feed rate in mm/min of each move. Moves without
    spatial displacement are timed by their extruder travel.
    """
    start = _f64(start).reshape(-1, 3)
    end = _f64(end).reshape(-1, 3)
    return _segment_kinematics_impl(start, end, _f64(de), _f64(feed), _f64(lo), _f64(hi))
