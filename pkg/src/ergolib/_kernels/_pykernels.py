"""NumPy implementation of the time-grid kernels (fallback for the compiled module)."""

import math

import numpy as np

LOG_CAP = math.log(1e300)
_SERIES_TERMS = 96


def series_radius(k):
    """|lambda t| below which the Taylor series replaces the recursion for term k."""
    return 2.0 + 0.5 * k


def _log_bound(lam, k, times, logt, coef_max):
    with np.errstate(invalid="ignore"):
        return times * lam.real + k * logt - math.lgamma(k + 1) + math.log(coef_max)


def _log_times(times):
    with np.errstate(divide="ignore"):
        return np.log(times)


def trajectory_grid(lams, orbits, orders, times):
    """``y(t) = sum_j e^{t lam_j} sum_{k<k_j} t^k/k! orbits[j, k]`` on every grid time.

    Returns ``(Y, overflow)``; rows whose magnitude would exceed 1e300 are set
    to ``inf`` and flagged.
    """
    times = np.asarray(times, dtype=float)
    n = orbits.shape[2]
    Y = np.zeros((len(times), n), dtype=complex)
    overflow = np.zeros(len(times), dtype=bool)
    logt = _log_times(times)
    with np.errstate(over="ignore", invalid="ignore"):
        for j, lam in enumerate(lams):
            growth = np.exp(times * lam)
            for k in range(int(orders[j])):
                coef = orbits[j, k]
                cmax = float(np.max(np.abs(coef)))
                if cmax == 0.0:
                    continue
                overflow |= _log_bound(lam, k, times, logt, cmax) > LOG_CAP
                weight = growth * times**k / math.factorial(k)
                Y += np.where(overflow, 0.0, weight)[:, None] * coef
    Y[overflow] = np.inf
    return Y, overflow


def _series(z, k):
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(_SERIES_TERMS):
        total += term / (n + k + 1)
        term = term * z / (n + 1)
    return total / math.factorial(k)


def mean_weights(lam, times, order):
    """``(1/t) int_0^t e^{s lam} s^k/k! ds`` for k < order, shape (order, len(times))."""
    times = np.asarray(times, dtype=float)
    z = lam * times
    out = np.empty((order, len(times)), dtype=complex)
    absz = np.abs(z)
    safe = np.where(absz == 0, 1.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        ez = np.exp(z)
        F = (ez - 1.0) / safe
        for k in range(order):
            if k > 0:
                F = (ez / math.factorial(k) - F) / safe
            small = absz <= series_radius(k)
            Fk = F.copy()
            if np.any(small):
                Fk[small] = _series(z[small], k)
            out[k] = times**k * Fk
    return out


def cesaro_grid(lams, orbits, orders, times):
    """Closed-form Cesaro means ``(1/t) int_0^t y(s) ds`` at every grid time (t > 0)."""
    times = np.asarray(times, dtype=float)
    n = orbits.shape[2]
    M = np.zeros((len(times), n), dtype=complex)
    overflow = np.zeros(len(times), dtype=bool)
    logt = _log_times(times)
    for j, lam in enumerate(lams):
        order = int(orders[j])
        weights = mean_weights(lam, times, order)
        for k in range(order):
            coef = orbits[j, k]
            cmax = float(np.max(np.abs(coef)))
            if cmax == 0.0:
                continue
            overflow |= _log_bound(lam, k, times, logt, cmax) > LOG_CAP
            M += np.where(overflow, 0.0, weights[k])[:, None] * coef
    M[overflow] = np.inf
    return M, overflow
