"""Compiled kernels for simultaneous root iteration (coefficients in ascending order)."""
import math

import numpy as np
from numba import njit

EPS = 2.220446049250313e-16


@njit(cache=True)
def newton_ratio(c, z):
    """Return (p(z)/p'(z), at_noise_level, |p(z)| scaled by max(1,|z|)^-n).

    For |z| > 1 the reversed polynomial q(w) = z^-n p(z), w = 1/z, is used so
    nothing overflows: p/p' = z / (n - w q'(w)/q(w)).
    """
    n = c.size - 1
    az = abs(z)
    if az <= 1.0:
        p = c[n] + 0j
        dp = 0j
        bound = abs(c[n])
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + c[k]
            bound = bound * az + abs(c[k])
        noise = abs(p) <= 4.0 * (n + 1) * EPS * bound
        if p == 0:
            return 0j, True, 0.0
        if dp == 0:
            return complex(np.inf), False, abs(p)
        return p / dp, noise, abs(p)
    w = 1.0 / z
    aw = 1.0 / az
    q = c[0] + 0j
    dq = 0j
    bound = abs(c[0])
    for j in range(n - 1, -1, -1):
        dq = dq * w + q
        q = q * w + c[n - j]
        bound = bound * aw + abs(c[n - j])
    noise = abs(q) <= 4.0 * (n + 1) * EPS * bound
    if q == 0:
        return 0j, True, 0.0
    den = n - w * dq / q
    if den == 0:
        return complex(np.inf), False, abs(q)
    return z / den, noise, abs(q)


@njit(cache=True)
def aberth(c, z, tol, max_sweeps):
    """In-place Aberth-Ehrlich iteration on the guesses ``z``; returns sweeps used (-1 if not converged)."""
    n = z.size
    done = np.zeros(n, dtype=np.bool_)
    for sweep in range(max_sweeps):
        all_done = True
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            r, noise, _ = newton_ratio(c, zi)
            s = 0j
            for j in range(n):
                if j != i:
                    s += 1.0 / (zi - z[j])
            corr = r / (1.0 - r * s)
            if math.isfinite(corr.real) and math.isfinite(corr.imag):
                z[i] = zi - corr
            if abs(corr) <= tol * max(1.0, abs(z[i])) or noise:
                done[i] = True
            else:
                all_done = False
        if all_done:
            return sweep + 1
    return -1


@njit(cache=True)
def polish_and_residuals(c, z):
    """One Newton step per root, then normalized residuals |f(z)| / (max|c| max(1,|z|)^n)."""
    n = z.size
    cmax = 0.0
    for k in range(c.size):
        cmax = max(cmax, abs(c[k]))
    res = np.empty(n)
    for i in range(n):
        r, _, _ = newton_ratio(c, z[i])
        if math.isfinite(r.real) and math.isfinite(r.imag):
            z[i] = z[i] - r
        _, _, a = newton_ratio(c, z[i])
        res[i] = a / cmax
    return res
