"""Compiled inner loop for interference fields.

Reproduces bit for bit what :meth:`CounterStream.ragged_uniform` and the NumPy
arithmetic in ``simulate`` would compute, without materialising per-point arrays.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _unit(key, j):
    h = _mix(key ^ ((np.uint64(j) + np.uint64(1)) * _GOLDEN))
    return np.float64(h >> np.uint64(11)) * 2.0 ** -53


@njit(cache=True)
def annulus_power_sums(keys_r, keys_g, counts, inner2, span2, half_alpha, rho, mu):
    """Sum of rho * gamma * r^-alpha per trial, r^2 = inner2 + u * span2, gamma ~ Exp(mu)."""
    n = counts.size
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        kr = keys_r[i]
        kg = keys_g[i]
        for j in range(counts[i]):
            r2 = inner2 + _unit(kr, j) * span2
            gamma = -np.log1p(-_unit(kg, j)) / mu
            if half_alpha == 1.5:
                path = 1.0 / (r2 * np.sqrt(r2))
            elif half_alpha == 2.0:
                path = 1.0 / (r2 * r2)
            else:
                path = r2 ** (-half_alpha)
            acc += rho * gamma * path
        out[i] = acc
    return out
