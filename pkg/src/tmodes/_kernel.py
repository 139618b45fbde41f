"""Compiled trajectory evolution.

The state is kept in Cayley-Klein form ``U = [[a, b], [-conj(b), conj(a)]]``
and each constant-phase segment left-multiplies it by the segment
propagator.  Random draws happen in the same order as
:func:`tmodes.telegraph.sample_trajectory`.
"""

import math

import numba
import numpy as np


@numba.njit(nogil=True, cache=True)
def _phasor(rng):
    while True:
        x = 2.0 * rng.random() - 1.0
        y = 2.0 * rng.random() - 1.0
        r2 = x * x + y * y
        if 0.0 < r2 < 1.0:
            return (x * x - y * y) / r2, 2.0 * x * y / r2


@numba.njit(nogil=True, cache=True, inline="always")
def _rotate(ar, ai, br, bi, er, ei, theta):
    # a' = c a - e s conj(b),  b' = c b + e s conj(a)
    c = math.cos(theta)
    s = math.sin(theta)
    return (c * ar - s * (er * br + ei * bi),
            c * ai - s * (ei * br - er * bi),
            c * br + s * (er * ar + ei * ai),
            c * bi + s * (ei * ar - er * ai))


@numba.njit(nogil=True, cache=True)
def evolve(rng, g0, tau0, times, a_out, b_out):
    """Fill ``a_out[k], b_out[k]`` with ``U(times[k])``; returns the jump count."""
    ar, ai, br, bi = 1.0, 0.0, 0.0, 0.0
    er, ei = _phasor(rng)
    t = 0.0
    jump = tau0 * rng.standard_exponential()
    jumps = 0
    for k in range(times.shape[0]):
        target = times[k]
        while jump < target:
            ar, ai, br, bi = _rotate(ar, ai, br, bi, er, ei, g0 * (jump - t))
            t = jump
            jumps += 1
            er, ei = _phasor(rng)
            jump = t + tau0 * rng.standard_exponential()
        ar, ai, br, bi = _rotate(ar, ai, br, bi, er, ei, g0 * (target - t))
        t = target
        a_out[k] = complex(ar, ai)
        b_out[k] = complex(br, bi)
    return jumps


def evolve_trajectory(rng, g0, tau0, times):
    """Python-facing wrapper returning ``(a, b, n_jumps)``."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    a = np.empty(times.size, dtype=np.complex128)
    b = np.empty(times.size, dtype=np.complex128)
    n = evolve(rng, float(g0), float(tau0), times, a, b)
    return a, b, n
