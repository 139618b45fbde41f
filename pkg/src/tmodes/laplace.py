"""Laplace-domain form of the relaxation problem and a numerical inverter.

The inverted quantity is ``f(t) = n_a(t) e^{t/tau0}``.  Its transform is

    f_hat(s) = [na0 s + 2 N g0^2 / (s - 1/tau0)] / [(s - b)^2 + Omega^2],

with ``b = 1/(2 tau0)`` and ``Omega^2 = 4 g0^2 - b^2``.  Poles sit at
``1/tau0`` and ``b +/- i Omega``.

Transforms are evaluated with ordinary arithmetic operators so the same
callables work on Python complex numbers and on mpmath values; the
inverter runs at elevated mpmath precision.
"""

import math
import warnings
from dataclasses import dataclass

import mpmath

from .errors import DomainError

POLE_TOL = 1e-12


class InversionWarning(RuntimeWarning):
    """Estimates at two consecutive orders disagree beyond tolerance."""


@dataclass(frozen=True)
class LaplaceParams:
    g0: float
    tau0: float
    na0: float
    N: float

    @classmethod
    def from_sim(cls, params):
        return cls(params.g0, params.tau0, params.na0, params.na0 + params.nb0)

    @property
    def omega_sq(self):
        return 4.0 * self.g0**2 - 0.25 / self.tau0**2

    def poles(self):
        """Poles of ``f_hat`` as Python complex numbers."""
        b = 0.5 / self.tau0
        w = complex(self.omega_sq) ** 0.5
        return [complex(1.0 / self.tau0), b + 1j * w, b - 1j * w]


def f_hat(s, p):
    """Transform of ``n_a(t) e^{t/tau0}``."""
    b = 0.5 / p.tau0
    quad = (s - b) ** 2 + p.omega_sq
    shifted = s - 1.0 / p.tau0
    if abs(quad) < POLE_TOL or abs(shifted) < POLE_TOL:
        raise DomainError(f"s = {s} is a pole of f_hat")
    return p.na0 * s / quad + p.N * (2.0 * p.g0) ** 2 / (2.0 * shifted * quad)


def kernel_transforms(s, g0, tau0, *, continued=False):
    """Transforms of ``cos(2 g0 t)``, ``e^{t/tau0}`` and ``sin^2(g0 t)``.

    The integrals converge for ``Re(s) > 1/tau0`` only.  ``continued=True``
    drops that check and returns the analytic continuation, which is what a
    real-axis inverter samples at small ``s``.
    """
    if not continued and mpmath.re(s) <= 1.0 / tau0:
        raise DomainError("kernel transforms need Re(s) > 1/tau0")
    w2 = 4.0 * g0 * g0
    g_hat = s / (s * s + w2)
    h_hat = 1.0 / (s - 1.0 / tau0)
    j_hat = 2.0 * g0 * g0 / (s * (s * s + w2))
    return g_hat, h_hat, j_hat


def f_hat_from_kernels(s, p):
    """``f_hat`` assembled from the transformed convolution equation."""
    g_hat, h_hat, j_hat = kernel_transforms(s, p.g0, p.tau0)
    num = p.na0 * g_hat + p.N * j_hat + (p.N / p.tau0) * h_hat * j_hat
    return num / (1.0 - g_hat / p.tau0)


def residues(p):
    """``[(pole, residue), ...]`` for the simple poles of ``f_hat``.

    The double pole at ``Omega = 0`` is not handled.
    """
    a, z1, z2 = p.poles()
    if abs(z1 - z2) < POLE_TOL:
        raise DomainError("residues undefined at the critical point (double pole)")

    def num(s):
        return p.na0 * s * (s - a) + 2.0 * p.N * p.g0**2

    return [(a, num(a) / ((a - z1) * (a - z2))),
            (z1, num(z1) / ((z1 - a) * (z1 - z2))),
            (z2, num(z2) / ((z2 - a) * (z2 - z1)))]


def invert_by_residues(p, t):
    """``f(t)`` as a sum over poles; real part of the residue sum."""
    return sum(r * _cexp(z * t) for z, r in residues(p)).real


def _cexp(z):
    return math.exp(z.real) * complex(math.cos(z.imag), math.sin(z.imag))


def unwrap_na(inverted_f, t, tau0):
    """``n_a(t) = e^{-t/tau0} f(t)``."""
    if t < 0:
        raise DomainError("t must be >= 0")
    return math.exp(-t / tau0) * inverted_f


def _gaver_functionals(transform, t, m):
    tau = mpmath.log(2) / t
    fi = [None] + [transform(k * tau) for k in range(1, 2 * m + 1)]
    out = []
    for n in range(1, m + 1):
        acc = mpmath.mpf(0)
        for i in range(n + 1):
            acc += (-1) ** i * mpmath.binomial(n, i) * fi[n + i]
        out.append(tau * mpmath.factorial(2 * n)
                   / (mpmath.factorial(n) * mpmath.factorial(n - 1)) * acc)
    return out


def _gwr(transform, t, order):
    seq = _gaver_functionals(transform, t, order)
    prev = [mpmath.mpf(0)] * (len(seq) + 1)
    cur = list(seq)
    best = cur[-1]
    for k in range(1, order):
        nxt = []
        for n in range(len(cur) - 1):
            d = cur[n + 1] - cur[n]
            if d == 0:
                return best
            nxt.append(prev[n + 1] + k / d)
        prev, cur = cur, nxt
        if k % 2 == 0:
            best = cur[-1]
    return best


def _stehfest(transform, t, order):
    half = order // 2
    ln2t = mpmath.log(2) / t
    fac = mpmath.factorial
    total = mpmath.mpf(0)
    for k in range(1, order + 1):
        v = mpmath.mpf(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            v += (mpmath.mpf(j) ** half * fac(2 * j)
                  / (fac(half - j) * fac(j) * fac(j - 1) * fac(k - j) * fac(2 * j - k)))
        total += (-1) ** (k + half) * v * transform(k * ln2t)
    return total * ln2t


_METHODS = {"gwr": _gwr, "stehfest": _stehfest}


def _invert_once(transform, t, order, method, dps):
    with mpmath.workdps(dps or max(30, int(2.2 * order))):
        value = _METHODS[method](transform, mpmath.mpf(t), order)
        return float(mpmath.re(value))


def invert_numeric(transform, t, order=32, *, method="gwr", tol=1e-8, dps=None,
                   full_output=False):
    """Invert a Laplace transform at ``t > 0`` by a real-axis scheme.

    ``method`` is ``"gwr"`` (Gaver functionals with Wynn-rho acceleration)
    or ``"stehfest"``; both sample ``transform`` only at real ``s``.  The
    estimate is repeated at ``order - 2``; if the two differ by more than
    ``tol`` (absolute, scaled by ``max(1, |value|)``) an
    :class:`InversionWarning` is issued.  With ``full_output`` returns
    ``(value, info)`` where ``info`` holds ``previous``, ``difference`` and
    ``converged``.

    Inverting a function that grows like ``e^{t/tau0}`` and oscillates
    costs accuracy as ``t`` grows; for the relaxation transform use
    ``g0 t <= 20`` and raise ``order`` with ``t``.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if order < 8 or order % 2:
        raise DomainError(f"order must be even and >= 8, got {order}")
    if method not in _METHODS:
        raise DomainError(f"unknown method {method!r}")
    value = _invert_once(transform, t, order, method, dps)
    previous = _invert_once(transform, t, order - 2, method, dps)
    diff = abs(value - previous)
    converged = diff <= tol * max(1.0, abs(value))
    if not converged:
        warnings.warn(f"inverse Laplace at t={t} not converged at order {order}: "
                      f"|delta| = {diff:.3e}", InversionWarning, stacklevel=2)
    if full_output:
        return value, {"previous": previous, "difference": diff, "converged": converged}
    return value


def convergence_table(transform, t, orders, *, method="gwr", dps=None):
    """``[(order, value, |value - value_at_previous_order|), ...]``.

    The differences shrink until they hit the working-precision floor; the
    last rows show that plateau.
    """
    rows = []
    last = None
    for order in orders:
        v = _invert_once(transform, t, order, method, dps)
        rows.append((order, v, float("nan") if last is None else abs(v - last)))
        last = v
    return rows


def suggested_order(g0, tau0, t):
    """Order that keeps the relaxation transform to ~1e-9 for ``g0 t <= 20``.

    From a build-time scan over WCR parameters down to ``g0 tau0 = 0.26``:
    32 suffices for ``g0 t`` of a few, then each unit of ``g0 t`` costs about
    six Gaver terms and each unit of ``t/tau0`` about two.
    """
    n = max(32, math.ceil(6.0 * g0 * t + 2.0 * t / tau0))
    return n + n % 2


def mean_na_numeric(t, params, order=None, **kw):
    """Oracle for the averaged occupation: invert ``f_hat`` then unwrap.

    ``order=None`` picks :func:`suggested_order`.
    """
    p = LaplaceParams.from_sim(params)
    if t == 0:
        return float(p.na0)
    order = order or suggested_order(p.g0, p.tau0, t)
    f = invert_numeric(lambda s: f_hat(s, p), t, order, **kw)
    return unwrap_na(f, t, params.tau0)
