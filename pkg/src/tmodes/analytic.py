"""Closed-form phase-averaged occupation of mode a.

With ``b = 1/(2 tau0)`` and ``Omega^2 = (2 g0)^2 - b^2`` the averaged
occupation is

    n_a(t) = na0 + (N/2 - na0) * D(t),
    D(t)   = 1 - e^{-b t} [cos(Omega t) + b sin(Omega t) / Omega],

where ``N = na0 + nb0``.  ``Omega`` is real for ``g0 tau0 > 1/4`` (damped
oscillation, WCR), zero at the transition, and imaginary below it (SCR),
where the bracket continues to cosh/sinh.  Regime names follow the
oscillatory = "weak coupling" convention, which is the reverse of common
cavity-QED usage.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

CRITICAL_G0TAU0 = 0.25
CRITICAL_TOL = 1e-12
# |Omega t| below which the even Taylor series replaces cos/cosh
TAYLOR_SWITCH = 1e-3


class RegimeKind(enum.Enum):
    WCR = "WCR"
    CRITICAL = "Critical"
    SCR = "SCR"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    omega: float  # |Omega|; imaginary when kind is SCR
    g0tau0: float

    @property
    def omega_sq(self):
        """Signed ``Omega^2``: negative in the SCR."""
        return -self.omega**2 if self.kind is RegimeKind.SCR else self.omega**2

    @property
    def signed_omega(self):
        """``+|Omega|`` for real, ``-|Omega|`` for imaginary Omega."""
        return -self.omega if self.kind is RegimeKind.SCR else self.omega


@dataclass(frozen=True)
class DampingParams:
    gamma_p: float = 0.0
    gamma_ex: float = 0.0

    def __post_init__(self):
        if self.gamma_p < 0 or self.gamma_ex < 0:
            raise DomainError("damping rates must be >= 0")

    @property
    def gamma(self):
        return self.gamma_p + self.gamma_ex


def _check_positive(g0, tau0):
    if not g0 > 0:
        raise DomainError(f"g0 must be > 0, got {g0}")
    if not tau0 > 0:
        raise DomainError(f"tau0 must be > 0, got {tau0}")


def omega(g0, tau0):
    """``Omega = sqrt((2 g0)^2 - 1/(2 tau0)^2)`` with its regime."""
    _check_positive(g0, tau0)
    x = g0 * tau0
    b = 0.5 / tau0
    if abs(x - CRITICAL_G0TAU0) <= CRITICAL_TOL:
        return Regime(RegimeKind.CRITICAL, 0.0, x)
    # (2g0)^2 - b^2 factored to avoid cancellation near the transition
    sq = (2.0 * g0 - b) * (2.0 * g0 + b)
    kind = RegimeKind.WCR if x > CRITICAL_G0TAU0 else RegimeKind.SCR
    return Regime(kind, math.sqrt(abs(sq)), x)


classify_regime = omega


def effective_rate(g0, tau0):
    """Slowest relaxation rate ``1/(2 tau0) - |Omega|`` outside the WCR.

    Written as ``4 g0^2 / (1/(2 tau0) + |Omega|)``, which is the same
    number without the cancellation as ``g0 tau0 -> 0``; there it tends
    to ``4 g0^2 tau0``.
    """
    reg = omega(g0, tau0)
    if reg.kind is RegimeKind.WCR:
        raise DomainError(f"effective_rate needs g0*tau0 <= 0.25, got {reg.g0tau0}")
    return 4.0 * g0 * g0 / (0.5 / tau0 + reg.omega)


def _taylor_bracket(x):
    # cos(sqrt x) and sin(sqrt x)/sqrt x for signed x = (Omega t)^2
    c = 1.0 - x / 2.0 + x * x / 24.0 - x**3 / 720.0 + x**4 / 40320.0
    s = 1.0 - x / 6.0 + x * x / 120.0 - x**3 / 5040.0 + x**4 / 362880.0
    return c, s


def _transfer_wcr(t, b, w):
    return 1.0 - np.exp(-b * t) * (np.cos(w * t) + (b / w) * np.sin(w * t))


def _transfer_scr(t, b, w, rate):
    # e^{-bt}[cosh wt + (b/w) sinh wt] = e^{-rate t} B with B a sum of
    # positive terms.  Where that product is small, 1 - e^{-rate t} B is
    # exact to rounding.  Elsewhere the expm1 split avoids cancelling
    # against 1, at the price of terms of size b/w that cancel as D -> 1.
    em = np.expm1(-2.0 * w * t)
    tail = np.exp(-rate * t) * (0.5 * (2.0 + em) - 0.5 * (b / w) * em)
    split = (-0.5 * (1.0 + b / w) * np.expm1(-rate * t)
             + 0.5 * (rate / w) * np.expm1(-(b + w) * t))
    return np.where(tail < 0.5, 1.0 - tail, split)


def transfer(t, g0, tau0):
    """Normalised transfer ``D(t)``; ``n_a = na0 + (N/2 - na0) D``."""
    reg = omega(g0, tau0)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    b = 0.5 / tau0
    w = reg.omega
    out = np.empty_like(t)
    small = np.abs(w * t) < TAYLOR_SWITCH
    if np.any(small):
        ts = t[small]
        c, s = _taylor_bracket(reg.omega_sq * ts * ts)
        out[small] = 1.0 - np.exp(-b * ts) * (c + b * ts * s)
    big = ~small
    if np.any(big):
        if reg.kind is RegimeKind.WCR:
            out[big] = _transfer_wcr(t[big], b, w)
        else:
            out[big] = _transfer_scr(t[big], b, w, effective_rate(g0, tau0))
    return out if out.ndim else float(out)


def occupation(t, g0, tau0, na0, nb0):
    """Averaged ``n_a(t)`` for initial occupations ``na0``, ``nb0``."""
    if na0 < 0 or nb0 < 0:
        raise DomainError("initial occupations must be >= 0")
    return na0 + (0.5 * (na0 + nb0) - na0) * transfer(t, g0, tau0)


def mean_na(t, params):
    """Averaged ``n_a(t)`` for a :class:`~tmodes.ensemble.SimParams`."""
    return occupation(t, params.g0, params.tau0, params.na0, params.nb0)


def wcr_na(t, n_b, g0, tau0):
    """Mode-a occupation for ``|0>_a |n_b>_b`` in the oscillatory regime."""
    reg = omega(g0, tau0)
    if reg.kind is not RegimeKind.WCR:
        raise DomainError(f"wcr_na needs g0*tau0 > 0.25, got {reg.g0tau0}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    return 0.5 * n_b * _transfer_wcr(t, 0.5 / tau0, reg.omega)


def scr_na(t, n_b, g0, tau0):
    """Mode-a occupation for ``|0>_a |n_b>_b`` in the overdamped regime.

    ``(n_b/2) [1 - e^{-t/2tau0} (cosh |Omega| t + sinh(|Omega| t) / (2 tau0 |Omega|))]``,
    evaluated through the same cancellation-free rearrangement as
    :func:`transfer`.
    """
    reg = omega(g0, tau0)
    if reg.kind is not RegimeKind.SCR:
        raise DomainError(f"scr_na needs g0*tau0 < 0.25, got {reg.g0tau0}")
    return 0.5 * n_b * transfer(t, g0, tau0)


def polariton_na(t, n_b, g0, damping):
    """``(n_b/2) [1 - e^{-gamma t/2} cos(2 g0 t)]`` with ``gamma = gamma_p + gamma_ex``."""
    t = np.asarray(t, dtype=float)
    return 0.5 * n_b * (1.0 - np.exp(-0.5 * damping.gamma * t) * np.cos(2.0 * g0 * t))
