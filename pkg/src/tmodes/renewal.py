"""Phase-averaged kernels and the renewal equations they drive.

Averaging the bilinear products of propagator entries over a uniform phase
leaves four real 2x2 matrices (the "G-matrices") with entries ``cos^2`` and
``sin^2`` of ``g0 dt``.  Conditioning on the last phase jump gives

    rho_im(tau) = e^{-tau/tau0} Tr[G^{im}(tau) rho(0)]
                  + (1/tau0) int_0^tau e^{-(tau-t)/tau0} Tr[G^{im}(tau-t) rho(t)] dt.

For the populations this couples ``rho_11`` and ``rho_22`` through
``cos^2`` / ``sin^2`` kernels; the coherence ``rho_12`` obeys a scalar
equation with the ``cos^2`` kernel alone.

The equations are marched on a uniform grid with product-trapezoidal
quadrature: the unknown is interpolated linearly between nodes and the
kernel (a sum of complex exponentials) is integrated exactly against each
hat function.  The node at the current time enters implicitly.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import matprop
from .errors import DomainError

RESOLUTION = 20


@dataclass(frozen=True, eq=False)
class GSet:
    """``G^{im}`` for ``(i, m)`` in ``{11, 12, 21, 22}``; element ``[l, k]``."""

    dt: float
    g11: np.ndarray
    g12: np.ndarray
    g21: np.ndarray
    g22: np.ndarray

    def tensor(self):
        """Array ``G[i, m, l, k]`` (zero-based indices)."""
        return np.array([[self.g11, self.g12], [self.g21, self.g22]])

    def average_density(self, rho):
        """Phase-averaged ``U rho U^dagger``: ``out[i, m] = Tr(G^{im} rho)``."""
        return np.einsum("imlk,kl->im", self.tensor(), np.asarray(rho))


@dataclass(frozen=True, eq=False)
class RenewalGrid:
    h: float
    n_steps: int
    times: np.ndarray
    rho11: np.ndarray
    rho22: np.ndarray


def g_matrices(g0, dt):
    if dt < 0:
        raise DomainError(f"dt must be >= 0, got {dt}")
    c2 = np.cos(g0 * dt) ** 2
    s2 = np.sin(g0 * dt) ** 2
    g12 = np.array([[0.0, 0.0], [c2, 0.0]])
    return GSet(dt, np.diag([c2, s2]), g12, g12.T.copy(), np.diag([s2, c2]))


def g_matrices_mc(g0, dt, samples, seed=0):
    """Monte Carlo estimate of :func:`g_matrices` by direct phase averaging.

    ``G^{im}_{lk} = < U_ik conj(U_ml) >`` over uniform phases.  Entries are
    complex; the ones carrying ``e^{+-i phi}`` average to zero.
    """
    if samples < 1000:
        raise DomainError("use at least 1000 samples")
    phi = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, samples)
    u = np.array([np.asarray(matprop.propagator(g0, p, dt)) for p in phi])
    g = np.einsum("nik,nml->imlk", u, u.conj()) / samples
    return GSet(dt, g[0, 0], g[0, 1], g[1, 0], g[1, 1])


# -- product-trapezoidal weights --------------------------------------------

def _hat_weights(lam, h, n):
    """Weights for ``int_0^{kh} e^{lam u} p(kh - u) du`` with p piecewise linear.

    Returns ``(w, w_end)``, each of length ``n + 1``.  For any ``k <= n``
    the integral equals ``sum_{m<k} w[m] p((k - m) h) + w_end[k] p(0)``:
    interior nodes collect weight from both adjacent intervals, the oldest
    node only from the interval on its right.
    """
    z = lam * h
    if abs(z) < 1e-3:
        k = np.arange(8)
        fact = np.cumprod(np.concatenate(([1.0], np.arange(1, 8, dtype=float))))
        # int_0^1 e^{z v} dv and int_0^1 v e^{z v} dv as power series
        i0 = h * np.sum(z**k / (fact * (k + 1)))
        i1 = h * np.sum(z**k / (fact * (k + 2)))
    else:
        ez = np.exp(z)
        i0 = h * (ez - 1.0) / z
        i1 = h * (ez * (z - 1.0) + 1.0) / (z * z)
    # on u in [(m-1)h, mh]: i1 goes to node m (u = mh), i0 - i1 to node m - 1
    scale = np.exp(lam * h * np.arange(n))
    w = np.zeros(n + 1, dtype=complex)
    w[1:] += scale * i1
    w[:-1] += scale * (i0 - i1)
    w_end = np.zeros(n + 1, dtype=complex)
    w_end[1:] = scale * i1
    return w, w_end


def _kernel_weights(g0, tau0, h, n):
    """Weights of ``e^{-u/tau0} cos^2(g0 u)/tau0`` and the ``sin^2`` analogue.

    Returns ``((wc, wc_end), (ws, ws_end))``; see :func:`_hat_weights`.
    """
    decay = _hat_weights(-1.0 / tau0, h, n)
    osc = _hat_weights(complex(-1.0 / tau0, 2.0 * g0), h, n)
    cos2 = tuple((d.real + o.real) / (2.0 * tau0) for d, o in zip(decay, osc))
    sin2 = tuple((d.real - o.real) / (2.0 * tau0) for d, o in zip(decay, osc))
    return cos2, sin2


def _check_step(params, h, n_steps):
    limit = min(params.tau0, 1.0 / params.g0) / RESOLUTION
    if not h > 0:
        raise DomainError(f"step h must be > 0, got {h}")
    if h > limit * (1.0 + 1e-12):
        raise DomainError(f"step h = {h} under-resolves the dynamics; need h <= {limit}")
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")


def _initial_density(params):
    if params.rho0 is not None:
        return params.rho0
    return np.diag([params.na0, params.nb0]).astype(complex) / params.N


def solve_populations(params, h, n_steps):
    """Averaged populations on ``t = 0, h, ..., n_steps h``.

    The initial density is ``params.rho0`` when set, otherwise
    ``diag(na0, nb0) / N``.
    """
    _check_step(params, h, n_steps)
    rho0 = _initial_density(params)
    p0 = np.array([rho0[0, 0].real, rho0[1, 1].real])
    t = h * np.arange(n_steps + 1)
    (wc, wc_end), (ws, ws_end) = _kernel_weights(params.g0, params.tau0, h, n_steps)
    decay = np.exp(-t / params.tau0)
    c2 = np.cos(params.g0 * t) ** 2
    s2 = 1.0 - c2
    p = np.empty((n_steps + 1, 2))
    p[0] = p0
    # implicit part: weight of the current node, m = 0
    lhs = np.eye(2) - np.array([[wc[0], ws[0]], [ws[0], wc[0]]])
    for n in range(1, n_steps + 1):
        hist = p[n - 1::-1]  # p[n-1], ..., p[0] pairs with m = 1..n
        mc = np.append(wc[1:n], wc_end[n])
        ms = np.append(ws[1:n], ws_end[n])
        rhs = decay[n] * np.array([c2[n] * p0[0] + s2[n] * p0[1],
                                   s2[n] * p0[0] + c2[n] * p0[1]])
        rhs += np.array([mc @ hist[:, 0] + ms @ hist[:, 1],
                         ms @ hist[:, 0] + mc @ hist[:, 1]])
        p[n] = np.linalg.solve(lhs, rhs)
    return RenewalGrid(h, n_steps, t, p[:, 0], p[:, 1])


def solve_coherence(params, h, n_steps):
    """Averaged ``rho_12`` on ``t = 0, h, ..., n_steps h`` (complex array)."""
    _check_step(params, h, n_steps)
    x0 = complex(_initial_density(params)[0, 1])
    t = h * np.arange(n_steps + 1)
    (wc, wc_end), _ = _kernel_weights(params.g0, params.tau0, h, n_steps)
    forcing = np.exp(-t / params.tau0) * np.cos(params.g0 * t) ** 2 * x0
    x = np.empty(n_steps + 1, dtype=complex)
    x[0] = x0
    for n in range(1, n_steps + 1):
        mem = wc[1:n] @ x[n - 1:0:-1] + wc_end[n] * x[0]
        x[n] = (forcing[n] + mem) / (1.0 - wc[0])
    return x


def residual_check(series, params, times=None):
    """Largest residual of the occupation renewal equation.

    ``series`` is a callable ``n_a(t)`` or a :class:`~tmodes.ensemble.TimeSeries`
    (cubic-spline interpolated).  The equation is used in its decaying form

        n(tau) = na0 e^{-tau/tau0} cos(2 g0 tau) + N e^{-tau/tau0} sin^2(g0 tau)
                 + (1/tau0) int_0^tau e^{-(tau-t)/tau0}
                   [n(t) cos(2 g0 (tau-t)) + N sin^2(g0 (tau-t))] dt,

    which is the exponentially weighted form multiplied by ``e^{-tau/tau0}``.
    Integrals use adaptive quadrature.  Residuals are evaluated at
    ``times`` (default: the series grid, or ``params.t_grid``).
    """
    if callable(series):
        n_of = series
        grid = params.t_grid if times is None else times
        eps = 1e-13
    else:
        n_of = CubicSpline(series.times, series.mean)
        grid = series.times if times is None else times
        eps = 1e-10  # a spline cannot carry more than this anyway
    g0, tau0 = params.g0, params.tau0
    na0, big_n = params.na0, params.N

    def integrand(t, tau):
        u = tau - t
        return np.exp(-u / tau0) * (n_of(t) * np.cos(2 * g0 * u) + big_n * np.sin(g0 * u) ** 2)

    worst = 0.0
    for tau in np.asarray(grid, dtype=float):
        if tau == 0:
            worst = max(worst, abs(float(n_of(0.0)) - na0))
            continue
        # the memory kernel lives within a few tau0 of the upper limit
        split = [max(0.0, tau - 40 * tau0)] if tau > 40 * tau0 else None
        mem, _ = integrate.quad(integrand, 0.0, tau, args=(tau,), limit=400,
                                epsabs=eps, epsrel=100 * eps, points=split)
        e = np.exp(-tau / tau0)
        rhs = (na0 * e * np.cos(2 * g0 * tau) + big_n * e * np.sin(g0 * tau) ** 2
               + mem / tau0)
        worst = max(worst, abs(float(n_of(tau)) - rhs))
    return worst
