"""Monte Carlo averages over telegraph-phase trajectories.

Each trajectory is evolved exactly by composing constant-phase
propagators.  Mode operators close under the 2x2 propagator (the
Hamiltonian is quadratic), so for initial number states

    n_a(t) = |U11|^2 na0 + |U12|^2 nb0

on every trajectory, and a single-excitation density matrix evolves as
``U rho0 U^dagger``.

Trajectories are processed in fixed blocks of ``BLOCK`` indices.  Each
block reduces to (count, mean, centred sum of squares) and blocks are
merged in index order, so the result does not depend on how many worker
threads ran the blocks.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import matprop
from ._kernel import evolve_trajectory
from .errors import DomainError
from .telegraph import trajectory_rng

BLOCK = 256


@dataclass(frozen=True, eq=False)
class SimParams:
    g0: float = 1.0
    tau0: float = 1.0
    na0: float = 0.0
    nb0: float = 2.0
    rho0: np.ndarray | None = None
    t_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 20.0, 400))
    ensemble_size: int = 10_000
    base_seed: int = 42
    omega_a: float = 0.0  # metadata; the interaction picture never applies it
    omega_b: float = 0.0

    def __post_init__(self):
        if not self.g0 > 0:
            raise DomainError(f"g0 must be > 0, got {self.g0}")
        if not self.tau0 > 0:
            raise DomainError(f"tau0 must be > 0, got {self.tau0}")
        if self.na0 < 0 or self.nb0 < 0:
            raise DomainError("na0 and nb0 must be >= 0")
        grid = np.asarray(self.t_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise DomainError("t_grid must be strictly increasing and start at >= 0")
        object.__setattr__(self, "t_grid", grid)
        if int(self.ensemble_size) != self.ensemble_size or self.ensemble_size < 1:
            raise DomainError(f"ensemble_size must be a positive integer, got {self.ensemble_size}")
        if not 0 <= self.base_seed < 2**64:
            raise DomainError("base_seed must fit in an unsigned 64-bit integer")
        if self.rho0 is not None:
            rho = np.asarray(self.rho0, dtype=complex)
            if rho.shape != (2, 2) or np.max(np.abs(rho - rho.conj().T)) > matprop.HERMITIAN_TOL:
                raise DomainError("rho0 must be a Hermitian 2x2 matrix")
            if abs(np.trace(rho) - 1.0) > 1e-12:
                raise DomainError("rho0 must have unit trace")
            object.__setattr__(self, "rho0", rho)

    @property
    def N(self):
        return self.na0 + self.nb0

    @property
    def horizon(self):
        return float(self.t_grid[-1])


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    M: int

    def __post_init__(self):
        if not (len(self.times) == len(self.mean) == len(self.stderr)):
            raise DomainError("times, mean and stderr must have equal lengths")


@dataclass(frozen=True, eq=False)
class DensitySeries:
    """Element-wise ensemble average of the 2x2 density matrix.

    ``mean`` has shape ``(len(times), 2, 2)``; ``stderr`` is real and holds
    ``sqrt((var(Re) + var(Im)) / M)`` per element.
    """

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    M: int

    def element(self, i, j):
        return TimeSeries(self.times, self.mean[:, i, j], self.stderr[:, i, j], self.M)


# -- single trajectories ---------------------------------------------------

def propagator_on_trajectory(traj, params, t):
    """Total ``U(t)`` for one trajectory, built from :mod:`matprop`."""
    if t > traj.horizon:
        raise DomainError(f"t = {t} is beyond the trajectory horizon {traj.horizon}")
    return matprop.compose_all(matprop.propagator(params.g0, phi, dt)
                               for phi, dt in traj.segments(t))


def occupation_on_trajectory(traj, params, t):
    u = np.asarray(propagator_on_trajectory(traj, params, t))
    return abs(u[0, 0]) ** 2 * params.na0 + abs(u[0, 1]) ** 2 * params.nb0


def density_on_trajectory(traj, params, t):
    if params.rho0 is None:
        raise DomainError("params.rho0 is required")
    return matprop.conjugate_density(propagator_on_trajectory(traj, params, t), params.rho0)


# -- ensembles ---------------------------------------------------------------

def trajectory_factors(params, index):
    """Cayley-Klein entries ``a = U11``, ``b = U12`` of trajectory ``index`` on the grid."""
    rng = trajectory_rng(params.base_seed, index)
    a, b, _ = evolve_trajectory(rng, params.g0, params.tau0, params.t_grid)
    return a, b


def _occupations(a, b, params):
    pa = a.real**2 + a.imag**2
    pb = b.real**2 + b.imag**2
    return pa * params.na0 + pb * params.nb0, pb * params.na0 + pa * params.nb0


def _densities(a, b, rho):
    # U = [[a, b], [-conj(b), conj(a)]], rho(t) = U rho0 U^dagger
    u = np.empty(a.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = a
    u[..., 0, 1] = b
    u[..., 1, 0] = -b.conj()
    u[..., 1, 1] = a.conj()
    return u @ rho @ np.swapaxes(u.conj(), -1, -2)


def trajectory_occupations(params, indices):
    """Per-trajectory ``(n_a, n_b)``, each of shape ``(len(indices), len(t_grid))``."""
    rows = [_occupations(*trajectory_factors(params, i), params) for i in indices]
    return np.array([r[0] for r in rows]), np.array([r[1] for r in rows])


def _block_stats(values):
    m = values.mean(axis=0)
    dev = values - m
    return values.shape[0], m, np.sum((dev * dev.conj()).real, axis=0)


def _merge(acc, part):
    # Chan et al. pairwise update; applied in block order only
    n1, m1, s1 = acc
    n2, m2, s2 = part
    n = n1 + n2
    delta = m2 - m1
    return n, m1 + delta * (n2 / n), s1 + s2 + (delta * delta.conj()).real * (n1 * n2 / n)


def _run_blocks(params, observe, workers):
    m = int(params.ensemble_size)
    starts = range(0, m, BLOCK)

    def block(start):
        stop = min(start + BLOCK, m)
        return _block_stats(np.array([observe(*trajectory_factors(params, i))
                                      for i in range(start, stop)]))

    workers = workers or os.cpu_count() or 1
    if workers == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    n, mean, m2 = acc
    stderr = np.sqrt(m2 / (n - 1) / n)
    return mean, stderr


def _check_ensemble(params):
    if params.ensemble_size < 2:
        raise DomainError("need ensemble_size >= 2 for a standard error")


def mc_average_occupation(params, workers=None):
    """Ensemble mean and standard error of ``n_a`` on ``params.t_grid``."""
    _check_ensemble(params)
    mean, stderr = _run_blocks(params, lambda a, b: _occupations(a, b, params)[0], workers)
    return TimeSeries(params.t_grid, mean, stderr, int(params.ensemble_size))


def mc_average_density(params, workers=None):
    """Ensemble mean and standard error of ``U rho0 U^dagger``."""
    _check_ensemble(params)
    if params.rho0 is None:
        raise DomainError("params.rho0 is required")
    mean, stderr = _run_blocks(params, lambda a, b: _densities(a, b, params.rho0), workers)
    return DensitySeries(params.t_grid, mean, stderr, int(params.ensemble_size))
