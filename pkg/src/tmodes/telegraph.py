"""Random-telegraph phase noise.

The coupling phase is piecewise constant.  Hold times are exponential with
mean ``tau0`` and every segment gets a fresh phase, uniform on ``[0, 2pi)``
and independent of all others.  The first segment starts at ``t = 0``.

Randomness: trajectory ``i`` under base seed ``s`` draws from its own
generator, ``PCG64(SeedSequence(s, spawn_key=(i,)))``.  Draw order along a
trajectory is phase, interval, phase, interval, ... which the compiled
ensemble kernel reproduces exactly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class NoiseParams:
    tau0: float
    seed: int = 42

    def __post_init__(self):
        if not self.tau0 > 0:
            raise DomainError(f"tau0 must be > 0, got {self.tau0}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One realisation of the phase process on ``[0, horizon]``.

    ``phases[k]`` holds on ``(jump_times[k-1], jump_times[k])`` with the
    convention ``jump_times[-1] = 0`` and ``jump_times[len] = horizon``.
    """

    horizon: float
    jump_times: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        jumps = np.asarray(self.jump_times, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        if not self.horizon > 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        if phases.shape != (jumps.size + 1,):
            raise DomainError("need exactly one more phase than jump times")
        if jumps.size and (jumps[0] <= 0 or jumps[-1] >= self.horizon
                           or np.any(np.diff(jumps) <= 0)):
            raise DomainError("jump times must increase strictly inside (0, horizon)")
        if np.any(phases < 0) or np.any(phases >= TWO_PI):
            raise DomainError("phases must lie in [0, 2pi)")
        object.__setattr__(self, "jump_times", jumps)
        object.__setattr__(self, "phases", phases)

    @property
    def n_jumps(self):
        return self.jump_times.size

    @property
    def boundaries(self):
        return np.concatenate(([0.0], self.jump_times, [self.horizon]))

    def durations(self):
        return np.diff(self.boundaries)

    def segments(self, until=None):
        """Yield ``(phase, duration)`` pairs covering ``[0, until]``."""
        until = self.horizon if until is None else until
        if until < 0 or until > self.horizon:
            raise DomainError(f"time {until} outside [0, {self.horizon}]")
        start = 0.0
        for phase, end in zip(self.phases, np.append(self.jump_times, self.horizon)):
            stop = min(end, until)
            yield phase, stop - start
            if end >= until:
                return
            start = end


def trajectory_rng(seed, index=0):
    """Private generator for trajectory ``index`` under ``seed``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_interval(rng, tau0, size=None):
    """Exponential hold time(s) with mean ``tau0``."""
    return tau0 * rng.standard_exponential(size)


def _polar_pair(rng):
    while True:
        x = 2.0 * rng.random() - 1.0
        y = 2.0 * rng.random() - 1.0
        r2 = x * x + y * y
        if 0.0 < r2 < 1.0:
            return x, y


def sample_phase(rng, size=None):
    """Uniform phase(s) on ``[0, 2pi)``.

    A point is drawn uniformly in the unit disc and its polar angle doubled,
    so the phasor ``e^{i phi}`` is available without trigonometry; the
    ensemble kernel relies on that.  ``size=None`` consumes the generator
    pair by pair, matching the trajectory stream.  With ``size`` the
    rejection step runs in bulk and the stream differs.
    """
    if size is None:
        x, y = _polar_pair(rng)
        return math.fmod(2.0 * math.atan2(y, x) + TWO_PI, TWO_PI)
    n = int(np.prod(size))
    out = np.empty(0)
    while out.size < n:
        xy = 2.0 * rng.random((2, max(2 * (n - out.size), 16))) - 1.0
        r2 = np.sum(xy**2, axis=0)
        keep = (r2 > 0) & (r2 < 1)
        out = np.concatenate((out, 2.0 * np.arctan2(xy[1, keep], xy[0, keep])))
    return np.mod(out[:n], TWO_PI).reshape(size)


def sample_trajectory(params, horizon, index=0):
    """Draw trajectory ``index`` of the ensemble keyed by ``params.seed``."""
    if not horizon > 0:
        raise DomainError(f"horizon must be > 0, got {horizon}")
    rng = trajectory_rng(params.seed, index)
    phases = [sample_phase(rng)]
    jumps = []
    t = sample_interval(rng, params.tau0)
    while t < horizon:
        jumps.append(t)
        phases.append(sample_phase(rng))
        t = t + sample_interval(rng, params.tau0)
    return Trajectory(horizon, np.array(jumps), np.array(phases))


def write_trajectory(path, traj, params):
    """Debug dump: a header line, then ``t_jump<TAB>phase`` per segment.

    The first row is ``0`` with the initial phase.
    """
    with open(path, "w") as fh:
        fh.write(f"# tau0={float(params.tau0)!r} seed={params.seed} "
                 f"horizon={float(traj.horizon)!r}\n")
        for t, phi in zip(np.concatenate(([0.0], traj.jump_times)), traj.phases):
            fh.write(f"{float(t)!r}\t{float(phi)!r}\n")


def read_trajectory(path):
    """Inverse of :func:`write_trajectory`; returns ``(trajectory, params)``."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise DomainError(f"{path}: missing header line")
        meta = dict(item.split("=", 1) for item in header[1:].split())
        rows = [line.split("\t") for line in fh if line.strip()]
    times = np.array([float(r[0]) for r in rows])
    phases = np.array([float(r[1]) for r in rows])
    params = NoiseParams(float(meta["tau0"]), int(meta["seed"]))
    return Trajectory(float(meta["horizon"]), times[1:], phases), params
