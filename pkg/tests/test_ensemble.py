import math

import numpy as np
import pytest

from tmodes import analytic, ensemble, renewal
from tmodes.ensemble import SimParams
from tmodes.errors import DomainError
from tmodes.telegraph import NoiseParams, Trajectory, sample_trajectory


def still(horizon, phase=0.0):
    return Trajectory(horizon, [], [phase])


def test_zero_jump_rabi_transfer():
    p = SimParams(g0=1.3, na0=0.0, nb0=3.0)
    for t in (0.0, 0.4, 2.0):
        n = ensemble.occupation_on_trajectory(still(5.0, 1.1), p, t)
        assert n == pytest.approx(3.0 * math.sin(1.3 * t) ** 2, abs=1e-14)


def test_time_zero_gives_initial_occupation():
    p = SimParams(na0=1.25, nb0=0.5)
    traj = sample_trajectory(NoiseParams(0.2, 3), 4.0)
    assert ensemble.occupation_on_trajectory(traj, p, 0.0) == 1.25


def test_time_beyond_horizon_rejected():
    with pytest.raises(DomainError):
        ensemble.occupation_on_trajectory(still(1.0), SimParams(), 1.5)


def test_full_swap_density():
    p = SimParams(rho0=np.diag([1.0, 0.0]))
    rho = ensemble.density_on_trajectory(still(5.0, 0.3), p, math.pi / 2)
    assert np.allclose(rho, np.diag([0.0, 1.0]), atol=1e-15)


def test_mixed_state_invariant():
    p = SimParams(rho0=np.eye(2) / 2)
    traj = sample_trajectory(NoiseParams(0.5, 8), 6.0)
    for t in (0.0, 1.0, 5.5):
        assert np.allclose(ensemble.density_on_trajectory(traj, p, t), np.eye(2) / 2, atol=1e-15)


def test_superposition_against_direct_product():
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]])
    p = SimParams(g0=1.0, rho0=rho0)
    c = s = math.sqrt(0.5)
    u = np.array([[c, s], [-s, c]])
    want = u @ rho0 @ u.T
    got = ensemble.density_on_trajectory(still(2.0, 0.0), p, math.pi / 4)
    assert np.allclose(got, want, atol=1e-15)


def test_density_needs_rho0():
    with pytest.raises(DomainError):
        ensemble.density_on_trajectory(still(1.0), SimParams(), 0.5)
    with pytest.raises(DomainError):
        ensemble.mc_average_density(SimParams(ensemble_size=10))


def test_kernel_matches_matrix_composition():
    grid = np.linspace(0.0, 8.0, 33)
    p = SimParams(g0=1.1, tau0=0.4, na0=0.3, nb0=1.7, t_grid=grid, base_seed=17)
    for index in (0, 5, 99):
        traj = sample_trajectory(NoiseParams(p.tau0, p.base_seed), grid[-1], index)
        a, b = ensemble.trajectory_factors(p, index)
        for k, t in enumerate(grid):
            u = np.asarray(ensemble.propagator_on_trajectory(traj, p, t))
            assert abs(u[0, 0] - a[k]) <= 1e-13 and abs(u[0, 1] - b[k]) <= 1e-13


def test_per_trajectory_conservation():
    p = SimParams(g0=1.0, tau0=0.3, na0=0.4, nb0=2.1, t_grid=np.linspace(0, 30, 301))
    na, nb = ensemble.trajectory_occupations(p, range(300))
    assert np.max(np.abs(na + nb - p.N)) <= 1e-12


def test_no_noise_ensemble():
    grid = np.linspace(0, 20, 200)
    p = SimParams(g0=1.0, tau0=1e6, na0=0.0, nb0=2.0, t_grid=grid, ensemble_size=10_000)
    ts = ensemble.mc_average_occupation(p)
    gate = 3 * ts.stderr + 1e-12 * p.N
    assert np.all(np.abs(ts.mean - 2 * np.sin(grid) ** 2) <= gate)


def test_fixture_point_large_ensemble():
    p = SimParams(g0=1.0, tau0=1.0, na0=0.0, nb0=2.0, t_grid=np.array([1.0]),
                  ensemble_size=100_000)
    ts = ensemble.mc_average_occupation(p)
    assert abs(ts.mean[0] - analytic.mean_na(1.0, p)) <= 4 * ts.stderr[0]
    assert abs(ts.mean[0] - 1.07) <= 0.01


def test_single_trajectory_rejected():
    with pytest.raises(DomainError):
        ensemble.mc_average_occupation(SimParams(ensemble_size=1))


def test_params_validation():
    for bad in (dict(g0=0.0), dict(tau0=-1.0), dict(na0=-0.1), dict(ensemble_size=0),
                dict(ensemble_size=2.5), dict(t_grid=[0.0, 1.0, 1.0]), dict(t_grid=[-1.0, 0.0]),
                dict(rho0=np.array([[1, 1], [0, 0]])), dict(rho0=np.eye(2)), dict(base_seed=-1)):
        with pytest.raises(DomainError):
            SimParams(**bad)


def test_stderr_scaling():
    grid = np.linspace(0.5, 10, 40)
    small = ensemble.mc_average_occupation(SimParams(t_grid=grid, ensemble_size=1000))
    big = ensemble.mc_average_occupation(SimParams(t_grid=grid, ensemble_size=4000, base_seed=7))
    assert 1.8 <= np.mean(small.stderr / big.stderr) <= 2.2


def test_worker_count_does_not_change_results():
    p = SimParams(tau0=0.7, t_grid=np.linspace(0, 10, 50), ensemble_size=1500)
    one = ensemble.mc_average_occupation(p, workers=1)
    four = ensemble.mc_average_occupation(p, workers=4)
    assert np.array_equal(one.mean, four.mean) and np.array_equal(one.stderr, four.stderr)


def test_density_invariant_state():
    p = SimParams(rho0=np.eye(2) / 2, t_grid=np.linspace(0, 5, 11), ensemble_size=300)
    ds = ensemble.mc_average_density(p)
    assert np.allclose(ds.mean, np.eye(2) / 2, atol=1e-15)
    assert np.all(ds.stderr <= 1e-15)


def test_density_populations_match_renewal():
    grid = np.linspace(0, 20, 81)
    p = SimParams(g0=1.0, tau0=1.0, rho0=np.diag([1.0, 0.0]), t_grid=grid, ensemble_size=10_000)
    ds = ensemble.mc_average_density(p)
    r = renewal.solve_populations(p, 1 / 40, 800)
    oracle11, oracle22 = r.rho11[::10], r.rho22[::10]
    for (i, ref) in ((0, oracle11), (1, oracle22)):
        s = ds.element(i, i)
        assert np.all(np.abs(s.mean.real - ref) <= 4 * s.stderr + 1e-12)
    trace = ds.mean[:, 0, 0] + ds.mean[:, 1, 1]
    assert np.max(np.abs(trace - 1)) <= 1e-12


def test_density_hermitian_mean():
    rho0 = np.array([[0.6, 0.3 + 0.2j], [0.3 - 0.2j, 0.4]])
    p = SimParams(rho0=rho0, t_grid=np.linspace(0, 10, 21), ensemble_size=2000)
    ds = ensemble.mc_average_density(p)
    assert np.max(np.abs(ds.mean - np.conj(np.swapaxes(ds.mean, 1, 2)))) <= 1e-12


def test_coherence_envelope_decays():
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]])
    grid = np.linspace(0, 10, 401)
    p = SimParams(g0=1.0, tau0=1.0, rho0=rho0, t_grid=grid, ensemble_size=20_000)
    s = ensemble.mc_average_density(p).element(0, 1)
    mag = np.abs(s.mean)
    # successive local maxima of |rho12| must not grow beyond the noise
    peaks = [k for k in range(1, len(grid) - 1) if mag[k] >= mag[k - 1] and mag[k] >= mag[k + 1]]
    for a, b in zip(peaks, peaks[1:]):
        assert mag[b] <= mag[a] + 4 * (s.stderr[a] + s.stderr[b])
    assert mag[-1] < 0.1 * mag[0]
